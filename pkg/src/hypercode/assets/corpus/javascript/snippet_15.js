class RetryPolicy {
  constructor(maxAttempts, baseDelayMs) {
    this.maxAttempts = maxAttempts;
    this.baseDelayMs = baseDelayMs;
  }

  delayFor(attempt) {
    const jitter = Math.random() * this.baseDelayMs;
    return this.baseDelayMs * 2 ** attempt + jitter;
  }
}
