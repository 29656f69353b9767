def moving_average(values, window):
    """Simple trailing moving average."""
    if window <= 0:
        raise ValueError("window must be positive")
    sums = []
    acc = 0.0
    for i, v in enumerate(values):
        acc += v
        if i >= window:
            acc -= values[i - window]
        sums.append(acc / min(i + 1, window))
    return sums
