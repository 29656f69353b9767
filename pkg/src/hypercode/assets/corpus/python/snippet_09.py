def chunked(sequence, size):
    """Yield successive chunks of the given size."""
    for start in range(0, len(sequence), size):
        yield sequence[start:start + size]
