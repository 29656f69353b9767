def transpose(matrix):
    return [list(row) for row in zip(*matrix)]


def identity(n):
    return [[1 if r == c else 0 for c in range(n)] for r in range(n)]
