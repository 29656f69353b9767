class Counter:
    def __init__(self):
        self._counts = {}

    def add(self, key):
        self._counts[key] = self._counts.get(key, 0) + 1

    def most_common(self, n=3):
        items = sorted(self._counts.items(), key=lambda kv: -kv[1])
        return items[:n]
