from dataclasses import dataclass


@dataclass
class Point:
    x: float
    y: float

    def scaled(self, factor):
        return Point(self.x * factor, self.y * factor)
