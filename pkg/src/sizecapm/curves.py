from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class CurvePoints:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.x)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.y) <= 0))

    def to_csv(self, path=None) -> str:
        """``x,y`` CSV with LF endings; floats use shortest round-trip repr."""
        buf = io.StringIO()
        buf.write("x,y\n")
        for xv, yv in zip(self.x.tolist(), self.y.tolist()):
            buf.write(f"{xv!r},{yv!r}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, newline="\n")
        return text

    @classmethod
    def read_csv(cls, path) -> "CurvePoints":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])
