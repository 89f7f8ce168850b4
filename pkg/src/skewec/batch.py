from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SampleBatch:
    """Draws stacked as rows, with the seed and flip count that produced them.

    ``flip_count`` is the number of rows where the reflected branch fired;
    it is 0 for plain baseline draws.
    """

    points: np.ndarray
    seed: int
    flip_count: int = 0
    meta: str = ""
    m: int = 1

    def __post_init__(self):
        n = self.points.shape[0]
        if not 0 <= self.flip_count <= n:
            raise ValueError(f"flip_count {self.flip_count} outside [0, {n}]")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.points[:, : self.points.shape[1] - self.m]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, self.points.shape[1] - self.m :]

    def header(self) -> list[str]:
        p = self.points.shape[1] - self.m
        return [f"x{i + 1}" for i in range(p)] + [f"y{j + 1}" for j in range(self.m)]

    def to_csv(self, comment: str | None = None) -> str:
        """Render as CSV text; the leading ``#`` line records seed and params id."""
        buf = io.StringIO()
        first = comment if comment is not None else f"seed={self.seed} params={self.meta}"
        buf.write(f"# {first}\n")
        buf.write(",".join(self.header()) + "\n")
        for row in self.points:
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], np.ndarray, list[str]]:
    """Parse CSV text written by this package into (header, values, comment lines)."""
    comments, rows, header = [], [], None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
        elif header is None:
            header = line.split(",")
        else:
            rows.append([float(v) for v in line.split(",")])
    return header or [], np.array(rows, dtype=float), comments
