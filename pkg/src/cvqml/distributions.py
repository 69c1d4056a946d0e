"""Densities sampled on a uniform grid.

Kept free of any state machinery so the closed-form oracles can share it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Distribution1D:
    grid: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if g.ndim != 1 or g.shape != d.shape or g.size < 2:
            raise ValueError("grid and density must be matching 1-D arrays")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly ascending")
        if np.any(d < 0):
            raise ValueError("density must be nonnegative")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "density", d)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def mass(self) -> float:
        return float(self.density.sum() * self.step)

    def mean(self) -> float:
        return float((self.grid * self.density).sum() * self.step / self.mass())

    def variance(self) -> float:
        m = self.mean()
        return float(((self.grid - m) ** 2 * self.density).sum() * self.step / self.mass())

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.density) * self.step
        return c / c[-1]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "density"])
        for x, d in zip(self.grid, self.density):
            w.writerow([repr(float(x)), repr(float(d))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "Distribution1D":
        rows = list(csv.reader(io.StringIO(text)))
        if rows[0] != ["x", "density"]:
            raise ValueError("expected header x,density")
        data = np.array(rows[1:], dtype=float)
        return cls(data[:, 0], data[:, 1])


def total_variation(d1: Distribution1D, d2: Distribution1D) -> float:
    if d1.grid.shape != d2.grid.shape or np.max(np.abs(d1.grid - d2.grid)) > 1e-12:
        raise ValueError("distributions must share a grid")
    return 0.5 * float(np.abs(d1.density - d2.density).sum() * d1.step)
