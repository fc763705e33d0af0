"""Chart domains and deterministic sample points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SAMPLER = "numpy-PCG64/uniform-box/v1"
DEFAULT_MARGIN = 0.05


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """An open coordinate box ``lo < x < hi`` with named coordinates."""

    names: tuple
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if not (len(self.names) == len(self.lo) == len(self.hi)):
            raise ChartError("chart names and bounds differ in length")
        if len(set(self.names)) != len(self.names):
            raise ChartError(f"duplicate coordinate names {self.names}")
        for name, a, b in zip(self.names, self.lo, self.hi):
            if not a < b:
                raise ChartError(f"empty interval for {name}: ({a}, {b})")

    @classmethod
    def box(cls, spec):
        """Build from ``[(name, lo, hi), ...]``."""
        names, lo, hi = zip(*spec)
        return cls(tuple(names), tuple(float(v) for v in lo), tuple(float(v) for v in hi))

    @property
    def dim(self):
        return len(self.names)

    @property
    def width(self):
        return np.subtract(self.hi, self.lo)

    @property
    def center(self):
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))

    def shrunk(self, margin=DEFAULT_MARGIN):
        """Bounds pulled in by ``margin`` times the box width on each side."""
        if not 0 <= margin < 0.5:
            raise ChartError(f"margin must lie in [0, 0.5), got {margin}")
        w = self.width
        return np.asarray(self.lo) + margin * w, np.asarray(self.hi) - margin * w

    def contains(self, points, margin=DEFAULT_MARGIN):
        lo, hi = self.shrunk(margin)
        pts = np.atleast_2d(points)
        return np.all((pts >= lo) & (pts <= hi), axis=-1)

    def check(self, points, margin=DEFAULT_MARGIN):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.dim:
            raise ChartError(f"point has {pts.shape[-1]} coordinates, chart has {self.dim}")
        bad = ~self.contains(pts, margin)
        if bad.any():
            p = tuple(float(c) for c in pts[np.flatnonzero(bad)[0]])
            raise ChartError(f"point {p} is outside the chart or within the boundary margin")
        return pts

    def sample(self, count, seed=0, margin=DEFAULT_MARGIN):
        """``count`` points uniform in the margin-shrunk box.

        Deterministic in ``(count, seed, margin)``; see ``SAMPLER``.
        """
        if count < 1:
            raise ChartError(f"sample count must be at least 1, got {count}")
        lo, hi = self.shrunk(margin)
        rng = np.random.Generator(np.random.PCG64(seed))
        return lo + (hi - lo) * rng.random((count, self.dim))
