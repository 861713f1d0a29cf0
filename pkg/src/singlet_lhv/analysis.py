"""Restriction measure of admissible parameter regions and kappa sweeps.

Region geometry lives in the (t0, mu) plane, t0 being a0 or b0.  The full
effect triangle has vertices (0, 0), (1, 1), (2, 0) and unit area.  A model
that caps ``mu <= c min(t0, 2 - t0)`` keeps the sub-triangle with apex
(1, min(c, 1)), so its area is ``min(c, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal

import numpy as np

from .errors import InvalidRange

FULL_AREA = 1.0


@dataclass(frozen=True)
class RegionSpec:
    slope_cap: float

    def __post_init__(self):
        c = float(self.slope_cap)
        if not c >= 0.0:
            raise ValueError(f"slope cap must be >= 0, got {self.slope_cap!r}")
        object.__setattr__(self, "slope_cap", c)

    @property
    def effective_cap(self) -> float:
        return min(self.slope_cap, 1.0)

    def contains(self, t0, mu):
        """Vectorized membership test for points of the (t0, mu) plane."""
        t0 = np.asarray(t0)
        mu = np.asarray(mu)
        return (t0 >= 0) & (t0 <= 2) & (mu >= 0) & (mu <= self.effective_cap * np.minimum(t0, 2 - t0))


@dataclass(frozen=True)
class SweepRow:
    kappa: float
    r_alice: float
    r_bob: float


def region_area(r: RegionSpec) -> float:
    return r.effective_cap * FULL_AREA


def region_area_mc(r: RegionSpec, points: int = 10**7, seed: int = 0, batch: int = 10**6) -> tuple[float, float]:
    """Rejection-sampling estimate of the region area in the box [0, 2] x [0, 1].

    Returns ``(estimate, standard_error)``.
    """
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < points:
        n = min(batch, points - done)
        t0 = rng.uniform(0.0, 2.0, n)
        mu = rng.uniform(0.0, 1.0, n)
        hits += int(np.count_nonzero(r.contains(t0, mu)))
        done += n
    frac = hits / points
    box = 2.0
    return box * frac, box * math.sqrt(frac * (1.0 - frac) / points)


def restriction_measure(r: RegionSpec) -> float:
    """Percentage of the effect triangle excluded by the region."""
    return (1.0 - region_area(r) / FULL_AREA) * 100.0


def restriction_alice(kappa: float) -> float:
    return restriction_measure(RegionSpec(kappa))


def restriction_bob(kappa: float) -> float:
    return restriction_measure(RegionSpec(1.0 / (2.0 * kappa)))


def _grid(lo: float, hi: float, steps: int) -> list[float]:
    # decimal arithmetic on the shortest repr keeps "round" grid points exact,
    # e.g. 0.5 and 1.0 on the grid from 0.1 to 2 with 191 steps
    d_lo, d_hi = Decimal(repr(lo)), Decimal(repr(hi))
    step = (d_hi - d_lo) / (steps - 1)
    return [float(d_lo + step * i) for i in range(steps - 1)] + [hi]


def kappa_sweep(kappa_min: float, kappa_max: float, steps: int) -> list[SweepRow]:
    """Restriction percentages for both parties on a uniform kappa grid.

    The grid includes both endpoints; a collapsed range yields a single row.
    """
    kappa_min, kappa_max = float(kappa_min), float(kappa_max)
    if not (math.isfinite(kappa_min) and math.isfinite(kappa_max)):
        raise InvalidRange("kappa range must be finite")
    if not 0.0 < kappa_min <= kappa_max:
        raise InvalidRange(f"need 0 < kappa_min <= kappa_max, got [{kappa_min}, {kappa_max}]")
    if steps < 2:
        raise InvalidRange(f"steps must be >= 2, got {steps}")
    grid = [kappa_min] if kappa_min == kappa_max else _grid(kappa_min, kappa_max, steps)
    return [SweepRow(k, restriction_alice(k), restriction_bob(k)) for k in grid]


def crossing_kappa(lo: float = 0.5, hi: float = 1.0, tol: float = 1e-12) -> float:
    """Bisection for the kappa at which both parties are equally restricted."""

    def diff(k):
        return restriction_alice(k) - restriction_bob(k)

    f_lo = diff(lo)
    if f_lo * diff(hi) > 0:
        raise InvalidRange(f"restriction curves do not cross in [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = diff(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
