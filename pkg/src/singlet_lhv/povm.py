"""Two-outcome qubit effects in (a0, mu, direction) parameter space.

An effect is ``E = (a0 I + mu a.sigma) / 2`` with ``0 <= a0 <= 2`` and
``0 <= mu <= min(a0, 2 - a0)``.  The feasible (a0, mu) pairs form a closed
triangle with vertices (0, 0), (1, 1) and (2, 0); the apex (1, 1) is a
projective measurement and the line a0 = 1 holds the unsharp spin observables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidRegion, ZeroDirection

#: absolute tolerance used for every region-boundary comparison
REGION_TOL = 1e-12
#: vectors shorter than this cannot be normalized
ZERO_NORM = 1e-12


@dataclass(frozen=True)
class Direction:
    """Unit vector in R^3.  Components are normalized on construction."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        x, y, z = float(self.x), float(self.y), float(self.z)
        n = math.sqrt(x * x + y * y + z * z)
        if not n >= ZERO_NORM:  # also catches nan
            raise ZeroDirection(f"cannot normalize direction ({x}, {y}, {z})")
        if n != 1.0:
            x, y, z = x / n, y / n, z / n
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @classmethod
    def of(cls, vec) -> "Direction":
        """Build from any length-3 sequence or array (or pass a Direction through)."""
        if isinstance(vec, Direction):
            return vec
        x, y, z = (float(c) for c in np.asarray(vec, dtype=float).reshape(3))
        return cls(x, y, z)

    def __neg__(self) -> "Direction":
        # bypass renormalization so that -(-d) is bit-identical to d
        d = object.__new__(Direction)
        object.__setattr__(d, "x", -self.x)
        object.__setattr__(d, "y", -self.y)
        object.__setattr__(d, "z", -self.z)
        return d

    def dot(self, other: "Direction") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __iter__(self):
        return iter((self.x, self.y, self.z))


X = Direction(1.0, 0.0, 0.0)
Y = Direction(0.0, 1.0, 0.0)
Z = Direction(0.0, 0.0, 1.0)


def triangle_cap(t0: float) -> float:
    """Largest admissible unsharpness for bias ``t0``: ``min(t0, 2 - t0)``."""
    return min(t0, 2.0 - t0)


def region_violation(a0: float, mu: float) -> str | None:
    """Return a description of the violated bound, or None if (a0, mu) is feasible."""
    if not (math.isfinite(a0) and math.isfinite(mu)):
        return "parameters must be finite"
    if a0 < -REGION_TOL or a0 > 2.0 + REGION_TOL:
        return "bias bound 0 <= a0 <= 2 violated"
    if mu < -REGION_TOL:
        return "unsharpness must be nonnegative"
    if mu > triangle_cap(a0) + REGION_TOL:
        return f"unsharpness bound mu <= min(a0, 2 - a0) = {triangle_cap(a0)!r} violated"
    return None


@dataclass(frozen=True)
class Effect:
    """Effect ``(a0 I + mu dir.sigma) / 2`` of a two-outcome POVM {E, I - E}."""

    a0: float
    mu: float
    dir: Direction
    # the effect this one was built as the complement of; lets complement() invert exactly
    _origin: "Effect | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "mu", float(self.mu))
        reason = region_violation(self.a0, self.mu)
        if reason is not None:
            raise InvalidRegion(self.a0, self.mu, reason)
        if not isinstance(self.dir, Direction):
            object.__setattr__(self, "dir", Direction.of(self.dir))

    @property
    def is_projective(self) -> bool:
        return abs(self.a0 - 1.0) <= REGION_TOL and abs(self.mu - 1.0) <= REGION_TOL

    @property
    def is_unsharp_spin(self) -> bool:
        return abs(self.a0 - 1.0) <= REGION_TOL

    def matrix(self) -> np.ndarray:
        """2x2 complex matrix of the effect."""
        from .quantum import PAULI

        n = self.dir
        return 0.5 * (self.a0 * PAULI[0] + self.mu * (n.x * PAULI[1] + n.y * PAULI[2] + n.z * PAULI[3]))


@dataclass(frozen=True)
class SpectralForm:
    """Effect written as ``weight_plus P(+axis) + weight_minus P(-axis)``."""

    weight_plus: float
    weight_minus: float
    axis: Direction


def make_effect(a0: float, mu: float, dir: Sequence[float] | Direction) -> Effect:
    """Validate (a0, mu) against the effect triangle and normalize ``dir``.

    Raises InvalidRegion when the pair is infeasible and ZeroDirection when
    ``dir`` has (numerically) zero length.
    """
    return Effect(a0, mu, Direction.of(dir))


def complement(e: Effect) -> Effect:
    """The effect ``I - E``, i.e. ``(2 - a0, mu, -dir)``.

    Applying this twice returns the original effect object.
    """
    if e._origin is not None:
        return e._origin
    return Effect(2.0 - e.a0, e.mu, -e.dir, _origin=e)


def spectral_decompose(e: Effect) -> SpectralForm:
    """Eigen-weights ``(a0 +- mu) / 2`` on the projectors along +-dir."""
    return SpectralForm(0.5 * (e.a0 + e.mu), 0.5 * (e.a0 - e.mu), e.dir)


def unsharp_effect(mu: float, dir: Sequence[float] | Direction) -> Effect:
    """Unsharp spin effect ``(I + mu dir.sigma) / 2``; needs ``0 <= mu <= 1``."""
    return make_effect(1.0, mu, dir)


def joint_measurability_value(mu1: float, dir1, mu2: float, dir2) -> float:
    """``|mu1 a1 + mu2 a2| + |mu1 a1 - mu2 a2|`` for two unsharp spin observables."""
    a1 = Direction.of(dir1)
    a2 = Direction.of(dir2)
    s = [mu1 * p + mu2 * q for p, q in zip(a1, a2)]
    d = [mu1 * p - mu2 * q for p, q in zip(a1, a2)]
    return math.hypot(*s) + math.hypot(*d)


def jointly_measurable(mu1: float, dir1, mu2: float, dir2) -> bool:
    """Decide joint measurability of two unsharp spin observables.

    The pair is jointly measurable iff the value returned by
    :func:`joint_measurability_value` is at most 2; the boundary counts as
    measurable.
    """
    for mu in (mu1, mu2):
        if not 0.0 - REGION_TOL <= mu <= 1.0 + REGION_TOL:
            raise InvalidRegion(1.0, mu, "unsharpness of a spin observable must lie in [0, 1]")
    return joint_measurability_value(mu1, dir1, mu2, dir2) <= 2.0 + REGION_TOL
