"""Local hidden-variable protocols for singlet statistics.

Alice and Bob share a direction ``lam`` drawn uniformly from the unit sphere.
Every protocol here has responses of the form

    P_A(yes | lam) = a0/2 + c_A (a . lam)
    P_B(yes | lam) = b0/2 - c_B sgn(b . lam)          (sgn(0) = +1)

and averaging the product over the sphere gives
``a0 b0 / 4 - (c_A c_B / 2)(a . b)``.  Two families are provided:

* :class:`KappaModel` with ``c_A = muA / (2 kappa)`` and ``c_B = kappa muB``,
  admissible when ``muA <= kappa min(a0, 2-a0)`` and
  ``muB <= min(b0, 2-b0) / (2 kappa)``.  ``kappa = 1`` restricts only Bob,
  ``kappa = 1/sqrt(2)`` restricts both sides equally.
* :class:`EtaModel` with ``c_A = 1 / (2 eta)`` and ``c_B = eta muA muB``,
  admissible when ``1/eta <= a0 <= 2 - 1/eta`` and
  ``muA muB <= min(b0, 2-b0) / (2 eta)``.  Alice's unsharpness is a protocol
  constant so that Bob's response stays local.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NotAdmissible, ProtocolMismatch, ZeroSamples
from .povm import REGION_TOL, Direction, Effect, triangle_cap
from .quantum import JointDistribution, Scenario

#: a hidden variable is just a point on the unit sphere
HiddenVariable = Direction

SQRT_HALF = 1.0 / math.sqrt(2.0)
#: samples per Monte Carlo chunk; part of the reproducibility contract
CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class KappaModel:
    kappa: float

    def __post_init__(self):
        k = float(self.kappa)
        if not (math.isfinite(k) and k > 0.0):
            raise ValueError(f"kappa must be a finite positive number, got {self.kappa!r}")
        object.__setattr__(self, "kappa", k)

    @property
    def labels(self) -> tuple[str | None, str | None]:
        """(label, alternative label) for the named members of the family.

        The two fully biased members are named inconsistently in the
        literature, so both conventions are reported.
        """
        k = self.kappa
        if math.isclose(k, SQRT_HALF, abs_tol=1e-12):
            return "M_fs", "M_fs"
        if math.isclose(k, 1.0, abs_tol=1e-12):
            return "M_fb", "M'_fb"
        if math.isclose(k, 0.5, abs_tol=1e-12):
            return "M'_fb", "M_fb"
        return None, None


@dataclass(frozen=True)
class EtaModel:
    eta: float
    mu_a_protocol: float

    def __post_init__(self):
        eta = float(self.eta)
        mu = float(self.mu_a_protocol)
        if not (math.isfinite(eta) and eta >= 1.0):
            raise ValueError(f"eta must be >= 1, got {self.eta!r}")
        if not 0.0 <= mu <= 1.0:
            raise ValueError(f"protocol mu_A must lie in [0, 1], got {self.mu_a_protocol!r}")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "mu_a_protocol", mu)


LhvModel = Union[KappaModel, EtaModel]


@dataclass(frozen=True)
class KappaInterval:
    """Closed interval ``[lo, hi]`` of admissible kappa; ``lo`` is excluded when ``lo_open``."""

    lo: float
    hi: float
    lo_open: bool = False

    def __contains__(self, kappa: float) -> bool:
        above = kappa > self.lo if self.lo_open else kappa >= self.lo
        return above and kappa <= self.hi

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class SimulationResult:
    estimates: JointDistribution
    standard_errors: tuple[float, float, float, float]
    samples: int
    seed: int


# --- admissibility -----------------------------------------------------------


def kappa_violations(m: KappaModel, s: Scenario) -> list[str]:
    a, b = s.alice, s.bob
    out = []
    if a.mu > m.kappa * triangle_cap(a.a0) + REGION_TOL:
        out.append("alice_cap: mu_A <= kappa*min(a0, 2-a0)")
    if b.mu > triangle_cap(b.a0) / (2.0 * m.kappa) + REGION_TOL:
        out.append("bob_cap: mu_B <= min(b0, 2-b0)/(2*kappa)")
    return out


def kappa_admissible(m: KappaModel, s: Scenario) -> bool:
    return not kappa_violations(m, s)


def _check_protocol(m: EtaModel, s: Scenario):
    if abs(s.alice.mu - m.mu_a_protocol) > REGION_TOL:
        raise ProtocolMismatch(
            f"Alice's unsharpness {s.alice.mu!r} differs from the protocol constant {m.mu_a_protocol!r}"
        )


def eta_violations(m: EtaModel, s: Scenario) -> list[str]:
    _check_protocol(m, s)
    a, b = s.alice, s.bob
    out = []
    inv = 1.0 / m.eta
    if a.a0 < inv - REGION_TOL or a.a0 > 2.0 - inv + REGION_TOL:
        out.append("alice_bias_window: 1/eta <= a0 <= 2-1/eta")
    if a.mu * b.mu > triangle_cap(b.a0) / (2.0 * m.eta) + REGION_TOL:
        out.append("product_cap: mu_A*mu_B <= min(b0, 2-b0)/(2*eta)")
    return out


def eta_admissible(m: EtaModel, s: Scenario) -> bool:
    """Both eta-family conditions hold.  Raises ProtocolMismatch on a foreign mu_A."""
    return not eta_violations(m, s)


def violations(model: LhvModel, s: Scenario) -> list[str]:
    if isinstance(model, KappaModel):
        return kappa_violations(model, s)
    if isinstance(model, EtaModel):
        return eta_violations(model, s)
    raise TypeError(f"unknown model type {type(model).__name__}")


def require_admissible(model: LhvModel, s: Scenario):
    bad = violations(model, s)
    if bad:
        raise NotAdmissible(bad)


def find_kappa(s: Scenario) -> KappaInterval | None:
    """All kappa for which the kappa-family admits ``s``, or None if there are none.

    A nonempty set exists iff ``2 muA muB <= min(a0,2-a0) min(b0,2-b0)``.
    With ``muA = 0`` the lower end is 0 (excluded); with ``muB = 0`` the upper
    end is infinite.
    """
    a, b = s.alice, s.bob
    if a.mu <= REGION_TOL:
        lo, lo_open = 0.0, True
    else:
        lo, lo_open = a.mu / triangle_cap(a.a0), False
    hi = math.inf if b.mu <= REGION_TOL else triangle_cap(b.a0) / (2.0 * b.mu)
    if lo > hi:
        # rounding can push the two ends of a single-point interval apart
        if lo - hi <= REGION_TOL * max(1.0, hi):
            return KappaInterval(hi, hi)
        return None
    return KappaInterval(lo, hi, lo_open)


def common_kappa(alice: list[tuple[float, float]], bob: list[tuple[float, float]]) -> KappaInterval | None:
    """Kappa values admitting every (alice, bob) pairing of ``(bias, unsharpness)`` pairs.

    A single model then covers all settings at once, which is what a CHSH
    scenario needs.
    """
    lo, lo_open = 0.0, True
    for t0, mu in alice:
        if mu > REGION_TOL:
            lo, lo_open = max(lo, mu / triangle_cap(t0)), False
    hi = math.inf
    for t0, mu in bob:
        if mu > REGION_TOL:
            hi = min(hi, triangle_cap(t0) / (2.0 * mu))
    if lo > hi:
        if lo - hi <= REGION_TOL * max(1.0, hi):
            return KappaInterval(hi, hi)
        return None
    return KappaInterval(lo, hi, lo_open)


# --- response functions ------------------------------------------------------


def _cos(d: Direction, lam):
    if isinstance(lam, Direction):
        return d.dot(lam)
    return np.asarray(lam, dtype=float) @ d.as_array()


def sgn(x):
    """+1 for x >= 0, -1 otherwise (elementwise for arrays)."""
    if isinstance(x, np.ndarray):
        return np.where(x >= 0.0, 1.0, -1.0)
    return 1.0 if x >= 0.0 else -1.0


def alice_response_kappa(m: KappaModel, e: Effect, lam):
    """Alice's yes-probability ``a0/2 + muA/(2 kappa) cos(alpha)``.

    ``lam`` may be a Direction or an ``(..., 3)`` array of unit vectors.
    """
    return 0.5 * e.a0 + (e.mu / (2.0 * m.kappa)) * _cos(e.dir, lam)


def bob_response_kappa(m: KappaModel, e: Effect, lam):
    return 0.5 * e.a0 - (m.kappa * e.mu) * sgn(_cos(e.dir, lam))


def responses_eta(m: EtaModel, s: Scenario, lam):
    """(Alice, Bob) yes-probabilities of the eta protocol.

    Alice's response does not involve her unsharpness; it reaches Bob's side
    through the protocol constant ``m.mu_a_protocol``.
    """
    _check_protocol(m, s)
    a, b = s.alice, s.bob
    p_a = 0.5 * a.a0 + (1.0 / (2.0 * m.eta)) * _cos(a.dir, lam)
    p_b = 0.5 * b.a0 - (m.eta * m.mu_a_protocol * b.mu) * sgn(_cos(b.dir, lam))
    return p_a, p_b


def responses(model: LhvModel, s: Scenario, lam):
    if isinstance(model, KappaModel):
        return alice_response_kappa(model, s.alice, lam), bob_response_kappa(model, s.bob, lam)
    if isinstance(model, EtaModel):
        return responses_eta(model, s, lam)
    raise TypeError(f"unknown model type {type(model).__name__}")


def response_coefficients(model: LhvModel, s: Scenario) -> tuple[float, float]:
    """``(c_A, c_B)`` in the generic response shape described in the module docstring."""
    if isinstance(model, KappaModel):
        return s.alice.mu / (2.0 * model.kappa), model.kappa * s.bob.mu
    if isinstance(model, EtaModel):
        _check_protocol(model, s)
        return 1.0 / (2.0 * model.eta), model.eta * model.mu_a_protocol * s.bob.mu
    raise TypeError(f"unknown model type {type(model).__name__}")


# --- evaluating the hidden-variable average ---------------------------------


def exact_lhv_joint(model: LhvModel, s: Scenario) -> JointDistribution:
    """Closed-form sphere average of the four response products."""
    require_admissible(model, s)
    c_a, c_b = response_coefficients(model, s)
    a0, b0 = s.alice.a0, s.bob.a0
    # E[(a.lam) sgn(b.lam)] = (a.b)/2 for uniform lam
    cross = 2.0 * c_a * c_b * s.alice.dir.dot(s.bob.dir)
    return JointDistribution(
        0.25 * (a0 * b0 - cross),
        0.25 * (a0 * (2.0 - b0) + cross),
        0.25 * ((2.0 - a0) * b0 + cross),
        0.25 * ((2.0 - a0) * (2.0 - b0) - cross),
    )


def _frame(pole: Direction) -> np.ndarray:
    """Orthonormal rows (u, v, pole)."""
    w = pole.as_array()
    helper = np.array([1.0, 0.0, 0.0]) if abs(w[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(w, helper)
    u /= np.linalg.norm(u)
    v = np.cross(w, u)
    return np.vstack([u, v, w])


def sphere_rule(pole: Direction, n_theta: int = 64, n_phi: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """Product quadrature on the unit sphere, split at the equator of ``pole``.

    Gauss-Legendre in ``cos(theta)`` with ``n_theta // 2`` nodes on each side of
    the equator, times the periodic trapezoid rule with ``n_phi`` points in
    azimuth.  Returns ``(points, weights)`` with weights summing to 1.
    """
    if n_theta < 2 or n_theta % 2:
        raise ValueError("n_theta must be an even number >= 2")
    if n_phi < 1:
        raise ValueError("n_phi must be >= 1")
    x, w = np.polynomial.legendre.leggauss(n_theta // 2)
    # map [-1, 1] onto [0, 1] and [-1, 0]
    t = np.concatenate([0.5 * (x + 1.0), 0.5 * (x - 1.0)])
    wt = np.concatenate([0.5 * w, 0.5 * w])
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(t, phi, indexing="ij")
    r = np.sqrt(1.0 - tt**2)
    local = np.stack([r * np.cos(pp), r * np.sin(pp), tt], axis=-1).reshape(-1, 3)
    weights = (wt[:, None] * np.full(n_phi, 1.0 / n_phi)[None, :]).reshape(-1) / 2.0
    return local @ _frame(pole), weights


def quadrature_lhv_joint(
    model: LhvModel,
    s: Scenario,
    order: tuple[int, int] = (64, 128),
    split: bool = True,
) -> JointDistribution:
    """Numerical sphere average of the response products.

    The polar axis of the rule is Bob's direction, so the sign jump in his
    response falls exactly on the split between the two panels and each panel
    integrand is a low-degree polynomial.  ``split=False`` uses the fixed z
    axis instead; the jump then cuts through the panels and the rule only
    converges slowly.  That variant exists for convergence studies.
    """
    require_admissible(model, s)
    n_theta, n_phi = order
    if n_theta < 8 or n_phi < 16:
        raise ValueError(f"quadrature order must be at least (8, 16), got {order}")
    pts, w = sphere_rule(s.bob.dir if split else Direction(0.0, 0.0, 1.0), n_theta, n_phi)
    p_a, p_b = responses(model, s, pts)
    q_a, q_b = 1.0 - p_a, 1.0 - p_b
    return JointDistribution(
        float(w @ (p_a * p_b)),
        float(w @ (p_a * q_b)),
        float(w @ (q_a * p_b)),
        float(w @ (q_a * q_b)),
    )


# --- Monte Carlo -------------------------------------------------------------


def uniform_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniform unit vectors: z uniform on [-1, 1], azimuth uniform on [0, 2 pi)."""
    z = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    r = np.sqrt(1.0 - z * z)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _cell_products(p_a, p_b):
    q_a, q_b = 1.0 - p_a, 1.0 - p_b
    return np.stack([p_a * p_b, p_a * q_b, q_a * p_b, q_a * q_b], axis=-1)


def _chunk_stats(model, s, seed, index, n, shift):
    rng = np.random.Generator(np.random.Philox(key=[seed, index]))
    lam = uniform_sphere(rng, n)
    p_a, p_b = responses(model, s, lam)
    dev = _cell_products(p_a, p_b) - shift
    return dev.sum(axis=0), (dev * dev).sum(axis=0)


def simulate_lhv(
    model: LhvModel,
    s: Scenario,
    samples: int,
    seed: int,
    workers: int = 1,
) -> SimulationResult:
    """Monte Carlo estimate of the joint table with per-cell standard errors.

    Samples are processed in chunks of :data:`CHUNK_SIZE`; chunk ``k`` draws
    from a Philox generator keyed by ``(seed, k)``, and chunk totals are
    combined with exactly rounded summation.  The result therefore depends
    only on ``(seed, samples)``, never on ``workers``.
    """
    require_admissible(model, s)
    samples = int(samples)
    if samples < 1:
        raise ZeroSamples("samples must be >= 1")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")

    # centre on the products of the mean responses; exact zero variance when mu = 0
    shift = _cell_products(np.float64(0.5 * s.alice.a0), np.float64(0.5 * s.bob.a0))
    n_chunks = -(-samples // CHUNK_SIZE)
    sizes = [min(CHUNK_SIZE, samples - k * CHUNK_SIZE) for k in range(n_chunks)]

    def run(k):
        return _chunk_stats(model, s, seed, k, sizes[k], shift)

    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    else:
        parts = [run(k) for k in range(n_chunks)]

    means, ses = [], []
    for c in range(4):
        total = math.fsum(p[0][c] for p in parts)
        total_sq = math.fsum(p[1][c] for p in parts)
        mean_dev = total / samples
        if samples > 1:
            var = max(0.0, (total_sq - samples * mean_dev * mean_dev) / (samples - 1))
            ses.append(math.sqrt(var / samples))
        else:
            ses.append(math.nan)
        means.append(float(shift[c]) + mean_dev)
    return SimulationResult(JointDistribution(*means), tuple(ses), samples, seed)
