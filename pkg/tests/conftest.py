import math

import numpy as np
import pytest

from singlet_lhv.povm import Effect, Direction, triangle_cap
from singlet_lhv.quantum import Scenario

ACCEPTANCE_LINES = []


def random_direction(rng):
    v = rng.normal(size=3)
    return Direction.of(v)


def random_effect(rng, cap_scale=1.0, boundary_prob=0.1):
    """Valid effect with mu <= min(cap_scale, 1) * min(a0, 2 - a0)."""
    a0 = rng.uniform(0.0, 2.0)
    top = min(cap_scale, 1.0) * triangle_cap(a0)
    mu = top if rng.random() < boundary_prob else rng.uniform(0.0, top)
    return Effect(a0, mu, random_direction(rng))


def random_scenario(rng):
    return Scenario(random_effect(rng), random_effect(rng))


def random_kappa_scenario(rng, kappa):
    return Scenario(random_effect(rng, kappa), random_effect(rng, 1.0 / (2.0 * kappa)))


def random_eta_scenario(rng, eta, boundary_prob=0.1):
    a0 = rng.uniform(1.0 / eta, 2.0 - 1.0 / eta)
    mu_a = rng.uniform(0.0, triangle_cap(a0))
    b0 = rng.uniform(0.0, 2.0)
    cap_b = triangle_cap(b0)
    top = cap_b if mu_a == 0 else min(cap_b, cap_b / (2.0 * eta * mu_a))
    mu_b = top if rng.random() < boundary_prob else rng.uniform(0.0, top)
    return Scenario(Effect(a0, mu_a, random_direction(rng)), Effect(b0, mu_b, random_direction(rng)))


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rotate(d: Direction, rot) -> Direction:
    return Direction.of(rot @ d.as_array())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


SQRT_HALF = 1.0 / math.sqrt(2.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
