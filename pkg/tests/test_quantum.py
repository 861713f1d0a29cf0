import math
import warnings

import numpy as np
import pytest

from singlet_lhv.errors import InvalidRegion, OptimizerDidNotConverge
from singlet_lhv.povm import X, Y, Z, Direction, Effect, make_effect
from singlet_lhv.quantum import (
    ChshSetting,
    Scenario,
    chsh_max,
    chsh_value,
    correlator,
    random_direction_search,
    singlet_joint,
    singlet_joint_oracle,
)

from conftest import SQRT_HALF, random_effect, random_rotation, random_scenario, rotate


def with_dot(a0, mu_a, b0, mu_b, dot):
    """Scenario with Alice along z and Bob at the given cosine."""
    return Scenario(
        make_effect(a0, mu_a, Z),
        make_effect(b0, mu_b, [math.sqrt(1 - dot * dot), 0, dot]),
    )


def optimal_directions():
    return Z, X, Direction(1, 0, 1), Direction(-1, 0, 1)


class TestSingletJoint:
    def test_parallel_projective(self):
        j = singlet_joint(with_dot(1, 1, 1, 1, 1.0))
        assert j.as_array() == pytest.approx([0, 0.5, 0.5, 0], abs=1e-15)

    def test_antiparallel(self):
        j = singlet_joint(Scenario(make_effect(1, 1, Z), make_effect(1, 1, -Z)))
        assert j.as_array() == pytest.approx([0.5, 0, 0, 0.5], abs=1e-15)

    def test_generic_value(self):
        s = with_dot(1.2, 0.5, 0.6, 0.3, 0.25)
        assert singlet_joint(s).p_yy == pytest.approx(0.170625, abs=1e-15)
        assert singlet_joint_oracle(s).p_yy == pytest.approx(0.170625, abs=1e-14)

    def test_normalization_and_no_signaling(self, rng):
        for _ in range(10_000):
            s = random_scenario(rng)
            j = singlet_joint(s)
            arr = j.as_array()
            assert np.all(arr >= -1e-15) and np.all(arr <= 1 + 1e-15)
            assert abs(arr.sum() - 1) <= 1e-12
            assert abs(j.p_yy + j.p_yn - s.alice.a0 / 2) <= 1e-12
            assert abs(j.p_yy + j.p_ny - s.bob.a0 / 2) <= 1e-12

    def test_rotation_covariance(self, rng):
        for _ in range(500):
            s = random_scenario(rng)
            rot = random_rotation(rng)
            s2 = Scenario(
                Effect(s.alice.a0, s.alice.mu, rotate(s.alice.dir, rot)),
                Effect(s.bob.a0, s.bob.mu, rotate(s.bob.dir, rot)),
            )
            assert singlet_joint(s2).max_abs_diff(singlet_joint(s)) <= 1e-12


class TestOracle:
    def test_parallel(self):
        assert singlet_joint_oracle(with_dot(1, 1, 1, 1, 1.0)).as_array() == pytest.approx([0, 0.5, 0.5, 0], abs=1e-15)

    def test_deterministic_alice(self, rng):
        for _ in range(20):
            bob = random_effect(rng)
            j = singlet_joint_oracle(Scenario(make_effect(2, 0, X), bob))
            assert j.as_array() == pytest.approx([bob.a0 / 2, (2 - bob.a0) / 2, 0, 0], abs=1e-14)

    def test_singlet_matrix(self):
        from singlet_lhv.quantum import SINGLET

        psi = np.array([0, 1, -1, 0]) / math.sqrt(2)
        assert SINGLET == pytest.approx(np.outer(psi, psi))

    def test_agreement(self, rng):
        for _ in range(1000):
            s = random_scenario(rng)
            assert singlet_joint(s).max_abs_diff(singlet_joint_oracle(s)) <= 1e-12


class TestCorrelator:
    def test_parallel_projective(self):
        assert correlator(with_dot(1, 1, 1, 1, 1.0)) == -1.0

    def test_orthogonal_unbiased(self, rng):
        for _ in range(20):
            mu_a, mu_b = rng.uniform(size=2)
            assert correlator(with_dot(1, mu_a, 1, mu_b, 0.0)) == pytest.approx(0, abs=1e-16)

    def test_biased_example(self):
        s = with_dot(1.5, 0.4, 0.5, 0.4, 1.0)
        j = singlet_joint_oracle(s)
        four_term = j.p_yy + j.p_nn - j.p_yn - j.p_ny
        assert four_term == pytest.approx(-0.41, abs=1e-12)
        assert correlator(s) == pytest.approx(-0.41, abs=1e-15)

    def test_closed_form_vs_table(self, rng):
        for _ in range(2000):
            s = random_scenario(rng)
            assert abs(correlator(s) - singlet_joint(s).correlator()) <= 1e-12


def setting(mu_a=1.0, mu_b=1.0, a0=1.0, b0=1.0, dirs=None):
    a, a1, b, b1 = dirs or optimal_directions()
    return ChshSetting(
        make_effect(a0, mu_a, a), make_effect(a0, mu_a, a1), make_effect(b0, mu_b, b), make_effect(b0, mu_b, b1)
    )


class TestChshValue:
    def test_optimal_projective(self):
        assert chsh_value(setting()) == pytest.approx(-2 * math.sqrt(2), abs=1e-12)

    def test_no_unsharpness(self):
        assert chsh_value(setting(0.0, 0.0)) == 0.0

    def test_threshold_unsharpness(self):
        # direction terms scale by muA * muB = 1/2
        assert chsh_value(setting(SQRT_HALF, SQRT_HALF)) == pytest.approx(-math.sqrt(2), abs=1e-12)


PROJ = [(1, 1), (1, 1)]


class TestChshMax:
    def test_projective(self):
        res = chsh_max(PROJ, PROJ)
        assert res.value == pytest.approx(2 * math.sqrt(2), abs=1e-6)
        assert res.converged

    def test_directions_achieve_value(self, rng):
        alice = [(1.3, 0.5), (0.8, 0.7)]
        bob = [(1.0, 0.9), (0.4, 0.3)]
        res = chsh_max(alice, bob, restarts=8, seed=3)
        assert abs(chsh_value(res.setting(alice, bob))) == pytest.approx(res.value, abs=1e-12)

    def test_no_unsharpness(self, rng):
        for _ in range(10):
            t = rng.uniform(0, 2, 4)
            alice = [(t[0], 0.0), (t[1], 0.0)]
            bob = [(t[2], 0.0), (t[3], 0.0)]
            c = [x - 1 for x in t]
            expect = abs(c[0] * c[2] + c[0] * c[3] + c[1] * c[2] - c[1] * c[3])
            assert chsh_max(alice, bob, restarts=2).value == pytest.approx(expect, abs=1e-12)

    def test_scaled_optimum(self):
        p = [(1, SQRT_HALF), (1, SQRT_HALF)]
        assert chsh_max(p, p).value == pytest.approx(math.sqrt(2), abs=1e-6)

    def test_random_search_never_exceeds(self):
        res = chsh_max(PROJ, PROJ)
        found = random_direction_search(PROJ, PROJ, samples=200_000, seed=7)
        assert found <= res.value + 1e-12
        assert found > 2.7

    def test_deterministic(self):
        alice = [(1.2, 0.5), (0.7, 0.3)]
        bob = [(1.0, 0.4), (1.5, 0.2)]
        assert chsh_max(alice, bob, seed=5) == chsh_max(alice, bob, seed=5)

    def test_monotone_in_mu(self, rng):
        for _ in range(5):
            t = rng.uniform(0.3, 1.7, 4)
            caps = [min(x, 2 - x) for x in t]
            frac = np.sort(rng.uniform(0, 1, 4))
            prev = -1.0
            for f in frac:
                alice = [(t[0], f * caps[0]), (t[1], caps[1] * 0.5)]
                bob = [(t[2], caps[2] * 0.7), (t[3], caps[3] * 0.9)]
                val = chsh_max(alice, bob, restarts=8).value
                assert val >= prev - 1e-9
                prev = val

    def test_invalid_parameters(self):
        with pytest.raises(InvalidRegion):
            chsh_max([(1.5, 0.8), (1, 1)], PROJ)

    def test_nonconvergence_warns(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = chsh_max(PROJ, PROJ, restarts=1, gtol=1e-30)
        assert not res.converged
        assert any(issubclass(w.category, OptimizerDidNotConverge) for w in caught)
        assert res.value == pytest.approx(2 * math.sqrt(2), abs=1e-6)
