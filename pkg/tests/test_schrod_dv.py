from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilatekit.instances import random_system
from dilatekit.linalg import hermitian_split, matrix_exp, norm2, split_from_parts
from dilatekit.schrod_cv import cv_project
from dilatekit.schrod_dv import (
    SchrodConfig,
    build_grid,
    dilation_defect,
    evolve,
    grid_size,
    initial_modes,
    make_grid,
    projected_evolution,
    recover,
    recover_via_p,
)
from dilatekit.selftest import DEFECT_C

from .strategies import rngs

deltas = st.sampled_from([0.5, 0.3, 0.2, 0.1, 0.05])


class TestGrid:
    def test_half(self):
        g = build_grid(0.5)
        assert g.L == 4.0 and g.N >= 16 and g.N % 2 == 0

    def test_tenth(self):
        g = build_grid(0.1)
        assert g.L == pytest.approx(20.0)
        assert g.N == 400
        assert g.delta_eta <= 0.1 + 1e-15

    def test_nodes_right_endpoints(self):
        g = make_grid(2.0, 4)
        assert np.allclose(g.nodes, [-1.0, 0.0, 1.0, 2.0])

    def test_weight_at_zero(self):
        g = make_grid(10.0, 2000)
        j = int(np.argmin(np.abs(g.nodes)))
        assert g.nodes[j] == pytest.approx(0.0, abs=1e-12)
        assert g.weights[j] == pytest.approx(2 * g.delta_eta / (2 * np.pi))

    @pytest.mark.parametrize("delta", [0, 1, -0.1, 1.5])
    def test_rejects_delta(self, delta):
        with pytest.raises(ValueError):
            grid_size(delta)

    @given(deltas)
    def test_invariants(self, delta):
        g = build_grid(delta)
        assert np.all(np.diff(g.nodes) > 0)
        assert np.all(np.abs(g.nodes) <= g.L + 1e-12)
        assert np.all(g.weights > 0)
        assert 1 - 2 / g.L - g.delta_eta <= g.mass <= 1
        assert g.L * (2 / g.N) <= delta + 1e-12

    def test_mass_matches_independent_sum(self):
        g = build_grid(0.2)
        ref = sum(2 / (e * e + 1) for e in g.nodes) * g.delta_eta / (2 * math.pi)
        assert g.mass == pytest.approx(ref, rel=1e-13)


class TestConfig:
    def test_overrides(self):
        g = SchrodConfig(delta=0.1, L=5.0, N=10).grid()
        assert (g.L, g.N) == (5.0, 10)

    def test_recovery_parsing(self):
        assert SchrodConfig(0.1).p_star is None
        assert SchrodConfig(0.1, recovery="p:1.5").p_star == 1.5
        with pytest.raises(ValueError):
            SchrodConfig(0.1, recovery="median").p_star


class TestModes:
    def test_initial_at_zero(self):
        g = make_grid(1.0, 1)  # single node at eta = 1
        g0 = make_grid(1.0, 2)  # nodes 0 and 1
        assert np.allclose(initial_modes([1.0], g0).modes[0], [2.0])
        assert np.allclose(initial_modes([1.0, 0.0], g).modes[0], [1.0, 0.0])

    def test_zero_data(self):
        assert not np.any(initial_modes(np.zeros(3), build_grid(0.5)).modes)

    def test_zero_time_unchanged(self, rng):
        s = split_from_parts(*random_system(rng, 2))
        st0 = initial_modes([1.0, 2.0], build_grid(0.5))
        assert np.array_equal(evolve(st0, s, 0.0).modes, st0.modes)

    def test_scalar_phase(self):
        g = build_grid(0.5)
        st0 = initial_modes([1.0], g)
        out = evolve(st0, hermitian_split([[1.0]]), 0.8)
        assert np.allclose(out.modes[:, 0], st0.modes[:, 0] * np.exp(-1j * g.nodes * 0.8), atol=1e-14)
        assert out.time == 0.8

    def test_trotter_exact_for_commuting(self):
        s = split_from_parts(np.diag([1.0, 2.0]), np.diag([0.5, -1.0]))
        st0 = initial_modes([1.0, 1.0], build_grid(0.2))
        a = evolve(st0, s, 1.0, K=0).modes
        b = evolve(st0, s, 1.0, K=1).modes
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_rejects_negative(self):
        st0 = initial_modes([1.0], build_grid(0.5))
        with pytest.raises(ValueError):
            evolve(st0, hermitian_split([[1.0]]), 1.0, K=-1)
        with pytest.raises(ValueError):
            evolve(st0, hermitian_split([[1.0]]), -1.0)

    @given(rngs(), st.sampled_from([1, 2, 3]), st.floats(0.1, 3))
    def test_modes_keep_norm(self, rng, n, t):
        s = split_from_parts(*random_system(rng, n))
        st0 = initial_modes(rng.standard_normal(n) + 0j, build_grid(0.3))
        out = evolve(st0, s, t)
        assert np.allclose(np.linalg.norm(out.modes, axis=1), np.linalg.norm(st0.modes, axis=1), atol=1e-10)

    def test_batched_path_matches_direct(self, rng):
        s = split_from_parts(*random_system(rng, 3))
        g = make_grid(4.0, 16)
        u0 = rng.standard_normal(3) + 0j
        out = evolve(initial_modes(u0, g), s, 0.6)
        for j, eta in enumerate(g.nodes):
            ref = matrix_exp(-1j * (eta * s.h1 + s.h2) * 0.6) @ (2 / (eta**2 + 1) * u0)
            assert np.allclose(out.modes[j], ref, atol=1e-12)

    def test_trotter_first_order(self):
        s = split_from_parts(np.diag([1.0, 0.0]), [[0, 1], [1, 0]])
        g = make_grid(2.0, 8)
        st0 = initial_modes([1.0, 0.0], g)
        exact = evolve(st0, s, 1.0).modes[-1]
        Ks = [8, 16, 32, 64, 128]
        errs = [norm2(evolve(st0, s, 1.0, K=K).modes[-1] - exact) for K in Ks]
        slope = np.polyfit(np.log(Ks), np.log(errs), 1)[0]
        assert abs(slope + 1) <= 0.15


class TestRecover:
    def test_zero_time_is_mass(self):
        g = build_grid(0.1)
        u = recover(initial_modes([1.0, -1.0], g))
        assert np.allclose(u, g.mass * np.array([1.0, -1.0]))
        assert norm2(u - np.array([1.0, -1.0])) <= (2 / g.L + g.delta_eta) * math.sqrt(2)

    def test_scalar_decay(self):
        g = build_grid(0.01)
        u = recover(evolve(initial_modes([1.0], g), hermitian_split([[1.0]]), 1.0))
        assert abs(u[0] - math.exp(-1)) <= 0.01 * DEFECT_C

    def test_diagonal_system(self):
        g = build_grid(0.05)
        u0 = np.array([1.0, 1.0]) / math.sqrt(2)
        s = hermitian_split(np.diag([1.0, 2.0]))
        u = recover(evolve(initial_modes(u0, g), s, 0.5))
        ref = np.array([math.exp(-0.5), math.exp(-1.0)]) / math.sqrt(2)
        assert norm2(u - ref) <= dilation_defect(s, 0.5, g) * norm2(u0) + 1e-14

    def test_matches_projected_operator(self, rng):
        s = split_from_parts(*random_system(rng, 3))
        g = build_grid(0.2)
        u0 = rng.standard_normal(3) + 0j
        u = recover(evolve(initial_modes(u0, g), s, 1.0))
        assert np.allclose(u, projected_evolution(s, 1.0, g) @ u0, atol=1e-13)

    @settings(max_examples=6)
    @given(rngs(), st.sampled_from([2, 4]))
    def test_consistent_with_cv(self, rng, n):
        h1, h2 = random_system(rng, n, lambda_min=0.1)
        s = split_from_parts(h1, h2)
        u0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        g = build_grid(0.05)
        dv = recover(evolve(initial_modes(u0, g), s, 1.0))
        cv = cv_project(s, 1.0, u0, tol=1e-8)
        # both sides carry their own truncation: grid defect and the CV tail
        slack = dilation_defect(s, 1.0, g) * norm2(u0) + norm2(cv.value - matrix_exp(-s.matrix) @ u0)
        assert norm2(dv - cv.value) <= slack + 1e-6


class TestRecoverViaP:
    def test_zero_time(self):
        g = build_grid(0.01)
        u = recover_via_p(initial_modes([1.0], g), 1.0)
        assert abs(u[0] - 1.0) <= 0.01

    def test_scalar_decay_agrees_with_sum(self):
        g = build_grid(0.02)
        st1 = evolve(initial_modes([1.0], g), hermitian_split([[1.0]]), 1.0)
        exact = math.exp(-1)
        err_p = abs(recover_via_p(st1, 1.0)[0] - exact)
        err_s = abs(recover(st1)[0] - exact)
        assert abs(recover_via_p(st1, 1.0)[0] - recover(st1)[0]) <= 2 * (err_p + err_s) + 1e-12
        assert err_p <= 0.02

    def test_sign_convention(self):
        # the opposite phase sign reconstructs w at -p* and returns about e instead of 1/e
        g = build_grid(0.02)
        st1 = evolve(initial_modes([1.0], g), hermitian_split([[1.0]]), 1.0)
        flipped = math.e * np.sum(np.exp(1j * g.nodes) * st1.modes[:, 0]) * g.delta_eta / (2 * np.pi)
        assert abs(flipped - math.e) < 0.05
        assert abs(recover_via_p(st1, 1.0)[0] - math.exp(-1)) < 0.05

    def test_diagonal_system(self):
        g = build_grid(0.02)
        s = hermitian_split(np.diag([1.0, 2.0]))
        u0 = np.array([1.0, 1.0]) / math.sqrt(2)
        st1 = evolve(initial_modes(u0, g), s, 0.5)
        ref = np.array([math.exp(-0.5), math.exp(-1.0)]) / math.sqrt(2)
        err_s = norm2(recover(st1) - ref)
        err_p = norm2(recover_via_p(st1, 1.0) - ref)
        assert norm2(recover(st1) - recover_via_p(st1, 1.0)) <= 2 * (err_s + err_p) + 1e-12
        assert err_p <= 0.05

    def test_kink_near_zero_is_worse(self):
        # at t = 0 the kink of exp(-|p|) sits at p = 0
        st0 = initial_modes([1.0], build_grid(0.05))
        with pytest.warns(RuntimeWarning):
            near = abs(recover_via_p(st0, 1e-3)[0] - 1.0)
        assert near > 5 * abs(recover_via_p(st0, 1.0)[0] - 1.0)

    def test_rejects_nonpositive(self):
        st0 = initial_modes([1.0], build_grid(0.5))
        with pytest.raises(ValueError):
            recover_via_p(st0, 0.0)


class TestDefect:
    def test_zero_time_is_mass_deficit(self):
        g = build_grid(0.1)
        assert dilation_defect(hermitian_split([[1.0]]), 0.0, g) == pytest.approx(1 - g.mass)

    def test_scalar_small(self):
        assert dilation_defect(hermitian_split([[1.0]]), 1.0, build_grid(0.1)) <= 0.1 * 5

    def test_scalar_against_direct_sum(self):
        g = build_grid(0.1)
        direct = sum(w * np.exp(-1j * e) for w, e in zip(g.weights, g.nodes))
        assert dilation_defect(hermitian_split([[1.0]]), 1.0, g) == pytest.approx(abs(direct - math.exp(-1)), abs=1e-14)

    def test_halving_reduces(self):
        s = hermitian_split([[1.0]])
        for d in (0.2, 0.1, 0.05):
            ratio = dilation_defect(s, 1.0, build_grid(d / 2)) / dilation_defect(s, 1.0, build_grid(d))
            assert ratio <= 0.8

    def test_requires_positive_lambda0(self):
        with pytest.raises(ValueError):
            dilation_defect(hermitian_split(np.diag([1.0, 0.0])), 1.0, build_grid(0.5))

    def test_requires_psd_h1(self):
        # lambda0(A) > 0 but H1 indefinite
        A = np.array([[2.0, 5.0], [0.0, 2.0]])
        with pytest.raises(ValueError, match="semidefinite"):
            dilation_defect(hermitian_split(A), 1.0, build_grid(0.5))
