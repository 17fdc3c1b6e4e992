from __future__ import annotations

import math

import numpy as np
import pytest

from dilatekit.complexity import EstimatorInputs, estimate_block, estimate_schrod
from dilatekit.heat import (
    HEAT_COLUMNS,
    HeatProblem,
    default_initial,
    discretize,
    exact_heat,
    run_heat_benchmark,
    sine_modes,
    thread_cap,
)
from dilatekit.linalg import hermitian_split, matrix_exp, norm2, spectral_profile


class TestDiscretize:
    def test_small(self):
        A = discretize(HeatProblem(n=3))
        assert np.allclose(np.diag(A), 32)
        assert np.allclose(np.diag(A, 1), -16) and np.allclose(np.diag(A, -1), -16)

    def test_sparsity_three(self):
        for n in (3, 8, 64):
            assert spectral_profile(discretize(HeatProblem(n=n))).sparsity == 3

    def test_lowest_eigenvalue(self):
        p = HeatProblem(n=7)
        lam = np.linalg.eigvalsh(discretize(p).real)[0]
        assert lam == pytest.approx((2 / p.h**2) * (1 - math.cos(math.pi * p.h)))

    def test_real_symmetric_without_h2(self):
        s = hermitian_split(discretize(HeatProblem(n=10)))
        assert np.max(np.abs(s.h2)) <= 1e-12
        assert np.max(np.abs(discretize(HeatProblem(n=10)).imag)) == 0

    def test_potential(self):
        A = discretize(HeatProblem(n=3, potential=(1.0, 0.0, 2.0)))
        assert np.allclose(np.diag(A), [33, 32, 34])

    @pytest.mark.parametrize("kw", [dict(n=1), dict(n=3, potential=(1.0,)), dict(n=2, potential=(1.0, -1.0)),
                                    dict(n=3, domain_length=0.0)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            HeatProblem(**kw)


class TestExact:
    def test_zero_time(self):
        p = HeatProblem(n=16)
        u0 = default_initial(p)
        assert np.allclose(exact_heat(p, u0, 0.0), u0)

    def test_first_mode_decay(self):
        p = HeatProblem(n=16)
        lam, phi = sine_modes(p)
        u = exact_heat(p, phi[:, 0], 0.05)
        assert np.allclose(u, math.exp(-lam[0] * 0.05) * phi[:, 0], atol=1e-14)

    def test_modes_are_eigenpairs(self):
        p = HeatProblem(n=9)
        lam, phi = sine_modes(p)
        assert np.allclose(discretize(p).real @ phi, phi * lam, atol=1e-9)
        assert np.allclose(phi.T @ phi, np.eye(9), atol=1e-13)

    @pytest.mark.parametrize("n", [4, 32, 128])
    def test_matches_matrix_exp(self, rng, n):
        p = HeatProblem(n=n)
        u0 = rng.standard_normal(n)
        ref = matrix_exp(-discretize(p) * 0.1) @ u0
        assert norm2(exact_heat(p, u0, 0.1) - ref) <= 1e-10

    def test_potential_falls_back(self, rng):
        p = HeatProblem(n=5, potential=tuple(rng.uniform(0, 3, 5)))
        u0 = rng.standard_normal(5)
        assert np.allclose(exact_heat(p, u0, 0.2), matrix_exp(-discretize(p) * 0.2) @ u0)


@pytest.fixture(scope="module")
def bench():
    return run_heat_benchmark(32, 0.1, [0.2, 0.1, 0.05, 0.025])


class TestBenchmark:
    def test_columns(self, bench):
        assert all(list(r) == HEAT_COLUMNS for r in bench.rows)
        assert [r["delta"] for r in bench.rows] == [0.2, 0.1, 0.05, 0.025]

    def test_error_monotone(self, bench):
        errs = [r["recovery_err"] for r in bench.rows]
        assert all(a > b for a, b in zip(errs, errs[1:]))

    def test_resource_columns_match_formulas(self, bench):
        p = bench.profile
        prob = HeatProblem(n=32)
        u0 = default_initial(prob)
        ratio = norm2(u0) / norm2(exact_heat(prob, u0, 0.1))
        for r in bench.rows:
            inp = EstimatorInputs(norm_ratio=ratio, tau=p.tau, delta=r["delta"], s=p.sparsity,
                                  norm_max=p.norm_max, lambda0=p.lambda0, m=5)
            assert r["block_queries"] == estimate_block(inp).queries
            assert r["schrod_queries"] == estimate_schrod(inp).queries

    def test_timing_off_by_default(self, bench):
        assert all(r["wall_ms"] is None for r in bench.rows)

    def test_notes_flag_norm_max(self, bench):
        assert any("normmax" in note and "not O(1)" in note for note in bench.notes)

    def test_timing_on(self):
        b = run_heat_benchmark(8, 0.1, [0.2], timing=True)
        assert b.rows[0]["wall_ms"] > 0

    def test_threads_do_not_change_rows(self):
        one = run_heat_benchmark(16, 0.1, [0.2, 0.1], workers=1).rows
        two = run_heat_benchmark(16, 0.1, [0.2, 0.1], workers=2).rows
        assert one == two

    def test_limits(self):
        with pytest.raises(ValueError):
            run_heat_benchmark(600, 0.1, [0.1])
        with pytest.raises(ValueError):
            run_heat_benchmark(8, 0.0, [0.1])


def test_thread_cap(monkeypatch):
    monkeypatch.delenv("DILATEKIT_THREADS", raising=False)
    assert thread_cap() == 1
    monkeypatch.setenv("DILATEKIT_THREADS", "4")
    assert thread_cap() == 4
    monkeypatch.setenv("DILATEKIT_THREADS", "many")
    with pytest.raises(ValueError):
        thread_cap()
