"""Self-test suites behind the ``selftest`` subcommand.

Every suite is a pure function of the seed and returns a table; tables are
written without timing columns so repeated runs are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .blockenc import trotter_error
from .complexity import scaling_fit
from .instances import RNG_NAME, RNG_VERSION, make_rng, random_contraction, random_system
from .io import render_table
from .linalg import norm2, split_from_parts, unitarity_error
from .nagy import compression_defects, dilate_chain, dilate_single
from .schrod_cv import cv_project, residue_oracle, tail_bound
from .schrod_dv import build_grid, dilation_defect

TROTTER_KS = (8, 16, 32, 64, 128)
DEFECT_DELTAS = (0.2, 0.1, 0.05, 0.025)
# defect <= C * delta, calibrated once on the scalar system A = [[1]], t = 1
DEFECT_C = 0.05


@dataclass
class SuiteResult:
    name: str
    columns: list[str]
    rows: list[dict]
    passed: bool
    summary: str


def trotter_pair() -> tuple[np.ndarray, np.ndarray]:
    """Fixed non-commuting pair ``H1 = diag(1, 0)``, ``H2 = [[0, 1], [1, 0]]``."""
    return np.diag([1.0, 0.0]).astype(complex), np.array([[0, 1], [1, 0]], dtype=complex)


def residue_suite(seed: int, systems: int = 20, times=(0.25, 1.0, 3.0), tol: float = 1e-8,
                  R: float = 200.0) -> SuiteResult:
    rng = make_rng(seed)
    dims = (1, 2, 4)
    rows = []
    for i in range(systems):
        n = dims[i % len(dims)]
        h1, h2 = random_system(rng, n, lambda_min=0.1, bound=2.0)
        split = split_from_parts(h1, h2)
        h0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for t in times:
            res = cv_project(split, t, h0, tol=tol, R=R)
            err = norm2(res.value - residue_oracle(split, t, h0))
            bound = 1e-6 + tail_bound(R, norm2(h0))
            rows.append({"system": i, "n": n, "t": t, "error": err, "bound": bound,
                         "evaluations": res.evaluations, "pass": err <= bound})
    ok = all(r["pass"] for r in rows)
    worst = max(r["error"] / r["bound"] for r in rows)
    return SuiteResult("residue", ["system", "n", "t", "error", "bound", "evaluations", "pass"],
                       rows, ok, f"{len(rows)} projections, worst error/bound {worst:.3g}")


def nagy_suite(seed: int, count: int = 20, N: int = 5) -> SuiteResult:
    rng = make_rng(seed)
    dims = (1, 2, 4, 8)
    rows = []
    for i in range(count):
        n = dims[i % len(dims)]
        V = random_contraction(rng, n)
        single = unitarity_error(dilate_single(V).u)
        chain = dilate_chain(V, N)
        defects = compression_defects(chain, V, N)
        rows.append({"instance": i, "n": n, "norm": norm2(V), "single_unitarity": single,
                     "chain_unitarity": unitarity_error(chain.u), "max_compression": max(defects),
                     "pass": single <= 1e-10 and max(defects) <= 1e-10})
    ok = all(r["pass"] for r in rows)
    return SuiteResult("nagy", ["instance", "n", "norm", "single_unitarity", "chain_unitarity",
                                "max_compression", "pass"], rows, ok, f"{count} contractions")


def trotter_suite(seed: int) -> SuiteResult:
    h1, h2 = trotter_pair()
    split = split_from_parts(h1, h2)
    errs = [trotter_error(split, 1.0, K) for K in TROTTER_KS]
    slope = scaling_fit(TROTTER_KS, errs)
    ok = abs(slope + 1) <= 0.15
    rows = [{"K": K, "error": e} for K, e in zip(TROTTER_KS, errs)]
    rows.append({"K": "slope", "error": slope})
    return SuiteResult("trotter", ["K", "error"], rows, ok, f"slope {slope:.4f}")


def defect_suite(seed: int) -> SuiteResult:
    rng = make_rng(seed)
    h1, h2 = random_system(rng, 2, lambda_min=0.5, bound=2.0)
    systems = {
        "scalar": split_from_parts([[1.0]], [[0.0]]),
        "random2": split_from_parts(h1, h2),
    }
    rows = []
    ok = True
    for name, split in systems.items():
        defects = [dilation_defect(split, 1.0, build_grid(d)) for d in DEFECT_DELTAS]
        slope = scaling_fit(DEFECT_DELTAS, defects)
        good = slope >= 0.9 and defects[-1] <= DEFECT_C * DEFECT_DELTAS[-1]
        ok &= good
        for d, e in zip(DEFECT_DELTAS, defects):
            rows.append({"system": name, "delta": d, "defect": e, "slope": slope, "pass": good})
    return SuiteResult("defect", ["system", "delta", "defect", "slope", "pass"], rows, ok,
                       f"C={DEFECT_C}")


SUITES = {
    "residue": residue_suite,
    "nagy": nagy_suite,
    "trotter": trotter_suite,
    "defect": defect_suite,
}


def run_selftest(seed: int, out_dir=None, fmt: str = "csv", suites=None) -> list[SuiteResult]:
    """Run the named suites (all by default); write one table per suite if ``out_dir``."""
    names = list(SUITES) if suites is None else list(suites)
    results = [SUITES[name](seed) for name in names]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        config = {"command": "selftest", "seed": seed, "rng": RNG_NAME, "rng_version": RNG_VERSION}
        for res in results:
            text = render_table(res.rows, res.columns, fmt=fmt,
                                config={**config, "suite": res.name},
                                notes=[f"passed={str(res.passed).lower()} {res.summary}"])
            (out / f"{res.name}.{fmt}").write_text(text)
    return results
