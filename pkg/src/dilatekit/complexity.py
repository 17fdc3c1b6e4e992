"""Query, gate and ancilla counts for the two dilation routes.

All big-O constants are 1 and logarithmic factors are dropped, so the
numbers carry exponent information only. ``FORMULAS`` holds the expressions
that reports print next to the values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

FORMULAS = {
    "block": {
        "queries": "ratio^2 * tau^2/delta * (1 + s*normmax/lambda0)",
        "gates": "ratio^2 * tau^2/delta * (m + s*normmax/lambda0)",
        "ancillas": "m",
        "K": "ceil(tau^2/delta'), delta' = delta/ratio",
    },
    "schrod": {
        "queries": "ratio^4 * tau^2/delta^3",
        "gates": "m * queries",
        "ancillas": "m + max(0, log2(tau/delta))",
        "K": "ceil((L*tau)^2/delta'), delta' = delta/ratio",
        "L": "1/delta'",
        "N": "ceil(tau/delta'^2)",
    },
}


@dataclass(frozen=True)
class EstimatorInputs:
    norm_ratio: float
    tau: float
    delta: float
    s: int = 1
    norm_max: float = 1.0
    lambda0: float = 1.0
    m: int = 1

    def delta_prime(self) -> float:
        return self.delta / self.norm_ratio

    def delta_prime_clamped(self) -> float:
        # a growing solution (ratio < 1) would push delta' past 1
        return min(self.delta_prime(), self.delta)


@dataclass(frozen=True)
class ResourceEstimate:
    method: str
    K: int
    L: float | None
    N: int | None
    queries: float
    gates: float
    ancillas: float
    inputs: EstimatorInputs

    def row(self) -> dict:
        return {
            "method": self.method,
            "delta": self.inputs.delta,
            "K": self.K,
            "L": self.L,
            "N": self.N,
            "queries": self.queries,
            "gates": self.gates,
            "ancillas": self.ancillas,
        }


def _check_domain(tau: float, delta_prime: float) -> None:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not 0 < delta_prime < 1:
        raise ValueError(f"delta' must lie in (0, 1), got {delta_prime}")


def trotter_segments(tau: float, delta_prime: float) -> int:
    """First-order Trotter segment count ``ceil(tau**2 / delta')``."""
    _check_domain(tau, delta_prime)
    return math.ceil(tau * tau / delta_prime - 1e-9)


def trotter_segments_schrod(tau: float, delta_prime: float, L: float) -> int:
    """Segment count when the Hamiltonian carries a Fourier mode up to ``L``."""
    return trotter_segments(L * tau, delta_prime)


def schrod_params(tau: float, delta_prime: float) -> tuple[float, int]:
    """Truncation ``L = 1/delta'`` and mode count ``N = ceil(tau / delta'**2)``."""
    _check_domain(tau, delta_prime)
    return 1.0 / delta_prime, math.ceil(tau / delta_prime**2 - 1e-9)


def _check_inputs(inp: EstimatorInputs) -> None:
    if inp.norm_ratio <= 0:
        raise ValueError(f"norm ratio must be positive, got {inp.norm_ratio}")
    if not 0 < inp.delta < 1 or inp.tau <= 0:
        raise ValueError("need 0 < delta < 1 and tau > 0")
    if inp.m < 1 or inp.s < 1:
        raise ValueError("m and s must be at least 1")


def estimate_block(inp: EstimatorInputs) -> ResourceEstimate:
    _check_inputs(inp)
    if inp.lambda0 <= 0:
        raise ValueError(f"lambda0 must be positive, got {inp.lambda0}")
    cond = inp.s * inp.norm_max / inp.lambda0
    base = inp.norm_ratio**2 * inp.tau**2 / inp.delta
    return ResourceEstimate(
        method="block",
        K=trotter_segments(inp.tau, inp.delta_prime_clamped()),
        L=None,
        N=None,
        queries=base * (1 + cond),
        gates=base * (inp.m + cond),
        ancillas=float(inp.m),
        inputs=inp,
    )


def estimate_schrod(inp: EstimatorInputs) -> ResourceEstimate:
    _check_inputs(inp)
    queries = inp.norm_ratio**4 * inp.tau**2 / inp.delta**3
    dp = inp.delta_prime_clamped()
    L, N = schrod_params(inp.tau, dp)
    return ResourceEstimate(
        method="schrod",
        K=trotter_segments_schrod(inp.tau, dp, L),
        L=L,
        N=N,
        queries=queries,
        gates=inp.m * queries,
        ancillas=inp.m + max(0.0, math.log2(inp.tau / inp.delta)),
        inputs=inp,
    )


def estimate(method: str, inp: EstimatorInputs) -> ResourceEstimate:
    if method == "block":
        return estimate_block(inp)
    if method == "schrod":
        return estimate_schrod(inp)
    raise ValueError(f"unknown method {method!r}")


def scaling_fit(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 3:
        raise ValueError("need at least 3 paired points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("scaling fit needs positive data")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
