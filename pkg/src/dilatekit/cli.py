"""Command-line entry point.

Precedence for every option: built-in default < ``--config`` file < flag.
The config file is TOML with flat keys named after the flags (dashes or
underscores); a table named after the subcommand is merged on top of the
flat keys. Unknown keys are rejected.

Exit status: 0 success, 1 contract or tolerance failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import blockenc, complexity
from .heat import HEAT_COLUMNS, run_heat_benchmark
from .instances import RNG_NAME, RNG_VERSION
from .io import MatrixFormatError, load_matrix, matrix_to_dict, render_table, save_matrix
from .linalg import as_vector, hermitian_split, matrix_exp, norm2, unitarity_error
from .nagy import compression_defects, dilate_chain, dilate_single
from .schrod_cv import QuadratureError, cv_project, residue_oracle
from .schrod_dv import SchrodConfig, dilation_defect, evolve, initial_modes, recover, recover_via_p
from .selftest import SUITES, run_selftest

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "dilate": {"input": None, "mode": "single", "steps": 1, "check_k": None, "out": None},
    "cv-project": {"system": None, "h0": None, "time": None, "tol": 1e-8, "R": 200.0, "out": None},
    "schrod": {"system": None, "u0": None, "time": None, "delta": None, "L": None, "N": None,
               "K": 0, "recovery": "sum", "max_defect": None, "timing": False,
               "out": None, "csv": None, "format": "csv"},
    "blockenc-verify": {"be": None, "alpha": 1.0, "ancillas": 1, "target": None, "delta": 0.0},
    "blockenc-trotter": {"system": None, "time": None, "segments": "8,16,32,64,128",
                         "report": "csv", "out": None},
    "resources": {"method": None, "ratio": 1.0, "tau": None, "delta": None, "s": 1,
                  "normmax": 1.0, "lambda0": 1.0, "m": 1, "out": None, "format": "csv"},
    "heat": {"n": 64, "T": 0.1, "deltas": "0.2,0.1,0.05,0.025", "timing": False,
             "out": None, "format": "csv"},
    "selftest": {"suites": ",".join(SUITES), "out": None, "format": "csv"},
}
COMMON = {"seed": 0}
REQUIRED = {
    "dilate": ["input"],
    "cv-project": ["system", "h0", "time"],
    "schrod": ["system", "u0", "time", "delta"],
    "blockenc-verify": ["be", "target"],
    "blockenc-trotter": ["system", "time"],
    "resources": ["method", "tau", "delta"],
}


class InputError(Exception):
    pass


def _opt(p: argparse.ArgumentParser, *names, **kw) -> None:
    p.add_argument(*names, default=argparse.SUPPRESS, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dilatekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        _opt(p, "--config", dest="config", help="TOML file with option values")
        _opt(p, "--seed", type=int, help="seed for random instances")
        return p

    p = common(sub.add_parser("dilate", help="Nagy dilation of a contraction"))
    _opt(p, "--input", help="matrix JSON for V")
    _opt(p, "--mode", choices=["single", "chain"])
    _opt(p, "--steps", type=int, help="N for the chain dilation")
    _opt(p, "--check-k", dest="check_k", type=int)
    _opt(p, "--out")

    p = common(sub.add_parser("cv-project", help="quadrature of the CV projection"))
    _opt(p, "--system")
    _opt(p, "--h0")
    _opt(p, "--time", type=float)
    _opt(p, "--tol", type=float)
    _opt(p, "--R", dest="R", type=float)
    _opt(p, "--out")

    p = common(sub.add_parser("schrod", help="discretised Schrödingerisation"))
    _opt(p, "--system")
    _opt(p, "--u0")
    _opt(p, "--time", type=float)
    _opt(p, "--delta", type=float)
    _opt(p, "--L", dest="L", type=float)
    _opt(p, "--N", dest="N", type=int)
    _opt(p, "--K", dest="K", type=int)
    _opt(p, "--recovery", help="'sum' or 'p:<p*>'")
    _opt(p, "--max-defect", dest="max_defect", type=float)
    _opt(p, "--timing", action="store_true")
    _opt(p, "--out")
    _opt(p, "--csv")
    _opt(p, "--format", choices=["csv", "json"])

    p = sub.add_parser("blockenc", help="block-encoding checks")
    bsub = p.add_subparsers(dest="action", required=True)
    q = common(bsub.add_parser("verify"))
    _opt(q, "--be")
    _opt(q, "--alpha", type=float)
    _opt(q, "--ancillas", type=int)
    _opt(q, "--target")
    _opt(q, "--delta", type=float, help="declared error")
    q = common(bsub.add_parser("trotter"))
    _opt(q, "--system")
    _opt(q, "--time", type=float)
    _opt(q, "--segments", help="comma-separated K values")
    _opt(q, "--report", "--format", dest="report", choices=["csv", "json"])
    _opt(q, "--out")

    p = common(sub.add_parser("resources", help="resource estimates"))
    _opt(p, "--method", choices=["block", "schrod"])
    _opt(p, "--ratio", type=float)
    _opt(p, "--tau", type=float)
    _opt(p, "--delta", help="one value or a comma-separated list")
    _opt(p, "--s", dest="s", type=int)
    _opt(p, "--normmax", type=float)
    _opt(p, "--lambda0", type=float)
    _opt(p, "--m", dest="m", type=int)
    _opt(p, "--out")
    _opt(p, "--format", choices=["csv", "json"])

    p = common(sub.add_parser("heat", help="heat-equation benchmark"))
    _opt(p, "--n", dest="n", type=int)
    _opt(p, "--T", dest="T", type=float)
    _opt(p, "--deltas")
    _opt(p, "--timing", action="store_true")
    _opt(p, "--out")
    _opt(p, "--format", choices=["csv", "json"])

    p = common(sub.add_parser("selftest", help="run the self-test suites"))
    _opt(p, "--suites")
    _opt(p, "--out", help="directory for the suite tables")
    _opt(p, "--format", choices=["csv", "json"])
    return parser


def _key(args: argparse.Namespace) -> str:
    return f"blockenc-{args.action}" if args.command == "blockenc" else args.command


def resolve_config(args: argparse.Namespace) -> dict:
    key = _key(args)
    allowed = {**COMMON, **DEFAULTS[key]}
    cli = {k: v for k, v in vars(args).items() if k not in ("command", "action", "config")}
    from_file = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            raw = tomllib.loads(path.read_text())
        except OSError as exc:
            raise InputError(f"cannot read config file {path}: {exc.strerror}") from None
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"malformed config file {path}: {exc}") from None
        section = raw.pop(key, None) or raw.pop(args.command, None) or {}
        raw = {k: v for k, v in raw.items() if not isinstance(v, dict)}
        for k, v in {**raw, **section}.items():
            name = k.replace("-", "_")
            if name == "command":
                if v != args.command:
                    raise InputError(f"config file is for command {v!r}, not {args.command!r}")
                continue
            if name not in allowed:
                raise InputError(f"unknown config key {k!r} for {key}")
            from_file[name] = v
    resolved = {**allowed, **from_file, **cli}
    missing = [k for k in REQUIRED.get(key, []) if resolved.get(k) is None]
    if missing:
        raise InputError(f"missing required option(s) for {key}: " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return {"command": key, **resolved}


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _echo(cfg: dict) -> None:
    print("# config: " + json.dumps(cfg, sort_keys=True))


def cmd_dilate(cfg: dict) -> int:
    V = load_matrix(cfg["input"])
    if cfg["mode"] == "single":
        dil = dilate_single(V)
    else:
        dil = dilate_chain(V, int(cfg["steps"]))
    _echo(cfg)
    if cfg["out"]:
        save_matrix(cfg["out"], dil.u)
    uerr = unitarity_error(dil.u)
    print(f"unitarity_error={uerr!r}")
    status = EXIT_OK if uerr <= 1e-10 else EXIT_FAIL
    if cfg["check_k"] is not None:
        K = int(cfg["check_k"])
        if K < 0:
            raise InputError("--check-k must be nonnegative")
        defects = compression_defects(dil, V, K)
        for k, d in enumerate(defects):
            tag = "" if k <= dil.max_exact_power else " (beyond guaranteed range)"
            print(f"k={k} defect={d!r}{tag}")
        guaranteed = defects[: dil.max_exact_power + 1]
        print(f"max_defect={max(defects)!r}")
        print(f"max_defect_guaranteed={max(guaranteed)!r} (k <= {dil.max_exact_power})")
        if max(guaranteed) > 1e-10:
            status = EXIT_FAIL
    return status


def _load_system(path, T=0.0):
    A = load_matrix(path)
    return hermitian_split(A, T)


def cmd_cv_project(cfg: dict) -> int:
    split = _load_system(cfg["system"], abs(cfg["time"]))
    h0 = as_vector(load_matrix(cfg["h0"]), name="h0")
    t = float(cfg["time"])
    _echo(cfg)
    try:
        res = cv_project(split, t, h0, tol=float(cfg["tol"]), R=float(cfg["R"]))
    except QuadratureError as exc:
        print(f"quadrature failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    oracle_err = norm2(res.value - residue_oracle(split, t, h0))
    bound = 1e-6 + res.tail_bound
    doc = {
        "config": cfg,
        "value": matrix_to_dict(res.value),
        "quad_error": res.quad_error,
        "tail_bound": res.tail_bound,
        "evaluations": res.evaluations,
        "oracle_error": oracle_err,
    }
    if cfg["out"]:
        Path(cfg["out"]).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"quad_error={res.quad_error!r} tail_bound={res.tail_bound!r} evaluations={res.evaluations}")
    print(f"oracle_error={oracle_err!r} bound={bound!r}")
    return EXIT_OK if oracle_err <= bound else EXIT_FAIL


SCHROD_COLUMNS = ["delta", "L", "N", "K", "defect", "recovery_error", "wall_ms"]


def cmd_schrod(cfg: dict) -> int:
    import time as _time

    T = float(cfg["time"])
    split = _load_system(cfg["system"], T)
    u0 = as_vector(load_matrix(cfg["u0"]), name="u0")
    if u0.shape[0] != split.dim:
        raise InputError(f"u0 has length {u0.shape[0]}, system has dimension {split.dim}")
    conf = SchrodConfig(delta=float(cfg["delta"]), L=cfg["L"], N=cfg["N"], K=int(cfg["K"]),
                        recovery=str(cfg["recovery"]))
    p_star = conf.p_star
    start = _time.perf_counter()
    grid = conf.grid()
    state = evolve(initial_modes(u0, grid), split, T, conf.K)
    value = recover(state) if p_star is None else recover_via_p(state, p_star)
    reference = matrix_exp(-split.matrix * T) @ u0
    rec_err = norm2(value - reference)
    defect = dilation_defect(split, T, grid)
    wall = (_time.perf_counter() - start) * 1e3
    _echo(cfg)
    row = {"delta": conf.delta, "L": grid.L, "N": grid.N, "K": conf.K, "defect": defect,
           "recovery_error": rec_err, "wall_ms": wall if cfg["timing"] else None}
    if cfg["out"]:
        doc = {"config": cfg, "value": matrix_to_dict(value), **{k: v for k, v in row.items()}}
        Path(cfg["out"]).write_text(json.dumps(doc, indent=2) + "\n")
    table = render_table([row], SCHROD_COLUMNS, fmt=cfg["format"], config=cfg,
                         notes=[f"poisson_mass={grid.mass!r}"])
    if cfg["csv"]:
        Path(cfg["csv"]).write_text(table)
    print(f"defect={defect!r} recovery_error={rec_err!r} mass={grid.mass!r}")
    if cfg["max_defect"] is not None and defect > float(cfg["max_defect"]):
        print(f"defect above bound {cfg['max_defect']!r}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_blockenc_verify(cfg: dict) -> int:
    u = load_matrix(cfg["be"])
    A = load_matrix(cfg["target"])
    be = blockenc.BlockEncoding.from_unitary(u, float(cfg["alpha"]), int(cfg["ancillas"]),
                                             float(cfg["delta"]), A.shape[0])
    err = blockenc.verify(be, A)
    _echo(cfg)
    print(f"error={err!r} declared={be.declared_error!r}")
    return EXIT_OK if err <= be.declared_error + 1e-10 else EXIT_FAIL


def cmd_blockenc_trotter(cfg: dict) -> int:
    T = float(cfg["time"])
    split = _load_system(cfg["system"], T)
    Ks = [int(k) for k in _floats(cfg["segments"])]
    if any(k < 1 for k in Ks):
        raise InputError("segments must be positive integers")
    exact = matrix_exp(-split.matrix * T)
    rows = []
    for K in Ks:
        be = blockenc.trotter_pipeline(split, T, K)
        rows.append({"K": K, "alpha": be.alpha, "ancillas": be.ancillas,
                     "declared_error": be.declared_error, "true_error": blockenc.verify(be, exact)})
    notes = []
    errs = [r["true_error"] for r in rows]
    if len(Ks) >= 3 and all(e > 0 for e in errs):
        notes.append(f"loglog_slope={complexity.scaling_fit(Ks, errs)!r}")
    table = render_table(rows, ["K", "alpha", "ancillas", "declared_error", "true_error"],
                         fmt=cfg["report"], config=cfg, notes=notes)
    _emit(table, cfg["out"])
    return EXIT_OK


RESOURCE_COLUMNS = ["method", "delta", "K", "L", "N", "queries", "gates", "ancillas"]


def cmd_resources(cfg: dict) -> int:
    rows = []
    for d in _floats(cfg["delta"]):
        inp = complexity.EstimatorInputs(
            norm_ratio=float(cfg["ratio"]), tau=float(cfg["tau"]), delta=d, s=int(cfg["s"]),
            norm_max=float(cfg["normmax"]), lambda0=float(cfg["lambda0"]), m=int(cfg["m"]))
        rows.append(complexity.estimate(cfg["method"], inp).row())
    notes = [f"{k}: {v}" for k, v in complexity.FORMULAS[cfg["method"]].items()]
    notes.append("big-O constants set to 1, logarithmic factors dropped")
    _emit(render_table(rows, RESOURCE_COLUMNS, fmt=cfg["format"], config=cfg, notes=notes), cfg["out"])
    return EXIT_OK


def cmd_heat(cfg: dict) -> int:
    bench = run_heat_benchmark(int(cfg["n"]), float(cfg["T"]), _floats(cfg["deltas"]),
                               timing=bool(cfg["timing"]))
    _emit(render_table(bench.rows, HEAT_COLUMNS, fmt=cfg["format"], config=cfg, notes=bench.notes),
          cfg["out"])
    return EXIT_OK


def cmd_selftest(cfg: dict) -> int:
    names = [s.strip() for s in str(cfg["suites"]).split(",") if s.strip()]
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise InputError(f"unknown suite(s): {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    _echo({**cfg, "rng": RNG_NAME, "rng_version": RNG_VERSION})
    results = run_selftest(int(cfg["seed"]), cfg["out"], fmt=cfg["format"], suites=names)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.summary}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


COMMANDS = {
    "dilate": cmd_dilate,
    "cv-project": cmd_cv_project,
    "schrod": cmd_schrod,
    "blockenc-verify": cmd_blockenc_verify,
    "blockenc-trotter": cmd_blockenc_trotter,
    "resources": cmd_resources,
    "heat": cmd_heat,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        with np.errstate(all="raise"):
            return COMMANDS[cfg["command"]](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except MatrixFormatError as exc:
        print(f"error: bad matrix file: {exc}", file=sys.stderr)
    except (ValueError, OverflowError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
