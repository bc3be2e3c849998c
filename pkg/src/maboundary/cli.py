"""Batch experiment runner: barrier certification, solves, fits and sweeps.

Subcommands (each takes --config, --out, --seed, --threads):

* verify-barrier    certify H[W] > 1 (singular mode) or det D^2 W >= M
                    (degenerate mode) for the configured profile
* solve             grid-solve one problem, write the solution snapshot
* fit-exponent      fit a boundary-decay exponent from a solution snapshot
* iterate-exponents run the exponent-improvement iteration, write its table
* sweep             one CSV row per parameter cell

Exit codes: 0 success, 1 certified-check failure or non-convergence,
2 configuration error.  Reports are JSON; tables are CSV with a
``#schema=1`` header line; solution snapshots are whitespace-separated
text (node index, coordinates, value per line).  Re-running a command
with the same config and seed reproduces all numeric outputs byte for
byte in serial mode; wall times live only in the JSON report, which is
excluded from that guarantee.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import barriers, exponents
from .config import ExperimentConfig, _float_lists, _floats, load_config
from .errors import ConfigError, MABoundaryError
from .exponents import ExponentContext
from .geometry import make_domain
from .solver import (
    GridFunction,
    fit_boundary_exponent,
    ma_solve,
    solve_degenerate,
    solve_singular,
)

SCHEMA_VERSION = 1


def _fmt(x) -> str:
    """Shortest round-trip decimal form; keeps CSV byte-identical across runs."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#schema={SCHEMA_VERSION}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_snapshot(path, domain, fn: GridFunction):
    pts = domain.interior_points()
    vals = fn.interior_values
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, (p, v) in enumerate(zip(pts, vals)):
            coords = " ".join(_fmt(float(c)) for c in p)
            fh.write(f"{i} {coords} {_fmt(float(v))}\n")


def _read_snapshot(path, domain) -> GridFunction:
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            vals.append(float(parts[-1]))
    vals = np.array(vals)
    if vals.shape[0] != int(domain.mask.sum()):
        raise ConfigError(
            f"snapshot {path} has {vals.shape[0]} nodes but the configured "
            f"domain grid has {int(domain.mask.sum())}"
        )
    return GridFunction.from_interior(domain, vals)


class _Report:
    def __init__(self, command, cfg: ExperimentConfig, seed):
        self.data = {
            "schema": SCHEMA_VERSION,
            "command": command,
            "seed": seed,
            "config": cfg.echo(),
            "checks": [],
            "files": [],
        }

    def check(self, name, passed, margin=None, **detail):
        entry = {"name": name, "passed": bool(passed)}
        if margin is not None:
            entry["margin"] = margin
        if detail:
            entry["detail"] = detail
        self.data["checks"].append(entry)
        return passed

    def add_file(self, path):
        self.data["files"].append(os.path.basename(path))

    def write(self, out_dir):
        path = os.path.join(out_dir, "report.json")
        self.data["files"].append("report.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2, default=float)
            fh.write("\n")
        return path

    @property
    def all_passed(self):
        return all(c["passed"] for c in self.data["checks"])


def _predicted_exponent(cfg: ExperimentConfig, ctx: ExponentContext) -> float | None:
    raw = cfg.get("fit", "predicted", "auto") if "fit" in cfg.sections else "auto"
    if raw != "auto":
        return float(raw)
    if ctx.k is not None:
        return exponents.theta(ctx)
    if ctx.q is not None:
        return exponents.upper_exponent_regime(ctx).lambda_sup
    return None


def run_verify_barrier(cfg: ExperimentConfig, out_dir, seed, threads) -> tuple[int, _Report]:
    rep = _Report("verify-barrier", cfg, seed)
    ctx = cfg.context()
    profile = cfg.profile()
    mode = cfg.get("barrier", "mode", "singular").strip().lower()
    count = cfg.get_int("barrier", "sample_count", 10_000)
    try:
        if mode == "singular":
            d0 = cfg.get_float("barrier", "d0")
            diam = cfg.get_float("barrier", "diam")
            er = barriers.select_epsilon(
                ctx, profile, d0=d0, diam=diam, sample_count=count, seed=seed
            )
            rep.check(
                "min_H_above_1",
                er.min_H > 1.0,
                margin=er.min_H - 1.0,
                epsilon0=er.epsilon0,
                epsilon1=er.epsilon1,
                epsilon2=er.epsilon2,
                delta=er.delta,
                samples=er.samples,
            )
            epath = os.path.join(out_dir, "epsilon_report.json")
            with open(epath, "w", encoding="utf-8") as fh:
                json.dump(
                    {
                        "epsilon0": er.epsilon0,
                        "epsilon1": er.epsilon1,
                        "epsilon2": er.epsilon2,
                        "delta": er.delta,
                        "min_H": er.min_H,
                        "samples": er.samples,
                    },
                    fh,
                    indent=2,
                )
                fh.write("\n")
            rep.add_file(epath)
            hpath = os.path.join(out_dir, "h_samples.csv")
            _write_csv(hpath, ["h_value"], [(float(h),) for h in er.h_samples])
            rep.add_file(hpath)
        elif mode == "degenerate":
            lam = cfg.get_float("barrier", "lam")
            m_rhs = cfg.get_float("barrier", "m_rhs", 1.0)
            diam = cfg.get_float("barrier", "diam", 1.0)
            dr = barriers.degenerate_barrier_check(
                ctx, profile, lam=lam, M_rhs=m_rhs,
                sample_count=count, diam=diam, seed=seed,
            )
            rep.check(
                "min_det_above_M",
                dr.passed,
                margin=dr.min_det - dr.m_rhs,
                case=dr.case,
                exponent=dr.exponent,
                epsilon=dr.epsilon,
                delta=dr.delta,
            )
        else:
            raise ConfigError(f"unknown barrier mode {mode!r}")
    except (MABoundaryError,) as exc:
        if isinstance(exc, ConfigError):
            raise
        rep.check("certification", False, error=f"{type(exc).__name__}: {exc}")
        return 1, rep
    return (0 if rep.all_passed else 1), rep


def run_solve(cfg: ExperimentConfig, out_dir, seed, threads) -> tuple[int, _Report]:
    rep = _Report("solve", cfg, seed)
    kind = cfg.domain_kind()
    domain = make_domain(kind, cfg.h_grid())
    problem = cfg.get("solve", "problem").strip().lower()
    tol = cfg.get_float("solve", "tol", {"constant": 1e-8, "degenerate": 1e-7, "singular": 1e-6}[problem])
    max_outer = cfg.get_int("solve", "max_outer", 400)
    try:
        if problem == "constant":
            fn, srep = ma_solve(domain, cfg.get_float("solve", "rhs", 1.0), tol=tol,
                                max_newton=max_outer)
        elif problem == "degenerate":
            ctx = cfg.context()
            fn, srep = solve_degenerate(
                domain, ctx.require_q(), tol=tol, max_outer=max_outer,
                c_init=cfg.get_float("solve", "c_init", 1.0),
            )
        elif problem == "singular":
            ctx = cfg.context()
            fn, srep = solve_singular(
                domain, ctx.require_k(), tol=tol, max_outer=max_outer,
                omega=cfg.get_float("solve", "damping", 0.3),
            )
        else:
            raise ConfigError(f"unknown problem {problem!r}")
    except ConfigError:
        raise
    except MABoundaryError as exc:
        rep.check("converged", False, error=f"{type(exc).__name__}: {exc}")
        return 1, rep

    spath = os.path.join(out_dir, "solution.txt")
    _write_snapshot(spath, domain, fn)
    rep.add_file(spath)
    rep.check(
        "converged",
        True,
        margin=srep.residual,
        iterations=list(srep.iterations),
        wall_time=srep.wall_time,
        **{k: v for k, v in srep.extra.items() if np.isscalar(v)},
    )

    if cfg.get_bool("solve", "fit", "false"):
        ctx = cfg.context()
        fit = _run_fit(cfg, ctx, kind, fn, rep, out_dir)
        rep.check(
            "fit_window_valid", True, lambda_hat=fit.lambda_hat, r_squared=fit.r_squared
        )
    return (0 if rep.all_passed else 1), rep


def _run_fit(cfg, ctx, kind, fn, rep, out_dir):
    d_max_default = 0.1 * kind.diameter()
    d_min = cfg.get_float("fit", "d_min", 4.0 * fn.domain.h_grid)
    d_max = cfg.get_float("fit", "d_max", d_max_default)
    depths = cfg.get_int("fit", "depths", 12)
    raw_x0 = cfg.get("fit", "x0", "auto")
    x0 = kind.default_boundary_point() if raw_x0 == "auto" else np.array(_floats(raw_x0))
    predicted = _predicted_exponent(cfg, ctx)
    fit = fit_boundary_exponent(
        fn, kind=kind, x0=x0, window=(d_min, d_max), depths=depths, predicted=predicted
    )
    fpath = os.path.join(out_dir, "fit.json")
    with open(fpath, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "lambda_hat": fit.lambda_hat,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "window": list(fit.window),
                "predicted": fit.predicted,
                "abs_gap": fit.abs_gap,
                "depths": [float(d) for d in fit.depths],
                "values": [float(v) for v in fit.values],
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    rep.add_file(fpath)
    return fit


def run_fit_exponent(cfg: ExperimentConfig, out_dir, seed, threads) -> tuple[int, _Report]:
    rep = _Report("fit-exponent", cfg, seed)
    ctx = cfg.context()
    kind = cfg.domain_kind()
    domain = make_domain(kind, cfg.h_grid())
    snap = cfg.get("fit", "snapshot")
    fn = _read_snapshot(snap, domain)
    try:
        fit = _run_fit(cfg, ctx, kind, fn, rep, out_dir)
    except MABoundaryError as exc:
        rep.check("fit", False, error=f"{type(exc).__name__}: {exc}")
        return 1, rep
    rep.check(
        "fit",
        True,
        lambda_hat=fit.lambda_hat,
        r_squared=fit.r_squared,
        predicted=fit.predicted,
        abs_gap=fit.abs_gap,
    )
    return 0, rep


def run_iterate_exponents(cfg: ExperimentConfig, out_dir, seed, threads) -> tuple[int, _Report]:
    rep = _Report("iterate-exponents", cfg, seed)
    ctx = cfg.context()
    regime = exponents.upper_exponent_regime(ctx)
    raw0 = cfg.get("iterate", "lambda0", "upward")
    if raw0 in ("upward", "downward"):
        lam0 = exponents.paper_lambda0(ctx, raw0)
    else:
        lam0 = float(raw0)
    steps = cfg.get_int("iterate", "steps", 30)
    seq = exponents.lambda_iterate(ctx, lam0, steps)
    rows = []
    for j, (v, g) in enumerate(zip(seq.values, seq.gaps)):
        ratio = seq.gaps[j] / seq.gaps[j - 1] if j >= 1 and seq.gaps[j - 1] != 0 else ""
        rows.append((j, float(v), float(g), ratio if ratio == "" else float(ratio)))
    cpath = os.path.join(out_dir, "lambda_iteration.csv")
    _write_csv(cpath, ["j", "lambda_j", "gap_j", "ratio"], rows)
    rep.add_file(cpath)
    rep.check(
        "geometric_ratio",
        all(
            abs(seq.gaps[j] - seq.ratio * seq.gaps[j - 1]) <= 4e-16 * abs(seq.gaps[j - 1])
            for j in range(1, len(seq.gaps))
            if seq.gaps[j - 1] != 0.0
        ),
        ratio=seq.ratio,
        alpha=seq.alpha,
        case=regime.case,
        lambda_sup=regime.lambda_sup,
    )
    if cfg.has("iterate", "target"):
        target = cfg.get_float("iterate", "target")
        j = exponents.steps_to_reach(ctx, lam0, target)
        rep.check("steps_to_reach", True, steps=j, target=target)
    return (0 if rep.all_passed else 1), rep


def _sweep_cell(payload: dict) -> dict:
    """One sweep cell; top-level so worker processes can import it."""
    mode = payload["mode"]
    n = payload["n"]
    a = tuple(payload["a"])
    if mode == "predicted":
        if payload.get("k") is not None:
            ctx = ExponentContext(n=n, a=a, k=payload["k"])
            return {
                "cell": payload["cell"],
                "n": n,
                "param": payload["k"],
                "a": "|".join(_fmt(float(x)) for x in a),
                "abar": exponents.abar(a),
                "predicted": exponents.theta(ctx),
            }
        ctx = ExponentContext(n=n, a=a, q=payload["q"])
        reg = exponents.upper_exponent_regime(ctx)
        return {
            "cell": payload["cell"],
            "n": n,
            "param": payload["q"],
            "a": "|".join(_fmt(float(x)) for x in a),
            "abar": exponents.abar(a),
            "predicted": reg.lambda_sup,
            "case": reg.case,
        }
    raise ConfigError(f"unknown sweep cell mode {mode!r}")


def run_sweep(cfg: ExperimentConfig, out_dir, seed, threads) -> tuple[int, _Report]:
    rep = _Report("sweep", cfg, seed)
    mode = cfg.get("sweep", "mode", "predicted").strip().lower()
    cpath = os.path.join(out_dir, "sweep.csv")

    if mode == "lambda-iteration":
        ctx = cfg.context()
        lam0 = exponents.paper_lambda0(ctx, "upward")
        steps = cfg.get_int("iterate", "steps", 12) if "iterate" in cfg.sections else 12
        seq = exponents.lambda_iterate(ctx, lam0, steps)
        rows = [
            (
                j,
                float(v),
                float(g),
                float(seq.ratio) if j >= 1 else "",
            )
            for j, (v, g) in enumerate(zip(seq.values, seq.gaps))
        ]
        _write_csv(cpath, ["j", "lambda_j", "gap_j", "ratio"], rows)
        rep.add_file(cpath)
        rep.check("rows", True, count=len(rows), alpha=seq.alpha, ratio=seq.ratio)
        return 0, rep

    if mode != "predicted":
        raise ConfigError(f"unknown sweep mode {mode!r}")

    n = cfg.get_int("context", "n")
    a_lists = (
        _float_lists(cfg.get("sweep", "a_values"))
        if cfg.has("sweep", "a_values")
        else [_floats(cfg.get("context", "a"))]
    )
    k_vals = _floats(cfg.get("sweep", "k_values")) if cfg.has("sweep", "k_values") else ()
    q_vals = _floats(cfg.get("sweep", "q_values")) if cfg.has("sweep", "q_values") else ()
    if not k_vals and not q_vals:
        raise ConfigError("sweep needs k_values or q_values")
    payloads = []
    cell = 0
    for a in a_lists:
        for k in k_vals:
            payloads.append({"mode": "predicted", "cell": cell, "n": n, "a": a, "k": k, "q": None})
            cell += 1
        for q in q_vals:
            payloads.append({"mode": "predicted", "cell": cell, "n": n, "a": a, "k": None, "q": q})
            cell += 1

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_cell, payloads))
    else:
        results = [_sweep_cell(p) for p in payloads]
    results.sort(key=lambda r: r["cell"])
    has_case = any("case" in r for r in results)
    header = ["cell", "n", "param", "a", "abar", "predicted"] + (["case"] if has_case else [])
    rows = [[r.get(h, "") for h in header] for r in results]
    _write_csv(cpath, header, rows)
    rep.add_file(cpath)
    rep.check("rows", True, count=len(rows))
    return 0, rep


_COMMANDS = {
    "verify-barrier": run_verify_barrier,
    "solve": run_solve,
    "fit-exponent": run_fit_exponent,
    "iterate-exponents": run_iterate_exponents,
    "sweep": run_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maboundary",
        description="Boundary-estimate experiments for singular/degenerate "
        "Monge-Ampere problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (u64)")
        p.add_argument(
            "--threads", type=int, default=0,
            help="worker processes for sweeps (0 = hardware parallelism)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
    try:
        cfg = load_config(args.config, args.command)
        os.makedirs(args.out, exist_ok=True)
        code, report = _COMMANDS[args.command](cfg, args.out, args.seed, threads)
        rpath = report.write(args.out)
        for c in report.data["checks"]:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"[{status}] {c['name']}" + (f" margin={c.get('margin')}" if "margin" in c else ""))
        print(f"report: {rpath}")
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MABoundaryError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # malformed inputs must never escape as a crash
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
