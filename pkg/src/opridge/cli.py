"""Command-line front end.

Subcommands: gen-config, schedule, contours, simulate, rates, oracle-check,
packing. Everything is driven by a JSON config file (see gen-config for a
working template); flags override the file where noted. Exit codes: 0 on
success, 1 when an oracle self-check fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .core import ConfigError, ProblemConfig, theoretical_rate
from .estimators import ESTIMATOR_NAMES
from .harness import (
    ExperimentPlan,
    GroundTruthSpec,
    config_to_dict,
    format_number,
    load_config,
    oracle_checks,
    run_cell,
    run_convergence,
)
from .schedules import contour_points, multilevel_schedule
from .synth import NoiseProfile, ground_truth_seed

__all__ = ["cli_main", "main"]

_DEFAULT_TEMPLATE_SEED = 20260819


def _template_config() -> dict[str, Any]:
    # A ready-to-run output-rate-limited instance: theoretical squared-error
    # exponent 0.5, flat-in/steep-out ground truth so the staircase's
    # advantage over the uniform baseline shows at the largest n.
    cfg = ProblemConfig(
        p=0.5, q=0.5, alpha=0.4, beta=0.9, beta_prime=0.1, gamma=0.0,
        gamma_prime=0.5, B=1.0, sigma=0.1, c0=1.0, d_in=256, d_out=512,
        seed=_DEFAULT_TEMPLATE_SEED,
    )
    gt = GroundTruthSpec(kind="random", params={"taper_in": 0.3, "taper_out": 2.0})
    noise = NoiseProfile(sigma=cfg.sigma)
    return config_to_dict(
        cfg, gt, noise, n_list=[2**k for k in range(10, 17)], trials=20
    )


def _sig12(v: float) -> float:
    # Schedule/contour geometry is exact in closed form but computed through
    # logs; 12 significant digits absorb that round-off in the CSVs without
    # touching the full-precision objects.
    if v == 0.0 or not math.isfinite(v):
        return v
    return round(v, 11 - math.floor(math.log10(abs(v))))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _parse_n_list(raw: str) -> list[int]:
    try:
        values = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"--n-list must be comma-separated integers, got {raw!r}") from exc
    if not values:
        raise ConfigError("--n-list is empty")
    return values


def _resolve_n(args: argparse.Namespace, extras: dict[str, Any]) -> int:
    if args.n is not None:
        return args.n
    if extras.get("n_list"):
        return max(extras["n_list"])
    raise ConfigError("no sample count: pass --n or put n_list in the config")


def _load(args: argparse.Namespace) -> tuple[ProblemConfig, GroundTruthSpec, NoiseProfile, dict[str, Any]]:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    cfg, gt, noise, extras = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg, gt, noise, extras


def _estimator_list(arg: str) -> tuple[str, ...]:
    return ESTIMATOR_NAMES if arg == "all" else (arg,)


def _cmd_gen_config(args: argparse.Namespace) -> int:
    _emit(json.dumps(_template_config(), indent=2) + "\n", args.out)
    return 0


def _cmd_schedule(args: argparse.Namespace) -> int:
    cfg, _, _, extras = _load(args)
    n = _resolve_n(args, extras)
    sched = multilevel_schedule(cfg, n)
    if args.format == "json":
        doc = {
            "n": n,
            "eta1": sched.eta1,
            "eta2": sched.eta2,
            "u": sched.u,
            "special_case": sched.special_case,
            "clamped": sched.clamped,
            "levels": [
                {"level": i, "x": lv.x, "y": lv.y, "lambda": lv.lam,
                 "row_start": lv.row_start, "row_end": lv.row_end}
                for i, lv in enumerate(sched.levels)
            ],
        }
        _emit(json.dumps(doc, indent=2), args.out)
        return 0
    lines = ["level,x,y,lambda,row_start,row_end"]
    for i, lv in enumerate(sched.levels):
        lines.append(
            f"{i},{format_number(_sig12(lv.x))},{format_number(_sig12(lv.y))},"
            f"{format_number(_sig12(lv.lam))},{lv.row_start},{lv.row_end}"
        )
    _emit("\n".join(lines), args.out)
    return 0


def _cmd_contours(args: argparse.Namespace) -> int:
    cfg, _, _, extras = _load(args)
    n = _resolve_n(args, extras)
    eta1, eta2, _ = theoretical_rate(cfg)
    sched = multilevel_schedule(cfg, n)
    x_hi = 2.0 * max(lv.x for lv in sched.levels)
    x_lo = min(0.5, min(lv.x for lv in sched.levels))
    rows: list[tuple[str, float, float]] = []
    for kind, level_c in (("variance", float(n) ** eta2), ("bias", float(n) ** eta1)):
        for x, y in contour_points(kind, level_c, cfg, (x_lo, x_hi), args.samples):
            rows.append((kind, x, y))
    if args.format == "json":
        doc = {
            "n": n,
            "points": [{"kind": k, "x": x, "y": y} for k, x, y in rows],
        }
        _emit(json.dumps(doc, indent=2), args.out)
        return 0
    lines = ["kind,x,y"]
    for k, x, y in rows:
        lines.append(f"{k},{format_number(_sig12(x))},{format_number(_sig12(y))}")
    _emit("\n".join(lines), args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg, gt, noise, extras = _load(args)
    n = _resolve_n(args, extras)
    a0 = gt.build(cfg)
    estimators = _estimator_list(args.estimator)
    records = run_cell(cfg, a0, n, args.trial, estimators, noise)
    eta1, eta2, u = theoretical_rate(cfg)
    doc = {
        "n": n,
        "trial": args.trial,
        "seed": cfg.seed,
        "theoretical": {"eta1": eta1, "eta2": eta2, "u": u},
        "results": [
            {"estimator": r.estimator, "error_sq": r.error_sq,
             "elapsed_ms": round(r.elapsed_ms, 3)}
            for r in records
        ],
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


def _cmd_rates(args: argparse.Namespace) -> int:
    cfg, gt, noise, extras = _load(args)
    if args.out is None:
        raise ConfigError("rates requires --out for the summary CSV")
    n_list = _parse_n_list(args.n_list) if args.n_list else extras.get("n_list")
    if not n_list:
        raise ConfigError("no sample counts: pass --n-list or put n_list in the config")
    trials = args.trials if args.trials is not None else extras.get("trials", 10)
    out = Path(args.out)
    json_only = args.format == "json"
    plan = ExperimentPlan(
        cfg=cfg,
        n_list=tuple(n_list),
        trials=trials,
        estimators=_estimator_list(args.estimator),
        ground_truth=gt,
        noise=noise,
        workers=args.workers,
        out_summary=None if json_only else str(out),
        out_runs=None if json_only else str(out.with_name(out.stem + "_runs" + out.suffix)),
        out_report=str(out) if json_only else str(out.with_suffix(".json")),
    )
    report = run_convergence(plan)
    for fit in report.fits:
        sys.stdout.write(
            f"{fit.estimator}: slope {fit.slope:+.4f} (target {-report.theoretical_eta1:+.4f}, "
            f"r^2 {fit.r_squared:.4f})\n"
        )
    sys.stdout.write(f"done in {report.total_seconds:.1f}s\n")
    return 0


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _DEFAULT_TEMPLATE_SEED
    t0 = time.perf_counter()
    results = oracle_checks(seed)
    ok = True
    for name, passed, detail in results:
        ok = ok and passed
        sys.stdout.write(f"{'PASS' if passed else 'FAIL'} {name}: {detail}\n")
    sys.stdout.write(f"{len(results)} suites in {time.perf_counter() - t0:.2f}s\n")
    return 0 if ok else 1


def _cmd_packing(args: argparse.Namespace) -> int:
    cfg, gt, _, _ = _load(args)
    if gt.kind == "packing":
        params = dict(gt.params)
    else:
        # Small default block fitting any grid with d_in >= 8, d_out >= 8.
        params = {"m1": 4, "m2": 0, "K": 8, "eps": 0.01}
    if args.seed is not None:
        params["seed"] = args.seed
    params.setdefault("seed", ground_truth_seed(cfg))
    spec = GroundTruthSpec(kind="packing", params=params)
    op = spec.build(cfg)
    rows, cols = np.nonzero(op.m)
    if args.format == "json":
        doc = {
            "params": {k: (v if not isinstance(v, np.ndarray) else np.asarray(v).tolist())
                       for k, v in params.items()},
            "entries": [
                {"row": int(j) + 1, "col": int(i) + 1, "value": float(op.m[j, i])}
                for j, i in zip(rows, cols)
            ],
        }
        _emit(json.dumps(doc, indent=2), args.out)
        return 0
    lines = ["row,col,value"]
    for j, i in zip(rows, cols):
        lines.append(f"{int(j) + 1},{int(i) + 1},{format_number(float(op.m[j, i]))}")
    _emit("\n".join(lines), args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format (default csv)")

    parser = argparse.ArgumentParser(
        prog="opridge",
        description="Spectral simulator for frequency-scheduled ridge operator learning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-config", parents=[common],
                   help="write a ready-to-run config template")

    p = sub.add_parser("schedule", parents=[common],
                       help="emit the multilevel schedule for one sample count")
    p.add_argument("--n", type=int, help="sample count (default: max of config n_list)")

    p = sub.add_parser("contours", parents=[common],
                       help="emit bias/variance contour points for one sample count")
    p.add_argument("--n", type=int, help="sample count (default: max of config n_list)")
    p.add_argument("--samples", type=int, default=129, help="points per contour")

    p = sub.add_parser("simulate", parents=[common],
                       help="one dataset, one fit per estimator, JSON summary")
    p.add_argument("--n", type=int, help="sample count (default: max of config n_list)")
    p.add_argument("--trial", type=int, default=0, help="trial index for the sub-seed")
    p.add_argument("--estimator", choices=ESTIMATOR_NAMES + ("all",), default="all")

    p = sub.add_parser("rates", parents=[common],
                       help="full convergence sweep: summary CSV, runs CSV, JSON report")
    p.add_argument("--trials", type=int, help="trials per sample count")
    p.add_argument("--n-list", help="comma-separated sample counts")
    p.add_argument("--estimator", choices=ESTIMATOR_NAMES + ("all",), default="all")
    p.add_argument("--workers", type=int, default=1, help="worker processes")

    sub.add_parser("oracle-check", parents=[common],
                   help="run the closed-form oracle suites; nonzero exit on failure")

    sub.add_parser("packing", parents=[common],
                   help="emit a packing-family instance on the config grid")
    return parser


_COMMANDS = {
    "gen-config": _cmd_gen_config,
    "schedule": _cmd_schedule,
    "contours": _cmd_contours,
    "simulate": _cmd_simulate,
    "rates": _cmd_rates,
    "oracle-check": _cmd_oracle_check,
    "packing": _cmd_packing,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    """Entry point returning the process exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
