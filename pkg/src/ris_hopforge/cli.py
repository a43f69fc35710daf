"""Command-line entry point: ``ris-hopforge {sweep,trace,coverage,grad-check}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import harness
from .errors import ConfigError


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="YAML experiment config")
    p.add_argument("--seed", type=int, help=f"master seed (fallback: ${harness.SEED_ENV}, then 0)")
    p.add_argument("--out", type=Path, help="output directory (default: config output_dir)")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="set a dotted config key, e.g. hyper.steps_per_episode=500")


def _config(args) -> harness.ExperimentConfig:
    return harness.load_config(args.config, seed=args.seed, overrides=args.override,
                               scheme=getattr(args, "scheme", None), output_dir=args.out)


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    rows = harness.run_distance_sweep(cfg, jobs=args.jobs)
    out = Path(cfg.output_dir)
    harness.write_sweep_csv(rows, out / "sweep.csv", cfg)
    summary = harness.summarize(rows, cfg.seed)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(summary[0]), lineterminator="\n")
    w.writeheader()
    for r in summary:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    (out / "summary.csv").write_text(buf.getvalue())
    for r in summary:
        print(f"{r['scheme']:>18} d={r['distance_m']:g} m  mean sum rate "
              f"{r['mean_sum_rate_bps_hz']:.6g} b/s/Hz  90% CI [{r['ci_low']:.6g}, {r['ci_high']:.6g}]")
    return 0


def _cmd_trace(args) -> int:
    cfg = _config(args)
    rows = harness.run_reward_trace(cfg)
    harness.write_trace_csv(rows, Path(cfg.output_dir) / "trace.csv", cfg)
    print(f"wrote {len(rows)} rows to {Path(cfg.output_dir) / 'trace.csv'}")
    return 0


def _cmd_coverage(args) -> int:
    cfg = _config(args)
    rows = []
    for path in args.sweeps:
        rows += harness.read_sweep_csv(path)
    threshold = args.threshold if args.threshold is not None else cfg.coverage_threshold_bps
    cov = harness.coverage_range(rows, threshold)
    result = {"threshold_bps": threshold, "schemes": cov}
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "coverage.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    for scheme, c in sorted(cov.items()):
        flag = "" if c["met"] else "  (threshold never met)"
        print(f"{scheme:>18}: grid {c['grid_m']:g} m, interpolated {c['interpolated_m']:.4g} m{flag}")
    return 0


def _cmd_grad_check(args) -> int:
    cfg = _config(args)
    report = harness.run_grad_check_suite(args.nets, cfg.seed, args.tolerance)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "grad_check.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{status}: max relative error {report['max_rel_error']:.3e} over {args.nets} nets "
          f"and {args.nets} projection layers (tolerance {args.tolerance:g})")
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ris-hopforge",
                                     description="Multi-hop RIS THz beamforming experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="sum rate / throughput versus distance")
    _add_common(p)
    p.add_argument("--scheme", action="append",
                   help="scheme to run, repeatable: no-ris-zf, random-phase[@I], "
                        "single-hop-altopt, drl[@I]")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("trace", help="DDPG reward versus step for each trace power")
    _add_common(p)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("coverage", help="coverage range from sweep CSVs")
    _add_common(p)
    p.add_argument("sweeps", nargs="+", type=Path, help="sweep.csv files")
    p.add_argument("--threshold", type=float, help="throughput threshold in bit/s")
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("grad-check", help="finite-difference check of the network stack")
    _add_common(p)
    p.add_argument("--nets", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.set_defaults(func=_cmd_grad_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
