"""Command-line runner: ``sacmm run|validate|thresholds <config.yaml>``."""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from .config import ConfigParseError, SweepSpec, load_config
from .simulator import FULL_DIMS, ConfigError, aggregate, build_scheme, run_experiment

RAW_HEADER = ["scheme", "sweep_value", "trial", "m", "beta",
              "rel_approx_err", "rel_comp_err", "rel_total_err"]
MEAN_HEADER = ["scheme", "sweep_value", "m", "trials", "rel_approx_mean", "rel_approx_se",
               "rel_comp_mean", "rel_comp_se", "rel_total_mean", "rel_total_se"]


def _g(x: float) -> str:
    return format(x, ".17g")


def run_spec(spec: SweepSpec, threads: int = 1):
    """Yield (scheme label, sweep label, ErrorReport) for every sweep point."""
    for label, cfg in spec.points():
        rep = run_experiment(cfg, threads=threads)
        yield rep.label, label, rep


def write_csvs(results, raw_path: Path, mean_path: Path) -> None:
    with open(raw_path, "w", newline="", encoding="utf-8") as fr, \
            open(mean_path, "w", newline="", encoding="utf-8") as fm:
        raw = csv.writer(fr, lineterminator="\n")
        mean = csv.writer(fm, lineterminator="\n")
        raw.writerow(RAW_HEADER)
        mean.writerow(MEAN_HEADER)
        for scheme, sv, rep in results:
            for r in rep.records:
                raw.writerow([scheme, sv, r.trial, r.m, _g(r.beta),
                              _g(r.rel_approx), _g(r.rel_comp), _g(r.rel_total)])
            for a in aggregate(rep.records):
                mean.writerow([scheme, sv, a.m, a.n, _g(a.rel_approx), _g(a.se_approx),
                               _g(a.rel_comp), _g(a.se_comp), _g(a.rel_total), _g(a.se_total)])


def _summary(results) -> str:
    lines = []
    for scheme, sv, rep in results:
        head = f"{scheme}" + (f" @ {sv}" if sv else "")
        lines.append(head)
        lines.append(f"  {'m':>3}  {'approx':>10}  {'comp':>10}  {'total':>10}")
        for a in aggregate(rep.records):
            lines.append(f"  {a.m:>3}  {a.rel_approx:10.3e}  {a.rel_comp:10.3e}  {a.rel_total:10.3e}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    spec = load_config(args.config).with_overrides(
        trials=args.trials, seed=args.seed, dims=FULL_DIMS if args.full_scale else None)
    out_dir = Path(args.out or os.environ.get("SACMM_OUT_DIR", "."))
    threads = args.threads or int(os.environ.get("SACMM_THREADS", "1"))
    out_dir.mkdir(parents=True, exist_ok=True)
    results = list(run_spec(spec, threads=threads))
    stem = Path(args.config).stem
    raw_path, mean_path = out_dir / f"{stem}.csv", out_dir / f"{stem}_mean.csv"
    write_csvs(results, raw_path, mean_path)
    if not args.quiet:
        print(_summary(results))
    print(f"wrote {raw_path} and {mean_path}")
    return 0


def cmd_validate(args) -> int:
    spec = load_config(args.config)
    n = len(spec.points())
    print(f"{args.config}: ok ({spec.base.scheme}, {n} sweep point{'s' if n != 1 else ''})")
    return 0


def cmd_thresholds(args) -> int:
    spec = load_config(args.config)
    for label, cfg in spec.points():
        s = build_scheme(cfg)
        print(f"{s.label()}" + (f" @ {label}" if label else ""))
        print(f"  workers N          : {s.n_workers}")
        print(f"  recovery threshold : {s.recovery_threshold()}")
        print(f"  first estimate at  : {s.first_estimate()}")
        layers = s.layer_structure()
        if layers:
            print("  layer  threshold  group")
            for lay in layers:
                g = "-" if lay.group is None else str(lay.group)
                print(f"  {lay.index:>5}  {lay.threshold:>9}  {g:>5}")
        else:
            print("  no approximate layers")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sacmm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config and write CSVs")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (env SACMM_OUT_DIR, default .)")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--full-scale", action="store_true", help=f"use {FULL_DIMS} matrices")
    r.add_argument("--threads", type=int, help="worker threads (env SACMM_THREADS, default 1)")
    r.add_argument("--quiet", action="store_true", help="skip the summary table")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)

    t = sub.add_parser("thresholds", help="print recovery threshold and layer table")
    t.add_argument("config")
    t.set_defaults(func=cmd_thresholds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConfigParseError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
