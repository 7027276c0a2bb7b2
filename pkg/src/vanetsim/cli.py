"""Command line front end: run, sweep, curves, localize-demo, print-config."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import random
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytic, localization
from .config import (ConfigError, RunConfig, SweepSpec, dump_config, parse_config,
                     run_config_from_dict)
from .engine import compute_metrics, run

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 1, 2

METRIC_COLUMNS = ["protocol", "mac", "nodes", "speed_mps", "seed", "throughput_bps",
                  "throughput_Bps", "e2ed_s", "nrl", "delivery_ratio", "error"]
SUMMARY_COLUMNS = ["protocol", "mac", "nodes", "speed_mps", "runs", "throughput_bps",
                   "throughput_Bps", "e2ed_s", "nrl", "delivery_ratio"]
CURVE_COLUMNS = ["r", "t", "pdf", "comm_probability", "efficiency"]


def fmt(value) -> str:
    """Six significant digits, '.' decimal point; missing values are empty cells."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float) and not math.isfinite(value):
        return ""
    return format(float(value), ".6g")


def write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


# ---------------------------------------------------------------------------
# runs and sweeps


def metrics_row(cfg: RunConfig) -> dict:
    row = {"protocol": cfg.protocol, "mac": cfg.mac, "nodes": cfg.scenario.node_count,
           "speed_mps": cfg.scenario.speed, "seed": cfg.seed}
    try:
        rep = compute_metrics(run(cfg))
    except Exception as exc:  # recorded as an error row; the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row.update(throughput_bps=rep.throughput_bps, throughput_Bps=rep.throughput_Bps,
               e2ed_s=rep.e2ed_s, nrl=rep.nrl, delivery_ratio=rep.delivery_ratio)
    return row


def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def summarize(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row.get("error"):
            continue
        key = (row["protocol"], row["mac"], row["nodes"], row["speed_mps"])
        groups.setdefault(key, []).append(row)
    out = []
    for key, members in groups.items():
        s = dict(zip(("protocol", "mac", "nodes", "speed_mps"), key), runs=len(members))
        for col in ("throughput_bps", "throughput_Bps", "e2ed_s", "nrl", "delivery_ratio"):
            s[col] = _mean(m.get(col) for m in members)
        out.append(s)
    return out


def run_matrix(spec: SweepSpec, out_dir, jobs: int | None = None) -> list[dict]:
    """One metrics row per run plus a seed-averaged summary; files land in ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.json").write_text(dump_config(spec))
    configs = list(spec.runs())
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(configs))) as pool:
            rows = list(pool.map(metrics_row, configs))
    else:
        rows = [metrics_row(c) for c in configs]
    write_csv(out / "metrics.csv", METRIC_COLUMNS, rows)
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, summarize(rows))
    return rows


# ---------------------------------------------------------------------------
# analytic curves and localization demo


def emit_analytic_curves(t_values, curve: analytic.CurveSpec | None = None,
                         out=None, params: analytic.MobilityParams | None = None) -> list[dict]:
    """Tabulate density, probability and efficiency over r for each t."""
    curve = curve or analytic.CurveSpec()
    params = params or analytic.MobilityParams()
    rows = []
    for t in t_values:
        spec = replace(curve, t=float(t))
        try:
            table = analytic.curve_rows([float(t)], spec, params)
        except (analytic.IntegrationError, analytic.DomainError) as exc:
            raise analytic.IntegrationError(f"curve failed at t={t}: {exc}") from exc
        for r, tt, pdf, prob, eff in table:
            rows.append({"r": r, "t": tt, "pdf": pdf, "comm_probability": prob, "efficiency": eff})
    if out is not None:
        write_csv(out, CURVE_COLUMNS, rows)
    return rows


def localize_demo(sender=(600.0, 450.0), noise_db: float = 0.0, trials: int = 100,
                  seed: int = 0, stream=None) -> dict:
    """Locate one sender (plus a noisy batch when ``noise_db`` > 0) and print a report."""
    stream = stream or sys.stdout
    scene = localization.Scene(sender=tuple(sender))
    try:
        res = localization.localize(scene)
    except localization.LocalizationError as exc:
        raise localization.LocalizationError(f"scene sender={sender}: {exc}") from exc
    err = localization.localization_error(scene, res)
    print(f"true sender        : ({sender[0]:.3f}, {sender[1]:.3f})", file=stream)
    print(f"distance estimate  : {res.distance:.3f} m", file=stream)
    print(f"bearing phi        : {math.degrees(res.phi):.4f} deg", file=stream)
    if res.merged:
        print(f"candidate (merged) : {res.candidates[0]}", file=stream)
    else:
        print(f"candidates         : {res.candidates[0]} | {res.candidates[1]}", file=stream)
    print(f"chosen             : {res.position}", file=stream)
    print(f"relative error     : {100 * err:.4f} %", file=stream)
    report = {"error": err, "position": res.position, "merged": res.merged}
    if noise_db > 0:
        rng = random.Random(seed)
        errors = []
        for _ in range(trials):
            s = localization.random_scene(rng, noise_db)
            try:
                errors.append(localization.localization_error(s, localization.localize(s)))
            except localization.LocalizationError:
                errors.append(math.inf)
        med = float(np.median(errors))
        print(f"noisy trials       : {trials} at +/-{noise_db} dB, median error {100 * med:.3f} %",
              file=stream)
        report["median_error"] = med
    return report


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path)
    common.add_argument("--out", type=Path)
    common.add_argument("--seed", type=int)
    common.add_argument("--duration", type=float)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True)
    mode.add_argument("--permissive", dest="strict", action="store_false")
    common.add_argument("--jobs", type=int)

    p = argparse.ArgumentParser(prog="vanetsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one simulation run")
    sw = sub.add_parser("sweep", parents=[common], help="scenario matrix to CSV")
    sw.add_argument("--full-duration", action="store_true",
                    help="use the configured duration instead of the scaled one")
    cv = sub.add_parser("curves", parents=[common], help="analytic probability curves")
    cv.add_argument("--t", type=float, nargs="+", default=[1.0, 5.0, 10.0])
    cv.add_argument("--r-max", type=float, default=200.0)
    cv.add_argument("--samples", type=int, default=200)
    ld = sub.add_parser("localize-demo", parents=[common], help="localization walk-through")
    ld.add_argument("--sender", type=float, nargs=2, default=[600.0, 450.0])
    ld.add_argument("--noise-db", type=float, default=0.0)
    ld.add_argument("--trials", type=int, default=100)
    pc = sub.add_parser("print-config", parents=[common], help="echo the effective config")
    pc.add_argument("--sweep", action="store_true", help="print the default sweep instead")
    return p


def _resolve_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("VANETSIM_SEED")
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"VANETSIM_SEED: expected an integer, got {env!r}") from None


def _load(args, want_sweep: bool | None):
    """Config from ``--config`` or defaults; ``want_sweep=None`` keeps the file's kind."""
    if args.config is not None:
        cfg = parse_config(args.config, strict=args.strict)
        if want_sweep is None:
            want_sweep = isinstance(cfg, SweepSpec)
    else:
        cfg = SweepSpec() if want_sweep else run_config_from_dict({}, strict=args.strict)
    if want_sweep and isinstance(cfg, RunConfig):
        cfg = SweepSpec(protocols=(cfg.protocol,), macs=(cfg.mac,),
                        node_counts=(cfg.scenario.node_count,), speeds=(cfg.scenario.speed,),
                        seeds=(cfg.seed,), scaled_duration=None, base=cfg)
    if not want_sweep and isinstance(cfg, SweepSpec):
        raise ConfigError("config: expected a single-run document, got a sweep")
    seed = _resolve_seed(args)
    if isinstance(cfg, RunConfig):
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        if args.duration is not None:
            cfg = replace(cfg, duration=args.duration)
    else:
        if seed is not None:
            cfg = replace(cfg, seeds=(seed,))
        if args.duration is not None:
            cfg = replace(cfg, scaled_duration=args.duration)
        elif getattr(args, "full_duration", False):
            cfg = replace(cfg, scaled_duration=None)
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            if args.command == "print-config":
                cfg = _load(args, want_sweep=True if args.sweep else None)
            elif args.command == "run":
                cfg = _load(args, want_sweep=False)
            elif args.command == "sweep":
                cfg = _load(args, want_sweep=True)
            else:
                cfg = None
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "print-config":
            sys.stdout.write(dump_config(cfg))
        elif args.command == "run":
            out = args.out
            if out is not None:
                out.mkdir(parents=True, exist_ok=True)
                (out / "effective_config.json").write_text(dump_config(cfg))
            else:
                sys.stdout.write(dump_config(cfg))
            row = metrics_row(cfg)
            if row.get("error"):
                print(f"run failed: {row['error']}", file=sys.stderr)
                return EXIT_RUN
            if out is not None:
                write_csv(out / "metrics.csv", METRIC_COLUMNS, [row])
            else:
                sys.stdout.write(",".join(METRIC_COLUMNS) + "\n")
                sys.stdout.write(",".join(fmt(row.get(c)) for c in METRIC_COLUMNS) + "\n")
        elif args.command == "sweep":
            out = args.out or Path("sweep-out")
            rows = run_matrix(cfg, out, args.jobs)
            failed = sum(1 for r in rows if r.get("error"))
            print(f"{len(rows)} runs, {failed} failed -> {out}")
        elif args.command == "curves":
            curve = analytic.CurveSpec(r_min=args.r_max / args.samples, r_max=args.r_max,
                                      samples=args.samples)
            out = args.out
            target = None
            if out is not None:
                out.mkdir(parents=True, exist_ok=True)
                target = out / "curves.csv"
            rows = emit_analytic_curves(args.t, curve, target)
            if target is None:
                sys.stdout.write(",".join(CURVE_COLUMNS) + "\n")
                for row in rows:
                    sys.stdout.write(",".join(fmt(row[c]) for c in CURVE_COLUMNS) + "\n")
        elif args.command == "localize-demo":
            seed = _resolve_seed(args)
            localize_demo(tuple(args.sender), args.noise_db, args.trials,
                          seed if seed is not None else 0)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUN
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
