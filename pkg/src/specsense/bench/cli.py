"""Command-line entry point: ``specsense <subcommand> [options]``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from ..errors import (AnalyticDomainError, ConfigError, DegenerateStatisticError,
                      UnreachableTargetError)
from . import reference
from .harness import (find_sensitivity, run_calibration, run_roc, run_uncertainty_sweep)
from .output import (UNCERTAINTY_COLUMNS, calibration_rows, roc_rows, sensitivity_rows,
                     uncertainty_rows, write_csv)
from .scenario import ScenarioConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_UNREACHABLE, EXIT_NUMERICAL = 0, 2, 3, 4


def _config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
        if args.command in ("calibrate", "table2"):
            changes["calibration_trials"] = args.trials
    if getattr(args, "detector", None):
        changes["detector"] = args.detector
    return cfg.with_(**changes) if changes else cfg


def _print_cells(cells) -> None:
    print(f"{'N_d':>4} {'t_s ms':>7} {'K':>3} {'empirical':>10} {'analytic':>9} {'A_w':>9}")
    for c in cells:
        print(f"{c.nd:>4} {c.ts_ms:>7.2f} {c.half_rows:>3} {c.gamma_empirical:>10.4f} "
              f"{c.gamma_analytic:>9.4f} {c.accumulated_noise:>9.3f}")


def cmd_calibrate(args, cfg: ScenarioConfig) -> int:
    cells = run_calibration(cfg, args.threads)
    _print_cells(cells)
    path = write_csv(args.out / "calibration.csv", calibration_rows(cells, cfg.target_pfa, cfg.seed))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_table2(args, cfg: ScenarioConfig) -> int:
    if args.trials is None and not args.config:
        cfg = cfg.with_(calibration_trials=2000)
    cfg = cfg.with_(table_dwells=(6, 12, 30), table_dwell_times=(1e-4, 5e-4, 1e-3, 2e-3),
                    target_pfa=0.1)
    start = time.perf_counter()
    cells = run_calibration(cfg, args.threads)
    elapsed = time.perf_counter() - start
    print(f"{'N_d':>4} {'t_s ms':>7} {'empirical':>10} {'target':>7} {'ratio':>6} "
          f"{'analytic':>9} {'an/emp':>7}")
    within = 0
    for c in cells:
        target = reference.SIMULATED[(c.nd, round(c.ts_ms, 3))]
        ratio = c.gamma_empirical / target
        ok = abs(ratio - 1) <= reference.TOLERANCE
        within += ok
        print(f"{c.nd:>4} {c.ts_ms:>7.2f} {c.gamma_empirical:>10.4f} {target:>7.2f} {ratio:>6.3f} "
              f"{c.gamma_analytic:>9.4f} {c.gamma_analytic / c.gamma_empirical:>7.3f}"
              f"{'' if ok else '  outside tolerance'}")
    print(f"{within}/{len(cells)} cells within {reference.TOLERANCE:.0%}; {elapsed:.1f} s")
    path = write_csv(args.out / "table2.csv", calibration_rows(cells, cfg.target_pfa, cfg.seed))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_roc(args, cfg: ScenarioConfig) -> int:
    points = run_roc(cfg, args.threads)
    for p in points:
        print(f"{p.detector} snr={p.snr_db:g} dB  P_D={p.pd:.3f} [{p.pd_lo:.3f}, {p.pd_hi:.3f}]  "
              f"P_FA={p.pfa:.3f}  P_MD={p.pmd:.3f}  gamma={p.gamma:.5g}")
    path = write_csv(args.out / "roc.csv", roc_rows(points))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sensitivity(args, cfg: ScenarioConfig) -> int:
    s = find_sensitivity(cfg, threads=args.threads)
    note = " (at lower edge of range)" if s.at_lower_bound else ""
    print(f"{s.detector}: sensitivity {s.snr_db:g} dB{note} with P_D={s.pd:.3f}, "
          f"measured P_FA={s.pfa:.3f}, gamma={s.gamma:.5g}")
    path = write_csv(args.out / "sensitivity.csv", sensitivity_rows([s]))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_uncertainty(args, cfg: ScenarioConfig) -> int:
    names = args.detectors.split(",") if args.detectors else [cfg.detector]
    cfgs = [cfg.with_(detector=name.strip(), detector_params={} if name.strip() != cfg.detector
                      else cfg.detector_params) for name in names]
    rows = run_uncertainty_sweep(cfgs, threads=args.threads)
    for r in rows:
        if r.unreachable:
            print(f"{r.detector} rho={r.rho_db:g} dB: target unreachable in range")
            continue
        flag = "  calibration failure" if r.calibration_failure else ""
        print(f"{r.detector} rho={r.rho_db:g} dB: {r.sensitivity.snr_db:g} dB "
              f"(shift {r.delta_db:+.2f} dB, P_FA={r.sensitivity.pfa:.3f}){flag}")
    found = [r.sensitivity for r in rows if r.sensitivity is not None]
    write_csv(args.out / "uncertainty.csv", sensitivity_rows(found))
    path = write_csv(args.out / "uncertainty_summary.csv", uncertainty_rows(rows),
                     UNCERTAINTY_COLUMNS)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_selftest(args, cfg: ScenarioConfig) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest(verbose=True) else EXIT_NUMERICAL


COMMANDS = {
    "calibrate": (cmd_calibrate, "threshold grid over table_dwells x table_dwell_times"),
    "roc": (cmd_roc, "P_D / P_FA / P_MD at each SNR of snr_grid"),
    "sensitivity": (cmd_sensitivity, "lowest SNR meeting pd_target"),
    "uncertainty": (cmd_uncertainty, "sensitivity shift across rho_grid"),
    "table2": (cmd_table2, "reproduce the published P_FA=0.1 threshold table"),
    "selftest": (cmd_selftest, "fast numerical consistency checks"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specsense", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="YAML scenario file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--trials", type=int, help="trials per point (calibrate/table2: per cell)")
        p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        if name in ("roc", "sensitivity", "calibrate"):
            p.add_argument("--detector", help="detector id (overrides config)")
        if name == "uncertainty":
            p.add_argument("--detectors", help="comma-separated detector ids to compare")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = _config(args)
        handler = COMMANDS[args.command][0]
        with np.errstate(invalid="raise", divide="raise", over="raise"):
            return handler(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnreachableTargetError as exc:
        print(f"unreachable target: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except (DegenerateStatisticError, AnalyticDomainError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
