"""CSV emission in the bench's fixed schema."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

COLUMNS = ("detector", "snr_db", "rho_db", "ts_ms", "nd", "trials", "pfa", "pd", "pd_lo",
           "pd_hi", "gamma", "seed")


def fmt(value) -> str:
    """Plain decimal with 6 significant digits; blank for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        return "0"
    return np.format_float_positional(x, precision=6, unique=False, fractional=False, trim="-")


def render(rows, columns=COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) if not isinstance(row.get(c), str) else row[c]
                         for c in columns])
    return buf.getvalue()


def write_csv(path: str | Path, rows, columns=COLUMNS) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(rows, columns))
    return path


def roc_rows(points) -> list[dict]:
    return [dict(detector=p.detector, snr_db=p.snr_db, rho_db=p.rho_db, ts_ms=p.ts_ms, nd=p.nd,
                 trials=p.trials, pfa=p.pfa, pd=p.pd, pd_lo=p.pd_lo, pd_hi=p.pd_hi,
                 gamma=p.gamma, seed=p.seed) for p in points]


def calibration_rows(cells, target_pfa: float, seed: int, rho_db: float = 0.0) -> list[dict]:
    """Two rows per cell: the empirical threshold and the closed-form one."""
    rows = []
    for c in cells:
        common = dict(snr_db=None, rho_db=rho_db, ts_ms=c.ts_ms, nd=c.nd, trials=c.trials,
                      seed=seed)
        rows.append(dict(detector="scs", pfa=c.pfa_measured, gamma=c.gamma_empirical, **common))
        rows.append(dict(detector="scs_analytic", pfa=target_pfa, gamma=c.gamma_analytic, **common))
    return rows


def sensitivity_rows(results) -> list[dict]:
    return [dict(detector=s.detector, snr_db=s.snr_db, rho_db=s.rho_db, ts_ms=s.ts_ms, nd=s.nd,
                 trials=s.trials, pfa=s.pfa, pd=s.pd, pd_lo=s.pd_lo, pd_hi=s.pd_hi,
                 gamma=s.gamma, seed=s.seed) for s in results]


UNCERTAINTY_COLUMNS = ("detector", "rho_db", "sensitivity_db", "delta_db", "pfa",
                       "calibration_failure", "unreachable")


def uncertainty_rows(rows) -> list[dict]:
    return [dict(detector=r.detector, rho_db=r.rho_db,
                 sensitivity_db=None if r.sensitivity is None else r.sensitivity.snr_db,
                 delta_db=r.delta_db, pfa=None if r.sensitivity is None else r.sensitivity.pfa,
                 calibration_failure=r.calibration_failure, unreachable=r.unreachable)
            for r in rows]
