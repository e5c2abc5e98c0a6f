"""Fast numerical checks behind ``specsense selftest``."""

from __future__ import annotations

import math

import numpy as np

from ..analytic import effective_snr, predicted_pfa, threshold
from ..detector import covariance, test_statistic
from ..frontend import FrontendConfig, periodogram_frames
from ..normal import q_inverse
from .harness import calibrate
from .scenario import ScenarioConfig


def _naive_statistic(m: np.ndarray) -> tuple[float, float, np.ndarray]:
    rows, nd = m.shape
    mu = [sum(m[k][t] for k in range(rows)) / rows for t in range(nd)]
    c = np.zeros((nd, nd))
    for t in range(nd):
        for u in range(nd):
            c[t, u] = sum((m[k][t] - mu[t]) * (m[k][u] - mu[u]) for k in range(rows)) / (rows - 1)
    t2 = sum(c[t, t] for t in range(nd)) / nd
    t1 = sum(c[t, u] for t in range(nd) for u in range(nd)) / nd
    return t1, t2, c


def _covariance_oracle(rng) -> bool:
    for _ in range(20):
        m = rng.exponential(size=(2 * rng.integers(1, 20) + 1, rng.integers(2, 31)))
        t1, t2, c = _naive_statistic(m)
        stat = test_statistic(covariance(m))
        # normwise: near-zero off-diagonal entries make elementwise ratios meaningless
        error = np.max(np.abs(covariance(m).matrix - c)) / np.max(np.abs(c))
        if not (error <= 1e-12
                and math.isclose(stat.T1, t1, rel_tol=1e-12)
                and math.isclose(stat.T2, t2, rel_tol=1e-12)):
            return False
    return True


def _parseval(rng) -> bool:
    for _ in range(10):
        n, nd = 1 << int(rng.integers(4, 12)), int(rng.integers(1, 8))
        z = rng.standard_normal(n * nd) + 1j * rng.standard_normal(n * nd)
        power = periodogram_frames(z, n, nd).sum(axis=1)
        direct = (np.abs(z.reshape(nd, n)) ** 2).sum(axis=1)
        if not np.allclose(power, direct, rtol=1e-9, atol=0):
            return False
    return True


def _inverse_pair(rng) -> bool:
    for _ in range(200):
        k, nd = int(rng.integers(1, 60)), int(rng.integers(2, 60))
        a, p = rng.uniform(0, nd * (nd - 1) / 2), rng.uniform(0.001, 0.5)
        if abs(predicted_pfa(threshold(k, nd, a, p), k, nd, a) - p) > 1e-9:
            return False
    return True


def _spot_values() -> bool:
    return (abs(threshold(19, 30, 0.0, 0.1) - 1.02758) < 1e-4
            and abs(effective_snr(0.05, 6e6, 2048, 2.152e6, 10 ** -2.1) - 2.267) < 1e-3
            and abs(q_inverse(0.9) + 1.28155) < 1e-5
            and FrontendConfig(dwell_time=1e-3).half_rows == 19)


def _determinism() -> bool:
    cfg = ScenarioConfig(dwell_time=1e-4, num_dwells=6, calibration_trials=100)
    return calibrate(cfg).gamma == calibrate(cfg).gamma


CHECKS = {
    "covariance and statistic match the naive double loop": _covariance_oracle,
    "dwell periodograms satisfy Parseval": _parseval,
    "threshold and predicted P_FA invert each other": _inverse_pair,
    "closed-form spot values": lambda rng: _spot_values(),
    "calibration is deterministic per seed": lambda rng: _determinism(),
}


def run_selftest(verbose: bool = False) -> bool:
    rng = np.random.default_rng(20240601)
    ok = True
    for name, check in CHECKS.items():
        passed = bool(check(rng))
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
