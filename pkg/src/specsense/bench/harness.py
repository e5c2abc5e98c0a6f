"""Monte Carlo runs: calibration grids, ROC points, sensitivity search, noise-uncertainty sweeps.

Every trial draws its randomness from a seed derived from
(master seed, detector, SNR, hypothesis, trial index), so results are the
same for any thread count and H0/H1 pools never share streams. The seed
does not depend on rho: sweeping the noise uncertainty reuses the sample
streams and only changes the realised noise level.
"""

from __future__ import annotations

import math
import warnings
import zlib
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import binomtest

from ..analytic import estimate_correlations, threshold as analytic_threshold
from ..detector import Hypothesis, empirical_threshold, map_trials, scs_statistic
from ..errors import UnreachableTargetError
from ..signals import H0_SNR, generate_noise, generate_primary, mix
from .scenario import ScenarioConfig, build_detector, snr_code

H0_POOL, H1_POOL, CALIBRATION_POOL = 0, 1, 2


def trial_seed(master: int, detector: str, snr_db: float, pool: int,
               trial: int) -> np.random.SeedSequence:
    key = (zlib.crc32(detector.encode()), snr_code(snr_db), pool, trial)
    return np.random.SeedSequence(master, spawn_key=key)


def _child(ss: np.random.SeedSequence, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (index,))


@dataclass(frozen=True)
class TrialRecord:
    detector: str
    snr_db: float
    rho_db: float
    ts_ms: float
    nd: int
    trial: int
    seed: int
    statistic: float
    threshold: float
    decision: Hypothesis
    truth: Hypothesis


def acquire(adapter, cfg: ScenarioConfig, snr_db: float, ss: np.random.SeedSequence,
            noise=None):
    """One received buffer: noise, plus the primary unless ``snr_db`` is the H0 sentinel."""
    noise_model = noise or cfg.noise
    rate = adapter.input_rate
    n = adapter.input_samples
    center = adapter.view_center(cfg.signal)
    w = generate_noise(noise_model, n, rate, _child(ss, 0),
                       center_hz=0.0 if center is None else center)
    if snr_db == H0_SNR:
        return w
    s = generate_primary(cfg.signal, n / rate, rate, _child(ss, 1), center_hz=center)
    return mix(s, w, snr_db)


def simulate_statistics(cfg: ScenarioConfig, cell_snr: float, pool: int, trials: int,
                        threads: int = 1, adapter=None, noise=None,
                        keep_spectrograms: bool = False):
    """Statistics of ``trials`` buffers from one pool of one SNR cell.

    The H1 pool carries the primary at ``cell_snr``; the H0 and calibration
    pools are noise only. Calibration pools are shared by all SNR cells.
    ``keep_spectrograms`` (SCS only) also returns each partial spectrogram.
    """
    adapter = adapter or build_detector(cfg)
    content_snr = cell_snr if pool == H1_POOL else H0_SNR
    key_snr = H0_SNR if pool == CALIBRATION_POOL else cell_snr

    def one(i):
        x = acquire(adapter, cfg, content_snr, trial_seed(cfg.seed, adapter.name, key_snr, pool, i),
                    noise)
        if keep_spectrograms:
            spec = adapter.spectrogram(x, cfg.signal)
            return scs_statistic(spec).T, spec.matrix
        return adapter.statistic(x, cfg.signal), None

    out = map_trials(one, range(trials), threads)
    stats = np.array([o[0] for o in out])
    if keep_spectrograms:
        return stats, [o[1] for o in out]
    return stats


# --- calibration ---------------------------------------------------------

@dataclass(frozen=True)
class Calibration:
    detector: str
    ts_ms: float
    nd: int
    trials: int
    target_pfa: float
    gamma: float
    statistics: np.ndarray = field(repr=False)
    rule: str = "empirical"


def calibrate(cfg: ScenarioConfig, threads: int = 1, adapter=None) -> Calibration:
    """Threshold for ``cfg.target_pfa``: empirical on nominal noise, or the detector's
    own assumed-noise rule (energy-type detectors)."""
    adapter = adapter or build_detector(cfg)
    if adapter.threshold_rule == "assumed":
        gamma = adapter.assumed_threshold(cfg.noise, cfg.target_pfa)
        return Calibration(adapter.name, adapter.ts_ms, adapter.nd, 0, cfg.target_pfa,
                           gamma, np.empty(0), "assumed")
    nominal = replace(cfg.noise, rho_db=0.0)
    stats = simulate_statistics(cfg, H0_SNR, CALIBRATION_POOL, cfg.calibration_trials, threads,
                                adapter, nominal)
    return Calibration(adapter.name, adapter.ts_ms, adapter.nd, cfg.calibration_trials,
                       cfg.target_pfa, empirical_threshold(stats, cfg.target_pfa), stats)


def resolve_threshold(cfg: ScenarioConfig, threads: int = 1, adapter=None) -> float:
    if cfg.threshold is not None:
        return float(cfg.threshold)
    return calibrate(cfg, threads, adapter).gamma


@dataclass(frozen=True)
class ThresholdCell:
    nd: int
    ts_ms: float
    half_rows: int
    fft_size: int
    trials: int
    gamma_empirical: float
    gamma_analytic: float
    accumulated_noise: float
    alpha_lag1: float
    h0_mean: float
    pfa_measured: float


def calibrate_cell(cfg: ScenarioConfig, threads: int = 1) -> ThresholdCell:
    """Empirical SCS threshold with the closed-form one evaluated at the
    accumulated noise correlation estimated from the same noise runs."""
    adapter = build_detector(cfg.with_(detector="scs"))
    nominal = replace(cfg.noise, rho_db=0.0)
    stats, mats = simulate_statistics(cfg, H0_SNR, CALIBRATION_POOL, cfg.calibration_trials,
                                      threads, adapter, nominal, keep_spectrograms=True)
    prof = estimate_correlations(mats)
    fe = adapter.frontend
    a_w = prof.accumulated_noise(fe.num_dwells)
    gamma = empirical_threshold(stats, cfg.target_pfa)
    return ThresholdCell(
        nd=fe.num_dwells, ts_ms=adapter.ts_ms, half_rows=fe.half_rows, fft_size=fe.fft_size,
        trials=cfg.calibration_trials,
        gamma_empirical=gamma,
        gamma_analytic=analytic_threshold(fe.half_rows, fe.num_dwells, a_w, cfg.target_pfa),
        accumulated_noise=a_w, alpha_lag1=float(prof.alpha_w[1]),
        h0_mean=float(np.mean(stats)), pfa_measured=float(np.mean(stats > gamma)))


def run_calibration(cfg: ScenarioConfig, threads: int = 1) -> list[ThresholdCell]:
    """The (N_d x t_s) grid of thresholds, ordered by N_d then t_s."""
    return [calibrate_cell(cfg.with_(num_dwells=nd, dwell_time=ts), threads)
            for nd in cfg.table_dwells for ts in cfg.table_dwell_times]


# --- ROC -----------------------------------------------------------------

def wilson(successes: int, trials: int) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class RocPoint:
    detector: str
    snr_db: float
    rho_db: float
    ts_ms: float
    nd: int
    trials: int
    pfa: float
    pfa_lo: float
    pfa_hi: float
    pd: float
    pd_lo: float
    pd_hi: float
    gamma: float
    seed: int

    @property
    def pmd(self) -> float:
        return 1.0 - self.pd


def count_exceedances(cfg: ScenarioConfig, cell_snr: float, pool: int, gamma: float,
                      trials: int, threads: int = 1, adapter=None) -> tuple[int, np.ndarray]:
    stats = simulate_statistics(cfg, cell_snr, pool, trials, threads, adapter)
    return int(np.count_nonzero(stats > gamma)), stats


def run_roc(cfg: ScenarioConfig, threads: int = 1, gamma: float | None = None,
            records: list | None = None) -> list[RocPoint]:
    """P_D and P_FA (with Wilson 95% intervals) at every SNR of the grid.

    Pass a list as ``records`` to collect one :class:`TrialRecord` per trial.
    """
    adapter = build_detector(cfg)
    gamma = resolve_threshold(cfg, threads, adapter) if gamma is None else gamma
    points = []
    for snr in cfg.snr_grid:
        hits, h1 = count_exceedances(cfg, snr, H1_POOL, gamma, cfg.trials, threads, adapter)
        alarms, h0 = count_exceedances(cfg, snr, H0_POOL, gamma, cfg.trials, threads, adapter)
        if records is not None:
            _record(records, adapter, cfg, snr, H1_POOL, h1, gamma)
            _record(records, adapter, cfg, snr, H0_POOL, h0, gamma)
        points.append(RocPoint(adapter.name, snr, cfg.noise.rho_db, adapter.ts_ms, adapter.nd,
                               cfg.trials, alarms / cfg.trials, *wilson(alarms, cfg.trials),
                               hits / cfg.trials, *wilson(hits, cfg.trials), gamma, cfg.seed))
    return points


def _record(records, adapter, cfg, snr, pool, stats, gamma):
    truth = Hypothesis.H1 if pool == H1_POOL else Hypothesis.H0
    for i, t in enumerate(stats):
        ss = trial_seed(cfg.seed, adapter.name, snr, pool, i)
        records.append(TrialRecord(
            adapter.name, snr, cfg.noise.rho_db, adapter.ts_ms, adapter.nd, i,
            int(ss.generate_state(1)[0]), float(t), gamma,
            Hypothesis.H1 if t > gamma else Hypothesis.H0, truth))


# --- sensitivity -----------------------------------------------------------

@dataclass(frozen=True)
class Sensitivity:
    detector: str
    rho_db: float
    ts_ms: float
    nd: int
    trials: int
    snr_db: float
    pd: float
    pd_lo: float
    pd_hi: float
    pfa: float
    pfa_lo: float
    pfa_hi: float
    gamma: float
    seed: int
    target_pfa: float
    evaluations: dict = field(default_factory=dict, repr=False)
    at_lower_bound: bool = False

    @property
    def calibration_failure(self) -> bool:
        """Measured false-alarm rate is significantly above the target it was set for."""
        return self.pfa_lo > self.target_pfa


def find_sensitivity(cfg: ScenarioConfig, pd_target: float | None = None,
                     threads: int = 1, gamma: float | None = None) -> Sensitivity:
    """Smallest grid SNR whose measured P_D reaches ``pd_target``, by bisection.

    The grid runs over ``cfg.sensitivity_range`` in ``cfg.sensitivity_step``
    steps. Raises :class:`UnreachableTargetError` when the top of the range
    misses the target.
    """
    pd_target = cfg.pd_target if pd_target is None else pd_target
    adapter = build_detector(cfg)
    gamma = resolve_threshold(cfg, threads, adapter) if gamma is None else gamma
    lo, hi = cfg.sensitivity_range
    steps = int(round((hi - lo) / cfg.sensitivity_step))
    grid = [round(lo + i * cfg.sensitivity_step, 6) for i in range(steps + 1)]
    cache: dict[float, int] = {}

    def hits(i):
        snr = grid[i]
        if snr not in cache:
            cache[snr] = count_exceedances(cfg, snr, H1_POOL, gamma, cfg.trials, threads,
                                           adapter)[0]
        return cache[snr]

    need = pd_target * cfg.trials
    top = len(grid) - 1
    if hits(top) < need:
        raise UnreachableTargetError(
            f"{adapter.name}: P_D {hits(top) / cfg.trials:.3f} < {pd_target} at {grid[top]} dB")
    at_lower = hits(0) >= need
    if at_lower:
        best = 0
    else:
        left, right = 0, top
        while right - left > 1:
            mid = (left + right) // 2
            if hits(mid) >= need:
                right = mid
            else:
                left = mid
        best = right
    _check_monotone(cache, cfg.trials, adapter.name)

    alarms = count_exceedances(cfg, H0_SNR, H0_POOL, gamma, cfg.trials, threads, adapter)[0]
    k = hits(best)
    return Sensitivity(adapter.name, cfg.noise.rho_db, adapter.ts_ms, adapter.nd, cfg.trials,
                       grid[best], k / cfg.trials, *wilson(k, cfg.trials),
                       alarms / cfg.trials, *wilson(alarms, cfg.trials), gamma, cfg.seed,
                       cfg.target_pfa, {s: c / cfg.trials for s, c in sorted(cache.items())},
                       at_lower)


def _check_monotone(cache: dict, trials: int, name: str) -> None:
    points = sorted(cache.items())
    for (s0, c0), (s1, c1) in zip(points, points[1:]):
        p0, p1 = c0 / trials, c1 / trials
        slack = 3.0 * math.sqrt(max(p0 * (1 - p0), 1.0 / trials) / trials)
        if p1 < p0 - slack:
            warnings.warn(f"{name}: P_D falls from {p0:.3f} at {s0} dB to {p1:.3f} at {s1} dB",
                          RuntimeWarning, stacklevel=3)


@dataclass(frozen=True)
class UncertaintyRow:
    sensitivity: Sensitivity | None
    detector: str
    rho_db: float
    delta_db: float | None
    calibration_failure: bool
    unreachable: bool = False


def run_uncertainty_sweep(cfgs, rhos=None, threads: int = 1) -> list[UncertaintyRow]:
    """Sensitivity at each rho for each scenario, with the shift from its first rho.

    The threshold is set once per detector at nominal noise, as a deployed
    detector would be, and reused for every rho.
    """
    if isinstance(cfgs, ScenarioConfig):
        cfgs = [cfgs]
    rows = []
    for cfg in cfgs:
        grid = tuple(rhos) if rhos is not None else cfg.rho_grid
        adapter = build_detector(cfg)
        gamma = resolve_threshold(cfg, threads, adapter)
        baseline = None
        for rho in grid:
            c = cfg.with_(noise=replace(cfg.noise, rho_db=float(rho)))
            try:
                sens = find_sensitivity(c, threads=threads, gamma=gamma)
            except UnreachableTargetError:
                alarms = count_exceedances(c, H0_SNR, H0_POOL, gamma, c.trials, threads, adapter)[0]
                failed = wilson(alarms, c.trials)[0] > c.target_pfa
                rows.append(UncertaintyRow(None, adapter.name, float(rho), None, failed, True))
                continue
            if baseline is None:
                baseline = sens.snr_db
            rows.append(UncertaintyRow(sens, adapter.name, float(rho), sens.snr_db - baseline,
                                       sens.calibration_failure))
    return rows

