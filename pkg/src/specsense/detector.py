"""Spectral covariance statistic, decision rule and threshold calibration."""

from __future__ import annotations

import enum
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CalibrationWarning, DegenerateStatisticError
from .frontend import FrontendConfig, Spectrogram, sense_spectrogram
from .signals import IqBuffer


class Hypothesis(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    matrix: np.ndarray
    column_means: np.ndarray

    @property
    def num_dwells(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class TestStatistic:
    __test__ = False  # not a pytest class

    T1: float
    T2: float

    @property
    def T(self) -> float:
        return self.T1 / self.T2

    def __float__(self) -> float:
        return self.T


@dataclass(frozen=True)
class Verdict:
    """Scalar statistic against a threshold. ``components`` keeps T1/T2 for SCS."""

    statistic: float
    threshold: float
    decision: Hypothesis
    components: TestStatistic | None = None

    @property
    def detected(self) -> bool:
        return self.decision is Hypothesis.H1


def _as_matrix(M) -> np.ndarray:
    matrix = M.matrix if isinstance(M, Spectrogram) else np.asarray(M, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("spectrogram matrix must be 2-D")
    rows, cols = matrix.shape
    if rows < 3 or rows % 2 == 0:
        raise ValueError(f"need 2K+1 rows with K >= 1, got {rows}")
    if cols < 2:
        raise ValueError(f"need at least two dwells, got {cols}")
    return matrix


def covariance(M) -> CovarianceMatrix:
    """Cross-dwell covariance of a (2K+1) x N_d partial spectrogram.

    Means are over all 2K+1 rows while the covariance divides by 2K.
    """
    matrix = _as_matrix(M)
    two_k = matrix.shape[0] - 1
    means = matrix.sum(axis=0) / (two_k + 1)
    centered = matrix - means
    gram = centered.T @ centered / two_k
    upper = np.triu(gram)
    cov = upper + np.triu(upper, 1).T
    return CovarianceMatrix(cov, means)


def test_statistic(C: CovarianceMatrix) -> TestStatistic:
    """T2 is the mean diagonal, T1 adds twice the strict upper triangle over N_d."""
    matrix = C.matrix
    nd = matrix.shape[0]
    t2 = float(np.trace(matrix)) / nd
    if not t2 > 0:
        raise DegenerateStatisticError("mean autocovariance is zero (constant spectrogram)")
    t1 = t2 + 2.0 * float(np.triu(matrix, 1).sum()) / nd
    return TestStatistic(t1, t2)


test_statistic.__test__ = False


def scs_statistic(M) -> TestStatistic:
    return test_statistic(covariance(M))


def decide(stat, threshold: float) -> Verdict:
    """H1 iff the statistic strictly exceeds the threshold."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    components = stat if isinstance(stat, TestStatistic) else None
    value = float(stat)
    decision = Hypothesis.H1 if value > threshold else Hypothesis.H0
    return Verdict(value, float(threshold), decision, components)


def scs_detect(x: IqBuffer, cfg: FrontendConfig, threshold: float) -> Verdict:
    return decide(scs_statistic(sense_spectrogram(x, cfg)), threshold)


def trial_seeds(seed, trials: int) -> list[np.random.SeedSequence]:
    """Independent per-trial seeds, indexed so results do not depend on scheduling."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (i,))
            for i in range(trials)]


def map_trials(fn: Callable, seeds, threads: int = 1) -> list:
    """Apply ``fn`` to every seed, preserving order."""
    if threads <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seeds))


def empirical_threshold(samples, target_pfa: float) -> float:
    """(1 - target_pfa) quantile, linear between order statistics."""
    if not 0 < target_pfa < 1:
        raise ValueError("target_pfa must lie in (0, 1)")
    samples = np.asarray(samples, dtype=float)
    if samples.size * target_pfa < 10:
        warnings.warn(
            f"{samples.size} trials give about {samples.size * target_pfa:.1f} exceedances; "
            "the quantile is unstable", CalibrationWarning, stacklevel=2)
    return float(np.quantile(samples, 1.0 - target_pfa, method="linear"))


def h0_statistics(noise_source: Callable, cfg: FrontendConfig, trials: int, seed,
                  threads: int = 1) -> np.ndarray:
    """SCS statistic for ``trials`` independent noise-only buffers.

    ``noise_source(seed)`` must return an IqBuffer long enough for ``cfg``.
    """
    def one(s):
        return scs_statistic(sense_spectrogram(noise_source(s), cfg)).T

    return np.array(map_trials(one, trial_seeds(seed, trials), threads))


def calibrate_threshold(noise_source: Callable, cfg: FrontendConfig, target_pfa: float,
                        trials: int, seed, threads: int = 1) -> float:
    """Empirical threshold meeting ``target_pfa`` on simulated noise."""
    if trials < 100:
        raise ValueError("calibration needs at least 100 trials")
    if not 0 < target_pfa < 1:
        raise ValueError("target_pfa must lie in (0, 1)")
    stats = h0_statistics(noise_source, cfg, trials, seed, threads)
    return empirical_threshold(stats, target_pfa)
