"""Comparison detectors: energy, covariance absolute value (CAV), CAV behind
the SCS front end, and FFT pilot energy / pilot location tests.

Each returns a :class:`~specsense.detector.Verdict`, and each has a bare
``*_statistic`` function so the bench can calibrate any of them the same
way it calibrates SCS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft
from scipy.stats import gamma

from .detector import Hypothesis, Verdict, decide
from .errors import ConfigError, InsufficientSamplesError
from .frontend import FrontendConfig, condition
from .normal import q_inverse
from .signals import IqBuffer

MIN_ENERGY_SAMPLES = 1000


def _samples(z) -> np.ndarray:
    return z.samples if isinstance(z, IqBuffer) else np.asarray(z)


# --- energy ---------------------------------------------------------------

def energy_statistic(z) -> float:
    x = _samples(z)
    return float(np.mean(x.real ** 2 + x.imag ** 2))


def energy_threshold(assumed_noise_power: float, n: int, pfa: float) -> float:
    """Central-limit threshold: mean |w|^2 of n complex Gaussian samples has std P/sqrt(n)."""
    if not 0 < pfa < 1:
        raise ValueError("pfa must lie in (0, 1)")
    return assumed_noise_power * (1.0 + q_inverse(pfa) / math.sqrt(n))


def energy_detect(z, assumed_noise_power: float, pfa: float):
    x = _samples(z)
    if x.size < MIN_ENERGY_SAMPLES:
        raise InsufficientSamplesError(f"energy detection needs {MIN_ENERGY_SAMPLES} samples")
    return decide(energy_statistic(x), energy_threshold(assumed_noise_power, x.size, pfa))


# --- covariance absolute value ---------------------------------------------

@dataclass(frozen=True)
class CavConfig:
    num_samples: int = 500_000
    smoothing_factor: int = 14
    threshold: float | None = None

    def __post_init__(self):
        if self.smoothing_factor < 2:
            raise ConfigError("smoothing_factor must be at least 2")
        if self.num_samples < 10 * self.smoothing_factor:
            raise ConfigError("num_samples must be much larger than smoothing_factor")


def autocorrelations(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Unbiased sample autocorrelation r[l] = mean x[n+l] conj(x[n]), l = 0..max_lag-1."""
    n = x.size
    return np.array([np.vdot(x[: n - lag], x[lag:]) / (n - lag) for lag in range(max_lag)])


def cav_statistic(z, num_samples: int, smoothing_factor: int) -> float:
    """Sum of |entries| of the Toeplitz autocorrelation matrix over the sum of |diagonal|."""
    x = _samples(z)
    if x.size < num_samples:
        raise InsufficientSamplesError(f"CAV needs {num_samples} samples, have {x.size}")
    L = smoothing_factor
    r = np.abs(autocorrelations(x[:num_samples], L))
    # |c_nm| = |r[|n-m|]|; lag l appears 2(L-l) times off the diagonal
    total = L * r[0] + 2.0 * np.sum((L - np.arange(1, L)) * r[1:])
    return float(total / (L * r[0]))


def cav_detect(z, cfg: CavConfig):
    if cfg.threshold is None:
        raise ConfigError("CavConfig.threshold is not calibrated")
    return decide(cav_statistic(z, cfg.num_samples, cfg.smoothing_factor), cfg.threshold)


def cav_step2_statistic(z: IqBuffer, cfg: CavConfig, fe: FrontendConfig) -> float:
    """CAV on the downconverted, decimated buffer.

    ``cfg.num_samples`` counts input samples; the decimated buffer uses
    ``num_samples // factor`` of them.
    """
    factor = fe.decimation_factor(z.sample_rate)
    y = condition(z, fe)
    return cav_statistic(y, cfg.num_samples // factor, cfg.smoothing_factor)


def cav_with_step2(z: IqBuffer, cfg: CavConfig, fe: FrontendConfig):
    if cfg.threshold is None:
        raise ConfigError("CavConfig.threshold is not calibrated")
    return decide(cav_step2_statistic(z, cfg, fe), cfg.threshold)


# --- FFT pilot detectors ----------------------------------------------------

@dataclass(frozen=True)
class PilotDetectConfig:
    """FFT pilot test over contiguous dwells of ``fft_size`` samples.

    ``search_band`` is the number of bins on each side of the expected bin
    scanned in location mode (the whole spectrum when omitted).
    """

    fft_size: int = 4096
    expected_pilot_bin: int = 0
    search_window: int = 1
    mode: str = "location"
    search_band: int | None = None

    def __post_init__(self):
        if self.fft_size < 2:
            raise ConfigError("fft_size must be at least 2")
        if self.search_window < 1:
            raise ConfigError("search_window must be at least 1")
        if not -self.fft_size // 2 <= self.expected_pilot_bin < self.fft_size:
            raise ConfigError("expected_pilot_bin outside the FFT range")
        if self.mode not in ("energy", "location"):
            raise ConfigError(f"unknown pilot detection mode {self.mode!r}")
        if self.search_band is not None and not self.search_window <= self.search_band < self.fft_size // 2:
            raise ConfigError("search_band must cover the search window and fit in the FFT")

    @property
    def search_bins(self) -> int:
        """Number of bins scanned per dwell in location mode."""
        return self.fft_size if self.search_band is None else 2 * self.search_band + 1


def _dwell_periodograms(x: np.ndarray, n: int) -> np.ndarray:
    dwells = x.size // n
    if dwells < 1:
        raise InsufficientSamplesError(f"need at least {n} samples for one FFT")
    spectra = fft.fft(x[: dwells * n].reshape(dwells, n), axis=1)
    return (spectra.real ** 2 + spectra.imag ** 2) / n


def pilot_statistic(z, cfg: PilotDetectConfig) -> float:
    """Energy mode: mean periodogram at the pilot bin.
    Location mode: number of dwells whose peak lands within the window."""
    power = _dwell_periodograms(_samples(z), cfg.fft_size)
    n = cfg.fft_size
    if cfg.mode == "energy":
        return float(np.mean(power[:, cfg.expected_pilot_bin % n]))
    if cfg.search_band is None:
        offsets = np.arange(n)
        offsets = np.where(offsets >= n // 2, offsets - n, offsets)
        peak = np.argmax(power, axis=1)
        distance = (offsets[peak] - (cfg.expected_pilot_bin % n)) % n
        distance = np.minimum(distance, n - distance)
    else:
        offsets = np.arange(-cfg.search_band, cfg.search_band + 1)
        cols = (cfg.expected_pilot_bin + offsets) % n
        distance = np.abs(offsets[np.argmax(power[:, cols], axis=1)])
    return float(np.count_nonzero(distance <= cfg.search_window))


def pilot_energy_threshold(assumed_bin_power: float, num_dwells: int, pfa: float) -> float:
    """Threshold on the averaged pilot bin when only noise of known level is present.

    A periodogram bin of white noise is exponential; the average of
    ``num_dwells`` of them is gamma distributed.
    """
    if not 0 < pfa < 1:
        raise ValueError("pfa must lie in (0, 1)")
    return float(gamma.isf(pfa, num_dwells, scale=assumed_bin_power / num_dwells))


def pilot_detect(z, cfg: PilotDetectConfig, threshold: float):
    """Compare :func:`pilot_statistic` with a threshold.

    In location mode the threshold is a dwell count (H1 when more dwells
    than that hit the window); calibrate it on noise for the P_FA wanted.
    """
    if _samples(z).size < cfg.fft_size:
        raise InsufficientSamplesError(f"need at least {cfg.fft_size} samples")
    value = pilot_statistic(z, cfg)
    if cfg.mode == "energy":
        return decide(value, threshold)
    # a count threshold of zero is legitimate, so skip decide()'s positivity check
    decision = Hypothesis.H1 if value > threshold else Hypothesis.H0
    return Verdict(value, float(threshold), decision)
