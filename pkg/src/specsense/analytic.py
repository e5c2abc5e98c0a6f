"""Closed-form moments, threshold and detection probability of the SCS statistic.

Lag indexing: ``alpha[lag]`` is the normalised correlation between dwells
``lag`` apart, so ``alpha[0] == 1``. Accumulated correlations weight each
lag by how many dwell pairs share it:

    A = sum_{lag=1}^{N_d-1} (N_d - lag) * alpha[lag]

PSD-valued fields are in W/Hz; because every statistic is a ratio, any
common unit (for instance raw periodogram values, which are PSD times F_s)
works as long as it is used consistently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AnalyticDomainError, InsufficientSamplesError
from .frontend import Spectrogram
from .normal import q_function, q_inverse


@dataclass(frozen=True)
class SpectralParams:
    noise_psd: float
    signal_psd: float
    pilot_psd: float
    half_rows: int
    num_dwells: int

    def __post_init__(self):
        if min(self.noise_psd, self.signal_psd, self.pilot_psd) < 0:
            raise ValueError("PSDs must be non-negative")
        if self.half_rows < 1:
            raise ValueError("K must be at least 1")
        if self.num_dwells < 1:
            raise ValueError("N_d must be at least 1")

    @classmethod
    def from_signal(cls, *, total_power: float, pilot_fraction: float, bandwidth: float,
                    noise_psd: float, fft_size: int, rate: float, half_rows: int,
                    num_dwells: int) -> "SpectralParams":
        """Pilot PSD is its power over one bin; data PSD spreads over the channel."""
        return cls(
            noise_psd=noise_psd,
            signal_psd=(1.0 - pilot_fraction) * total_power / bandwidth,
            pilot_psd=pilot_fraction * total_power * fft_size / rate,
            half_rows=half_rows,
            num_dwells=num_dwells,
        )

    @classmethod
    def noise_only(cls, noise_psd: float, half_rows: int, num_dwells: int) -> "SpectralParams":
        return cls(noise_psd, 0.0, 0.0, half_rows, num_dwells)


def accumulate(alpha, num_dwells: int) -> float:
    """Pair-weighted sum of lag correlations over ``num_dwells`` dwells."""
    alpha = np.asarray(alpha, dtype=float)
    if num_dwells < 1:
        raise ValueError("num_dwells must be positive")
    if alpha.size < num_dwells:
        raise ValueError(f"need correlations up to lag {num_dwells - 1}, have {alpha.size - 1}")
    lags = np.arange(1, num_dwells)
    return float(np.sum((num_dwells - lags) * alpha[lags]))


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    """Lag correlations of noise, pilot and data spectra (index 0 is lag 0)."""

    alpha_w: np.ndarray
    alpha_p: np.ndarray
    alpha_s: np.ndarray

    def __post_init__(self):
        arrays = []
        for name in ("alpha_w", "alpha_p", "alpha_s"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or arr.size < 1:
                raise ValueError(f"{name} must be a non-empty 1-D sequence")
            if np.any(np.abs(arr) > 1.0 + 1e-12):
                raise ValueError(f"{name} entries must lie in [-1, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            arrays.append(arr)
        if len({a.size for a in arrays}) != 1:
            raise ValueError("correlation sequences must have equal length")

    @classmethod
    def constant(cls, alpha_w: float, alpha_p: float = 1.0, alpha_s: float = 1.0,
                 num_dwells: int = 30) -> "CorrelationProfile":
        """Same correlation at every nonzero lag."""
        def seq(a):
            out = np.full(num_dwells, float(a))
            out[0] = 1.0
            return out
        return cls(seq(alpha_w), seq(alpha_p), seq(alpha_s))

    @property
    def max_dwells(self) -> int:
        return self.alpha_w.size

    def accumulated_noise(self, num_dwells: int | None = None) -> float:
        return accumulate(self.alpha_w, num_dwells or self.max_dwells)

    def accumulated_pilot(self, num_dwells: int | None = None) -> float:
        return accumulate(self.alpha_p, num_dwells or self.max_dwells)


def _lag_value(alpha: np.ndarray, lag: int) -> float:
    if not 0 <= lag < alpha.size:
        raise ValueError(f"lag {lag} outside 0..{alpha.size - 1}")
    return float(alpha[lag])


def mean_inband_spectrum(p: SpectralParams, pilot_psd: float, signal_psd: float,
                         low_snr: bool = False) -> float:
    """Expected column mean of the partial spectrogram for one dwell."""
    mean = p.noise_psd + pilot_psd / (2 * p.half_rows)
    if not low_snr:
        mean += signal_psd / 2.0
    return mean


def cov_moments(p: SpectralParams, prof: CorrelationProfile, lag: int,
                low_snr: bool = False) -> tuple[float, float]:
    """Mean and variance of one covariance entry between dwells ``lag`` apart.

    ``low_snr`` drops the data-spectrum contribution from the mean.
    """
    if lag > p.num_dwells - 1:
        raise ValueError("lag exceeds N_d - 1")
    aw = _lag_value(prof.alpha_w, lag)
    ap = _lag_value(prof.alpha_p, lag)
    as_ = _lag_value(prof.alpha_s, lag)
    nw, ns, dp, k = p.noise_psd, p.signal_psd, p.pilot_psd, p.half_rows
    kron = 1.0 if lag == 0 else 0.0

    mean = aw * nw ** 2 + ap * dp ** 2 / (2 * k)
    if not low_snr:
        mean += ns * (nw + (ns + nw) * as_)

    ratio = 1.0 + (dp / nw if nw else 0.0)
    var = (nw ** 2 * dp ** 2 / (2 * k ** 2)) * ratio ** 2 * (1.0 + ap * kron) \
        + (nw ** 2 / (4 * k ** 2)) * (k + ratio ** 2) * (2.0 + nw ** 2 * kron)
    return mean, var


def region_variances(p: SpectralParams, prof: CorrelationProfile,
                     lag: int) -> tuple[float, float, float, float]:
    """Per-region variance terms (noise-only, pilot bin, data bins) and their combination.

    Returns ``(C0, C1, C2, var)`` with ``var = (K*C0 + C1 + K*C2) / (4K^2)``.
    """
    if lag > p.num_dwells - 1:
        raise ValueError("lag exceeds N_d - 1")
    ap = _lag_value(prof.alpha_p, lag)
    nw, ns, dp, k = p.noise_psd, p.signal_psd, p.pilot_psd, p.half_rows
    kron = 1.0 if lag == 0 else 0.0
    pilot_term = 1.0 + ap * kron

    c0 = nw ** 2 * (dp ** 2 / (2 * k ** 2) * pilot_term + 2.0 + nw ** 2 * kron)
    c1 = 2.0 * (nw + dp ** 2) ** 2 * (dp ** 2 * pilot_term + (nw + dp) ** 2 * kron)
    c2 = 2.0 * nw ** 2 * (dp ** 2 / (4 * k ** 2) * pilot_term + (nw + ns) ** 2 * kron)
    var = (k * c0 + c1 + k * c2) / (4 * k ** 2)
    return c0, c1, c2, var


def product_variance(mean_x: float, mean_y: float, var_x: float, var_y: float,
                     cov_xy: float) -> float:
    """Variance of X*Y for jointly Gaussian X, Y."""
    return (mean_x ** 2 * var_y + mean_y ** 2 * var_x + 2.0 * mean_x * mean_y * cov_xy
            + var_x * var_y + cov_xy ** 2)


TEST_VARIANCE_FORMS = ("auto", "general", "h0", "low_snr")


def test_moments(p: SpectralParams, prof: CorrelationProfile,
                 variance: str = "auto") -> tuple[float, float, float]:
    """(E[T1], E[T2], var(T2)).

    ``variance`` picks the var(T2) expression: ``general`` (signal present),
    ``h0`` (noise only, N_w^4/(4 K N_d)), ``low_snr`` (the bound
    (N_w^2 + 2 delta_p^2/K)^2/(4 N_d)). ``auto`` uses ``h0`` when there is
    no signal and ``general`` otherwise. The ``h0`` and ``low_snr`` forms
    differ by a factor K at zero pilot power.
    """
    if p.num_dwells < 2:
        raise ValueError("N_d must be at least 2")
    if variance not in TEST_VARIANCE_FORMS:
        raise ValueError(f"variance must be one of {TEST_VARIANCE_FORMS}")
    nw, dp, k, nd = p.noise_psd, p.pilot_psd, p.half_rows, p.num_dwells
    a_w = prof.accumulated_noise(nd)
    a_p = prof.accumulated_pilot(nd)

    e_t2 = nw ** 2 + dp ** 2 / (2 * k)
    e_t1 = e_t2 + (2 * a_w / nd) * nw ** 2 + (a_p / (k * nd)) * dp ** 2

    if variance == "auto":
        variance = "h0" if dp == 0 and p.signal_psd == 0 else "general"
    if variance == "h0":
        var_t2 = nw ** 4 / (4 * k * nd)
    elif variance == "low_snr":
        var_t2 = (nw ** 2 + 2 * dp ** 2 / k) ** 2 / (4 * nd)
    else:
        var_t2 = (dp ** 2 * (nw + dp) ** 2
                  + (nw ** 2 / 4) * (nw ** 2 * k + (nw + dp) ** 2)) / (k ** 2 * nd)
    return e_t1, e_t2, var_t2


test_moments.__test__ = False


def threshold(K: int, N_d: int, A_w: float, pfa: float) -> float:
    """Threshold meeting ``pfa`` for noise with accumulated correlation ``A_w``."""
    if not 0 < pfa < 1:
        raise ValueError("pfa must lie in (0, 1)")
    root = 2.0 * math.sqrt(K * N_d)
    denom = q_inverse(1.0 - pfa) + root
    if not denom > 0:
        raise AnalyticDomainError(
            f"K*N_d = {K * N_d} is too small for pfa = {pfa:g}: threshold denominator {denom:g}")
    return root * (1.0 + 2.0 * A_w / N_d) / denom


def predicted_pfa(gamma: float, K: int, N_d: int, A_w: float) -> float:
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    root = 2.0 * math.sqrt(K * N_d)
    return float(1.0 - q_function(root / gamma * (1.0 + 2.0 * A_w / N_d) - root))


def effective_snr(f_p: float, B: float, N: int, F_s: float, snr: float) -> float:
    """Pilot-bin SNR after an N-point FFT at F_s, from a linear channel SNR."""
    if min(f_p, B, N, F_s) <= 0 or snr < 0:
        raise ValueError("f_p, B, N and F_s must be positive and snr non-negative")
    return f_p * B * N / F_s * snr


def predicted_pd(gamma: float, K: int, N_d: int, A_w: float, A_p: float,
                 pilot_snr: float) -> float:
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if pilot_snr < 0:
        raise ValueError("pilot_snr must be non-negative")
    g2 = pilot_snr ** 2
    numer = (2.0 * math.sqrt(N_d) / gamma) * (1.0 + 2.0 * A_w / N_d - gamma) \
        + ((N_d + 2.0 * A_p - gamma * N_d) / (gamma * K * math.sqrt(N_d))) * g2
    return float(1.0 - q_function(numer / (1.0 + 2.0 * g2 / K)))


# --- correlation estimation ---------------------------------------------

MIN_SPECTROGRAMS = 100


def _stack(spectrograms) -> np.ndarray:
    mats = [s.matrix if isinstance(s, Spectrogram) else np.asarray(s, dtype=float)
            for s in spectrograms]
    if len(mats) < MIN_SPECTROGRAMS:
        raise InsufficientSamplesError(
            f"need at least {MIN_SPECTROGRAMS} spectrograms, got {len(mats)}")
    stack = np.stack(mats)
    if stack.shape[1] < 3 or stack.shape[1] % 2 == 0:
        raise ValueError("spectrograms must have 2K+1 rows with K >= 1")
    return stack


def lag_covariance_means(stack: np.ndarray) -> np.ndarray:
    """Average covariance entry at each dwell lag over a stack of spectrograms."""
    two_k = stack.shape[1] - 1
    centered = stack - stack.mean(axis=1, keepdims=True)
    cov = np.einsum("skt,sku->tu", centered, centered) / (two_k * stack.shape[0])
    nd = cov.shape[0]
    return np.array([np.mean(np.diagonal(cov, lag)) for lag in range(nd)])


def _lag_correlation(series: np.ndarray) -> np.ndarray:
    """Mean product of a (spectrogram, dwell) series at each lag over its squared mean."""
    nd = series.shape[1]
    scale = float(np.mean(series)) ** 2
    if not scale > 0:
        return np.zeros(nd)
    return np.array([np.mean(series[:, : nd - lag] * series[:, lag:]) for lag in range(nd)]) / scale


def _finish(alpha: np.ndarray) -> np.ndarray:
    alpha = np.clip(alpha, -1.0, 1.0)
    alpha[0] = 1.0
    return alpha


def estimate_correlations(h0_spectrograms, h1_spectrograms=None) -> CorrelationProfile:
    """Lag correlations from simulated spectrograms.

    Noise: average covariance at each lag over the average autocovariance,
    computed from noise-only spectrograms. Pilot: products of the
    pilot-bin excess (DC bin minus the mean of the other bins) across
    dwells, over its squared mean. Data: same with the excess of the upper
    half-band over the lower half-band. The signal correlations are 1 when
    no signal-present spectrograms are supplied.
    """
    h0 = _stack(h0_spectrograms)
    lag_means = lag_covariance_means(h0)
    if not lag_means[0] > 0:
        raise InsufficientSamplesError("noise-only spectrograms have no variance")
    alpha_w = _finish(lag_means / lag_means[0])
    nd = alpha_w.size

    if h1_spectrograms is None:
        ones = np.ones(nd)
        return CorrelationProfile(alpha_w, ones, ones)

    h1 = _stack(h1_spectrograms)
    if h1.shape[2] != nd:
        raise ValueError("signal-present spectrograms must have the same dwell count")
    k = h1.shape[1] // 2
    dc = h1[:, k, :]
    others = (h1.sum(axis=1) - dc) / (2 * k)
    pilot_excess = dc - others
    data_excess = h1[:, k + 1:, :].mean(axis=1) - h1[:, :k, :].mean(axis=1)
    return CorrelationProfile(alpha_w, _finish(_lag_correlation(pilot_excess)),
                              _finish(_lag_correlation(data_excess)))
