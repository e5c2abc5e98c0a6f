"""Pilot-to-DC translation, low-pass decimation and the partial spectrogram."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft, signal

from .errors import ConfigError, InsufficientSamplesError
from .signals import IqBuffer

# Low-pass shape: flat to 20% of the cutoff, 60 dB down at the cutoff.
# The taper across the retained band sets how strongly neighbouring dwells
# correlate under noise alone, which in turn sets the calibrated thresholds.
PASSBAND_FRACTION = 0.2
STOPBAND_ATTENUATION_DB = 60.0


def fft_size_for(rate: float, dwell_time: float) -> int:
    """Largest power of two not exceeding the samples in one dwell."""
    samples = rate * dwell_time
    if samples < 1:
        raise ConfigError(f"dwell of {dwell_time:g} s holds no samples at {rate:g} Hz")
    return 1 << int(math.floor(math.log2(samples) + 1e-12))


@dataclass(frozen=True)
class FrontendConfig:
    pilot_freq: float = 0.0
    decimated_rate: float = 2.152e6
    lpf_cutoff: float | None = 20e3
    dwell_time: float = 1e-3
    num_dwells: int = 30

    def __post_init__(self):
        if self.decimated_rate <= 0:
            raise ConfigError("decimated_rate must be positive")
        if self.lpf_cutoff is not None and not 0 < self.lpf_cutoff < self.decimated_rate / 2:
            raise ConfigError("lpf_cutoff must lie in (0, decimated_rate/2)")
        if self.num_dwells < 1:
            raise ConfigError("num_dwells must be at least 1")
        fft_size_for(self.decimated_rate, self.dwell_time)

    @property
    def fft_size(self) -> int:
        return fft_size_for(self.decimated_rate, self.dwell_time)

    @property
    def half_rows(self) -> int:
        """K: number of bins kept on each side of DC."""
        cutoff = self.lpf_cutoff if self.lpf_cutoff is not None else self.decimated_rate / 2
        return int(math.floor(self.fft_size * cutoff / self.decimated_rate + 1e-9))

    @property
    def bin_spacing(self) -> float:
        return self.decimated_rate / self.fft_size

    def decimation_factor(self, input_rate: float) -> int:
        return decimation_factor(input_rate, self.decimated_rate)

    def settle_samples(self, input_rate: float) -> int:
        """Decimated samples to drop at the head so filter transients are gone."""
        if self.lpf_cutoff is None:
            return 0
        factor = self.decimation_factor(input_rate)
        taps = lowpass_taps(input_rate, self.lpf_cutoff)
        return -(-(taps.size // 2) // factor)

    def input_length(self, input_rate: float) -> int:
        """Input samples needed to fill every dwell with settled output."""
        factor = self.decimation_factor(input_rate)
        settle = self.settle_samples(input_rate)
        return (self.fft_size * self.num_dwells + 2 * settle) * factor


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Periodogram rows -K..K (DC in the middle) by dwell columns."""

    matrix: np.ndarray
    half_rows: int
    bin_spacing: float
    fft_size: int
    dwell_time: float

    @property
    def num_dwells(self) -> int:
        return self.matrix.shape[1]

    def row(self, k: int) -> np.ndarray:
        """Dwell sequence of bin ``k`` (``k`` in -K..K)."""
        return self.matrix[k + self.half_rows]


def decimation_factor(input_rate: float, output_rate: float) -> int:
    ratio = input_rate / output_rate
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9 * ratio:
        raise ConfigError(
            f"{input_rate:g} Hz is not an integer multiple of {output_rate:g} Hz")
    return factor


@lru_cache(maxsize=32)
def _cached_taps(rate: float, cutoff: float) -> np.ndarray:
    passband = PASSBAND_FRACTION * cutoff
    numtaps, beta = signal.kaiserord(STOPBAND_ATTENUATION_DB, (cutoff - passband) / (rate / 2))
    numtaps |= 1  # odd length keeps the group delay an integer
    mid = 0.5 * (passband + cutoff)
    taps = signal.firwin(numtaps, mid, window=("kaiser", beta), fs=rate)
    taps.setflags(write=False)
    return taps


def lowpass_taps(rate: float, cutoff: float) -> np.ndarray:
    """Linear-phase Kaiser low-pass: unity at DC, 60 dB down at ``cutoff``.

    Read-only and cached per (rate, cutoff).
    """
    if not 0 < cutoff < rate / 2:
        raise ConfigError("cutoff must lie in (0, rate/2)")
    return _cached_taps(float(rate), float(cutoff))


def equivalent_noise_bandwidth(taps: np.ndarray, rate: float) -> float:
    """Two-sided noise bandwidth of an FIR, in Hz."""
    return float(np.sum(taps ** 2) * rate / np.sum(taps) ** 2)


def downconvert(x: IqBuffer, f_c: float) -> IqBuffer:
    """Shift the spectrum down by ``f_c`` so content at ``f_c`` lands on DC."""
    if not abs(f_c) < x.sample_rate / 2:
        raise ValueError(f"|f_c| must be below half the sample rate ({x.sample_rate / 2:g} Hz)")
    if f_c == 0:
        return x
    n = np.arange(len(x))
    # reduce the phase to whole cycles first to keep it small
    cycles = np.mod(n * (f_c / x.sample_rate), 1.0)
    rotated = x.samples * np.exp(-2j * np.pi * cycles)
    return x.with_samples(rotated, center_hz=x.center_hz + f_c)


def decimate(y: IqBuffer, F_s: float, B_f: float | None) -> IqBuffer:
    """Low-pass at ``B_f`` then keep every (rate/F_s)-th sample.

    Output sample ``m`` is aligned with input sample ``m*factor`` (the filter
    group delay is removed). The first and last ``settle_samples`` outputs
    see a partially filled filter. ``B_f=None`` skips filtering and is only
    allowed without rate change.
    """
    factor = decimation_factor(y.sample_rate, F_s)
    if B_f is None:
        if factor != 1:
            raise ConfigError("decimating without a low-pass filter would alias")
        return y
    if not 0 < B_f < F_s / 2:
        raise ConfigError("B_f must lie in (0, F_s/2)")
    taps = lowpass_taps(y.sample_rate, B_f)
    delay = taps.size // 2
    filtered = signal.oaconvolve(y.samples, taps)[delay: delay + len(y): factor]
    return y.with_samples(filtered, sample_rate=y.sample_rate / factor)


def periodogram_frames(z: np.ndarray, fft_size: int, num_dwells: int) -> np.ndarray:
    """Full (1/N)|FFT|^2 of each contiguous dwell, shape (num_dwells, N)."""
    needed = fft_size * num_dwells
    if z.size < needed:
        raise InsufficientSamplesError(
            f"need {needed} samples for {num_dwells} dwells of {fft_size}, have {z.size}")
    frames = z[:needed].reshape(num_dwells, fft_size)
    spectra = fft.fft(frames, axis=1)
    return (spectra.real ** 2 + spectra.imag ** 2) / fft_size


def spectrogram(z: IqBuffer, cfg: FrontendConfig) -> Spectrogram:
    """Partial spectrogram: bins -K..K of each dwell periodogram."""
    if abs(z.sample_rate - cfg.decimated_rate) > 1e-9 * cfg.decimated_rate:
        raise ConfigError("spectrogram input must already be at the decimated rate")
    n = cfg.fft_size
    k = cfg.half_rows
    power = periodogram_frames(z.samples, n, cfg.num_dwells)
    rows = np.r_[n - k: n, 0: k + 1]
    return Spectrogram(np.ascontiguousarray(power[:, rows].T), k, cfg.bin_spacing, n, cfg.dwell_time)


def condition(x: IqBuffer, cfg: FrontendConfig) -> IqBuffer:
    """Downconvert and decimate, then drop the filter settling samples."""
    y = downconvert(x, cfg.pilot_freq)
    z = decimate(y, cfg.decimated_rate, cfg.lpf_cutoff)
    settle = cfg.settle_samples(x.sample_rate)
    return z.with_samples(z.samples[settle:]) if settle else z


def sense_spectrogram(x: IqBuffer, cfg: FrontendConfig) -> Spectrogram:
    """Front-end steps from a raw buffer to the partial spectrogram."""
    return spectrogram(condition(x, cfg), cfg)
