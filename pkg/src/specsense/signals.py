"""Synthetic primary signals, receiver noise and IQ recordings.

All generators take ``seed`` as anything :func:`numpy.random.default_rng`
accepts (an int, a ``SeedSequence`` or a ``Generator``), so the bench can
hand out per-trial child seeds.

Signal content is described in an absolute baseband where the channel
occupies ``[pilot_offset_hz, pilot_offset_hz + signal_bandwidth)`` with
the pilot at its lower edge. A buffer may be a *view* of that baseband:
``center_hz`` is the absolute frequency that the buffer's DC represents.
Narrow views are how the bench avoids synthesising the full channel when
only the part around the pilot survives the front-end filter.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import fft

from .errors import IqFileError

H0_SNR = -math.inf  # mix() sentinel: noise only


@dataclass(frozen=True)
class SignalModel:
    """Pilot tone plus flat data spectrum (an ATSC-like idealisation)."""

    total_power: float = 1.0
    pilot_fraction: float = 0.05
    pilot_offset_hz: float = -3.0e6
    signal_bandwidth: float = 6.0e6
    carrier_freq: float | None = None
    # impairments, off by default
    cfo_hz: float = 0.0
    echo_delay_s: float = 0.0
    echo_gain: complex = 0.0

    def __post_init__(self):
        if not 0.0 < self.pilot_fraction < 1.0:
            raise ValueError("pilot_fraction must lie strictly between 0 and 1")
        if self.total_power <= 0:
            raise ValueError("total_power must be positive")
        if self.signal_bandwidth <= 0:
            raise ValueError("signal_bandwidth must be positive")
        if self.echo_delay_s < 0:
            raise ValueError("echo_delay_s must be non-negative")

    @property
    def pilot_freq(self) -> float:
        """Frequency the front end should translate to DC."""
        return self.pilot_offset_hz if self.carrier_freq is None else self.carrier_freq

    @property
    def pilot_power(self) -> float:
        return self.pilot_fraction * self.total_power

    @property
    def data_power(self) -> float:
        return (1.0 - self.pilot_fraction) * self.total_power

    @property
    def data_psd(self) -> float:
        return self.data_power / self.signal_bandwidth


@dataclass(frozen=True)
class NoiseModel:
    """White receiver noise whose true level is only known to within rho dB.

    ``nominal_power`` is the noise power over ``bandwidth`` (defaults to the
    generated sample rate), so the nominal PSD is ``nominal_power/bandwidth``.
    """

    nominal_power: float = 1.0
    rho_db: float = 0.0
    bandwidth: float | None = 6.0e6

    def __post_init__(self):
        if self.nominal_power <= 0:
            raise ValueError("nominal_power must be positive")
        if self.rho_db < 0:
            raise ValueError("rho_db must be non-negative")
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")

    def nominal_psd(self, rate: float) -> float:
        return self.nominal_power / (self.bandwidth or rate)


@dataclass(frozen=True, eq=False)
class IqBuffer:
    """Complex baseband samples with the metadata needed downstream."""

    samples: np.ndarray
    sample_rate: float
    origin: str = "synthetic"
    center_hz: float = 0.0
    nominal_psd: float | None = None
    realized_psd: float | None = None
    nominal_power: float | None = None
    reference_power: float | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("an IqBuffer needs a non-empty 1-D sample array")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if self.origin not in ("synthetic", "file"):
            raise ValueError(f"unknown origin {self.origin!r}")
        if not np.iscomplexobj(samples):
            samples = samples.astype(complex)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def power(self) -> float:
        """Mean squared magnitude."""
        return float(np.mean(self.samples.real ** 2 + self.samples.imag ** 2))

    def with_samples(self, samples: np.ndarray, **changes) -> "IqBuffer":
        return replace(self, samples=samples, **changes)


def _sample_count(duration: float, rate: float) -> int:
    if not duration > 0:
        raise ValueError("duration must be positive")
    if not rate > 0:
        raise ValueError("rate must be positive")
    n = int(round(duration * rate))
    if n < 1:
        raise ValueError("duration*rate must be at least one sample")
    return n


def generate_primary(model: SignalModel, duration: float, rate: float, seed,
                     center_hz: float | None = None) -> IqBuffer:
    """Synthesise pilot + flat data, optionally restricted to a narrow view.

    Without ``center_hz`` the whole channel must fit in the sampled band,
    so ``rate >= signal_bandwidth``. With ``center_hz`` only the spectrum
    inside ``center_hz +- rate/2`` is produced, at the same PSD it has in
    the full channel; ``reference_power`` still reports ``total_power`` so
    SNR stays defined against the whole channel.
    """
    n = _sample_count(duration, rate)
    band_lo = model.pilot_offset_hz + model.cfo_hz
    band_hi = band_lo + model.signal_bandwidth
    if center_hz is None:
        if rate < model.signal_bandwidth:
            raise ValueError(
                f"rate {rate:g} Hz cannot represent a {model.signal_bandwidth:g} Hz channel")
        center = 0.0
        if band_lo < -rate / 2 or band_hi > rate / 2 + 1e-9 * rate:
            raise ValueError("channel does not fit inside the sampled band; set center_hz")
    else:
        center = float(center_hz)

    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * np.pi)

    freqs = fft.fftfreq(n, d=1.0 / rate) + center
    in_band = (freqs >= band_lo) & (freqs < band_hi)
    count = int(np.count_nonzero(in_band))
    spectrum = np.zeros(n, dtype=complex)
    if count:
        # per-bin variance psd*rate gives time-domain power psd*(count*rate/n)
        scale = math.sqrt(model.data_psd * rate / 2.0)
        spectrum[in_band] = scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    data = fft.ifft(spectrum) * math.sqrt(n)

    t = np.arange(n) / rate
    pilot_hz = band_lo - center
    if -rate / 2 <= pilot_hz < rate / 2:
        pilot = math.sqrt(model.pilot_power) * np.exp(1j * (2.0 * np.pi * pilot_hz * t + phase))
        samples = data + pilot
    else:
        samples = data

    if model.echo_gain != 0 and model.echo_delay_s > 0:
        delay = int(round(model.echo_delay_s * rate))
        echo = np.zeros_like(samples)
        if delay < n:
            echo[delay:] = samples[: n - delay]
        samples = samples + model.echo_gain * echo

    return IqBuffer(samples, rate, center_hz=center, reference_power=model.total_power)


def draw_noise_power(model: NoiseModel, rng: np.random.Generator) -> float:
    """Realised noise power for one trial, uniform in dB around nominal."""
    offset_db = model.rho_db * rng.uniform(-1.0, 1.0)
    return model.nominal_power * 10.0 ** (offset_db / 10.0)


def generate_noise(model: NoiseModel, n: int, rate: float, seed,
                   center_hz: float = 0.0) -> IqBuffer:
    """Circular complex white Gaussian noise at this call's realised level.

    The level offset is drawn before the samples even when ``rho_db`` is 0,
    so buffers for different rho values share sample streams for one seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not rate > 0:
        raise ValueError("rate must be positive")
    rng = np.random.default_rng(seed)
    realized_power = draw_noise_power(model, rng)
    nominal_psd = model.nominal_psd(rate)
    realized_psd = nominal_psd * realized_power / model.nominal_power
    sigma = math.sqrt(realized_psd * rate / 2.0)
    samples = sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return IqBuffer(samples, rate, center_hz=center_hz, nominal_psd=nominal_psd,
                    realized_psd=realized_psd, nominal_power=model.nominal_power)


def mix(signal: IqBuffer, noise: IqBuffer, snr_db: float,
        bandwidth: float | None = None) -> IqBuffer:
    """Add ``signal`` to ``noise`` at ``snr_db`` against the nominal noise power.

    The noise reference is the buffer's ``nominal_power`` (the noise model's
    power over its reference bandwidth), or the nominal PSD times
    ``bandwidth`` when that is given. Buffers without nominal metadata fall
    back to measured power, and likewise for the signal's reference power.
    """
    if len(signal) != len(noise):
        raise ValueError(f"length mismatch: {len(signal)} vs {len(noise)}")
    if signal.sample_rate != noise.sample_rate:
        raise ValueError("sample rate mismatch")
    if snr_db == H0_SNR:
        return noise
    if bandwidth is not None and noise.nominal_psd is not None:
        noise_ref = noise.nominal_psd * bandwidth
    elif noise.nominal_power is not None:
        noise_ref = noise.nominal_power
    else:
        noise_ref = noise.power()
    signal_ref = signal.reference_power if signal.reference_power is not None else signal.power()
    gain = math.sqrt(10.0 ** (snr_db / 10.0) * noise_ref / signal_ref)
    return noise.with_samples(gain * signal.samples + noise.samples,
                              reference_power=gain ** 2 * signal_ref)


# --- recordings ---------------------------------------------------------

HEADER_SUFFIX = ".json"


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + HEADER_SUFFIX)


def read_header(path: str | os.PathLike) -> dict:
    """Read the JSON sidecar of a recording."""
    side = _sidecar(Path(path))
    try:
        header = json.loads(side.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IqFileError(f"cannot read header {side}: {exc}") from exc
    if not isinstance(header, dict):
        raise IqFileError(f"header {side} is not a key-value object")
    return header


def load_iq_file(path: str | os.PathLike, header: dict | None = None) -> IqBuffer:
    """Load interleaved little-endian float32 I/Q pairs.

    ``header`` defaults to the ``<path>.json`` sidecar and must carry
    ``sample_rate_hz``; ``center_freq_hz`` and ``description`` are optional.
    """
    path = Path(path)
    if header is None:
        header = read_header(path)
    try:
        rate = float(header["sample_rate_hz"])
        center = float(header.get("center_freq_hz", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise IqFileError(f"header lacks a usable sample_rate_hz: {exc}") from exc
    encoding = header.get("encoding", "cf32_le")
    if encoding != "cf32_le":
        raise IqFileError(f"unsupported sample encoding {encoding!r}")
    if not rate > 0:
        raise IqFileError("sample_rate_hz must be positive")

    raw = path.read_bytes()
    if len(raw) == 0:
        raise IqFileError(f"{path} is empty")
    if len(raw) % 8:
        raise IqFileError(f"{path}: {len(raw)} bytes is not a whole number of I/Q pairs")
    floats = np.frombuffer(raw, dtype="<f4")
    samples = floats[0::2].astype(np.float64) + 1j * floats[1::2].astype(np.float64)
    return IqBuffer(samples, rate, origin="file", center_hz=center)


def save_iq_file(buffer: IqBuffer, path: str | os.PathLike, description: str = "") -> None:
    """Write ``buffer`` as cf32_le plus a JSON sidecar header."""
    path = Path(path)
    inter = np.empty(2 * len(buffer), dtype="<f4")
    inter[0::2] = buffer.samples.real
    inter[1::2] = buffer.samples.imag
    path.write_bytes(inter.tobytes())
    header = {
        "sample_rate_hz": buffer.sample_rate,
        "center_freq_hz": buffer.center_hz,
        "encoding": "cf32_le",
        "description": description,
    }
    _sidecar(path).write_text(json.dumps(header, indent=2) + "\n")
