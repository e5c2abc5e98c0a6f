"""Scenario configuration and the per-detector acquisition/statistic adapters."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from ..analytic import SpectralParams
from ..baselines import (PilotDetectConfig, cav_statistic, energy_statistic,
                         energy_threshold, pilot_energy_threshold, pilot_statistic)
from ..detector import scs_statistic
from ..errors import ConfigError
from ..frontend import FrontendConfig, Spectrogram, condition, fft_size_for, sense_spectrogram
from ..signals import IqBuffer, NoiseModel, SignalModel

DECIMATED_RATE = 2.152e6
WIDEBAND_RATE = 21.52e6
LPF_CUTOFF = 20e3
CAV_SAMPLES = 500_000
CAV_SMOOTHING = 14

DETECTORS = ("scs", "energy", "cav", "cav_step2", "pilot_location", "pilot_energy")


@dataclass(frozen=True)
class ScenarioConfig:
    detector: str = "scs"
    detector_params: dict = field(default_factory=dict)
    signal: SignalModel = field(default_factory=SignalModel)
    noise: NoiseModel = field(default_factory=NoiseModel)
    snr_grid: tuple = (-21.0,)
    dwell_time: float = 1e-3
    num_dwells: int = 30
    trials: int = 500
    calibration_trials: int = 2000
    seed: int = 1
    target_pfa: float = 0.1
    pd_target: float = 0.9
    sensitivity_range: tuple = (-30.0, -12.0)
    sensitivity_step: float = 0.25
    rho_grid: tuple = (0.0, 2.0)
    table_dwells: tuple = (6, 12, 30)
    table_dwell_times: tuple = (1e-4, 5e-4, 1e-3, 2e-3)
    threshold: float | None = None

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ConfigError(f"unknown detector {self.detector!r}; choose from {DETECTORS}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.calibration_trials < 100:
            raise ConfigError("calibration_trials must be at least 100")
        if not self.snr_grid:
            raise ConfigError("snr_grid must not be empty")
        if not 0 < self.target_pfa < 1 or not 0 < self.pd_target < 1:
            raise ConfigError("target_pfa and pd_target must lie in (0, 1)")
        if self.num_dwells < 1 or self.dwell_time <= 0:
            raise ConfigError("num_dwells and dwell_time must be positive")
        lo, hi = self.sensitivity_range
        if not lo < hi or self.sensitivity_step <= 0:
            raise ConfigError("sensitivity_range must be increasing with a positive step")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if any(r < 0 for r in self.rho_grid):
            raise ConfigError("rho values must be non-negative")
        # normalise sequences so configs compare and hash predictably
        for name in ("snr_grid", "sensitivity_range", "rho_grid", "table_dwell_times"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "table_dwells", tuple(int(v) for v in self.table_dwells))
        build_detector(self)  # validates detector_params

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


_NESTED = {"signal": SignalModel, "noise": NoiseModel}


def config_from_dict(data: dict[str, Any]) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a key-value mapping")
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(data)
    try:
        for key, cls in _NESTED.items():
            if key in kwargs:
                section = kwargs[key] or {}
                if not isinstance(section, dict):
                    raise ConfigError(f"{key} must be a mapping")
                kwargs[key] = cls(**section)
        return ScenarioConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a YAML scenario file whose keys are ScenarioConfig field names."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data or {})


def config_to_dict(cfg: ScenarioConfig) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if dataclasses.is_dataclass(value):
            value = dataclasses.asdict(value)
        elif isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


# --- adapters -------------------------------------------------------------
#
# Each adapter says what to acquire (rate, sample count, view centre) and how
# to turn the buffer into a scalar statistic. Views centred on the pilot let
# the narrowband detectors run at the decimated rate without synthesising the
# whole channel; the front-end filter still runs, with a decimation factor
# of one.


def _params(cfg: ScenarioConfig, allowed: dict) -> dict:
    unknown = set(cfg.detector_params) - set(allowed)
    if unknown:
        raise ConfigError(f"{cfg.detector} does not take parameters {sorted(unknown)}")
    merged = dict(allowed)
    merged.update(cfg.detector_params)
    return merged


@dataclass(frozen=True)
class ScsAdapter:
    name: str
    frontend: FrontendConfig
    input_rate: float
    full_band: bool
    threshold_rule: str = "empirical"

    @property
    def input_samples(self) -> int:
        return self.frontend.input_length(self.input_rate)

    @property
    def ts_ms(self) -> float:
        return self.frontend.dwell_time * 1e3

    @property
    def nd(self) -> int:
        return self.frontend.num_dwells

    def view_center(self, model: SignalModel) -> float | None:
        return None if self.full_band else model.pilot_freq

    def spectrogram(self, x: IqBuffer, model: SignalModel) -> Spectrogram:
        fe = replace(self.frontend, pilot_freq=model.pilot_freq - x.center_hz)
        return sense_spectrogram(x, fe)

    def statistic(self, x: IqBuffer, model: SignalModel) -> float:
        return scs_statistic(self.spectrogram(x, model)).T

    def spectral_params(self, model: SignalModel, noise: NoiseModel, snr_db: float) -> SpectralParams:
        """Nominal closed-form parameters, in periodogram units (PSD times F_s)."""
        fe = self.frontend
        noise_psd = noise.nominal_psd(self.input_rate)
        scale = noise.nominal_power * 10 ** (snr_db / 10) / model.total_power
        signal = SpectralParams.from_signal(
            total_power=model.total_power * scale, pilot_fraction=model.pilot_fraction,
            bandwidth=model.signal_bandwidth, noise_psd=noise_psd, fft_size=fe.fft_size,
            rate=fe.decimated_rate, half_rows=fe.half_rows, num_dwells=fe.num_dwells)
        rate = fe.decimated_rate
        return SpectralParams(signal.noise_psd * rate, signal.signal_psd * rate,
                              signal.pilot_psd * rate, signal.half_rows, signal.num_dwells)


@dataclass(frozen=True)
class EnergyAdapter:
    name: str
    rate: float
    duration: float
    threshold_rule: str = "assumed"
    nd: int = 1

    @property
    def input_rate(self) -> float:
        return self.rate

    @property
    def input_samples(self) -> int:
        return int(round(self.duration * self.rate))

    @property
    def ts_ms(self) -> float:
        return self.duration * 1e3

    def view_center(self, model: SignalModel) -> float | None:
        return model.pilot_freq

    def statistic(self, x: IqBuffer, model: SignalModel) -> float:
        return energy_statistic(x)

    def assumed_threshold(self, noise: NoiseModel, pfa: float) -> float:
        return energy_threshold(noise.nominal_psd(self.rate) * self.rate, self.input_samples, pfa)


@dataclass(frozen=True)
class CavAdapter:
    name: str
    rate: float
    num_samples: int
    smoothing_factor: int
    frontend: FrontendConfig | None = None
    threshold_rule: str = "empirical"
    nd: int = 1

    @property
    def input_rate(self) -> float:
        return self.rate

    @property
    def input_samples(self) -> int:
        if self.frontend is None:
            return self.num_samples
        return self.num_samples + 2 * self.frontend.settle_samples(self.rate) \
            * self.frontend.decimation_factor(self.rate)

    @property
    def ts_ms(self) -> float:
        return self.num_samples / self.rate * 1e3

    def view_center(self, model: SignalModel) -> float | None:
        return None if self.frontend is None else model.pilot_freq

    def statistic(self, x: IqBuffer, model: SignalModel) -> float:
        if self.frontend is None:
            return cav_statistic(x, self.num_samples, self.smoothing_factor)
        fe = replace(self.frontend, pilot_freq=model.pilot_freq - x.center_hz)
        y = condition(x, fe)
        return cav_statistic(y, self.num_samples // fe.decimation_factor(self.rate),
                             self.smoothing_factor)


@dataclass(frozen=True)
class PilotAdapter:
    name: str
    rate: float
    config: PilotDetectConfig
    num_dwells: int
    threshold_rule: str = "empirical"

    @property
    def input_rate(self) -> float:
        return self.rate

    @property
    def input_samples(self) -> int:
        return self.config.fft_size * self.num_dwells

    @property
    def ts_ms(self) -> float:
        return self.config.fft_size / self.rate * 1e3

    @property
    def nd(self) -> int:
        return self.num_dwells

    def view_center(self, model: SignalModel) -> float | None:
        return model.pilot_freq

    def statistic(self, x: IqBuffer, model: SignalModel) -> float:
        return pilot_statistic(x, self.config)

    def assumed_threshold(self, noise: NoiseModel, pfa: float) -> float:
        return pilot_energy_threshold(noise.nominal_psd(self.rate) * self.rate, self.num_dwells, pfa)


def build_detector(cfg: ScenarioConfig):
    name = cfg.detector
    if name == "scs":
        p = _params(cfg, {"input_rate": DECIMATED_RATE, "decimated_rate": DECIMATED_RATE,
                          "lpf_cutoff": LPF_CUTOFF, "full_band": False})
        fe = FrontendConfig(0.0, float(p["decimated_rate"]), float(p["lpf_cutoff"]),
                            cfg.dwell_time, cfg.num_dwells)
        if fe.num_dwells < 2:
            raise ConfigError("SCS needs at least two dwells")
        fe.decimation_factor(float(p["input_rate"]))
        if not p["full_band"] and p["input_rate"] != p["decimated_rate"]:
            raise ConfigError("pilot-centred views run at the decimated rate; set full_band")
        return ScsAdapter(name, fe, float(p["input_rate"]), bool(p["full_band"]))
    if name == "energy":
        p = _params(cfg, {"rate": DECIMATED_RATE, "duration": None})
        duration = p["duration"] or cfg.dwell_time * cfg.num_dwells
        return EnergyAdapter(name, float(p["rate"]), float(duration))
    if name in ("cav", "cav_step2"):
        if name == "cav":
            p = _params(cfg, {"rate": WIDEBAND_RATE, "num_samples": CAV_SAMPLES,
                              "smoothing_factor": CAV_SMOOTHING})
            return CavAdapter(name, float(p["rate"]), int(p["num_samples"]),
                              int(p["smoothing_factor"]))
        # same time budget as the wideband CAV, taken at the decimated rate
        p = _params(cfg, {"rate": DECIMATED_RATE, "duration": CAV_SAMPLES / WIDEBAND_RATE,
                          "smoothing_factor": CAV_SMOOTHING, "lpf_cutoff": LPF_CUTOFF})
        rate = float(p["rate"])
        fe = FrontendConfig(0.0, rate, float(p["lpf_cutoff"]), cfg.dwell_time, 1)
        return CavAdapter(name, rate, int(round(float(p["duration"]) * rate)),
                          int(p["smoothing_factor"]), fe)
    # pilot detectors
    p = _params(cfg, {"rate": DECIMATED_RATE, "search_window": 1, "search_band": 64})
    rate = float(p["rate"])
    mode = "location" if name == "pilot_location" else "energy"
    pd_cfg = PilotDetectConfig(fft_size_for(rate, cfg.dwell_time), 0, int(p["search_window"]),
                               mode, p["search_band"])
    return PilotAdapter(name, rate, pd_cfg, cfg.num_dwells,
                        "empirical" if mode == "location" else "assumed")


def snr_code(snr_db: float) -> int:
    """Non-negative integer key for an SNR value (the H0 sentinel maps to 0)."""
    if math.isinf(snr_db):
        return 0
    return int(round((snr_db + 1000.0) * 1000.0))
