"""Spectral covariance sensing of pilot-bearing TV signals.

Pipeline: :mod:`~specsense.signals` (synthetic signals, noise, recordings),
:mod:`~specsense.frontend` (downconversion, decimation, spectrogram),
:mod:`~specsense.detector` (covariance statistic and decision),
:mod:`~specsense.analytic` (closed-form threshold and detection model),
:mod:`~specsense.baselines` (energy, CAV, pilot detectors) and
:mod:`~specsense.bench` (Monte Carlo harness and CLI).
"""

from .detector import (CovarianceMatrix, Hypothesis, TestStatistic, Verdict, calibrate_threshold,
                       covariance, decide, scs_detect, scs_statistic, test_statistic)
from .frontend import (FrontendConfig, Spectrogram, decimate, downconvert, sense_spectrogram,
                       spectrogram)
from .signals import (H0_SNR, IqBuffer, NoiseModel, SignalModel, generate_noise,
                      generate_primary, load_iq_file, mix, save_iq_file)

__version__ = "0.1.0"

__all__ = [
    "CovarianceMatrix", "FrontendConfig", "H0_SNR", "Hypothesis", "IqBuffer", "NoiseModel",
    "SignalModel", "Spectrogram", "TestStatistic", "Verdict", "calibrate_threshold", "covariance",
    "decide", "decimate", "downconvert", "generate_noise", "generate_primary", "load_iq_file",
    "mix", "save_iq_file", "scs_detect", "scs_statistic", "sense_spectrogram", "spectrogram",
    "test_statistic",
]
