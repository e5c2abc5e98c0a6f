"""Experiment orchestration: scenarios, Monte Carlo runs and CSV output."""

from .harness import (Calibration, RocPoint, Sensitivity, ThresholdCell, TrialRecord,
                      UncertaintyRow, calibrate, calibrate_cell, find_sensitivity, run_calibration,
                      run_roc, run_uncertainty_sweep, simulate_statistics, trial_seed)
from .scenario import ScenarioConfig, build_detector, config_from_dict, load_config

__all__ = [
    "Calibration", "RocPoint", "ScenarioConfig", "Sensitivity", "ThresholdCell", "TrialRecord",
    "UncertaintyRow", "build_detector", "calibrate", "calibrate_cell", "config_from_dict",
    "find_sensitivity", "load_config", "run_calibration", "run_roc", "run_uncertainty_sweep",
    "simulate_statistics", "trial_seed",
]
