#-------------------------------------------------------------------------
# iq_file_ingest.py
#-------------------------------------------------------------------------
# Write a synthetic capture as little-endian complex64 with a JSON
# sidecar, read it back, and run SCS on it - the same path a recorded
# capture would take.
#
#   python demos/iq_file_ingest.py [capture.cf32]

import sys
import tempfile
from pathlib import Path

import numpy as np

from specsense import (FrontendConfig, NoiseModel, SignalModel, generate_noise,
                       generate_primary, load_iq_file, mix, save_iq_file, scs_detect)

RATE = 2.152e6
model = SignalModel()
cfg = FrontendConfig(pilot_freq=0.0, dwell_time=1e-3, num_dwells=30)
n = cfg.input_length(RATE)

#-------------------------------------------------------------------------
# Make a capture
#-------------------------------------------------------------------------
# A view centred on the pilot, as a receiver tuned there would record.

if len(sys.argv) > 1:
    path = Path(sys.argv[1])
else:
    signal = generate_primary(model, n / RATE, RATE, seed=3, center_hz=model.pilot_freq)
    noise = generate_noise(NoiseModel(), n, RATE, seed=4, center_hz=model.pilot_freq)
    capture = mix(signal, noise, -18.0, bandwidth=model.signal_bandwidth)
    path = Path(tempfile.mkdtemp()) / "capture.cf32"
    save_iq_file(capture, path, description="ideal pilot + flat data at -18 dB")
    print(f"wrote {path} and {path}.json")

#-------------------------------------------------------------------------
# Read it back and detect
#-------------------------------------------------------------------------

x = load_iq_file(path)
print(f"{len(x)} samples at {x.sample_rate / 1e6:.3f} MHz, centre {x.center_hz / 1e6:+.3f} MHz")
v = scs_detect(x, cfg, threshold=10.3)  # calibrated for 1 ms x 30 dwells at P_FA 0.1
print(f"T = {v.statistic:.2f} against {v.threshold} -> {v.decision.value}")
if x.nominal_power is None:
    print(f"mean power {np.mean(np.abs(x.samples) ** 2):.3g} (files carry no noise reference)")
