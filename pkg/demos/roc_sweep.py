#-------------------------------------------------------------------------
# roc_sweep.py
#-------------------------------------------------------------------------
# Detection and miss probabilities against SNR for SCS, wideband CAV and
# CAV behind the SCS front end, all on a ~30 ms budget at P_FA = 0.1.
#
#   python demos/roc_sweep.py [out_dir]

import sys
from pathlib import Path

from specsense.bench.harness import run_roc
from specsense.bench.output import roc_rows, write_csv
from specsense.bench.scenario import load_config

out = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
base = load_config(Path(__file__).with_name("configs") / "detector_comparison.yaml")

#-------------------------------------------------------------------------
# Sweep each detector
#-------------------------------------------------------------------------
# Each detector is calibrated on its own noise pool first; the H1 and H0
# pools at every SNR are seeded from (detector, snr, pool, trial), so any
# point can be rerun on its own.

rows = []
for name in ("scs", "cav_step2", "cav"):
    cfg = base.with_(detector=name)
    points = run_roc(cfg)
    rows += roc_rows(points)
    print(f"\n{name}  (gamma = {points[0].gamma:.4g})")
    for p in points:
        print(f"  {p.snr_db:6.1f} dB   P_D {p.pd:.3f}  P_MD {p.pmd:.3f}  P_FA {p.pfa:.3f}")

print(f"\nwrote {write_csv(out / 'detector_comparison.csv', rows)}")

# Expect SCS and CAV+step 2 to cross P_MD = 0.1 near -21 dB and the plain
# CAV several dB later: the front end throws away most of the channel's
# noise before the correlation is measured.
