"""Small-radius behaviour: sup of the local time over shrinking windows and
the Chung-type lower bound on the oscillation.

Run: python3 demos/small_radius_laws.py
"""
from localtimes import ProcessSpec, RngStream
from localtimes.laws import chung_ratio_scan, limsup_ratio_scan

for H in (0.5, 0.3):
    spec = ProcessSpec("fbm", alpha=H)
    r = limsup_ratio_scan(spec, 0.5, range(2, 8), 40, RngStream(5, (0,)), n_steps=2**15)
    print(f"H={H}: sup L slope {r.fit.slope:.3f} (target {r.target:.2f}), trend p {r.trend_pvalue:.3f}")
    print("   normalized ratios by level:", [round(float(v), 3) for v in r.ratios])

for H in (0.3, 0.5, 0.7):
    r = chung_ratio_scan(ProcessSpec("fbm", alpha=H), [0.25, 0.5, 0.75], range(2, 9), 100, RngStream(6),
                         n_steps=2**14)
    print(f"H={H}: oscillation slope {r.fit.slope:.3f} (target {H}), smallest ratio {r.ratios.min():.3f}")
