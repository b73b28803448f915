"""Moments of L(0, [0, t]) scale like t^((1 - H) n).

Run: python3 demos/moment_scaling.py
"""
import numpy as np

from localtimes import ProcessSpec, RngStream
from localtimes.laws import moment_scan

lags = 2.0 ** -np.arange(5, -1, -1)
for H in (0.3, 0.5, 0.7):
    r = moment_scan(ProcessSpec("fbm", alpha=H), 0.0, [1, 2], lags, 500, RngStream(3, (int(10 * H),)),
                    n_steps=2**12)
    fits = ", ".join(f"n={n}: {f.slope:.3f} (target {t:.2f})"
                     for n, f, t in zip(r.n_list, r.fitted_slopes, r.target_slopes))
    print(f"H={H}: {fits}")
    if H == 0.5:
        print("  E L(0,[0,1]) =", round(r.estimates[0, -1], 4), "vs sqrt(2/pi) =", round(np.sqrt(2 / np.pi), 4))
