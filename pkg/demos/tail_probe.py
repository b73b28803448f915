"""Exponential tails of the local time at a fixed level.

Run: python3 demos/tail_probe.py
"""
import numpy as np

from localtimes import ProcessSpec, RngStream
from localtimes.laws import tail_probe

r = tail_probe(ProcessSpec("fbm", alpha=0.5), (0.0, 1.0), np.arange(0, 12.01, 1.0), 20000, RngStream(11),
               n_steps=2**11)
for u, p, used in zip(r.u_grid, r.probabilities, r.used):
    print(f"u={u:5.1f}  P={p:.2e}  {'fit' if used else ''}")
print("decay rate:", round(r.rate, 3), "95% CI:", (round(-r.fit.ci_high, 3), round(-r.fit.ci_low, 3)))
