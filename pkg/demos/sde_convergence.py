"""Pathwise solutions driven by fBm and their convergence under refinement.

Run: python3 demos/sde_convergence.py
"""
import numpy as np

from localtimes import RngStream
from localtimes.sde import convergence_study, linear_fields, trigonometric_fields

# dX = X dB has the closed form exp(B) in the Young regime
r = convergence_study(linear_fields(1), 1.0, 0.7, [64, 128, 256, 512], 50, RngStream(21),
                      exact=lambda b, t: np.exp(b))
print("geometric, H=0.7: rate", round(r.fit.slope, 3), "target", r.target)
print("  errors vs exp(B):", [f"{e:.2e}" for e in r.extra["errors_vs_exact"]])

# rough driver, level-2 scheme
r = convergence_study(trigonometric_fields(1), 0.0, 0.4, [64, 128, 256, 512], 50, RngStream(22))
print("trigonometric, H=0.4 (", r.extra["scheme"], "): rate", round(r.fit.slope, 3))
