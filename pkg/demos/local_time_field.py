"""Estimate the local time of one path two ways and check the occupation identity.

Run: python3 demos/local_time_field.py
"""
import numpy as np

from localtimes import ProcessSpec, RngStream, make_grid
from localtimes.localtime import (
    fourier_histogram_agreement,
    modulus_of_continuity,
    occupation_histogram,
    occupation_identity_check,
)
from localtimes.processes import PathSampler

spec = ProcessSpec("fbm", alpha=0.5)
path = PathSampler(spec, make_grid(0.0, 1.0, 2**14)).path(RngStream(7))

field = occupation_histogram(path, (0.0, 1.0), bin_c=8)
print("bins:", field.box.bins[0], "width:", round(field.box.widths[0], 4))
print("total mass:", field.total_mass, "sup L:", round(field.sup(), 3))

err = occupation_identity_check(path, field, lambda x: np.exp(-x**2))
print("occupation identity relative error:", f"{err:.2e}")

agree = fourier_histogram_agreement(path, field)
for row in agree["cells"][:4]:
    print(f"cell {row['cell']}: histogram {row['histogram']:.4f}  fourier {row['fourier']:.4f}")
print("max relative gap:", round(agree["max_rel_diff"], 4))

# the sample path modulus: slope ~ 1/2 once the log factor is removed
rep = modulus_of_continuity(path, 2.0 ** -np.arange(3, 11))
print("raw modulus slope:", round(rep.fit.slope, 3), "corrected:", round(rep.extra["corrected_fit"]["slope"], 3))
print(field.to_csv().splitlines()[0], "...", len(field.to_csv().splitlines()) - 1, "rows")
