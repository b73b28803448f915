"""The Rosenblatt process as a Gaussian quadratic form.

Monte Carlo |E exp(i xi Z_1)| is compared with the eigenvalue product of the
kernel matrix; the covariance is compared with that of fBm.

Run: python3 demos/rosenblatt_chaos.py
"""
import numpy as np

from localtimes import RngStream, make_grid
from localtimes.rosenblatt import build_kernel, eigenvalue_decay, rosenblatt_charfn_bound, sample_rosenblatt_marginal

H = 0.7
kernel = build_kernel(H, make_grid(0.0, 1.0, 8), rank=512)
Z = sample_rosenblatt_marginal(kernel, 8, RngStream(17), 2**17)
print("Var Z_1:", round(Z.var(), 4), " skewness:", round(np.mean(Z**3) / Z.std()**3, 3))

for xi in (0.5, 1.0, 2.0, 4.0):
    mc = abs(np.mean(np.exp(1j * xi * Z)))
    print(f"xi={xi}: monte carlo {mc:.4f}  eigen product {rosenblatt_charfn_bound(kernel, [0, 1], [xi]).value:.4f}")

t = kernel.grid.points
print("Cov(Z_1/2, Z_1):", round(kernel.covariance(4, 8), 4), "fBm:", round(0.5 * (t[4]**1.4 + 1 - t[4]**1.4), 4))
fit, lam = eigenvalue_decay(kernel)
print("eigenvalue decay slope:", round(fit.slope, 3))
