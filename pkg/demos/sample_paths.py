"""Sample fBm, a quasi-helix and a Rosenblatt path, then check second moments.

Run: python3 demos/sample_paths.py
"""
import numpy as np

from localtimes import ProcessSpec, RngStream, make_grid, sample_paths
from localtimes.gaussian import CHOLESKY, CIRCULANT, factorize, fbm_spec

grid = make_grid(0.0, 1.0, 1024)
rng = RngStream(2024)

# both factorizations reproduce the covariance matrix exactly
for method in (CHOLESKY, CIRCULANT):
    f = factorize(fbm_spec(0.3), grid, method)
    err = np.abs(f.implied_covariance() - fbm_spec(0.3).matrix(grid.points)).max()
    print(f"{method:>10}: implied covariance error {err:.1e}")

for spec in (ProcessSpec("fbm", alpha=0.3),
             ProcessSpec("gaussian-quasi-helix", alpha=0.3, params={"H2": 0.6, "weight": 0.5}),
             ProcessSpec("rosenblatt", alpha=0.7, params={"rank": 256})):
    X = sample_paths(spec, grid, rng.child(len(spec.kind)), 2000)
    v = X[:, [256, 512, 1024], 0].var(axis=0)
    print(f"{spec.kind:>22}: Var X at t = 1/4, 1/2, 1 -> {np.round(v, 3)}")

# self-similarity: X_{ct} has the law of c^H X_t
X = sample_paths(ProcessSpec("fbm", alpha=0.7), make_grid(0.0, 4.0, 64), rng.child(99), 20000)
print("Var X_4 / 4^(2H) =", round(X[:, -1, 0].var() / 4**1.4, 3), "Var X_1 =", round(X[:, 16, 0].var(), 3))
