import math

import numpy as np
import pytest

from localtimes.core import ProcessSpec, RngStream, SamplePath, make_grid
from localtimes.gaussian import fbm_spec, sample_gaussian_path, sample_gaussian_paths
from localtimes.sde import (
    EULER_YOUNG,
    MILSTEIN2,
    BlowUp,
    VectorFieldSet,
    catalog_fields,
    check_ellipticity,
    convergence_study,
    identity_fields,
    linear_fields,
    solve_paths,
    solve_sde,
    trigonometric_fields,
    zero_fields,
)


def driver(H, n=256, d=1, seed=0):
    p = sample_gaussian_path(fbm_spec(H), d, make_grid(0, 1, n), RngStream(seed))
    return SamplePath(p.grid, p.values, spec=ProcessSpec("fbm", d=d, alpha=H))


def test_zero_fields_constant():
    sol = solve_sde(zero_fields(2), [1.0, -2.0], driver(0.7, d=2))
    assert np.all(sol.path.values == [1.0, -2.0])


@pytest.mark.parametrize("scheme, H", [(EULER_YOUNG, 0.7), (MILSTEIN2, 0.4)])
def test_additive_noise_exact(scheme, H):
    B = driver(H, d=2, seed=1)
    sol = solve_sde(identity_fields(2), [0.5, 0.5], B, scheme=scheme)
    assert np.abs(sol.path.values - (0.5 + B.values)).max() < 1e-12


def test_scheme_range_checks():
    with pytest.raises(ValueError, match="euler-young needs H > 1/2"):
        solve_sde(identity_fields(1), 0.0, driver(0.4))
    with pytest.raises(ValueError, match="outside the supported range"):
        solve_sde(identity_fields(1), 0.0, driver(0.3), scheme=MILSTEIN2)
    with pytest.raises(ValueError):
        catalog_fields("nope", 1)


def test_milstein_matches_geometric_closed_form():
    # linear fields: the exact solution is x0 exp(B_t) in the Young/rough sense
    H = 0.45
    B = sample_gaussian_paths(fbm_spec(H), 1, make_grid(0, 1, 2**12), RngStream(2), 20)
    X, _ = solve_paths(linear_fields(1), 1.0, B, 2.0**-12, MILSTEIN2)
    err = np.abs(X - np.exp(B)).max(axis=(1, 2))
    assert np.median(err) < 0.05


def test_blow_up_detected():
    fields = VectorFieldSet(lambda x: x**3, lambda x: np.zeros(x.shape + (1,)), 1)
    B = np.zeros((2, 101, 1))
    with pytest.raises(BlowUp):
        solve_paths(fields, 10.0, B, 0.1)
    X, blown = solve_paths(fields, np.array([[10.0], [0.0]]), B, 0.1, raise_on_blowup=False)
    assert blown.tolist() == [True, False] and np.all(X[1] == 0)


def test_ellipticity():
    def V(x):
        out = np.zeros(x.shape + (2,))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1 / (1 + x[..., 0] ** 2) + 1
        return out

    f = VectorFieldSet(lambda x: np.zeros_like(x), V, 2)
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(50, 2)) * 3
    dirs = rng.normal(size=(50, 2))
    lam = check_ellipticity(f, pts, dirs)
    assert 1 <= lam < 1.1
    assert check_ellipticity(trigonometric_fields(1), [[0.0]], [[1.0]]) == pytest.approx(4.0)


def test_convergence_additive_exact():
    r = convergence_study(identity_fields(1), 0.0, 0.7, [32, 64, 128], 8, RngStream(3))
    assert r.extra.get("exact") is True and np.all(r.stat < 1e-12)


def test_convergence_geometric_rate():
    r = convergence_study(linear_fields(1), 1.0, 0.7, [64, 128, 256, 512, 1024], 100, RngStream(4),
                          exact=lambda b, t: np.exp(b))
    assert abs(r.fit.slope - 0.4) < 0.15
    # each halving of the step shrinks the self-difference by at least 2^0.2 on average
    assert all(f >= 2**0.2 for f in r.extra["refinement_factors"])
    errs = r.extra["errors_vs_exact"]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_convergence_requires_dyadic_levels():
    with pytest.raises(ValueError):
        convergence_study(identity_fields(1), 0.0, 0.7, [32, 96], 2, RngStream(0))


def test_batched_fields_shapes():
    x = np.zeros((5, 3))
    f = catalog_fields("logistic", 3)
    assert f.drift(x).shape == (5, 3) and f.diffusion(x).shape == (5, 3, 3)
    assert math.isclose(f.diffusion(x)[0, 1, 1], 1.5)


def test_solution_starts_at_x0_on_driver_grid():
    B = driver(0.7, d=2, seed=9)
    sol = solve_sde(trigonometric_fields(2), [0.3, -0.1], B)
    assert sol.path.grid == B.grid and np.array_equal(sol.path.values[0], [0.3, -0.1])
    again = solve_sde(trigonometric_fields(2), [0.3, -0.1], B)
    assert np.array_equal(sol.path.values, again.path.values)
