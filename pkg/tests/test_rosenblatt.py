import numpy as np
import pytest

from localtimes.core import RngStream, make_grid
from localtimes.rosenblatt import (
    build_kernel,
    eigenvalue_decay,
    increment_charfn,
    rosenblatt_charfn_bound,
    sample_rosenblatt,
    sample_rosenblatt_marginal,
    sample_rosenblatt_paths,
)


@pytest.fixture(scope="module")
def kernel():
    return build_kernel(0.7, make_grid(0, 1, 8), rank=256)


def test_rejects_h_outside_range():
    with pytest.raises(ValueError):
        build_kernel(0.5, make_grid(0, 1, 8))


def test_unit_variance_and_symmetric_psd(kernel):
    assert kernel.variance(8) == pytest.approx(1.0, abs=1e-12)
    A = kernel.matrix(4)
    assert np.allclose(A, A.T)
    assert np.linalg.eigvalsh(A).min() > -1e-12


def test_covariance_close_to_fbm(kernel):
    H = 0.7
    t = kernel.grid.points
    err = 0.0
    for i in range(1, 9):
        for j in range(1, 9):
            target = 0.5 * (t[i] ** (2 * H) + t[j] ** (2 * H) - abs(t[i] - t[j]) ** (2 * H))
            err = max(err, abs(kernel.covariance(i, j) - target))
    assert err < 0.03


def test_paths_mean_zero_and_reproducible(kernel):
    z = sample_rosenblatt_paths(kernel, RngStream(1), 4000)
    assert z.shape == (4000, 9, 1) and np.all(z[:, 0] == 0)
    assert abs(z[:, -1, 0].mean()) < 4 * z[:, -1, 0].std() / np.sqrt(4000)
    again = sample_rosenblatt_paths(kernel, RngStream(1), 2, start=10)
    assert np.allclose(z[10:12], again)
    p = sample_rosenblatt(kernel, RngStream(2))
    assert p.values.shape == (9, 1)


def test_marginal_matches_path_terminal(kernel):
    m = sample_rosenblatt_marginal(kernel, 8, RngStream(3), 20000)
    assert abs(m.var() - 1) < 0.1
    # skewed to the right, unlike a Gaussian
    assert np.mean(m**3) > 0.3


def test_eigen_product_bounds_and_mc(kernel):
    ep = rosenblatt_charfn_bound(kernel, [0, 1], [1.0])
    assert 0 < ep.value <= 1
    m = sample_rosenblatt_marginal(kernel, 8, RngStream(4), 50000)
    mc = abs(np.mean(np.exp(1j * m)))
    assert abs(mc - ep.value) < 0.02
    assert rosenblatt_charfn_bound(kernel, [0, 1], [0.0]).value == 1.0
    with pytest.raises(ValueError):
        rosenblatt_charfn_bound(kernel, [0, 0.5, 0.25], [1.0, 1.0])


def test_eigenvalue_decay_slope(kernel):
    fit, lam = eigenvalue_decay(kernel)
    assert abs(fit.slope + 0.7) < 0.15
    assert lam[0] >= lam[-1]


def test_increment_charfn_self_similar(kernel):
    phi = increment_charfn(kernel)
    a = phi(np.array([[2.0]]), 0.25)
    b = phi(np.array([[2.0 * 0.25**0.7]]), 1.0)
    assert a == pytest.approx(b)


@pytest.mark.parametrize("k", [0, 4])
def test_single_increment_decay_surrogate(kernel, k):
    # the product over eigenvalues decays at least like |xi|^-k lag^-Hk;
    # its normalized value stays bounded as the frequency grows
    H = kernel.H
    worst = []
    for xi in np.geomspace(1, 1e3, 7):
        vals = []
        for lag in (0.125, 0.25, 0.5, 1.0):
            v = rosenblatt_charfn_bound(kernel, [0, lag], [xi]).value
            vals.append(v * (xi * lag**H) ** k)
        worst.append(max(vals))
    assert worst[-1] <= max(worst[:3])
