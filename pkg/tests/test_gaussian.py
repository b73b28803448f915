import math

import numpy as np
import pytest
from scipy import stats

from localtimes.core import RngStream, make_grid
from localtimes.gaussian import (
    CHOLESKY,
    CIRCULANT,
    FallbackNeeded,
    NotPSDError,
    CovarianceSpec,
    a1_constant,
    check_lnd,
    check_sandwich,
    factorize,
    fbm_covariance,
    fbm_mixture_spec,
    fbm_spec,
    gaussian_charfn,
    sample_gaussian_path,
    sample_gaussian_paths,
)


@pytest.mark.parametrize("H", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_covariance_values(H):
    assert fbm_covariance(1, 1, H) == 1.0
    assert fbm_covariance(0.3, 0.3, H) == pytest.approx(0.3 ** (2 * H))
    assert fbm_covariance(0.2, 0.7, H) == fbm_covariance(0.7, 0.2, H)


def test_covariance_brownian_and_errors():
    assert fbm_covariance(1, 2, 0.5) == 1.0
    with pytest.raises(ValueError):
        fbm_covariance(1, 1, 1.0)
    with pytest.raises(ValueError):
        fbm_covariance(-1, 1, 0.5)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("method", [CHOLESKY, CIRCULANT])
@pytest.mark.parametrize("n", [8, 255])
def test_factorization_exact(H, method, n):
    grid = make_grid(0, 1, n)
    cov = fbm_spec(H)
    f = factorize(cov, grid, method)
    assert np.abs(f.implied_covariance() - cov.matrix(grid.points)).max() < 1e-8


def test_circulant_needs_zero_start():
    with pytest.raises(FallbackNeeded):
        factorize(fbm_spec(0.5), make_grid(0.5, 1, 8), CIRCULANT)


def test_cholesky_not_psd():
    bad = CovarianceSpec("custom", 0.5, lambda s, t: -np.ones(np.broadcast(s, t).shape), 1.0, 1.0)
    with pytest.raises(NotPSDError):
        factorize(bad, make_grid(0, 1, 4), CHOLESKY)


def test_single_point_grid_path_is_zero():
    x = sample_gaussian_paths(fbm_spec(0.3), 2, make_grid(0, 1, 1), 1, 3)
    assert np.all(x[:, 0] == 0)


def test_path_starts_at_zero_and_shape():
    p = sample_gaussian_path(fbm_spec(0.7), 3, make_grid(0, 1, 600), RngStream(5))
    assert p.values.shape == (601, 3) and np.all(p.values[0] == 0)


def test_replica_reproducible_from_its_own_stream():
    grid = make_grid(0, 1, 64)
    batch = sample_gaussian_paths(fbm_spec(0.4), 1, grid, RngStream(9), 5)
    again = sample_gaussian_paths(fbm_spec(0.4), 1, grid, RngStream(9), 2, start=3)
    assert np.array_equal(batch[3:], again)
    threaded = sample_gaussian_paths(fbm_spec(0.4), 1, grid, RngStream(9), 5, threads=3)
    assert np.array_equal(batch, threaded)


def test_brownian_terminal_variance():
    x = sample_gaussian_paths(fbm_spec(0.5), 1, make_grid(0, 1, 16), RngStream(1), 10**5)[:, -1, 0]
    se = math.sqrt(2 / x.size)
    assert abs(x.var() - 1) < 3 * se


def test_methods_agree_in_law():
    grid = make_grid(0, 1, 1024)
    a = sample_gaussian_paths(fbm_spec(0.3), 1, grid, RngStream(2), 4000, method=CHOLESKY)[:, -1, 0]
    b = sample_gaussian_paths(fbm_spec(0.3), 1, grid, RngStream(3), 4000, method=CIRCULANT)[:, -1, 0]
    assert stats.ks_2samp(a, b).pvalue > 1e-3


def test_self_similarity_ks():
    H, c = 0.7, 4
    grid = make_grid(0, 4, 64)
    x = sample_gaussian_paths(fbm_spec(H), 1, grid, RngStream(4), 20000)
    big = x[:, -1, 0]
    small = x[:, 16, 0] * c**H
    assert stats.ks_2samp(big, small[::-1]).pvalue > 1e-3


def test_sandwich_mixture():
    cov = fbm_mixture_spec(0.3, 0.6, 0.5, 2.0)
    assert check_sandwich(cov, np.linspace(0, 2, 30))
    assert cov.C_plus == pytest.approx(1 + 0.5 * 2 ** 0.6)
    assert check_sandwich(fbm_spec(0.4), np.linspace(0, 1, 20))


def test_charfn_examples():
    bm = fbm_spec(0.5)
    assert gaussian_charfn(bm, 1, [0, 1], [0.0]) == 1.0
    assert gaussian_charfn(bm, 1, [0, 1], [1.0]) == pytest.approx(math.exp(-0.5))
    with pytest.raises(ValueError):
        gaussian_charfn(bm, 1, [0, 1, 0.5], [1.0, 1.0])


def test_charfn_against_monte_carlo():
    H = 0.7
    x = sample_gaussian_paths(fbm_spec(H), 1, make_grid(0, 1, 2), RngStream(6), 10**6)[..., 0]
    phase = (x[:, 1] - x[:, 0]) + (x[:, 2] - x[:, 1])
    c, s = np.cos(phase), np.sin(phase)
    mc = math.hypot(c.mean(), s.mean())
    se = math.sqrt(((c.mean() * c + s.mean() * s) / mc).var() / x.shape[0])
    theory = gaussian_charfn(fbm_spec(H), 1, [0, 0.5, 1], [1.0, 1.0])
    assert abs(mc - theory) < 3 * se


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
def test_a1_decay_bound(H):
    cov = fbm_spec(H)
    for k in (0, 4):
        C = a1_constant(k)
        for xi in np.geomspace(0.1, 100, 13):
            for lag in np.geomspace(1e-3, 1, 7):
                val = gaussian_charfn(cov, 1, [0, lag], [xi])
                assert val <= C * xi**-k * lag ** (-H * k) * (1 + 1e-12)


def test_lnd_single_increment_and_brownian():
    r = check_lnd(fbm_spec(0.3), 2, 1, 50, RngStream(1))
    assert r.min_ratio == pytest.approx(1.0, abs=1e-12)
    bm = check_lnd(fbm_spec(0.5), 1, 6, 1000, RngStream(1))
    assert abs(bm.min_ratio - 1) < 1e-10


def test_lnd_fbm_positive():
    r = check_lnd(fbm_spec(0.3), 1, 6, 2000, RngStream(2))
    assert 0 < r.min_ratio <= 1
    assert r.min_ratio <= r.min_ratio_random
