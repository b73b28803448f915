import math
import warnings

import numpy as np
import pytest

from localtimes.core import ProcessSpec, RngStream, SamplePath, make_grid
from localtimes.gaussian import fbm_spec, sample_gaussian_path
from localtimes.localtime import (
    Box,
    dirichlet_kernel,
    fourier_histogram_agreement,
    fourier_localtime,
    interval_occupation,
    lattice_box,
    modulus_of_continuity,
    occupation_histogram,
    occupation_identity_check,
    oscillation,
    point_localtime,
    sup_localtime_1d,
)


def bm_path(n=2**14, d=1, seed=0, H=0.5):
    spec = ProcessSpec("fbm", d=d, alpha=H)
    p = sample_gaussian_path(fbm_spec(H), d, make_grid(0, 1, n), RngStream(seed))
    return SamplePath(p.grid, p.values, spec=spec, seed=p.seed)


def test_linear_path_uniform_density(linear_path):
    box = Box((0.5,), (0.5,), (8,))
    f = occupation_histogram(linear_path, (0, 1), box)
    assert np.allclose(f.values, 1.0)
    assert f.total_mass == pytest.approx(1.0, abs=1e-12)


def test_constant_path_puts_all_mass_in_one_cell(constant_path):
    p = constant_path
    box = Box((0.0,), (1.0,), (10,))
    f = occupation_histogram(p, (0, 1), box)
    assert np.count_nonzero(f.values) == 1
    assert f.values.max() == pytest.approx(1 / 0.2)
    with pytest.raises(ValueError):
        Box((0.0,), (-1.0,), (10,))


def test_window_mass_and_box_warning(linear_path):
    f = occupation_histogram(linear_path, (0.25, 0.75), Box((0.5,), (0.5,), (4,)))
    assert f.total_mass == pytest.approx(0.5)
    assert np.allclose(f.values, [0, 1, 1, 0])
    with pytest.warns(RuntimeWarning, match="leaves the box"):
        g = occupation_histogram(linear_path, (0, 1), Box((0.25,), (0.25,), (4,)))
    assert not g.contained
    assert g.total_mass + g.outside_time == pytest.approx(1.0)


def test_window_validation(linear_path):
    with pytest.raises(ValueError):
        occupation_histogram(linear_path, (0.5, 0.25))
    with pytest.raises(ValueError):
        occupation_histogram(linear_path, (0.0, 1.5))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_mass_conservation_random_paths(d):
    p = bm_path(2**12, d=d, seed=d, H=0.3 if d > 1 else 0.5)
    f = occupation_histogram(p, (0, 1))
    assert f.contained
    assert abs(f.total_mass - 1.0) < 1e-12


def test_default_box_is_lattice():
    p = bm_path(2**10)
    f = occupation_histogram(p, (0, 1))
    eps = 2 * (1 / 2**10) ** 0.5
    assert f.box.widths[0] == pytest.approx(eps)
    assert (f.box.lower[0] / eps) == pytest.approx(round(f.box.lower[0] / eps))


def test_lattice_box_covers():
    v = np.array([-0.31, 0.77])
    b = lattice_box(v, 0.1)
    assert b.lower[0] <= -0.31 and b.lower[0] + 2 * b.half_widths[0] >= 0.77


def test_interval_occupation_and_point_estimate(linear_path):
    v = linear_path.values[:, 0]
    assert interval_occupation(v, linear_path.grid.dt, 0.2, 0.5) == pytest.approx(0.3)
    assert point_localtime(v, linear_path.grid.dt, 0.5, 0.1) == pytest.approx(1.0)
    assert sup_localtime_1d(v, linear_path.grid.dt, 0.125)[0] == pytest.approx(1.0)


def test_point_estimate_matches_histogram():
    p = bm_path(2**12, seed=3)
    eps = 0.05
    box = Box((0.0,), (eps / 2,), (1,))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        h = occupation_histogram(p, (0, 1), box).values[0]
    assert point_localtime(p.values[:, 0], p.grid.dt, 0.0, eps) == pytest.approx(h, rel=1e-12)


@pytest.mark.parametrize("d", [1, 2])
def test_occupation_identity(d):
    p = bm_path(2**12, d=d, seed=7, H=0.3 if d == 2 else 0.5)
    f = occupation_histogram(p, (0, 1), bin_c=0.5)
    if d == 1:
        def g(x):
            return np.cos(x) + 2
    else:
        def g(x):
            return np.exp(-(x[0] ** 2 + x[1] ** 2))
    assert occupation_identity_check(p, f, g) < 1e-2


def test_dirichlet_kernel_matches_sum():
    cutoff, step = 8.0, 0.25
    xi = -cutoff + step * (np.arange(int(2 * cutoff / step)) + 0.5)
    for y in (0.0, 0.1, 1.3, -2.2):
        assert dirichlet_kernel(y, cutoff, step) == pytest.approx(step * np.cos(xi * y).sum(), abs=1e-12)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
def test_fourier_agrees_with_histogram(H):
    p = bm_path(2**14, seed=11, H=H)
    f = occupation_histogram(p, (0, 1), bin_c=8)
    r = fourier_histogram_agreement(p, f)
    assert len(r["cells"]) >= 4
    assert r["max_rel_diff"] < 0.05 and r["within_5pct"]


def test_fourier_agrees_in_two_dimensions():
    p = bm_path(2**12, d=2, seed=12, H=0.3)
    f = occupation_histogram(p, (0, 1), bins=(6, 6))
    r = fourier_histogram_agreement(p, f, nodes=4, max_cells=4)
    assert r["max_rel_diff"] < 0.05


def test_fourier_pointwise_close_to_histogram():
    p = bm_path(2**14, seed=11)
    eps = 0.05
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        lf = fourier_localtime(p, (0, 1), 0.1, cutoff=40.0)
    lh = point_localtime(p.values[:, 0], p.grid.dt, 0.1, eps)
    assert abs(lf - lh) < 0.15 * max(lh, 0.3)


def test_fourier_rejects_bad_arguments(linear_path):
    with pytest.raises(ValueError):
        fourier_localtime(linear_path, (0, 1), 0.5, cutoff=0.0)
    with pytest.raises(ValueError):
        fourier_localtime(linear_path, (0, 1), 0.5, cutoff=10.0, freq_step=1.0)


def test_oscillation_linear(linear_path):
    dt = linear_path.grid.dt
    assert oscillation(linear_path.values, 10) == pytest.approx(10 * dt)
    v2 = np.column_stack([linear_path.values[:, 0], linear_path.values[:, 0]])
    assert oscillation(v2, 10) == pytest.approx(10 * dt * math.sqrt(2))


def test_modulus_brownian():
    p = bm_path(2**16, seed=5)
    h = 2.0 ** -np.arange(4, 12)
    r = modulus_of_continuity(p, h)
    assert abs(r.extra["corrected_fit"]["slope"] - 0.5) < 0.05
    assert np.all(r.ratios > 0)
    with pytest.raises(ValueError):
        modulus_of_continuity(p, [1e-9])


def test_to_csv_roundtrip():
    p = bm_path(2**8)
    f = occupation_histogram(p, (0, 1))
    rows = f.to_csv().strip().split("\n")
    assert rows[0] == "x0,local_time" and len(rows) == f.values.size + 1
    assert float(rows[1].split(",")[1]) == f.values[0]
    assert '"contained": true' in f.to_json()
