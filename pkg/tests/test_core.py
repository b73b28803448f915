import math

import numpy as np
import pytest

from localtimes.core import (
    HypothesisViolation,
    ProcessSpec,
    RngStream,
    SamplePath,
    fit_line,
    fsum,
    loglog_normalizer,
    make_grid,
    map_ordered,
    mean_and_se,
    substream,
    trend_test,
)


@pytest.mark.parametrize(
    "args, points",
    [
        ((0, 1, 4), [0, 0.25, 0.5, 0.75, 1]),
        ((0, 1, 1), [0, 1]),
        ((0.5, 1.0, 2), [0.5, 0.75, 1.0]),
    ],
)
def test_grid_points(args, points):
    g = make_grid(*args)
    assert g.points.tolist() == points
    assert g.point(0) == args[0] and g.point(g.n_steps) == args[1]


@pytest.mark.parametrize("args", [(1, 1, 4), (1, 0.5, 4), (0, 1, 0), (-0.1, 1, 3)])
def test_grid_rejects(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_grid_large_endpoint_exact():
    g = make_grid(0.0, 3.0, 2**24)
    p = g.points
    assert p[-1] == 3.0 and p[0] == 0.0
    assert np.all(np.diff(p) > 0)
    assert g.point(12345) == 12345 * (3.0 / 2**24)


def test_spec_defaults():
    assert (ProcessSpec("fbm", alpha=0.3).theta, ProcessSpec("fbm", alpha=0.3).iota) == (0.0, 0.5)
    assert ProcessSpec("rosenblatt", alpha=0.7).iota == 1.0
    s = ProcessSpec("fbm-sde", alpha=0.6)
    assert s.theta == pytest.approx(4 / 0.6) and s.iota == 0.5
    with pytest.raises(ValueError):
        ProcessSpec("rosenblatt", d=2, alpha=0.7)
    with pytest.raises(ValueError):
        ProcessSpec("rosenblatt", alpha=0.4)
    with pytest.raises(ValueError):
        ProcessSpec("brownian-sheet")


def test_local_time_hypothesis():
    ProcessSpec("fbm", d=2, alpha=0.45).require_local_time()
    with pytest.raises(HypothesisViolation, match=r"alpha in \(0, 1/d\)"):
        ProcessSpec("fbm", d=2, alpha=0.6).require_local_time()


def test_sample_path_checks():
    g = make_grid(0, 1, 4)
    with pytest.raises(ValueError):
        SamplePath(g, np.zeros(4))
    with pytest.raises(ValueError):
        SamplePath(g, np.array([0, 1, np.nan, 0, 0]))
    p = SamplePath(g, np.arange(5.0))
    assert p.values.shape == (5, 1) and not p.values.flags.writeable


def test_substream_determinism_and_distinctness():
    a = substream(42, (0, 0)).generator().standard_normal(1000)
    b = substream(42, (0, 0)).generator().standard_normal(1000)
    c = substream(42, (0, 1)).generator().standard_normal(1000)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_substream_independence():
    a = substream(42, (0, 0)).generator().standard_normal(10**6)
    b = substream(42, (0, 1)).generator().standard_normal(10**6)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_child_streams_are_keyed():
    r = RngStream(1, (2,))
    assert r.child(3).stream_id == (2, 3)
    x = r.child(3).generator().random(5)
    assert np.array_equal(x, RngStream(1, (2, 3)).generator().random(5))


def test_fsum_compensated():
    v = np.array([1e16, 1.0, -1e16] * 1000)
    assert fsum(v) == 1000.0


def test_mean_and_se():
    m, se = mean_and_se([1.0, 2.0, 3.0, 4.0])
    assert m == 2.5 and se == pytest.approx(math.sqrt(np.var([1, 2, 3, 4], ddof=1) / 4))


def test_fit_line_exact_and_ci():
    x = np.arange(6.0)
    f = fit_line(x, 2 * x + 1)
    assert f.slope == pytest.approx(2) and f.intercept == pytest.approx(1)
    rng = np.random.default_rng(0)
    y = 0.5 * x + rng.normal(0, 0.1, x.size)
    f = fit_line(x, y)
    assert f.ci_low < f.slope < f.ci_high


def test_trend_test():
    assert trend_test(np.arange(10.0)) < 1e-3
    assert trend_test(np.arange(10.0)[::-1]) > 0.99


def test_loglog_normalizer_domain():
    r = np.array([0.25, 0.125])
    g = loglog_normalizer(r, 0.5, 1, 0.0)
    assert np.allclose(g, r**0.5 * np.log(np.log(1 / r)) ** 0.5)
    with pytest.raises(ValueError):
        loglog_normalizer([0.5], 0.5, 1, 0.0)
    assert loglog_normalizer([0.5], 0.5, 1, 0.0, variant="log")[0] == pytest.approx(0.5**0.5 * math.log(2) ** 0.5)


def test_map_ordered_threads_preserve_order():
    assert map_ordered(lambda i: i * i, 20, threads=4) == [i * i for i in range(20)]
