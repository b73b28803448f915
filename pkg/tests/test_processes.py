import numpy as np
import pytest

from localtimes import PathSampler, ProcessSpec, RngStream, make_grid, sample_paths
from localtimes.sde import BlowUp


@pytest.mark.parametrize(
    "spec",
    [
        ProcessSpec("fbm", d=2, alpha=0.3),
        ProcessSpec("gaussian-quasi-helix", alpha=0.3, params={"weight": 0.5}),
        ProcessSpec("rosenblatt", alpha=0.7, params={"rank": 64}),
        ProcessSpec("fbm-sde", alpha=0.7, params={"fields": "trigonometric", "x0": 0.1}),
    ],
)
def test_shapes_and_replica_identity(spec):
    grid = make_grid(0, 1, 64)
    s = PathSampler(spec, grid)
    batch = s.sample(RngStream(5), 6)
    assert batch.shape == (6, 65, spec.d)
    assert np.array_equal(batch[4:], s.sample(RngStream(5), 2, start=4))
    chunks = np.concatenate([p for _, p in s.sample_batches(RngStream(5), 6, 4)])
    assert np.array_equal(chunks, batch)
    assert np.array_equal(s.path(RngStream(5), 3).values, batch[3])


def test_quasi_helix_variance():
    spec = ProcessSpec("gaussian-quasi-helix", alpha=0.3, params={"H2": 0.6, "weight": 0.5})
    x = sample_paths(spec, make_grid(0, 1, 16), RngStream(1), 20000)[:, -1, 0]
    assert abs(x.var() - 1.5) < 4 * 1.5 * np.sqrt(2 / x.size)


def test_sde_sampler_blow_up():
    spec = ProcessSpec("fbm-sde", alpha=0.7, params={"fields": "linear", "field_params": {"drift": 200.0},
                                                      "x0": 1.0})
    with pytest.raises(BlowUp):
        PathSampler(spec, make_grid(0, 1, 64)).sample(RngStream(0), 2)
