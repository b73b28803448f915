"""Batch path samplers selected by :class:`ProcessSpec`.

``class_params`` per process class:

* fbm: ``method`` (auto | cholesky | circulant-embedding)
* gaussian-quasi-helix: ``H2`` (> alpha), ``weight``; the process is
  B^alpha + sqrt(weight) B^H2 with independent fBms
* rosenblatt: ``rank`` (default 512), ``nodes``
* fbm-sde: ``fields`` (catalog name), ``field_params``, ``x0``, ``scheme``;
  the driver is a d-dimensional fBm with H = alpha
"""

from __future__ import annotations

import math

import numpy as np

from . import gaussian, rosenblatt, sde
from .core import ProcessSpec, RngStream, SamplePath, TimeGrid, as_stream


class PathSampler:
    """Samples ``(count, n_steps + 1, d)`` batches; replica ``i`` is a pure function of ``(rng, i)``."""

    def __init__(self, spec: ProcessSpec, grid: TimeGrid):
        self.spec = spec
        self.grid = grid
        p = spec.params
        H = spec.alpha
        if spec.kind == "fbm":
            self._cov = gaussian.fbm_spec(H)
            self._factor = gaussian.factorize(self._cov, grid, p.get("method", gaussian.AUTO))
        elif spec.kind == "gaussian-quasi-helix":
            H2 = float(p.get("H2", min(0.5 * (H + 1), 0.95)))
            self._w = float(p.get("weight", 1.0))
            self._cov = gaussian.fbm_mixture_spec(H, H2, self._w, grid.t_end)
            self._f1 = gaussian.factorize(gaussian.fbm_spec(H), grid, p.get("method", gaussian.AUTO))
            self._f2 = gaussian.factorize(gaussian.fbm_spec(H2), grid, p.get("method", gaussian.AUTO))
        elif spec.kind == "rosenblatt":
            self._kernel = rosenblatt.build_kernel(H, grid, int(p.get("rank", 512)), int(p.get("nodes", 4)))
        elif spec.kind == "fbm-sde":
            self._fields = sde.catalog_fields(p.get("fields", "trigonometric"), spec.d, **p.get("field_params", {}))
            self._x0 = np.broadcast_to(np.asarray(p.get("x0", 0.0), dtype=float), (spec.d,)).copy()
            self._scheme = p.get("scheme") or (sde.EULER_YOUNG if H > 0.5 else sde.MILSTEIN2)
            sde._check_scheme(self._scheme, H)
            self._factor = gaussian.factorize(gaussian.fbm_spec(H), grid, p.get("method", gaussian.AUTO))
        else:  # pragma: no cover - guarded by ProcessSpec
            raise ValueError(spec.kind)

    @property
    def covariance(self):
        return getattr(self, "_cov", None)

    @property
    def kernel(self):
        return getattr(self, "_kernel", None)

    def sample(self, rng: RngStream | int | None, count: int, start: int = 0, threads: int = 1) -> np.ndarray:
        rng = as_stream(rng)
        spec, grid, d = self.spec, self.grid, self.spec.d
        if spec.kind == "fbm":
            return gaussian.sample_gaussian_paths(self._cov, d, grid, rng, count, factor=self._factor,
                                                  threads=threads, start=start)
        if spec.kind == "gaussian-quasi-helix":
            a = gaussian.sample_gaussian_paths(None, d, grid, rng.child(0), count, factor=self._f1,
                                               threads=threads, start=start)
            b = gaussian.sample_gaussian_paths(None, d, grid, rng.child(1), count, factor=self._f2,
                                               threads=threads, start=start)
            return a + math.sqrt(self._w) * b
        if spec.kind == "rosenblatt":
            return rosenblatt.sample_rosenblatt_paths(self._kernel, rng, count, threads=threads, start=start)
        B = gaussian.sample_gaussian_paths(None, d, grid, rng, count, factor=self._factor, threads=threads,
                                           start=start)
        X, blown = sde.solve_paths(self._fields, self._x0, B, grid.dt, self._scheme, raise_on_blowup=False)
        if blown.any():
            raise sde.BlowUp(-1, math.inf)
        return X

    def sample_batches(self, rng, total: int, batch: int, threads: int = 1):
        """Yield ``(start, paths)`` chunks covering ``total`` replicas in order."""
        for start in range(0, total, batch):
            yield start, self.sample(rng, min(batch, total - start), start=start, threads=threads)

    def path(self, rng: RngStream | int | None, index: int = 0) -> SamplePath:
        rng = as_stream(rng)
        v = self.sample(rng, 1, start=index)[0]
        return SamplePath(self.grid, v, seed=(rng.master_seed, rng.stream_id + (index,)), spec=self.spec)


def make_sampler(spec: ProcessSpec, grid: TimeGrid) -> PathSampler:
    return PathSampler(spec, grid)


def sample_paths(spec: ProcessSpec, grid: TimeGrid, rng: RngStream | int | None, count: int,
                 threads: int = 1) -> np.ndarray:
    return PathSampler(spec, grid).sample(rng, count, threads=threads)
