"""Rosenblatt process as a second-chaos quadratic form.

On [0, T] the process is the double Wiener-Ito integral of

    K_t(x, y) = c * int_{max(x,y)}^t (s/x)^{H/2} (s-x)^{H/2-1} (s/y)^{H/2} (s-y)^{H/2-1} ds

against one Brownian motion. The Brownian motion is discretized into ``rank``
cell increments ``sqrt(h) xi_i``. Averaging the kernel over cells keeps its
product structure in ``s``:

    A_ij(t) = c h int_0^t f_i(s) f_j(s) ds,

with ``f_i(s)`` the cell average of ``(s/x)^{H/2} (s-x)_+^{H/2-1}``, known in
closed form through the incomplete Beta function. The ``s`` integral is
composite Gauss-Legendre on a partition containing every cell edge and grid
time, so each ``A(t)`` is an exact Gram matrix (positive semidefinite) and
``Z_t = sum_ij A_ij(t) (xi_i xi_j - delta_ij)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import RngStream, SamplePath, TimeGrid, as_stream, fit_line, map_ordered

MARGINAL_BLOCK = 1024


@dataclass
class EigenProduct:
    lambdas: np.ndarray
    value: float

    def to_dict(self) -> dict:
        return {"value": self.value, "n_eigenvalues": int(self.lambdas.size),
                "max_abs_lambda": float(np.abs(self.lambdas).max()) if self.lambdas.size else 0.0}


def _cell_average_profile(H: float, edges: np.ndarray, s: np.ndarray) -> np.ndarray:
    """f_i(s) for cells [edges[i], edges[i+1]), shape (n_cells, s.size)."""
    a, b = 1 - H / 2, H / 2
    h = np.diff(edges)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    ss = s[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        u_hi = np.where(ss > 0, np.minimum(hi, ss) / ss, 0.0)
        u_lo = np.where(ss > 0, np.minimum(lo, ss) / ss, 0.0)
    inc = special.betainc(a, b, np.clip(u_hi, 0, 1)) - special.betainc(a, b, np.clip(u_lo, 0, 1))
    f = special.beta(a, b) * ss**b * inc / h[:, None]
    return np.where(ss > lo, f, 0.0)


class ChaosKernel:
    """Discretized Rosenblatt kernel on a time grid.

    ``matrix(k)`` returns ``A(t_k)``; ``c`` is fixed so that
    ``2 tr(A(t_ref)^2) = t_ref^(2H)`` with ``t_ref = 1`` when on the grid,
    else the grid end.
    """

    def __init__(self, H: float, grid: TimeGrid, rank: int = 512, nodes: int = 4):
        if not 0.5 < H < 1:
            raise ValueError(f"Rosenblatt kernel needs H in (1/2, 1), got {H}")
        if rank < 16:
            raise ValueError("rank must be at least 16")
        self.H = float(H)
        self.grid = grid
        self.rank = int(rank)
        T = grid.t_end
        self.edges = np.linspace(0.0, T, self.rank + 1)
        self.h = T / self.rank
        # s-partition containing every cell edge and grid time
        cuts = np.concatenate([self.edges, grid.points])
        cuts = np.unique(np.round(cuts / T, 13) * T)
        gx, gw = np.polynomial.legendre.leggauss(nodes)
        left, right = cuts[:-1], cuts[1:]
        half = 0.5 * (right - left)
        s = (left[:, None] + half[:, None] * (gx[None, :] + 1)).ravel()
        w = (half[:, None] * gw[None, :]).ravel()
        self.nodes_s = s
        self.weights = w
        self.F = _cell_average_profile(self.H, self.edges, s)
        # nodes with s <= t_k
        self.node_count = np.searchsorted(s, grid.points, side="right")
        self.c = 1.0
        self.t_ref_index = grid.index(1.0) if grid.t_start <= 1.0 <= grid.t_end and abs(
            grid.point(grid.index(1.0)) - 1.0) < 1e-12 else grid.n_steps
        t_ref = grid.point(self.t_ref_index)
        A = self.matrix(self.t_ref_index)
        # A scales linearly in c
        self.c = math.sqrt(t_ref ** (2 * self.H) / (2 * float(np.sum(A * A))))

    def _factor(self, k: int) -> np.ndarray:
        n = self.node_count[k]
        return self.F[:, :n] * np.sqrt(self.c * self.h * self.weights[:n])[None, :]

    def matrix(self, k: int) -> np.ndarray:
        """A(t_k) for grid index ``k``."""
        G = self._factor(k)
        return G @ G.T

    def increment_matrix(self, k0: int, k1: int) -> np.ndarray:
        n0, n1 = self.node_count[k0], self.node_count[k1]
        G = self.F[:, n0:n1] * np.sqrt(self.c * self.h * self.weights[n0:n1])[None, :]
        return G @ G.T

    def variance(self, k: int) -> float:
        A = self.matrix(k)
        return 2 * float(np.sum(A * A))

    def covariance(self, k1: int, k2: int) -> float:
        return 2 * float(np.sum(self.matrix(k1) * self.matrix(k2)))

    def eigenvalues(self, k: int | None = None) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix(self.t_ref_index if k is None else k))


def build_kernel(H: float, grid: TimeGrid, rank: int = 512, nodes: int = 4) -> ChaosKernel:
    return ChaosKernel(H, grid, rank, nodes)


def _node_increments(kernel: ChaosKernel, xi: np.ndarray) -> np.ndarray:
    """Per-node contributions c h w_q ((f_q . xi)^2 - |f_q|^2), shape (n, Q)."""
    # row by row: a batched product may round differently with the batch size,
    # and each replica must not depend on which batch it was drawn in
    g = np.stack([row @ kernel.F for row in xi]) if xi.shape[0] else np.zeros((0, kernel.F.shape[1]))
    norm2 = np.sum(kernel.F**2, axis=0)
    return (kernel.c * kernel.h * kernel.weights)[None, :] * (g**2 - norm2[None, :])


def sample_rosenblatt_paths(kernel: ChaosKernel, rng: RngStream | int | None, n_paths: int,
                            threads: int = 1, start: int = 0) -> np.ndarray:
    """Batch of paths on the kernel grid, shape ``(n_paths, n_steps + 1, 1)``; replica i uses ``rng.child(start + i)``."""
    rng = as_stream(rng)

    def draw(i):
        return rng.child(start + i).generator().standard_normal(kernel.rank)

    xi = np.stack(map_ordered(draw, n_paths, threads)) if n_paths else np.zeros((0, kernel.rank))
    inc = _node_increments(kernel, xi)
    cum = np.concatenate([np.zeros((n_paths, 1)), np.cumsum(inc, axis=1)], axis=1)
    z = cum[:, kernel.node_count]
    z[:, kernel.node_count == 0] = 0.0
    return z[:, :, None]


def sample_rosenblatt(kernel: ChaosKernel, rng: RngStream | int | None) -> SamplePath:
    rng = as_stream(rng)
    z = sample_rosenblatt_paths(kernel, rng, 1)[0]
    return SamplePath(kernel.grid, z, seed=(rng.master_seed, rng.stream_id))


def sample_rosenblatt_marginal(kernel: ChaosKernel, k: int, rng: RngStream | int | None, n: int,
                               threads: int = 1) -> np.ndarray:
    """``n`` draws of Z_{t_k} = xi' A xi - tr A; block b of 1024 draws uses ``rng.child(b)``."""
    rng = as_stream(rng)
    A = kernel.matrix(k)
    tr = float(np.trace(A))
    n_blocks = -(-n // MARGINAL_BLOCK)

    def block(b):
        m = min(MARGINAL_BLOCK, n - b * MARGINAL_BLOCK)
        xi = rng.child(b).generator().standard_normal((m, kernel.rank))
        return np.einsum("ij,ij->i", xi @ A, xi) - tr

    return np.concatenate(map_ordered(block, n_blocks, threads)) if n else np.zeros(0)


def rosenblatt_charfn_bound(kernel: ChaosKernel, partition, xi) -> EigenProduct:
    """prod_k (1 + 4 lambda_k^2)^(-1/4) over eigenvalues of sum_j xi_j (A(t_j) - A(t_{j-1}))."""
    p = np.asarray(partition, dtype=float)
    if p.size < 2:
        raise ValueError("partition needs at least one increment")
    if np.any(np.diff(p) <= 0):
        raise ValueError("partition must be strictly increasing")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size != p.size - 1:
        raise ValueError("need one frequency per increment")
    idx = [kernel.grid.index(t) for t in p]
    M = np.zeros((kernel.rank, kernel.rank))
    for j in range(1, len(idx)):
        if xi[j - 1] != 0:
            M += xi[j - 1] * kernel.increment_matrix(idx[j - 1], idx[j])
    lam = np.linalg.eigvalsh(M)
    value = math.exp(-0.25 * float(np.sum(np.log1p(4 * lam**2))))
    return EigenProduct(lam, value)


def eigenvalue_decay(kernel: ChaosKernel, k_range=(4, None)):
    """Log-log fit of sorted |lambda_k| against k for A(t_ref)."""
    lam = np.sort(np.abs(kernel.eigenvalues()))[::-1]
    lo, hi = k_range
    hi = hi or lam.size // 8
    k = np.arange(1, lam.size + 1)
    sel = slice(lo - 1, hi)
    return fit_line(np.log(k[sel]), np.log(lam[sel])), lam


def increment_charfn(kernel: ChaosKernel):
    """Provider ``(xi, lag) -> |E exp(i xi (Z_{s+lag} - Z_s))|`` from self-similarity and stationary increments."""
    lam = kernel.eigenvalues()
    lam = lam[np.abs(lam) > 0]
    t_ref = kernel.grid.point(kernel.t_ref_index)
    H = kernel.H

    def phi(xi, lag):
        xi = np.asarray(xi, dtype=float)[..., 0]
        eff = xi * (np.asarray(lag, dtype=float) / t_ref) ** H
        flat = eff.ravel()
        out = np.empty_like(flat)
        for a in range(0, flat.size, 4096):
            e = flat[a : a + 4096, None]
            out[a : a + 4096] = np.exp(-0.25 * np.log1p(4 * (e * lam[None, :]) ** 2).sum(axis=1))
        return out.reshape(eff.shape)

    phi.d = 1
    return phi
