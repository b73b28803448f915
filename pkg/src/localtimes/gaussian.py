"""Exact simulation of fractional Brownian motion and Gaussian quasi-helices.

Two exact samplers share one interface: a dense Cholesky factor of the
covariance on the grid, and circulant embedding of fractional Gaussian noise
(Davies-Harte) for fBm on grids that start at zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from .core import RngStream, SamplePath, TimeGrid, as_stream, map_ordered

CHOLESKY = "cholesky"
CIRCULANT = "circulant-embedding"
AUTO = "auto"
CIRCULANT_THRESHOLD = 512
CLIP_TOL = 1e-9


class NotPSDError(np.linalg.LinAlgError):
    """Covariance matrix could not be factorized."""


class FallbackNeeded(RuntimeError):
    """Circulant embedding has a genuinely negative eigenvalue."""


def fbm_covariance(s, t, H: float):
    """Covariance 0.5 (t^2H + s^2H - |t - s|^2H) of standard fBm."""
    if not 0 < H < 1:
        raise ValueError(f"Hurst exponent must lie in (0, 1), got {H}")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("fBm covariance is defined for non-negative times")
    h2 = 2 * H
    out = 0.5 * (t**h2 + s**h2 - np.abs(t - s) ** h2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CovarianceSpec:
    """Covariance of each (independent) component.

    ``kind`` is ``"fbm"`` (needs ``H``) or ``"custom"`` (needs ``func``, a
    vectorized ``r(s, t)``). ``C_minus``/``C_plus`` bound the increment
    variance by multiples of ``|t - s|^(2H)``.
    """

    kind: str
    H: float
    func: Callable | None = field(default=None, compare=False)
    C_minus: float = 1.0
    C_plus: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("fbm", "custom"):
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        if not 0 < self.H < 1:
            raise ValueError(f"H must lie in (0, 1), got {self.H}")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom covariance needs a function r(s, t)")
        if not 0 < self.C_minus <= self.C_plus:
            raise ValueError("need 0 < C_minus <= C_plus")

    def __call__(self, s, t):
        if self.kind == "fbm":
            return fbm_covariance(s, t, self.H)
        return self.func(np.asarray(s, dtype=float), np.asarray(t, dtype=float))

    def matrix(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        return np.asarray(self(t[:, None], t[None, :]), dtype=float)

    def increment_covariance(self, partition) -> np.ndarray:
        """Covariance matrix of the increments over consecutive partition cells."""
        p = np.asarray(partition, dtype=float)
        R = self.matrix(p)
        # Cov(X_b - X_a, X_d - X_c) by inclusion-exclusion
        return R[1:, 1:] - R[1:, :-1] - R[:-1, 1:] + R[:-1, :-1]

    def increment_variance(self, s, t):
        return self(t, t) + self(s, s) - 2 * self(s, t)

    @property
    def stationary_increments(self) -> bool:
        return self.kind == "fbm"


def fbm_spec(H: float) -> CovarianceSpec:
    return CovarianceSpec("fbm", H, name=f"fbm(H={H:g})")


def fbm_mixture_spec(H: float, H2: float, weight: float = 1.0, T: float = 1.0) -> CovarianceSpec:
    """Sum of independent fBms with exponents ``H < H2``; a quasi-helix of order H on [0, T]."""
    if not H < H2 < 1:
        raise ValueError("need H < H2 < 1")

    def r(s, t):
        return fbm_covariance(s, t, H) + weight * fbm_covariance(s, t, H2)

    c_plus = 1.0 + weight * T ** (2 * (H2 - H))
    return CovarianceSpec("custom", H, r, 1.0, c_plus, name=f"fbm-mixture(H={H:g},H2={H2:g},w={weight:g})")


def check_sandwich(cov: CovarianceSpec, times, rtol: float = 1e-12) -> bool:
    """Increment-variance bounds C_- |t-s|^2H <= Var <= C_+ |t-s|^2H on all pairs of ``times``."""
    t = np.asarray(times, dtype=float)
    s_, t_ = np.meshgrid(t, t, indexing="ij")
    mask = s_ < t_
    v = cov.increment_variance(s_[mask], t_[mask])
    base = np.abs(t_[mask] - s_[mask]) ** (2 * cov.H)
    lo = cov.C_minus * base * (1 - rtol)
    hi = cov.C_plus * base * (1 + rtol)
    return bool(np.all(v >= lo) and np.all(v <= hi))


# ---------------------------------------------------------------------------
# Factorizations
# ---------------------------------------------------------------------------


class _Factor:
    method: str
    n_points: int
    draw_size: int

    def transform(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def implied_covariance(self) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError


class _CholeskyFactor(_Factor):
    method = CHOLESKY

    def __init__(self, cov: CovarianceSpec, grid: TimeGrid):
        t = grid.points
        self.n_points = t.size
        # a zero-variance start point (X_0 = 0) is kept out of the factorization
        self.zero_start = bool(cov(t[0], t[0]) == 0.0)
        tt = t[1:] if self.zero_start else t
        R = cov.matrix(tt)
        try:
            self.L = linalg.cholesky(R, lower=True)
        except linalg.LinAlgError as exc:
            raise NotPSDError(f"covariance {cov.name or cov.kind} is not positive definite on the grid") from exc
        self.draw_size = tt.size

    def transform(self, z):
        x = z @ self.L.T
        if self.zero_start:
            x = np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)
        return x

    def implied_covariance(self):
        C = self.L @ self.L.T
        if self.zero_start:
            C = np.pad(C, ((1, 0), (1, 0)))
        return C


class _CirculantFactor(_Factor):
    """Davies-Harte embedding of fractional Gaussian noise."""

    method = CIRCULANT

    def __init__(self, H: float, grid: TimeGrid):
        if grid.t_start != 0:
            raise FallbackNeeded("circulant embedding needs a grid starting at 0")
        n = grid.n_steps
        self.n_points = n + 1
        k = np.arange(n + 1, dtype=float)
        h2 = 2 * H
        gamma = 0.5 * (np.abs(k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)
        row = np.concatenate([gamma, gamma[-2:0:-1]])
        lam = np.fft.fft(row).real
        lam_max = lam.max()
        if lam.min() < -CLIP_TOL * lam_max:
            raise FallbackNeeded(f"circulant embedding eigenvalue {lam.min():.3e} below tolerance")
        lam = np.clip(lam, 0.0, None)
        self.m = row.size
        self.n = n
        self.sqrt_lam = np.sqrt(lam / self.m)
        self.scale = grid.dt**H
        self.draw_size = self.m

    def transform(self, z):
        # Hermitian spectrum W with E|W_k|^2 = lam_k; one real normal per
        # eigenvalue, so its inverse real FFT has the circulant covariance
        z = np.asarray(z, dtype=float)
        half = self.m // 2
        lam_scale = self.sqrt_lam * math.sqrt(self.m)
        W = np.empty(z.shape[:-1] + (half + 1,), dtype=complex)
        W[..., 0] = lam_scale[0] * z[..., 0]
        W[..., half] = lam_scale[half] * z[..., self.m - 1]
        W[..., 1:half] = lam_scale[1:half] * np.sqrt(0.5) * (z[..., 1:half] + 1j * z[..., half : self.m - 1])
        noise = np.fft.irfft(W, n=self.m, axis=-1)[..., : self.n] * math.sqrt(self.m)
        x = np.cumsum(noise, axis=-1) * self.scale
        return np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)

    def implied_covariance(self):
        M = self.transform(np.eye(self.draw_size))
        return M.T @ M


def factorize(cov: CovarianceSpec, grid: TimeGrid, method: str = AUTO) -> _Factor:
    """Build an exact sampling factor of ``cov`` on ``grid``."""
    if method not in (AUTO, CHOLESKY, CIRCULANT):
        raise ValueError(f"unknown sampling method {method!r}")
    if method == CHOLESKY:
        return _CholeskyFactor(cov, grid)
    can_embed = cov.stationary_increments and grid.t_start == 0
    if method == CIRCULANT:
        if not can_embed:
            raise FallbackNeeded("circulant embedding needs fBm on a grid starting at 0")
        return _CirculantFactor(cov.H, grid)
    if can_embed and grid.n_steps + 1 > CIRCULANT_THRESHOLD:
        try:
            return _CirculantFactor(cov.H, grid)
        except FallbackNeeded as exc:
            warnings.warn(f"{exc}; falling back to Cholesky", RuntimeWarning, stacklevel=2)
    return _CholeskyFactor(cov, grid)


def sample_gaussian_paths(
    cov: CovarianceSpec,
    d: int,
    grid: TimeGrid,
    rng: RngStream | int | None,
    n_paths: int,
    method: str = AUTO,
    factor: _Factor | None = None,
    threads: int = 1,
    start: int = 0,
) -> np.ndarray:
    """Batch of ``n_paths`` paths, shape ``(n_paths, n_steps + 1, d)``.

    Replica ``i`` draws from ``rng.child(start + i)``, so any sub-batch is
    reproducible on its own.
    """
    rng = as_stream(rng)
    f = factor or factorize(cov, grid, method)

    def draw(i):
        g = rng.child(start + i).generator()
        return g.standard_normal((d, f.draw_size))

    z = np.stack(map_ordered(draw, n_paths, threads)) if n_paths else np.zeros((0, d, f.draw_size))
    x = f.transform(z)  # (n_paths, d, n_points)
    return np.ascontiguousarray(np.swapaxes(x, 1, 2))


def sample_gaussian_path(
    cov: CovarianceSpec, d: int, grid: TimeGrid, rng: RngStream | int | None, method: str = AUTO
) -> SamplePath:
    rng = as_stream(rng)
    x = sample_gaussian_paths(cov, d, grid, rng, 1, method)[0]
    return SamplePath(grid, x, seed=(rng.master_seed, rng.stream_id))


# ---------------------------------------------------------------------------
# Characteristic function and local non-determinism
# ---------------------------------------------------------------------------


def _check_partition(partition) -> np.ndarray:
    p = np.asarray(partition, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("partition needs at least two time points")
    if np.any(np.diff(p) <= 0):
        raise ValueError("partition must be strictly increasing")
    if p[0] < 0:
        raise ValueError("partition times must be non-negative")
    return p


def _as_freqs(xi, m: int, d: int) -> np.ndarray:
    x = np.asarray(xi, dtype=float)
    if x.ndim <= 1 and d == 1:
        x = x.reshape(m, 1)
    if x.shape != (m, d):
        raise ValueError(f"expected frequencies of shape ({m}, {d}), got {x.shape}")
    return x


def gaussian_charfn(cov: CovarianceSpec, d: int, partition, xi) -> float:
    """|E exp(i sum_j <xi_j, Z_{t_j} - Z_{t_{j-1}}>)| from the exact quadratic form.

    ``partition`` is ``[t_0, ..., t_m]``; ``xi`` has shape ``(m, d)``.
    """
    p = _check_partition(partition)
    m = p.size - 1
    x = _as_freqs(xi, m, d)
    S = cov.increment_covariance(p)
    var = float(np.einsum("il,ij,jl->", x, S, x))
    return math.exp(-0.5 * var)


def a1_constant(k: int) -> float:
    """Smallest C with exp(-x^2/2) <= C |x|^-k for all x (k in {0, 4})."""
    if k == 0:
        return 1.0
    # sup_x x^k exp(-x^2/2) at x^2 = k
    return (k / math.e) ** (k / 2)


@dataclass
class LndReport:
    m: int
    trials: int
    min_ratio: float
    worst_case: dict
    min_ratio_random: float
    min_ratio_adversarial: float

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "trials": self.trials,
            "min_ratio": self.min_ratio,
            "min_ratio_random": self.min_ratio_random,
            "min_ratio_adversarial": self.min_ratio_adversarial,
            "worst_case": self.worst_case,
        }


def _lnd_ratio(S: np.ndarray, x: np.ndarray) -> float:
    num = float(np.einsum("il,ij,jl->", x, S, x))
    den = float(np.einsum("il,i,il->", x, np.diag(S), x))
    return num / den


def check_lnd(
    cov: CovarianceSpec,
    d: int,
    m_max: int,
    trials: int,
    rng: RngStream | int | None,
    T: float = 1.0,
) -> LndReport:
    """Probe the local non-determinism ratio Var(sum <xi_k, dZ_k>) / sum xi^2 Var(dZ).

    Random probes: partition points uniform on [0, T] (sorted), standard
    normal frequencies. Adversarial probes: dyadic partitions with
    alternating-sign frequencies, and, for every probed partition, the
    frequency vector minimizing the ratio (smallest eigenvalue of the
    increment correlation matrix).
    """
    if m_max < 1 or trials < 1:
        raise ValueError("need m_max >= 1 and trials >= 1")
    g = as_stream(rng).generator()
    best = (math.inf, None)
    best_random = math.inf
    best_adv = math.inf

    def consider(ratio, partition, x, tag):
        nonlocal best
        if ratio < best[0]:
            best = (ratio, {"partition": partition.tolist(), "xi": x.tolist(), "probe": tag})

    for _ in range(trials):
        m = int(g.integers(1, m_max + 1))
        pts = np.sort(g.uniform(0.0, T, m))
        partition = np.concatenate([[0.0], pts])
        if np.any(np.diff(partition) <= 0):
            continue
        x = g.standard_normal((m, d))
        while not np.any(x):
            x = g.standard_normal((m, d))
        S = cov.increment_covariance(partition)
        r = _lnd_ratio(S, x)
        best_random = min(best_random, r)
        consider(r, partition, x, "random")
        # optimal frequency direction for this partition
        D = np.sqrt(np.diag(S))
        w, V = np.linalg.eigh(S / np.outer(D, D))
        v = V[:, 0] / D
        xa = np.repeat(v[:, None], d, axis=1)
        ra = _lnd_ratio(S, xa)
        best_adv = min(best_adv, ra)
        consider(ra, partition, xa, "min-eigen")

    for m in range(1, m_max + 1):
        for level in range(0, 11):
            width = T * 2.0**-level
            if m * width > T:
                continue
            cells = width * np.arange(1, m + 1)
            # m dyadic cells from 0, and m dyadic cells ending at T after a long first cell
            families = [np.concatenate([[0.0], cells])]
            if m * width < T:
                families.append(np.concatenate([[0.0], T - m * width + cells]))
            for partition in families:
                k = partition.size - 1
                x = np.repeat(((-1.0) ** np.arange(k))[:, None], d, axis=1)
                S = cov.increment_covariance(partition)
                r = _lnd_ratio(S, x)
                best_adv = min(best_adv, r)
                consider(r, partition, x, "dyadic-alternating")

    return LndReport(
        m=m_max,
        trials=trials,
        min_ratio=float(best[0]),
        worst_case=best[1],
        min_ratio_random=float(best_random),
        min_ratio_adversarial=float(best_adv),
    )


def increment_charfn(cov: CovarianceSpec, d: int = 1) -> Callable:
    """Provider ``(xi, lag) -> |E exp(i <xi, X_{s+lag} - X_s>)|`` for stationary increments.

    ``xi`` has trailing axis ``d``; ``lag`` broadcasts against ``xi[..., 0]``.
    """
    if not cov.stationary_increments:
        raise ValueError("increment provider needs stationary increments")
    H = cov.H

    def phi(xi, lag):
        xi = np.asarray(xi, dtype=float)
        q = np.sum(xi**2, axis=-1)
        return np.exp(-0.5 * q * np.asarray(lag, dtype=float) ** (2 * H))

    phi.d = d
    return phi
