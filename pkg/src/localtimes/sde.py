"""Pathwise solvers for equations driven by d-dimensional fBm.

    X_t = x0 + int V0(X) ds + sum_l int V_l(X) dB^l

Young (H > 1/2) Euler scheme and a level-2 (simplified Milstein / Davie)
scheme for H in (1/3, 1/2]. Vector fields are plain callables; the Milstein
correction uses central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import LineFit, RngStream, SamplePath, ScalingReport, as_stream, fit_line, make_grid
from .gaussian import fbm_spec, sample_gaussian_paths

EULER_YOUNG = "euler-young"
MILSTEIN2 = "milstein-level2"
OVERFLOW_GUARD = 1e8
FD_STEP = 1e-5


class BlowUp(ArithmeticError):
    """The solution left the overflow guard."""

    def __init__(self, step, norm):
        super().__init__(f"|X| = {norm:.3g} exceeded {OVERFLOW_GUARD:g} at step {step}")
        self.step = step


@dataclass
class VectorFieldSet:
    """Drift ``V0: R^d -> R^d`` and diffusion ``V: R^d -> R^{d x d}`` (columns V_1..V_d).

    Both callables act on batches: ``V0(x)`` with ``x`` of shape ``(n, d)``
    returns ``(n, d)``; ``V(x)`` returns ``(n, d, d)``.
    """

    V0: Callable
    V: Callable
    d: int
    name: str = ""
    smoothness: int = 3

    def drift(self, x):
        return np.asarray(self.V0(x), dtype=float).reshape(x.shape)

    def diffusion(self, x):
        return np.asarray(self.V(x), dtype=float).reshape(x.shape + (self.d,))


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


def _zero_drift(x):
    return np.zeros_like(x)


def identity_fields(d: int, scale: float = 1.0) -> VectorFieldSet:
    def V(x):
        return np.broadcast_to(scale * np.eye(d), x.shape + (d,)).copy()

    return VectorFieldSet(_zero_drift, V, d, name="identity" if scale == 1 else f"identity*{scale:g}")


def zero_fields(d: int) -> VectorFieldSet:
    return VectorFieldSet(_zero_drift, lambda x: np.zeros(x.shape + (d,)), d, name="zero")


def linear_fields(d: int = 1, sigma: float = 1.0, drift: float = 0.0) -> VectorFieldSet:
    """V_l(x) = sigma x_l e_l (diagonal geometric noise)."""

    def V0(x):
        return drift * x

    def V(x):
        out = np.zeros(x.shape + (d,))
        idx = np.arange(d)
        out[..., idx, idx] = sigma * x
        return out

    return VectorFieldSet(V0, V, d, name="linear")


def trigonometric_fields(d: int = 1, shift: float = 2.0) -> VectorFieldSet:
    """V = diag(sin(x_l) + shift), elliptic for shift > 1."""

    def V(x):
        out = np.zeros(x.shape + (d,))
        idx = np.arange(d)
        out[..., idx, idx] = np.sin(x) + shift
        return out

    return VectorFieldSet(_zero_drift, V, d, name="trigonometric")


def logistic_fields(d: int = 1, low: float = 1.0) -> VectorFieldSet:
    """V = diag(low + 1/(1 + exp(-x_l))), drift -x (mean reverting)."""

    def V0(x):
        return -x

    def V(x):
        out = np.zeros(x.shape + (d,))
        idx = np.arange(d)
        out[..., idx, idx] = low + 1.0 / (1.0 + np.exp(-x))
        return out

    return VectorFieldSet(V0, V, d, name="logistic")


CATALOG = {
    "zero": zero_fields,
    "identity": identity_fields,
    "linear": linear_fields,
    "trigonometric": trigonometric_fields,
    "logistic": logistic_fields,
}


def catalog_fields(name: str, d: int, **kwargs) -> VectorFieldSet:
    if name not in CATALOG:
        raise ValueError(f"unknown vector field {name!r}; catalog: {sorted(CATALOG)}")
    return CATALOG[name](d, **kwargs)


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------


@dataclass
class SdeSolution:
    path: SamplePath
    driver: SamplePath
    scheme: str
    x0: np.ndarray


def _check_scheme(scheme: str, H: float | None):
    if scheme not in (EULER_YOUNG, MILSTEIN2):
        raise ValueError(f"unknown scheme {scheme!r}")
    if H is None:
        return
    if scheme == EULER_YOUNG and H <= 0.5:
        raise ValueError(f"euler-young needs H > 1/2 (got H={H:g}); use milstein-level2")
    if scheme == MILSTEIN2 and H <= 1 / 3:
        raise ValueError(f"H={H:g} <= 1/3 is outside the supported range of the level-2 scheme")


def directional_derivative(V: Callable, x: np.ndarray, direction: np.ndarray, step: float = FD_STEP):
    """(D V)(x)[direction] by central differences, batched over rows."""
    return (V(x + step * direction) - V(x - step * direction)) / (2 * step)


def solve_paths(fields: VectorFieldSet, x0, driver: np.ndarray, dt: float, scheme: str = EULER_YOUNG,
                raise_on_blowup: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Batched solver: ``driver`` has shape ``(n, steps + 1, d)``.

    Returns the solutions and a boolean blow-up mask; rows that blow up are
    frozen at NaN when ``raise_on_blowup`` is false.
    """
    B = np.asarray(driver, dtype=float)
    n, steps1, d = B.shape
    if d != fields.d:
        raise ValueError(f"driver dimension {d} does not match vector fields ({fields.d})")
    x = np.broadcast_to(np.asarray(x0, dtype=float), (n, d)).copy()
    out = np.empty((n, steps1, d))
    out[:, 0] = x
    dB = np.diff(B, axis=1)
    blown = np.zeros(n, dtype=bool)
    for k in range(steps1 - 1):
        db = dB[:, k]
        Vx = fields.diffusion(x)
        incr = fields.drift(x) * dt + np.einsum("nij,nj->ni", Vx, db)
        if scheme == MILSTEIN2:
            # 0.5 sum_{l,l'} (D V_l . V_l')(x) dB^l' dB^l = 0.5 D(V db)(x)[V db]
            move = np.einsum("nij,nj->ni", Vx, db)

            def Vdb(y, db=db):
                return np.einsum("nij,nj->ni", fields.diffusion(y), db)

            incr = incr + 0.5 * directional_derivative(Vdb, x, move)
        x = x + incr
        norm = np.linalg.norm(x, axis=1)
        bad = ~(norm <= OVERFLOW_GUARD)
        if np.any(bad & ~blown):
            if raise_on_blowup:
                raise BlowUp(k + 1, float(norm[bad].max()) if np.isfinite(norm[bad]).any() else math.inf)
            blown |= bad
            x[blown] = np.nan
        out[:, k + 1] = x
    return out, blown


def solve_sde(fields: VectorFieldSet, x0, driver: SamplePath, scheme: str = EULER_YOUNG,
              H: float | None = None) -> SdeSolution:
    if H is None and driver.spec is not None:
        H = driver.spec.alpha
    _check_scheme(scheme, H)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    sol, _ = solve_paths(fields, x0, driver.values[None], driver.grid.dt, scheme)
    path = SamplePath(driver.grid, sol[0], seed=driver.seed)
    return SdeSolution(path, driver, scheme, x0)


def check_ellipticity(fields: VectorFieldSet, probe_points, probe_dirs) -> float:
    """min over probes of v' V V' v / |v|^2."""
    P = np.atleast_2d(np.asarray(probe_points, dtype=float))
    D = np.atleast_2d(np.asarray(probe_dirs, dtype=float))
    if P.shape[0] < 1 or D.shape[0] < 1:
        raise ValueError("need at least one probe point and one direction")
    V = fields.diffusion(P)  # (p, d, d)
    M = V @ np.swapaxes(V, 1, 2)
    q = np.einsum("ki,pij,kj->pk", D, M, D) / np.sum(D**2, axis=1)[None, :]
    return float(q.min())


def convergence_study(fields: VectorFieldSet, x0, H: float, levels: Sequence[int], replicas: int,
                      rng: RngStream | int | None, scheme: str | None = None, T: float = 1.0,
                      exact: Callable | None = None) -> ScalingReport:
    """Self-convergence of the scheme under dyadic refinement.

    One fBm path per replica is drawn on the finest level and subsampled for
    the coarser ones, so all levels share the same driver. ``stat`` holds
    the replica mean of sup-norm differences between consecutive levels on
    the coarse grid; the rate is minus the slope of log2(stat) against the
    level exponent. If ``exact(driver_values, times)`` is given, the sup-norm
    errors against it are reported in ``extra``.
    """
    levels = sorted(int(n) for n in levels)
    if len(levels) < 2:
        raise ValueError("need at least two levels")
    for a, b in zip(levels, levels[1:]):
        if b != 2 * a:
            raise ValueError("levels must be nested dyadically (each twice the previous)")
    scheme = scheme or (EULER_YOUNG if H > 0.5 else MILSTEIN2)
    _check_scheme(scheme, H)
    rng = as_stream(rng)
    finest = levels[-1]
    grid = make_grid(0.0, T, finest)
    d = fields.d
    B = sample_gaussian_paths(fbm_spec(H), d, grid, rng, replicas)
    sols = {}
    blown = np.zeros(replicas, dtype=bool)
    for n in levels:
        stride = finest // n
        sol, bad = solve_paths(fields, x0, B[:, ::stride], T / n, scheme, raise_on_blowup=False)
        sols[n] = sol
        blown |= bad
    ok = ~blown
    diffs = []
    for a, b in zip(levels, levels[1:]):
        diff = np.abs(sols[b][:, ::2] - sols[a]).max(axis=(1, 2))
        diffs.append(diff[ok])
    mean_diff = np.array([float(np.mean(dd)) for dd in diffs])
    log2n = np.log2(np.asarray(levels[:-1], dtype=float))
    extra = {"scheme": scheme, "blow_ups": int(blown.sum()), "levels": levels}
    # differences at round-off level mean the scheme is exact for these fields
    scale = max(1.0, float(np.nanmax(np.abs(sols[finest]))))
    if np.all(mean_diff <= 1e-12 * scale):
        fit = LineFit(math.inf, 0.0, 0.0, math.inf, math.inf)
        extra["exact"] = True
    else:
        fit = fit_line(log2n, -np.log2(mean_diff))
        ratios = mean_diff[:-1] / mean_diff[1:]
        extra["refinement_factors"] = ratios.tolist()
    if exact is not None:
        errs = []
        for n in levels:
            stride = finest // n
            ref = exact(B[:, ::stride], make_grid(0.0, T, n).points)
            errs.append(float(np.mean(np.abs(sols[n] - ref).max(axis=(1, 2))[ok])))
        extra["errors_vs_exact"] = errs
        extra["error_fit"] = fit_line(np.log2(np.asarray(levels, dtype=float)), -np.log2(errs)).to_dict()
    return ScalingReport(
        claim="sde-self-convergence",
        scale=np.asarray(levels[:-1], dtype=float),
        stat=mean_diff,
        fit=fit,
        target=2 * H - 1 if scheme == EULER_YOUNG else None,
        extra=extra,
    )
