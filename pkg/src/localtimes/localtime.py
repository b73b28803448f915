"""Local-time estimators for discretized paths.

Two independent routes:

* occupation histogram: the piecewise-linear interpolation of the path is
  intersected exactly with a cell lattice, each step's duration split in
  proportion to the parameter length spent in each cell;
* truncated Fourier inversion: midpoint rule in frequency over
  ``[-cutoff, cutoff]^d`` (summed in closed form as a Dirichlet kernel) and
  the trapezoid rule in time.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .core import SamplePath, ScalingReport, fit_line, fsum, trend_test

DEFAULT_BIN_C = 2.0


@dataclass(frozen=True)
class Box:
    """Axis-aligned box split into ``bins`` cells per axis."""

    center: tuple
    half_widths: tuple
    bins: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        h = tuple(float(v) for v in np.atleast_1d(self.half_widths))
        b = tuple(int(v) for v in np.atleast_1d(self.bins))
        d = len(c)
        if len(h) == 1 and d > 1:
            h = h * d
        if len(b) == 1 and d > 1:
            b = b * d
        if not (len(h) == len(b) == d):
            raise ValueError("center, half_widths and bins must have matching dimension")
        if any(v <= 0 for v in h):
            raise ValueError("half widths must be positive")
        if any(v < 1 for v in b):
            raise ValueError("bins must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_widths", h)
        object.__setattr__(self, "bins", b)

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.center) - np.asarray(self.half_widths)

    @property
    def widths(self) -> np.ndarray:
        return 2 * np.asarray(self.half_widths) / np.asarray(self.bins)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.widths))

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.lower[axis] + (np.arange(self.bins[axis]) + 0.5) * self.widths[axis]

    def cell_centers(self) -> np.ndarray:
        """Centers of all cells, shape ``bins + (d,)``."""
        axes = [self.axis_centers(a) for a in range(self.d)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def scaled(self, c: float) -> "Box":
        return Box(tuple(c * v for v in self.center), tuple(c * v for v in self.half_widths), self.bins)

    def shifted(self, x) -> "Box":
        return Box(tuple(np.asarray(self.center) + np.asarray(x, dtype=float)), self.half_widths, self.bins)

    def to_dict(self) -> dict:
        return {"center": list(self.center), "half_widths": list(self.half_widths), "bins": list(self.bins)}


def default_bin_width(dt: float, alpha: float, c: float = DEFAULT_BIN_C) -> float:
    """Bin width c * dt^alpha coupled to the path resolution."""
    return c * dt**alpha


def lattice_box(values: np.ndarray, eps: float, pad_cells: int = 1) -> Box:
    """Smallest box on the lattice ``eps * Z^d`` covering ``values`` with padding."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    lo = np.floor(v.min(axis=0) / eps) - pad_cells
    hi = np.ceil(v.max(axis=0) / eps) + pad_cells
    hi = np.maximum(hi, lo + 1)
    bins = (hi - lo).astype(int)
    center = (lo + hi) / 2 * eps
    return Box(tuple(center), tuple(bins * eps / 2), tuple(bins))


@dataclass
class LocalTimeField:
    box: Box
    window: tuple
    values: np.ndarray  # shape box.bins
    estimator: dict
    contained: bool = True
    outside_time: float = 0.0

    @property
    def total_mass(self) -> float:
        return fsum(self.values) * self.box.cell_volume

    def sup(self) -> float:
        """Maximum over cells; cells away from the path range carry zero and never win."""
        return float(self.values.max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.box.d
        w.writerow([f"x{a}" for a in range(d)] + ["local_time"])
        centers = self.box.cell_centers().reshape(-1, d)
        for c, v in zip(centers, self.values.ravel()):
            w.writerow([repr(float(x)) for x in c] + [repr(float(v))])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "box": self.box.to_dict(),
            "window": list(self.window),
            "estimator": self.estimator,
            "contained": self.contained,
            "outside_time": self.outside_time,
            "total_mass": self.total_mass,
        }

    def to_json(self) -> str:
        return json.dumps(self.metadata(), sort_keys=True)


def _window_indices(path: SamplePath, window) -> tuple[int, int]:
    s, t = window
    if not t > s:
        raise ValueError(f"empty window [{s}, {t}]")
    g = path.grid
    i0, i1 = g.index(s), g.index(t)
    for k, u in ((i0, s), (i1, t)):
        if abs(g.point(k) - u) > 1e-9 * max(1.0, abs(u)):
            raise ValueError(f"window endpoint {u} is not a grid point")
    if i1 <= i0:
        raise ValueError(f"window [{s}, {t}] shorter than one grid step")
    return i0, i1


def segment_cell_weights(values: np.ndarray, dt: float, box: Box):
    """Split each step's duration over the cells its linear segment crosses.

    Returns ``(flat_cell_index, time)`` arrays and the time spent outside the box.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    d = v.shape[1]
    bins = np.asarray(box.bins)
    u = (v - box.lower) / box.widths  # lattice coordinates
    ua, ub = u[:-1], u[1:]
    du = ub - ua
    nseg = ua.shape[0]

    # clip the parameter interval [0, 1] to the box
    lam_lo = np.zeros(nseg)
    lam_hi = np.ones(nseg)
    with np.errstate(divide="ignore", invalid="ignore"):
        for a in range(d):
            moving = du[:, a] != 0
            l0 = np.where(moving, (0 - ua[:, a]) / du[:, a], -np.inf)
            l1 = np.where(moving, (bins[a] - ua[:, a]) / du[:, a], np.inf)
            lam_lo = np.maximum(lam_lo, np.minimum(l0, l1))
            lam_hi = np.minimum(lam_hi, np.maximum(l0, l1))
            still_out = ~moving & ((ua[:, a] < 0) | (ua[:, a] > bins[a]))
            lam_hi = np.where(still_out, -1.0, lam_hi)
    # stationary steps keep the full parameter range [0, 1] when inside
    inside = lam_hi > lam_lo
    seg = np.nonzero(inside)[0]
    lam_lo, lam_hi = lam_lo[seg], lam_hi[seg]
    ua, du = ua[seg], du[seg]
    outside_time = dt * (nseg - fsum(lam_hi - lam_lo)) if seg.size else dt * nseg

    seg_ids = [np.arange(seg.size), np.arange(seg.size)]
    lams = [lam_lo, lam_hi]
    for a in range(d):
        p0 = ua[:, a] + lam_lo * du[:, a]
        p1 = ua[:, a] + lam_hi * du[:, a]
        lo = np.minimum(p0, p1)
        hi = np.maximum(p0, p1)
        first = np.floor(lo) + 1  # integer planes strictly inside (lo, hi)
        last = np.ceil(hi) - 1
        count = np.maximum(last - first + 1, 0).astype(np.int64)
        if count.sum() == 0:
            continue
        ids = np.repeat(np.arange(seg.size), count)
        offs = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
        planes = first[ids] + offs
        lam = (planes - ua[ids, a]) / du[ids, a]
        seg_ids.append(ids)
        lams.append(lam)
    ids = np.concatenate(seg_ids)
    lam = np.concatenate(lams)
    order = np.lexsort((lam, ids))
    ids, lam = ids[order], lam[order]
    same = ids[1:] == ids[:-1]
    piece_len = (lam[1:] - lam[:-1])[same]
    piece_seg = ids[:-1][same]
    lam_mid = 0.5 * (lam[1:] + lam[:-1])[same]
    pos = ua[piece_seg] + lam_mid[:, None] * du[piece_seg]
    cell = np.clip(np.floor(pos).astype(np.int64), 0, bins - 1)
    flat = np.ravel_multi_index(tuple(cell.T), tuple(bins))
    return flat, dt * piece_len, max(outside_time, 0.0)


def occupation_histogram(path: SamplePath, window, box: Box | None = None, bins=None, bin_c: float = DEFAULT_BIN_C,
                         alpha: float | None = None) -> LocalTimeField:
    """Histogram estimate of L(x, window) on the cells of ``box``.

    Without a box, a lattice box of width ``bin_c * dt^alpha`` covering the
    path range is used (``alpha`` from the path's spec, default 1/2).
    """
    i0, i1 = _window_indices(path, window)
    v = path.values[i0 : i1 + 1]
    dt = path.grid.dt
    if box is None:
        a = alpha if alpha is not None else (path.spec.alpha if path.spec is not None else 0.5)
        eps = default_bin_width(dt, a, bin_c)
        box = lattice_box(v, eps)
        if bins is not None:
            box = Box(box.center, box.half_widths, bins)
    elif bins is not None:
        box = Box(box.center, box.half_widths, bins)
    if box.d != path.d:
        raise ValueError(f"box dimension {box.d} does not match path dimension {path.d}")
    flat, time, outside = segment_cell_weights(v, dt, box)
    n_cells = int(np.prod(box.bins))
    occ = np.bincount(flat, weights=time, minlength=n_cells).reshape(box.bins)
    lo, hi = v.min(axis=0), v.max(axis=0)
    contained = bool(np.all(lo >= box.lower) and np.all(hi <= box.lower + 2 * np.asarray(box.half_widths)))
    if not contained:
        warnings.warn("path leaves the box; mass conservation does not apply", RuntimeWarning, stacklevel=2)
    return LocalTimeField(
        box=box,
        window=(float(window[0]), float(window[1])),
        values=occ / box.cell_volume,
        estimator={"kind": "histogram", "bin_widths": box.widths.tolist()},
        contained=contained,
        outside_time=float(outside),
    )


def interval_occupation(values: np.ndarray, dt: float, a: float, b: float) -> np.ndarray:
    """Time each 1-d path (rows of ``values``) spends in ``[a, b)``, linear interpolation.

    Same attribution rule as :func:`occupation_histogram`, vectorized over rows.
    """
    v = np.asarray(values, dtype=float)
    x0, x1 = v[..., :-1], v[..., 1:]
    lo = np.minimum(x0, x1)
    hi = np.maximum(x0, x1)
    span = hi - lo
    overlap = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(span > 0, overlap / span, ((lo >= a) & (lo < b)).astype(float))
    return dt * frac.sum(axis=-1)


def point_localtime(values: np.ndarray, dt: float, x, eps: float) -> np.ndarray:
    """Histogram estimate of L(x) from a bin of width ``eps`` centered at ``x`` (1-d, batched).

    ``x`` may be an array broadcasting against ``values[..., 0]``.
    """
    x = np.asarray(x, dtype=float)[..., None]
    return interval_occupation(values, dt, x - eps / 2, x + eps / 2) / eps


def sup_localtime_1d(values: np.ndarray, dt: float, eps: float) -> np.ndarray:
    """sup_x of the lattice histogram ``eps * Z`` for each row of ``values``."""
    v = np.atleast_2d(np.asarray(values, dtype=float))
    out = np.empty(v.shape[0])
    for i, row in enumerate(v):
        box = lattice_box(row, eps)
        flat, time, _ = segment_cell_weights(row, dt, box)
        occ = np.bincount(flat, weights=time, minlength=box.bins[0])
        out[i] = occ.max() / eps
    return out


# ---------------------------------------------------------------------------
# Fourier route
# ---------------------------------------------------------------------------


def dirichlet_kernel(y, cutoff: float, step: float) -> np.ndarray:
    """sum_k step * cos(xi_k y) over midpoints xi_k of [-cutoff, cutoff] with spacing ``step``."""
    y = np.asarray(y, dtype=float)
    den = np.sin(0.5 * step * y)
    small = np.abs(step * y) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        k = step * np.sin(cutoff * y) / den
    return np.where(small, 2 * cutoff, k)


def fourier_localtime(path: SamplePath, window, x, cutoff: float, freq_step: float | None = None,
                      alpha: float | None = None) -> float:
    """Truncated Fourier inversion estimate of L(x, window).

    ``(2 pi)^-d sum_xi step^d int_window cos(<xi, x - X_s>) ds`` over the
    midpoint frequency lattice of ``[-cutoff, cutoff]^d``.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    i0, i1 = _window_indices(path, window)
    v = path.values[i0 : i1 + 1]
    d = path.d
    x = np.broadcast_to(np.asarray(x, dtype=float), (d,))
    y = x[None, :] - v
    reach = float(np.abs(y).max())
    if freq_step is None:
        freq_step = min(cutoff / 16, math.pi / (reach + 1.0 / cutoff))
    if freq_step > cutoff / 16:
        raise ValueError("freq_step must not exceed cutoff / 16")
    # whole number of midpoint cells
    n_cells = math.ceil(2 * cutoff / freq_step)
    freq_step = 2 * cutoff / n_cells
    if reach * freq_step >= math.pi:
        warnings.warn("frequency step aliases the path range", RuntimeWarning, stacklevel=2)
    a = alpha if alpha is not None else (path.spec.alpha if path.spec is not None else 0.5)
    if cutoff * path.grid.dt**a > 1:
        warnings.warn("cutoff resolves frequencies beyond the path resolution", RuntimeWarning, stacklevel=2)
    k = np.prod(dirichlet_kernel(y, cutoff, freq_step), axis=1)
    dt = path.grid.dt
    integral = dt * (fsum(k) - 0.5 * (k[0] + k[-1]))
    return integral / (2 * math.pi) ** d


def fourier_cell_average(path: SamplePath, window, box: Box, cell, cutoff: float, freq_step: float | None = None,
                         nodes: int = 8) -> float:
    """Fourier estimate averaged over one cell of ``box`` (tensor Gauss-Legendre in x).

    This is the quantity the histogram estimates, so the two routes can be
    compared cell by cell without the spatial roughness of L getting in the way.
    """
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    lo = box.lower + np.asarray(cell) * box.widths
    pts = [lo[a] + 0.5 * box.widths[a] * (gx + 1) for a in range(box.d)]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for idx in np.ndindex(*(nodes,) * box.d):
            x = [pts[a][i] for a, i in enumerate(idx)]
            w = np.prod([gw[i] for i in idx])
            total += w * fourier_localtime(path, window, x, cutoff, freq_step)
    return total / 2**box.d


def fourier_histogram_agreement(path: SamplePath, field: LocalTimeField, cutoff: float | None = None,
                                interior: float = 0.3, max_cells: int = 8, nodes: int = 8) -> dict:
    """Relative gaps between histogram cells and cell-averaged Fourier estimates.

    Interior cells are those holding at least ``interior`` times the maximum;
    up to ``max_cells`` of them, evenly spread, are compared. The default
    cutoff is 6 / (smallest bin width).
    """
    vals = field.values
    cells = np.argwhere(vals >= interior * vals.max())
    if cells.shape[0] > max_cells:
        cells = cells[np.linspace(0, cells.shape[0] - 1, max_cells).round().astype(int)]
    cutoff = cutoff or 6.0 / float(np.min(field.box.widths))
    rows = []
    for cell in cells:
        h = float(vals[tuple(cell)])
        f = fourier_cell_average(path, field.window, field.box, cell, cutoff, nodes=nodes)
        rows.append({"cell": cell.tolist(), "histogram": h, "fourier": f, "rel_diff": abs(f - h) / h})
    worst = max((r["rel_diff"] for r in rows), default=0.0)
    return {"cutoff": cutoff, "cells": rows, "max_rel_diff": worst, "within_5pct": bool(worst <= 0.05)}


def occupation_identity_check(path: SamplePath, field: LocalTimeField, g: Callable) -> float:
    """Relative error between int g(X_s) ds and sum_cells g(center) L vol."""
    i0, i1 = _window_indices(path, field.window)
    v = path.values[i0 : i1 + 1]
    gv = np.asarray(g(v.T if path.d > 1 else v[:, 0]), dtype=float)
    dt = path.grid.dt
    lhs = dt * (fsum(gv) - 0.5 * (gv[0] + gv[-1]))
    if lhs == 0:
        raise ZeroDivisionError("int g(X_s) ds vanishes; relative error undefined")
    centers = field.box.cell_centers()
    cg = np.asarray(g(np.moveaxis(centers, -1, 0) if path.d > 1 else centers[..., 0]), dtype=float)
    rhs = fsum(cg * field.values) * field.box.cell_volume
    return abs(lhs - rhs) / abs(lhs)


# ---------------------------------------------------------------------------
# Modulus of continuity
# ---------------------------------------------------------------------------


def oscillation(values: np.ndarray, lag_steps: int) -> float:
    """max over |i - j| <= lag_steps of ||X_i - X_j||."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[1] == 1:
        # every run of lag_steps + 1 consecutive points is some centered window
        w = lag_steps + 1
        x = v[:, 0]
        mx = maximum_filter1d(x, w, mode="nearest")
        mn = minimum_filter1d(x, w, mode="nearest")
        return float((mx - mn).max())
    best = 0.0
    for k in range(1, lag_steps + 1):
        diff = np.linalg.norm(v[k:] - v[:-k], axis=1)
        best = max(best, float(diff.max()))
    return best


def modulus_of_continuity(path: SamplePath, h_values: Sequence[float], alpha: float | None = None,
                          iota: float | None = None) -> ScalingReport:
    """Maximal oscillation over lags h, log-log slope, and normalized ratios.

    ``extra["corrected_fit"]`` is the slope of log(w(h) / log(1/h)^iota),
    which removes the logarithmic factor of the modulus.
    """
    spec = path.spec
    a = alpha if alpha is not None else (spec.alpha if spec is not None else 0.5)
    io_ = iota if iota is not None else (spec.iota if spec is not None else 0.5)
    h = np.sort(np.asarray(h_values, dtype=float))[::-1]
    dt = path.grid.dt
    steps = np.floor(h / dt + 1e-9).astype(int)
    if np.any(steps < 1) or np.any(steps > path.grid.n_steps):
        raise ValueError("lags must lie between one grid step and the path length")
    omega = np.array([oscillation(path.values, int(k)) for k in steps])
    with np.errstate(divide="ignore"):
        logfac = np.log(1.0 / h) ** io_
    norm = h**a * logfac
    fit = fit_line(np.log(h), np.log(omega))
    corrected = fit_line(np.log(h), np.log(omega / logfac)) if np.all(logfac > 0) else None
    return ScalingReport(
        claim="modulus-of-continuity",
        scale=h,
        stat=omega,
        fit=fit,
        target=a,
        normalizer=norm,
        ratios=omega / norm,
        trend_pvalue=trend_test(omega / norm),
        extra={"corrected_fit": None if corrected is None else corrected.to_dict(), "lag_steps": steps.tolist()},
    )
