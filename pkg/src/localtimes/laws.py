"""Monte Carlo checks of the moment, tail, limsup and Chung-type laws, and the Berman integral.

All laws are asymptotic upper or lower bounds with unknown constants, so
every check is an exponent fit or a trend test, never a constant.
Replica ``i`` of any scan uses ``rng.child(i)`` through the path sampler,
and every reduction runs in replica order, so results do not depend on the
thread count.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .core import (
    HypothesisViolation,
    LineFit,
    ProcessSpec,
    RngStream,
    ScalingReport,
    TimeGrid,
    as_stream,
    fit_line,
    loglog_normalizer,
    make_grid,
    mean_and_se,
    mean_slope,
    trend_test,
)
from .localtime import Box, default_bin_width, lattice_box, point_localtime, segment_cell_weights
from .processes import PathSampler

MAX_BATCH_ELEMENTS = 1 << 23
MIN_EXCEEDANCES = 20
MIN_WINDOW_STEPS = 8


def _batch_size(n_points: int, d: int) -> int:
    return max(1, MAX_BATCH_ELEMENTS // (n_points * d))


def _lag_index(grid: TimeGrid, t: float) -> int:
    k = grid.index(t)
    if abs(grid.point(k) - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"time {t} is not a grid point")
    return k


def point_estimates(paths: np.ndarray, dt: float, x, eps: float) -> np.ndarray:
    """Histogram estimate of L(x) over the whole of each path in a batch.

    ``paths`` has shape ``(n, steps + 1, d)``; ``x`` is a point or one point
    per path. Uses a cube of side ``eps`` centered at ``x``.
    """
    n, _, d = paths.shape
    x = np.broadcast_to(np.asarray(x, dtype=float).reshape(-1, d) if np.ndim(x) else np.full((1, d), float(x)),
                        (n, d))
    if d == 1:
        return point_localtime(paths[..., 0], dt, x[:, 0], eps)
    out = np.empty(n)
    for i in range(n):
        box = Box(tuple(x[i]), (eps / 2,) * d, (1,) * d)
        _, time, _ = segment_cell_weights(paths[i], dt, box)
        out[i] = time.sum() / box.cell_volume
    return out


def sup_estimate(values: np.ndarray, dt: float, eps: float) -> float:
    """max over cells of the lattice histogram ``eps Z^d`` (cells met by the path)."""
    box = lattice_box(values, eps)
    flat, time, _ = segment_cell_weights(values, dt, box)
    occ = np.bincount(flat, weights=time, minlength=int(np.prod(box.bins)))
    return float(occ.max() / box.cell_volume)


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------


@dataclass
class MomentReport:
    claim: str
    n_list: list
    lag_list: np.ndarray
    estimates: np.ndarray  # (len(n_list), len(lag_list))
    std_errors: np.ndarray
    fitted_slopes: list
    target_slopes: list
    tolerance: list
    passed: list
    resolution_flags: list
    extra: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(self.passed)

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "n_list": list(self.n_list),
            "lag_list": np.asarray(self.lag_list, dtype=float).tolist(),
            "estimates": np.asarray(self.estimates, dtype=float).tolist(),
            "std_errors": np.asarray(self.std_errors, dtype=float).tolist(),
            "fitted_slopes": [f.to_dict() for f in self.fitted_slopes],
            "target_slopes": list(self.target_slopes),
            "tolerance": list(self.tolerance),
            "passed": list(self.passed),
            "resolution_flags": list(self.resolution_flags),
            "extra": self.extra,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "lag", "estimate", "std_error", "resolution_flag"])
        for a, n in enumerate(self.n_list):
            for b, lag in enumerate(self.lag_list):
                w.writerow([n, repr(float(lag)), repr(float(self.estimates[a, b])),
                            repr(float(self.std_errors[a, b])), int(self.resolution_flags[b])])
        return buf.getvalue()


def _moment_table(samples: np.ndarray, n_list) -> tuple[np.ndarray, np.ndarray]:
    """samples (lags, replicas) -> estimates and standard errors of E|.|^n."""
    est = np.empty((len(n_list), samples.shape[0]))
    se = np.empty_like(est)
    for a, n in enumerate(n_list):
        for b in range(samples.shape[0]):
            est[a, b], se[a, b] = mean_and_se(np.abs(samples[b]) ** n)
    return est, se


def _fit_moments(lags, est, se, n_list):
    """Weighted log-log fits; returns the slopes and the levels used."""
    fits = []
    for a in range(len(n_list)):
        y = est[a]
        ok = (y > 0) & np.isfinite(se[a]) & (se[a] > 0)
        w = (y[ok] / se[a][ok]) ** 2  # delta method: Var(log y) ~ (se/y)^2
        fits.append(fit_line(np.log(lags[ok]), np.log(y[ok]), weights=w))
    return fits


def moment_scan(spec: ProcessSpec, x, n_list, lag_list, replicas: int, rng: RngStream | int | None,
                n_steps: int = 1 << 14, T: float = 1.0, start: float = 0.0, shifted: bool = False,
                bin_c: float = 2.0, threads: int = 1) -> MomentReport:
    """E|L(x, [a, a + lag])|^n for each order and lag, from one batch of paths per replica.

    ``a = start``. In shifted mode the level is ``x + X_a`` (random, per path).
    Since L(x, [a, a]) = 0 this is the moment of the increment L(x, t) - L(x, s).
    """
    spec.require_local_time()
    rng = as_stream(rng)
    lags = np.asarray(sorted(float(v) for v in lag_list), dtype=float)
    if lags.size < 2:
        raise ValueError("need at least two lags")
    if lags[0] <= 0 or start + lags[-1] > T + 1e-12:
        raise ValueError("lags must lie in (0, T - start]")
    grid = make_grid(0.0, T, n_steps)
    dt = grid.dt
    eps = default_bin_width(dt, spec.alpha, bin_c)
    i0 = _lag_index(grid, start)
    ends = [_lag_index(grid, start + lag) for lag in lags]
    if ends[0] - i0 < 1:
        raise ValueError("smallest lag is shorter than one grid step")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 1:
        x = np.full(spec.d, x[0])
    sampler = PathSampler(spec, grid)
    samples = np.empty((lags.size, replicas))
    last = max(ends)
    for s0, paths in sampler.sample_batches(rng, replicas, _batch_size(last + 1, spec.d), threads):
        level = x[None, :] + (paths[:, i0] if shifted else 0.0)
        for b, e in enumerate(ends):
            samples[b, s0 : s0 + paths.shape[0]] = point_estimates(paths[:, i0 : e + 1], dt, level, eps)
    n_list = [int(n) for n in n_list]
    est, se = _moment_table(samples, n_list)
    fits = _fit_moments(lags, est, se, n_list)
    ad = spec.alpha * spec.d
    targets = [(1 - ad) * n for n in n_list]
    tol = [0.1 * n for n in n_list]
    passed = [bool(abs(f.slope - t) <= tl) for f, t, tl in zip(fits, targets, tol)]
    # bin width against the spatial spread lag^alpha that the increment lives on
    flags = [bool(eps > 0.1 * lag**spec.alpha) for lag in lags]
    return MomentReport(
        claim="local-time-moment-bound" + ("-shifted" if shifted else ""),
        n_list=n_list, lag_list=lags, estimates=est, std_errors=se, fitted_slopes=fits,
        target_slopes=targets, tolerance=tol, passed=passed, resolution_flags=flags,
        extra={"bin_width": eps, "n_steps": n_steps, "start": start, "x": x.tolist(), "shifted": shifted,
               "replicas": replicas},
    )


def holder_increment_scan(spec: ProcessSpec, x, y_list, gamma: float, window, replicas: int,
                          rng: RngStream | int | None, n_steps: int = 1 << 14, n: int = 1, bin_c: float = 2.0,
                          threads: int = 1) -> MomentReport:
    """E|L(x + y, window) - L(x, window)|^n against |y|; pass if the slope is at least gamma - 0.1.

    ``y_list`` holds scalar offsets (along the first axis) or vectors.
    """
    spec.require_local_time()
    a_, d_ = spec.alpha, spec.d
    gmax = min(1.0, (1 - a_ * d_) / (2 * a_))
    if not 0 <= gamma < gmax:
        raise ValueError(f"gamma must lie in [0, {gmax:g})")
    rng = as_stream(rng)
    s, t = float(window[0]), float(window[1])
    grid = make_grid(0.0, t, n_steps)
    dt = grid.dt
    eps = default_bin_width(dt, a_, bin_c)
    i0 = _lag_index(grid, s)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 1:
        x = np.full(d_, x[0])
    ys = []
    for y in y_list:
        y = np.asarray(y, dtype=float).reshape(-1)
        ys.append(np.concatenate([y, np.zeros(d_ - 1)]) if y.size == 1 else y)
    ys = np.asarray(ys)
    norms = np.linalg.norm(ys, axis=1)
    order = np.argsort(norms)
    ys, norms = ys[order], norms[order]
    sampler = PathSampler(spec, grid)
    samples = np.empty((len(ys), replicas))
    for s0, paths in sampler.sample_batches(rng, replicas, _batch_size(n_steps + 1, d_), threads):
        sub = paths[:, i0:]
        base = point_estimates(sub, dt, x, eps)
        for b, y in enumerate(ys):
            if norms[b] == 0:
                samples[b, s0 : s0 + sub.shape[0]] = 0.0
            else:
                samples[b, s0 : s0 + sub.shape[0]] = point_estimates(sub, dt, x + y, eps) - base
    est, se = _moment_table(samples, [n])
    pos = norms > 0
    fit = _fit_moments(norms[pos], est[:, pos], se[:, pos], [n])[0]
    target = gamma * n
    flags = [bool(nm > 0 and eps > 0.5 * nm) for nm in norms]
    return MomentReport(
        claim="local-time-space-increment-bound",
        n_list=[n], lag_list=norms, estimates=est, std_errors=se, fitted_slopes=[fit],
        target_slopes=[target], tolerance=[0.1], passed=[bool(fit.slope >= target - 0.1)],
        resolution_flags=flags,
        extra={"bin_width": eps, "gamma": gamma, "gamma_max": gmax, "window": [s, t], "replicas": replicas},
    )


# ---------------------------------------------------------------------------
# Tails
# ---------------------------------------------------------------------------


@dataclass
class TailReport:
    claim: str
    u_grid: np.ndarray
    thresholds: np.ndarray
    probabilities: np.ndarray
    exceedances: np.ndarray
    used: np.ndarray  # levels with enough exceedances
    fit: LineFit | None
    rate: float
    convex_decreasing: bool
    passed: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "u_grid": self.u_grid.tolist(),
            "thresholds": self.thresholds.tolist(),
            "probabilities": self.probabilities.tolist(),
            "exceedances": self.exceedances.tolist(),
            "used": self.used.tolist(),
            "fit": None if self.fit is None else self.fit.to_dict(),
            "rate": self.rate,
            "convex_decreasing": self.convex_decreasing,
            "passed": self.passed,
            "extra": self.extra,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "threshold", "probability", "exceedances", "used"])
        for row in zip(self.u_grid, self.thresholds, self.probabilities, self.exceedances, self.used):
            w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), int(row[3]), int(row[4])])
        return buf.getvalue()


def tail_probe(spec: ProcessSpec, interval, u_grid, replicas: int, rng: RngStream | int | None,
               x=0.0, shifted: bool = False, n_steps: int = 1 << 12, bin_c: float = 2.0,
               fit_from: float = 1.0, threads: int = 1) -> TailReport:
    """P(L(x, I) >= |I|^(1 - alpha d) u^(alpha (d + theta))) over ``u_grid``.

    Levels with fewer than 20 exceedances are dropped from the fit (and
    reported), as are levels below ``fit_from`` and levels every replica
    exceeds (u = 0 is a baseline only). The decay rate is minus the slope
    of a weighted least-squares line through log P against u, with
    binomial variances.
    """
    spec.require_local_time()
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ValueError("empty interval")
    rng = as_stream(rng)
    grid = make_grid(0.0, b, n_steps)
    i0 = _lag_index(grid, a)
    eps = default_bin_width(grid.dt, spec.alpha, bin_c)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 1:
        x = np.full(spec.d, x[0])
    sampler = PathSampler(spec, grid)
    L = np.empty(replicas)
    for s0, paths in sampler.sample_batches(rng, replicas, _batch_size(n_steps + 1, spec.d), threads):
        level = x[None, :] + (paths[:, i0] if shifted else 0.0)
        L[s0 : s0 + paths.shape[0]] = point_estimates(paths[:, i0:], grid.dt, level, eps)
    u = np.asarray(sorted(float(v) for v in u_grid))
    ad = spec.alpha * spec.d
    thr = (b - a) ** (1 - ad) * u ** (spec.alpha * (spec.d + spec.theta))
    exc = np.array([int(np.count_nonzero(L >= t)) for t in thr])
    p = exc / replicas
    used = (exc >= MIN_EXCEEDANCES) & (u >= fit_from) & (exc < replicas)
    fit, rate, convex = None, float("nan"), False
    if used.sum() >= 3:
        uu, pp = u[used], p[used]
        var_log = (1 - pp) / (replicas * pp)
        w = 1.0 / var_log
        fit = fit_line(uu, np.log(pp), weights=w)
        rate = -fit.slope
        lp = np.log(pp)
        sd = np.sqrt(var_log)
        dec = np.all(np.diff(lp) <= 3 * (sd[1:] + sd[:-1]))
        # second differences on an arbitrary u grid: slopes must not decrease
        slopes = np.diff(lp) / np.diff(uu)
        slope_sd = (sd[1:] + sd[:-1]) / np.diff(uu)
        convex = bool(dec and np.all(np.diff(slopes) >= -3 * (slope_sd[1:] + slope_sd[:-1])))
    passed = bool(fit is not None and rate > 0 and fit.ci_high < 0 and convex)
    return TailReport(
        claim="local-time-exponential-tail" + ("-shifted" if shifted else ""),
        u_grid=u, thresholds=thr, probabilities=p, exceedances=exc, used=used, fit=fit, rate=rate,
        convex_decreasing=convex, passed=passed,
        extra={"interval": [a, b], "replicas": replicas, "bin_width": eps, "dropped_levels": u[(exc < MIN_EXCEEDANCES)].tolist(),
               "fit_from": fit_from,
               "mean": mean_and_se(L)[0]},
    )


# ---------------------------------------------------------------------------
# Limsup and Chung-type scans
# ---------------------------------------------------------------------------


def _radii(grid: TimeGrid, s: float, n_range, need_loglog: bool = True) -> list[tuple[int, float, int]]:
    out = []
    for n in sorted(int(v) for v in n_range):
        r = 2.0**-n
        if need_loglog and r >= math.exp(-1):
            continue
        k = round(r / grid.dt)
        if k < MIN_WINDOW_STEPS:
            raise ValueError(f"radius 2^-{n} is below {MIN_WINDOW_STEPS} grid steps")
        if s - r < grid.t_start - 1e-12 or s + r > grid.t_end + 1e-12:
            raise ValueError(f"window [{s}-r, {s}+r] leaves the grid for r = 2^-{n}")
        out.append((n, r, k))
    if len(out) < 2:
        raise ValueError("need at least two admissible radii")
    return out


def limsup_ratio_scan(spec: ProcessSpec, s: float, n_range, replicas: int, rng: RngStream | int | None,
                      n_steps: int = 1 << 16, T: float = 1.0, bin_c: float = 2.0, threads: int = 1,
                      trend_level: float = 1e-3) -> ScalingReport:
    """sup_x L(x, [s - r, s + r]) over dyadic radii r = 2^-n.

    The slope of the replica mean of log sup_x L against log r estimates
    1 - alpha d. Normalized ratios against g(r) (log log variant; the log
    variant is reported alongside) must show no increasing trend as r
    shrinks.
    """
    spec.require_local_time()
    rng = as_stream(rng)
    grid = make_grid(0.0, T, n_steps)
    ic = _lag_index(grid, s)
    levels = _radii(grid, s, n_range)
    eps = default_bin_width(grid.dt, spec.alpha, bin_c)
    sampler = PathSampler(spec, grid)
    sup = np.empty((replicas, len(levels)))
    for s0, paths in sampler.sample_batches(rng, replicas, _batch_size(n_steps + 1, spec.d), threads):
        for i in range(paths.shape[0]):
            for j, (_, _, k) in enumerate(levels):
                sup[s0 + i, j] = sup_estimate(paths[i, ic - k : ic + k + 1], grid.dt, eps)
    r = np.array([lv[1] for lv in levels])
    logs = np.log(sup)
    mean_log = logs.mean(axis=0)
    se_log = logs.std(axis=0, ddof=1) / math.sqrt(replicas) if replicas > 1 else np.full(r.size, np.nan)
    fit = fit_line(np.log(r), mean_log, weights=None if replicas < 2 else 1.0 / se_log**2)
    g = loglog_normalizer(r, spec.alpha, spec.d, spec.theta, "loglog")
    g_log = loglog_normalizer(r, spec.alpha, spec.d, spec.theta, "log")
    ratios = sup / g[None, :]
    mean_ratio = ratios.mean(axis=0)
    p_trend = trend_test(mean_ratio, "greater")  # radii are stored decreasing
    target = 1 - spec.alpha * spec.d
    passed = bool(abs(fit.slope - target) <= 0.1 and p_trend >= trend_level)
    return ScalingReport(
        claim="local-time-limsup-fixed-center",
        scale=r, stat=np.exp(mean_log), fit=fit, target=target, tolerance=0.1, normalizer=g,
        ratios=mean_ratio, trend_pvalue=p_trend, passed=passed,
        extra={
            "levels": [lv[0] for lv in levels],
            "ratio_max": ratios.max(axis=0).tolist(),
            "ratio_q90": np.quantile(ratios, 0.9, axis=0).tolist(),
            "replica_max_ratio": ratios.max(axis=1).tolist(),
            "ratios_log_variant": (sup / g_log[None, :]).mean(axis=0).tolist(),
            "normalizer_log_variant": g_log.tolist(),
            "bin_width": eps, "n_steps": n_steps, "center": s, "replicas": replicas,
        },
    )


def chung_ratio_scan(spec: ProcessSpec, s_grid, n_range, replicas: int, rng: RngStream | int | None,
                     n_steps: int = 1 << 14, T: float = 1.0, threads: int = 1) -> ScalingReport:
    """sup_{|t - s| < r} |X_t - X_s| over dyadic radii and a grid of centers.

    The slope of the mean log oscillation against log r estimates alpha d;
    the per-level minimum (over centers and replicas) of the oscillation
    divided by r^(alpha d) (log log 1/r)^(-alpha (d + theta)) must stay
    above a positive floor.
    """
    rng = as_stream(rng)
    grid = make_grid(0.0, T, n_steps)
    centers = [_lag_index(grid, float(s)) for s in s_grid]
    levels = None
    for s in s_grid:
        lv = _radii(grid, float(s), n_range)
        levels = lv if levels is None else levels
    sampler = PathSampler(spec, grid)
    osc = np.empty((replicas, len(centers), len(levels)))
    for s0, paths in sampler.sample_batches(rng, replicas, _batch_size(n_steps + 1, spec.d), threads):
        for c, ic in enumerate(centers):
            for j, (_, _, k) in enumerate(levels):
                seg = paths[:, ic - k : ic + k + 1] - paths[:, ic : ic + 1]
                osc[s0 : s0 + paths.shape[0], c, j] = np.linalg.norm(seg, axis=2).max(axis=1)
    r = np.array([lv[1] for lv in levels])
    ad = spec.alpha * spec.d
    g = r**ad * np.log(np.log(1 / r)) ** (-spec.alpha * (spec.d + spec.theta))
    logs = np.log(osc)
    mean_log = logs.mean(axis=(0, 1))
    # per-replica slopes, averaged (centers of one replica are dependent)
    lr = np.log(r)
    per = logs.mean(axis=1)
    slopes = ((per - per.mean(axis=1, keepdims=True)) * (lr - lr.mean())).sum(axis=1) / ((lr - lr.mean()) ** 2).sum()
    fit = mean_slope(slopes) if replicas > 1 else fit_line(lr, mean_log)
    fit = LineFit(fit.slope, float(mean_log.mean() - fit.slope * lr.mean()), fit.slope_se, fit.ci_low, fit.ci_high)
    ratios = osc / g[None, None, :]
    floor = ratios.min(axis=(0, 1))
    passed = bool(abs(fit.slope - ad) <= 0.1 and np.all(floor > 0))
    return ScalingReport(
        claim="oscillation-chung-lower-bound",
        scale=r, stat=np.exp(mean_log), fit=fit, target=ad, tolerance=0.1, normalizer=g,
        ratios=floor, trend_pvalue=trend_test(floor, "less"), passed=passed,
        extra={"levels": [lv[0] for lv in levels], "centers": [float(s) for s in s_grid],
               "ratio_mean": ratios.mean(axis=(0, 1)).tolist(), "floor": float(floor.min()),
               "n_steps": n_steps, "replicas": replicas},
    )


# ---------------------------------------------------------------------------
# Berman integral
# ---------------------------------------------------------------------------


@dataclass
class BermanReport:
    cutoffs: np.ndarray
    partial: np.ndarray
    shells: np.ndarray
    ratios: np.ndarray
    verdict: str  # converges | diverges | inconclusive
    extrapolated: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "cutoffs": self.cutoffs.tolist(),
            "partial": self.partial.tolist(),
            "shells": self.shells.tolist(),
            "ratios": self.ratios.tolist(),
            "verdict": self.verdict,
            "extrapolated": self.extrapolated,
            "extra": self.extra,
        }


def _time_integral(charfn, rho: np.ndarray, d: int, T: float, nodes: int = 16, depth: int = 60) -> np.ndarray:
    """int_0^T int_0^T |phi(rho e_1, |t - s|)| ds dt = 2 int_0^T (T - u) |phi(rho e_1, u)| du.

    Gauss-Legendre on dyadic pieces [T 2^-(j+1), T 2^-j] resolves the scale
    u ~ rho^(-1/alpha) for every rho at once.
    """
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    edges = T * 2.0 ** -np.arange(depth + 1)
    lo, hi = edges[1:], edges[:-1]
    half = 0.5 * (hi - lo)
    u = (lo[:, None] + half[:, None] * (gx + 1)).ravel()
    w = (half[:, None] * gw).ravel()
    # the piece [0, T 2^-depth] contributes at most 2 T 2^-depth
    xi = np.zeros(rho.shape + (u.size, d))
    xi[..., 0] = rho[..., None]
    phi = np.abs(charfn(xi, np.broadcast_to(u, rho.shape + (u.size,))))
    return 2 * (phi * ((T - u) * w)).sum(axis=-1) + 2 * T * edges[-1]


def berman_integrand(charfn, rho, d: int, T: float) -> np.ndarray:
    """The time double integral at frequency radius ``rho`` (equals T^2 at 0)."""
    return _time_integral(charfn, np.atleast_1d(np.asarray(rho, dtype=float)), d, T)


def berman_criterion(charfn, alpha: float, d: int, T: float = 1.0, levels: int = 14, base: float = 1.0,
                     nodes: int = 24, low: float = 0.9, high: float = 1.1, tail: int = 3) -> BermanReport:
    """Partial integrals of the Berman integrand over balls |xi| <= base 2^k.

    ``charfn(xi, lag)`` must be rotation invariant in ``xi`` (true for the
    Gaussian providers with i.i.d. components and in d = 1), so the xi
    integral reduces to a radial one with the sphere area 2 pi^(d/2)/Gamma(d/2).
    The verdict looks at the last ``tail`` shell ratios: all below ``low``
    means convergence, all above ``high`` divergence, otherwise inconclusive.
    """
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    area = 2 * math.pi ** (d / 2) / special.gamma(d / 2)
    cut = base * 2.0 ** np.arange(levels + 1)
    edges = np.concatenate([[0.0], cut])
    shells = np.empty(levels + 1)
    for k in range(levels + 1):
        a, b = edges[k], edges[k + 1]
        rho = 0.5 * (b - a) * (gx + 1) + a
        f = _time_integral(charfn, rho, d, T)
        shells[k] = area * 0.5 * (b - a) * float(np.sum(gw * rho ** (d - 1) * f))
    partial = np.cumsum(shells)
    ratios = shells[1:] / shells[:-1]
    last = ratios[-tail:]
    if np.all(last < low):
        verdict = "converges"
        q = float(last[-1])
        extrapolated = float(partial[-1] + shells[-1] * q / (1 - q))
    elif np.all(last > high):
        verdict = "diverges"
        extrapolated = math.inf
    else:
        verdict = "inconclusive"
        extrapolated = float("nan")
    return BermanReport(cut, partial, shells, ratios, verdict, extrapolated,
                        extra={"alpha": alpha, "d": d, "T": T, "alpha_d": alpha * d,
                               "predicted_ratio": 2.0 ** (d - 1 / alpha)})


__all__ = [
    "HypothesisViolation",
    "MomentReport",
    "TailReport",
    "BermanReport",
    "point_estimates",
    "sup_estimate",
    "moment_scan",
    "holder_increment_scan",
    "tail_probe",
    "limsup_ratio_scan",
    "chung_ratio_scan",
    "berman_integrand",
    "berman_criterion",
]
