"""Shared types: time grids, process descriptions, sample paths, seeded streams.

Every random draw in the package flows through :class:`RngStream`, a keyed
Philox (counter-based) generator. A stream is identified by
``(master_seed, stream_id)`` where ``stream_id`` is a tuple of non-negative
integers, typically ``(experiment, replica)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats

PROCESS_CLASSES = ("fbm", "gaussian-quasi-helix", "rosenblatt", "fbm-sde")


class HypothesisViolation(ValueError):
    """Raised when a process does not satisfy alpha * d < 1."""


# ---------------------------------------------------------------------------
# Time grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not (self.t_start >= 0):
            raise ValueError(f"t_start must be >= 0, got {self.t_start}")
        if not (self.t_end > self.t_start):
            raise ValueError(f"t_end must exceed t_start, got [{self.t_start}, {self.t_end}]")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    def point(self, k: int) -> float:
        if k == self.n_steps:
            return float(self.t_end)
        return self.t_start + k * self.dt

    @property
    def points(self) -> np.ndarray:
        # multiplication, not accumulation; endpoint pinned
        pts = self.t_start + np.arange(self.n_steps + 1) * self.dt
        pts[-1] = self.t_end
        return pts

    def index(self, t: float) -> int:
        """Nearest grid index of time ``t``."""
        k = int(round((t - self.t_start) / self.dt))
        if k < 0 or k > self.n_steps:
            raise ValueError(f"time {t} outside grid [{self.t_start}, {self.t_end}]")
        return k

    def to_dict(self) -> dict:
        return {"t_start": self.t_start, "t_end": self.t_end, "n_steps": self.n_steps}


def make_grid(t_start: float, t_end: float, n_steps: int) -> TimeGrid:
    return TimeGrid(float(t_start), float(t_end), n_steps)


# ---------------------------------------------------------------------------
# Process specification
# ---------------------------------------------------------------------------

_DEFAULT_THETA_IOTA = {
    "fbm": lambda h: (0.0, 0.5),
    "gaussian-quasi-helix": lambda h: (0.0, 0.5),
    "rosenblatt": lambda h: (0.0, 1.0),
    "fbm-sde": lambda h: (4.0 / h, 0.5),
}


@dataclass(frozen=True)
class ProcessSpec:
    """Declarative description of a process.

    ``alpha`` is the regularity exponent (the Hurst index for every
    implemented class); ``theta`` and ``iota`` are the growth and modulus
    exponents and default per class.
    """

    kind: str
    d: int = 1
    alpha: float = 0.5
    theta: float | None = None
    iota: float | None = None
    params: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        if self.kind not in PROCESS_CLASSES:
            raise ValueError(f"unknown process class {self.kind!r}; expected one of {PROCESS_CLASSES}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.kind == "rosenblatt":
            if self.d != 1:
                raise ValueError("the Rosenblatt process is one-dimensional")
            if not 0.5 < self.alpha < 1:
                raise ValueError("Rosenblatt requires H in (1/2, 1)")
        theta, iota = _DEFAULT_THETA_IOTA[self.kind](self.alpha)
        if self.theta is None:
            object.__setattr__(self, "theta", theta)
        if self.iota is None:
            object.__setattr__(self, "iota", iota)
        if self.theta < 0:
            raise ValueError("theta must be >= 0")
        if not 0 <= self.iota <= 1:
            raise ValueError("iota must lie in [0, 1]")

    @property
    def hurst(self) -> float:
        return self.alpha

    def require_local_time(self) -> None:
        """Check the local-time hypothesis alpha in (0, 1/d)."""
        if self.alpha * self.d >= 1:
            raise HypothesisViolation(
                f"alpha * d = {self.alpha * self.d:g} >= 1: local-time results need alpha in (0, 1/d) "
                f"(alpha={self.alpha:g}, d={self.d})"
            )

    def to_dict(self) -> dict:
        return {
            "class": self.kind,
            "d": self.d,
            "alpha": self.alpha,
            "theta": self.theta,
            "iota": self.iota,
            "params": dict(self.params),
        }


@dataclass(frozen=True)
class SamplePath:
    grid: TimeGrid
    values: np.ndarray  # shape (n_steps + 1, d)
    seed: Any = None
    spec: ProcessSpec | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.n_steps + 1:
            raise ValueError(f"expected {self.grid.n_steps + 1} values, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample path contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    def scaled(self, c: float) -> "SamplePath":
        return SamplePath(self.grid, c * self.values, self.seed, self.spec)

    def shifted(self, x: Sequence[float]) -> "SamplePath":
        return SamplePath(self.grid, self.values + np.asarray(x, dtype=float), self.seed, self.spec)


# ---------------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Keyed counter-based stream.

    The Philox key is derived from ``SeedSequence(master_seed,
    spawn_key=stream_id)``; distinct ids give distinct 128-bit keys (up to
    hash collisions of probability ~2^-128), and Philox streams under
    distinct keys are independent for all practical purposes.
    """

    master_seed: int
    stream_id: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & (2**64 - 1))
        object.__setattr__(self, "stream_id", tuple(int(i) for i in self.stream_id))
        if any(i < 0 for i in self.stream_id):
            raise ValueError("stream ids must be non-negative")

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_id)
        key = ss.generate_state(2, dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *idx: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id + tuple(idx))


def substream(master_seed: int, stream_id: Sequence[int]) -> RngStream:
    return RngStream(master_seed, tuple(stream_id))


def as_stream(rng: RngStream | int | None) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    return RngStream(0 if rng is None else int(rng))


# ---------------------------------------------------------------------------
# Numerics
# ---------------------------------------------------------------------------


def fsum(values) -> float:
    """Compensated sum (exactly rounded) of an array-like."""
    return math.fsum(np.ravel(np.asarray(values, dtype=float)))


def fmean(values) -> float:
    a = np.ravel(np.asarray(values, dtype=float))
    return math.fsum(a) / a.size


def mean_and_se(values) -> tuple[float, float]:
    a = np.ravel(np.asarray(values, dtype=float))
    m = fmean(a)
    if a.size < 2:
        return m, float("nan")
    var = math.fsum((a - m) ** 2) / (a.size - 1)
    return m, math.sqrt(var / a.size)


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_se: float
    ci_low: float
    ci_high: float

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_se": self.slope_se,
            "ci": [self.ci_low, self.ci_high],
        }


def fit_line(x, y, weights=None, level: float = 0.95) -> LineFit:
    """(Weighted) least squares line with a t-based confidence interval."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two points for a line fit")
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    if n > 2:
        resid = y - intercept - slope * x
        if weights is None:
            s2 = (resid**2).sum() / (n - 2)
            se = math.sqrt(s2 / sxx)
            q = stats.t.ppf(0.5 + level / 2, n - 2)
        else:
            # weights are inverse variances
            se = math.sqrt(1.0 / sxx)
            q = stats.norm.ppf(0.5 + level / 2)
    else:
        se, q = float("nan"), float("nan")
    return LineFit(float(slope), float(intercept), float(se), float(slope - q * se), float(slope + q * se))


def mean_slope(slopes, level: float = 0.95) -> LineFit:
    """Average of per-replica slopes with a t interval."""
    s = np.asarray(slopes, dtype=float)
    s = s[np.isfinite(s)]
    m, se = mean_and_se(s)
    q = stats.t.ppf(0.5 + level / 2, max(s.size - 1, 1))
    return LineFit(m, float("nan"), se, m - q * se, m + q * se)


def trend_test(values, alternative: str = "greater") -> float:
    """Mann-Kendall trend test p-value (Kendall tau against sequence order)."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return 1.0
    res = stats.kendalltau(np.arange(v.size), v, alternative=alternative)
    return float(res.pvalue)


def loglog_normalizer(r, alpha: float, d: int, theta: float, variant: str = "loglog"):
    """r^(1 - alpha d) (log log 1/r)^(alpha (d + theta)), or the log variant."""
    r = np.asarray(r, dtype=float)
    if variant == "loglog":
        if np.any(r >= math.exp(-1)):
            raise ValueError("log log normalizer needs r < 1/e")
        lg = np.log(np.log(1.0 / r))
    elif variant == "log":
        lg = np.log(1.0 / r)
    else:
        raise ValueError(f"unknown normalizer variant {variant!r}")
    return r ** (1 - alpha * d) * lg ** (alpha * (d + theta))


def map_ordered(fn: Callable[[int], Any], n: int, threads: int = 1) -> list:
    """``[fn(i) for i in range(n)]``, optionally on a thread pool; order preserved."""
    if threads is None or threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(n)))


@dataclass
class ScalingReport:
    """Per-level scaling experiment record.

    ``scale`` holds radii or lags (decreasing), ``stat`` the per-level
    statistic, ``ratios`` the statistic divided by ``normalizer``.
    """

    claim: str
    scale: np.ndarray
    stat: np.ndarray
    fit: LineFit | None = None
    target: float | None = None
    tolerance: float | None = None
    normalizer: np.ndarray | None = None
    ratios: np.ndarray | None = None
    trend_pvalue: float | None = None
    passed: bool | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a, dtype=float).tolist()

        return {
            "claim": self.claim,
            "scale": arr(self.scale),
            "stat": arr(self.stat),
            "fit": None if self.fit is None else self.fit.to_dict(),
            "target": self.target,
            "tolerance": self.tolerance,
            "normalizer": arr(self.normalizer),
            "ratios": arr(self.ratios),
            "trend_pvalue": self.trend_pvalue,
            "passed": self.passed,
            "extra": self.extra,
        }
