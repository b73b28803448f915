"""Deterministic checks of the combinatorial and integral identities.

* ``alpha_table``: the triangle defined by
  ``alpha_h(k+1) = h alpha_h(k) + alpha_{h-1}(k)`` with unit boundary values,
  kept in Python integers, cross-checked against brute-force enumeration of
  set partitions.
* ``beta_identity_check``: int_0^t (t-s)^a s^b ds = t^(1+a+b) B(1+a, 1+b).
* ``simplex_integral_check``: ordered-simplex integrals of products of
  power gaps, closed form against Monte Carlo.
* ``gamma_ratio_bound_check``: minimal C_n in Gamma(n+1)/Gamma(beta n) <= C^n n^((1-beta) n).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .core import RngStream, as_stream, mean_and_se, trend_test

# ---------------------------------------------------------------------------
# alpha_h(k)
# ---------------------------------------------------------------------------


@dataclass
class AlphaTable:
    k_max: int
    rows: list  # rows[k][h] for 0 <= h <= k, index 0 unused

    def __call__(self, h: int, k: int) -> int:
        if k < 1 or k > self.k_max:
            raise IndexError(f"k={k} outside table (k_max={self.k_max})")
        if h < 1 or h > k:
            return 0
        return self.rows[k][h]

    def entries(self):
        for k in range(1, self.k_max + 1):
            for h in range(1, k + 1):
                yield h, k, self.rows[k][h]

    def bound_ok(self) -> dict:
        """Per k, whether max_h alpha_h(k) <= k^k."""
        return {k: max(self.rows[k][1:]) <= k**k for k in range(1, self.k_max + 1)}

    def minimal_constant(self) -> dict:
        """Per k, the smallest C with max_h alpha_h(k) <= C^k k^k."""
        out = {}
        for k in range(1, self.k_max + 1):
            m = max(self.rows[k][1:])
            out[k] = math.exp((math.log(m) - k * math.log(k)) / k)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "h", "alpha", "bound_k_pow_k_ok"])
        for h, k, a in self.entries():
            w.writerow([k, h, a, int(a <= k**k)])
        return buf.getvalue()


def alpha_table(k_max: int) -> AlphaTable:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    rows = [[0], [0, 1]]
    for k in range(1, k_max):
        prev = rows[k]
        nxt = [0] * (k + 2)
        nxt[1] = 1
        nxt[k + 1] = 1
        for h in range(2, k + 1):
            nxt[h] = h * prev[h] + prev[h - 1]
        rows.append(nxt)
    return AlphaTable(k_max, rows)


def enumerate_set_partitions(k: int) -> np.ndarray:
    """All partitions of {0..k-1} as restricted growth strings, shape (count, k).

    Row ``a`` has ``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``; the block
    count is ``max(a) + 1``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    strings = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for _ in range(1, k):
        reps = (maxes + 2).astype(np.int64)
        parent = np.repeat(np.arange(strings.shape[0]), reps)
        starts = np.cumsum(reps) - reps
        nxt = (np.arange(parent.size) - np.repeat(starts, reps)).astype(np.int8)
        strings = np.concatenate([strings[parent], nxt[:, None]], axis=1)
        maxes = np.maximum(maxes[parent], nxt)
    return strings


def partition_counts(k: int) -> np.ndarray:
    """counts[h] = number of partitions of a k-set into h blocks, by enumeration."""
    rgs = enumerate_set_partitions(k)
    return np.bincount(rgs.max(axis=1).astype(np.int64) + 1, minlength=k + 1)


def check_alpha_against_enumeration(table: AlphaTable, k_limit: int = 12) -> dict:
    mismatches = []
    for k in range(1, min(k_limit, table.k_max) + 1):
        counts = partition_counts(k)
        for h in range(1, k + 1):
            if int(counts[h]) != table(h, k):
                mismatches.append((h, k, table(h, k), int(counts[h])))
    return {"k_limit": min(k_limit, table.k_max), "mismatches": mismatches, "passed": not mismatches}


def alpha_sharpness_probe(k_list, delta: float) -> dict:
    """Lower bound alpha_j(k) >= j^(k-j) at j = ceil(delta k), and log alpha / (k log k)."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    ks = sorted(int(k) for k in k_list)
    table = alpha_table(max(ks))
    rows = []
    for k in ks:
        j = max(1, math.ceil(delta * k))
        a = table(j, k)
        ratio = math.log(a) / (k * math.log(k)) if k > 1 else 0.0
        rows.append({"k": k, "j": j, "alpha": a, "lower": j ** (k - j), "holds": a >= j ** (k - j), "ratio": ratio})
    ratios = [r["ratio"] for r in rows]
    # ceil(delta k) makes the sequence zigzag with the parity of k, so the
    # upward drift is judged by a rank trend test rather than step by step
    return {"delta": delta, "rows": rows, "all_hold": all(r["holds"] for r in rows),
            "trend_pvalue": trend_test(ratios, "greater"), "limit": 1 - delta,
            "final_gap": abs(ratios[-1] - (1 - delta))}


# ---------------------------------------------------------------------------
# Beta identity
# ---------------------------------------------------------------------------


def _power_split_integral(theta1: float, theta2: float, t: float) -> float:
    """int_0^t (t-s)^theta1 s^theta2 ds with each endpoint singularity removed by substitution.

    On [0, t/2] put s = (t/2) u^p with p = 1/(1+theta2); the Jacobian cancels
    the s^theta2 factor. The other half is handled symmetrically.
    """

    def half(a, b):
        # int_0^{t/2} (t - s)^a s^b ds
        p = 1.0 / (1.0 + b)
        c = t / 2

        def f(u):
            s = c * u**p
            return (t - s) ** a * c ** (1 + b) * p

        val, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
        return val

    return half(theta1, theta2) + half(theta2, theta1)


def beta_identity_check(theta1: float, theta2: float, t: float) -> dict:
    if theta1 <= -1 or theta2 <= -1:
        raise ValueError("exponents must exceed -1")
    if t <= 0:
        raise ValueError("t must be positive")
    lhs = _power_split_integral(theta1, theta2, t)
    rhs = t ** (1 + theta1 + theta2) * special.beta(1 + theta1, 1 + theta2)
    return {"lhs": lhs, "rhs": float(rhs), "rel_diff": abs(lhs - rhs) / abs(rhs)}


# ---------------------------------------------------------------------------
# Simplex integral
# ---------------------------------------------------------------------------


def simplex_closed_form(thetas, u: float, U: float) -> dict:
    """Both closed forms of int_{u<t_1<...<t_n<U} prod_j (t_j - t_{j-1})^theta_j dt, t_0 = u."""
    th = np.asarray(thetas, dtype=float)
    n = th.size
    if n < 1:
        raise ValueError("need at least one exponent")
    if np.any(th <= -1):
        raise ValueError("exponents must exceed -1")
    partial = np.arange(n) + np.concatenate([[0.0], np.cumsum(th)[:-1]])
    if np.any(partial[1:] <= 0):
        raise ValueError("Beta arguments j-1+sum_{k<j} theta_k must be positive")
    if U <= u:
        raise ValueError("need U > u")
    S = float(th.sum())
    L = U - u
    # integrating out t_1, ..., t_{n-1} one at a time leaves prod_j B(.) (t_n - u)^(n-1+S)
    log_beta = 0.0
    for j in range(1, n):
        log_beta += special.betaln(partial[j], 1 + th[j])
    beta_form = math.exp(log_beta) * L ** (n + S) / (n + S)
    gamma_form = math.exp(float(np.sum(special.gammaln(1 + th))) - special.gammaln(n + 1 + S)) * L ** (n + S)
    return {"beta_form": float(beta_form), "gamma_form": float(gamma_form), "n": n, "sum_theta": S}


def simplex_monte_carlo(thetas, u: float, U: float, samples: int, rng: RngStream | int | None,
                        block: int = 1 << 16) -> tuple[float, float]:
    """Sorted uniforms on [u, U]; the simplex volume (U-u)^n/n! is applied analytically."""
    th = np.asarray(thetas, dtype=float)
    n = th.size
    rng = as_stream(rng)
    vals = []
    for b in range(-(-samples // block)):
        m = min(block, samples - b * block)
        g = rng.child(b).generator()
        t = np.sort(g.uniform(u, U, size=(m, n)), axis=1)
        gaps = np.diff(np.concatenate([np.full((m, 1), u), t], axis=1), axis=1)
        vals.append(np.exp(np.sum(th * np.log(gaps), axis=1)))
    mean, se = mean_and_se(np.concatenate(vals))
    # exponents <= -1/2 give an integrand without a second moment; the
    # standard error is then not a reliable yardstick
    vol = (U - u) ** n / math.factorial(n)
    return mean * vol, se * vol


def simplex_integral_check(thetas, u: float, U: float, mc_samples: int, rng: RngStream | int | None) -> dict:
    if len(thetas) > 6:
        raise ValueError("n <= 6 supported")
    cf = simplex_closed_form(thetas, u, U)
    est, se = simplex_monte_carlo(thetas, u, U, mc_samples, rng)
    z = abs(est - cf["beta_form"]) / se if se > 0 else (0.0 if est == cf["beta_form"] else math.inf)
    return {**cf, "mc_estimate": est, "mc_se": se, "z": z,
            "forms_rel_diff": abs(cf["beta_form"] - cf["gamma_form"]) / cf["gamma_form"],
            "finite_variance": bool(np.all(np.asarray(thetas, dtype=float) > -0.5))}


# ---------------------------------------------------------------------------
# Gamma ratio
# ---------------------------------------------------------------------------


def gamma_ratio_constants(n_list, beta: float) -> np.ndarray:
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    n = np.asarray(n_list, dtype=float)
    return np.exp((special.gammaln(n + 1) - special.gammaln(beta * n)) / n - (1 - beta) * np.log(n))


def gamma_ratio_bound_check(n_list, beta: float, tail_from: int = 20) -> dict:
    n = np.asarray(sorted(int(v) for v in n_list))
    C = gamma_ratio_constants(n, beta)
    tail = C[n >= tail_from]
    nonincreasing = bool(np.all(np.diff(tail) <= 1e-12)) if tail.size > 1 else True
    return {"beta": beta, "n": n.tolist(), "C": C.tolist(), "sup": float(C.max()),
            "tail_nonincreasing": nonincreasing, "passed": bool(np.isfinite(C).all() and nonincreasing)}
