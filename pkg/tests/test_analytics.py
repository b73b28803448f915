import math

import numpy as np
import pytest
from scipy import special

from localtimes.analytics import (
    alpha_sharpness_probe,
    alpha_table,
    beta_identity_check,
    check_alpha_against_enumeration,
    enumerate_set_partitions,
    gamma_ratio_bound_check,
    gamma_ratio_constants,
    partition_counts,
    simplex_closed_form,
    simplex_integral_check,
)
from localtimes.core import RngStream


def test_alpha_small_values():
    t = alpha_table(5)
    assert [t(h, 4) for h in range(1, 5)] == [1, 7, 6, 1]
    assert t(0, 3) == 0 and t(4, 3) == 0
    with pytest.raises(IndexError):
        t(1, 6)


def test_alpha_row_sums_are_bell_numbers():
    t = alpha_table(15)
    bell = [1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597, 27644437, 190899322, 1382958545]
    assert [sum(t.rows[k][1:]) for k in range(1, 16)] == bell


def test_enumeration_is_restricted_growth():
    rgs = enumerate_set_partitions(5)
    assert rgs.shape == (52, 5)
    assert len({tuple(r) for r in rgs}) == 52
    assert np.all(rgs[:, 0] == 0)
    running = np.maximum.accumulate(rgs, axis=1)
    assert np.all(rgs[:, 1:] <= running[:, :-1] + 1)
    assert partition_counts(4).tolist() == [0, 1, 7, 6, 1]


def test_alpha_matches_enumeration():
    assert check_alpha_against_enumeration(alpha_table(10), k_limit=10)["passed"]


def test_alpha_bound_and_csv():
    t = alpha_table(30)
    assert all(t.bound_ok().values())
    assert all(c <= 1 for c in t.minimal_constant().values())
    lines = t.to_csv().splitlines()
    assert lines[0] == "k,h,alpha,bound_k_pow_k_ok" and len(lines) == 1 + 30 * 31 // 2


def test_sharpness_probe():
    r = alpha_sharpness_probe(range(10, 201, 10), 0.5)
    assert r["all_hold"] and r["trend_pvalue"] < 0.01
    with pytest.raises(ValueError):
        alpha_sharpness_probe([10], 1.5)


@pytest.mark.parametrize("a, b, t", [(0.0, 0.0, 1.0), (-0.5, -0.5, 1.0), (-0.9, 0.3, 2.5), (1.5, -0.99, 0.1)])
def test_beta_identity(a, b, t):
    assert beta_identity_check(a, b, t)["rel_diff"] < 1e-10


def test_beta_identity_special_values():
    # int_0^1 (1-s)^-1/2 s^-1/2 ds = pi
    assert beta_identity_check(-0.5, -0.5, 1.0)["lhs"] == pytest.approx(math.pi, rel=1e-12)
    with pytest.raises(ValueError):
        beta_identity_check(-1.0, 0.0, 1.0)


def test_simplex_closed_form_uniform():
    # all exponents zero: the simplex volume (U - u)^n / n!
    cf = simplex_closed_form([0, 0, 0], 1.0, 3.0)
    assert cf["beta_form"] == pytest.approx(8 / 6) and cf["gamma_form"] == pytest.approx(8 / 6)


def test_simplex_one_dimension():
    cf = simplex_closed_form([0.5], 0.0, 2.0)
    assert cf["gamma_form"] == pytest.approx(2**1.5 / 1.5)


def test_simplex_monte_carlo_agrees():
    r = simplex_integral_check([0.3, -0.2, 0.7], 0.5, 2.0, 200_000, RngStream(8))
    assert r["forms_rel_diff"] < 1e-12 and r["z"] < 3 and r["finite_variance"]


def test_gamma_ratio_constants():
    C = gamma_ratio_constants([1, 2], 0.5)
    assert C[0] == pytest.approx(1 / special.gamma(0.5))
    r = gamma_ratio_bound_check(range(1, 201), 0.5)
    assert r["passed"] and r["tail_nonincreasing"]
    with pytest.raises(ValueError):
        gamma_ratio_constants([1], 1.0)
