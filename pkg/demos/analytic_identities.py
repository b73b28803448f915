"""Exact combinatorial and integral identities behind the moment bounds.

Run: python3 demos/analytic_identities.py
"""
from localtimes import RngStream
from localtimes.analytics import (
    alpha_sharpness_probe,
    alpha_table,
    beta_identity_check,
    check_alpha_against_enumeration,
    gamma_ratio_bound_check,
    simplex_integral_check,
)

table = alpha_table(12)
print("row k=6:", [table(h, 6) for h in range(1, 7)])
print("matches set-partition enumeration:", check_alpha_against_enumeration(table)["passed"])
print("minimal constant at k=12:", round(table.minimal_constant()[12], 4))

probe = alpha_sharpness_probe(range(10, 101, 10), 0.5)
print("log alpha / (k log k):", [round(r["ratio"], 3) for r in probe["rows"]], "->", probe["limit"])

print("Beta identity:", beta_identity_check(-0.7, 0.4, 2.0))
r = simplex_integral_check([0.3, -0.2, 0.5], 0.0, 1.0, 200000, RngStream(31))
print(f"simplex: closed form {r['gamma_form']:.5f}, monte carlo {r['mc_estimate']:.5f} +- {r['mc_se']:.5f}")
g = gamma_ratio_bound_check(range(1, 201), 0.5)
print("Gamma ratio constants: C_1", round(g["C"][0], 4), "C_200", round(g["C"][-1], 4))
