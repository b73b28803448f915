"""Berman's integrability criterion on growing frequency balls.

Run: python3 demos/berman_criterion.py
"""
from localtimes.gaussian import fbm_spec, increment_charfn
from localtimes.laws import berman_criterion

for H, d in ((0.5, 1), (0.3, 2), (0.6, 2)):
    r = berman_criterion(increment_charfn(fbm_spec(H), d), H, d)
    print(f"H={H} d={d} (alpha d = {H * d:.1f}): {r.verdict}, last shell ratio {r.ratios[-1]:.3f} "
          f"(predicted {r.extra['predicted_ratio']:.3f}), estimate {r.extrapolated:.4f}")
