"""Isentropes, the filtration potential Q, and where Q stops being invertible.

Run with ``python demos/isentropes.py``.
"""

import numpy as np

from rkfiltration import asymptotic_coeffs, build, h_curve, invert_q, sigma_star

# At sigma0 = 0 the potential Q(v) rises monotonically from -inf to 0.
iso = build(0.0)
print(f"sigma0 = 0: invertible = {iso.invertible}, c = {asymptotic_coeffs(0.0).c:.6f}")
for v in (1.01, 1.5, 3.0, 20.0, 1e3):
    q = iso.q(v)
    print(f"  Q({v:7.2f}) = {q: .6e}   Q^-1 gives back {invert_q(iso, q):.10f}")

# Along each isochore there is one entropy level H(v) where dp/dv vanishes.
print("\nH(v):")
for v, h in h_curve(np.geomspace(2.0, 1e5, 7)):
    print(f"  H({v:10.1f}) = {h:.6f}")
print(f"limit sigma* = {sigma_star():.8f}")

# Below the threshold the isentrope has a rising pressure stretch and Q folds over.
for s in (-1.0, -0.6, -0.5, -0.4):
    print(f"  sigma0 = {s:+.1f}: invertible = {build(s, knots=200).invertible}")
