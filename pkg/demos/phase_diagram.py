"""Spinodal and binodal of the reduced Redlich-Kwong gas.

Walks through the critical point, the stability boundary, and a traced
coexistence curve, then classifies a handful of states. Run with
``python demos/phase_diagram.py``.
"""

import numpy as np

from rkfiltration import GasModel, PhaseLabel, classify, solve_pair, trace_curve

gas = GasModel()

# The critical point is the apex of the spinodal.
cp = gas.critical_point
print(f"critical point: v_c = {cp.v_c:.10f}, T_c = {cp.T_c:.10f}, p_c = {cp.p_c:.10f}")

# Below the spinodal temperature a state is thermodynamically unstable.
for v in (1.5, 2.0, cp.v_c, 10.0, 50.0):
    print(f"  T_sp({v:8.4f}) = {gas.spinodal_T(v):.6f}")

# One isotherm by hand: equal pressure and equal Gibbs potential.
pt = solve_pair(gas, 0.3)
print(f"\nT = 0.3: p_sat = {pt.p_sat:.10f}, v_liquid = {pt.v_liquid:.6f}, v_gas = {pt.v_gas:.6f}")

# The whole dome, from T = 0.15 up to the critical point.
curve = trace_curve(gas, T_min=0.15, steps=60)
arr = curve.as_arrays()
print(f"\ntraced {len(curve.points)} isotherms; at T_min the gas branch sits at v = {arr['v_gas'][0]:.1f}")
print("   T        p_sat          v_liquid   v_gas")
for i in range(0, len(curve.points), 12):
    print(f"  {arr['T'][i]:.4f}  {arr['p_sat'][i]:.6e}  {arr['v_liquid'][i]:8.4f}  {arr['v_gas'][i]:10.3f}")

# Point-wise phase labels.
v = np.array([1.3, 16.0, 5.0, 30.0, 5.0])
T = np.array([0.3, 0.3, 0.3, 0.3, 0.5])
for vi, Ti, lab in zip(v, T, classify(gas, v, T, curve)):
    print(f"  (v={vi:5.1f}, T={Ti:.2f}) -> {PhaseLabel(int(lab)).name.lower()}")
