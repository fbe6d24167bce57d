"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS or FAIL line that appears in the pytest terminal
summary under "acceptance criteria". Run just this file with
``pytest tests/test_acceptance.py``.
"""

import math

import numpy as np
import pytest
from scipy import ndimage
from scipy.optimize import brentq, minimize_scalar

from rkfiltration.config import load_config
from rkfiltration.eos import V_CRITICAL_EXACT, GasModel
from rkfiltration.filtration import BoxDomain, Mask, SourceSystem, discrete_laplacian, solve_field, solve_harmonic
from rkfiltration.isentrope import (
    asymptotic_coeffs,
    build,
    dp_dv,
    h_function,
    q_potential,
    sigma_star,
    temperature,
)
from rkfiltration.phase import PhaseLabel, equal_area_pressure, gibbs_pressure_residuals, solve_pair


def test_1_critical_point(gas, criterion):
    with criterion(1, "critical point") as note:
        cp = gas.critical_point
        v_exact = 1.0 / (2.0 ** (1.0 / 3.0) - 1.0)
        assert v_exact == pytest.approx(V_CRITICAL_EXACT, abs=1e-15)
        assert abs(cp.v_c - v_exact) < 1e-8
        oracle = minimize_scalar(
            lambda v: -gas.spinodal_T(v), bounds=(2.0, 6.0), method="bounded", options={"xatol": 1e-12}
        )
        assert abs(oracle.x - v_exact) < 1e-5
        assert abs(cp.T_c - gas.spinodal_T(cp.v_c)) < 1e-10
        note(f"v_c={cp.v_c:.12f}, T_c={cp.T_c:.12f}, |dv|={abs(cp.v_c - v_exact):.1e}")


def test_2_spinodal(gas, criterion):
    with criterion(2, "spinodal closed form vs root solve") as note:
        v = np.concatenate([np.linspace(1.01, 10.0, 300), np.geomspace(10.0, 100.0, 100)[1:]])
        closed = gas.spinodal_T(v)
        direct = np.array([gas.spinodal_T_numeric(x) for x in v])
        formula = ((v - 1) ** 2 * (2 * v + 1) / (v**2 * (v + 1) ** 2)) ** (2.0 / 3.0)
        err = np.max(np.abs(closed - direct))
        assert err < 1e-10
        assert np.max(np.abs(closed - formula)) < 1e-14
        d = np.diff(closed)
        apex = int(np.argmax(closed))
        assert np.all(d[:apex] > 0) and np.all(d[apex:] < 0)
        lo, hi = v[max(apex - 1, 0)], v[apex + 1]
        assert lo <= gas.critical_point.v_c <= hi
        note(f"max |closed - root| = {err:.1e}, apex at v={v[apex]:.4f}")


def test_3_coexistence(gas, criterion):
    with criterion(3, "coexistence: Newton vs equal-area, 50 isotherms") as note:
        T_c = gas.critical_point.T_c
        worst_rel = worst_res = 0.0
        for T in np.linspace(0.5 * T_c, 0.99 * T_c, 50):
            a = solve_pair(gas, float(T))
            b = equal_area_pressure(gas, float(T))
            rel = max(abs(x - y) / abs(y) for x, y in zip(a[1:], b[1:]))
            worst_rel = max(worst_rel, rel)
            res = max(abs(r) for r in gibbs_pressure_residuals(gas, a))
            worst_res = max(worst_res, res)
            v_spl, v_spr = gas.spinodal_volumes(float(T))
            assert 1.0 < a.v_liquid < v_spl < v_spr < a.v_gas
        assert worst_rel < 1e-6
        assert worst_res < 1e-9
        note(f"max rel diff {worst_rel:.1e}, max residual {worst_res:.1e}")


def test_4_invertibility_threshold(criterion):
    with criterion(4, "invertibility threshold sigma*") as note:
        s_star = sigma_star()
        assert abs(s_star + 0.5) < 0.05
        h = [h_function(v) for v in (1e3, 1e4, 1e5)]
        assert h[0] < h[1] < h[2]
        grid = np.round(np.arange(-1.0, 0.5001, 0.1), 10)
        flags = []
        for s in grid:
            iso = build(float(s), knots=300)
            flags.append(iso.invertible)
        flags = np.array(flags)
        # Monotone in sigma0: once invertible, invertible for all larger levels.
        first = int(np.argmax(flags))
        assert flags[first] and not np.any(flags[:first]) and np.all(flags[first:])
        flip_lo, flip_hi = grid[first - 1], grid[first]
        assert flip_lo - 0.1 <= s_star <= flip_hi + 0.1
        root = brentq(lambda s: asymptotic_coeffs(s).c, -1.0, 0.0, xtol=1e-14)
        assert abs(root + 0.5) < 1e-6
        # The scan agrees with the local criterion dp/dv < 0.
        v = np.geomspace(2.0, 1e4, 200)
        assert np.any(dp_dv(v, -1.0) > 0) and np.all(dp_dv(v, 0.0) < 0)
        note(f"sigma*={s_star:.8f}, flip between {flip_lo:.1f} and {flip_hi:.1f}, c root {root:.9f}")


def test_5_asymptotics(criterion):
    with criterion(5, "asymptotics at sigma0 = 0") as note:
        co = asymptotic_coeffs(0.0)
        v = 1e4
        far_T = temperature(v, 0.0) * (co.B_star * v) ** (2.0 / 3.0) - 1.0
        far_Q = q_potential(v, 0.0, v_switch=1e6) / (-5.0 * co.c / (8.0 * v ** (8.0 / 3.0))) - 1.0
        near_T = temperature(1.0 + 1e-6, 0.0) * (1e-6) ** (2.0 / 3.0) - 1.0
        assert abs(far_T) < 0.01
        assert abs(far_Q) < 0.01
        assert abs(near_T) < 0.02
        note(f"far T {far_T:+.1e}, far Q {far_Q:+.1e}, near T {near_T:+.1e}")


def test_6_compatibility_identity(gas, criterion):
    with criterion(6, "compatibility identity e_v = T^2 d(p/T)/dT") as note:
        rng = np.random.default_rng(20240601)
        pts = []
        while len(pts) < 1000:
            v = 1.0 + 10.0 ** rng.uniform(-2, 3)
            T = 10.0 ** rng.uniform(-2, 1)
            if gas.is_applicable(v, T):
                pts.append((v, T))
        worst = 0.0
        for v, T in pts:
            hv, hT = 1e-5 * (v - 1.0), 1e-5 * T
            e_v = (gas.energy(v + hv, T) - gas.energy(v - hv, T)) / (2 * hv)
            pT = lambda t: gas.pressure(v, t) / t
            rhs = T**2 * (pT(T + hT) - pT(T - hT)) / (2 * hT)
            scale = max(1.0, abs(e_v))
            worst = max(worst, abs(e_v - rhs) / scale)
        assert worst < 1e-7
        note(f"max scaled mismatch {worst:.1e}")


def test_7_entropy_round_trip(gas, criterion):
    with criterion(7, "entropy round trip on isentropes") as note:
        rng = np.random.default_rng(7)
        v = 1.0 + 10.0 ** rng.uniform(-6, 5, 1000)
        s = rng.uniform(-0.4, 3.0, 1000)
        err = max(abs(gas.entropy(vi, temperature(vi, si)) - si) for vi, si in zip(v, s))
        assert err < 1e-10
        note(f"max |sigma - sigma0| = {err:.1e}")


def test_8_harmonic_solver(criterion):
    with criterion(8, "harmonic solver order and maximum principle") as note:
        centre = np.array([1.5, 1.5, 1.5])
        g = lambda a, b, c: 1.0 / np.sqrt((a - centre[0]) ** 2 + (b - centre[1]) ** 2 + (c - centre[2]) ** 2)
        errs = []
        for n in (9, 17, 33):
            dom = BoxDomain((-0.5,) * 3, (0.5,) * 3, (n,) * 3)
            sol = solve_harmonic(dom, g)
            errs.append(float(np.max(np.abs(sol.values - g(*dom.coordinates())))))
            b = dom.boundary_mask()
            inner = sol.values[~b]
            assert inner.max() <= sol.values[b].max() + 1e-12
            assert inner.min() >= sol.values[b].min() - 1e-12
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(orders - 2.0) <= 0.2)
        rng = np.random.default_rng(8)
        dom = BoxDomain((0, 0, 0), (1, 2, 1), (12, 15, 10))
        for _ in range(5):
            sol = solve_harmonic(dom, lambda a, b, c: rng.uniform(-1, 1, a.shape))
            b = dom.boundary_mask()
            assert sol.values[~b].max() <= sol.values[b].max() + 1e-12
            assert sol.values[~b].min() >= sol.values[b].min() - 1e-12
        note("orders " + ", ".join(f"{o:.3f}" for o in orders))


def test_9_one_source_field(gas, iso1, curve, criterion):
    with criterion(9, "one-source field") as note:
        sys_ = SourceSystem((((0.0, 0.0, 0.0), 3e-4),), 20.0, 1.0)
        lap_max = []
        for n in (17, 33, 65):
            dom = BoxDomain((-1.0,) * 3, (1.0,) * 3, (n,) * 3)
            f = solve_field(sys_, dom, iso1, curve)
            ok = f.mask == Mask.VALID
            # Entropy is constant at every valid node.
            s_err = float(np.max(np.abs(gas.entropy(f.v[ok], f.T[ok]) - 1.0)))
            assert s_err < 1e-8
            # Laplacian of Q(v(x)) on valid nodes whose stencil is valid.
            qv = np.full(dom.shape, np.nan)
            qv[ok] = iso1.q(f.v[ok])
            lap = discrete_laplacian(qv, dom)
            x1, x2, x3 = dom.coordinates()
            r = np.sqrt(x1**2 + x2**2 + x3**2)
            sel = np.isfinite(lap) & (r[1:-1, 1:-1, 1:-1] >= 0.5)
            lap_max.append(float(np.max(np.abs(lap[sel]))))
            if n == 33:
                cond = ok & (f.label == PhaseLabel.CONDENSATION)
                gas_nodes = ok & (f.label == PhaseLabel.GAS)
                near = f.mask == Mask.NEAR_SOURCE
                assert f.v[dom.boundary_mask() & ok].max() < 21.0  # far field in gas
                assert cond.any() and gas_nodes.any()
                assert r[near].max() < r[cond].min()
                assert r[cond].max() < r[gas_nodes].min()
                assert np.count_nonzero(ok & (f.label == PhaseLabel.INAPPLICABLE)) == 0
        orders = np.log2(np.array(lap_max[:-1]) / np.array(lap_max[1:]))
        assert np.all(np.abs(orders - 2.0) <= 0.2)
        note("Laplacian orders " + ", ".join(f"{o:.3f}" for o in orders))


def _components(field, sources):
    near = field.mask == Mask.NEAR_SOURCE
    cond = (field.mask == Mask.VALID) & (field.label == PhaseLabel.CONDENSATION)
    lab, n = ndimage.label(cond | near, structure=np.ones((3, 3, 3)))
    x1, x2, x3 = field.domain.coordinates()
    owners = []
    for s in sources:
        d = (x1 - s.position[0]) ** 2 + (x2 - s.position[1]) ** 2 + (x3 - s.position[2]) ** 2
        owners.append(int(lab[np.unravel_index(np.argmin(d), d.shape)]))
    boundary_labels = set(np.unique(lab[field.domain.boundary_mask()])) - {0}
    return n, owners, boundary_labels


@pytest.mark.parametrize("name, count", [("four_sources", 4), ("five_sources", 5)])
def test_10_multi_source_scenarios(name, count, criterion):
    with criterion(10, f"bundled {name} scenario") as note:
        cfg = load_config(name)
        gas = GasModel(cfg.gas)
        iso = build(cfg.sigma0, cfg.medium, v_max=cfg.v_max, knots=cfg.knots, gas=gas)
        f = solve_field(cfg.source_system(), cfg.domain, iso, mode=cfg.mode, r_excl=cfg.exclusion_radius)
        c = f.counts()
        total = f.mask.size
        assert len(cfg.sources) == count
        assert c["condensation"] > 0
        assert c["gas"] / total > 0.5
        assert c["inapplicable"] == 0
        n, owners, on_boundary = _components(f, cfg.sources)
        assert n == count
        assert sorted(owners) == list(range(1, count + 1))
        assert not on_boundary
        note(f"{n} components, gas {c['gas'] / total:.1%}, condensation {c['condensation']}")
