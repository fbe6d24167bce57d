"""Coexistence curve (binodal) of the reduced Redlich-Kwong gas.

Two phases at the same temperature coexist when pressure and Gibbs
potential agree. With ``g(v) = phi - v phi_v`` the conditions read

    phi_v(v_l, T) = phi_v(v_g, T)
    g(v_l, T)     = g(v_g, T)

:func:`solve_pair` solves them by Newton's method. :func:`equal_area_pressure`
is an independent check through Maxwell's equal-area rule, evaluated with
numerical quadrature of the isotherm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .eos import DomainError, GasModel
from .numerics import Bracket, ConvergenceError, find_root, integrate, newton2

NEAR_CRITICAL = 0.995
DEFAULT_T_MIN = 0.15


class NoCoexistenceError(DomainError):
    """Requested temperature is at or above the critical temperature."""


class ExtrapolationError(ValueError):
    """Query below the lowest traced temperature of a curve."""


class PhaseLabel(enum.IntEnum):
    LIQUID = 0
    GAS = 1
    CONDENSATION = 2
    SUPERCRITICAL = 3
    INAPPLICABLE = 4


class CoexistencePoint(NamedTuple):
    T: float
    p_sat: float
    v_liquid: float
    v_gas: float


def _check_T(gas: GasModel, T: float):
    T_c = gas.critical_point.T_c
    if not 0.0 < T < T_c:
        raise NoCoexistenceError(f"no coexistence at T={T}: need 0 < T < T_c={T_c:.12g}")


def _residual(gas, T, v1, v2):
    d1, d2 = gas.potential(v1, T), gas.potential(v2, T)
    return d2.phi_v - d1.phi_v, (d2.phi - v2 * d2.phi_v) - (d1.phi - v1 * d1.phi_v)


def gibbs_pressure_residuals(gas: GasModel, pt: CoexistencePoint) -> tuple[float, float]:
    """``(|p_g - p_l|, |gamma_g - gamma_l|)`` at a coexistence point."""
    T = pt.T
    dp = gas.pressure(pt.v_gas, T) - gas.pressure(pt.v_liquid, T)
    dg = gas.gibbs(pt.v_gas, T) - gas.gibbs(pt.v_liquid, T)
    return abs(float(dp)), abs(float(dg))


def _isotherm_roots(gas, T, p, v_spl, v_spr):
    """Liquid-branch and gas-branch volumes where the isotherm crosses ``p``."""
    f = lambda v: float(gas.pressure(v, T)) - p
    lo = 1.0 + 1e-14
    v_l = find_root(f, Bracket.of(f, lo, v_spl), tol=1e-15)
    hi = 2.0 * v_spr
    while f(hi) > 0:
        hi *= 2.0
    v_g = find_root(f, Bracket.of(f, v_spr, hi), tol=1e-14 * hi)
    return v_l, v_g


def _seed(gas, T):
    v_spl, v_spr = gas.spinodal_volumes(T)
    # Isotherm has its local minimum at v_spl and local maximum at v_spr.
    p_hi = float(gas.pressure(v_spr, T))
    p_lo = max(float(gas.pressure(v_spl, T)), 1e-3 * p_hi)
    return _isotherm_roots(gas, T, 0.5 * (p_lo + p_hi), v_spl, v_spr)


def solve_pair(
    gas: GasModel,
    T: float,
    guess: Optional[tuple[float, float]] = None,
    tol: float = 1e-12,
) -> CoexistencePoint:
    """Coexisting liquid and gas volumes at temperature ``T``.

    Newton iteration runs in ``(ln(v_l - 1), ln v_g)`` so both volumes stay
    physical. Without ``guess`` the seed is the pair of isotherm crossings
    at the midpoint of the spinodal pressure window.

    Raises:
        NoCoexistenceError: ``T`` outside ``(0, T_c)``.
        ConvergenceError: Newton failure; ``last`` holds ``(v_l, v_g)``.
    """
    _check_T(gas, T)
    if guess is None:
        guess = _seed(gas, T)
    v_spl, v_spr = gas.spinodal_volumes(T)

    def unpack(x, y):
        return 1.0 + math.exp(x), math.exp(y)

    def F(x, y):
        return _residual(gas, T, *unpack(x, y))

    def J(x, y):
        v1, v2 = unpack(x, y)
        a1 = float(gas.potential(v1, T).phi_vv)
        a2 = float(gas.potential(v2, T).phi_vv)
        dv1, dv2 = v1 - 1.0, v2
        return [[-a1 * dv1, a2 * dv2], [v1 * a1 * dv1, -v2 * a2 * dv2]]

    def admissible(x, y):
        v1, v2 = unpack(x, y)
        return v1 < v_spl and v2 > v_spr

    x0 = (math.log(guess[0] - 1.0), math.log(guess[1]))
    try:
        x, y = newton2(F, J, x0, tol=tol, admissible=admissible)
    except ConvergenceError as exc:
        last = unpack(*exc.last) if exc.last is not None else None
        raise ConvergenceError(
            f"coexistence solve failed at T={T}: {exc}", last=last, history=exc.history
        ) from exc
    v1, v2 = unpack(x, y)
    p = float(gas.pressure(v2, T))
    return CoexistencePoint(float(T), p, v1, v2)


def equal_area_pressure(gas: GasModel, T: float, rtol: float = 1e-11) -> CoexistencePoint:
    """Saturation state from Maxwell's rule, by bisection on the pressure.

    For trial ``p`` the outer isotherm crossings ``v_l, v_g`` are found and
    ``int_{v_l}^{v_g} p(v, T) dv - p (v_g - v_l)`` is integrated numerically;
    the area is positive for too low a pressure.
    """
    _check_T(gas, T)
    v_spl, v_spr = gas.spinodal_volumes(T)
    p_hi = float(gas.pressure(v_spr, T))
    p_lo = max(float(gas.pressure(v_spl, T)), 0.0)

    def area(p):
        v_l, v_g = _isotherm_roots(gas, T, p, v_spl, v_spr)
        # Split at the spinodals where the integrand bends sharply.
        f = lambda v: float(gas.pressure(v, T)) - p
        atol = rtol * p_hi * (v_g - v_l)
        s = integrate(f, v_l, v_spl, tol=atol, rtol=rtol)
        s += integrate(f, v_spl, v_spr, tol=atol, rtol=rtol)
        # The gas crossing can sit decades out; integrate that piece in ln v.
        fl = lambda t: f(math.exp(t)) * math.exp(t)
        s += integrate(fl, math.log(v_spr), math.log(v_g), tol=atol, rtol=rtol)
        return s, v_l, v_g

    # Stay off the spinodal pressures, where a crossing merges with a
    # spinodal volume; the gas crossing also runs off to infinity as p -> 0.
    span = p_hi - p_lo
    p_lo, p_hi = p_lo + 1e-9 * span, p_hi - 1e-9 * span
    a_lo, a_hi = area(p_lo)[0], area(p_hi)[0]
    while a_lo <= 0 and p_lo > 1e-300:
        p_hi, a_hi = p_lo, a_lo
        p_lo *= 1e-3
        a_lo = area(p_lo)[0]
    if not (a_lo > 0 > a_hi):
        raise ConvergenceError(f"equal-area bracket failed at T={T}: A={a_lo:.3e}, {a_hi:.3e}")
    for _ in range(200):
        p = 0.5 * (p_lo + p_hi)
        a, v_l, v_g = area(p)
        if a > 0:
            p_lo = p
        else:
            p_hi = p
        if p_hi - p_lo <= 1e-12 * p_hi:
            break
    p = 0.5 * (p_lo + p_hi)
    _, v_l, v_g = area(p)
    return CoexistencePoint(float(T), p, v_l, v_g)


@dataclass(frozen=True)
class CoexistenceCurve:
    """Traced binodal, points ordered by ascending temperature.

    The last point is the critical point itself when the trace reached
    ``T_c``. Volumes are interpolated with monotone cubics in
    ``s = sqrt(T_c - T)``, in which both branches are smooth at the apex.
    """

    points: tuple
    T_c: float
    v_c: float

    @property
    def T_min(self) -> float:
        return self.points[0].T

    @property
    def T_max(self) -> float:
        return self.points[-1].T

    def as_arrays(self) -> dict:
        arr = np.array(self.points, dtype=float)
        return {"T": arr[:, 0], "p_sat": arr[:, 1], "v_liquid": arr[:, 2], "v_gas": arr[:, 3]}

    def _interp(self):
        cached = self.__dict__.get("_interp_cache")
        if cached is None:
            a = self.as_arrays()
            s = np.sqrt(np.maximum(self.T_c - a["T"], 0.0))[::-1]
            cached = (
                PchipInterpolator(s, a["v_liquid"][::-1]),
                PchipInterpolator(s, np.log(a["v_gas"][::-1])),
            )
            object.__setattr__(self, "_interp_cache", cached)
        return cached

    def branches(self, T):
        """Interpolated ``(v_liquid(T), v_gas(T))`` for ``T_min <= T <= T_max``."""
        T = np.asarray(T, dtype=float)
        if np.any(T < self.T_min * (1 - 1e-12)):
            raise ExtrapolationError(
                f"temperature {float(np.min(T)):.6g} below traced range (T_min={self.T_min:.6g})"
            )
        liq, gas = self._interp()
        s = np.sqrt(np.maximum(self.T_c - np.minimum(T, self.T_max), 0.0))
        return liq(s), np.exp(gas(s))

    # Alternate projections of the same locus.
    def in_volume_pairs(self):
        a = self.as_arrays()
        return a["v_liquid"], a["v_gas"]

    def in_pT(self):
        a = self.as_arrays()
        return a["p_sat"], a["T"]

    def in_vT(self):
        """Closed dome: liquid branch up to the apex, then gas branch back down."""
        a = self.as_arrays()
        v = np.concatenate([a["v_liquid"], a["v_gas"][::-1]])
        T = np.concatenate([a["T"], a["T"][::-1]])
        return v, T

    def in_pvT(self):
        a = self.as_arrays()
        v, T = self.in_vT()
        p = np.concatenate([a["p_sat"], a["p_sat"][::-1]])
        return p, v, T


def trace_curve(
    gas: GasModel,
    T_min: float = DEFAULT_T_MIN,
    T_max: Optional[float] = None,
    steps: int = 200,
) -> CoexistenceCurve:
    """Trace the binodal from near the critical point down to ``T_min``.

    Isotherms are spaced uniformly in ``sqrt(T_c - T)``; each solve is
    seeded by linear extrapolation of the previous two. When ``T_max``
    reaches ``T_c`` the segment above ``0.995 T_c`` is closed by the
    critical point itself.
    """
    cp = gas.critical_point
    T_c = cp.T_c
    if T_max is None:
        T_max = T_c
    if not 0.0 < T_min < T_max <= T_c:
        raise ValueError(f"need 0 < T_min < T_max <= T_c={T_c:.12g}, got {T_min}, {T_max}")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    T_top = min(T_max, NEAR_CRITICAL * T_c)
    if T_min >= T_top:
        T_top = T_max if T_max < T_c else 0.5 * (T_min + T_c)
    s = np.linspace(math.sqrt(T_c - T_top), math.sqrt(T_c - T_min), steps)
    temps = T_c - s**2
    temps[-1] = T_min

    pts = []
    for i, T in enumerate(temps):
        if i >= 2:
            # Predictor in (s, ln(v_l - 1), ln v_g).
            a, b = pts[-2], pts[-1]
            r = (s[i] - s[i - 1]) / (s[i - 1] - s[i - 2])
            x = math.log(b.v_liquid - 1) + r * (math.log(b.v_liquid - 1) - math.log(a.v_liquid - 1))
            y = math.log(b.v_gas) + r * (math.log(b.v_gas) - math.log(a.v_gas))
            guess = (1.0 + math.exp(x), math.exp(y))
        elif i == 1:
            guess = (pts[-1].v_liquid, pts[-1].v_gas)
        else:
            guess = None
        try:
            pt = solve_pair(gas, float(T), guess)
        except ConvergenceError:
            if guess is None:
                raise
            pt = solve_pair(gas, float(T))
        pts.append(pt)
    pts.reverse()
    if T_max >= T_c:
        pts.append(CoexistencePoint(T_c, cp.p_c, cp.v_c, cp.v_c))
    return CoexistenceCurve(tuple(pts), T_c, cp.v_c)


def classify(gas: GasModel, v, T, curve: CoexistenceCurve):
    """Phase label of state(s) ``(v, T)``; arrays give an integer label array.

    Supercritical above ``T_c``, then inapplicable states, then the position
    of ``v`` relative to the two binodal branches. A volume exactly on a
    branch counts as single-phase.
    """
    v = np.asarray(v, dtype=float)
    T = np.asarray(T, dtype=float)
    v, T = np.broadcast_arrays(v, T)
    out = np.full(v.shape, int(PhaseLabel.GAS), dtype=np.int8)
    super_ = T >= curve.T_c
    out[super_] = PhaseLabel.SUPERCRITICAL
    rest = ~super_
    if np.any(rest):
        appl = np.asarray(gas.is_applicable(v[rest], T[rest]))
        labels = np.full(appl.shape, int(PhaseLabel.INAPPLICABLE), dtype=np.int8)
        if np.any(appl):
            vv, TT = v[rest][appl], T[rest][appl]
            v_l, v_g = curve.branches(TT)
            lab = np.full(vv.shape, int(PhaseLabel.CONDENSATION), dtype=np.int8)
            lab[vv <= v_l] = PhaseLabel.LIQUID
            lab[vv >= v_g] = PhaseLabel.GAS
            labels[appl] = lab
        out[rest] = labels
    if out.ndim == 0:
        return PhaseLabel(int(out))
    return out
