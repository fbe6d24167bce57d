"""Thermodynamics along a fixed entropy level and the filtration potential Q.

At entropy ``sigma0`` the temperature is an implicit function of volume,

    sigma0 = (n/2) ln T + ln(v - 1) + T**-1.5 / 2 * ln(v / (v + 1)),

and the potential

    Q(v) = -(k / mu) * int_inf^v p'(s) / s ds,      Q(inf) = 0,

turns steady adiabatic Darcy filtration into Laplace's equation for Q.
Large-volume and near-covolume asymptotics (valid for n = 3) give closed
forms used as brackets, as the tail of Q, and as test oracles.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .eos import DomainError, GasModel
from .numerics import (
    Bracket,
    BracketError,
    MonotoneTable,
    NumericsError,
    RangeError,
    expand_bracket,
    find_root,
    integrate,
    invert_table,
)

V_SWITCH = 1e4
DEFAULT_V_MAX = 1e4
DEFAULT_KNOTS = 400
DEFAULT_V_MIN = 1.0 + 1e-8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)

RK = GasModel()


class MultivaluedError(NumericsError):
    """Q is not monotone on this isentrope; ``branches`` lists every solution."""

    def __init__(self, message, branches):
        super().__init__(message)
        self.branches = list(branches)


class OutOfBranchError(NumericsError):
    """``dp/dv = 0`` has no root in temperature on this isochore."""


@dataclass(frozen=True)
class MediumParams:
    """Permeability ``k`` and dynamic viscosity ``mu`` of the porous medium."""

    k: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if not (self.k > 0 and self.mu > 0):
            raise ValueError(f"k and mu must be positive, got k={self.k}, mu={self.mu}")

    @property
    def mobility(self) -> float:
        return self.k / self.mu


class AsymptoticCoeffs(NamedTuple):
    B_star: float
    c: float
    B: float


@functools.lru_cache(maxsize=256)
def asymptotic_coeffs(sigma0: float) -> AsymptoticCoeffs:
    """Coefficients of the large-v and v -> 1 expansions at entropy ``sigma0``.

    ``B_star`` solves ``B/2 + ln B = -sigma0`` (left side increasing in B),
    ``c = B_star**(-2/3) - B_star**(1/3)`` and ``B = exp(sigma0)``.
    """
    f = lambda lb: 0.5 * math.exp(lb) + lb + sigma0
    # Work in ln B: f is increasing and unbounded both ways.
    br = expand_bracket(f, -1.0, 1.0)
    lb = find_root(f, br, tol=1e-15)
    B_star = math.exp(lb)
    return AsymptoticCoeffs(B_star, B_star ** (-2.0 / 3.0) - B_star ** (1.0 / 3.0), math.exp(sigma0))


def _check_v(v):
    if np.any(np.asarray(v) <= 1.0):
        raise DomainError(f"isentrope defined for v > 1, got {v!r}")


def temperature(v: float, sigma0: float, gas: GasModel = RK) -> float:
    """Temperature on the isentrope ``sigma0`` at volume ``v`` (scalar)."""
    _check_v(v)
    co = asymptotic_coeffs(sigma0)
    t_far = (co.B_star * v) ** (-2.0 / 3.0)
    t_near = co.B ** (2.0 / 3.0) * (v - 1.0) ** (-2.0 / 3.0)
    half_n = 0.5 * gas.n
    lv = math.log(v - 1.0)
    L = -math.log1p(1.0 / v)
    f = lambda y: half_n * y + lv + 0.5 * math.exp(-1.5 * y) * L - sigma0
    lo = math.log(0.1 * min(t_far, t_near))
    hi = math.log(10.0 * max(t_far, t_near))
    try:
        br = expand_bracket(f, lo, hi)
    except BracketError as exc:
        raise BracketError(f"temperature bracket failed at v={v}, sigma0={sigma0}") from exc
    return math.exp(find_root(f, br, tol=1e-15))


def temperature_array(v, sigma0: float, gas: GasModel = RK, max_iter: int = 200):
    """Vectorized :func:`temperature` by Newton iteration in ``ln T``.

    In ``y = ln T`` the entropy is increasing and concave, so Newton steps
    taken from the left of the root climb monotonically onto it. The start
    is the asymptotic guess, pulled left by one Newton step when it
    overshoots, and never below the ideal-gas root (a lower bound).
    """
    _check_v(v)
    v = np.asarray(v, dtype=float)
    shape = v.shape
    v = v.ravel()
    half_n = 0.5 * gas.n
    L = -np.log1p(1.0 / v)
    lv = np.log(v - 1.0)

    def f_df(y, lv, L):
        corr = np.exp(-1.5 * y) * L
        return half_n * y + lv + 0.5 * corr - sigma0, half_n - 0.75 * corr

    lo = (sigma0 - lv) / half_n
    co = asymptotic_coeffs(sigma0)
    y = np.log(np.maximum((co.B_star * v) ** (-2.0 / 3.0), co.B ** (2.0 / 3.0) * (v - 1.0) ** (-2.0 / 3.0)))
    fy, dfy = f_df(y, lv, L)
    y = np.where(fy > 0, y - fy / dfy, y)
    y = np.maximum(y, lo)

    active = np.arange(v.size)
    for _ in range(max_iter):
        ya = y[active]
        fy, dfy = f_df(ya, lv[active], L[active])
        step = -fy / dfy
        ya = ya + step
        y[active] = ya
        done = (np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(ya))) | (fy >= 0)
        active = active[~done]
        if active.size == 0:
            break
    T = np.exp(y).reshape(shape)
    return float(T) if T.ndim == 0 else T


def _pressure_slope(v, T, gas):
    """``dp/dv`` along the isentrope at the state ``(v, T)``."""
    d = gas.potential(v, T)
    s_v, s_T = gas.entropy_partials(v, T)
    # dp/dT at fixed v equals d sigma/dv, so dp/dv = p_v - s_v**2 / s_T.
    return T * d.phi_vv - s_v**2 / s_T


def pressure_on_isentrope(v: float, sigma0: float, gas: GasModel = RK) -> float:
    return float(gas.pressure(v, temperature(v, sigma0, gas)))


def dp_dv(v, sigma0: float, gas: GasModel = RK):
    """Pressure derivative along the isentrope (array-aware)."""
    T = temperature_array(v, sigma0, gas)
    out = _pressure_slope(np.asarray(v, dtype=float), T, gas)
    return float(out) if np.ndim(out) == 0 else out


def q_tail(v, sigma0: float, medium: MediumParams = MediumParams()):
    """Closed-form large-volume Q: ``-5 k c / (8 mu v**(8/3))``."""
    c = asymptotic_coeffs(sigma0).c
    return -5.0 * medium.mobility * c / (8.0 * np.asarray(v, dtype=float) ** (8.0 / 3.0))


def q_derivative(v, sigma0: float, medium: MediumParams = MediumParams(), gas: GasModel = RK):
    """``dQ/dv = -k p'(v) / (mu v)``."""
    v = np.asarray(v, dtype=float)
    out = -medium.mobility * np.asarray(dp_dv(v, sigma0, gas)) / v
    return float(out) if out.ndim == 0 else out


def q_potential(
    v: float,
    sigma0: float,
    medium: MediumParams = MediumParams(),
    gas: GasModel = RK,
    v_switch: float = V_SWITCH,
    rtol: float = 1e-12,
) -> float:
    """Q at volume ``v``, normalised so that ``Q -> 0`` as ``v -> inf``.

    Above ``v_switch`` this is the closed-form tail; below it the tail value
    at the seam plus adaptive Simpson quadrature in ``ln(v - 1)``.
    """
    _check_v(v)
    if v >= v_switch:
        return float(q_tail(v, sigma0, medium))
    k = medium.mobility

    def integrand(t):
        s = 1.0 + math.exp(t)
        T = temperature(s, sigma0, gas)
        return -k * float(_pressure_slope(s, T, gas)) / s * (s - 1.0)

    return float(q_tail(v_switch, sigma0, medium)) + integrate(
        integrand, math.log(v_switch - 1.0), math.log(v - 1.0), tol=1e-300, rtol=rtol
    )


def h_function(v: float, gas: GasModel = RK) -> float:
    """Entropy level at which the isentrope through isochore ``v`` has ``dp/dv = 0``.

    Solves ``dp/dv = 0`` for the temperature at fixed ``v`` (scanning a log
    grid for the sign change, then Brent) and returns the entropy there.

    Raises:
        OutOfBranchError: no temperature root on this isochore.
    """
    _check_v(v)

    def G(y):
        T = math.exp(y)
        _, s_T = gas.entropy_partials(v, T)
        return float(_pressure_slope(v, T, gas) * s_T)

    ys = np.linspace(math.log(1e-12), math.log(1e6), 721)
    vals = np.array([G(y) for y in ys])
    idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    if idx.size == 0:
        raise OutOfBranchError(f"dp/dv = 0 has no temperature root at v={v}")
    i = idx[0]
    y = find_root(G, Bracket(ys[i], ys[i + 1], vals[i], vals[i + 1]), tol=1e-15)
    return float(gas.entropy(v, math.exp(y)))


def h_curve(v_values, gas: GasModel = RK):
    """``(v, H(v))`` pairs, skipping isochores without a root."""
    out = []
    for v in v_values:
        try:
            out.append((float(v), h_function(float(v), gas)))
        except OutOfBranchError:
            continue
    return out


def sigma_star(gas: GasModel = RK, volumes=(1e3, 1e4, 1e5)) -> float:
    """Limit of H(v) as v -> inf by Aitken extrapolation of three samples.

    The samples should be geometrically spaced; H approaches its limit like
    a power of 1/v, which the delta-squared step removes.
    """
    h0, h1, h2 = (h_function(v, gas) for v in volumes)
    denom = (h2 - h1) - (h1 - h0)
    if denom == 0.0:
        return h2
    return h2 - (h2 - h1) ** 2 / denom


def _gl_integral(f, a, b):
    """Fixed-order Gauss-Legendre of vectorized ``f`` over ``[a, b]`` (arrays)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid[..., None] + half[..., None] * _GL_NODES
    return half * np.sum(_GL_WEIGHTS * f(t), axis=-1)


@dataclass(frozen=True)
class Isentrope:
    """Tabulated isentrope: knots log-spaced in ``v - 1`` with T, p and Q.

    ``invertible`` is true when ``dp/dv < 0`` at every knot (and on a denser
    check grid), in which case Q increases from -inf to 0.
    """

    sigma0: float
    medium: MediumParams
    v_grid: np.ndarray
    T_tab: np.ndarray
    p_tab: np.ndarray
    Q_tab: np.ndarray
    invertible: bool
    q_range: tuple
    gas: GasModel = field(default=RK, compare=False)
    v_switch: float = V_SWITCH

    # -- exact evaluation -------------------------------------------------
    def _dq_dt(self, t):
        """dQ / d ln(v - 1) at ``v = 1 + e**t``."""
        v = 1.0 + np.exp(t)
        T = temperature_array(v, self.sigma0, self.gas)
        return -self.medium.mobility * _pressure_slope(v, T, self.gas) / v * (v - 1.0)

    def q(self, v):
        """Q at arbitrary volume(s), from the nearest lower knot by Gauss-Legendre."""
        _check_v(v)
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        out = np.empty_like(v)
        tail = v >= self.v_switch
        out[tail] = q_tail(v[tail], self.sigma0, self.medium)
        body = ~tail
        if np.any(body):
            vb = v[body]
            knots = self.v_grid[self.v_grid < self.v_switch]
            i = np.clip(np.searchsorted(knots, vb, side="right") - 1, 0, knots.size - 1)
            t0 = np.log(knots[i] - 1.0)
            t1 = np.log(vb - 1.0)
            out[body] = self.Q_tab[i] + _gl_integral(self._dq_dt, t0, t1)
        return float(out[0]) if scalar else out

    def temperature(self, v):
        return temperature_array(v, self.sigma0, self.gas)

    def pressure(self, v):
        v = np.asarray(v, dtype=float)
        return self.gas.pressure(v, temperature_array(v, self.sigma0, self.gas))

    # -- inversion ----------------------------------------------------------
    def branches(self, q: float) -> list:
        """Every volume in the tabulated range with ``Q(v) = q``."""
        d = self.Q_tab - q
        idx = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)
        roots = []
        g = lambda s: self.q(s) - q
        for i in idx:
            a, b = self.v_grid[i], self.v_grid[i + 1]
            if d[i] == 0.0:
                roots.append(float(a))
                continue
            roots.append(find_root(g, Bracket(a, b, d[i], d[i + 1]), tol=1e-13 * b))
        return sorted(set(roots))

    def invert(self, u):
        """Vectorized Q^-1; NaN where ``u`` is outside ``(-inf, 0)``.

        Newton iteration on ``ln(-Q)`` against ``ln(v - 1)``, which is close
        to linear at both ends of the isentrope.
        """
        if not self.invertible:
            raise MultivaluedError(
                f"Q is not monotone at sigma0={self.sigma0}; pick a branch explicitly", []
            )
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        v = np.full(u.shape, np.nan)
        ok = np.isfinite(u) & (u < 0.0)
        q_seam = float(q_tail(self.v_switch, self.sigma0, self.medium))
        tail = ok & (u >= q_seam)
        c = asymptotic_coeffs(self.sigma0).c
        v[tail] = (-5.0 * self.medium.mobility * c / (8.0 * u[tail])) ** 0.375
        body = ok & ~tail
        if np.any(body):
            v[body] = self._invert_body(u[body])
        return float(v[0]) if scalar else v

    def _invert_body(self, u):
        mask = self.v_grid <= self.v_switch
        t_k = np.log(self.v_grid[mask] - 1.0)
        z_k = np.log(-self.Q_tab[mask])
        target = np.log(-u)
        # z decreases with t: interpolate t(z) on reversed knots.
        interp = PchipInterpolator(z_k[::-1], t_k[::-1], extrapolate=True)
        t = interp(target)
        # Near v -> 1, z ~ const - (5/3) t; extend linearly beyond the knots.
        above = target > z_k[0]
        t[above] = t_k[0] - 0.6 * (target[above] - z_k[0])
        t = np.minimum(t, np.log(self.v_switch - 1.0))
        for _ in range(50):
            v = 1.0 + np.exp(t)
            qv = self.q(v)
            dz = self._dq_dt(t) / qv
            step = (np.log(-qv) - target) / dz
            t = t - step
            if np.all(np.abs(step) < 1e-14):
                break
        return 1.0 + np.exp(t)


def build(
    sigma0: float,
    medium: MediumParams = MediumParams(),
    v_max: float = DEFAULT_V_MAX,
    knots: int = DEFAULT_KNOTS,
    gas: GasModel = RK,
    v_min: float = DEFAULT_V_MIN,
    v_switch: float = V_SWITCH,
) -> Isentrope:
    """Tabulate the isentrope ``sigma0`` on ``knots`` points in ``[v_min, v_max]``.

    Q is accumulated downward from the seam value with Gauss-Legendre
    quadrature between consecutive knots.
    """
    if not 1.0 < v_min < v_max:
        raise ValueError(f"need 1 < v_min < v_max, got {v_min}, {v_max}")
    if knots < 2:
        raise ValueError("need at least two knots")
    v_grid = 1.0 + np.logspace(math.log10(v_min - 1.0), math.log10(v_max - 1.0), knots)
    T_tab = temperature_array(v_grid, sigma0, gas)
    p_tab = gas.pressure(v_grid, T_tab)

    probe = Isentrope(sigma0, medium, v_grid, T_tab, p_tab, np.zeros_like(v_grid), False, (0, 0), gas, v_switch)
    Q_tab = np.empty_like(v_grid)
    body = v_grid < v_switch
    Q_tab[~body] = q_tail(v_grid[~body], sigma0, medium)
    nb = int(np.count_nonzero(body))
    if nb:
        t = np.log(v_grid[:nb] - 1.0)
        t_top = math.log(v_switch - 1.0)
        upper = np.append(t[1:], t_top)
        pieces = _gl_integral(probe._dq_dt, t, upper)
        seam = float(q_tail(v_switch, sigma0, medium))
        Q_tab[:nb] = seam - np.cumsum(pieces[::-1])[::-1]

    slope_knots = _pressure_slope(v_grid, T_tab, gas)
    v_check = 1.0 + np.logspace(math.log10(v_min - 1.0), math.log10(v_max - 1.0), 8 * knots)
    slope_check = dp_dv(v_check, sigma0, gas)
    invertible = bool(np.all(slope_knots < 0) and np.all(slope_check < 0))
    if invertible:
        q_range = (-math.inf, 0.0)
    else:
        q_range = (-math.inf, max(0.0, float(np.max(Q_tab))))
    return Isentrope(sigma0, medium, v_grid, T_tab, p_tab, Q_tab, invertible, q_range, gas, v_switch)


def invert_q(iso: Isentrope, q: float) -> float:
    """Volume with ``Q(v) = q`` on an invertible isentrope.

    Inside the tabulated range this is monotone-cubic table inversion
    polished by a root solve on the exact Q; outside it the closed-form tail
    (large v) or a bracketed solve towards ``v = 1``.

    Raises:
        MultivaluedError: Q not monotone; ``branches`` holds all solutions.
        RangeError: ``q >= 0`` (above) or non-finite.
    """
    if not iso.invertible:
        br = iso.branches(q)
        raise MultivaluedError(
            f"Q(v) = {q} has {len(br)} solutions at sigma0={iso.sigma0} "
            f"(non-invertible isentrope): {br}",
            br,
        )
    if not math.isfinite(q):
        raise RangeError(f"non-finite q={q}", "below" if q < 0 else "above")
    if q >= 0.0:
        raise RangeError(f"q={q} above sup Q = 0", "above")
    table = MonotoneTable(iso.v_grid, iso.Q_tab, exact=iso.q)
    lo, hi = table.y_range
    if q > hi:
        if iso.v_grid[-1] >= iso.v_switch:
            return float(iso.invert(q))
        g = lambda s: iso.q(s) - q
        br = expand_bracket(g, iso.v_grid[-1], 2.0 * iso.v_grid[-1])
        return find_root(g, br, tol=1e-12 * br.hi)
    if q < lo:
        co = asymptotic_coeffs(iso.sigma0)
        guess = (iso.medium.mobility * co.B ** (2.0 / 3.0) / (-q)) ** 0.6
        g = lambda t: iso.q(1.0 + math.exp(t)) - q
        t0 = math.log(min(guess, iso.v_grid[0] - 1.0))
        br = expand_bracket(g, t0 - 1.0, math.log(iso.v_grid[0] - 1.0))
        return 1.0 + math.exp(find_root(g, br, tol=1e-14))
    return invert_table(table, q, tol=1e-13)
