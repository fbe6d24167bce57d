"""Redlich-Kwong gas in reduced units, built from its Massieu-Planck potential.

All quantities are dimensionless: the covolume maps to ``v = 1`` and only
``v > 1`` is physical. With ``L = ln(v / (v + 1))`` the potential is

    phi(v, T) = (n/2) ln T + ln(v - 1) - T**-1.5 * L

and pressure, energy, entropy and Gibbs potential follow from it:
``p = T phi_v``, ``e = T**2 phi_T``, ``gamma = T (v phi_v - phi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .numerics import Bracket, find_root, newton2

# v_c = 1 / (2**(1/3) - 1): the maximum of the spinodal temperature.
V_CRITICAL_EXACT = 1.0 / (2.0 ** (1.0 / 3.0) - 1.0)


class DomainError(ValueError):
    """State requested outside ``v > 1, T > 0``."""


def _check(v, T):
    if np.any(np.asarray(v) <= 1.0) or np.any(np.asarray(T) <= 0.0):
        raise DomainError(f"state requires v > 1 and T > 0, got v={v!r}, T={T!r}")


def _log_ratio(v):
    # ln(v/(v+1)) without cancellation at large v
    return -np.log1p(1.0 / v)


@dataclass(frozen=True)
class GasParams:
    """Degrees of freedom and the physical constants used for unit scaling."""

    n: float = 3.0
    a: float = 1.0
    b: float = 1.0
    R: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"degrees of freedom n must be >= 1, got {self.n}")
        for name in ("a", "b", "R"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    # Multipliers taking reduced values to physical ones.
    @property
    def p_scale(self) -> float:
        return (self.R * self.a**2 / self.b**5) ** (1.0 / 3.0)

    @property
    def T_scale(self) -> float:
        return (self.a / (self.R * self.b)) ** (2.0 / 3.0)

    @property
    def v_scale(self) -> float:
        return self.b

    @property
    def e_scale(self) -> float:
        return (self.R * self.a**2 / self.b**2) ** (1.0 / 3.0)

    @property
    def sigma_scale(self) -> float:
        return self.R


class StatePoint(NamedTuple):
    v: float
    T: float
    p: float
    e: float
    sigma: float
    gamma: float


class KappaForm(NamedTuple):
    """Diagonal quadratic form ``k_TT dT.dT + k_vv dv.dv`` (units of R)."""

    k_TT: float
    k_vv: float


class CriticalPoint(NamedTuple):
    v_c: float
    T_c: float
    p_c: float


class Partials(NamedTuple):
    phi: float
    phi_v: float
    phi_T: float
    phi_vv: float
    phi_TT: float
    phi_vT: float
    phi_vvv: float


def to_reduced(p, T, v, e, sigma, params: GasParams):
    """Physical ``(p, T, v, e, sigma)`` to reduced coordinates."""
    return (
        p / params.p_scale,
        T / params.T_scale,
        v / params.v_scale,
        e / params.e_scale,
        sigma / params.sigma_scale,
    )


def from_reduced(p, T, v, e, sigma, params: GasParams):
    """Inverse of :func:`to_reduced`."""
    return (
        p * params.p_scale,
        T * params.T_scale,
        v * params.v_scale,
        e * params.e_scale,
        sigma * params.sigma_scale,
    )


@dataclass(frozen=True)
class GasModel:
    """Reduced Redlich-Kwong gas.

    Every method accepts scalars or numpy arrays (broadcast together) and
    raises :class:`DomainError` outside ``v > 1, T > 0``.
    """

    params: GasParams = field(default_factory=GasParams)

    @property
    def n(self) -> float:
        return self.params.n

    def potential(self, v, T) -> Partials:
        """The potential and its analytic partial derivatives."""
        _check(v, T)
        v = np.asarray(v, dtype=float)
        T = np.asarray(T, dtype=float)
        n = self.n
        L = _log_ratio(v)
        # Derivatives of L in powers of 1/v and 1/(v+1): no overflow or
        # cancellation for the huge gas volumes found at low temperature.
        r, r1 = 1.0 / v, 1.0 / (v + 1.0)
        L_v = r * r1
        L_vv = -L_v * (r + r1)
        L_vvv = 2.0 * L_v * (r * r + r * r1 + r1 * r1)
        w = T**-1.5
        parts = Partials(
            phi=0.5 * n * np.log(T) + np.log(v - 1.0) - w * L,
            phi_v=1.0 / (v - 1.0) - w * L_v,
            phi_T=0.5 * n / T + 1.5 * w / T * L,
            phi_vv=-1.0 / (v - 1.0) ** 2 - w * L_vv,
            phi_TT=-0.5 * n / T**2 - 3.75 * w / T**2 * L,
            phi_vT=1.5 * w / T * L_v,
            phi_vvv=2.0 / (v - 1.0) ** 3 - w * L_vvv,
        )
        return Partials(*(_unwrap(x) for x in parts))

    def pressure(self, v, T):
        _check(v, T)
        return T / (v - 1.0) - 1.0 / (np.sqrt(T) * v * (v + 1.0))

    def energy(self, v, T):
        _check(v, T)
        return 0.5 * self.n * T + 1.5 / np.sqrt(T) * _log_ratio(v)

    def entropy(self, v, T):
        """Reduced entropy in the gauge ``sigma = phi + T phi_T - n/2``."""
        _check(v, T)
        return 0.5 * self.n * np.log(T) + np.log(v - 1.0) + 0.5 * T**-1.5 * _log_ratio(v)

    def entropy_partials(self, v, T):
        """``(d sigma/dv, d sigma/dT)``; the first equals ``dp/dT`` at fixed v."""
        _check(v, T)
        w = T**-1.5
        s_v = 1.0 / (v - 1.0) + 0.5 * w / (v * (v + 1.0))
        s_T = 0.5 * self.n / T - 0.75 * w / T * _log_ratio(v)
        return s_v, s_T

    def gibbs(self, v, T):
        d = self.potential(v, T)
        return T * (v * d.phi_v - d.phi)

    def state(self, v: float, T: float) -> StatePoint:
        d = self.potential(v, T)
        return StatePoint(
            v=float(v),
            T=float(T),
            p=float(T * d.phi_v),
            e=float(T**2 * d.phi_T),
            sigma=float(self.entropy(v, T)),
            gamma=float(T * (v * d.phi_v - d.phi)),
        )

    def state_physical(self, v: float, T: float) -> StatePoint:
        """:meth:`state` mapped to physical units by the gas constants."""
        s = self.state(v, T)
        gp = self.params
        p, T_, v_, e, sigma = from_reduced(s.p, s.T, s.v, s.e, s.sigma, gp)
        return StatePoint(v_, T_, p, e, sigma, s.gamma * gp.e_scale)

    def kappa(self, v, T) -> KappaForm:
        d = self.potential(v, T)
        k_TT = -(d.phi_TT + 2.0 * d.phi_T / T)
        return KappaForm(_unwrap(k_TT), d.phi_vv)

    def is_applicable(self, v, T):
        """True where ``phi_vv < 0`` and ``phi_TT + 2 phi_T / T > 0`` (strict)."""
        d = self.potential(v, T)
        ok = (np.asarray(d.phi_vv) < 0) & (np.asarray(d.phi_TT + 2.0 * d.phi_T / T) > 0)
        return bool(ok) if ok.ndim == 0 else ok

    def spinodal_T(self, v):
        """Temperature where ``phi_vv = 0`` on the isochore ``v``."""
        if np.any(np.asarray(v) <= 1.0):
            raise DomainError(f"spinodal defined for v > 1, got {v!r}")
        v = np.asarray(v, dtype=float)
        ratio = ((v - 1.0) / v) ** 2 * (2.0 * v + 1.0) / (v + 1.0) ** 2
        return _unwrap(ratio ** (2.0 / 3.0))

    def spinodal_T_numeric(self, v: float, tol: float = 1e-14) -> float:
        """Root of ``phi_vv(v, .)`` by bracketed search, independent of the closed form."""
        # phi_vv = -1/(v-1)^2 + T^-1.5 * (2v+1)/(v^2 (v+1)^2) decreases in T.
        g = lambda T: float(self.potential(v, T).phi_vv)
        lo, hi = 1e-3, 1.0
        while g(lo) < 0:
            lo *= 0.1
        while g(hi) > 0:
            hi *= 10.0
        return find_root(g, Bracket.of(g, lo, hi), tol=tol)

    def spinodal_volumes(self, T: float) -> tuple[float, float]:
        """Left and right spinodal volumes at ``T < T_c``."""
        cp = self.critical_point
        if not 0 < T < cp.T_c:
            raise DomainError(f"spinodal volumes exist only for 0 < T < T_c={cp.T_c}, got {T}")
        g = lambda v: float(self.spinodal_T(v)) - T
        left = find_root(g, Bracket.of(g, 1.0 + 1e-12, cp.v_c), tol=1e-14)
        hi = 2.0 * cp.v_c
        while g(hi) > 0:
            hi *= 2.0
        right = find_root(g, Bracket.of(g, cp.v_c, hi), tol=1e-12 * hi)
        return left, right

    @cached_property
    def critical_point(self) -> CriticalPoint:
        """Apex of the spinodal: ``phi_vv = phi_vvv = 0``."""

        def F(v, T):
            d = self.potential(v, T)
            return d.phi_vv * (v - 1.0) ** 2, d.phi_vvv * (v - 1.0) ** 3

        v_c, T_c = newton2(
            F,
            _critical_jacobian, (4.0, 0.3), tol=1e-14, admissible=lambda v, T: v > 1.0 and T > 0.0
        )
        return CriticalPoint(float(v_c), float(T_c), float(self.pressure(v_c, T_c)))


def _critical_jacobian(v, T):
    """Jacobian of ``((v-1)^2 phi_vv, (v-1)^3 phi_vvv)`` in ``(v, T)``."""
    w = T**-1.5
    w_T = -1.5 * w / T
    # A = L_vv, B = L_vvv and their v-derivatives; v is near 4 here.
    A = 1.0 / (v + 1.0) ** 2 - 1.0 / v**2
    A_v = 2.0 / v**3 - 2.0 / (v + 1.0) ** 3
    B = A_v
    B_v = 6.0 / (v + 1.0) ** 4 - 6.0 / v**4
    # f1 = -1 - (v-1)^2 w A ; f2 = 2 - (v-1)^3 w B
    f1_v = -(2.0 * (v - 1.0) * A + (v - 1.0) ** 2 * A_v) * w
    f1_T = -(v - 1.0) ** 2 * A * w_T
    f2_v = -(3.0 * (v - 1.0) ** 2 * B + (v - 1.0) ** 3 * B_v) * w
    f2_T = -(v - 1.0) ** 3 * B * w_T
    return [[f1_v, f1_T], [f2_v, f2_T]]


def _unwrap(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x
