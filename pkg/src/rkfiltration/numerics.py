"""Scalar numerical kernels shared by the thermodynamics and filtration code.

Bracketed root finding, a damped 2x2 Newton solver, adaptive Simpson
quadrature and inversion of monotone lookup tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

DEFAULT_TOL = 1e-10


class NumericsError(RuntimeError):
    """Base class for failures of the numerical kernels."""


class BracketError(NumericsError, ValueError):
    """The supplied interval does not bracket a sign change."""


class ConvergenceError(NumericsError):
    """An iterative solver stopped without meeting its tolerance.

    Attributes:
        last: last iterate reached by the solver.
        history: residual norms, one per iteration.
    """

    def __init__(self, message, last=None, history=None):
        super().__init__(message)
        self.last = last
        self.history = list(history or [])


class QuadratureError(NumericsError):
    """Adaptive quadrature exceeded its recursion budget."""


class RangeError(NumericsError, ValueError):
    """A lookup value lies outside a table's range.

    Attributes:
        side: ``"below"`` or ``"above"``.
    """

    def __init__(self, message, side):
        super().__init__(message)
        self.side = side


@dataclass(frozen=True)
class Bracket:
    """Interval ``[lo, hi]`` with function values of opposite sign at the ends."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0:
            raise BracketError(
                f"no sign change on [{self.lo}, {self.hi}]: "
                f"f(lo)={self.f_lo:.6g}, f(hi)={self.f_hi:.6g}"
            )

    @classmethod
    def of(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, f(lo), f(hi))

    @property
    def width(self) -> float:
        return self.hi - self.lo


def expand_bracket(f, lo, hi, factor=2.0, max_iter=200, lower_bound=None, upper_bound=None):
    """Grow ``[lo, hi]`` geometrically until ``f`` changes sign.

    ``lower_bound`` / ``upper_bound`` are open limits the interval may
    approach but never reach (e.g. ``v > 1``).
    """
    f_lo, f_hi = f(lo), f(hi)
    for _ in range(max_iter):
        if f_lo * f_hi <= 0:
            return Bracket(lo, hi, f_lo, f_hi)
        width = hi - lo
        if abs(f_lo) < abs(f_hi):
            lo = lo - factor * width
            if lower_bound is not None and lo <= lower_bound:
                lo = lower_bound + 0.5 * (lo + factor * width - lower_bound)
            f_lo = f(lo)
        else:
            hi = hi + factor * width
            if upper_bound is not None and hi >= upper_bound:
                hi = upper_bound - 0.5 * (upper_bound - hi + factor * width)
            f_hi = f(hi)
    raise BracketError(f"could not bracket a root, last interval [{lo}, {hi}]")


def find_root(f: Callable[[float], float], bracket: Bracket, tol: float = DEFAULT_TOL) -> float:
    """Root of ``f`` inside ``bracket`` by Brent's method.

    The final bracket width is at most ``tol`` (absolute) plus a few ulps of
    the root. Raises BracketError for an invalid bracket.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if bracket.f_lo == 0.0:
        return bracket.lo
    if bracket.f_hi == 0.0:
        return bracket.hi
    if bracket.f_lo * bracket.f_hi > 0:
        raise BracketError("bracket endpoints have equal signs")
    return brentq(f, bracket.lo, bracket.hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


def newton2(
    F: Callable[[float, float], tuple[float, float]],
    J: Callable[[float, float], Sequence[Sequence[float]]],
    guess: tuple[float, float],
    tol: float = DEFAULT_TOL,
    max_iter: int = 100,
    admissible: Optional[Callable[[float, float], bool]] = None,
) -> tuple[float, float]:
    """Solve ``F(x, y) = 0`` by Newton's method with backtracking.

    Args:
        F: residual function returning a pair.
        J: analytic Jacobian, ``[[dF0/dx, dF0/dy], [dF1/dx, dF1/dy]]``.
        guess: starting point.
        tol: stop once the residual 2-norm drops below this.
        max_iter: iteration cap.
        admissible: predicate a trial point must satisfy (e.g. domain
            limits); inadmissible trial steps are halved like rejected ones.

    Returns:
        The solution ``(x, y)``.

    Raises:
        ConvergenceError: singular Jacobian, failed line search or iteration
            cap, carrying the last iterate.
    """
    x, y = float(guess[0]), float(guess[1])
    r = np.asarray(F(x, y), dtype=float)
    norm = float(np.hypot(*r))
    history = [norm]
    for _ in range(max_iter):
        if norm < tol:
            return x, y
        jac = np.asarray(J(x, y), dtype=float)
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        if det == 0.0 or not np.isfinite(det):
            raise ConvergenceError("singular Jacobian", last=(x, y), history=history)
        step = np.linalg.solve(jac, -r)
        lam = 1.0
        while True:
            xt, yt = x + lam * step[0], y + lam * step[1]
            ok = admissible is None or admissible(xt, yt)
            if ok:
                rt = np.asarray(F(xt, yt), dtype=float)
                nt = float(np.hypot(*rt))
                if np.isfinite(nt) and nt < norm:
                    break
            lam *= 0.5
            if lam < 1e-12:
                if norm < 100 * tol:
                    # Stalled at round-off level just above tol.
                    return x, y
                raise ConvergenceError(
                    f"line search failed at residual {norm:.3e}", last=(x, y), history=history
                )
        x, y, r, norm = xt, yt, rt, nt
        history.append(norm)
    if norm < tol:
        return x, y
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations, residual {norm:.3e}",
        last=(x, y),
        history=history,
    )


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    rtol: float = 0.0,
    max_depth: int = 50,
) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    The local acceptance test is ``|S2 - S1| <= 15 * max(tol, rtol * |S2|)``
    with the absolute budget split between halves. ``a > b`` flips the sign.

    Raises:
        QuadratureError: recursion depth exceeded ``max_depth`` (typically
            a singular integrand).
    """
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, tol, rtol, max_depth)

    def g(x):
        try:
            return f(x)
        except (ZeroDivisionError, OverflowError) as exc:
            raise QuadratureError(f"integrand failed at x={x!r}: {exc}") from exc

    fa, fm, fb = g(a), g(0.5 * (a + b)), g(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson(g, a, b, fa, fm, fb, whole, tol, rtol, max_depth)


def _simpson(f, a, b, fa, fm, fb, whole, tol, rtol, depth):
    # Iterative stack keeps deep refinements off the Python call stack.
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, depth)]
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        both = left + right
        delta = both - whole
        if not math.isfinite(both):
            raise QuadratureError(f"non-finite integrand on [{a}, {b}]")
        if abs(delta) <= 15.0 * max(tol, rtol * abs(both)):
            total += both + delta / 15.0
            continue
        if depth <= 0:
            raise QuadratureError(
                f"recursion depth exceeded near x={m:.6g} (|error| ~ {abs(delta):.3e})"
            )
        stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))
        stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth - 1))
    return total


@dataclass(frozen=True)
class MonotoneTable:
    """Knots ``(x, y)`` with ``x`` strictly increasing and ``y`` strictly monotone.

    ``exact`` optionally attaches the function the table samples; inversion
    then polishes the interpolated guess with a root solve on it.
    """

    x: np.ndarray
    y: np.ndarray
    exact: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("table needs matching 1-D knot arrays of length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        dy = np.diff(y)
        if not (np.all(dy > 0) or np.all(dy < 0)):
            raise ValueError("knot ordinates must be strictly monotone")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def direction(self) -> str:
        return "increasing" if self.y[-1] > self.y[0] else "decreasing"

    @property
    def y_range(self) -> tuple[float, float]:
        return float(min(self.y[0], self.y[-1])), float(max(self.y[0], self.y[-1]))

    def inverse_interpolant(self) -> PchipInterpolator:
        if self.direction == "increasing":
            return PchipInterpolator(self.y, self.x)
        return PchipInterpolator(self.y[::-1], self.x[::-1])


def invert_table(t: MonotoneTable, y: float, tol: float = DEFAULT_TOL) -> float:
    """``x`` with ``t(x) = y``, via monotone cubic interpolation of the inverse.

    Raises:
        RangeError: ``y`` outside the tabulated range; ``side`` says which end.
    """
    lo, hi = t.y_range
    if y < lo:
        raise RangeError(f"value {y!r} below table range [{lo}, {hi}]", "below")
    if y > hi:
        raise RangeError(f"value {y!r} above table range [{lo}, {hi}]", "above")
    hit = np.flatnonzero(t.y == y)
    if hit.size:
        return float(t.x[hit[0]])
    x0 = float(t.inverse_interpolant()(y))
    if t.exact is None:
        return x0
    i = int(np.searchsorted(t.x, x0))
    i = min(max(i, 1), t.x.size - 1)
    a, b = t.x[i - 1], t.x[i]
    g = lambda s: t.exact(s) - y
    return find_root(g, Bracket(a, b, t.y[i - 1] - y, t.y[i] - y), tol=tol * max(1.0, abs(x0)))
