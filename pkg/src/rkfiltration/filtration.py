"""Steady adiabatic filtration from point sources on a box grid.

Along one entropy level the flow reduces to Laplace's equation for the
potential ``u = Q(v)``. Point sources of intensity ``J_i`` at ``a_i``
contribute ``J_i / (4 pi |x - a_i|)``; a harmonic correction ``u0``
enforces ``v = v0`` on the box boundary (Dirichlet mode), or ``u0 = Q(v0)``
in free space. The volume field is ``v = Q^-1(u)``.

Grid arrays are indexed ``[k, j, i]`` (x3, x2, x1), so C-order
flattening runs x1 fastest.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .isentrope import Isentrope, MediumParams, MultivaluedError
from .numerics import ConvergenceError
from .phase import CoexistenceCurve, PhaseLabel, classify, trace_curve

TRACE_FLOOR = 0.02


class ConfigurationError(ValueError):
    """Scenario parameters that cannot produce a field."""


class SingularityError(ValueError):
    """Potential requested at a source location."""


class Mask(enum.IntEnum):
    VALID = 0
    NEAR_SOURCE = 1
    OUT_OF_RANGE = 2


class Mode(str, enum.Enum):
    FREE_SPACE = "free_space"
    DIRICHLET_BOX = "dirichlet_box"


@dataclass(frozen=True)
class Source:
    position: tuple
    intensity: float


@dataclass(frozen=True)
class SourceSystem:
    sources: tuple
    far_field_v: float
    sigma0: float
    medium: MediumParams = field(default_factory=MediumParams)

    def __post_init__(self):
        srcs = tuple(
            s if isinstance(s, Source) else Source(tuple(map(float, s[0])), float(s[1]))
            for s in self.sources
        )
        object.__setattr__(self, "sources", srcs)
        if not self.far_field_v > 1.0:
            raise ConfigurationError(f"far-field volume must exceed 1, got {self.far_field_v}")
        pos = [s.position for s in srcs]
        if any(len(p) != 3 for p in pos):
            raise ConfigurationError("source positions must be 3-D points")
        if len(set(pos)) != len(pos):
            raise ConfigurationError("source positions must be pairwise distinct")

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sources], dtype=float).reshape(-1, 3)

    @property
    def intensities(self) -> np.ndarray:
        return np.array([s.intensity for s in self.sources], dtype=float)


@dataclass(frozen=True)
class BoxDomain:
    lower: tuple
    upper: tuple
    resolution: tuple

    def __post_init__(self):
        lo, hi, res = tuple(map(float, self.lower)), tuple(map(float, self.upper)), tuple(map(int, self.resolution))
        if not (len(lo) == len(hi) == len(res) == 3):
            raise ConfigurationError("box corners and resolution need three components")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ConfigurationError(f"box must have positive extents, got {lo} .. {hi}")
        if any(n < 2 for n in res):
            raise ConfigurationError(f"resolution must be >= 2 per axis, got {res}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "resolution", res)

    @property
    def spacing(self) -> tuple:
        return tuple((h - l) / (n - 1) for l, h, n in zip(self.lower, self.upper, self.resolution))

    @property
    def shape(self) -> tuple:
        """Array shape ``(n3, n2, n1)``."""
        return self.resolution[::-1]

    def axes(self):
        return [np.linspace(l, h, n) for l, h, n in zip(self.lower, self.upper, self.resolution)]

    def coordinates(self):
        """``(x1, x2, x3)`` arrays of node coordinates, each of :attr:`shape`."""
        a1, a2, a3 = self.axes()
        x3, x2, x1 = np.meshgrid(a3, a2, a1, indexing="ij")
        return x1, x2, x3

    def boundary_mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        m[0, :, :] = m[-1, :, :] = True
        m[:, 0, :] = m[:, -1, :] = True
        m[:, :, 0] = m[:, :, -1] = True
        return m

    def contains_strictly(self, point) -> bool:
        return all(l < x < h for l, x, h in zip(self.lower, point, self.upper))


def _source_sum(x1, x2, x3, sys: SourceSystem):
    total = np.zeros(np.broadcast(x1, x2, x3).shape)
    for s in sys.sources:
        r = np.sqrt((x1 - s.position[0]) ** 2 + (x2 - s.position[1]) ** 2 + (x3 - s.position[2]) ** 2)
        if np.any(r == 0.0):
            raise SingularityError(f"potential evaluated at source {s.position}")
        total = total + s.intensity / (4.0 * math.pi * r)
    return total


def u_free_space(x, sys: SourceSystem, iso: Isentrope):
    """``sum_i J_i / (4 pi |x - a_i|) + Q(v0)`` at point(s) ``x`` (last axis 3)."""
    x = np.asarray(x, dtype=float)
    u = _source_sum(x[..., 0], x[..., 1], x[..., 2], sys) + iso.q(sys.far_field_v)
    return float(u) if np.ndim(u) == 0 else u


class HarmonicSolution(NamedTuple):
    values: np.ndarray
    residual: float
    iterations: int


def _neg_laplacian(u, w):
    """Seven-point ``-Delta_h`` on interior nodes of a padded array ``u``."""
    c = u[1:-1, 1:-1, 1:-1]
    return (
        w[0] * (2.0 * c - u[1:-1, 1:-1, :-2] - u[1:-1, 1:-1, 2:])
        + w[1] * (2.0 * c - u[1:-1, :-2, 1:-1] - u[1:-1, 2:, 1:-1])
        + w[2] * (2.0 * c - u[:-2, 1:-1, 1:-1] - u[2:, 1:-1, 1:-1])
    )


def discrete_laplacian(u: np.ndarray, domain: BoxDomain) -> np.ndarray:
    """Seven-point Laplacian of a grid function at interior nodes."""
    h1, h2, h3 = domain.spacing
    return -_neg_laplacian(u, (1.0 / h1**2, 1.0 / h2**2, 1.0 / h3**2))


def solve_harmonic(
    domain: BoxDomain,
    boundary_values,
    tol: float = 1e-12,
    max_iter: Optional[int] = None,
) -> HarmonicSolution:
    """Discrete Dirichlet problem for Laplace's equation on the box.

    ``boundary_values(x1, x2, x3)`` is evaluated on boundary nodes. The
    interior solve is matrix-free conjugate gradients on the seven-point
    stencil, stopped at relative residual ``tol``.

    Raises:
        ConvergenceError: iteration cap reached; ``history`` has the residuals.
    """
    x1, x2, x3 = domain.coordinates()
    bmask = domain.boundary_mask()
    g = np.zeros(domain.shape)
    g[bmask] = np.asarray(boundary_values(x1[bmask], x2[bmask], x3[bmask]), dtype=float)
    if not np.all(np.isfinite(g[bmask])):
        raise ConfigurationError("boundary values must be finite")
    h1, h2, h3 = domain.spacing
    w = (1.0 / h1**2, 1.0 / h2**2, 1.0 / h3**2)
    inner = tuple(n - 2 for n in domain.shape)
    if min(inner) <= 0:
        return HarmonicSolution(g, 0.0, 0)

    # b = -A g restricted to the interior (g vanishes inside).
    b = -_neg_laplacian(g, w)
    work = g.copy()

    def apply(x):
        work[1:-1, 1:-1, 1:-1] = x
        work_b = work.copy()
        work_b[bmask] = 0.0
        return _neg_laplacian(work_b, w)

    # Starting guess: mean of boundary data.
    x = np.full(inner, float(np.mean(g[bmask])))
    r = b - apply(x)
    p = r.copy()
    rr = float(np.vdot(r, r))
    b_norm = math.sqrt(float(np.vdot(b, b)))
    scale = b_norm if b_norm > 0 else 1.0
    history = [math.sqrt(rr) / scale]
    max_iter = max_iter or 20 * int(sum(domain.shape)) + 200
    it = 0
    while history[-1] > tol and it < max_iter:
        Ap = apply(p)
        alpha = rr / float(np.vdot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(np.vdot(r, r))
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
        history.append(math.sqrt(rr) / scale)
    # Report the true residual, not the recursively updated one.
    true_res = float(np.linalg.norm(b - apply(x))) / scale
    if true_res > max(tol, 10 * history[-1]) and it >= max_iter:
        raise ConvergenceError(
            f"harmonic solve stalled at relative residual {true_res:.3e} after {it} iterations",
            last=None,
            history=history,
        )
    out = g.copy()
    out[1:-1, 1:-1, 1:-1] = x
    return HarmonicSolution(out, true_res, it)


@dataclass
class PhaseField:
    """Per-node state of a filtration solve; masked nodes carry NaN / -1."""

    domain: BoxDomain
    u: np.ndarray
    v: np.ndarray
    T: np.ndarray
    p: np.ndarray
    label: np.ndarray
    mask: np.ndarray
    sigma0: float
    harmonic_residual: float = 0.0
    harmonic_iterations: int = 0

    def counts(self) -> dict:
        out = {m.name.lower(): int(np.count_nonzero(self.mask == m)) for m in Mask}
        valid = self.mask == Mask.VALID
        for lab in PhaseLabel:
            out[lab.name.lower()] = int(np.count_nonzero(self.label[valid] == lab))
        return out

    def summary(self) -> str:
        c = self.counts()
        n = int(self.mask.size)
        lines = [f"nodes: {n}", f"sigma0: {self.sigma0:.12g}"]
        for key in ("valid", "near_source", "out_of_range"):
            lines.append(f"{key}: {c[key]}")
        for lab in PhaseLabel:
            lines.append(f"{lab.name.lower()}: {c[lab.name.lower()]}")
        lines.append(f"harmonic_residual: {self.harmonic_residual:.3e}")
        lines.append(f"harmonic_iterations: {self.harmonic_iterations}")
        return "\n".join(lines)


class SourceReport(NamedTuple):
    position: tuple
    intensity: float
    feasible: bool
    max_feasible_intensity: float
    worst_u: float


def _sphere_directions():
    d = [
        (i, j, k)
        for i in (-1, 0, 1)
        for j in (-1, 0, 1)
        for k in (-1, 0, 1)
        if (i, j, k) != (0, 0, 0)
    ]
    d = np.array(d, dtype=float)
    return d / np.linalg.norm(d, axis=1)[:, None]


def validate_sources(sys: SourceSystem, iso: Isentrope, r_excl: float) -> list:
    """Range check of ``u`` near each source; report only, never raises.

    ``u`` must stay below ``sup Q = 0``. It is sampled on a sphere of radius
    ``r_excl`` around each source and along the segment to the nearest
    neighbour. The maximal feasible intensity keeps the worst sample of the
    other sources' contribution plus ``J / (4 pi r_excl) + Q(v0)`` negative;
    a negative intensity only lowers ``u`` and is always feasible.
    """
    q0 = float(iso.q(sys.far_field_v))
    pos = sys.positions
    dirs = _sphere_directions()
    out = []
    for i, s in enumerate(sys.sources):
        a = np.asarray(s.position)
        pts = [a + r_excl * dirs]
        if len(sys.sources) > 1:
            others = np.delete(pos, i, axis=0)
            dist = np.linalg.norm(others - a, axis=1)
            nb = others[np.argmin(dist)]
            t = np.linspace(0.0, 1.0, 65)[:, None]
            seg = a + t * (nb - a)
            keep = (np.linalg.norm(seg - a, axis=1) >= r_excl) & (np.linalg.norm(seg - nb, axis=1) >= r_excl)
            pts.append(seg[keep])
        pts = np.concatenate(pts)
        u = _source_sum(pts[:, 0], pts[:, 1], pts[:, 2], sys) + q0
        worst = float(np.max(u))
        rest = SourceSystem(tuple(o for j, o in enumerate(sys.sources) if j != i), sys.far_field_v, sys.sigma0, sys.medium)
        sphere = a + r_excl * dirs
        other = _source_sum(sphere[:, 0], sphere[:, 1], sphere[:, 2], rest) if rest.sources else np.zeros(len(dirs))
        j_max = 4.0 * math.pi * r_excl * float(np.min(-q0 - other))
        if s.intensity < 0:
            j_max = math.inf
        out.append(SourceReport(s.position, s.intensity, worst < iso.q_range[1], j_max, worst))
    return out


def _continuity_branch(iso: Isentrope, v0: float):
    """Monotone run of the Q table containing ``v0``: ``(v_knots, Q_knots)``."""
    dq = np.diff(iso.Q_tab)
    sign = np.sign(dq)
    i0 = int(np.clip(np.searchsorted(iso.v_grid, v0) - 1, 0, dq.size - 1))
    lo = i0
    while lo > 0 and sign[lo - 1] == sign[i0]:
        lo -= 1
    hi = i0
    while hi < dq.size - 1 and sign[hi + 1] == sign[i0]:
        hi += 1
    return iso.v_grid[lo : hi + 2], iso.Q_tab[lo : hi + 2]


def _invert_on_branch(iso: Isentrope, v_k, q_k, u):
    """Q^-1 restricted to one monotone run; NaN outside its range."""
    order = np.argsort(q_k)
    interp = PchipInterpolator(q_k[order], np.log(v_k[order] - 1.0), extrapolate=False)
    t = interp(u)
    inside = np.isfinite(t)
    tt = t[inside]
    uu = u[inside]
    for _ in range(30):
        v = 1.0 + np.exp(tt)
        step = (iso.q(v) - uu) / iso._dq_dt(tt)
        tt = tt - step
        if np.all(np.abs(step) < 1e-14):
            break
    out = np.full(u.shape, np.nan)
    out[inside] = 1.0 + np.exp(tt)
    return out


def solve_field(
    sys: SourceSystem,
    domain: BoxDomain,
    iso: Isentrope,
    curve: Optional[CoexistenceCurve] = None,
    mode: Mode = Mode.FREE_SPACE,
    r_excl: Optional[float] = None,
    branch: Optional[str] = None,
    harmonic_tol: float = 1e-12,
) -> PhaseField:
    """Volume, temperature, pressure and phase on every node of ``domain``.

    Args:
        sys: sources, far-field volume and entropy level.
        domain: box grid; sources must lie strictly inside it.
        iso: isentrope at ``sys.sigma0``.
        curve: coexistence curve for labelling. It is retraced lower when
            the field reaches colder states than it covers (down to
            ``TRACE_FLOOR``; colder nodes are masked out of range).
        mode: free space (``u0 = Q(v0)``) or Dirichlet box (``v = v0`` on
            the box boundary).
        r_excl: exclusion radius around each source; default one cell
            diagonal.
        branch: ``None`` refuses non-invertible isentropes; ``"continuity"``
            inverts on the monotone branch of Q containing ``v0`` and masks
            nodes that branch cannot reach.

    Raises:
        MultivaluedError: non-invertible isentrope without a branch policy.
        ConfigurationError: inconsistent inputs, or every node out of range.
    """
    mode = Mode(mode)
    if not math.isclose(iso.sigma0, sys.sigma0, rel_tol=0, abs_tol=1e-12):
        raise ConfigurationError(f"isentrope sigma0={iso.sigma0} differs from scenario sigma0={sys.sigma0}")
    if not iso.invertible and branch != "continuity":
        raise MultivaluedError(
            f"Q is not invertible at sigma0={sys.sigma0} (threshold sigma* ~ -0.5): "
            "the field would be multivalued; pass branch='continuity' to select "
            "the branch through the far-field state",
            [],
        )
    for s in sys.sources:
        if not domain.contains_strictly(s.position):
            raise ConfigurationError(f"source {s.position} is not strictly inside the box")
    if r_excl is None:
        r_excl = math.sqrt(sum(h * h for h in domain.spacing))

    x1, x2, x3 = domain.coordinates()
    dist = np.full(domain.shape, np.inf)
    for s in sys.sources:
        r = np.sqrt((x1 - s.position[0]) ** 2 + (x2 - s.position[1]) ** 2 + (x3 - s.position[2]) ** 2)
        dist = np.minimum(dist, r)
    near = dist <= r_excl

    q0 = float(iso.q(sys.far_field_v))
    u = np.full(domain.shape, np.nan)
    harm = HarmonicSolution(None, 0.0, 0)
    safe = ~near
    if mode is Mode.FREE_SPACE:
        u[safe] = _source_sum(x1[safe], x2[safe], x3[safe], sys) + q0
    else:
        harm = solve_harmonic(
            domain, lambda a, b, c: q0 - _source_sum(a, b, c, sys), tol=harmonic_tol
        )
        u[safe] = _source_sum(x1[safe], x2[safe], x3[safe], sys) + harm.values[safe]

    if iso.invertible:
        in_range = safe & np.isfinite(u) & (u < iso.q_range[1])
        v = np.full(domain.shape, np.nan)
        v[in_range] = iso.invert(u[in_range])
    else:
        v_k, q_k = _continuity_branch(iso, sys.far_field_v)
        v = np.full(domain.shape, np.nan)
        v[safe] = _invert_on_branch(iso, v_k, q_k, u[safe])
        in_range = safe & np.isfinite(v)

    T = np.full(domain.shape, np.nan)
    T[in_range] = iso.temperature(v[in_range])
    in_range &= np.isfinite(T)
    if not np.any(in_range):
        raise ConfigurationError(
            "every node is out of range: source intensities push u outside the range of Q "
            f"(sup Q = {iso.q_range[1]}); see validate_sources"
        )
    t_low = float(np.min(T[in_range]))
    if t_low < TRACE_FLOOR:
        in_range &= T >= TRACE_FLOOR
        t_low = float(np.min(T[in_range]))
    T_c = iso.gas.critical_point.T_c
    need_low = t_low < T_c
    if curve is None or (need_low and curve.T_min > t_low):
        lo = max(TRACE_FLOOR, 0.98 * min(t_low, curve.T_min if curve is not None else 0.15))
        curve = trace_curve(iso.gas, T_min=lo, steps=300)

    p = np.full(domain.shape, np.nan)
    p[in_range] = iso.gas.pressure(v[in_range], T[in_range])
    label = np.full(domain.shape, -1, dtype=np.int8)
    label[in_range] = classify(iso.gas, v[in_range], T[in_range], curve)
    v[~in_range] = np.nan
    T[~in_range] = np.nan

    mask = np.full(domain.shape, int(Mask.OUT_OF_RANGE), dtype=np.int8)
    mask[in_range] = Mask.VALID
    mask[near] = Mask.NEAR_SOURCE
    return PhaseField(domain, u, v, T, p, label, mask, sys.sigma0, harm.residual, harm.iterations)
