"""Filtration scenario files (TOML).

Example::

    [gas]
    n = 3

    [medium]
    k = 1.0
    mu = 1.0

    [flow]
    sigma0 = 1.0
    far_field_v = 20.0
    mode = "dirichlet_box"

    [[sources]]
    position = [0.0, 0.0, 0.0]
    intensity = 3e-4

    [domain]
    lower = [-1.0, -1.0, -1.0]
    upper = [1.0, 1.0, 1.0]
    resolution = [31, 31, 31]

Unknown sections or keys are rejected, with the dotted path of the
offending field in the message.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .eos import GasParams
from .filtration import BoxDomain, Mode, Source, SourceSystem
from .isentrope import DEFAULT_KNOTS, DEFAULT_V_MAX, MediumParams


class ConfigError(ValueError):
    """Invalid scenario file; the message names the offending field."""


_SCHEMA = {
    "gas": {"n": float, "a": float, "b": float, "R": float},
    "medium": {"k": float, "mu": float},
    "flow": {
        "sigma0": float,
        "far_field_v": float,
        "mode": str,
        "branch": str,
        "exclusion_radius": float,
    },
    "sources": None,  # array of tables, checked separately
    "domain": {"lower": list, "upper": list, "resolution": list},
    "isentrope": {"v_max": float, "knots": int},
    "output": {"directory": str, "vtk": bool, "csv_slice": bool, "slice_axis": int, "slice_value": float},
    "tolerances": {"harmonic": float},
}
_REQUIRED = {"flow": ("sigma0", "far_field_v"), "domain": ("lower", "upper", "resolution")}


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "out"
    vtk: bool = True
    csv_slice: bool = True
    slice_axis: int = 2
    slice_value: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    gas: GasParams
    sigma0: float
    medium: MediumParams
    sources: tuple
    far_field_v: float
    domain: BoxDomain
    mode: Mode = Mode.DIRICHLET_BOX
    branch: Optional[str] = None
    exclusion_radius: Optional[float] = None
    v_max: float = DEFAULT_V_MAX
    knots: int = DEFAULT_KNOTS
    output: OutputOptions = field(default_factory=OutputOptions)
    harmonic_tol: float = 1e-12
    name: str = "scenario"

    def source_system(self) -> SourceSystem:
        return SourceSystem(self.sources, self.far_field_v, self.sigma0, self.medium)


def _typed(path, value, kind):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{path}: expected {kind.__name__}, got {value!r}")
    return value


def _vec3(path, value, kind=float):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{path}: expected a list of three values, got {value!r}")
    return tuple(_typed(f"{path}[{i}]", x, kind) for i, x in enumerate(value))


def _section(raw, name):
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected a table")
    allowed = _SCHEMA[name]
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}: unknown key (allowed: {', '.join(sorted(allowed))})")
    for key in _REQUIRED.get(name, ()):
        if key not in sec:
            raise ConfigError(f"{name}.{key}: required key missing")
    return sec


def parse_config(text: str, name: str = "scenario") -> ScenarioConfig:
    """Validate TOML text into a :class:`ScenarioConfig`."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from exc
    for key in raw:
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown section (allowed: {', '.join(sorted(_SCHEMA))})")

    gas_raw = _section(raw, "gas")
    medium_raw = _section(raw, "medium")
    flow = _section(raw, "flow")
    dom_raw = _section(raw, "domain")
    iso_raw = _section(raw, "isentrope")
    out_raw = _section(raw, "output")
    tol_raw = _section(raw, "tolerances")

    try:
        gas = GasParams(**{k: _typed(f"gas.{k}", v, float) for k, v in gas_raw.items()})
    except ValueError as exc:
        raise ConfigError(f"gas: {exc}") from exc
    try:
        medium = MediumParams(**{k: _typed(f"medium.{k}", v, float) for k, v in medium_raw.items()})
    except ValueError as exc:
        raise ConfigError(f"medium: {exc}") from exc

    sigma0 = _typed("flow.sigma0", flow["sigma0"], float)
    v0 = _typed("flow.far_field_v", flow["far_field_v"], float)
    if not v0 > 1.0:
        raise ConfigError(f"flow.far_field_v: must exceed 1, got {v0}")
    mode = flow.get("mode", Mode.DIRICHLET_BOX.value)
    try:
        mode = Mode(_typed("flow.mode", mode, str))
    except ValueError:
        raise ConfigError(f"flow.mode: expected one of {[m.value for m in Mode]}, got {mode!r}") from None
    branch = flow.get("branch")
    if branch is not None and _typed("flow.branch", branch, str) != "continuity":
        raise ConfigError(f"flow.branch: only 'continuity' is supported, got {branch!r}")
    r_excl = flow.get("exclusion_radius")
    if r_excl is not None:
        r_excl = _typed("flow.exclusion_radius", r_excl, float)
        if r_excl <= 0:
            raise ConfigError("flow.exclusion_radius: must be positive")

    src_raw = raw.get("sources", [])
    if not isinstance(src_raw, list):
        raise ConfigError("sources: expected an array of tables ([[sources]])")
    sources = []
    for i, s in enumerate(src_raw):
        path = f"sources[{i}]"
        if not isinstance(s, dict):
            raise ConfigError(f"{path}: expected a table")
        for key in s:
            if key not in ("position", "intensity"):
                raise ConfigError(f"{path}.{key}: unknown key (allowed: intensity, position)")
        for key in ("position", "intensity"):
            if key not in s:
                raise ConfigError(f"{path}.{key}: required key missing")
        sources.append(Source(_vec3(f"{path}.position", s["position"]), _typed(f"{path}.intensity", s["intensity"], float)))
    if len({s.position for s in sources}) != len(sources):
        raise ConfigError("sources: positions must be pairwise distinct")

    lower = _vec3("domain.lower", dom_raw["lower"])
    upper = _vec3("domain.upper", dom_raw["upper"])
    res = _vec3("domain.resolution", dom_raw["resolution"], int)
    try:
        domain = BoxDomain(lower, upper, res)
    except ValueError as exc:
        raise ConfigError(f"domain: {exc}") from exc
    for i, s in enumerate(sources):
        if not domain.contains_strictly(s.position):
            raise ConfigError(f"sources[{i}].position: {s.position} is not strictly inside the domain box")

    v_max = _typed("isentrope.v_max", iso_raw.get("v_max", DEFAULT_V_MAX), float)
    knots = _typed("isentrope.knots", iso_raw.get("knots", DEFAULT_KNOTS), int)
    if v_max <= 1.0 or knots < 2:
        raise ConfigError("isentrope: need v_max > 1 and knots >= 2")

    out_kwargs = {}
    for k, v in out_raw.items():
        out_kwargs[k] = _typed(f"output.{k}", v, _SCHEMA["output"][k])
    if out_kwargs.get("slice_axis", 2) not in (0, 1, 2):
        raise ConfigError("output.slice_axis: must be 0, 1 or 2")
    htol = _typed("tolerances.harmonic", tol_raw.get("harmonic", 1e-12), float)

    return ScenarioConfig(
        gas=gas,
        sigma0=sigma0,
        medium=medium,
        sources=tuple(sources),
        far_field_v=v0,
        domain=domain,
        mode=mode,
        branch=branch,
        exclusion_radius=r_excl,
        v_max=v_max,
        knots=knots,
        output=OutputOptions(**out_kwargs),
        harmonic_tol=htol,
        name=name,
    )


def bundled_scenarios() -> list:
    """Names of the scenario files shipped with the package."""
    root = resources.files("rkfiltration") / "scenarios"
    return sorted(p.name[: -len(".toml")] for p in root.iterdir() if p.name.endswith(".toml"))


def load_config(path_or_name: str) -> ScenarioConfig:
    """Read a scenario from a file path or a bundled scenario name."""
    p = Path(path_or_name)
    if p.is_file():
        return parse_config(p.read_text(), name=p.stem)
    root = resources.files("rkfiltration") / "scenarios"
    cand = root / f"{p.name.removesuffix('.toml')}.toml"
    if cand.is_file():
        return parse_config(cand.read_text(), name=p.stem)
    raise ConfigError(f"no scenario file or bundled scenario named {path_or_name!r} (bundled: {', '.join(bundled_scenarios())})")
