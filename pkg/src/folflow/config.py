"""Run configurations: a small YAML schema parsed fail-closed into dataclasses.

Unknown keys anywhere raise ParseError; value constraints are checked all at
once and reported together in a single ValidationError.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import yaml

from .errors import ParseError, ValidationError
from .families import FAMILY_PARAMS, build_field
from .fiber import FiberGrid, ScalarField, Topology, build_grid

SCENARIOS = ("surface", "twisted", "normalized", "cole_hopf_check", "spectral_report")
SCHEMES = ("crank_nicolson", "explicit_euler")


@dataclass
class GridSpec:
    topology: str
    length: float
    n_points: int


@dataclass
class TimeSpec:
    dt: float
    t_end: float
    record_every: int
    snapshots: tuple


@dataclass
class BoundarySpec:
    kind: str
    left: float | None = None
    right: float | None = None


@dataclass
class FieldSpec:
    family: str
    params: dict


@dataclass
class ToleranceSpec:
    gap_min: float = 1e-6
    eps_t: float = 1e-8
    converged_dev: float = 1e-5


@dataclass
class RunConfig:
    scenario: str
    grid: GridSpec
    time: TimeSpec
    scheme: str
    boundary: BoundarySpec
    initial: FieldSpec
    potential: FieldSpec
    t2_initial: FieldSpec
    n_rank: int
    base_values: tuple
    modes: int
    n_random: int
    seed: int
    output_dir: str
    emit_plots: bool
    tolerances: ToleranceSpec


_TOP_KEYS = {
    "scenario", "grid", "time", "scheme", "boundary", "initial", "potential",
    "t2_initial", "n_rank", "base_values", "modes", "n_random", "seed",
    "output_dir", "emit_plots", "tolerances",
}
_GRID_KEYS = {"topology", "length", "n_points"}
_TIME_KEYS = {"dt", "t_end", "record_every", "snapshots"}
_BOUNDARY_KEYS = {"kind", "left", "right"}
_TOL_KEYS = {"gap_min", "eps_t", "converged_dev"}


def _require_mapping(obj, where: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{where} must be a mapping, got {type(obj).__name__}")
    return obj


def _reject_unknown(mapping: dict, allowed: set, where: str):
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ParseError(f"unknown key(s) {unknown} in {where}")


def _field_spec(mapping, where: str) -> FieldSpec:
    mapping = _require_mapping(mapping, where)
    if "family" not in mapping:
        raise ParseError(f"{where} needs a 'family' key")
    family = mapping["family"]
    if not isinstance(family, str) or family not in FAMILY_PARAMS:
        raise ValidationError(
            f"{where}: unknown family {family!r}; known families: {sorted(FAMILY_PARAMS)}"
        )
    _reject_unknown(mapping, {"family", *FAMILY_PARAMS[family]}, where)
    params = {k: v for k, v in mapping.items() if k != "family"}
    missing = sorted(set(FAMILY_PARAMS[family]) - set(params))
    if missing:
        raise ValidationError(f"{where}: family {family!r} is missing parameter(s) {missing}")
    return FieldSpec(family=family, params=params)


def _as_number(value, where: str, errs: list) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errs.append(f"{where} must be a number, got {value!r}")
        return float("nan")
    return float(value)


def _as_int(value, where: str, errs: list) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        errs.append(f"{where} must be an integer, got {value!r}")
        return 0
    return value


def parse_config(path) -> RunConfig:
    """Read and validate one YAML run configuration.

    Raises ParseError for malformed text or unknown keys, ValidationError
    (listing every violated constraint) for bad values.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from err
    return parse_config_text(text, base_dir=path.parent)


def parse_config_text(text: str, base_dir=None) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        loc = f" (line {mark.line + 1})" if mark is not None else ""
        raise ParseError(f"invalid YAML{loc}: {err}") from err
    raw = _require_mapping(raw, "configuration")
    _reject_unknown(raw, _TOP_KEYS, "configuration")
    errs: list[str] = []
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        errs.append(f"scenario must be one of {list(SCENARIOS)}, got {scenario!r}")

    if "grid" not in raw:
        raise ParseError("configuration needs a 'grid' section")
    grid_map = _require_mapping(raw["grid"], "grid")
    _reject_unknown(grid_map, _GRID_KEYS, "grid")
    topology = grid_map.get("topology")
    if topology not in ("circle", "interval"):
        errs.append(f"grid.topology must be 'circle' or 'interval', got {topology!r}")
        topology = "circle"
    length = _as_number(grid_map.get("length", float("nan")), "grid.length", errs)
    n_points = _as_int(grid_map.get("n_points", 0), "grid.n_points", errs)
    if not (length > 0.0 and np.isfinite(length)):
        errs.append(f"grid.length must be positive and finite, got {length}")
    if n_points < 8:
        errs.append(f"grid.n_points must be at least 8, got {n_points}")
    grid_spec = GridSpec(topology=topology, length=length, n_points=n_points)
    grid = None
    if not errs:
        grid = build_grid(topology, length, n_points)

    if "time" not in raw:
        raise ParseError("configuration needs a 'time' section")
    time_map = _require_mapping(raw["time"], "time")
    _reject_unknown(time_map, _TIME_KEYS, "time")
    t_end = _as_number(time_map.get("t_end", float("nan")), "time.t_end", errs)
    if not (t_end >= 0.0 and np.isfinite(t_end)):
        errs.append(f"time.t_end must be nonnegative and finite, got {t_end}")
    if "dt" in time_map:
        dt = _as_number(time_map["dt"], "time.dt", errs)
    elif grid is not None:
        dt = min(1e-3, 0.25 * grid.spacing ** 2)
    else:
        dt = 1e-3
    if not (dt > 0.0 and np.isfinite(dt)):
        errs.append(f"time.dt must be positive, got {dt}")
    elif np.isfinite(t_end) and t_end > 0.0:
        steps = round(t_end / dt)
        if steps < 1 or abs(steps * dt - t_end) > 1e-9 * max(dt, t_end):
            errs.append(f"time.t_end = {t_end} is not a whole number of dt = {dt} steps")
    record_every = time_map.get("record_every", 10)
    record_every = _as_int(record_every, "time.record_every", errs)
    if record_every < 1:
        errs.append(f"time.record_every must be at least 1, got {record_every}")
    snaps_raw = time_map.get("snapshots", [0.0, t_end])
    if not isinstance(snaps_raw, list):
        errs.append("time.snapshots must be a list of times")
        snaps_raw = [0.0, t_end]
    snapshots = []
    for i, s in enumerate(snaps_raw):
        sv = _as_number(s, f"time.snapshots[{i}]", errs)
        if np.isfinite(sv):
            if not (0.0 <= sv <= t_end + 1e-12):
                errs.append(f"time.snapshots[{i}] = {sv} outside [0, t_end]")
            snapshots.append(sv)
    time_spec = TimeSpec(dt=dt, t_end=t_end, record_every=record_every,
                         snapshots=tuple(sorted(set(snapshots))))

    scheme = raw.get("scheme", "crank_nicolson")
    if scheme not in SCHEMES:
        errs.append(f"scheme must be one of {list(SCHEMES)}, got {scheme!r}")

    n_rank = _as_int(raw.get("n_rank", 1), "n_rank", errs)
    if n_rank < 1:
        errs.append(f"n_rank must be at least 1, got {n_rank}")
    modes = _as_int(raw.get("modes", 12), "modes", errs)
    n_random = _as_int(raw.get("n_random", 25), "n_random", errs)
    if n_random < 0:
        errs.append(f"n_random must be nonnegative, got {n_random}")
    seed = _as_int(raw.get("seed", 0), "seed", errs)
    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str) or not output_dir:
        errs.append(f"output_dir must be a nonempty string, got {output_dir!r}")
    emit_plots = raw.get("emit_plots", False)
    if not isinstance(emit_plots, bool):
        errs.append(f"emit_plots must be true or false, got {emit_plots!r}")

    tol_map = _require_mapping(raw.get("tolerances", {}), "tolerances")
    _reject_unknown(tol_map, _TOL_KEYS, "tolerances")
    tol = ToleranceSpec()
    for key in _TOL_KEYS:
        if key in tol_map:
            val = _as_number(tol_map[key], f"tolerances.{key}", errs)
            if not (val > 0.0 and np.isfinite(val)):
                errs.append(f"tolerances.{key} must be positive, got {val}")
            setattr(tol, key, val)

    initial = _field_spec(raw.get("initial", {"family": "constant", "value": 1.0}), "initial")
    potential = _field_spec(raw.get("potential", {"family": "constant", "value": 0.0}), "potential")
    t2_initial = _field_spec(raw.get("t2_initial", {"family": "constant", "value": 1.0}), "t2_initial")
    for spec in (initial, potential, t2_initial):
        if spec.family == "from_csv" and base_dir is not None:
            spec.params = {"path": str((Path(base_dir) / str(spec.params["path"])).resolve())}

    base_values_raw = raw.get("base_values", [0.4, 0.45, 0.5])
    if not isinstance(base_values_raw, list) or not base_values_raw:
        errs.append("base_values must be a nonempty list of positive numbers")
        base_values = (1.0,)
    else:
        base_values = tuple(
            _as_number(v, f"base_values[{i}]", errs) for i, v in enumerate(base_values_raw)
        )
        if any(not (v > 0.0) for v in base_values if np.isfinite(v)):
            errs.append("base_values must all be positive")

    boundary = _boundary_spec(raw, grid_spec, grid, initial, errs)

    if grid is not None and scenario in SCENARIOS:
        _realize_and_check_fields(scenario, grid, initial, potential, t2_initial, modes, errs)

    if errs:
        raise ValidationError("; ".join(errs))

    return RunConfig(
        scenario=scenario,
        grid=grid_spec,
        time=time_spec,
        scheme=scheme,
        boundary=boundary,
        initial=initial,
        potential=potential,
        t2_initial=t2_initial,
        n_rank=n_rank,
        base_values=base_values,
        modes=modes,
        n_random=n_random,
        seed=seed,
        output_dir=output_dir,
        emit_plots=emit_plots,
        tolerances=tol,
    )


def _boundary_spec(raw, grid_spec, grid, initial, errs) -> BoundarySpec:
    if "boundary" in raw:
        bmap = _require_mapping(raw["boundary"], "boundary")
        _reject_unknown(bmap, _BOUNDARY_KEYS, "boundary")
        kind = bmap.get("kind")
        if kind not in ("periodic", "dirichlet"):
            errs.append(f"boundary.kind must be 'periodic' or 'dirichlet', got {kind!r}")
            return BoundarySpec(kind="periodic")
        if kind == "periodic":
            if grid_spec.topology != "circle":
                errs.append("periodic boundary needs circle topology")
            if "left" in bmap or "right" in bmap:
                errs.append("periodic boundary takes no left/right values")
            return BoundarySpec(kind="periodic")
        if grid_spec.topology != "interval":
            errs.append("dirichlet boundary needs interval topology")
        left = _as_number(bmap.get("left", float("nan")), "boundary.left", errs)
        right = _as_number(bmap.get("right", float("nan")), "boundary.right", errs)
        if not (np.isfinite(left) and np.isfinite(right)):
            errs.append("dirichlet boundary needs finite left and right values")
        return BoundarySpec(kind="dirichlet", left=left, right=right)
    if grid_spec.topology == "circle":
        return BoundarySpec(kind="periodic")
    if grid is not None:
        try:
            vals = build_field(grid, initial.family, initial.params).values
            return BoundarySpec(kind="dirichlet", left=float(vals[0]), right=float(vals[-1]))
        except (ValueError, OSError):
            pass
    return BoundarySpec(kind="dirichlet", left=0.0, right=0.0)


def _realize_and_check_fields(scenario, grid, initial, potential, t2_initial, modes, errs):
    out = {}
    for name, spec in (("initial", initial), ("potential", potential), ("t2_initial", t2_initial)):
        try:
            out[name] = build_field(grid, spec.family, spec.params)
        except (ValueError, OSError) as err:
            errs.append(f"{name}: {err}")
    init = out.get("initial")
    pot = out.get("potential")
    t2 = out.get("t2_initial")
    if init is not None and scenario in ("surface", "twisted", "normalized", "cole_hopf_check"):
        if float(np.min(init.values)) <= 0.0:
            errs.append(f"{scenario}: initial field must be strictly positive on the grid")
    if pot is not None and scenario == "normalized":
        if float(np.min(pot.values)) < -1e-12:
            errs.append("normalized: potential (betaD) must be nonnegative")
    if t2 is not None and scenario == "normalized":
        if float(np.min(t2.values)) < 0.0:
            errs.append("normalized: t2_initial must be nonnegative")
    if scenario in ("twisted", "normalized", "cole_hopf_check") and grid.topology is not Topology.CIRCLE:
        errs.append(f"{scenario}: needs circle topology")
    if scenario == "spectral_report":
        size = grid.n_points if grid.periodic else grid.n_points - 2
        if not 1 <= modes <= size:
            errs.append(f"spectral_report: modes must be between 1 and {size}, got {modes}")
    return out


def realize_grid(cfg: RunConfig) -> FiberGrid:
    return build_grid(cfg.grid.topology, cfg.grid.length, cfg.grid.n_points)


def realize_field(cfg: RunConfig, which: str) -> ScalarField:
    spec = getattr(cfg, which)
    return build_field(realize_grid(cfg), spec.family, spec.params)


def config_to_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["time"]["snapshots"] = list(cfg.time.snapshots)
    d["base_values"] = list(cfg.base_values)
    d["initial"] = {"family": cfg.initial.family, **cfg.initial.params}
    d["potential"] = {"family": cfg.potential.family, **cfg.potential.params}
    d["t2_initial"] = {"family": cfg.t2_initial.family, **cfg.t2_initial.params}
    if cfg.boundary.kind == "periodic":
        d["boundary"] = {"kind": "periodic"}
    return d


def serialize_config(cfg: RunConfig) -> str:
    """YAML text that parses back to an equal RunConfig."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False)
