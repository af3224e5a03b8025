"""Scenario files: flat ``section.key = value`` lines, ``#`` comments.

Every key is optional. Unknown keys are rejected. Lists are comma separated.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .cachesim import CacheGeometry, SharingSpec
from .dse import GridSpec, geometric
from .model import Budgets, Configuration, TechParams, WorkloadParams


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


def _floats(s: str):
    return None if s.strip().lower() in ("", "none") else tuple(float(v) for v in s.split(","))


def _ints(s: str):
    return None if s.strip().lower() in ("", "none") else tuple(int(v) for v in s.split(","))


def _int(s: str) -> int:
    return int(s, 0)


def _field_defaults(cls) -> dict:
    return {f.name: f.default for f in dataclasses.fields(cls)}


_CONVERTERS = {float: float, int: _int, bool: _bool}


def _schema() -> dict:
    schema: dict[str, tuple] = {}

    def section(name, cls, skip=()):
        for fname, default in _field_defaults(cls).items():
            if fname in skip:
                continue
            conv = _CONVERTERS[type(default)] if default is not None else _opt_float
            schema[f"{name}.{fname}"] = (conv, default)

    section("workload", WorkloadParams)
    section("tech", TechParams)
    section("budgets", Budgets)
    section("sharing", SharingSpec)
    schema.update({
        "design.n": (_int, 4),
        "design.a_l1": (float, 4.0),
        "design.a_cpu": (float, 16.0),
        "design.a_l2": (_opt_float, 64.0),  # none: whatever the area budget leaves
        "grid.n_min": (_int, 1),
        "grid.n_max": (_int, 64),
        "grid.a_l1_min": (float, 1.0),
        "grid.a_l1_max": (float, 32.0),
        "grid.a_cpu_min": (float, 1.0),
        "grid.a_cpu_max": (float, 64.0),
        "grid.factor": (float, 2.0),
        "grid.a_l2_min": (float, 1.0),
        "grid.n_values": (_ints, None),
        "grid.a_l1_values": (_floats, None),
        "grid.a_cpu_values": (_floats, None),
        "sweep.budget_min": (float, 64.0),
        "sweep.budget_max": (float, 8192.0),
        "sweep.budget_factor": (float, 2.0),
        "sweep.budgets": (_floats, None),
        "dse.constraint": (str, "both"),
        "dse.workers": (_int, 1),
        "sim.line_size": (_int, 64),
        "sim.l1_bytes": (_int, 32768),
        "sim.l1_assoc": (_int, 8),
        "sim.l2_bytes": (_int, 1 << 20),
        "sim.l2_assoc": (_int, 16),
        "sim.workers": (_int, 1),
        "curve.l1_sizes": (_ints, tuple(4096 << k for k in range(6))),
        "fit.gamma": (float, 0.5),
        "fit.free_gamma": (_bool, False),
        "fit.alpha": (float, 1.0),
        "fit.alpha_bytes": (_opt_float, None),
        "output.path": (str, ""),
    })
    return schema


SCHEMA = _schema()


@dataclass(frozen=True)
class ScenarioConfig:
    workload: WorkloadParams
    tech: TechParams
    budgets: Budgets
    design: Configuration
    grid: GridSpec
    sweep_budgets: tuple[float, ...]
    constraint: str
    dse_workers: int
    sharing: SharingSpec
    l1_geom: CacheGeometry
    l2_geom: CacheGeometry
    sim_workers: int
    curve_sizes: tuple[int, ...]
    fit_gamma: float
    fit_free_gamma: bool
    fit_alpha: float
    fit_alpha_bytes: float | None
    output_path: str
    raw: dict


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    return out


def parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, value = (p.strip() for p in item.split("=", 1))
    return key, value


def load(path=None, overrides=(), seed: int | None = None) -> ScenarioConfig:
    """Default-fill, apply the config file then ``--set`` overrides, and validate."""
    entries: dict[str, str] = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {p}: {exc.strerror or exc}") from None
        entries.update(parse_text(text, str(p)))
    for item in overrides:
        k, v = parse_override(item)
        entries[k] = v
    if seed is not None:
        entries["sharing.seed"] = str(seed)

    values = {k: default for k, (_, default) in SCHEMA.items()}
    for key, text in entries.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        conv = SCHEMA[key][0]
        try:
            values[key] = conv(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    try:
        return _build(values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _section(values: dict, name: str) -> dict:
    prefix = name + "."
    return {k[len(prefix):]: v for k, v in values.items() if k.startswith(prefix)}


def _build(v: dict) -> ScenarioConfig:
    workload = WorkloadParams(**_section(v, "workload"))
    tech = TechParams(**_section(v, "tech"))
    budgets = Budgets(**_section(v, "budgets"))
    sharing = SharingSpec(**_section(v, "sharing"))

    n, a_l1, a_cpu = v["design.n"], v["design.a_l1"], v["design.a_cpu"]
    a_l2 = v["design.a_l2"]
    if a_l2 is None:
        a_l2 = budgets.a_total - n * (a_l1 + a_cpu)
    design = Configuration(n, a_l1, a_cpu, a_l2)

    factor = v["grid.factor"]
    n_values = v["grid.n_values"] or tuple(sorted({int(round(x)) for x in geometric(v["grid.n_min"], v["grid.n_max"], factor)}))
    grid = GridSpec(
        n_values,
        v["grid.a_l1_values"] or geometric(v["grid.a_l1_min"], v["grid.a_l1_max"], factor),
        v["grid.a_cpu_values"] or geometric(v["grid.a_cpu_min"], v["grid.a_cpu_max"], factor),
        a_l2_min=v["grid.a_l2_min"], factor=factor,
    )
    budgets_list = v["sweep.budgets"] or geometric(v["sweep.budget_min"], v["sweep.budget_max"], v["sweep.budget_factor"])

    constraint = v["dse.constraint"]
    if constraint == "bw":
        constraint = "bandwidth"
    if constraint not in ("power", "bandwidth", "both"):
        raise ConfigError(f"dse.constraint must be power, bandwidth (bw) or both, got {constraint!r}")

    line = v["sim.line_size"]
    l1 = CacheGeometry(v["sim.l1_bytes"], line, v["sim.l1_assoc"])
    l2 = CacheGeometry(v["sim.l2_bytes"], line, v["sim.l2_assoc"])
    sizes = v["curve.l1_sizes"]
    if not sizes:
        raise ConfigError("curve.l1_sizes must not be empty")

    return ScenarioConfig(
        workload=workload, tech=tech, budgets=budgets, design=design, grid=grid,
        sweep_budgets=tuple(budgets_list), constraint=constraint, dse_workers=v["dse.workers"],
        sharing=sharing, l1_geom=l1, l2_geom=l2, sim_workers=v["sim.workers"],
        curve_sizes=tuple(sizes), fit_gamma=v["fit.gamma"], fit_free_gamma=v["fit.free_gamma"],
        fit_alpha=v["fit.alpha"], fit_alpha_bytes=v["fit.alpha_bytes"],
        output_path=v["output.path"], raw=dict(v),
    )
