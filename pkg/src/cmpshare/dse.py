"""Constrained grid search over (n, A_L1, A_CPU) with the L2 absorbing the rest of the area budget."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .model import (
    Budgets,
    Configuration,
    EvalResult,
    ModelDomainError,
    TechParams,
    WorkloadParams,
    evaluate,
)

CONSTRAINT_MODES = ("power", "bandwidth", "both")


def geometric(lo: float, hi: float, factor: float = 2.0) -> tuple[float, ...]:
    """Geometric grid ``lo, lo*factor, ...`` up to and including ``hi`` (within 1e-9 relative)."""
    if lo <= 0 or hi < lo or factor <= 1:
        raise ModelDomainError(f"bad geometric grid: lo={lo}, hi={hi}, factor={factor}")
    values = []
    k = 0
    while True:
        v = lo * factor**k
        if v > hi * (1 + 1e-9):
            break
        values.append(v)
        k += 1
    return tuple(values)


@dataclass(frozen=True)
class GridSpec:
    n_values: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    a_l1_values: tuple[float, ...] = geometric(1, 32)
    a_cpu_values: tuple[float, ...] = geometric(1, 64)
    a_l2_min: float = 1.0
    factor: float | None = 2.0  # informational: spacing used to build the default axes

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "a_l1_values", tuple(float(v) for v in self.a_l1_values))
        object.__setattr__(self, "a_cpu_values", tuple(float(v) for v in self.a_cpu_values))
        for name in ("n_values", "a_l1_values", "a_cpu_values"):
            vals = getattr(self, name)
            if not vals:
                raise ModelDomainError(f"{name} must be non-empty")
            if any(v <= 0 or not math.isfinite(v) for v in vals):
                raise ModelDomainError(f"{name} must be positive and finite")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ModelDomainError(f"{name} must be strictly increasing")
        if self.a_l2_min < 0:
            raise ModelDomainError("a_l2_min must be >= 0")

    @property
    def size(self) -> int:
        return len(self.n_values) * len(self.a_l1_values) * len(self.a_cpu_values)

    @classmethod
    def geometric(cls, n_max: int = 64, a_l1_range=(1.0, 32.0), a_cpu_range=(1.0, 64.0),
                  factor: float = 2.0, n_min: int = 1, a_l2_min: float = 1.0) -> GridSpec:
        ns = tuple(sorted({int(round(v)) for v in geometric(n_min, n_max, factor)}))
        return cls(ns, geometric(*a_l1_range, factor), geometric(*a_cpu_range, factor),
                   a_l2_min=a_l2_min, factor=factor)


@dataclass(frozen=True)
class SweepPoint:
    x: float
    config: Configuration | None
    result: EvalResult | None
    feasible: bool


@dataclass(frozen=True)
class Optimum:
    """Best design point, or an explicit infeasible marker when ``config`` is None."""

    config: Configuration | None = None
    result: EvalResult | None = None

    @property
    def feasible(self) -> bool:
        return self.config is not None

    def __iter__(self):
        return iter((self.config, self.result))


INFEASIBLE = Optimum()


@dataclass(frozen=True)
class L1Sweep:
    points: list[SweepPoint]
    envelope: list[SweepPoint]

    @property
    def best(self) -> SweepPoint | None:
        if not self.envelope:
            return None
        return min(self.envelope, key=lambda p: _rank(p.config, p.result))


@dataclass(frozen=True)
class SharingReport:
    constraint: str
    sharing: Optimum
    nosharing: Optimum
    a_l1_opt_sharing: float | None = None
    a_l1_opt_nosharing: float | None = None
    relative_shift: float | None = None

    @property
    def feasible(self) -> bool:
        return self.sharing.feasible and self.nosharing.feasible


def _check_mode(constraint: str) -> str:
    if constraint == "bw":
        constraint = "bandwidth"
    if constraint not in CONSTRAINT_MODES:
        raise ModelDomainError(f"unknown constraint mode {constraint!r}; expected one of {CONSTRAINT_MODES}")
    return constraint


def is_feasible(res: EvalResult, constraint: str = "both") -> bool:
    constraint = _check_mode(constraint)
    if constraint == "power":
        return res.feasible_power
    if constraint == "bandwidth":
        return res.feasible_bw
    return res.feasible_power and res.feasible_bw


def _rank(cfg: Configuration, res: EvalResult) -> tuple:
    # min() over this key = max IPC, ties to the lexicographically smallest (n, A_L1, A_CPU)
    return (-res.ipc, cfg.n, cfg.a_l1, cfg.a_cpu)


def _points_for_n(n: int, grid: GridSpec, w: WorkloadParams, t: TechParams, b: Budgets):
    out = []
    floor = max(grid.a_l2_min, 0.0)
    for a_l1 in grid.a_l1_values:
        for a_cpu in grid.a_cpu_values:
            a_l2 = b.a_total - n * (a_l1 + a_cpu)
            if a_l2 < floor or a_l2 <= 0:
                continue
            cfg = Configuration(n, a_l1, a_cpu, a_l2)
            out.append((cfg, evaluate(cfg, w, t, b)))
    return out


def enumerate_feasible(grid: GridSpec, w: WorkloadParams, t: TechParams, b: Budgets,
                       workers: int = 1) -> list[tuple[Configuration, EvalResult]]:
    """All grid points whose L2 share of the area budget is at least ``grid.a_l2_min``.

    Points are emitted in lexicographic (n, A_L1, A_CPU) order with power and
    bandwidth flags set but not applied.
    """
    if workers > 1 and len(grid.n_values) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda n: _points_for_n(n, grid, w, t, b), grid.n_values))
    else:
        chunks = [_points_for_n(n, grid, w, t, b) for n in grid.n_values]
    return [p for chunk in chunks for p in chunk]


def _best_of(points: Iterable[tuple[Configuration, EvalResult]], constraint: str):
    best = None
    best_key = None
    for cfg, res in points:
        if not is_feasible(res, constraint):
            continue
        key = _rank(cfg, res)
        if best_key is None or key < best_key:
            best, best_key = (cfg, res), key
    return best


def optimize(grid: GridSpec, w: WorkloadParams, t: TechParams, b: Budgets,
             constraint: str = "both", workers: int = 1) -> Optimum:
    """Max-IPC feasible point; ties go to the lexicographically smallest (n, A_L1, A_CPU).

    ``workers > 1`` evaluates the per-``n`` slices concurrently. The reduction
    is a total order, so the answer does not depend on scheduling.
    """
    constraint = _check_mode(constraint)

    def slice_best(n):
        return _best_of(_points_for_n(n, grid, w, t, b), constraint)

    if workers > 1 and len(grid.n_values) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(slice_best, grid.n_values))
    else:
        partials = [slice_best(n) for n in grid.n_values]
    winner = _best_of((p for p in partials if p is not None), constraint)
    return INFEASIBLE if winner is None else Optimum(*winner)


def sweep_area_budget(budgets: Sequence[float], grid: GridSpec, w: WorkloadParams, t: TechParams,
                      b: Budgets, constraint: str = "power", workers: int = 1) -> list[SweepPoint]:
    """Best IPC for each total area budget; infeasible budgets yield flagged empty points."""
    if any(y <= x for x, y in zip(budgets, budgets[1:])):
        raise ModelDomainError("budgets must be strictly increasing")
    out = []
    for a_total in budgets:
        opt = optimize(grid, w, t, replace(b, a_total=float(a_total)), constraint, workers)
        out.append(SweepPoint(float(a_total), opt.config, opt.result, opt.feasible))
    return out


def sweep_l1_area(grid: GridSpec, w: WorkloadParams, t: TechParams, b: Budgets,
                  constraint: str = "both", workers: int = 1) -> L1Sweep:
    """Scatter of every feasible point keyed by A_L1, plus the per-A_L1 upper envelope."""
    constraint = _check_mode(constraint)
    points = [
        SweepPoint(cfg.a_l1, cfg, res, True)
        for cfg, res in enumerate_feasible(grid, w, t, b, workers)
        if is_feasible(res, constraint)
    ]
    points.sort(key=lambda p: (p.x, p.config.n, p.config.a_l1, p.config.a_cpu))
    buckets: dict[float, SweepPoint] = {}
    for p in points:
        cur = buckets.get(p.x)
        if cur is None or _rank(p.config, p.result) < _rank(cur.config, cur.result):
            buckets[p.x] = p
    envelope = [buckets[x] for x in sorted(buckets)]
    return L1Sweep(points, envelope)


def relative_shift(a_l1_nosharing: float, a_l1_sharing: float) -> float:
    """Fractional reduction of the optimal L1 area caused by sharing."""
    return (a_l1_nosharing - a_l1_sharing) / a_l1_nosharing


def compare_sharing(grid: GridSpec, w: WorkloadParams, t: TechParams, b: Budgets,
                    constraint: str = "both", workers: int = 1) -> SharingReport:
    """Optimal A_L1 with the workload as given versus the same workload with mu_n forced to 0."""
    constraint = _check_mode(constraint)
    if w.mu_n <= 0 and not w.mu_n_asymptote:
        raise ModelDomainError("compare_sharing needs a workload with mu_n > 0")
    with_sh = sweep_l1_area(grid, w, t, b, constraint, workers).best
    without = sweep_l1_area(grid, w.without_sharing(), t, b, constraint, workers).best
    opt_sh = INFEASIBLE if with_sh is None else Optimum(with_sh.config, with_sh.result)
    opt_no = INFEASIBLE if without is None else Optimum(without.config, without.result)
    if not (opt_sh.feasible and opt_no.feasible):
        return SharingReport(constraint, opt_sh, opt_no)
    a_sh, a_no = opt_sh.config.a_l1, opt_no.config.a_l1
    return SharingReport(constraint, opt_sh, opt_no, a_sh, a_no, relative_shift(a_no, a_sh))
