"""Analytical CMP performance model with a data-sharing term in the L1 miss rate.

Areas are dimensionless multiples of the baseline cache size ``alpha``, times
are in cycles and power is in abstract power units. Every function here is
pure; the parameter records are frozen dataclasses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


class ModelDomainError(ValueError):
    """Raised when an input lies outside the domain of a model equation."""


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ModelDomainError(msg)


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class WorkloadParams:
    """Workload-side constants.

    ``mu_n`` is the compulsory (sharing-induced) L1 miss component. When
    ``mu_n_asymptote`` is set, the compulsory rate is instead derived per core
    count as ``asymptote * (1 - 1/n)``; see :func:`compulsory_rate`.
    """

    g: float = 0.2
    mu: float = 0.1
    alpha: float = 1.0
    mu_n: float = 0.05
    beta: float = 0.4
    e_n: float = 1.0
    chi: float = 1.0
    f: float = 1.0
    mu_n_asymptote: float | None = None

    def __post_init__(self) -> None:
        _check(_finite(self.g, self.mu, self.alpha, self.mu_n, self.beta, self.e_n, self.chi),
               "workload parameters must be finite")
        _check(0.0 <= self.g <= 1.0, f"g must lie in [0, 1], got {self.g}")
        _check(0.0 < self.mu <= 1.0, f"mu must lie in (0, 1], got {self.mu}")
        _check(0.0 <= self.mu_n <= 1.0, f"mu_n must lie in [0, 1], got {self.mu_n}")
        _check(self.alpha > 0, f"alpha must be positive, got {self.alpha}")
        _check(self.beta > 0, f"beta must be positive, got {self.beta}")
        _check(self.e_n > 0, f"e_n must be positive, got {self.e_n}")
        _check(self.chi > 0, f"chi must be positive, got {self.chi}")
        _check(self.f == 1.0, f"only fully parallel workloads are modelled (f = 1), got {self.f}")
        if self.mu_n_asymptote is not None:
            _check(0.0 <= self.mu_n_asymptote <= 1.0,
                   f"mu_n_asymptote must lie in [0, 1], got {self.mu_n_asymptote}")

    def without_sharing(self) -> WorkloadParams:
        """Same workload with the compulsory component removed."""
        return replace(self, mu_n=0.0, mu_n_asymptote=None)

    def at_cores(self, n: int) -> WorkloadParams:
        """Resolve the compulsory rate for an ``n``-core chip."""
        if self.mu_n_asymptote is None:
            return self
        return replace(self, mu_n=compulsory_rate(n, self.mu_n_asymptote), mu_n_asymptote=None)


@dataclass(frozen=True)
class TechParams:
    tau: float = 1.0
    d_noc: float = 10.0
    d_dram: float = 200.0
    k_cache: float = 1.0
    k_core: float = 0.1

    def __post_init__(self) -> None:
        _check(_finite(self.tau, self.d_noc, self.d_dram, self.k_cache, self.k_core),
               "technology parameters must be finite")
        _check(self.tau > 0, f"tau must be positive, got {self.tau}")
        _check(self.d_dram > 0, f"d_dram must be positive, got {self.d_dram}")
        _check(self.d_noc >= 0, f"d_noc must be non-negative, got {self.d_noc}")
        _check(self.k_cache >= 0 and self.k_core >= 0, "power coefficients must be non-negative")


@dataclass(frozen=True)
class Configuration:
    n: int
    a_l1: float
    a_cpu: float
    a_l2: float

    def __post_init__(self) -> None:
        _check(isinstance(self.n, int) and not isinstance(self.n, bool) and self.n >= 1,
               f"n must be an integer >= 1, got {self.n!r}")
        _check(_finite(self.a_l1, self.a_cpu, self.a_l2), "areas must be finite")
        _check(self.a_l1 > 0 and self.a_cpu > 0 and self.a_l2 > 0,
               f"areas must be positive, got a_l1={self.a_l1}, a_cpu={self.a_cpu}, a_l2={self.a_l2}")

    @property
    def area(self) -> float:
        return self.n * (self.a_l1 + self.a_cpu) + self.a_l2


@dataclass(frozen=True)
class Budgets:
    a_total: float = 1024.0
    p_max: float = 200.0
    md_max: float = 0.001

    def __post_init__(self) -> None:
        _check(_finite(self.a_total, self.p_max, self.md_max), "budgets must be finite")
        _check(self.a_total > 0, f"a_total must be positive, got {self.a_total}")
        _check(self.p_max > 0, f"p_max must be positive, got {self.p_max}")
        _check(0 < self.md_max <= 1, f"md_max must lie in (0, 1], got {self.md_max}")


@dataclass(frozen=True)
class EvalResult:
    n: int
    m1: float
    m2: float
    d_l1: float
    d_l2: float
    cpi_m: float
    cpi_c: float
    cpi_1: float
    ipc: float
    power: float
    m_d: float
    feasible_area: bool
    feasible_power: bool
    feasible_bw: bool

    def as_dict(self) -> dict:
        return {
            "m1": self.m1, "m2": self.m2, "d_l1": self.d_l1, "d_l2": self.d_l2,
            "cpi_m": self.cpi_m, "cpi_c": self.cpi_c, "cpi_1": self.cpi_1,
            "ipc": self.ipc, "power": self.power, "m_d": self.m_d,
            "feasible_area": self.feasible_area, "feasible_power": self.feasible_power,
            "feasible_bw": self.feasible_bw,
        }


def compulsory_rate(n: int, asymptote: float) -> float:
    """Convenience map ``asymptote * (1 - 1/n)``: zero on one core, rising with ``n``."""
    _check(n >= 1, f"n must be >= 1, got {n}")
    return asymptote * (1.0 - 1.0 / n)


def _clamp01(x: float) -> tuple[float, bool]:
    if x > 1.0:
        return 1.0, True
    if x < 0.0:
        return 0.0, True
    return x, False


def l1_miss_rate(a_l1: float, w: WorkloadParams, diagnostics: bool = False):
    """Private L1 miss rate: compulsory part plus a square-root-rule capacity part.

    Returns the rate clamped to [0, 1]. With ``diagnostics=True`` returns
    ``(rate, clamped)`` instead.
    """
    _check(math.isfinite(a_l1) and a_l1 > 0, f"a_l1 must be positive, got {a_l1}")
    m = w.mu_n + (1.0 - w.mu_n) * w.mu / math.sqrt(a_l1 / w.alpha)
    m, clamped = _clamp01(m)
    return (m, clamped) if diagnostics else m


def l2_miss_rate(m1: float, cfg: Configuration, w: WorkloadParams) -> float:
    _check(0.0 <= m1 <= 1.0, f"m1 must lie in [0, 1], got {m1}")
    _check(cfg.a_l2 > 0, "a_l2 must be positive")
    m2 = w.e_n * m1 * math.sqrt(cfg.n * cfg.a_l1 / cfg.a_l2)
    return _clamp01(m2)[0]


def access_times(cfg: Configuration, w: WorkloadParams, t: TechParams) -> tuple[float, float]:
    d_l1 = t.tau * (cfg.a_l1 / w.alpha) ** w.beta
    d_l2 = t.d_noc + t.tau * (cfg.a_l2 / w.alpha) ** w.beta
    return d_l1, d_l2


def cpi_memory(m1: float, m2: float, d_l1: float, d_l2: float, t: TechParams) -> float:
    return (1.0 - m1) * d_l1 + m1 * (1.0 - m2) * d_l2 + m1 * m2 * t.d_dram


def cpi_compute(a_cpu: float, w: WorkloadParams) -> float:
    _check(math.isfinite(a_cpu) and a_cpu > 0, f"a_cpu must be positive, got {a_cpu}")
    return w.chi / math.sqrt(a_cpu)


def chip_power(cfg: Configuration, t: TechParams) -> float:
    """Cache power grows with the square root of area, core power linearly; NoC excluded."""
    per_core = t.k_cache * math.sqrt(cfg.a_l1) + t.k_core * cfg.a_cpu
    return cfg.n * per_core + t.k_cache * math.sqrt(cfg.a_l2)


def evaluate(cfg: Configuration, w: WorkloadParams, t: TechParams, b: Budgets) -> EvalResult:
    """Evaluate one design point end to end, including budget feasibility flags.

    ``feasible_area`` tests ``n*(a_l1 + a_cpu) + a_l2 <= a_total`` with plain
    float comparison; callers that solve for ``a_l2`` from the budget must not
    rely on it for exact-equality cases.
    """
    wn = w.at_cores(cfg.n)
    m1 = l1_miss_rate(cfg.a_l1, wn)
    m2 = l2_miss_rate(m1, cfg, wn)
    d_l1, d_l2 = access_times(cfg, wn, t)
    cpi_m = cpi_memory(m1, m2, d_l1, d_l2, t)
    cpi_c = cpi_compute(cfg.a_cpu, wn)
    cpi_1 = wn.g * cpi_m + (1.0 - wn.g) * cpi_c
    power = chip_power(cfg, t)
    m_d = m1 * m2
    return EvalResult(
        n=cfg.n, m1=m1, m2=m2, d_l1=d_l1, d_l2=d_l2,
        cpi_m=cpi_m, cpi_c=cpi_c, cpi_1=cpi_1, ipc=cfg.n / cpi_1,
        power=power, m_d=m_d,
        feasible_area=cfg.area <= b.a_total,
        feasible_power=power <= b.p_max,
        feasible_bw=m_d <= b.md_max,
    )
