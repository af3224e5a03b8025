"""Least-squares calibration of the miss-rate laws ``m(A) = mu_n + c * A**-gamma``.

Model 1 pins ``mu_n = 0`` (pure power law); model 2 fits the compulsory floor
too. For the square-root rule ``c = (1 - mu_n) * mu * alpha**gamma``, so only
``(mu_n, c)`` are identifiable from a miss curve; ``mu`` follows once a
baseline size ``alpha`` is supplied.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

GAMMA_RANGE = (0.3, 0.7)
GAMMA_TOL = 1e-4
PREFER_RATIO = 0.7
PREFER_MIN_MU_N = 0.005


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class MissSample:
    a_l1: float
    miss_rate: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a_l1) and self.a_l1 > 0):
            raise FitError(f"sample size must be positive, got {self.a_l1}")
        if not (math.isfinite(self.miss_rate) and 0.0 <= self.miss_rate <= 1.0):
            raise FitError(f"miss rate must lie in [0, 1], got {self.miss_rate}")


@dataclass(frozen=True)
class FitResult:
    model: int
    mu_n_hat: float
    c_hat: float
    gamma_hat: float
    sse: float
    residuals: tuple[float, ...] = field(repr=False)
    sizes: tuple[float, ...] = field(repr=False)

    def predict(self, a_l1) -> np.ndarray:
        return self.mu_n_hat + self.c_hat * np.asarray(a_l1, dtype=float) ** -self.gamma_hat

    def mu_hat(self, alpha: float = 1.0) -> float:
        """Baseline miss rate implied by the fit for a baseline cache of size ``alpha``."""
        if self.mu_n_hat >= 1.0:
            return math.nan
        return self.c_hat / ((1.0 - self.mu_n_hat) * alpha**self.gamma_hat)


@dataclass(frozen=True)
class Comparison:
    fit1: FitResult
    fit2: FitResult
    sse_ratio: float
    preferred: int


def _arrays(samples: Iterable) -> tuple[np.ndarray, np.ndarray]:
    pts = [s if isinstance(s, MissSample) else MissSample(*s) for s in samples]
    return (np.array([p.a_l1 for p in pts], dtype=float),
            np.array([p.miss_rate for p in pts], dtype=float))


def _result(model, a, m, mu_n, c, gamma) -> FitResult:
    resid = m - (mu_n + c * a**-gamma)
    return FitResult(model, float(mu_n), float(c), float(gamma), float(resid @ resid),
                     tuple(resid.tolist()), tuple(a.tolist()))


def _slope_through_origin(x: np.ndarray, y: np.ndarray) -> float:
    return float(x @ y / (x @ x))


def _fit1(a, m, gamma) -> tuple[float, float]:
    return 0.0, max(0.0, _slope_through_origin(a**-gamma, m))


def _fit2(a, m, gamma) -> tuple[float, float]:
    """Box-constrained (0 <= mu_n <= 1, c >= 0) linear least squares on {1, A^-gamma}."""
    x = a**-gamma
    design = np.column_stack([np.ones_like(x), x])
    (mu_n, c), *_ = np.linalg.lstsq(design, m, rcond=None)
    if 0.0 <= mu_n <= 1.0 and c >= 0.0:
        return float(mu_n), float(c)
    # Convex objective: the constrained optimum lies on a face; try each face's 1-D optimum.
    candidates = []
    for pinned in (0.0, 1.0):
        candidates.append((pinned, max(0.0, _slope_through_origin(x, m - pinned))))
    candidates.append((min(1.0, max(0.0, float(m.mean()))), 0.0))

    def sse(p):
        r = m - (p[0] + p[1] * x)
        return float(r @ r)

    return min(candidates, key=sse)


def _check_sizes(a: np.ndarray, need: int, model: int) -> None:
    distinct = len(np.unique(a))
    if distinct < need:
        raise FitError(f"model {model} needs at least {need} distinct sizes, got {distinct}")


def fit_model1(samples, gamma: float = 0.5) -> FitResult:
    """Pure power law through the origin: ``m = c * A**-gamma``."""
    a, m = _arrays(samples)
    _check_sizes(a, 2, 1)
    return _result(1, a, m, *_fit1(a, m, gamma), gamma)


def _golden(f, lo: float, hi: float, tol: float) -> float:
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = hi - inv * (hi - lo), lo + inv * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv * (hi - lo)
            f2 = f(x2)
    return (lo + hi) / 2.0


def fit_model2(samples, gamma: float | None = 0.5,
               gamma_range: Sequence[float] = GAMMA_RANGE) -> FitResult:
    """Power law plus constant floor. ``gamma=None`` frees the exponent within ``gamma_range``."""
    a, m = _arrays(samples)
    _check_sizes(a, 3, 2)
    if gamma is None:
        def sse_at(g):
            mu_n, c = _fit2(a, m, g)
            r = m - (mu_n + c * a**-g)
            return float(r @ r)

        gamma = _golden(sse_at, gamma_range[0], gamma_range[1], GAMMA_TOL)
    return _result(2, a, m, *_fit2(a, m, gamma), gamma)


def compare_models(samples, gamma: float = 0.5) -> Comparison:
    """Fit both laws at the same exponent and pick one.

    Model 2 is preferred only when it cuts the SSE below 70% of model 1's and
    its floor exceeds 0.005.
    """
    samples = list(samples)
    f1 = fit_model1(samples, gamma)
    f2 = fit_model2(samples, gamma)
    if f1.sse > 0:
        ratio = f2.sse / f1.sse
    else:
        ratio = 0.0 if f2.sse == 0 else math.inf
    preferred = 2 if ratio < PREFER_RATIO and f2.mu_n_hat > PREFER_MIN_MU_N else 1
    return Comparison(f1, f2, ratio, preferred)


def read_samples_csv(text: str, alpha_bytes: float | None = None) -> list[MissSample]:
    """Parse ``a_l1,miss_rate`` CSV. With ``alpha_bytes`` the sizes are bytes and are rescaled."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["a_l1", "miss_rate"]:
        raise FitError(f"sample CSV header must be 'a_l1,miss_rate', got {reader.fieldnames}")
    out = []
    for i, row in enumerate(reader, 2):
        try:
            a, m = float(row["a_l1"]), float(row["miss_rate"])
        except (TypeError, ValueError):
            raise FitError(f"line {i}: cannot parse {row}") from None
        if alpha_bytes:
            a /= alpha_bytes
        out.append(MissSample(a, m))
    return out


def residuals_csv(*fits: FitResult) -> str:
    """Per-sample residuals, one block of rows per fit: ``model,a_l1,miss_rate,predicted,residual``."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["model", "a_l1", "miss_rate", "predicted", "residual"])
    for f in fits:
        for a, r in zip(f.sizes, f.residuals):
            pred = float(f.predict(a))
            out.writerow([f.model, repr(a), repr(pred + r), repr(pred), repr(r)])
    return buf.getvalue()
