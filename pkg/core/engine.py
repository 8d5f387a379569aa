# core/engine.py
"""
Resonance engine: I_2, the main part of I_1, the lower-bound prediction with
its error budget, and maximum scans of |F_beta| over x.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from core import kernel
from core.arith import ArithTables
from core.errors import (
    ArgumentError, CapacityError, ConsistencyError, DomainError, EmptyResonatorError, OutOfRangeError,
)
from core.growth import GrowthTarget, growth_report  # noqa: F401  (re-exported)
from core.resonator import (
    DEFAULT_EPSILON, ResonatorConfig, ResonatorSupport, build_frequency_set, eval_resonator_product,
    parse_variant,
)
from core.series import ExpSumSpec, eval_spec, eval_spec_batch

logger = logging.getLogger(__name__)

UNDERFLOW_FLOOR = 40.0   # pairs with |u - v| Y2 above this contribute nothing to I_2
REFINE_TOP = 100


@dataclass(frozen=True)
class EngineParams:
    X: float
    A1: float = 3.0
    A2: float = 1.5
    A3: float = 1.0
    A4: float = 7.0 / 8.0
    c_param: float = 1.0

    def __post_init__(self):
        if self.X <= 1:
            raise ArgumentError(f"X must exceed 1 (got {self.X})")
        if not self.A1 > self.A2 > self.A3 > self.A4 > 0:
            raise ArgumentError(f"need A1 > A2 > A3 > A4 > 0 (got {self.A1}, {self.A2}, {self.A3}, {self.A4})")

    @classmethod
    def for_variant(cls, X: float, variant: str, c_param: float = 1.0) -> "EngineParams":
        if variant.startswith("piltz"):
            return cls(X=X, A1=8.0 / 5.0, A4=9.0 / 10.0, c_param=c_param)
        return cls(X=X, c_param=c_param)

    @property
    def Y1(self) -> float:
        return self.X ** self.A3

    @property
    def Y2(self) -> float:
        return self.X ** self.A2

    @staticmethod
    def gaussian(t):
        return np.exp(-np.asarray(t) ** 2 / 2.0)


@dataclass(frozen=True)
class ScanResult:
    x_star: float
    value: float
    lo: float
    hi: float
    step: float
    refined: int
    baseline_rms: float
    samples: int
    sign: int = 0

    @property
    def grid(self) -> Tuple[float, float, float, int]:
        return (self.lo, self.hi, self.step, self.refined)


@dataclass(frozen=True)
class Prediction:
    main: float
    error_terms: Tuple[float, float]
    refined_main: float
    members_sum: float

    @property
    def lower(self) -> float:
        return self.main - sum(self.error_terms)


@dataclass
class TuneResult:
    alpha: float
    c_param: float
    config: Optional[ResonatorConfig]
    satisfied: bool
    iterations: int
    history: List[Tuple[float, int]] = field(default_factory=list)
    exponent: float = 1.0 / 32.0


@dataclass(frozen=True)
class GuidedScan:
    best: ScanResult
    peaks: List[Tuple[float, float]]   # (x, |R(x)|^2)


# --- PARAMETERS ---

def alpha_recipe(X: float, lambda_param: float, c_param: float = 1.0, variant: str = "divisor") -> float:
    """alpha = (1/C) log X (log2 X)^(1 - lam + lam log lam [+ lam log 2]) (log3 X)^(1/2)"""
    if X <= math.exp(math.e):
        raise DomainError(f"alpha recipe needs X > e^e (got {X})")
    if c_param <= 0 or lambda_param <= 0:
        raise ArgumentError("C and lambda must be positive")
    exponent = 1.0 - lambda_param + lambda_param * math.log(lambda_param)
    if variant == "circle":
        exponent += lambda_param * math.log(2.0)
    L = math.log(X)
    L2 = math.log(L)
    return L * L2 ** exponent * math.sqrt(math.log(L2)) / c_param


def budget_exponent(variant: str, k: int = 3) -> float:
    """Exponent e in exp(2|M|/C1) <= X^e: 1/4 for Piltz, 1/32 for the lattice-point variants"""
    family, _ = parse_variant(variant, k)
    return 0.25 if family == "piltz" else 1.0 / 32.0


def tune_alpha(X: float, lambda_param: float, c1: float, variant: str, tables: ArithTables,
               exponent: Optional[float] = None, c_param: float = 1.0, k: int = 3,
               max_iter: int = 200, support_epsilon: float = DEFAULT_EPSILON) -> TuneResult:
    """
    Shrink alpha by 10% until exp(2|M|/C1) <= X^exponent.

    exponent defaults to budget_exponent(variant). C is reported as
    recipe(C=1) / alpha. `satisfied` is False when alpha drops out of the
    range where a resonating set exists first.
    """
    if exponent is None:
        exponent = budget_exponent(variant, k)
    recipe = alpha_recipe(X, lambda_param, 1.0, variant)
    alpha = recipe / c_param
    budget = exponent * math.log(X)
    result = TuneResult(alpha=alpha, c_param=c_param, config=None, satisfied=False, iterations=0,
                        exponent=exponent)
    for i in range(max_iter):
        result.iterations = i + 1
        try:
            config = build_frequency_set(alpha, lambda_param, c1, variant, tables, k=k,
                                         support_epsilon=support_epsilon)
        except DomainError:
            break
        except (EmptyResonatorError, OutOfRangeError):
            alpha *= 0.9
            continue
        result.history.append((alpha, len(config)))
        if 2.0 * len(config) / config.kernel_c1 <= budget:
            result.alpha, result.c_param, result.config, result.satisfied = alpha, recipe / alpha, config, True
            break
        alpha *= 0.9
    if not result.satisfied:
        logger.warning(f"⚠️ exp(2M/C1) <= X^{exponent:.4g} not reachable at X={X:g} ({result.iterations} steps)")
    return result


# --- INTEGRALS ---

def compute_I2(support: ResonatorSupport, Y2: float) -> float:
    """
    sqrt(2 pi) Y2 sum_{u,v} r(u) r(v) exp(-(u - v)^2 Y2^2 / 2).

    The diagonal u = v runs over all of N[M]: the truncated support plus
    support.diagonal_tail, so it equals prod (1 - r(lambda)^2)^-1. Pairs
    u != v come from the truncated support only.
    """
    order = np.argsort(support.u, kind="stable")
    u, w = support.u[order], support.weight[order]
    reach = UNDERFLOW_FLOOR / Y2
    hi = np.searchsorted(u, u + reach, side="right")
    width = int(np.max(hi - np.arange(len(u)))) if len(u) else 0

    total = float(np.sum(w * w)) + support.diagonal_tail
    for d in range(1, width):
        gap = u[d:] - u[:-d]
        live = gap <= reach
        total += 2.0 * float(np.sum(w[d:][live] * w[:-d][live] * np.exp(-(gap[live] * Y2) ** 2 / 2.0)))
    return math.sqrt(2.0 * math.pi) * Y2 * total


def _member_positions(spec: ExpSumSpec, config: ResonatorConfig) -> np.ndarray:
    pos = np.array([spec.position_of(int(n)) for n in config.n_list], dtype=np.int64)
    if np.any(pos < 0):
        missing = config.n_list[pos < 0][:5].tolist()
        raise ConsistencyError(f"members {missing} of M are absent from spec {spec.label} "
                               f"(n_max={spec.n_max:,})")
    return pos


def compute_I1_main(spec: ExpSumSpec, config: ResonatorConfig, support: ResonatorSupport,
                    alpha: Optional[float], Y2: float, I2: Optional[float] = None) -> float:
    """1/2 sum_{M} a_n w_alpha(lambda_n) r(lambda_n) * I_2"""
    alpha = config.kernel_alpha if alpha is None else alpha
    pos = _member_positions(spec, config)
    lam = spec.frequencies[pos]
    s = float(np.sum(spec.coefficients[pos] * kernel.weight(lam, alpha) * config.weight(lam)))
    if I2 is None:
        I2 = compute_I2(support, Y2)
    return 0.5 * s * I2


def predicted_lower_bound(spec: ExpSumSpec, config: ResonatorConfig, params: EngineParams) -> Prediction:
    """(pi / 4e) sum_M a_n plus the two error terms with implied constants 1"""
    pos = _member_positions(spec, config)
    lam = spec.frequencies[pos]
    a = spec.coefficients[pos]
    r = config.weight(lam)
    if np.any(r < math.exp(-1.0) * (1 - 1e-12)):
        raise ConsistencyError("r(lambda_n) < 1/e for a member of M (lambda_n > 2 alpha)")

    alpha, c1 = config.kernel_alpha, config.kernel_c1
    members_sum = float(np.sum(a))
    main = math.pi / (4.0 * math.e) * members_sum
    resonant = spec.coefficient_sum(upto=4.0 * alpha)
    first = params.X ** (params.A3 - params.A2) * math.exp(2.0 * len(config) / c1) * resonant
    second = params.X ** (-params.A4) / alpha * spec.coefficient_sum()
    refined = float(np.sum(a * r * kernel.weight(lam, alpha))) / (4.0 * alpha)
    return Prediction(main=main, error_terms=(first, second), refined_main=refined, members_sum=members_sum)


# --- SCANS ---

def baseline_rms(spec: ExpSumSpec) -> float:
    return math.sqrt(0.5 * float(np.sum(spec.coefficients ** 2)))


def scan_grid(spec: ExpSumSpec, lo: float, hi: float) -> Tuple[np.ndarray, float]:
    step = math.pi / (4.0 * spec.lambda_max)
    count = int(math.floor((hi - lo) / step)) + 1
    xs = lo + step * np.arange(count, dtype=np.float64)
    if xs[-1] < hi:
        xs = np.append(xs, hi)
    return xs, step


def _refine(spec: ExpSumSpec, x0: float, v0: float, lo: float, hi: float, step: float, tol: float):
    a, b = max(lo, x0 - step), min(hi, x0 + step)
    if b <= a:
        return x0, v0
    res = minimize_scalar(lambda t: -abs(eval_spec(spec, t)), bounds=(a, b), method="bounded",
                          options={"xatol": tol})
    value = abs(eval_spec(spec, float(res.x)))
    if value > v0:
        return float(res.x), value
    return x0, v0


def scan_max(spec: ExpSumSpec, lo: float, hi: float, workers: int = 1, refine_top: int = REFINE_TOP,
             max_points: Optional[int] = None) -> ScanResult:
    """max |F_beta| over [lo, hi]: grid at step pi/(4 lambda_max), then bounded Brent on the best points"""
    if not hi > lo:
        raise ArgumentError(f"scan range must satisfy lo < hi (got [{lo}, {hi}])")
    if len(spec) == 0:
        raise ArgumentError("cannot scan an empty spec")
    xs, step = scan_grid(spec, lo, hi)
    if max_points is not None and len(xs) > max_points:
        raise CapacityError(f"scan grid has {len(xs):,} points (cap {max_points:,})")

    values = np.abs(eval_spec_batch(spec, xs, workers=workers))
    # best first, smaller x among equal values
    top = np.lexsort((np.arange(len(xs)), -values))[:refine_top]
    tol = 1e-9 * (hi - lo)
    jobs = [(float(xs[i]), float(values[i])) for i in top]
    run = lambda job: _refine(spec, job[0], job[1], lo, hi, step, tol)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            refined = list(pool.map(run, jobs))
    else:
        refined = [run(job) for job in jobs]

    x_star, value = min(refined, key=lambda p: (-p[1], p[0]))
    signed = eval_spec(spec, x_star)
    result = ScanResult(x_star=x_star, value=value, lo=float(lo), hi=float(hi), step=step, refined=len(jobs),
                        baseline_rms=baseline_rms(spec), samples=len(xs), sign=int(np.sign(signed)))
    logger.info(f"🔍 Scan [{lo:.6g}, {hi:.6g}]: max |F| = {value:.6f} at x = {x_star:.9g} "
                f"({len(xs):,} points, rms {result.baseline_rms:.4f})")
    return result


def guided_scan(spec: ExpSumSpec, config: ResonatorConfig, lo: float, hi: float, workers: int = 1,
                peaks: int = 5, max_points: int = 200_000) -> GuidedScan:
    """
    Scan windows of four fastest periods around the highest local maxima of
    |R(x)|^2 on a coarse grid over [lo, hi].
    """
    if not hi > lo:
        raise ArgumentError(f"scan range must satisfy lo < hi (got [{lo}, {hi}])")
    coarse = max(math.pi / (4.0 * float(config.frequencies[-1])), (hi - lo) / max(2, max_points - 1))
    xs = lo + coarse * np.arange(int(math.floor((hi - lo) / coarse)) + 1)
    power = np.abs(eval_resonator_product(config, xs)) ** 2

    interior = np.zeros(len(xs), dtype=bool)
    if len(xs) >= 3:
        interior[1:-1] = (power[1:-1] >= power[:-2]) & (power[1:-1] >= power[2:])
    candidates = np.flatnonzero(interior) if interior.any() else np.array([int(np.argmax(power))])
    order = np.lexsort((candidates, -power[candidates]))[:peaks]
    chosen = [(float(xs[candidates[i]]), float(power[candidates[i]])) for i in order]

    half = 2.0 * (2.0 * math.pi / spec.lambda_max)
    best = None
    for center, _ in chosen:
        a, b = max(lo, center - half), min(hi, center + half)
        if b <= a:
            continue
        result = scan_max(spec, a, b, workers=workers)
        if best is None or (result.value, -result.x_star) > (best.value, -best.x_star):
            best = result
    if best is None:
        raise ArgumentError(f"no resonator peak window fits inside [{lo}, {hi}]")
    logger.info(f"🧭 Guided scan: {len(chosen)} resonator peaks, best |F| = {best.value:.6f}")
    return GuidedScan(best=best, peaks=chosen)
