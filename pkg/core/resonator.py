# core/resonator.py
"""
Resonating frequency sets M and the resonator

    R(x) = sum_{u in N[M]} r(u) e^{iux} = prod_{lambda in M} (1 - r(lambda) e^{i lambda x})^{-1},
    r(u) = e^{-u / (2 alpha)}.

Generators keep their exact integer n; frequencies are recomputed from n in
double-double turns whenever a phase is needed.
"""

import heapq
import math
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from core import precision
from core.arith import ArithTables
from core.errors import ArgumentError, CapacityError, DomainError, EmptyResonatorError, OutOfRangeError

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = math.exp(-3)
DEFAULT_SUPPORT_CAP = 200_000

# variant -> (root q, coefficient c) with lambda_n = 2 pi c n^(1/q)
_FREQUENCY_RULES = {"divisor": (2, 2), "circle": (2, 1), "lau-tsang": (2, 2)}


@dataclass(frozen=True, eq=False)
class ResonatorConfig:
    alpha: float
    c1: float
    lambda_param: float
    variant: str
    n_list: np.ndarray
    frequencies: np.ndarray
    turns_hi: np.ndarray = field(repr=False)
    turns_lo: np.ndarray = field(repr=False)
    kernel_alpha: float = 0.0
    kernel_c1: float = 0.0
    support_epsilon: float = DEFAULT_EPSILON
    k: int = 0

    def __len__(self):
        return len(self.n_list)

    @property
    def size(self) -> int:
        return len(self.n_list)

    @property
    def frequency_set(self) -> List[Tuple[int, float]]:
        return list(zip(self.n_list.tolist(), self.frequencies.tolist()))

    def weight(self, u):
        """r(u) = exp(-u / (2 alpha)) on the kernel scale"""
        return np.exp(-np.asarray(u, dtype=np.float64) / (2.0 * self.kernel_alpha))

    @property
    def generator_weights(self) -> np.ndarray:
        return self.weight(self.frequencies)


@dataclass(frozen=True, eq=False)
class ResonatorSupport:
    """Truncated N[M], sorted by frequency; row 0 is the zero frequency"""
    u: np.ndarray
    weight: np.ndarray
    degree: np.ndarray
    exponents: np.ndarray = field(repr=False)
    tail_mass: float = 0.0
    diagonal_tail: float = 0.0     # sum of r(u)^2 over N[M] beyond the cutoff
    epsilon: float = DEFAULT_EPSILON
    turns_hi: np.ndarray = field(default=None, repr=False)
    turns_lo: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.u)

    @property
    def generation_degree(self) -> int:
        return int(self.degree.max()) if len(self.degree) else 0

    @property
    def elements(self) -> List[Tuple[float, float]]:
        return list(zip(self.u.tolist(), self.weight.tolist()))


# --- FREQUENCY SETS ---

def parse_variant(variant: str, k: int = 3) -> Tuple[str, int]:
    """'divisor' | 'circle' | 'lau-tsang' | 'piltz' | 'piltz-K' -> (family, k)"""
    if variant in _FREQUENCY_RULES:
        return variant, 0
    if variant == "piltz":
        return "piltz", int(k)
    if variant.startswith("piltz-"):
        try:
            return "piltz", int(variant.split("-", 1)[1])
        except ValueError:
            pass
    raise ArgumentError(f"unknown variant {variant!r} (divisor, circle, lau-tsang, piltz, piltz-K)")


def frequency_rule(variant: str, k: int = 3) -> Tuple[int, int]:
    family, k = parse_variant(variant, k)
    if family == "piltz":
        if k < 2:
            raise ArgumentError(f"Piltz variant needs k >= 2 (got {k})")
        return k, k
    return _FREQUENCY_RULES[family]


def prime_factor_target(alpha: float, lambda_param: float) -> int:
    """floor(lambda log log alpha) with natural logarithms"""
    if alpha <= math.e:
        raise DomainError(f"log log alpha undefined or negative for alpha={alpha}")
    return int(math.floor(lambda_param * math.log(math.log(alpha))))


def _kernel_pair(alpha, c1, root, coeff):
    # largest admissible frequency lambda(2 alpha) sits at 2 * kernel_alpha
    kernel_alpha = math.pi * coeff * (2.0 * alpha) ** (1.0 / root)
    kernel_c1 = 2.0 * (c1 / 2.0) ** (1.0 / root)
    return kernel_alpha, kernel_c1


def build_frequency_set(alpha: float, lambda_param: float, c1: float, variant: str, tables: ArithTables,
                        k: int = 3, support_epsilon: float = DEFAULT_EPSILON) -> ResonatorConfig:
    """Squarefree n in [c1 alpha, 2 alpha] with omega(n) = floor(lambda log log alpha)"""
    if alpha <= 0 or lambda_param <= 0:
        raise ArgumentError("alpha and lambda must be positive")
    if not 0 < c1 < 2:
        raise ArgumentError(f"C1 must lie in (0, 2) (got {c1})")
    if not 0 < support_epsilon < 1:
        raise ArgumentError(f"support epsilon must lie in (0, 1) (got {support_epsilon})")
    family, k = parse_variant(variant, k)
    root, coeff = frequency_rule(variant, k)

    hi = int(math.floor(2.0 * alpha))
    if hi > tables.limit:
        raise OutOfRangeError(f"2*alpha={2 * alpha:.6g} exceeds the table limit {tables.limit:,}")
    K = prime_factor_target(alpha, lambda_param)
    if K < 1:
        raise DomainError(f"floor(lambda log log alpha) = {K} < 1 for alpha={alpha}, lambda={lambda_param}")

    lo = max(1, int(math.ceil(c1 * alpha)))
    n = np.arange(lo, hi + 1, dtype=np.int64)
    keep = tables.squarefree[lo:hi + 1] & (tables.omega[lo:hi + 1] == K)
    if family == "circle":
        # odd squarefree n has every prime factor = 1 mod 4 iff r(n) = 4 * 2^omega(n)
        keep &= (n % 2 == 1) & (tables.r2[lo:hi + 1] == 4 * (1 << K))
    n = n[keep]
    if len(n) == 0:
        raise EmptyResonatorError(f"no qualifying n in [{lo}, {hi}] with omega = {K} ({variant})")

    th, tl = precision.turns_from_root(n, root, coeff)
    kernel_alpha, kernel_c1 = _kernel_pair(alpha, c1, root, coeff)
    label = f"piltz-{k}" if family == "piltz" else family
    config = ResonatorConfig(alpha=float(alpha), c1=float(c1), lambda_param=float(lambda_param), variant=label,
                             n_list=n, frequencies=precision.TWO_PI_HI * th, turns_hi=th, turns_lo=tl,
                             kernel_alpha=kernel_alpha, kernel_c1=kernel_c1,
                             support_epsilon=float(support_epsilon), k=k)
    logger.info(f"🎯 Resonating set ({label}): |M|={len(n)} for alpha={alpha:.6g}, omega={K}")
    return config


def synthetic_config(frequencies, alpha: float, c1: float, support_epsilon: float = DEFAULT_EPSILON,
                     n_list=None) -> ResonatorConfig:
    """Config from explicit frequencies in [c1 alpha, 2 alpha]; kernel pair = (alpha, c1)"""
    lam = np.asarray(frequencies, dtype=np.float64)
    if len(lam) == 0:
        raise EmptyResonatorError("synthetic resonator needs at least one frequency")
    if alpha <= 0 or not 0 < c1 < 2:
        raise ArgumentError(f"need alpha > 0 and C1 in (0, 2) (got {alpha}, {c1})")
    if not 0 < support_epsilon < 1:
        raise ArgumentError(f"support epsilon must lie in (0, 1) (got {support_epsilon})")
    if np.any(np.diff(lam) <= 0):
        raise ArgumentError("frequencies must be strictly increasing")
    slack = 1e-12 * alpha
    if lam[0] < c1 * alpha - slack or lam[-1] > 2 * alpha + slack:
        raise ArgumentError(f"frequencies must lie in [{c1 * alpha:.6g}, {2 * alpha:.6g}]")
    n = np.arange(1, len(lam) + 1, dtype=np.int64) if n_list is None else np.asarray(n_list, dtype=np.int64)
    if len(np.unique(n)) != len(n) or len(n) != len(lam):
        raise ArgumentError("n_list must be distinct and match the frequencies")
    th, tl = precision.turns_from_frequency(lam)
    return ResonatorConfig(alpha=float(alpha), c1=float(c1), lambda_param=0.0, variant="synthetic",
                           n_list=n, frequencies=lam, turns_hi=th, turns_lo=tl, kernel_alpha=float(alpha),
                           kernel_c1=float(c1), support_epsilon=float(support_epsilon))


def estimate_M(alpha: float, lambda_param: float, variant: str = "divisor") -> float:
    """alpha / sqrt(log2 alpha) * (log alpha)^(lambda - 1 - lambda log lambda), implied constant 1"""
    if alpha <= math.e:
        raise DomainError(f"estimate_M needs alpha > e (got {alpha})")
    exponent = lambda_param - 1.0 - lambda_param * math.log(lambda_param)
    if variant == "circle":
        exponent -= lambda_param * math.log(2.0)
    L = math.log(alpha)
    return alpha / math.sqrt(math.log(L)) * L ** exponent


# --- SUPPORT ---

def expand_support(config: ResonatorConfig, cap: int = DEFAULT_SUPPORT_CAP,
                   epsilon: Optional[float] = None) -> ResonatorSupport:
    """
    Every u in N[M] with r(u) >= epsilon, in increasing u.

    Each multiset of generators is reached once, as a non-decreasing index
    sequence, so the heap pops distinct elements in a fixed order.
    """
    eps = config.support_epsilon if epsilon is None else float(epsilon)
    if not 0 < eps < 1:
        raise ArgumentError(f"support epsilon must lie in (0, 1) (got {eps})")
    lam = config.frequencies
    m = len(lam)
    if m == 0:
        raise EmptyResonatorError("cannot expand an empty resonating set")
    cutoff = 2.0 * config.kernel_alpha * math.log(1.0 / eps) * (1.0 + 1e-12)

    heap = [(0.0, (), 0)]   # (u, exponent tuple, smallest generator index still allowed)
    rows, us = [], []
    while heap:
        u, expo, start = heapq.heappop(heap)
        if len(us) >= cap:
            needed = math.exp(-u / (2.0 * config.kernel_alpha))
            raise CapacityError(f"support exceeds cap {cap:,} at epsilon={eps:.3g}; "
                                f"use epsilon > {needed:.6g}")
        us.append(u)
        rows.append(expo)
        for j in range(start, m):
            v = u + lam[j]
            if v > cutoff:
                break
            child = list(expo) + [0] * (m - len(expo))
            child[j] += 1
            heapq.heappush(heap, (v, tuple(child), j))

    E = np.zeros((len(rows), m), dtype=np.int16)
    for i, expo in enumerate(rows):
        E[i, :len(expo)] = expo
    u = np.asarray(us)
    weight = config.weight(u)
    r = config.generator_weights
    total = float(np.prod(1.0 / (1.0 - r)))
    squares = float(np.prod(1.0 / (1.0 - r * r)))
    support = ResonatorSupport(u=u, weight=weight, degree=E.sum(axis=1).astype(np.int64), exponents=E,
                               tail_mass=max(0.0, total - float(np.sum(weight))),
                               diagonal_tail=max(0.0, squares - float(np.sum(weight * weight))), epsilon=eps,
                               turns_hi=config.turns_hi, turns_lo=config.turns_lo)
    logger.info(f"🌀 Support expanded: {len(u):,} elements, degree <= {support.generation_degree}, "
                f"tail <= {support.tail_mass:.3g}")
    return support


# --- EVALUATION ---

_X_CHUNK = 2048


def eval_resonator_product(config: ResonatorConfig, x):
    """Euler product value; complex for scalar x, complex array otherwise"""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    r = config.generator_weights
    out = np.empty(len(xs), dtype=np.complex128)
    for i in range(0, len(xs), _X_CHUNK):
        angle = precision.phase_angle(config.turns_hi, config.turns_lo, xs[i:i + _X_CHUNK, None])
        out[i:i + _X_CHUNK] = np.prod(1.0 / (1.0 - r * np.exp(1j * angle)), axis=1)
    return complex(out[0]) if scalar else out


def eval_resonator_sum(support: ResonatorSupport, x):
    """sum r(u) e^{iux} over the truncated support; support.tail_mass bounds the gap to the product"""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    E = support.exponents.astype(np.float64)
    out = np.empty(len(xs), dtype=np.complex128)
    rows = max(1, (1 << 20) // max(1, len(support)))
    for i in range(0, len(xs), rows):
        f = precision.frac_turns(support.turns_hi, support.turns_lo, xs[i:i + rows, None])
        t = E @ f.T                                  # turns of every u at every x
        t -= np.floor(t)
        out[i:i + rows] = support.weight @ np.exp(1j * precision.TWO_PI_HI * t)
    return complex(out[0]) if scalar else out


# --- BOUNDS ---

def sup_bound(config: ResonatorConfig) -> float:
    """exp(2|M| / C1), the sup bound on |R(x)|^2"""
    return math.exp(2.0 * len(config) / config.kernel_c1)


def product_sup(config: ResonatorConfig) -> float:
    """prod (1 - r(lambda))^{-2} = |R(0)|^2 = sup |R|^2"""
    return float(np.prod((1.0 - config.generator_weights) ** -2.0))


def check_multiplicativity(support: ResonatorSupport, pairs: int = 100, seed: int = 0) -> Tuple[int, float]:
    """
    Spot-check r(u + v) = r(u) r(v) on represented pairs.

    Returns (pairs checked, max relative error).
    """
    index = {row.tobytes(): i for i, row in enumerate(support.exponents)}
    rng = np.random.default_rng(seed)
    n = len(support)
    checked, worst = 0, 0.0
    for _ in range(pairs * 50):
        if checked >= pairs:
            break
        i, j = rng.integers(0, n, size=2)
        target = index.get((support.exponents[i] + support.exponents[j]).tobytes())
        if target is None:
            continue
        expected = support.weight[i] * support.weight[j]
        worst = max(worst, abs(support.weight[target] - expected) / expected)
        checked += 1
    return checked, worst


def members_are_independent(config: ResonatorConfig, tables: Optional[ArithTables] = None) -> bool:
    """Distinct n, and squarefree when tables are at hand"""
    n = config.n_list
    if len(np.unique(n)) != len(n):
        return False
    if tables is not None and config.variant != "synthetic":
        return bool(np.all(tables.squarefree[n]))
    return True


# --- EXPORT ---

def config_document(config: ResonatorConfig) -> dict:
    return {"alpha": config.alpha, "c1": config.c1, "lambda_param": config.lambda_param,
            "variant": config.variant, "n_list": config.n_list.tolist()}


def export_config(config: ResonatorConfig, path, writer):
    writer.write_json(path, config_document(config))


def export_support(support: ResonatorSupport, path, writer):
    writer.add_rows(path, ("u", "weight"), zip(support.u.tolist(), support.weight.tolist()))
    writer.flush()
