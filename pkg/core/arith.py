# core/arith.py
"""
Arithmetic tables and exact error terms.

Sieves d(n), r(n), d_k(n), omega(n) and the squarefree indicator up to N,
and computes Delta(x), P(x) and Delta_k(x) exactly at desk scale. These are
the ground-truth oracles every series in core.series is checked against.
"""

import math
import time
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

import numpy as np

from core.errors import (
    ArgumentError, CapacityError, ConfigurationError, ConsistencyError,
    OutOfRangeError, UnsupportedOrderError,
)

logger = logging.getLogger(__name__)

# Stieltjes constants gamma_0 (Euler-Mascheroni), gamma_1, gamma_2 to 10 digits
STIELTJES = (0.5772156649, -0.0728158454, -0.0096903632)
EULER_GAMMA = STIELTJES[0]

DEFAULT_MAX_LIMIT = 20_000_000
MAX_RESIDUE_ORDER = 4


@dataclass
class ArithTables:
    """
    Sieved arithmetic functions on 0..limit (index 0 is padding).

    d[0] = 0, r2[0] = 1 (the origin), omega[0] = 0, squarefree[0] = False.
    dk holds d_k for every requested k >= 3; k = 1 and k = 2 are served
    from the ones vector and d.
    """
    limit: int
    d: np.ndarray
    r2: np.ndarray
    omega: np.ndarray
    squarefree: np.ndarray
    dk: Dict[int, np.ndarray] = field(default_factory=dict)
    _prefix: Dict[str, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    @property
    def k_list(self) -> Tuple[int, ...]:
        return tuple(sorted(self.dk))

    @property
    def key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.limit, self.k_list)

    def dk_table(self, k: int) -> np.ndarray:
        if k == 1:
            ones = np.ones(self.limit + 1, dtype=np.int64)
            ones[0] = 0
            return ones
        if k == 2:
            return self.d
        if k not in self.dk:
            raise ConfigurationError(f"d_{k} table not built (available k: {sorted(self.dk) or 'none'})")
        return self.dk[k]

    def prefix(self, name: str, k: int = 2) -> np.ndarray:
        """Cumulative sums; prefix('dk', k)[m] = sum_{n<=m} d_k(n)"""
        key = f"{name}{k}" if name == 'dk' else name
        if key not in self._prefix:
            source = self.dk_table(k) if name == 'dk' else getattr(self, name)
            self._prefix[key] = np.cumsum(source, dtype=np.int64)
        return self._prefix[key]

    def primes(self) -> np.ndarray:
        idx = np.arange(self.limit + 1)
        return idx[(self.d == 2)]


@dataclass(frozen=True)
class MainTermCoefficients:
    """Main term x * sum_j c_j (log x)^j"""
    k: int
    coefficients: Tuple[float, ...]

    def evaluate(self, x: float) -> float:
        return main_term(x, self.coefficients)


# --- SIEVES ---

def _prime_sieve(N: int) -> np.ndarray:
    is_prime = np.ones(N + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, math.isqrt(N) + 1):
        if is_prime[i]:
            is_prime[i * i::i] = False
    return np.nonzero(is_prime)[0]


def _dirichlet_times_one(prev: np.ndarray) -> np.ndarray:
    """(prev * 1)(n) = sum_{m | n} prev[m]"""
    N = len(prev) - 1
    out = np.zeros_like(prev)
    for m in range(1, N + 1):
        if prev[m]:
            out[m::m] += prev[m]
    return out


def build_tables(N: int, k_list: Iterable[int] = (), max_limit: int = DEFAULT_MAX_LIMIT) -> ArithTables:
    """Sieve every table on 1..N; deterministic for a given (N, k_list)"""
    N = int(N)
    if N < 2:
        raise CapacityError(f"sieve limit must be at least 2 (got {N})")
    if N > max_limit:
        raise CapacityError(f"sieve limit {N:,} exceeds the memory cap {max_limit:,}")
    k_list = sorted({int(k) for k in k_list})
    if any(k < 2 for k in k_list):
        raise ArgumentError(f"k values must be >= 2 (got {k_list})")

    start = time.perf_counter()

    d = np.zeros(N + 1, dtype=np.int64)
    for i in range(1, N + 1):
        d[i::i] += 1

    # r(n) = 4 * sum_{m | n} chi_{-4}(m)
    r2 = np.zeros(N + 1, dtype=np.int64)
    for m in range(1, N + 1, 2):
        r2[m::m] += 1 if m % 4 == 1 else -1
    r2 *= 4
    r2[0] = 1

    primes = _prime_sieve(N)
    omega = np.zeros(N + 1, dtype=np.int64)
    squarefree = np.ones(N + 1, dtype=bool)
    squarefree[0] = False
    for p in primes:
        omega[p::p] += 1
        if p * p <= N:
            squarefree[p * p::p * p] = False

    dk = {}
    prev, level = d, 2
    for k in k_list:
        if k == 2:
            continue
        while level < k:
            prev = _dirichlet_times_one(prev)
            level += 1
        dk[k] = prev.copy()

    tables = ArithTables(limit=N, d=d, r2=r2, omega=omega, squarefree=squarefree, dk=dk)
    logger.info(f"🧮 Sieved tables up to N={N:,} (k={list(dk) or '-'}) in {time.perf_counter() - start:.2f}s")
    return tables


# --- EXACT SUMMATORY FUNCTIONS ---

def divisor_summatory(x: float) -> int:
    """sum_{n<=x} d(n) by the hyperbola method, exact in 64-bit integers"""
    m = int(math.floor(x))
    if m < 1:
        return 0
    s = math.isqrt(m)
    n = np.arange(1, s + 1, dtype=np.int64)
    return int(2 * np.sum(m // n, dtype=np.int64) - s * s)


def divisor_count(m: int) -> int:
    m = int(m)
    if m < 1:
        return 0
    s = math.isqrt(m)
    n = np.arange(1, s + 1, dtype=np.int64)
    hits = int(np.count_nonzero(m % n == 0))
    return 2 * hits - (1 if s * s == m else 0)


def _isqrt_vec(values: np.ndarray) -> np.ndarray:
    """Exact floor(sqrt(v)) for int64 arrays below 2**62"""
    b = np.floor(np.sqrt(values.astype(np.float64))).astype(np.int64)
    b = np.where(b * b > values, b - 1, b)
    b = np.where((b + 1) * (b + 1) <= values, b + 1, b)
    return b


def lattice_count(x: float, chunk: int = 1 << 22) -> int:
    """#{(a, b) in Z^2 : a^2 + b^2 <= x}, origin included"""
    if x < 0:
        raise ArgumentError(f"lattice_count needs x >= 0 (got {x})")
    m = int(math.floor(x))
    s = math.isqrt(m)
    total = 2 * s + 1  # a = 0 column
    for lo in range(1, s + 1, chunk):
        a = np.arange(lo, min(s, lo + chunk - 1) + 1, dtype=np.int64)
        b = _isqrt_vec(m - a * a)
        total += 2 * int(np.sum(2 * b + 1, dtype=np.int64))
    return total


# --- MAIN TERMS ---

def residue_polynomial(k: int) -> MainTermCoefficients:
    """
    Coefficients of Res_{s=1} zeta(s)^k x^s / s as x * sum_j c_j (log x)^j.

    With t = s - 1, t*zeta(1+t) = 1 + sum_n (-1)^n gamma_n / n! t^(n+1), so
    the residue is the t^(k-1) coefficient of (t zeta)^k e^{t log x} / (1+t).
    """
    k = int(k)
    if k < 1:
        raise ArgumentError(f"residue order must be >= 1 (got {k})")
    if k > MAX_RESIDUE_ORDER:
        raise UnsupportedOrderError(f"residue polynomial only embedded for k <= {MAX_RESIDUE_ORDER} (got {k})")

    gamma0, gamma1, gamma2 = STIELTJES
    t_zeta = np.array([1.0, gamma0, -gamma1, gamma2 / 2.0])[:k]
    inv_one_plus_t = np.array([(-1.0) ** j for j in range(k)])

    power = np.array([1.0])
    for _ in range(k):
        power = np.convolve(power, t_zeta)[:k]
    g = np.convolve(power, inv_one_plus_t)[:k]

    coefficients = tuple(float(g[k - 1 - j] / math.factorial(j)) for j in range(k))
    return MainTermCoefficients(k=k, coefficients=coefficients)


def main_term(x: float, coefficients) -> float:
    L = math.log(x)
    acc = 0.0
    for c in reversed(coefficients):
        acc = acc * L + c
    return x * acc


# --- ERROR TERMS ---

def delta_exact(x: float, tables: ArithTables = None, cross_check: bool = False) -> float:
    """Delta(x) = sum_{n<=x} d(n) - x log x - (2 gamma - 1) x"""
    if x <= 0:
        raise ArgumentError(f"delta_exact needs x > 0 (got {x})")
    total = divisor_summatory(x)
    if cross_check:
        m = int(math.floor(x))
        if tables is None or m > tables.limit:
            raise OutOfRangeError(f"x={x} is beyond the table limit for the cross-check")
        naive = int(tables.prefix('d')[m])
        if naive != total:
            raise ConsistencyError(f"hyperbola sum {total} != table sum {naive} at x={x}")
    return total - residue_polynomial(2).evaluate(x)


def delta_normalized(x: float) -> float:
    """Delta(x) with the jump halved at integers (the Voronoi series value)"""
    value = delta_exact(x)
    if float(x).is_integer():
        value -= divisor_count(int(x)) / 2.0
    return value


def circle_exact(x: float) -> float:
    """P(x) = #{a^2 + b^2 <= x} - pi x"""
    return lattice_count(x) - math.pi * x


def delta_k_exact(x: float, k: int, tables: ArithTables) -> float:
    """Delta_k(x) = sum_{n<=x} d_k(n) - Res_{s=1} zeta(s)^k x^s / s"""
    if x <= 0:
        raise ArgumentError(f"delta_k_exact needs x > 0 (got {x})")
    m = int(math.floor(x))
    if m > tables.limit:
        raise OutOfRangeError(f"x={x} exceeds table limit {tables.limit:,}")
    total = int(tables.prefix('dk', k)[m])
    return total - residue_polynomial(k).evaluate(x)
