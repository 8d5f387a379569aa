# core/series.py
"""
Truncated exponential sums F_beta(x) = sum_n a_n cos(lambda_n x + beta).

Builders for the Voronoi divisor series, the circle series, the smoothed
Piltz series and the Lau-Tsang P/Q sums, plus phase-accurate evaluation.
Every frequency is also stored as lambda / (2 pi) in double-double
("turns"), which is what evaluation multiplies by x.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core import precision
from core.arith import ArithTables, delta_exact, delta_normalized
from core.cache import spec_cache, spec_key
from core.errors import ArgumentError, OutOfRangeError

logger = logging.getLogger(__name__)

DIVISOR_A1 = 3.0
PILTZ_A1 = 8.0 / 5.0

_BLOCK = 1 << 20        # elements of one (points x terms) cosine block
_TERM_CHUNK = 4096
POINT_CHUNK = 1 << 15   # grid points handed to one worker task


@dataclass(frozen=True, eq=False)
class ExpSumSpec:
    coefficients: np.ndarray
    frequencies: np.ndarray
    phase: float
    index_map: np.ndarray
    label: str
    truncation_X: float
    A1: float
    turns_hi: np.ndarray = field(repr=False)
    turns_lo: np.ndarray = field(repr=False)
    k: int = 0
    alpha: float = 0.0

    def __len__(self):
        return len(self.coefficients)

    @property
    def n_max(self) -> int:
        return int(self.index_map[-1]) if len(self.index_map) else 0

    @property
    def lambda_max(self) -> float:
        return float(self.frequencies[-1]) if len(self.frequencies) else 0.0

    def coefficient_sum(self, upto: Optional[float] = None) -> float:
        if upto is None:
            return float(np.sum(self.coefficients))
        return float(np.sum(self.coefficients[self.frequencies <= upto]))

    def position_of(self, n: int) -> int:
        """Index of the term backed by integer n, or -1"""
        i = int(np.searchsorted(self.index_map, n))
        if i < len(self.index_map) and self.index_map[i] == n:
            return i
        return -1


@dataclass(frozen=True)
class LauTsangParams:
    tau: float
    a: float
    b: float
    J: int


# --- CONSTRUCTION ---

def _validate(coefficients, frequencies):
    if len(coefficients) != len(frequencies):
        raise ArgumentError("coefficients and frequencies differ in length")
    if np.any(coefficients < 0):
        raise ArgumentError("coefficients must be nonnegative")
    if np.any(frequencies <= 0):
        raise ArgumentError("frequencies must be positive")
    if np.any(np.diff(frequencies) <= 0):
        raise ArgumentError("frequencies must be strictly increasing")


def make_spec(coefficients, frequencies, phase=0.0, label="synthetic", index_map=None,
              truncation_X=0.0, A1=0.0) -> ExpSumSpec:
    """A synthetic spec from float64 frequencies"""
    a = np.asarray(coefficients, dtype=np.float64)
    lam = np.asarray(frequencies, dtype=np.float64)
    _validate(a, lam)
    if index_map is None:
        index_map = np.arange(1, len(a) + 1, dtype=np.int64)
    th, tl = precision.turns_from_frequency(lam)
    return ExpSumSpec(coefficients=a, frequencies=lam, phase=precision.reduce_angle(phase),
                      index_map=np.asarray(index_map, dtype=np.int64), label=label,
                      truncation_X=float(truncation_X), A1=float(A1), turns_hi=th, turns_lo=tl)


def _arith_spec(n, coefficients, root, coeff, phase, label, X, A1, k=0, alpha=0.0) -> ExpSumSpec:
    """lambda_n = 2 pi coeff n^(1/root), turns recomputed from the exact integers"""
    n = np.asarray(n, dtype=np.int64)
    th, tl = precision.turns_from_root(n, root, coeff)
    frequencies = precision.TWO_PI_HI * th
    a = np.asarray(coefficients, dtype=np.float64)
    _validate(a, frequencies)
    return ExpSumSpec(coefficients=a, frequencies=frequencies, phase=precision.reduce_angle(phase),
                      index_map=n, label=label, truncation_X=float(X), A1=float(A1),
                      turns_hi=th, turns_lo=tl, k=int(k), alpha=float(alpha))


def truncation_length(X: float, A1: float) -> int:
    # small slack so exact powers (2**3) are not lost to rounding
    return int(math.floor(X ** A1 * (1.0 + 1e-12)))


def _cut(X, A1, tables, max_terms):
    if X <= 1:
        raise ArgumentError(f"X must exceed 1 (got {X})")
    n_max = truncation_length(X, A1)
    if max_terms:
        n_max = min(n_max, int(max_terms))
    if n_max < 1:
        raise ArgumentError(f"X={X} gives an empty truncation")
    if n_max > tables.limit:
        raise OutOfRangeError(f"truncation n <= {n_max:,} needs tables up to {n_max:,} (have {tables.limit:,})")
    return n_max


def divisor_series_spec(X: float, tables: ArithTables, max_terms: Optional[int] = None,
                        A1: float = DIVISOR_A1) -> ExpSumSpec:
    """sum_{n<=X^3} d(n) n^(-3/4) cos(4 pi sqrt(n) x - pi/4)"""
    key = spec_key(f"divisor:{A1!r}", X, tables.key, max_terms=max_terms or 0)
    if key in spec_cache:
        return spec_cache[key]
    n_max = _cut(X, A1, tables, max_terms)
    n = np.arange(1, n_max + 1, dtype=np.int64)
    a = tables.d[1:n_max + 1] / n.astype(np.float64) ** 0.75
    spec = _arith_spec(n, a, 2, 2, -math.pi / 4, "divisor", X, A1)
    spec_cache[key] = spec
    return spec


def circle_series_spec(X: float, tables: ArithTables, max_terms: Optional[int] = None,
                       A1: float = DIVISOR_A1) -> ExpSumSpec:
    """sum_{n<=X^3} r(n) n^(-3/4) cos(2 pi sqrt(n) x + pi/4), r(n) = 0 terms dropped"""
    key = spec_key(f"circle:{A1!r}", X, tables.key, max_terms=max_terms or 0)
    if key in spec_cache:
        return spec_cache[key]
    n_max = _cut(X, A1, tables, max_terms)
    n = np.arange(1, n_max + 1, dtype=np.int64)
    r = tables.r2[1:n_max + 1]
    keep = r != 0
    n = n[keep]
    a = r[keep] / n.astype(np.float64) ** 0.75
    spec = _arith_spec(n, a, 2, 1, math.pi / 4, "circle", X, A1)
    spec_cache[key] = spec
    return spec


def piltz_series_spec(X: float, k: int, alpha: float, tables: ArithTables,
                      max_terms: Optional[int] = None, A1: float = PILTZ_A1) -> ExpSumSpec:
    """
    Gaussian-smoothed Piltz series, truncated at n <= X^(8/5):
    d_k(n) n^(-(k+1)/2k) exp(-pi^2 (n/alpha)^(2/k)) cos(2 pi k n^(1/k) x + (k-3) pi / 4)
    """
    if k < 2:
        raise ArgumentError(f"Piltz series needs k >= 2 (got {k})")
    if alpha <= 0:
        raise ArgumentError(f"alpha must be positive (got {alpha})")
    key = spec_key(f"piltz-{k}:{A1!r}", X, tables.key, k=k, alpha=alpha, max_terms=max_terms or 0)
    if key in spec_cache:
        return spec_cache[key]
    n_max = _cut(X, A1, tables, max_terms)
    dk = tables.dk_table(k)[1:n_max + 1]
    n = np.arange(1, n_max + 1, dtype=np.int64)
    nf = n.astype(np.float64)
    a = dk * nf ** (-(k + 1) / (2.0 * k)) * np.exp(-math.pi ** 2 * (nf / alpha) ** (2.0 / k))
    keep = a > 0
    spec = _arith_spec(n[keep], a[keep], k, k, (k - 3) * math.pi / 4, f"piltz-{k}", X, A1,
                       k=k, alpha=alpha)
    spec_cache[key] = spec
    return spec


def concat_specs(first: ExpSumSpec, second: ExpSumSpec) -> ExpSumSpec:
    """Direct sum of two specs with the same phase and disjoint frequencies"""
    if first.phase != second.phase:
        raise ArgumentError("cannot concatenate specs with different phases")
    lam = np.concatenate([first.frequencies, second.frequencies])
    order = np.argsort(lam, kind="stable")
    if len(np.unique(lam)) != len(lam):
        raise ArgumentError("frequency sets overlap")
    th = np.concatenate([first.turns_hi, second.turns_hi])[order]
    tl = np.concatenate([first.turns_lo, second.turns_lo])[order]
    a = np.concatenate([first.coefficients, second.coefficients])[order]
    idx = np.concatenate([first.index_map, second.index_map])[order]
    return ExpSumSpec(coefficients=a, frequencies=lam[order], phase=first.phase, index_map=idx,
                      label="synthetic", truncation_X=max(first.truncation_X, second.truncation_X),
                      A1=max(first.A1, second.A1), turns_hi=th, turns_lo=tl)


def truncate_spec(spec: ExpSumSpec, count: int) -> ExpSumSpec:
    """First `count` terms of a spec"""
    return ExpSumSpec(coefficients=spec.coefficients[:count], frequencies=spec.frequencies[:count],
                      phase=spec.phase, index_map=spec.index_map[:count], label=spec.label,
                      truncation_X=spec.truncation_X, A1=spec.A1, turns_hi=spec.turns_hi[:count],
                      turns_lo=spec.turns_lo[:count], k=spec.k, alpha=spec.alpha)


# --- EVALUATION ---

def eval_terms(coefficients, turns_hi, turns_lo, phase, x) -> np.ndarray:
    """
    sum_n c_n cos(2 pi frac(t_n x) + phase) for every x in a 1-d array.

    Coefficients may be signed here (the Lau-Tsang P sum); specs enforce
    a_n >= 0 on their own. Block shapes depend only on the term count, so
    the summation order for a given x never depends on how x was batched.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    T = len(coefficients)
    out = np.zeros(len(xs))
    if T == 0 or len(xs) == 0:
        return out
    rows = max(1, _BLOCK // min(T, _TERM_CHUNK))
    for i in range(0, len(xs), rows):
        xb = xs[i:i + rows, None]
        acc = np.zeros(len(xb))
        for j in range(0, T, _TERM_CHUNK):
            angle = precision.phase_angle(turns_hi[j:j + _TERM_CHUNK], turns_lo[j:j + _TERM_CHUNK], xb, phase)
            acc += np.cos(angle) @ coefficients[j:j + _TERM_CHUNK]
        out[i:i + rows] = acc
    return out


def _check_phase_range(spec: ExpSumSpec, xs: np.ndarray):
    if len(xs) and spec.lambda_max * float(np.max(np.abs(xs))) >= precision.PHASE_LIMIT:
        raise OutOfRangeError(f"|lambda_max * x| must stay below 2^50 (lambda_max={spec.lambda_max:.6g})")


def eval_spec(spec: ExpSumSpec, x):
    """F_beta(x); float for scalar x, array otherwise"""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    _check_phase_range(spec, xs)
    values = eval_terms(spec.coefficients, spec.turns_hi, spec.turns_lo, spec.phase, xs)
    return float(values[0]) if scalar else values


def eval_spec_batch(spec: ExpSumSpec, xs, workers: int = 1) -> np.ndarray:
    """Evaluate over a grid; chunks of POINT_CHUNK points go to the worker pool"""
    xs = np.asarray(xs, dtype=np.float64)
    _check_phase_range(spec, xs)
    chunks = [xs[i:i + POINT_CHUNK] for i in range(0, len(xs), POINT_CHUNK)]
    run = lambda chunk: eval_terms(spec.coefficients, spec.turns_hi, spec.turns_lo, spec.phase, chunk)
    if workers <= 1 or len(chunks) == 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    return np.concatenate(parts) if parts else np.zeros(0)


# --- VORONOI TRUNCATION ---

def truncation_residual(X: float, x, tables: ArithTables, normalized: bool = True,
                        max_terms: Optional[int] = None, truncation_X: Optional[float] = None):
    """
    pi sqrt(2) Delta(x^2) / sqrt(x) minus the truncated divisor series at x.

    Delta takes the midpoint value at integer x^2 unless normalized=False.
    The window [sqrt(X), X^(3/2)] always follows X; truncation_X (default X)
    sets where the series is cut, at truncation_X^3. Float for scalar x.
    """
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    lo, hi = math.sqrt(X), X ** 1.5
    outside = xs[(xs < lo) | (xs > hi)]
    if len(outside):
        raise OutOfRangeError(f"x={outside[0]} outside the uniformity window [{lo:.6g}, {hi:.6g}]")
    spec = divisor_series_spec(X if truncation_X is None else truncation_X, tables, max_terms=max_terms)
    delta = delta_normalized if normalized else delta_exact
    lhs = np.array([math.pi * math.sqrt(2.0) * delta(float(t * t)) / math.sqrt(t) for t in xs])
    values = lhs - eval_spec(spec, xs)
    return float(values[0]) if scalar else values


# --- LAU-TSANG SUMS ---

def lau_tsang_params(tau: float) -> LauTsangParams:
    if tau <= math.e:
        J = 1
    else:
        J = max(1, int(math.floor(2 * math.log(math.log(tau)))))
    return LauTsangParams(tau=float(tau), a=2 ** 0.25 - 2 ** -0.25, b=2 ** 0.25 + 2 ** -0.25, J=J)


def lau_tsang_weight(n, tau: float) -> np.ndarray:
    """Triangular weight max(0, 1 - |2 sqrt(n)/tau - 1|)"""
    n = np.asarray(n, dtype=np.float64)
    return np.maximum(0.0, 1.0 - np.abs(2.0 * np.sqrt(n) / tau - 1.0))


def _lau_tsang_terms(tau: float, tables: ArithTables, sign: str):
    if tau <= 0:
        raise ArgumentError(f"tau must be positive (got {tau})")
    n_max = int(math.floor(tau * tau * (1.0 + 1e-12)))
    if n_max > tables.limit:
        raise OutOfRangeError(f"tau={tau} needs tables up to {n_max:,} (have {tables.limit:,})")
    n = np.arange(1, n_max + 1, dtype=np.int64)
    c = tables.d[1:n_max + 1] * n.astype(np.float64) ** -0.75 * lau_tsang_weight(n, tau)
    if sign == "alternating":
        c = np.where(n % 2 == 0, c, -c)
    elif sign == "even":
        c = np.where(n % 2 == 0, c, 0.0)
    th, tl = precision.turns_from_root(n, 2, 2)
    return c, th, tl


def _lau_tsang_sum(x: float, tau: float, tables: ArithTables, sign: str) -> float:
    c, th, tl = _lau_tsang_terms(tau, tables, sign)
    return float(eval_terms(c, th, tl, 0.0, [x])[0])


def lau_tsang_P(x: float, tau: float, tables: ArithTables) -> float:
    """P(x, tau) = sum_{n<=tau^2} (-1)^n d(n) n^(-3/4) cos(4 pi sqrt(n) x) w(n)"""
    return _lau_tsang_sum(x, tau, tables, "alternating")


def lau_tsang_Q(x: float, tau: float, tables: ArithTables) -> float:
    """Q(x, tau) = sum_{n<=tau^2} d(n) n^(-3/4) cos(4 pi sqrt(n) x) w(n)"""
    return _lau_tsang_sum(x, tau, tables, "plain")


def lau_tsang_even(x: float, tau: float, tables: ArithTables) -> float:
    """The Q-type sum restricted to even n; P + Q = 2 * this"""
    return _lau_tsang_sum(x, tau, tables, "even")


def lau_tsang_spec(tau: float, tables: ArithTables, X: float = 0.0) -> ExpSumSpec:
    """Q(., tau) as a spec with beta = 0; the zero-weight edge n = tau^2 is dropped (Cached)"""
    key = spec_key(f"lau-tsang:{float(tau)!r}", X, tables.key)
    if key in spec_cache:
        return spec_cache[key]
    c, _, _ = _lau_tsang_terms(tau, tables, "plain")
    n = np.arange(1, len(c) + 1, dtype=np.int64)
    keep = c > 0
    if not keep.any():
        raise ArgumentError(f"tau={tau} leaves no weighted terms")
    spec = _arith_spec(n[keep], c[keep], 2, 2, 0.0, "lau-tsang", X, 0.0, alpha=float(tau) ** 2)
    spec_cache[key] = spec
    return spec


def lau_tsang_relation_residual(x: float, tau: float, tables: ArithTables) -> float:
    """Q(x, tau) - sum_{i,j<=J} a^j b^-i P(sqrt2^(j-i) x, sqrt2^(j+i) tau)"""
    p = lau_tsang_params(tau)
    widest = 2.0 ** p.J * tau
    if widest * widest > tables.limit:
        raise OutOfRangeError(f"inner tau'={widest:.6g} needs tables up to {int(widest * widest):,} "
                              f"(have {tables.limit:,})")
    rhs = 0.0
    for j in range(1, p.J + 1):
        for i in range(1, p.J + 1):
            scale = math.sqrt(2.0) ** (j - i)
            rhs += p.a ** j * p.b ** -i * lau_tsang_P(scale * x, math.sqrt(2.0) ** (j + i) * tau, tables)
    return lau_tsang_Q(x, tau, tables) - rhs


# --- EXPORT ---

def export_spec(spec: ExpSumSpec, csv_path, writer):
    """CSV n,a,lambda plus a JSON sidecar {label, beta, X, A1}"""
    header = ("n", "a", "lambda")
    writer.add_rows(csv_path, header, zip(spec.index_map.tolist(), spec.coefficients.tolist(),
                                          spec.frequencies.tolist()))
    writer.flush()
    sidecar = str(csv_path).rsplit(".", 1)[0] + ".json"
    writer.write_json(sidecar, {"label": spec.label, "beta": spec.phase,
                                "X": spec.truncation_X, "A1": spec.A1})
    return sidecar
