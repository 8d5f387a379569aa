# core/growth.py
"""
Growth targets (log X)^a (log2 X)^b (log3 X)^c for each variant, the earlier
records they improve on, and a diagnostic report fitting the slope of
log(max |F|) against log log X.
"""

import math
import logging
from dataclasses import dataclass, asdict
from typing import Dict, List, Sequence, Tuple

import numpy as np

from core.errors import ArgumentError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GrowthTarget:
    """(log X)^e_log (log2 X)^e_loglog (log3 X)^e_logloglog"""
    e_log: float
    e_loglog: float
    e_logloglog: float
    label: str

    def scale(self, X: float) -> float:
        L = math.log(X)
        value = 1.0
        for exponent, base, name in ((self.e_log, L, "log X"),
                                     (self.e_loglog, math.log(L) if L > 0 else -1.0, "log log X"),
                                     (self.e_logloglog, _log3(X), "log log log X")):
            if exponent == 0:
                continue
            if base <= 0:
                raise DomainError(f"{name} <= 0 at X={X}; target {self.label} undefined")
            value *= base ** exponent
        return value

    def as_dict(self) -> Dict:
        return asdict(self)


def _log3(X: float) -> float:
    L = math.log(X)
    if L <= 0 or math.log(L) <= 0:
        return -1.0
    return math.log(math.log(L))


# --- TARGETS ---

def divisor_target() -> GrowthTarget:
    return GrowthTarget(0.25, 0.75 * (2 ** (4 / 3) - 1), -0.375, "divisor")


def circle_targets() -> Tuple[GrowthTarget, GrowthTarget]:
    """(stated, derived): the stated log2 exponent uses 2^(4/3), the derivation ends at 2^(1/3)"""
    stated = GrowthTarget(0.25, 0.75 * (2 ** (4 / 3) - 1), -0.375, "circle (stated)")
    derived = GrowthTarget(0.25, 0.75 * (2 ** (1 / 3) - 1), -0.375, "circle (derived)")
    return stated, derived


def piltz_target(k: int) -> GrowthTarget:
    if k < 2:
        raise ArgumentError(f"Piltz target needs k >= 2 (got {k})")
    return GrowthTarget((k - 1) / (2 * k),
                        (k + 1) / (2 * k) * (k ** (2 * k / (k + 1)) - 1),
                        -0.5 + (k - 1) / (4 * k),
                        f"piltz-{k}")


def mean_square_target() -> GrowthTarget:
    """Lau-Tsang sums share the divisor exponents"""
    t = divisor_target()
    return GrowthTarget(t.e_log, t.e_loglog, t.e_logloglog, "lau-tsang")


def previous_record_target(kind: str, k: int = 3) -> GrowthTarget:
    """Earlier records: same log and log2 exponents, weaker log3 exponent"""
    if kind in ("divisor", "circle", "lau-tsang"):
        return GrowthTarget(0.25, 0.75 * (2 ** (4 / 3) - 1), -0.625, f"{kind} (previous)")
    if kind.startswith("piltz"):
        t = piltz_target(k)
        return GrowthTarget(t.e_log, t.e_loglog, -0.5 - (k - 1) / (4 * k), f"piltz-{k} (previous)")
    raise ArgumentError(f"no previous record for {kind!r}")


def piltz_sign(k: int) -> int:
    """+1 for k = 3 mod 8, -1 for k = 7 mod 8, else 0 (two-sided)"""
    return {3: 1, 7: -1}.get(k % 8, 0)


def targets_for(variant: str, k: int = 3) -> List[GrowthTarget]:
    if variant == "divisor":
        return [divisor_target()]
    if variant == "circle":
        return list(circle_targets())
    if variant.startswith("piltz"):
        return [piltz_target(k)]
    if variant == "lau-tsang":
        return [mean_square_target()]
    raise ArgumentError(f"no growth target for variant {variant!r}")


# --- REPORT ---

def growth_report(results: Sequence[Tuple[float, object]], target: GrowthTarget) -> Dict:
    """
    Per-X ratio value / target scale and the least-squares slope of
    log(value) against log log X. Diagnostic only.

    `results` holds (X, ScanResult) pairs or (X, value) pairs.
    """
    points = []
    for X, result in results:
        value = float(getattr(result, "value", result))
        if value <= 0:
            raise ArgumentError(f"nonpositive value {value} at X={X}")
        points.append((float(X), value))
    if len({X for X, _ in points}) < 3:
        raise ArgumentError(f"growth report needs at least 3 distinct X values (got {len(points)} points)")
    if any(X <= math.e for X, _ in points):
        raise DomainError("growth report needs every X > e")

    points.sort()
    rows = [{"X": X, "value": v, "target_scale": target.scale(X), "ratio": v / target.scale(X)}
            for X, v in points]
    loglog = np.log(np.log([X for X, _ in points]))
    slope = float(np.polyfit(loglog, np.log([v for _, v in points]), 1)[0])
    logger.info(f"📈 Growth report vs {target.label}: {len(rows)} points, slope {slope:.4f}")
    return {"target": target.as_dict(), "rows": rows, "slope_vs_loglog": slope}
