# core/kernel.py
"""
Fejer-type convolution

    int F_beta(x + u) (sin(alpha u) / u)^2 e^{-2i alpha u} du
        = 1/2 e^{i beta} sum_n a_n w_alpha(lambda_n) e^{i lambda_n x},

with the triangular weight w_alpha(lambda) = pi/2 max(0, 2 alpha - |lambda - 2 alpha|).
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from core import precision
from core.errors import ArgumentError, PreconditionError
from core.series import ExpSumSpec, eval_spec

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 5e-3


@dataclass(frozen=True)
class KernelParams:
    alpha: float
    window: float       # U, integrate over |u| <= U
    quad_step: float    # h; Richardson pairs h with h/2

    def check(self, spec: Optional[ExpSumSpec] = None):
        if self.alpha <= 0 or self.window <= 0 or self.quad_step <= 0:
            raise ArgumentError("alpha, window and quad_step must be positive")
        if self.window < 10.0 / self.alpha * (1 - 1e-12):
            raise PreconditionError(f"window U={self.window:.6g} must be >= 10/alpha = {10.0 / self.alpha:.6g}")
        if spec is not None:
            limit = max_step(spec.lambda_max, self.alpha)
            if self.quad_step > limit * (1 + 1e-12):
                raise PreconditionError(f"quad_step {self.quad_step:.6g} too coarse for lambda_max="
                                        f"{spec.lambda_max:.6g} (need <= {limit:.6g})")


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    tail: float         # sum a_n * 2/U
    budget: float       # Richardson estimate |S_{h/2} - S_h| / 15
    nodes: int

    @property
    def bound(self) -> float:
        return self.tail + self.budget


def max_step(lambda_max: float, alpha: float) -> float:
    return math.pi / (4.0 * (lambda_max + 2.0 * alpha))


def weight(lam, alpha):
    """w_alpha(lambda) = pi/2 * max(0, 2 alpha - |lambda - 2 alpha|)"""
    lam = np.asarray(lam, dtype=np.float64)
    w = 0.5 * math.pi * np.maximum(0.0, 2.0 * alpha - np.abs(lam - 2.0 * alpha))
    return float(w) if w.ndim == 0 else w


def default_params(spec: ExpSumSpec, alpha: float, tolerance: float = DEFAULT_TOLERANCE) -> KernelParams:
    """U = max(10/alpha, 2 sum a / tolerance), h = half the largest admissible step"""
    window = max(10.0 / alpha, 2.0 * spec.coefficient_sum() / tolerance)
    return KernelParams(alpha=float(alpha), window=window, quad_step=0.5 * max_step(spec.lambda_max, alpha))


def convolve_exact(spec: ExpSumSpec, x: float, alpha: float) -> complex:
    w = weight(spec.frequencies, alpha)
    live = w > 0
    if not np.any(live):
        return 0j
    angle = precision.phase_angle(spec.turns_hi[live], spec.turns_lo[live], float(x))
    total = np.sum(spec.coefficients[live] * w[live] * np.exp(1j * angle))
    return complex(0.5 * np.exp(1j * spec.phase) * total)


def fejer_kernel(u, alpha: float) -> np.ndarray:
    """(sin(alpha u)/u)^2 with the value alpha^2 at u = 0"""
    u = np.asarray(u, dtype=np.float64)
    out = np.full(u.shape, alpha * alpha)
    nz = u != 0
    out[nz] = (np.sin(alpha * u[nz]) / u[nz]) ** 2
    return out


def _simpson_complex(y: np.ndarray, dx: float) -> complex:
    return complex(simpson(y.real, dx=dx), simpson(y.imag, dx=dx))


def convolve_numeric(spec: ExpSumSpec, x: float, params: KernelParams) -> QuadratureResult:
    """
    Composite Simpson over |u| <= U at steps h and h/2 on shared nodes.

    The value is the h/2 sum; the window is rounded up to a whole number of
    coarse steps so both rules close on the same endpoints.
    """
    params.check(spec)
    alpha, h = params.alpha, params.quad_step
    m = int(math.ceil(params.window / h))
    u = np.arange(-2 * m, 2 * m + 1, dtype=np.float64) * (0.5 * h)
    integrand = eval_spec(spec, float(x) + u) * fejer_kernel(u, alpha) * np.exp(-2j * alpha * u)

    fine = _simpson_complex(integrand, 0.5 * h)
    coarse = _simpson_complex(integrand[::2], h)
    result = QuadratureResult(value=fine, tail=2.0 * spec.coefficient_sum() / (m * h),
                              budget=abs(fine - coarse) / 15.0, nodes=len(u))
    logger.debug(f"📐 Quadrature at x={x}: {result.nodes} nodes, budget {result.budget:.3g}")
    return result
