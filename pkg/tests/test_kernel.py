from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from core.errors import ArgumentError, PreconditionError
from core.kernel import (
    KernelParams, convolve_exact, convolve_numeric, default_params, fejer_kernel, max_step, weight,
)
from core.series import make_spec


def test_weight_shape() -> None:
    assert weight(2.0, 1.0) == pytest.approx(math.pi)
    assert weight(1.0, 1.0) == pytest.approx(math.pi / 2)
    assert weight(3.0, 1.0) == pytest.approx(math.pi / 2)
    assert weight(0.0, 1.0) == 0.0
    assert weight(4.0, 1.0) == 0.0
    assert weight(9.0, 1.0) == 0.0
    assert isinstance(weight(2.0, 1.0), float)
    assert weight(np.array([1.0, 2.0]), 1.0).shape == (2,)


def test_fejer_kernel_at_origin() -> None:
    assert fejer_kernel(np.array([0.0, math.pi]), 2.0).tolist() == pytest.approx([4.0, 0.0], abs=1e-15)


def test_exact_convolution() -> None:
    spec = make_spec([1.0], [2.0])
    assert convolve_exact(spec, 0.0, 1.0) == pytest.approx(math.pi / 2)
    shifted = make_spec([1.0], [2.0], phase=math.pi / 2)
    assert convolve_exact(shifted, 0.0, 1.0) == pytest.approx(1j * math.pi / 2)
    assert convolve_exact(make_spec([1.0], [5.0]), 0.3, 1.0) == 0j


def test_phase_factors_out() -> None:
    base = make_spec([0.3, 0.7], [1.5, 2.5])
    turned = make_spec([0.3, 0.7], [1.5, 2.5], phase=0.8)
    for x in (0.0, 1.3, 47.0):
        expected = cmath.exp(0.8j) * convolve_exact(base, x, 1.0)
        assert abs(convolve_exact(turned, x, 1.0) - expected) < 1e-12


def test_numeric_matches_single_term() -> None:
    spec = make_spec([1.0], [2.0])
    result = convolve_numeric(spec, 0.0, KernelParams(alpha=1.0, window=2000.0, quad_step=1.0 / 128))
    assert abs(result.value - math.pi / 2) <= 2e-3
    assert abs(result.value - math.pi / 2) <= result.bound
    assert result.nodes == 4 * 256_000 + 1


def test_numeric_vanishes_outside_the_band() -> None:
    spec = make_spec([1.0], [5.0])
    result = convolve_numeric(spec, 0.4, default_params(spec, 1.0))
    assert abs(result.value) <= result.bound


def test_numeric_agrees_with_exact_on_random_specs(rng) -> None:
    for _ in range(3):
        alpha = float(rng.uniform(0.5, 3.0))
        freqs = np.sort(rng.uniform(0.1, 5 * alpha, 5))
        spec = make_spec(rng.uniform(0.0, 0.2, 5), freqs, phase=float(rng.uniform(-math.pi, math.pi)))
        params = default_params(spec, alpha)
        for x in rng.uniform(-100, 100, 2):
            result = convolve_numeric(spec, x, params)
            assert abs(result.value - convolve_exact(spec, x, alpha)) <= result.bound + 1e-9


def test_default_params() -> None:
    spec = make_spec([0.5, 0.5], [1.0, 3.0])
    params = default_params(spec, 2.0)
    assert params.window == pytest.approx(max(5.0, 2.0 / 5e-3))
    assert params.quad_step == pytest.approx(0.5 * max_step(3.0, 2.0))
    params.check(spec)


def test_preconditions() -> None:
    spec = make_spec([1.0], [2.0])
    with pytest.raises(PreconditionError):
        KernelParams(alpha=1.0, window=5.0, quad_step=0.01).check()
    with pytest.raises(PreconditionError):
        convolve_numeric(spec, 0.0, KernelParams(alpha=1.0, window=20.0, quad_step=1.0))
    with pytest.raises(ArgumentError):
        KernelParams(alpha=0.0, window=20.0, quad_step=0.01).check()
