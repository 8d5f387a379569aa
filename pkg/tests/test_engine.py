from __future__ import annotations

import math

import numpy as np
import pytest

from core.arith import build_tables
from core.errors import ArgumentError, CapacityError, ConsistencyError, DomainError
from core.engine import (
    EngineParams, alpha_recipe, baseline_rms, budget_exponent, compute_I1_main, compute_I2, guided_scan,
    predicted_lower_bound, scan_grid, scan_max, tune_alpha,
)
from core.kernel import weight
from core.resonator import ResonatorSupport, build_frequency_set, expand_support, synthetic_config
from core.series import divisor_series_spec, eval_spec, make_spec

LAMBDA_DIVISOR = 2 ** (4 / 3)


# --- parameters ---

def test_engine_params() -> None:
    params = EngineParams(X=100.0)
    assert params.Y1 == pytest.approx(100.0)
    assert params.Y2 == pytest.approx(1000.0)
    piltz = EngineParams.for_variant(100.0, "piltz-3")
    assert (piltz.A1, piltz.A4) == (8 / 5, 9 / 10)
    with pytest.raises(ArgumentError):
        EngineParams(X=100.0, A1=1.0)
    with pytest.raises(ArgumentError):
        EngineParams(X=1.0)


def test_alpha_recipe() -> None:
    X = 1e6
    L = math.log(X)
    assert alpha_recipe(X, 1.0) == pytest.approx(L * math.sqrt(math.log(math.log(L))))
    assert alpha_recipe(X, 1.0, c_param=2.0) == pytest.approx(alpha_recipe(X, 1.0) / 2)
    assert alpha_recipe(X, LAMBDA_DIVISOR, variant="circle") > alpha_recipe(X, LAMBDA_DIVISOR)
    with pytest.raises(DomainError):
        alpha_recipe(15.0, 1.0)


def test_tune_alpha_with_room() -> None:
    tables = build_tables(200)
    result = tune_alpha(1e6, LAMBDA_DIVISOR, 1.0, "divisor", tables, exponent=1.0)
    assert result.satisfied
    assert result.iterations == 1
    assert result.config.n_list.tolist() == [30, 42]
    assert result.alpha == pytest.approx(alpha_recipe(1e6, LAMBDA_DIVISOR))
    assert result.c_param == pytest.approx(1.0)


def test_budget_exponent_depends_on_variant() -> None:
    assert budget_exponent("divisor") == pytest.approx(1 / 32)
    assert budget_exponent("circle") == pytest.approx(1 / 32)
    assert budget_exponent("piltz-3") == 0.25
    assert budget_exponent("piltz", k=4) == 0.25


def test_tune_alpha_uses_the_piltz_budget() -> None:
    tables = build_tables(200)
    result = tune_alpha(1e6, LAMBDA_DIVISOR, 1.0, "piltz-3", tables)
    assert result.exponent == 0.25
    assert result.satisfied
    assert result.iterations == 1
    assert result.config.n_list.tolist() == [30, 42]
    divisor = tune_alpha(1e6, LAMBDA_DIVISOR, 1.0, "divisor", tables)
    assert divisor.exponent == pytest.approx(1 / 32)
    assert not divisor.satisfied


def test_tune_alpha_gives_up_cleanly() -> None:
    tables = build_tables(200)
    result = tune_alpha(1e6, LAMBDA_DIVISOR, 1.0, "divisor", tables)
    assert not result.satisfied
    assert result.config is None
    assert result.history


# --- integrals ---

def test_I2_single_generator() -> None:
    config = synthetic_config([2.0], 1.0, 1.0, support_epsilon=1e-8)
    support = expand_support(config)
    Y2 = 100.0
    ratio = compute_I2(support, Y2) / (math.sqrt(2 * math.pi) * Y2)
    assert ratio == pytest.approx(1.156518, abs=1e-6)
    assert ratio >= math.exp(1 / 7)


def test_I2_of_bare_support() -> None:
    support = ResonatorSupport(u=np.zeros(1), weight=np.ones(1), degree=np.zeros(1, dtype=np.int64),
                               exponents=np.zeros((1, 0), dtype=np.int16))
    assert compute_I2(support, 10.0) == pytest.approx(math.sqrt(2 * math.pi) * 10.0)


def test_I2_diagonal_ignores_the_cutoff() -> None:
    config = synthetic_config([2.0], 1.0, 1.0, support_epsilon=0.5)
    support = expand_support(config)
    assert len(support) == 1
    ratio = compute_I2(support, 10.0) / (math.sqrt(2 * math.pi) * 10.0)
    assert ratio == pytest.approx(1.0 / (1.0 - math.exp(-2.0)), rel=1e-12)
    finer = expand_support(config, epsilon=1e-6)
    assert compute_I2(finer, 10.0) == pytest.approx(compute_I2(support, 10.0), rel=1e-9)


def test_I2_counts_close_pairs() -> None:
    config = synthetic_config([1.0, 1.0 + 1e-4], 1.0, 1.0, support_epsilon=math.exp(-0.9))
    support = expand_support(config)
    assert support.u.tolist() == pytest.approx([0.0, 1.0, 1.0 + 1e-4])
    Y2 = 100.0
    w = support.weight
    r = config.generator_weights
    near = 2 * w[1] * w[2] * math.exp(-(1e-4 * Y2) ** 2 / 2)
    diagonal = 1.0 / ((1.0 - r[0] ** 2) * (1.0 - r[1] ** 2))
    expected = math.sqrt(2 * math.pi) * Y2 * (diagonal + near)
    assert compute_I2(support, Y2) == pytest.approx(expected, rel=1e-12)


def test_I2_grows_with_the_support() -> None:
    config = synthetic_config([1.0, 1.0 + 1e-4], 1.0, 1.0)
    small = compute_I2(expand_support(config, epsilon=math.exp(-0.9)), 100.0)
    large = compute_I2(expand_support(config, epsilon=math.exp(-3)), 100.0)
    assert large >= small


@pytest.mark.parametrize("alpha,lam", [(200.0, 1.0), (1000.0, LAMBDA_DIVISOR), (3000.0, 1.0)])
def test_I2_diagonal_bound_on_built_sets(alpha, lam) -> None:
    tables = build_tables(6001)
    config = build_frequency_set(alpha, lam, 1.0, "divisor", tables, support_epsilon=0.3)
    support = expand_support(config)
    Y2 = 1e6
    ratio = compute_I2(support, Y2) / (math.sqrt(2 * math.pi) * Y2)
    assert math.log(ratio) >= len(config) / 7


def test_I2_diagonal_bound_with_a_deeper_support() -> None:
    tables = build_tables(401)
    config = build_frequency_set(200.0, 1.0, 1.0, "divisor", tables)
    assert len(config) == 32
    support = expand_support(config, epsilon=math.exp(-3))
    Y2 = 1e6
    ratio = compute_I2(support, Y2) / (math.sqrt(2 * math.pi) * Y2)
    assert ratio >= math.exp(32 / 7)


def test_I1_main_single_member() -> None:
    spec = make_spec([1.0], [2.0])
    config = synthetic_config([2.0], 1.0, 1.0, support_epsilon=1e-8)
    support = expand_support(config)
    I2 = compute_I2(support, 100.0)
    expected = 0.5 * weight(2.0, 1.0) * math.exp(-1) * I2
    assert compute_I1_main(spec, config, support, 1.0, 100.0) == pytest.approx(expected)
    assert compute_I1_main(spec, config, support, 1.0, 100.0, I2=I2) == pytest.approx(expected)
    assert compute_I1_main(spec, config, support, None, 100.0, I2=I2) == pytest.approx(expected)
    wider = 0.5 * weight(2.0, 3.0) * math.exp(-1) * I2
    assert compute_I1_main(spec, config, support, 3.0, 100.0, I2=I2) == pytest.approx(wider)


def test_prediction_single_member() -> None:
    spec = make_spec([1.0], [2.0])
    config = synthetic_config([2.0], 1.0, 1.0)
    prediction = predicted_lower_bound(spec, config, EngineParams(X=1000.0))
    assert prediction.main == pytest.approx(0.288932, abs=1e-6)
    assert prediction.refined_main == pytest.approx(prediction.main)
    assert all(t > 0 for t in prediction.error_terms)
    assert prediction.lower == pytest.approx(prediction.main - sum(prediction.error_terms))


def test_prediction_consistency_errors() -> None:
    config = synthetic_config([2.0], 1.0, 1.0, n_list=[5])
    with pytest.raises(ConsistencyError):
        predicted_lower_bound(make_spec([1.0], [2.0]), config, EngineParams(X=1000.0))
    # the series places n = 5 beyond 2 alpha, so r(lambda) < 1/e
    too_fast = make_spec([1.0], [3.0], index_map=[5])
    with pytest.raises(ConsistencyError):
        predicted_lower_bound(too_fast, config, EngineParams(X=1000.0))


# --- scans ---

def test_scan_single_cosine() -> None:
    spec = make_spec([1.0], [1.0])
    result = scan_max(spec, 0.1, 10.0)
    assert result.value == pytest.approx(1.0, abs=1e-9)
    assert abs(math.cos(result.x_star)) == pytest.approx(1.0, abs=1e-9)
    assert 0.1 <= result.x_star <= 10.0
    assert result.baseline_rms == pytest.approx(math.sqrt(0.5))


def test_scan_two_cosines_align() -> None:
    spec = make_spec([1.0, 1.0], [1.0, math.sqrt(2)])
    result = scan_max(spec, 0.0, 2000.0)
    assert result.value >= 1.95
    assert result.value == pytest.approx(abs(eval_spec(spec, result.x_star)))


def test_refinement_never_loses_to_the_grid() -> None:
    spec = make_spec([0.5, 0.3, 0.2], [1.0, 2.3, 3.7], phase=-math.pi / 4)
    xs, _ = scan_grid(spec, 0.0, 300.0)
    result = scan_max(spec, 0.0, 300.0)
    assert result.value >= float(np.max(np.abs(eval_spec(spec, xs))))
    assert result.samples == len(xs)


def test_scan_is_worker_independent() -> None:
    spec = make_spec([0.5, 0.3, 0.2], [1.0, 2.3, 3.7])
    assert scan_max(spec, 0.0, 500.0, workers=1) == scan_max(spec, 0.0, 500.0, workers=3)


def test_divisor_scan_beats_rms() -> None:
    spec = divisor_series_spec(50.0, build_tables(500), max_terms=500)
    result = scan_max(spec, 50.0, 100.0)
    assert result.value >= baseline_rms(spec)
    assert result.sign in (-1, 1)


def test_scan_errors() -> None:
    spec = make_spec([1.0], [1.0])
    with pytest.raises(ArgumentError):
        scan_max(spec, 5.0, 5.0)
    with pytest.raises(CapacityError):
        scan_max(spec, 0.0, 100.0, max_points=10)


def test_guided_scan() -> None:
    spec = make_spec([1.0, 1.0], [1.2, 2.0])
    config = synthetic_config([1.2, 2.0], 1.0, 1.0)
    guided = guided_scan(spec, config, 0.0, 200.0, peaks=3)
    assert 0.0 <= guided.best.x_star <= 200.0
    assert 1 <= len(guided.peaks) <= 3
    assert guided.best.value <= 2.0 + 1e-12
    with pytest.raises(ArgumentError):
        guided_scan(spec, config, 1.0, 0.0)
