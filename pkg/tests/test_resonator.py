from __future__ import annotations

import json
import math

import numpy as np
import pytest

from core.arith import build_tables
from core.errors import (
    ArgumentError, CapacityError, DomainError, EmptyResonatorError, OutOfRangeError,
)
from core.resonator import (
    build_frequency_set, check_multiplicativity, estimate_M, eval_resonator_product,
    eval_resonator_sum, expand_support, export_config, export_support, members_are_independent,
    parse_variant, product_sup, sup_bound, synthetic_config,
)
from core.write_queue import ResultWriter


@pytest.fixture(scope="module")
def tables():
    return build_tables(2000)


def _prime_factors(n: int) -> list:
    out, p = [], 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


# --- frequency sets ---

def test_divisor_set_alpha_fifty(tables) -> None:
    config = build_frequency_set(50.0, 1.0, 1.0, "divisor", tables)
    assert config.n_list.tolist() == [53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
    assert np.allclose(config.frequencies, 4 * math.pi * np.sqrt(config.n_list), rtol=1e-15)
    assert config.kernel_alpha == pytest.approx(2 * math.pi * 10)
    assert config.kernel_c1 == pytest.approx(2 * math.sqrt(0.5))
    assert members_are_independent(config, tables)


def test_narrow_interval_keeps_one_prime(tables) -> None:
    config = build_frequency_set(50.0, 1.0, 1.9, "divisor", tables)
    assert config.n_list.tolist() == [97]


def test_circle_members_split_into_one_mod_four_primes(tables) -> None:
    config = build_frequency_set(500.0, 1.5, 1.0, "circle", tables)
    assert len(config) > 0
    for n in config.n_list.tolist():
        factors = _prime_factors(n)
        assert len(factors) == 2 and len(set(factors)) == 2
        assert all(p % 4 == 1 for p in factors)
    assert np.allclose(config.frequencies, 2 * math.pi * np.sqrt(config.n_list), rtol=1e-15)


def test_frequency_set_errors(tables) -> None:
    with pytest.raises(DomainError):
        build_frequency_set(10.0, 1.0, 1.0, "divisor", tables)
    with pytest.raises(EmptyResonatorError):
        build_frequency_set(50.0, 3.0, 1.0, "divisor", tables)
    with pytest.raises(OutOfRangeError):
        build_frequency_set(1500.0, 1.0, 1.0, "divisor", tables)
    with pytest.raises(ArgumentError):
        build_frequency_set(50.0, 1.0, 2.0, "divisor", tables)
    with pytest.raises(ArgumentError):
        build_frequency_set(50.0, 1.0, 1.0, "ellipse", tables)


def test_parse_variant() -> None:
    assert parse_variant("divisor") == ("divisor", 0)
    assert parse_variant("piltz-4") == ("piltz", 4)
    assert parse_variant("piltz", 5) == ("piltz", 5)
    assert parse_variant("lau-tsang") == ("lau-tsang", 0)
    with pytest.raises(ArgumentError):
        parse_variant("piltz-x")


def test_estimate_m() -> None:
    alpha = math.exp(math.e ** 2)
    assert estimate_M(alpha, 1.0) == pytest.approx(alpha / math.sqrt(2))
    lam = 2 ** (4 / 3)
    expected = alpha / math.sqrt(2) * (math.e ** 2) ** (lam - 1 - lam * math.log(lam))
    assert estimate_M(alpha, lam) == pytest.approx(expected)
    assert estimate_M(alpha, 1.0, "circle") < estimate_M(alpha, 1.0)
    with pytest.raises(DomainError):
        estimate_M(2.0, 1.0)


def test_synthetic_config_validation() -> None:
    with pytest.raises(ArgumentError):
        synthetic_config([0.5], 1.0, 1.0)
    with pytest.raises(ArgumentError):
        synthetic_config([2.0, 1.5], 1.0, 1.0)
    with pytest.raises(EmptyResonatorError):
        synthetic_config([], 1.0, 1.0)


# --- support ---

def test_single_generator_support() -> None:
    config = synthetic_config([2.0], 1.0, 1.0, support_epsilon=math.exp(-3))
    support = expand_support(config)
    assert support.u.tolist() == pytest.approx([0.0, 2.0, 4.0, 6.0])
    assert support.weight.tolist() == pytest.approx([1.0, math.exp(-1), math.exp(-2), math.exp(-3)])
    assert support.degree.tolist() == [0, 1, 2, 3]
    assert eval_resonator_sum(support, 0.0).real == pytest.approx(1.553002, abs=1e-6)
    assert support.tail_mass == pytest.approx(0.028975, abs=1e-6)

    at_zero = eval_resonator_product(config, 0.0)
    assert at_zero.real == pytest.approx(1.581977, abs=1e-6)
    assert abs(at_zero) ** 2 == pytest.approx(2.502651, abs=1e-6)
    assert product_sup(config) == pytest.approx(2.502651, abs=1e-6)


def test_two_generator_support() -> None:
    config = synthetic_config([1.2, 2.0], 1.0, 1.0, support_epsilon=math.exp(-1.5))
    support = expand_support(config)
    assert support.u.tolist() == pytest.approx([0.0, 1.2, 2.0, 2.4])
    assert support.degree.tolist() == [0, 1, 1, 2]
    assert support.generation_degree == 2


def test_support_cap() -> None:
    config = synthetic_config([1.0, 1.5, 2.0], 1.0, 1.0, support_epsilon=1e-8)
    with pytest.raises(CapacityError):
        expand_support(config, cap=10)


def test_sum_tracks_product_within_tail(rng) -> None:
    config = synthetic_config([1.2, 2.0], 1.0, 1.0, support_epsilon=1e-8)
    support = expand_support(config)
    xs = rng.uniform(-50, 50, 200)
    gap = np.abs(eval_resonator_product(config, xs) - eval_resonator_sum(support, xs))
    assert np.all(gap <= support.tail_mass + 1e-12)
    assert support.tail_mass < 1e-6


def test_weights_decay_with_degree() -> None:
    config = synthetic_config([1.0, 1.4, 1.9], 1.0, 1.0, support_epsilon=1e-4)
    support = expand_support(config)
    assert np.all(support.weight <= np.exp(-config.c1 * support.degree / 2) * (1 + 1e-12))
    assert np.all(support.weight >= support.epsilon * (1 - 1e-10))
    assert np.all(np.diff(support.u) >= 0)


def test_multiplicativity() -> None:
    config = synthetic_config([1.2, 2.0], 1.0, 1.0, support_epsilon=1e-8)
    checked, worst = check_multiplicativity(expand_support(config), pairs=50)
    assert checked > 0
    assert worst <= 1e-12


def test_sup_bound_holds(rng) -> None:
    config = synthetic_config([1.1, 1.5, 1.8], 1.0, 1.0)
    values = np.abs(eval_resonator_product(config, rng.uniform(-100, 100, 1000))) ** 2
    assert np.max(values) <= product_sup(config) * (1 + 1e-12)
    assert product_sup(config) <= sup_bound(config)


# --- export ---

def test_export(tmp_path) -> None:
    config = synthetic_config([2.0], 1.0, 1.0)
    writer = ResultWriter()
    export_config(config, tmp_path / "res.json", writer)
    doc = json.loads((tmp_path / "res.json").read_text())
    assert doc["n_list"] == [1]
    assert doc["variant"] == "synthetic"
    export_support(expand_support(config), tmp_path / "support.csv", writer)
    lines = (tmp_path / "support.csv").read_text().splitlines()
    assert lines[0] == "u,weight"
    assert len(lines) == 5
