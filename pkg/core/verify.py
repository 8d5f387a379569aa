# core/verify.py
"""
Executable invariant suites behind `verify`. Every check records a name, a
pass flag and a short detail; a check that raises counts as failed.
"""

import math
import logging
from typing import Callable, Dict, List

import numpy as np
from mpmath import mp

from core import engine, growth, kernel, resonator, series
from core.errors import DomainError, EmptyResonatorError
from core.arith import (
    EULER_GAMMA, build_tables, delta_exact, divisor_summatory, lattice_count, residue_polynomial,
)

logger = logging.getLogger(__name__)

DESK_LIMIT = 20_000        # arith oracles, resonating-set enumeration
ORACLE_RANGE = 10_000


class SuiteRun:
    def __init__(self, name: str, seed: int = 0):
        self.name = name
        self.rng = np.random.default_rng(seed)
        self.results: List[Dict] = []
        self.counters: Dict[str, int] = {}

    def check(self, name: str, passed: bool, detail: str = ""):
        self.results.append({"name": name, "passed": bool(passed), "detail": detail})
        if not passed:
            logger.error(f"❌ [{self.name}] {name}: {detail}")

    def guarded(self, name: str, fn: Callable[[], None]):
        try:
            fn()
        except Exception as e:
            self.check(name, False, f"raised {type(e).__name__}: {e}")

    def summary(self) -> Dict:
        passed = sum(r["passed"] for r in self.results)
        doc = {"suite": self.name, "checks": len(self.results), "passed": passed,
               "failed": len(self.results) - passed, "results": self.results}
        doc.update(self.counters)
        return doc


# --- RESONATOR CONFIGS SHARED BY THE BOUND CHECKS ---

def bound_epsilon(c1: float) -> float:
    """Support cutoff per C1 that keeps the |M| = 20 supports under the expansion cap"""
    if c1 < 1:
        return math.exp(-1.5)
    if c1 == 1:
        return math.exp(-3)
    return math.exp(-4.5)


def bound_configs(sizes=(1, 2, 5, 10, 20), c1_values=(0.5, 1.0, 1.5), alpha: float = 1.0):
    configs = []
    for c1 in c1_values:
        for m in sizes:
            freqs = np.linspace(c1 * alpha, 2 * alpha, m) if m > 1 else np.array([c1 * alpha])
            configs.append(resonator.synthetic_config(freqs, alpha, c1, support_epsilon=bound_epsilon(c1)))
    return configs


# --- SUITES ---

def suite_arith(run: SuiteRun):
    tables = build_tables(DESK_LIMIT, (3,))

    def oracles():
        prefix_d = tables.prefix("d")
        prefix_r = tables.prefix("r2")
        bad_d = [m for m in range(1, ORACLE_RANGE + 1) if divisor_summatory(m) != prefix_d[m]]
        run.check("hyperbola_equals_table_sum", not bad_d, f"{len(bad_d)} mismatches up to {ORACLE_RANGE}")
        bad_r = [m for m in range(0, ORACLE_RANGE + 1) if lattice_count(m) != prefix_r[m]]
        run.check("lattice_count_equals_r2_sum", not bad_r, f"{len(bad_r)} mismatches up to {ORACLE_RANGE}")
    run.guarded("oracles", oracles)

    def main_terms():
        c = residue_polynomial(2).coefficients
        run.check("residue_k2", abs(c[0] - (2 * EULER_GAMMA - 1)) < 1e-12 and abs(c[1] - 1) < 1e-12, f"{c}")
        c1 = residue_polynomial(1).coefficients
        run.check("residue_k1", c1 == (1.0,), f"{c1}")
        value = delta_exact(1000.5, tables, cross_check=True)
        run.check("delta_cross_check", math.isfinite(value), f"Delta(1000.5)={value:.6f}")
    run.guarded("main_terms", main_terms)

    def tables_shape():
        primes = tables.primes()
        ok = bool(np.all(tables.dk[3][primes] == 3)) and bool(np.all(tables.omega[primes] == 1))
        run.check("d3_and_omega_on_primes", ok, f"{len(primes)} primes")
        run.check("squarefree_density", abs(tables.squarefree[1:].mean() - 6 / math.pi ** 2) < 0.01,
                  f"{tables.squarefree[1:].mean():.5f}")
    run.guarded("tables", tables_shape)

    def multiplicative():
        m = run.rng.integers(2, 141, size=200)
        n = run.rng.integers(2, 141, size=200)
        pairs = [(int(a), int(b)) for a, b in zip(m, n) if math.gcd(int(a), int(b)) == 1]
        bad = [(a, b) for a, b in pairs if tables.d[a * b] != tables.d[a] * tables.d[b]]
        run.check("d_multiplicative", not bad, f"{len(bad)}/{len(pairs)} coprime pairs fail")
        N = 10 ** 6
        ratio = divisor_summatory(N) / (N * math.log(N))
        run.check("divisor_mean_order", 0.9 <= ratio <= 1.1, f"D(10^6) / (10^6 log 10^6) = {ratio:.5f}")
    run.guarded("multiplicative", multiplicative)


def suite_series(run: SuiteRun):
    X = 25.0
    tables = build_tables(int(X ** 3) + 1)

    def voronoi():
        xs = run.rng.uniform(math.sqrt(X), X ** 1.5, size=20)
        target = np.array([math.pi * math.sqrt(2.0) * delta_exact(x * x) / math.sqrt(x) for x in xs])
        res = np.abs(series.truncation_residual(X, xs, tables))
        raw = np.abs(series.truncation_residual(X, xs, tables, normalized=False))
        mean_res, mean_target = float(np.mean(res)), float(np.mean(np.abs(target)))
        run.check("voronoi_truncation", mean_res <= 0.5 * mean_target,
                  f"mean |residual| {mean_res:.4f} (raw Delta {float(np.mean(raw)):.4f}) "
                  f"vs mean |target| {mean_target:.4f}")
        jump = series.truncation_residual(X, 5.0, tables)
        run.check("voronoi_midpoint_at_jump", abs(jump) < 0.5, f"residual {jump:.4f} at x^2 = 25")
    run.guarded("voronoi", voronoi)

    def phase_accuracy():
        freqs = np.sqrt(np.arange(2, 7, dtype=np.float64))
        spec = series.make_spec(np.ones(5), freqs)
        x = 1e9
        with mp.workdps(50):
            exact = float(sum(mp.cos(mp.mpf(float(f)) * mp.mpf(x)) for f in freqs))
        err = abs(series.eval_spec(spec, x) - exact)
        run.check("phase_accuracy_large_x", err < 1e-6, f"error {err:.3g} at x=1e9")
    run.guarded("phase", phase_accuracy)

    def lau_tsang():
        worst = 0.0
        for tau in (4.0, 6.0, 8.0):
            xs = run.rng.uniform(0.0, 10.0, size=20)
            r = np.array([abs(series.lau_tsang_relation_residual(x, tau, tables)) / math.sqrt(tau) for x in xs])
            worst = max(worst, float(r.max() / max(np.median(r), 1e-300)))
        run.check("lau_tsang_relation_stable", worst <= 10.0, f"max/median {worst:.3f}")
        x = 0.37
        lhs = series.lau_tsang_P(x, 6.0, tables) + series.lau_tsang_Q(x, 6.0, tables)
        rhs = 2 * series.lau_tsang_even(x, 6.0, tables)
        run.check("lau_tsang_even_identity", abs(lhs - rhs) < 1e-10, f"{lhs:.12f} vs {rhs:.12f}")
    run.guarded("lau_tsang", lau_tsang)

    def algebra():
        lam = np.sort(run.rng.uniform(0.5, 50.0, size=12))
        a = run.rng.uniform(0.0, 1.0, size=12)
        phase = float(run.rng.uniform(-3, 3))
        first = series.make_spec(a[0::2], lam[0::2], phase=phase)
        second = series.make_spec(a[1::2], lam[1::2], phase=phase)
        joined = series.concat_specs(first, second)
        xs = run.rng.uniform(0.0, 1e4, size=200)
        gap = np.abs(series.eval_spec(joined, xs) - series.eval_spec(first, xs) - series.eval_spec(second, xs))
        run.check("eval_linear", float(gap.max()) < 1e-12, f"max gap {float(gap.max()):.3g}")
        peak = float(np.max(np.abs(series.eval_spec(joined, xs))))
        run.check("eval_triangle", peak <= joined.coefficient_sum() * (1 + 1e-12),
                  f"max |F| {peak:.6f} vs sum a {joined.coefficient_sum():.6f}")
        single = series.make_spec([1.0], [float(lam[3])], phase=phase)
        shifted = xs + 2 * math.pi / float(lam[3])
        drift = np.abs(series.eval_spec(single, xs) - series.eval_spec(single, shifted))
        run.check("eval_periodic", float(drift.max()) < 1e-9, f"max drift {float(drift.max()):.3g}")
    run.guarded("algebra", algebra)

    def piltz_limit():
        alpha = 1e6
        piltz = series.piltz_series_spec(100.0, 2, alpha, tables)
        divisor = series.divisor_series_spec(X, tables)
        n = piltz.index_map
        restored = piltz.coefficients * np.exp(math.pi ** 2 * n / alpha)
        target = divisor.coefficients[n - 1]
        err = float(np.max(np.abs(restored - target)))
        same = np.array_equal(piltz.frequencies, divisor.frequencies[n - 1]) and piltz.phase == divisor.phase
        run.check("piltz_k2_limit", err < 1e-6 and same, f"max |a_n e^(pi^2 n/alpha) - d(n) n^-3/4| {err:.3g}")
    run.guarded("piltz_limit", piltz_limit)


def suite_resonator(run: SuiteRun):
    tables = build_tables(DESK_LIMIT)

    def sets():
        config = resonator.build_frequency_set(50, 1, 1, "divisor", tables)
        run.check("divisor_set_alpha50", config.n_list.tolist() == [53, 59, 61, 67, 71, 73, 79, 83, 89, 97],
                  f"{config.n_list.tolist()}")
        circle = resonator.build_frequency_set(50, 1, 1, "circle", tables)
        run.check("circle_set_alpha50", circle.n_list.tolist() == [53, 61, 73, 89, 97], f"{circle.n_list.tolist()}")
        ratios = []
        for alpha in (1e3, 1e4):
            for lam in (1.0, 2 ** (4 / 3)):
                c = resonator.build_frequency_set(alpha, lam, 1, "divisor", tables)
                ratios.append(len(c) / resonator.estimate_M(alpha, lam))
                run.check(f"independent_alpha{alpha:g}_lambda{lam:.3f}", resonator.members_are_independent(c, tables))
        run.check("estimate_M_band", all(1e-2 <= r <= 1e2 for r in ratios), f"{[round(r, 3) for r in ratios]}")
    run.guarded("frequency_sets", sets)

    def bounded_sup():
        violations = 0
        for config in bound_configs():
            xs = run.rng.uniform(0.0, 1000.0, size=1000)
            peak = float(np.max(np.abs(resonator.eval_resonator_product(config, xs)) ** 2))
            if peak > resonator.sup_bound(config) or resonator.product_sup(config) > resonator.sup_bound(config):
                violations += 1
        run.check("sup_bound", violations == 0, f"{violations} violations")
    run.guarded("sup_bound", bounded_sup)

    def euler_product():
        worst = 0.0
        for freqs, c1 in (([2.0], 1.0), ([1.2, 2.0], 1.0)):
            config = resonator.synthetic_config(freqs, 1.0, c1)
            xs = run.rng.uniform(0.0, 100.0, size=100)
            product = resonator.eval_resonator_product(config, xs)
            tails = []
            for eps in (math.exp(-3), 1e-6, 1e-8):
                support = resonator.expand_support(config, epsilon=eps)
                gap = float(np.max(np.abs(product - resonator.eval_resonator_sum(support, xs))))
                worst = max(worst, gap - support.tail_mass)
                tails.append(support.tail_mass)
            run.check(f"tail_shrinks_{len(freqs)}", tails[0] >= tails[1] >= tails[2], f"{tails}")
        run.check("euler_product_vs_sum", worst <= 1e-9, f"max excess over tail {worst:.3g}")
    run.guarded("euler_product", euler_product)

    def structure():
        for config in bound_configs(sizes=(2, 5)):
            support = resonator.expand_support(config)
            checked, err = resonator.check_multiplicativity(support, seed=int(run.rng.integers(1 << 31)))
            bound = np.exp(-config.kernel_c1 * support.degree / 2.0) * (1 + 1e-12)
            run.check(f"multiplicative_M{len(config)}_c{config.c1}", err <= 1e-12, f"{checked} pairs, err {err:.3g}")
            run.check(f"degree_bound_M{len(config)}_c{config.c1}", bool(np.all(support.weight <= bound)))
            run.check(f"weights_above_epsilon_M{len(config)}_c{config.c1}",
                      bool(np.all(support.weight >= support.epsilon * (1 - 1e-12))) and support.u[0] == 0.0)
    run.guarded("structure", structure)


def suite_kernel(run: SuiteRun, specs: int = 20, points: int = 5):
    def weights():
        alpha = 1.5
        run.check("weight_peak", kernel.weight(2 * alpha, alpha) == math.pi * alpha)
        run.check("weight_support", kernel.weight(4 * alpha, alpha) == 0 and kernel.weight(-alpha, alpha) == 0)
        run.check("weight_half", abs(kernel.weight(alpha, alpha) - math.pi * alpha / 2) < 1e-12)
        t = run.rng.uniform(-5, 5, size=50)
        sym = np.abs(kernel.weight(2 * alpha + t, alpha) - kernel.weight(2 * alpha - t, alpha))
        run.check("weight_symmetry", float(sym.max()) < 1e-12)
        lam = run.rng.uniform(0, 4 * alpha, size=50)
        scale = np.abs(kernel.weight(3.0 * lam, 3.0 * alpha) - 3.0 * kernel.weight(lam, alpha))
        run.check("weight_scaling", float(scale.max()) < 1e-12)
    run.guarded("weights", weights)

    def exact_form():
        alpha = 2.0
        spec = series.make_spec([1.0], [2 * alpha])
        value = kernel.convolve_exact(spec, 0.0, alpha)
        run.check("exact_single_term", abs(value - math.pi * alpha / 2) < 1e-12, f"{value}")
        shifted = series.make_spec([1.0], [2 * alpha], phase=math.pi / 2)
        value = kernel.convolve_exact(shifted, 0.0, alpha)
        run.check("exact_phase", abs(value - 1j * math.pi * alpha / 2) < 1e-12, f"{value}")
    run.guarded("exact_form", exact_form)

    def identity():
        comparisons, failures, worst_budget = 0, 0, 0.0
        for _ in range(specs):
            alpha = float(run.rng.uniform(0.5, 10.0))
            m = int(run.rng.integers(1, 6))
            lam = np.sort(run.rng.uniform(0.05, 3.95, size=m)) * alpha
            if np.any(np.diff(lam) <= 0):
                continue
            spec = series.make_spec(run.rng.uniform(0.0, 0.2, size=m), lam, phase=float(run.rng.uniform(-3, 3)))
            params = kernel.default_params(spec, alpha)
            for x in run.rng.uniform(0.0, 100.0, size=points):
                numeric = kernel.convolve_numeric(spec, x, params)
                exact = kernel.convolve_exact(spec, x, alpha)
                comparisons += 1
                worst_budget = max(worst_budget, numeric.bound)
                if abs(numeric.value - exact) > numeric.bound:
                    failures += 1
        run.counters["identity_comparisons"] = comparisons
        run.check("convolution_identity", failures == 0, f"{failures}/{comparisons} outside tail + budget")
        run.check("quadrature_budget", worst_budget <= 1e-2, f"worst bound {worst_budget:.3g}")
    run.guarded("convolution_identity", identity)


def suite_engine(run: SuiteRun):
    def recipe():
        X = 1e6
        L, L3 = math.log(X), math.log(math.log(math.log(X)))
        value = engine.alpha_recipe(X, 1.0, 1.0)
        run.check("recipe_lambda1", abs(value - L * math.sqrt(L3)) < 1e-9 * value, f"{value}")
        top = engine.alpha_recipe(math.exp(math.exp(math.e)), 1.0, 1.0)
        run.check("recipe_log3_unit", abs(top - math.exp(math.e)) < 1e-9 * top, f"{top}")
    run.guarded("recipe", recipe)

    def integrals():
        config = resonator.synthetic_config([2.0], 1.0, 1.0, support_epsilon=1e-12)
        support = resonator.expand_support(config)
        Y2 = 1000.0
        ratio = engine.compute_I2(support, Y2) / (math.sqrt(2 * math.pi) * Y2)
        run.check("I2_single_generator", abs(ratio - 1 / (1 - math.exp(-2))) < 1e-9, f"{ratio:.9f}")

        violations = 0
        for config in bound_configs():
            support = resonator.expand_support(config)
            Y2 = 40.0 / (config.kernel_c1 * config.kernel_alpha) * 2.5
            I2 = engine.compute_I2(support, Y2)
            if I2 < math.sqrt(2 * math.pi) * Y2 * math.exp(len(config) / 7.0):
                violations += 1

            a = run.rng.uniform(0.1, 2.0, size=len(config))
            spec = series.make_spec(a, config.frequencies, index_map=config.n_list)
            params = engine.EngineParams(X=1e3)
            prediction = engine.predicted_lower_bound(spec, config, params)
            run.check(f"bound_constant_M{len(config)}_c{config.c1}",
                      abs(prediction.main / prediction.members_sum - math.pi / (4 * math.e)) < 1e-12)
            I1 = engine.compute_I1_main(spec, config, support, config.kernel_alpha, Y2, I2=I2)
            reordered = 0.5 * sum(float(a[i]) * kernel.weight(float(config.frequencies[i]), config.kernel_alpha)
                                  * float(config.weight(config.frequencies[i])) for i in reversed(range(len(a)))) * I2
            run.check(f"I1_reorder_M{len(config)}_c{config.c1}", abs(I1 - reordered) <= 1e-12 * abs(I1))
        run.check("I2_lower_bound", violations == 0, f"{violations} violations")
    run.guarded("integrals", integrals)

    def built_sets():
        tables = build_tables(DESK_LIMIT)
        Y2 = 1e6
        checked, violations, worst = 0, 0, math.inf
        for variant in ("divisor", "circle"):
            for alpha in (200.0, 500.0, 1000.0, 3000.0):
                for lam in (1.0, 2 ** (4 / 3)):
                    try:
                        config = resonator.build_frequency_set(alpha, lam, 1.0, variant, tables, support_epsilon=0.3)
                    except (DomainError, EmptyResonatorError):
                        continue
                    support = resonator.expand_support(config)
                    excess = math.log(engine.compute_I2(support, Y2) / (math.sqrt(2 * math.pi) * Y2)) - len(config) / 7
                    checked += 1
                    worst = min(worst, excess)
                    if excess < 0:
                        violations += 1
        run.counters["built_set_configs"] = checked
        run.check("I2_lower_bound_built_sets", violations == 0 and checked >= 10,
                  f"{violations}/{checked} below e^(|M|/7), worst log margin {worst:.4f}")
    run.guarded("built_sets", built_sets)

    def monotone():
        config = resonator.synthetic_config([1.0, 1.0 + 1e-4], 1.0, 1.0)
        values = [engine.compute_I2(resonator.expand_support(config, epsilon=eps), 100.0)
                  for eps in (math.exp(-0.9), math.exp(-2), math.exp(-3))]
        run.check("I2_monotone_in_support", values[0] <= values[1] <= values[2], f"{values}")
    run.guarded("monotone", monotone)

    def scans():
        one = engine.scan_max(series.make_spec([1.0], [1.0]), 0.0, 2 * math.pi)
        run.check("scan_single_cosine", abs(one.value - 1) < 1e-12 and abs(one.x_star) < 1e-6, f"{one.x_star}")
        two = engine.scan_max(series.make_spec([1.0, 1.0], [1.0, math.sqrt(2)]), 0.0, 200.0)
        run.check("scan_two_cosines", two.value >= 1.95, f"{two.value:.6f}")
        X = 50.0
        tables = build_tables(int(X ** 3) + 1)
        spec = series.divisor_series_spec(X, tables, max_terms=500)
        result = engine.scan_max(spec, math.sqrt(X), X ** 1.5)
        run.check("scan_exceeds_rms", result.value >= result.baseline_rms,
                  f"{result.value:.4f} vs rms {result.baseline_rms:.4f}")
        xs, _ = engine.scan_grid(spec, math.sqrt(X), X ** 1.5)
        grid_best = float(np.max(np.abs(series.eval_spec_batch(spec, xs))))
        run.check("refinement_beats_grid", result.value >= grid_best, f"{result.value:.6f} vs grid {grid_best:.6f}")
    run.guarded("scans", scans)

    def targets():
        t = growth.divisor_target()
        run.check("divisor_target", abs(t.e_loglog - 1.139882) < 1e-6 and t.e_log == 0.25 and t.e_logloglog == -0.375)
        report = growth.growth_report([(20.0, 1.0), (200.0, 1.0), (2000.0, 1.0)], growth.GrowthTarget(0, 0, 0, "null"))
        run.check("growth_null_case", all(r["ratio"] == 1.0 for r in report["rows"])
                  and abs(report["slope_vs_loglog"]) < 1e-12)
    run.guarded("targets", targets)


SUITES = {
    "arith": suite_arith,
    "series": suite_series,
    "resonator": suite_resonator,
    "kernel": suite_kernel,
    "engine": suite_engine,
}


def run_suite(name: str, seed: int = 0) -> Dict:
    """Summary of one suite, or of all of them with per-suite parts"""
    if name == "all":
        parts = {n: run_suite(n, seed) for n in SUITES}
        return {"suite": "all",
                "checks": sum(p["checks"] for p in parts.values()),
                "passed": sum(p["passed"] for p in parts.values()),
                "failed": sum(p["failed"] for p in parts.values()),
                "suites": parts}
    run = SuiteRun(name, seed)
    SUITES[name](run)
    summary = run.summary()
    logger.info(f"🧪 Suite {name}: {summary['passed']}/{summary['checks']} passed")
    return summary
