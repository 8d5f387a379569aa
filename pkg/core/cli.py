# core/cli.py
import sys
import csv
import json
import math
import logging
import argparse
from pathlib import Path

from core import engine, growth, precision, resonator, series, verify
from core.config import RunConfig, load_config_file
from core.errors import (
    ArgumentError, ConfigurationError, DomainError, EmptyResonatorError, ResonanceLabError, VerificationFailure,
)
from core.logger import setup_logging
from core.preconditions import PreconditionChecker
from core.storage import TableStorage
from core.write_queue import ResultWriter

SCAN_HEADER = ("X", "x_star", "value", "baseline_rms", "ratio_to_target", "sign")


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ArgumentError(message)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--limit", type=int, default=None, help="sieve limit N")
    common.add_argument("--variant", choices=("divisor", "circle", "piltz", "lau-tsang"), default=None)
    common.add_argument("--k", type=int, default=None, help="Piltz order")
    common.add_argument("--X", type=float, action="append", default=None, help="X value (repeatable)")
    common.add_argument("--lambda", dest="lambda_param", type=float, default=None)
    common.add_argument("--c1", type=float, default=None)
    common.add_argument("--C", dest="c_param", type=float, default=None, help="alpha recipe divisor (default: tuned)")
    common.add_argument("--epsilon", type=float, default=None, help="support weight cutoff")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--cache-dir", dest="cache_dir", default=None)
    common.add_argument("--config", default=None, help="JSON config file")
    common.add_argument("--dry-run", dest="dry_run", action="store_true", default=None)
    return common


def build_parser() -> CliParser:
    parser = CliParser(prog="resonance-lab", description="Resonance method for large values of error terms")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    sub.add_parser("sieve", parents=[common], help="build and cache arithmetic tables")
    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    p.add_argument("--suite", default=None)
    sub.add_parser("resonate", parents=[common], help="build M, the support and the resonator bounds")
    p = sub.add_parser("scan", parents=[common], help="maximise |F| over x for each X")
    p.add_argument("--max-terms", dest="max_terms", type=int, default=None)
    p.add_argument("--term-exponent", dest="term_exponent", type=float, default=None,
                   help="keep n <= X^e terms of the series")
    p.add_argument("--max-points", dest="max_points", type=int, default=None)
    p.add_argument("--guide-peaks", dest="guide_peaks", type=int, default=None)
    sub.add_parser("report", parents=[common], help="growth of scan maxima against the targets")
    return parser


# --- SHARED STEPS ---

def _storage(config: RunConfig) -> TableStorage:
    return TableStorage(config.cache_dir, max_limit=config.max_limit)


def _k_list(config: RunConfig):
    return [config.k] if config.family == "piltz" else []


def _variant(config: RunConfig) -> str:
    return f"piltz-{config.k}" if config.family == "piltz" else config.variant


def _resonator_for(config: RunConfig, X: float, storage: TableStorage, min_limit: int = 0):
    """(alpha, C, ResonatorConfig or None, satisfied) for one X"""
    lam = config.lambda_value
    recipe = engine.alpha_recipe(X, lam, 1.0, config.variant)
    tables = storage.get_tables(max(config.limit or 0, min_limit, int(2 * recipe) + 2), _k_list(config))
    if config.c_param is None:
        tuned = engine.tune_alpha(X, lam, config.c1, _variant(config), tables, k=config.k,
                                  support_epsilon=config.epsilon)
        if tuned.satisfied:
            return tuned.alpha, tuned.c_param, tuned.config, True
        alpha, c_param = recipe, 1.0
    else:
        alpha, c_param = recipe / config.c_param, config.c_param
    try:
        built = resonator.build_frequency_set(alpha, lam, config.c1, _variant(config), tables, k=config.k,
                                              support_epsilon=config.epsilon)
    except (DomainError, EmptyResonatorError) as e:
        logging.warning(f"⚠️ No resonator at X={X:g}: {e}")
        built = None
    return alpha, c_param, built, False


def _x_tag(X: float) -> str:
    return f"{X:g}"


# --- COMMANDS ---

def cmd_sieve(config: RunConfig, run_log, writer: ResultWriter):
    storage = _storage(config)
    tables = storage.get_tables(config.limit, _k_list(config))
    path = storage.path_for(tables.limit, tables.k_list)
    summary = {"N": tables.limit, "k_list": list(tables.k_list), "path": str(path),
               "primes": int(len(tables.primes()))}
    run_log.log("SIEVE", f"N={tables.limit:,}", {"path": str(path)})
    print(json.dumps(summary, sort_keys=True))


def cmd_verify(config: RunConfig, run_log, writer: ResultWriter):
    summary = verify.run_suite(config.suite, seed=config.seed)
    writer.write_json(Path(config.out) / f"verify_{config.suite}.json", summary)
    brief = {k: v for k, v in summary.items() if k not in ("results", "suites")}
    if "suites" in summary:
        brief["failed_by_suite"] = {name: part["failed"] for name, part in summary["suites"].items()}
    print(json.dumps(brief, sort_keys=True))
    run_log.log("VERIFY", f"{config.suite}: {summary['passed']}/{summary['checks']} passed")
    if summary["failed"]:
        raise VerificationFailure(summary)


def cmd_resonate(config: RunConfig, run_log, writer: ResultWriter):
    storage = _storage(config)
    out = Path(config.out)
    A1, A2, A3, A4 = config.exponents()
    for X in config.X:
        alpha, c_param, res, satisfied = _resonator_for(config, X, storage)
        if res is None:
            raise EmptyResonatorError(f"no resonating set at X={X:g}")
        support = resonator.expand_support(res, cap=config.support_cap)
        params = engine.EngineParams(X=X, A1=A1, A2=A2, A3=A3, A4=A4, c_param=c_param)
        I2 = engine.compute_I2(support, params.Y2)
        diagonal = math.sqrt(2 * math.pi) * params.Y2
        doc = resonator.config_document(res)
        doc.update({
            "X": X, "C": c_param, "tuned": satisfied, "kernel_alpha": res.kernel_alpha,
            "kernel_c1": res.kernel_c1, "size": len(res),
            "estimate_M": resonator.estimate_M(alpha, res.lambda_param, res.variant)
            if alpha > math.e else None,
            "sup_bound": resonator.sup_bound(res), "product_sup": resonator.product_sup(res),
            "support_size": len(support), "support_degree": support.generation_degree,
            "tail_mass": support.tail_mass, "epsilon": support.epsilon,
            "I2_over_gaussian": I2 / diagonal, "I2_lower_bound": math.exp(len(res) / 7.0),
            "budget_exponent": engine.budget_exponent(res.variant, config.k),
        })
        if config.family == "lau-tsang":
            doc["tau"] = lau_tsang_tau(alpha)
        writer.write_json(out / f"resonator_X{_x_tag(X)}.json", doc)
        resonator.export_support(support, out / f"support_X{_x_tag(X)}.csv", writer)
        run_log.log("RESONATE", f"X={X:g}: |M|={len(res)}, support {len(support):,}",
                    {"alpha": round(alpha, 6), "C": round(c_param, 6)})


def lau_tsang_tau(alpha: float) -> float:
    """tau with M in [C1 alpha, 2 alpha] below the weight peak n = tau^2 / 4"""
    return math.sqrt(8.0 * alpha)


def term_count(config: RunConfig, X: float, res=None) -> int:
    """min(X^A1, X^term_exponent, max_terms), widened to reach every member of M"""
    cap = series.truncation_length(X, config.exponents()[0])
    n = min(cap, series.truncation_length(X, config.term_exponent), config.max_terms)
    if res is not None:
        n = max(n, min(cap, int(res.n_list[-1])))
    return max(n, 1)


def _spec_for(config: RunConfig, X: float, alpha: float, storage: TableStorage, n_terms: int):
    if config.family == "lau-tsang":
        tau = lau_tsang_tau(alpha)
        tables = storage.get_tables(max(config.limit or 0, int(tau * tau) + 2), [])
        return series.lau_tsang_spec(tau, tables, X=X)
    A1 = config.exponents()[0]
    tables = storage.get_tables(max(config.limit or 0, n_terms, int(2 * alpha) + 2), _k_list(config))
    if config.family == "piltz":
        return series.piltz_series_spec(X, config.k, alpha, tables, max_terms=n_terms, A1=A1)
    if config.family == "circle":
        return series.circle_series_spec(X, tables, max_terms=n_terms, A1=A1)
    return series.divisor_series_spec(X, tables, max_terms=n_terms, A1=A1)


def scan_window(X: float, spec, max_points: int):
    """(lo, hi, grid_hi): the window (X/2, 5 X^(3/2) (log X)^2] and its grid part of max_points points"""
    lo = X / 2.0
    hi = 5.0 * X ** 1.5 * math.log(X) ** 2
    reach = precision.PHASE_LIMIT / (2.0 * spec.lambda_max)
    if hi > reach:
        logging.warning(f"⚠️ Window at X={X:g} cut from {hi:.6g} to {reach:.6g} (phase range)")
        hi = reach
    step = math.pi / (4.0 * spec.lambda_max)
    return lo, hi, min(hi, lo + step * (max_points - 2))


def cmd_scan(config: RunConfig, run_log, writer: ResultWriter):
    storage = _storage(config)
    out = Path(config.out)
    A1, A2, A3, A4 = config.exponents()
    target = growth.targets_for(config.family, config.k)[0]
    details = []
    for X in sorted(config.X):
        alpha, c_param, res, satisfied = _resonator_for(config, X, storage, min_limit=term_count(config, X))
        spec = _spec_for(config, X, alpha, storage, term_count(config, X, res))
        lo, hi, grid_hi = scan_window(X, spec, config.max_points)

        best = engine.scan_max(spec, lo, grid_hi, workers=config.workers)
        method, peaks = "grid", []
        if res is not None and config.guide_peaks > 0:
            guided = engine.guided_scan(spec, res, lo, hi, workers=config.workers, peaks=config.guide_peaks,
                                        max_points=config.max_points)
            peaks = guided.peaks
            if guided.best.value > best.value:
                best, method = guided.best, "guided"

        entry = {"X": X, "alpha": alpha, "C": c_param, "tuned": satisfied, "window": [lo, hi],
                 "grid_window": [lo, grid_hi], "terms": len(spec), "n_max": spec.n_max,
                 "samples": best.samples, "method": method,
                 "x_star": best.x_star, "value": best.value, "baseline_rms": best.baseline_rms,
                 "sign": best.sign, "peaks": peaks, "size": len(res) if res is not None else 0}
        if res is not None:
            params = engine.EngineParams(X=X, A1=A1, A2=A2, A3=A3, A4=A4, c_param=c_param)
            prediction = engine.predicted_lower_bound(spec, res, params)
            entry["prediction"] = {"main": prediction.main, "error_terms": list(prediction.error_terms),
                                   "refined_main": prediction.refined_main}
        details.append(entry)
        writer.add_row(out / "scan.csv", SCAN_HEADER,
                       (X, best.x_star, best.value, best.baseline_rms, best.value / target.scale(X), best.sign))
        run_log.log("SCAN", f"X={X:g}: max |F| = {best.value:.6f} at x = {best.x_star:.9g} ({method})")
    writer.flush()
    writer.write_json(out / "scan.json", {"variant": _variant(config), "target": target.as_dict(),
                                          "results": details})


def read_scan(path):
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"scan results not found: {path} (run `scan` first)")
    with open(path, newline="", encoding="utf-8") as fh:
        return [(float(row["X"]), float(row["value"])) for row in csv.DictReader(fh)]


def cmd_report(config: RunConfig, run_log, writer: ResultWriter):
    out = Path(config.out)
    results = read_scan(out / "scan.csv")
    targets = growth.targets_for(config.family, config.k)
    targets.append(growth.previous_record_target(config.family, config.k))
    reports = [growth.growth_report(results, t) for t in targets]
    doc = {"variant": _variant(config), "reports": reports}
    if config.family == "piltz":
        doc["piltz_sign"] = growth.piltz_sign(config.k)
    writer.write_json(out / "growth.json", doc)
    run_log.log("REPORT", f"{len(results)} points against {len(targets)} targets")


COMMANDS = {
    "sieve": cmd_sieve,
    "verify": cmd_verify,
    "resonate": cmd_resonate,
    "scan": cmd_scan,
    "report": cmd_report,
}


def run_cli(argv=None) -> int:
    """Parse, validate and dispatch; returns the process exit code"""
    try:
        args = build_parser().parse_args(argv)
        config = RunConfig.resolve(args, load_config_file(args.config))
        run_log = setup_logging(config.log_level, config.log_file)
        if config.dry_run:
            print(config.to_json())
            return 0

        ok = PreconditionChecker(config).check()
        if ok is not True:
            raise ArgumentError("; ".join(ok))
        run_log.log("CONFIG", f"{config.command}", {"variant": config.variant, "X": list(config.X)})
        with ResultWriter() as writer:
            COMMANDS[config.command](config, run_log, writer)
        return 0
    except VerificationFailure as e:
        logging.error(f"❌ {e}")
        return e.exit_code
    except ResonanceLabError as e:
        print(f"error: {e}", file=sys.stderr)
        logging.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0
