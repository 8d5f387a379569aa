# core/preconditions.py
import math

from core.config import RunConfig

VARIANTS = ("divisor", "circle", "piltz", "lau-tsang")
SUITES = ("arith", "series", "resonator", "kernel", "engine", "all")


class PreconditionChecker:
    """Validates a RunConfig against the preconditions of the command it drives"""

    def __init__(self, config: RunConfig):
        self.config = config

    def check(self, command=None):
        """Returns True, or the list of unmet requirements"""
        command = command or self.config.command
        missing = []
        self._check_common(missing)
        checks = {
            "sieve": self._check_sieve,
            "verify": self._check_verify,
            "resonate": self._check_resonate,
            "scan": self._check_scan,
            "report": self._check_report,
        }
        if command not in checks:
            missing.append(f"Unknown command `{command}`")
        else:
            checks[command](missing)
        return missing if missing else True

    # --- shared ---

    def _check_common(self, missing):
        c = self.config
        if c.family not in VARIANTS:
            missing.append(f"Variant `{c.variant}` not one of {', '.join(VARIANTS)}")
        if c.family == "piltz" and c.k < 2:
            missing.append(f"Piltz order k must be >= 2 (got {c.k})")
        if c.workers < 1:
            missing.append(f"Workers must be >= 1 (got {c.workers})")
        if c.limit is not None and c.limit < 2:
            missing.append(f"Sieve limit must be >= 2 (got {c.limit})")

    def _check_parameters(self, missing):
        c = self.config
        if c.lambda_param is not None and c.lambda_param <= 0:
            missing.append(f"lambda must be positive (got {c.lambda_param})")
        if not 0 < c.c1 < 2:
            missing.append(f"C1 must lie in (0, 2) (got {c.c1})")
        if c.c_param is not None and c.c_param <= 0:
            missing.append(f"C must be positive (got {c.c_param})")
        if not 0 < c.epsilon < 1:
            missing.append(f"epsilon must lie in (0, 1) (got {c.epsilon})")
        A1, A2, A3, A4 = c.exponents()
        if not A1 > A2 > A3 > A4 > 0:
            missing.append(f"Exponents must satisfy A1 > A2 > A3 > A4 > 0 (got {A1}, {A2}, {A3}, {A4})")

    def _check_schedule(self, missing):
        c = self.config
        if not c.X:
            missing.append("At least one --X value is required")
        # the alpha recipe needs log log log X > 0
        for X in c.X:
            if not math.isfinite(X) or X <= math.exp(math.e):
                missing.append(f"X={X} must exceed e^e ~ 15.154")

    # --- per command ---

    def _check_sieve(self, missing):
        if self.config.limit is None:
            missing.append("--limit is required for sieve")

    def _check_verify(self, missing):
        if self.config.suite not in SUITES:
            missing.append(f"Suite `{self.config.suite}` not one of {', '.join(SUITES)}")

    def _check_resonate(self, missing):
        self._check_parameters(missing)
        self._check_schedule(missing)
        if self.config.support_cap < 1:
            missing.append("Support cap must be positive")

    def _check_scan(self, missing):
        c = self.config
        self._check_parameters(missing)
        self._check_schedule(missing)
        if c.max_terms < 1:
            missing.append(f"max_terms must be positive (got {c.max_terms})")
        if not 0 < c.term_exponent <= c.exponents()[0]:
            missing.append(f"term_exponent must lie in (0, A1] (got {c.term_exponent})")
        if c.max_points < 10:
            missing.append(f"max_points must be >= 10 (got {c.max_points})")
        if c.guide_peaks < 0:
            missing.append(f"guide_peaks must be >= 0 (got {c.guide_peaks})")

    def _check_report(self, missing):
        pass
