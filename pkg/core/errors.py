# core/errors.py
"""
Exception hierarchy for resonance-lab.

Library code raises these; only the CLI maps them to exit codes.
"""


class ResonanceLabError(Exception):
    exit_code = 1


# -- Argument kinds (exit 2) ---------------------------
class ArgumentError(ResonanceLabError, ValueError):
    exit_code = 2


class DomainError(ArgumentError):
    """Parameter outside the domain where a formula makes sense (e.g. log log log X <= 0)"""


class PreconditionError(ArgumentError):
    """An operation's precondition does not hold for the given inputs"""


class ConfigurationError(ArgumentError):
    """Requested data was not configured (e.g. a missing d_k table)"""


class UnsupportedOrderError(ArgumentError):
    pass


# -- Capacity / range kinds (exit 3) -------------------
class CapacityError(ResonanceLabError, RuntimeError):
    exit_code = 3


class OutOfRangeError(ResonanceLabError, IndexError):
    exit_code = 3


class EmptyResonatorError(CapacityError):
    """The resonating set came out empty; downstream bounds divide by |M|"""


class ConsistencyError(ResonanceLabError, RuntimeError):
    exit_code = 3


# -- Verification (exit 4) -----------------------------
class VerificationFailure(ResonanceLabError):
    exit_code = 4

    def __init__(self, summary):
        self.summary = summary
        failed = summary.get('failed', '?') if isinstance(summary, dict) else '?'
        super().__init__(f"{failed} verification check(s) failed")
