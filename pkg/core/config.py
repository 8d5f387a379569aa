# core/config.py
import os
import json
import math
import logging
from dataclasses import dataclass, asdict, fields, replace
from typing import Optional, Tuple

from dotenv import load_dotenv

from core.cache import config_cache, config_key
from core.errors import ArgumentError, ConfigurationError

# Load environment variables
load_dotenv()

LAMBDA_DIVISOR = 2.0 ** (4.0 / 3.0)

# flag name -> field name where they differ
_FLAG_ALIASES = {"lambda": "lambda_param", "C": "c_param"}

# field -> environment variable
_ENV = {
    "cache_dir": "RLAB_CACHE_DIR",
    "max_limit": "RLAB_MAX_LIMIT",
    "workers": "RLAB_WORKERS",
    "support_cap": "RLAB_SUPPORT_CAP",
    "log_level": "RLAB_LOG_LEVEL",
    "log_file": "RLAB_LOG_FILE",
}


@dataclass(frozen=True)
class RunConfig:
    command: str = ""
    suite: str = "all"
    limit: Optional[int] = None
    variant: str = "divisor"
    k: int = 3
    X: Tuple[float, ...] = ()
    lambda_param: Optional[float] = None
    c1: float = 1.0
    c_param: Optional[float] = None    # None -> tuned against the variant budget (engine.budget_exponent)
    epsilon: float = math.exp(-3)
    workers: int = 1
    seed: int = 0
    out: str = "results"
    cache_dir: str = "cache"
    A1: Optional[float] = None
    A2: float = 1.5
    A3: float = 1.0
    A4: Optional[float] = None
    max_terms: int = 100_000
    term_exponent: float = 1.0 / 3.0  # scan specs keep n <= X^term_exponent
    max_points: int = 100_000
    guide_peaks: int = 5
    max_limit: int = 20_000_000
    support_cap: int = 200_000
    log_level: str = "INFO"
    log_file: Optional[str] = None
    dry_run: bool = False

    @classmethod
    def resolve(cls, args=None, file_values=None) -> "RunConfig":
        """flag > file > environment > default"""
        flags = vars(args) if args is not None else {}
        file_values = {_FLAG_ALIASES.get(k, k): v for k, v in (file_values or {}).items()}
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(file_values) - set(known))
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")

        values = {}
        for name in known:
            if flags.get(name) is not None:
                values[name] = flags[name]
            elif file_values.get(name) is not None:
                values[name] = file_values[name]
            elif name in _ENV and os.getenv(_ENV[name]):
                values[name] = os.getenv(_ENV[name])
        return cls(**{name: _coerce(name, v) for name, v in values.items()})

    @property
    def lambda_value(self) -> float:
        if self.lambda_param is not None:
            return self.lambda_param
        if self.variant == "circle":
            return 2.0 ** (1.0 / 3.0)
        if self.family == "piltz":
            return float(self.k) ** (2.0 * self.k / (self.k + 1))
        return LAMBDA_DIVISOR

    @property
    def family(self) -> str:
        return "piltz" if self.variant.startswith("piltz") else self.variant

    def exponents(self) -> Tuple[float, float, float, float]:
        piltz = self.family == "piltz"
        A1 = self.A1 if self.A1 is not None else (8.0 / 5.0 if piltz else 3.0)
        A4 = self.A4 if self.A4 is not None else (9.0 / 10.0 if piltz else 7.0 / 8.0)
        return A1, self.A2, self.A3, A4

    def with_values(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def as_dict(self):
        doc = asdict(self)
        doc["X"] = list(self.X)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def _coerce(name, value):
    if name == "X":
        items = value if isinstance(value, (list, tuple)) else [value]
        try:
            return tuple(float(x) for x in items)
        except (TypeError, ValueError):
            raise ArgumentError(f"X must be numeric (got {value!r})")
    if name == "dry_run":
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
    if name in ("limit", "k", "workers", "seed", "max_terms", "max_points", "guide_peaks",
                "max_limit", "support_cap"):
        cast = int
    elif name in ("lambda_param", "c1", "c_param", "epsilon", "A1", "A2", "A3", "A4", "term_exponent"):
        cast = float
    else:
        cast = str
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ArgumentError(f"{name} has an invalid value {value!r}")


def load_config_file(path) -> dict:
    """Parsed JSON config (Cached)"""
    if not path:
        return {}
    key = config_key(path)
    if key in config_cache:
        return config_cache[key]
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            values = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(values, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    logging.info(f"⚙️ Loaded config file {path} ({len(values)} keys)")
    config_cache[key] = values
    return values
