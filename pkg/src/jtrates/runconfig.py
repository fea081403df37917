"""Flat ``key = value`` run configuration for the command-line driver.

Example file::

    # Merton model with pricing-measure intensities
    kind = jt_merton
    mu0 = -0.02
    mu1 = 0.05
    eta0 = 0.01
    eta1 = -0.02
    lambda0_q = 1
    lambda1_q = 2
    maturities = 0.25, 1

Every key may also be set with ``--override key=value`` or its own flag.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field, fields, replace

from .config import SolverConfig
from .errors import ConfigError, DegenerateParametersWarning, JtratesError
from .measure import MeasureParams, to_risk_neutral
from .models import ModelKind, ModelSpec
from .rng import DEFAULT_SEED

METHODS = ("expectation", "pde", "mc", "all")
FORMATS = ("markdown", "csv")
REQUIRED = ("kind", "mu0", "mu1", "eta0", "eta1", "lambda0_q", "lambda1_q")
SOLVER_KEYS = ("ode_step", "fd_nx", "fd_nt", "fd_xmax", "fd_coupling", "mc_paths", "mc_step", "mc_block", "workers", "antithetic")


def default_seed() -> int:
    """``JTRATES_SEED`` if set, else the library default."""
    raw = os.environ.get("JTRATES_SEED")
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"JTRATES_SEED must be an integer, got {raw!r}", field="seed") from None
    if seed < 0:
        raise ConfigError("JTRATES_SEED must be non-negative", field="seed")
    return seed


@dataclass(frozen=True)
class RunConfig:
    """One experiment: model parameters, initial state, maturities and solver overrides.

    ``lambda*_q`` are intensities under ``measure``; with ``measure = P`` they
    are rescaled by ``theta`` when the pricing model is built.
    """

    kind: str = ""
    mu0: float = math.nan
    mu1: float = math.nan
    sigma0: float = 0.0
    sigma1: float = 0.0
    eta0: float = math.nan
    eta1: float = math.nan
    lambda0_q: float = math.nan
    lambda1_q: float = math.nan
    psi0: float = 0.0
    psi1: float = 0.0
    theta0: float = 1.0
    theta1: float = 1.0
    r0: float = 0.05
    regime0: int = 0
    maturities: tuple[float, ...] = (1 / 12, 1 / 4, 1 / 2, 1.0)
    method: str = "expectation"
    seed: int = field(default_factory=default_seed)
    format: str = "markdown"
    measure: str = "Q"
    ode_step: float | None = None
    fd_nx: int | None = None
    fd_nt: int | None = None
    fd_xmax: float | None = None
    fd_coupling: str | None = None
    mc_paths: int | None = None
    mc_step: float | None = None
    mc_block: int | None = None
    workers: int | None = None
    antithetic: bool | None = None

    def model(self) -> ModelSpec:
        """Pricing (Q-tagged) model described by this configuration."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateParametersWarning)
            spec = ModelSpec(
                self.kind,
                mu=(self.mu0, self.mu1),
                eta=(self.eta0, self.eta1),
                lam=(self.lambda0_q, self.lambda1_q),
                sigma=(self.sigma0, self.sigma1),
                measure=self.measure,
                measure_params=MeasureParams(self.theta0, self.theta1, self.psi0, self.psi1),
            )
        return to_risk_neutral(spec) if spec.measure == "P" else spec

    def solver(self) -> SolverConfig:
        overrides = {k: getattr(self, k) for k in SOLVER_KEYS if getattr(self, k) is not None}
        return SolverConfig(**overrides)

    def methods(self) -> tuple[str, ...]:
        return ("expectation", "pde", "mc") if self.method == "all" else (self.method,)

    def to_text(self) -> str:
        """Serialise every non-default field; parsing the result gives back ``self``."""
        lines = []
        base = RunConfig()
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in REQUIRED or value != getattr(base, f.name) or f.name == "seed":
                lines.append(f"{f.name} = {_format_value(value)}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT_KEYS = {"regime0", "seed", "fd_nx", "fd_nt", "mc_paths", "mc_block", "workers"}
_STR_KEYS = {"kind", "method", "format", "measure", "fd_coupling"}


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(key: str, raw: str, line: int | None):
    raw = raw.strip()
    try:
        if key == "maturities":
            values = tuple(float(v) for v in raw.replace(";", ",").split(",") if v.strip())
            if not values:
                raise ValueError
            return values
        if key == "antithetic":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if key in _INT_KEYS:
            return int(raw)
        if key in _STR_KEYS:
            if not raw:
                raise ValueError
            return raw
        return float(raw)
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for {key}", line=line, field=key) from None


def parse_assignments(
    pairs: list[tuple[str, str, int | None]], base: RunConfig | None = None
) -> tuple[RunConfig, dict[str, int | None]]:
    """Apply ``(key, raw value, line)`` triples on top of ``base``."""
    values = {}
    where: dict[str, int | None] = {}
    for key, raw, line in pairs:
        key = key.strip().lower()
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", line=line, field=key)
        values[key] = _convert(key, raw, line)
        where[key] = line
    return replace(base or RunConfig(), **values), where


def read_assignments(text: str) -> list[tuple[str, str, int]]:
    """``(key, raw value, line)`` for every non-comment line of a config file."""
    pairs = []
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got {content!r}", line=number)
        key, raw = content.split("=", 1)
        pairs.append((key, raw, number))
    return pairs


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) and validate the result."""
    cfg, where = parse_assignments(read_assignments(text), base)
    return validate(cfg, where)


def validate(cfg: RunConfig, where: dict[str, int | None] | None = None) -> RunConfig:
    """Re-check every model and solver invariant, reporting the offending key and line."""
    where = where or {}

    def fail(message, key):
        raise ConfigError(message, line=where.get(key), field=key)

    if cfg.kind:
        try:
            kind = ModelKind.parse(cfg.kind)
        except JtratesError as exc:
            fail(f"kind: {exc}", "kind")
    for key in REQUIRED:
        value = getattr(cfg, key)
        if value == "" or (isinstance(value, float) and math.isnan(value)):
            fail(f"missing required key {key!r}", key)
    for key in ("mu0", "mu1", "sigma0", "sigma1", "eta0", "eta1", "lambda0_q", "lambda1_q", "r0"):
        if not math.isfinite(getattr(cfg, key)):
            fail(f"{key} must be finite", key)
    if not kind.diffusive:
        for key in ("sigma0", "sigma1"):
            if getattr(cfg, key) != 0:
                fail(f"{key} given for non-diffusive kind {kind.value}", key)
    if kind.dothan and cfg.r0 < 0:
        fail("Dothan rates must start non-negative", "r0")
    if cfg.regime0 not in (0, 1):
        fail("regime0 must be 0 or 1", "regime0")
    if cfg.method not in METHODS:
        fail(f"method must be one of {', '.join(METHODS)}", "method")
    if cfg.format not in FORMATS:
        fail(f"format must be one of {', '.join(FORMATS)}", "format")
    if cfg.measure not in ("P", "Q"):
        fail("measure must be P or Q", "measure")
    if cfg.seed < 0:
        fail("seed must be non-negative", "seed")
    if any(not (math.isfinite(t) and t >= 0) for t in cfg.maturities):
        fail("maturities must be finite and non-negative", "maturities")
    try:
        cfg.model()
    except JtratesError as exc:
        keys = [k for k in ("lambda0_q", "eta0", "sigma0", "theta0", "psi0") if k in where]
        fail(str(exc), keys[0] if keys else None)
    try:
        cfg.solver()
    except ConfigError as exc:
        fail(str(exc), exc.field)
    return cfg


def load_config(path: str | os.PathLike, base: RunConfig | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base)
