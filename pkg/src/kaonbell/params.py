"""Physical constants for the neutral-kaon pair system.

Proper time is measured in units of the K_S mean lifetime throughout, so
the widths and the mass difference are dimensionless (units of 1/tau_S)
and gamma_s defaults to exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# K_L width from the known K_S/K_L lifetime ratio; the strangeness
# oscillation period is fixed at 13 K_S lifetimes, hence delta_m = 2*pi/13.
DEFAULT_GAMMA_S = 1.0
DEFAULT_GAMMA_L = 1.0 / 579.0
DEFAULT_DELTA_M = 2.0 * math.pi / 13.0

CONFIG_KEYS = ("gamma_s", "gamma_l", "delta_m")

ENV_PARAMS = "KAONBELL_PARAMS"


class ParameterError(ValueError):
    """A ParameterSet field violates its physical constraints."""


class PositivityError(ParameterError):
    """gamma_s must be > 0; gamma_l and delta_m must be >= 0."""


class OrderedWidthError(ParameterError):
    """The short-lived width must strictly exceed the long-lived one."""


class NonFiniteError(ParameterError):
    """All fields must be finite."""


class ConfigParseError(ValueError):
    """A parameter config file could not be parsed."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


@dataclass(frozen=True)
class ParameterSet:
    """Decay widths and mass splitting, in units of 1/tau_S.

    Immutable after construction and safe to share across threads.
    Construction itself does not validate, so degenerate regimes (e.g. the
    stable limit gamma_s = gamma_l = 0 used by the CHSH stable curve) stay
    expressible; `validate` enforces the physical constraints.
    """

    gamma_s: float = DEFAULT_GAMMA_S
    gamma_l: float = DEFAULT_GAMMA_L
    delta_m: float = DEFAULT_DELTA_M

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in CONFIG_KEYS}

    def to_config(self) -> str:
        """Serialize as key=value lines; load_params round-trips bit-exactly."""
        return "".join(f"{k} = {getattr(self, k)!r}\n" for k in CONFIG_KEYS)


def default_params() -> ParameterSet:
    """Default constants: gamma_s = 1, gamma_l = 1/579, delta_m = 2*pi/13."""
    return ParameterSet()


def validate(p: ParameterSet) -> ParameterSet:
    """Return p unchanged if all invariants hold, else raise a named error."""
    for name in CONFIG_KEYS:
        value = getattr(p, name)
        if not isinstance(value, (int, float)):
            raise NonFiniteError(f"{name} must be a real number, got {value!r}")
        if not math.isfinite(value):
            raise NonFiniteError(f"{name} must be finite, got {value!r}")
    if p.gamma_s <= 0.0:
        raise PositivityError(f"gamma_s must be > 0, got {p.gamma_s!r}")
    if p.gamma_l < 0.0:
        raise PositivityError(f"gamma_l must be >= 0, got {p.gamma_l!r}")
    if p.delta_m < 0.0:
        raise PositivityError(f"delta_m must be >= 0, got {p.delta_m!r}")
    if p.gamma_l >= p.gamma_s:
        raise OrderedWidthError(
            f"gamma_l must be < gamma_s, got gamma_l={p.gamma_l!r} >= gamma_s={p.gamma_s!r}"
        )
    return p


def parse_config_values(text: str, path: str = "<string>") -> dict[str, float]:
    """Parse key=value config text into the keys actually present.

    '#' starts a comment, blank lines are skipped; unknown and duplicate
    keys are parse errors reported with their line number.
    """
    values: dict[str, float] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(path, line_no, f"expected key = value, got {raw.strip()!r}")
        key, _, value_text = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigParseError(
                path, line_no, f"unknown key {key!r} (expected one of {', '.join(CONFIG_KEYS)})"
            )
        if key in values:
            raise ConfigParseError(path, line_no, f"duplicate key {key!r}")
        try:
            values[key] = float(value_text.strip())
        except ValueError:
            raise ConfigParseError(path, line_no, f"invalid float {value_text.strip()!r}") from None
    return values


def parse_config(text: str, path: str = "<string>") -> ParameterSet:
    """Parse and validate config text; missing keys take the defaults."""
    return validate(ParameterSet(**parse_config_values(text, path)))


def load_params(path) -> ParameterSet:
    """Load and validate a ParameterSet from a key=value config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), path=str(path))
