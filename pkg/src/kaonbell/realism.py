"""Analytic local-realistic content for the kaon pair.

A realistic kaon carries definite strangeness and CP at every instant; the
pair starts in one of four totally anti-correlated configurations.  This
module holds that state catalogue, the single-kaon aligned/flipped
fractions Q+/Q-, the model-independent interval that bounds any local
asymmetry, and the relative gap between the quantum asymmetry and the
interval's upper edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .params import ParameterSet
from .qm import interference_damping, qm_asymmetry


class TimeOrderingError(ValueError):
    """Detection times must satisfy 0 <= tau1 <= tau2."""


class DegenerateAsymmetryError(ArithmeticError):
    """The quantum asymmetry vanishes, so the relative gap is undefined."""


class StrangenessUndefinedError(LookupError):
    """Decay products carry CP but no strangeness."""


class EmptyIntervalError(ArithmeticError):
    """The asymmetry interval came out inverted (lower > upper)."""


class RealisticKaonState(Enum):
    """Definite-(S, CP) single-kaon states plus decay-product markers."""

    K1 = "K1"            # S=+1, CP=+1  (short-lived K0)
    K2 = "K2"            # S=-1, CP=+1  (short-lived K0-bar)
    K3 = "K3"            # S=+1, CP=-1  (long-lived K0)
    K4 = "K4"            # S=-1, CP=-1  (long-lived K0-bar)
    DP_PLUS = "DP+"      # decay products of a CP=+1 kaon
    DP_MINUS = "DP-"     # decay products of a CP=-1 kaon

    @property
    def cp(self) -> int:
        return +1 if self in (RealisticKaonState.K1, RealisticKaonState.K2,
                              RealisticKaonState.DP_PLUS) else -1

    @property
    def is_decay_products(self) -> bool:
        return self in (RealisticKaonState.DP_PLUS, RealisticKaonState.DP_MINUS)

    @property
    def strangeness(self) -> int:
        if self.is_decay_products:
            raise StrangenessUndefinedError(f"{self.value} has no strangeness")
        return +1 if self in (RealisticKaonState.K1, RealisticKaonState.K3) else -1


@dataclass(frozen=True)
class InitialPairAssignment:
    """One row of the initial pair catalogue: right is the total
    anti-correlate of left (opposite strangeness and opposite CP)."""

    left: RealisticKaonState
    right: RealisticKaonState
    weight: float = 0.25

    def __post_init__(self):
        if self.left.is_decay_products or self.right.is_decay_products:
            raise ValueError("initial kaons cannot be decay products")
        if (self.right.strangeness != -self.left.strangeness
                or self.right.cp != -self.left.cp):
            raise ValueError(
                f"initial pair must be anti-correlated in S and CP, got "
                f"({self.left.value}, {self.right.value})"
            )


@dataclass(frozen=True)
class AsymmetryBounds:
    """Closed interval [lower, upper] allowed for any local asymmetry."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise EmptyIntervalError(
                f"inverted asymmetry interval: [{self.lower!r}, {self.upper!r}]"
            )

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


def q_fraction(p: ParameterSet, sign: int, tau: float) -> float:
    """Fraction Q+/Q- of undecayed, initially aligned kaons showing
    strangeness equal (+) or opposite (-) to their initial value at tau.

    Q+(tau) = (1/2)[1 + damping(tau) * cos(delta_m * tau)]; Q- is computed
    as the exact complement so Q+ + Q- == 1 identically.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    q_plus = 0.5 * (1.0 + interference_damping(p, tau) * math.cos(p.delta_m * tau))
    return q_plus if sign > 0 else 1.0 - q_plus


def asymmetry_bounds(p: ParameterSet, tau1: float, tau2: float) -> AsymmetryBounds:
    """Interval bounding the asymmetry of every local realistic model.

    lower = 2|Q+(tau2) - Q-(tau1)| - 1,  upper = 1 - 2|Q+(tau2) - Q+(tau1)|.
    Requires tau1 <= tau2 (the catalogue's time-ordering convention); the
    two edges are not manifestly exchange-symmetric.
    """
    if tau1 < 0.0 or tau2 < 0.0:
        raise ValueError(f"times must be >= 0, got ({tau1!r}, {tau2!r})")
    if tau1 > tau2:
        raise TimeOrderingError(f"need tau1 <= tau2, got ({tau1!r}, {tau2!r})")
    lower = 2.0 * abs(q_fraction(p, +1, tau2) - q_fraction(p, -1, tau1)) - 1.0
    upper = 1.0 - 2.0 * abs(q_fraction(p, +1, tau2) - q_fraction(p, +1, tau1))
    return AsymmetryBounds(lower=lower, upper=upper)


def lr_gap(p: ParameterSet, alpha: float, tau1: float) -> float:
    """Relative excess of the quantum asymmetry over the local upper bound
    along the ray tau2 = alpha * tau1.

    Returns (A_qm - upper)/A_qm; negative values mean no discrepancy.
    """
    if alpha <= 1.0:
        raise ValueError(f"alpha must be > 1, got {alpha!r}")
    if tau1 <= 0.0:
        raise ValueError(f"tau1 must be > 0, got {tau1!r}")
    tau2 = alpha * tau1
    a = qm_asymmetry(p, tau1, tau2)
    if a == 0.0:
        raise DegenerateAsymmetryError(
            f"quantum asymmetry vanishes at (tau1={tau1!r}, tau2={tau2!r})"
        )
    return (a - asymmetry_bounds(p, tau1, tau2).upper) / a


def initial_pair_assignments() -> tuple[InitialPairAssignment, ...]:
    """The four equal-weight initial pair configurations."""
    K = RealisticKaonState
    return (
        InitialPairAssignment(K.K1, K.K4),
        InitialPairAssignment(K.K2, K.K3),
        InitialPairAssignment(K.K3, K.K2),
        InitialPairAssignment(K.K4, K.K1),
    )


def pair_state_catalogue() -> tuple[tuple[RealisticKaonState, RealisticKaonState], ...]:
    """All 18 evolved pair states consistent with the initial CP
    anti-correlation at ordered times tau1 <= tau2.

    A side of initial CP = c is, at any later time, either an undecayed
    kaon of that CP (either strangeness) or that CP's decay products.
    """
    K = RealisticKaonState
    plus_side = (K.K1, K.K2, K.DP_PLUS)
    minus_side = (K.K4, K.K3, K.DP_MINUS)
    catalogue = [(l, r) for l in plus_side for r in minus_side]
    catalogue += [(l, r) for l in minus_side for r in plus_side]
    return tuple(catalogue)
