"""Closed-form quantum-mechanical observables for the entangled kaon pair.

All operations are pure functions of a ParameterSet and proper times, for
ordered outcomes: argument 1 is the left-going kaon, argument 2 the right.
"""

from __future__ import annotations

import math
from enum import IntEnum

from .params import ParameterSet


class Strangeness(IntEnum):
    """Strong-interaction eigenvalue: +1 for K0, -1 for K0-bar."""

    K0 = +1
    K0_BAR = -1


class CpEigenvalue(IntEnum):
    """CP eigenvalue: +1 for the short-lived, -1 for the long-lived kaon."""

    K_SHORT = +1
    K_LONG = -1


def _check_time(tau: float, name: str = "tau") -> None:
    if tau < 0.0:
        raise ValueError(f"{name} must be >= 0, got {tau!r}")


def survival_factor(gamma: float, tau: float) -> float:
    """Undecayed fraction exp(-gamma * tau) of a width-gamma component."""
    _check_time(tau)
    return math.exp(-gamma * tau)


def interference_damping(p: ParameterSet, delta_tau: float) -> float:
    """Damping ratio 2*sqrt(E_L*E_S)/(E_L + E_S) of the oscillating term.

    Evaluated as sech((gamma_s - gamma_l)*|dt|/2), which is exactly the
    same quantity but immune to overflow/underflow of the raw exponentials
    at large separations.
    """
    x = abs(0.5 * (p.gamma_s - p.gamma_l) * delta_tau)
    e = math.exp(-x)
    return 2.0 * e / (1.0 + e * e)


def qm_asymmetry(p: ParameterSet, tau1: float, tau2: float) -> float:
    """Strangeness asymmetry (unlike - like)/(unlike + like) of the pair.

    Equals damping(|dt|) * cos(delta_m * |dt|) with dt = tau2 - tau1; it
    depends on the time separation only and is 1 at equal times.
    """
    _check_time(tau1, "tau1")
    _check_time(tau2, "tau2")
    dt = abs(tau2 - tau1)
    return interference_damping(p, dt) * math.cos(p.delta_m * dt)


def survival_prob(p: ParameterSet, tau1: float, tau2: float) -> float:
    """Probability that both kaons are undecayed at their detection times."""
    _check_time(tau1, "tau1")
    _check_time(tau2, "tau2")
    es1 = math.exp(-p.gamma_s * tau1)
    el1 = math.exp(-p.gamma_l * tau1)
    es2 = math.exp(-p.gamma_s * tau2)
    el2 = math.exp(-p.gamma_l * tau2)
    return 0.5 * (es1 * el2 + el1 * es2)


def renormalized_joint(
    p: ParameterSet, s1: int, s2: int, tau1: float, tau2: float
) -> float:
    """Joint strangeness probability conditioned on both kaons undecayed.

    Exactly (1/4)[1 - A] for like signs and (1/4)[1 + A] for unlike signs,
    so the four ordered outcomes sum to 1 and the value depends only on
    tau2 - tau1.
    """
    s1 = Strangeness(s1)
    s2 = Strangeness(s2)
    a = qm_asymmetry(p, tau1, tau2)
    return 0.25 * (1.0 - a) if s1 == s2 else 0.25 * (1.0 + a)


def joint_strangeness_prob(
    p: ParameterSet, s1: int, s2: int, tau1: float, tau2: float
) -> float:
    """Probability of detecting strangeness s1 at tau1 and s2 at tau2.

    The four ordered outcomes sum to the pair survival probability; at
    equal times the like-sign outcomes vanish identically.
    """
    return survival_prob(p, tau1, tau2) * renormalized_joint(p, s1, s2, tau1, tau2)


def joint_cp_prob(
    p: ParameterSet, c1: int, c2: int, tau1: float, tau2: float
) -> float:
    """Probability of detecting CP eigenvalue c1 at tau1 and c2 at tau2.

    The pair has no like-CP component, so only the (long, short) and
    (short, long) ordered outcomes are populated.
    """
    c1 = CpEigenvalue(c1)
    c2 = CpEigenvalue(c2)
    _check_time(tau1, "tau1")
    _check_time(tau2, "tau2")
    if c1 == c2:
        return 0.0
    if c1 == CpEigenvalue.K_LONG:
        return 0.5 * math.exp(-p.gamma_l * tau1) * math.exp(-p.gamma_s * tau2)
    return 0.5 * math.exp(-p.gamma_s * tau1) * math.exp(-p.gamma_l * tau2)
