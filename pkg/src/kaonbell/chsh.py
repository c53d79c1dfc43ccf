"""CHSH machinery on renormalized strangeness observables.

Four detection times with equal spacing tau reduce the CHSH combination to
a function of tau alone; any local model keeps it in [-1, 0], while the
quantum prediction dips below -1 in a window of spacings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import ParameterSet
from .qm import joint_strangeness_prob, qm_asymmetry

# Schedules with tau4/tau1 = (p+3)/p below this ratio keep the detection
# events space-like separated; the operative threshold on p is the quoted
# 5.45 (boundary excluded).
LOCALITY_RATIO_MAX = 1.55
LOCALITY_P_MIN = 5.45

LOWER_BAND = -1.0
UPPER_BAND = 0.0


@dataclass(frozen=True)
class ChshSchedule:
    """Equal-spacing four-time schedule: tau1 = p*tau, tau2 = (p+2)*tau,
    tau3 = (p+1)*tau, tau4 = (p+3)*tau."""

    p: float
    tau: float

    def __post_init__(self):
        if self.p < 0.0:
            raise ValueError(f"p must be >= 0, got {self.p!r}")
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau!r}")

    @property
    def tau1(self) -> float:
        return self.p * self.tau

    @property
    def tau2(self) -> float:
        return (self.p + 2.0) * self.tau

    @property
    def tau3(self) -> float:
        return (self.p + 1.0) * self.tau

    @property
    def tau4(self) -> float:
        return (self.p + 3.0) * self.tau

    @property
    def times(self) -> tuple[float, float, float, float]:
        return (self.tau1, self.tau2, self.tau3, self.tau4)


@dataclass(frozen=True)
class ChshValue:
    """CHSH combination with its verdicts against the [-1, 0] band."""

    s: float
    violated_lower: bool
    violated_upper: bool

    @classmethod
    def from_s(cls, s: float) -> "ChshValue":
        return cls(s=s, violated_lower=s < LOWER_BAND, violated_upper=s > UPPER_BAND)


@dataclass(frozen=True)
class LocalityVerdict:
    ok: bool
    ratio: float


def locality_check(schedule: ChshSchedule) -> LocalityVerdict:
    """Screen a schedule against the space-like separation requirement."""
    ratio = (schedule.p + 3.0) / schedule.p if schedule.p > 0.0 else math.inf
    return LocalityVerdict(ok=schedule.p > LOCALITY_P_MIN, ratio=ratio)


def s_qm(p: ParameterSet, tau: float) -> ChshValue:
    """Quantum CHSH combination for spacing tau:
    (1/4)[2 - 3A(tau) + A(3tau)] - 1.  Independent of the schedule offset p
    because the renormalized probabilities depend on time differences only.
    """
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    a1 = qm_asymmetry(p, 0.0, tau)
    a3 = qm_asymmetry(p, 0.0, 3.0 * tau)
    return ChshValue.from_s(0.25 * (2.0 - 3.0 * a1 + a3) - 1.0)


def s_from_probs(
    pr13: float, pr14: float, pr23: float, pr24: float, pr2: float, pr3: float
) -> ChshValue:
    """Generic CHSH evaluator: pr13 - pr14 + pr23 + pr24 - pr2 - pr3.

    Accepts any probabilities in [0, 1] (quantum, Monte Carlo frequencies,
    or hypothetical inputs); the joints are like-strangeness detections at
    the four time pairings, the singles are one-kaon detections at tau2 and
    tau3.
    """
    for name, value in (("pr13", pr13), ("pr14", pr14), ("pr23", pr23),
                        ("pr24", pr24), ("pr2", pr2), ("pr3", pr3)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value!r}")
    return ChshValue.from_s(pr13 - pr14 + pr23 + pr24 - pr2 - pr3)


def s_stable(delta_m: float, tau: float) -> ChshValue:
    """CHSH combination in the stable-kaon limit (zero widths): the damping
    drops out and both band edges are violated periodically."""
    x = delta_m * tau
    return ChshValue.from_s(0.25 * (2.0 - 3.0 * math.cos(x) + math.cos(3.0 * x)) - 1.0)


def s_unrenormalized(p_set: ParameterSet, p: float, tau: float) -> ChshValue:
    """CHSH combination from raw (decay-damped) probabilities at the
    schedule (p, tau); depends on p and never leaves [-1, 0].

    The single-kaon term is (1/4)[E_S + E_L]: half the one-kaon undecayed
    fraction, consistent with the renormalized single being exactly 1/2.
    """
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    if p < 0.0:
        raise ValueError(f"p must be >= 0, got {p!r}")
    sched = ChshSchedule(p=p, tau=tau)
    t1, t2, t3, t4 = sched.times

    def joint(ta: float, tb: float) -> float:
        return joint_strangeness_prob(p_set, -1, -1, ta, tb)

    def single(t: float) -> float:
        return 0.25 * (math.exp(-p_set.gamma_s * t) + math.exp(-p_set.gamma_l * t))

    return s_from_probs(
        joint(t1, t3), joint(t1, t4), joint(t2, t3), joint(t2, t4),
        single(t2), single(t3),
    )


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section(f, a: float, b: float, tol: float) -> float:
    """Minimize unimodal f on [a, b] to bracket width tol; returns midpoint."""
    c = b - (b - a) * _INV_PHI
    d = a + (b - a) * _INV_PHI
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INV_PHI
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INV_PHI
            fd = f(d)
    return 0.5 * (a + b)


def find_extremal_violation(
    p: ParameterSet,
    tau_lo: float,
    tau_hi: float,
    objective: str = "min",
    tol: float = 1e-6,
    grid_points: int = 512,
) -> tuple[float, float]:
    """Locate the extremal quantum CHSH value over spacings in [tau_lo, tau_hi].

    Coarse inclusive grid (at least 512 points), then golden-section
    refinement of the bracketing interval down to tol.  Deterministic; on
    near-ties (within 1e-9) the lowest grid index wins.
    """
    if not 0.0 <= tau_lo < tau_hi:
        raise ValueError(f"need 0 <= tau_lo < tau_hi, got ({tau_lo!r}, {tau_hi!r})")
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol!r}")
    if objective not in ("min", "max"):
        raise ValueError(f"objective must be 'min' or 'max', got {objective!r}")

    n = max(512, int(grid_points))
    sign = 1.0 if objective == "min" else -1.0

    def f(t: float) -> float:
        return sign * s_qm(p, t).s

    step = (tau_hi - tau_lo) / (n - 1)
    grid = [tau_lo + i * step for i in range(n - 1)] + [tau_hi]
    values = [f(t) for t in grid]
    best = min(values)
    idx = next(i for i, v in enumerate(values) if v <= best + 1e-9)
    a = grid[max(idx - 1, 0)]
    b = grid[min(idx + 1, n - 1)]
    tau_star = _golden_section(f, a, b, tol)
    return tau_star, s_qm(p, tau_star).s
