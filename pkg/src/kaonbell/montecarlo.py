"""Event-level simulation of explicit local hidden-variable models.

Each pair draws its hidden variables once, at creation: an initial
configuration (one of the four anti-correlated rows), one uniform
threshold variate per kaon, and one decay time per kaon, exponential with
the width matched to that kaon's fixed CP.  A kaon's strangeness worldline
is the threshold law

    S(tau) = s0   if u < Q+(tau)   else  -s0,

which reproduces the single-kaon aligned fraction Q+ at every time while
keeping CP constant (jumps change strangeness only).  The three models
differ solely in how the two threshold variates are coupled at the source:

    threshold-max      u_right = u_left        (comonotone: attains the
                                                upper edge of the local
                                                asymmetry interval)
    threshold-min      u_right = 1 - u_left    (antitone: attains the
                                                lower edge)
    independent-jumps  u_right independent     (asymmetry = product of the
                                                single-kaon polarizations)

Measuring one side reads only that side's hidden variables and its own
time, so locality holds by construction.  Event generation is chunked,
with one counter-based substream per fixed-size chunk keyed on
(seed, chunk index); results are therefore identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .params import ParameterSet
from .realism import (
    InitialPairAssignment,
    RealisticKaonState,
    TimeOrderingError,
    initial_pair_assignments,
    q_fraction,
)

DECAYED = "decayed"

OUTCOME_AXES = ("S=+1", "S=-1", "decayed")

_CHUNK = 1 << 18

# per-row lookups for the four initial configurations, in catalogue order
_ASSIGNMENTS = initial_pair_assignments()
_S0_LEFT = np.array([a.left.strangeness for a in _ASSIGNMENTS], dtype=np.int8)
_CP_LEFT = np.array([a.left.cp for a in _ASSIGNMENTS], dtype=np.int8)


class HvModel(Enum):
    """Coupling of the two per-kaon threshold variates at the source."""

    THRESHOLD_MAX = "threshold-max"
    THRESHOLD_MIN = "threshold-min"
    INDEPENDENT_JUMPS = "independent-jumps"


class NoUndecayedPairsError(ValueError):
    """Asymmetry estimation needs at least one undecayed-undecayed event."""


@dataclass(frozen=True)
class KaonSide:
    """One kaon's share of the pair's hidden variables."""

    state: RealisticKaonState
    u: float
    t_decay: float


@dataclass(frozen=True)
class HiddenVariables:
    """Everything a pair's future behaviour is determined by at creation."""

    assignment: InitialPairAssignment
    row: int
    u_left: float
    u_right: float
    t_decay_left: float
    t_decay_right: float

    @property
    def left(self) -> KaonSide:
        return KaonSide(self.assignment.left, self.u_left, self.t_decay_left)

    @property
    def right(self) -> KaonSide:
        return KaonSide(self.assignment.right, self.u_right, self.t_decay_right)


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    sigma: float
    degenerate: bool = False


@dataclass(frozen=True)
class CountsTable:
    """3x3 tallies over {S=+1, S=-1, decayed} outcomes for (left, right)."""

    n_events: int
    tallies: tuple[tuple[int, int, int], ...]
    model: str
    params: ParameterSet
    tau1: float
    tau2: float
    seed: int

    def count(self, left: object, right: object) -> int:
        return self.tallies[_outcome_index(left)][_outcome_index(right)]

    @property
    def undecayed_pairs(self) -> int:
        return sum(self.tallies[i][j] for i in (0, 1) for j in (0, 1))

    @property
    def like_pairs(self) -> int:
        return self.tallies[0][0] + self.tallies[1][1]

    @property
    def unlike_pairs(self) -> int:
        return self.tallies[0][1] + self.tallies[1][0]

    def renormalized_frequency(self, left: int, right: int) -> float:
        """Joint outcome frequency conditioned on both kaons undecayed."""
        n = self.undecayed_pairs
        if n == 0:
            raise NoUndecayedPairsError("no undecayed-undecayed events")
        return self.count(left, right) / n

    def left_frequency(self, s: int) -> float:
        """Frequency of left strangeness s among left-undecayed events."""
        n = sum(sum(self.tallies[i]) for i in (0, 1))
        if n == 0:
            raise NoUndecayedPairsError("no left-undecayed events")
        return sum(self.tallies[_outcome_index(s)]) / n

    def right_frequency(self, s: int) -> float:
        """Frequency of right strangeness s among right-undecayed events."""
        n = sum(self.tallies[i][j] for i in (0, 1, 2) for j in (0, 1))
        if n == 0:
            raise NoUndecayedPairsError("no right-undecayed events")
        j = _outcome_index(s)
        return sum(self.tallies[i][j] for i in (0, 1, 2)) / n

    def to_dict(self) -> dict:
        return {
            "n_events": self.n_events,
            "axes": list(OUTCOME_AXES),
            "tallies": [list(row) for row in self.tallies],
            "model": self.model,
            "params": self.params.as_dict(),
            "times": {"tau1": self.tau1, "tau2": self.tau2},
            "seed": self.seed,
        }


def _outcome_index(outcome: object) -> int:
    if outcome == DECAYED:
        return 2
    if outcome == +1:
        return 0
    if outcome == -1:
        return 1
    raise ValueError(f"outcome must be +1, -1 or {DECAYED!r}, got {outcome!r}")


def _decay_rate(p: ParameterSet, cp: int) -> float:
    return p.gamma_s if cp > 0 else p.gamma_l


def _couple(model: HvModel, u_left, u_aux):
    if model is HvModel.THRESHOLD_MAX:
        return u_left
    if model is HvModel.THRESHOLD_MIN:
        return 1.0 - u_left
    return u_aux


def sample_pair(model: HvModel, p: ParameterSet, rng: np.random.Generator) -> HiddenVariables:
    """Draw one pair's hidden variables: uniform row choice, coupled
    threshold variates, CP-matched exponential decay times."""
    row = int(rng.integers(0, 4))
    u_left = float(rng.random())
    u_aux = float(rng.random())
    e_left = float(rng.standard_exponential())
    e_right = float(rng.standard_exponential())
    assignment = _ASSIGNMENTS[row]
    rate_l = _decay_rate(p, assignment.left.cp)
    rate_r = _decay_rate(p, assignment.right.cp)
    return HiddenVariables(
        assignment=assignment,
        row=row,
        u_left=u_left,
        u_right=float(_couple(model, u_left, u_aux)),
        t_decay_left=e_left / rate_l if rate_l > 0.0 else math.inf,
        t_decay_right=e_right / rate_r if rate_r > 0.0 else math.inf,
    )


def strangeness_at(side: KaonSide, p: ParameterSet, tau: float):
    """Outcome of a strangeness measurement on one kaon at proper time tau.

    Returns DECAYED once tau reaches the predetermined decay time stored in
    the hidden variables, otherwise +1 or -1 from the threshold worldline.
    Reads nothing about the partner kaon.
    """
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    if tau >= side.t_decay:
        return DECAYED
    s0 = side.state.strangeness
    return s0 if side.u < q_fraction(p, +1, tau) else -s0


def _chunk_tally(
    model: HvModel,
    p: ParameterSet,
    tau1: float,
    tau2: float,
    q1: float,
    q2: float,
    seed: int,
    chunk_index: int,
    m: int,
) -> np.ndarray:
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, chunk_index], dtype=np.uint64))
    )
    rows = rng.integers(0, 4, m)
    u_left = rng.random(m)
    u_aux = rng.random(m)
    e_left = rng.standard_exponential(m)
    e_right = rng.standard_exponential(m)

    u_right = _couple(model, u_left, u_aux)
    s0_left = _S0_LEFT[rows]
    cp_left = _CP_LEFT[rows]
    rate_left = np.where(cp_left > 0, p.gamma_s, p.gamma_l)
    rate_right = np.where(cp_left > 0, p.gamma_l, p.gamma_s)
    with np.errstate(divide="ignore"):
        t_decay_left = e_left / rate_left
        t_decay_right = e_right / rate_right

    s_left = np.where(u_left < q1, s0_left, -s0_left)
    s_right = np.where(u_right < q2, -s0_left, s0_left)
    idx_left = np.where(tau1 >= t_decay_left, 2, np.where(s_left > 0, 0, 1))
    idx_right = np.where(tau2 >= t_decay_right, 2, np.where(s_right > 0, 0, 1))
    return np.bincount(idx_left * 3 + idx_right, minlength=9).reshape(3, 3)


def run_experiment(
    model: HvModel,
    p: ParameterSet,
    tau1: float,
    tau2: float,
    n_events: int,
    seed: int,
    n_jobs: int = 1,
) -> CountsTable:
    """Simulate n_events pairs measured at (tau1, tau2) and tally outcomes.

    Fully deterministic for fixed (model, p, times, n_events, seed): events
    are generated in fixed-size chunks with one substream per chunk, so the
    tallies do not depend on n_jobs.
    """
    model = HvModel(model)
    if n_events <= 0:
        raise ValueError(f"n_events must be > 0, got {n_events!r}")
    if tau1 < 0.0 or tau2 < 0.0:
        raise ValueError(f"times must be >= 0, got ({tau1!r}, {tau2!r})")
    if tau1 > tau2:
        raise TimeOrderingError(f"need tau1 <= tau2, got ({tau1!r}, {tau2!r})")
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in 64 bits, got {seed!r}")

    q1 = q_fraction(p, +1, tau1)
    q2 = q_fraction(p, +1, tau2)
    chunks = [
        (k, min(_CHUNK, n_events - start))
        for k, start in enumerate(range(0, n_events, _CHUNK))
    ]

    def work(chunk):
        k, m = chunk
        return _chunk_tally(model, p, tau1, tau2, q1, q2, seed, k, m)

    if n_jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]

    total = np.sum(parts, axis=0, dtype=np.int64)
    return CountsTable(
        n_events=n_events,
        tallies=tuple(tuple(int(x) for x in row) for row in total),
        model=model.value,
        params=p,
        tau1=tau1,
        tau2=tau2,
        seed=seed,
    )


def estimate_asymmetry(c: CountsTable) -> EstimateWithError:
    """Asymmetry (unlike - like)/(unlike + like) over undecayed pairs, with
    the binomially propagated standard error.

    When every pair landed in one class the binomial error degenerates to
    zero; the estimate is flagged so callers can treat it specially.
    """
    n_like = c.like_pairs
    n_unlike = c.unlike_pairs
    n = n_like + n_unlike
    if n == 0:
        raise NoUndecayedPairsError("no undecayed-undecayed events to estimate from")
    p_hat = n_unlike / n
    value = (n_unlike - n_like) / n
    sigma = 2.0 * math.sqrt(p_hat * (1.0 - p_hat) / n)
    return EstimateWithError(value=value, sigma=sigma, degenerate=(n_unlike in (0, n)))


def expected_asymmetry(model: HvModel, p: ParameterSet, tau1: float, tau2: float) -> float:
    """Analytic asymmetry of each coupling (reference for tests/tools).

    The comonotone and antitone couplings realize the extreme joints
    allowed by the single-kaon marginals; the independent coupling gives
    the product of the single-kaon polarizations.
    """
    model = HvModel(model)
    f1 = 2.0 * q_fraction(p, +1, tau1) - 1.0
    f2 = 2.0 * q_fraction(p, +1, tau2) - 1.0
    if model is HvModel.THRESHOLD_MAX:
        return 1.0 - abs(f2 - f1)
    if model is HvModel.THRESHOLD_MIN:
        return abs(f1 + f2) - 1.0
    return f1 * f2
