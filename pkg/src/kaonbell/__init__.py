"""Quantum-mechanical and local-realistic predictions for entangled
neutral-kaon pairs, with hidden-variable Monte Carlo and CHSH scanning."""

from .chsh import (
    LOCALITY_P_MIN,
    LOCALITY_RATIO_MAX,
    ChshSchedule,
    ChshValue,
    LocalityVerdict,
    find_extremal_violation,
    locality_check,
    s_from_probs,
    s_qm,
    s_stable,
    s_unrenormalized,
)
from .montecarlo import (
    DECAYED,
    CountsTable,
    EstimateWithError,
    HiddenVariables,
    HvModel,
    KaonSide,
    NoUndecayedPairsError,
    estimate_asymmetry,
    expected_asymmetry,
    run_experiment,
    sample_pair,
    strangeness_at,
)
from .params import (
    ConfigParseError,
    NonFiniteError,
    OrderedWidthError,
    ParameterError,
    ParameterSet,
    PositivityError,
    default_params,
    load_params,
    validate,
)
from .qm import (
    CpEigenvalue,
    Strangeness,
    interference_damping,
    joint_cp_prob,
    joint_strangeness_prob,
    qm_asymmetry,
    renormalized_joint,
    survival_factor,
    survival_prob,
)
from .realism import (
    AsymmetryBounds,
    DegenerateAsymmetryError,
    EmptyIntervalError,
    InitialPairAssignment,
    RealisticKaonState,
    StrangenessUndefinedError,
    TimeOrderingError,
    asymmetry_bounds,
    initial_pair_assignments,
    lr_gap,
    pair_state_catalogue,
    q_fraction,
)

__version__ = "0.1.0"
