"""qdice: quantum coins, dice and decisions in finite dimensions."""

__version__ = "0.1.0"

from .classical import ClassicalDistribution, SampleReport, classical_conditional, fair_distribution, monte_carlo
from .decision import (
    SeparationDynamics,
    lift_measure,
    lift_projector,
    reduce_in_factor,
    separated_conditional,
)
from .errors import (
    CalibrationError,
    DimensionError,
    InvalidMeasureError,
    InvalidStateError,
    LinearDependenceError,
    NullEventError,
    QdiceError,
    WeakResolutionError,
)
from .linalg import DensityReport, gram_schmidt, partial_trace, tensor_product, validate_density
from .measurement import (
    MeasurementRecord,
    ProjectiveMeasure,
    Projector,
    conditional_after_evolution,
    immediate_conditional,
    luders_reduce,
    measure_from_basis,
    measure_from_subspaces,
    outcome_probabilities,
)
from .qdt import (
    Prospect,
    ProspectDecomposition,
    ProspectMeasure,
    apply_prior,
    calibrate_emotions,
    decompose,
    luce_utility,
    prospect_operators,
    prospect_probabilities,
    sample_emotions,
)
from .spaces import CompositeSpace, Factor, compose
from .states import (
    DensityOperator,
    EvolutionModel,
    Observable,
    diagonal_phase_unitary,
    evolve,
    expectation,
    pure_state,
    uniform_superposition,
)
from .synchronous import JointDistribution, joint_probability, marginals, spatial_conditional
