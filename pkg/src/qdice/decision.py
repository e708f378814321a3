"""Subject-space-of-mind composites: factor-confined reduction and separation-time dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError
from .linalg import embed
from .measurement import NULL_EVENT_TOL, Projector, ProjectiveMeasure, luders_reduce, outcome_probabilities
from .spaces import CompositeSpace
from .states import DensityOperator, EvolutionModel, evolve


def lift_projector(p: Projector, space: CompositeSpace, target_label: str) -> Projector:
    """I ⊗ P ⊗ I with P placed on ``target_label``."""
    if target_label not in space:
        raise KeyError(f"no factor labelled {target_label!r} in space {space.labels}")
    others = space.total_dim // space.dim_of(target_label)
    return Projector(embed(p.matrix, space, target_label), p.rank * others, p.outcome_label)


def lift_measure(m: ProjectiveMeasure, space: CompositeSpace, target_label: str) -> ProjectiveMeasure:
    if m.space_dim != space.dim_of(target_label):
        raise DimensionError(
            f"measure on dim {m.space_dim} does not fit factor {target_label!r} "
            f"(dim {space.dim_of(target_label)})"
        )
    return ProjectiveMeasure(tuple(lift_projector(p, space, target_label) for p in m.projectors))


def lift_evolution(ev: EvolutionModel, space: CompositeSpace, target_label: str) -> EvolutionModel:
    """Evolution acting on one factor only."""
    return EvolutionModel.explicit(embed(ev.matrix(), space, target_label))


def _check_space(rho: DensityOperator, space: CompositeSpace):
    if rho.space.dims != space.dims:
        raise DimensionError(f"state lives on {rho.space.labels}, not on {space.labels}")


def reduce_in_factor(
    rho: DensityOperator, space: CompositeSpace, target_label: str, p: Projector,
    tol: float = NULL_EVENT_TOL,
) -> DensityOperator:
    """Lüders reduction with the projector confined to one factor of the decision space."""
    _check_space(rho, space)
    lifted = lift_projector(p, space, target_label)
    return luders_reduce(DensityOperator(rho.matrix, space, rho.tol), lifted, tol)


def exponential_decay(tau: float, t_rel: float) -> float:
    return math.exp(-tau / t_rel)


def gaussian_decay(tau: float, t_rel: float) -> float:
    return math.exp(-((tau / t_rel) ** 2))


@dataclass(frozen=True)
class SeparationDynamics:
    """How much of the measurement perturbation survives a separation time ``tau``.

    ``weight`` is 1 at tau = 0 (Lüders limit) and decays to 0 for tau >> t_rel.
    ``decay`` is swappable; it must map (0, t_rel) to 1 and decrease monotonically.
    """

    tau: float
    t_rel: float
    decay: Callable[[float, float], float] = field(default=exponential_decay, compare=False)

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("separation time must be nonnegative")
        if self.t_rel <= 0:
            raise ValueError("relaxation time must be positive")

    @property
    def weight(self) -> float:
        return self.decay(self.tau, self.t_rel)


def mix_branches(reduced: DensityOperator, unreduced: DensityOperator, w: float) -> DensityOperator:
    """w * reduced + (1 - w) * unreduced."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"mixing weight {w} outside [0, 1]")
    return DensityOperator(w * reduced.matrix + (1 - w) * unreduced.matrix, reduced.space, reduced.tol)


def effective_state(
    rho: DensityOperator,
    space: CompositeSpace,
    first: tuple[str, ProjectiveMeasure, int],
    dynamics: SeparationDynamics,
    ev: EvolutionModel | None = None,
) -> DensityOperator:
    label, measure, n = first
    reduced = reduce_in_factor(rho, space, label, measure[n])
    unreduced = DensityOperator(rho.matrix, space, rho.tol)
    if ev is not None:
        reduced, unreduced = evolve(reduced, ev), evolve(unreduced, ev)
    return mix_branches(reduced, unreduced, dynamics.weight)


def separated_conditional(
    rho: DensityOperator,
    space: CompositeSpace,
    first: tuple[str, ProjectiveMeasure, int],
    dynamics: SeparationDynamics,
    ev: EvolutionModel | None,
    second: tuple[str, ProjectiveMeasure],
) -> np.ndarray:
    """p(B_k, t0 + tau | A_n, t0) under the decaying-perturbation model.

    At tau = 0 this is the Lüders conditional; for tau >> t_rel it tends to
    the unconditional p(B_k, t0 + tau).
    """
    eff = effective_state(rho, space, first, dynamics, ev)
    label_b, measure_b = second
    return outcome_probabilities(eff, lift_measure(measure_b, space, label_b))
