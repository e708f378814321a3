"""Projection-valued measures, Lüders reduction and temporal conditional probabilities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import DimensionError, InvalidMeasureError, NullEventError
from .linalg import DEFAULT_TOL, as_matrix, as_vector, dagger, gram_schmidt
from .states import DensityOperator, EvolutionModel, _frozen, evolve

NULL_EVENT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Projector:
    matrix: np.ndarray
    rank: int
    outcome_label: Hashable = None

    def __post_init__(self):
        p = as_matrix(self.matrix)
        if p.shape[0] != p.shape[1]:
            raise InvalidMeasureError("projector must be square")
        if np.max(np.abs(p @ p - p)) > DEFAULT_TOL:
            raise InvalidMeasureError(f"projector {self.outcome_label!r} is not idempotent")
        if np.max(np.abs(p - dagger(p))) > DEFAULT_TOL:
            raise InvalidMeasureError(f"projector {self.outcome_label!r} is not hermitian")
        if abs(np.trace(p).real - self.rank) > 1e-8:
            raise InvalidMeasureError(
                f"projector {self.outcome_label!r}: trace {np.trace(p).real:.6g} != rank {self.rank}"
            )
        object.__setattr__(self, "matrix", _frozen(p))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_vectors(cls, vectors, label=None) -> "Projector":
        """Projector onto the span of orthonormal ``vectors``."""
        vs = [as_vector(v) for v in vectors]
        m = sum(np.outer(v, v.conj()) for v in vs)
        return cls(m, len(vs), label)


@dataclass(frozen=True, eq=False)
class ProjectiveMeasure:
    projectors: tuple[Projector, ...]

    def __post_init__(self):
        ps = tuple(self.projectors)
        object.__setattr__(self, "projectors", ps)
        if len(ps) < 2:
            raise InvalidMeasureError("a measure needs at least two outcomes")
        dim = ps[0].dim
        if any(p.dim != dim for p in ps):
            raise InvalidMeasureError("projectors act on different dimensions")
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                if np.max(np.abs(ps[i].matrix @ ps[j].matrix)) > DEFAULT_TOL:
                    raise InvalidMeasureError(f"outcomes {i} and {j} are not orthogonal")
        total = sum(p.matrix for p in ps)
        if np.max(np.abs(total - np.eye(dim))) > DEFAULT_TOL:
            raise InvalidMeasureError("projectors do not sum to the identity")

    @property
    def space_dim(self) -> int:
        return self.projectors[0].dim

    @property
    def outcome_count(self) -> int:
        return len(self.projectors)

    @property
    def labels(self) -> list:
        return [p.outcome_label for p in self.projectors]

    @property
    def is_degenerate(self) -> bool:
        return any(p.rank > 1 for p in self.projectors)

    def __len__(self):
        return len(self.projectors)

    def __getitem__(self, n) -> Projector:
        return self.projectors[n]


@dataclass(frozen=True)
class MeasurementRecord:
    outcome_label: Hashable
    time: float
    probability_at_observation: float

    def __post_init__(self):
        if not 0.0 <= self.probability_at_observation <= 1.0:
            raise ValueError("probability_at_observation must lie in [0, 1]")


def _labels(labels, n):
    if labels is None:
        return list(range(n))
    labels = list(labels)
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} outcomes")
    return labels


def measure_from_basis(vectors: Sequence, labels=None, tol: float = 1e-8) -> ProjectiveMeasure:
    """Nondegenerate measure: one rank-1 projector per vector of an orthonormal basis."""
    vs = [as_vector(v) for v in vectors]
    if not vs:
        raise InvalidMeasureError("empty basis")
    dim = vs[0].size
    if any(v.size != dim for v in vs):
        raise DimensionError("basis vectors differ in dimension")
    if len(vs) != dim:
        raise InvalidMeasureError(f"incomplete basis: {len(vs)} vectors in dimension {dim}")
    g = np.array(vs).conj() @ np.array(vs).T
    if np.max(np.abs(g - np.eye(dim))) > tol:
        raise InvalidMeasureError("basis vectors are not orthonormal")
    labs = _labels(labels, dim)
    return ProjectiveMeasure(tuple(Projector.from_vectors([v], lab) for v, lab in zip(vs, labs)))


def measure_from_subspaces(groups: Sequence[Sequence], labels=None) -> ProjectiveMeasure:
    """Degenerate measure: one projector per group, each group orthonormalized first."""
    groups = [list(g) for g in groups]
    if any(not g for g in groups):
        raise InvalidMeasureError("empty degeneracy group")
    labs = _labels(labels, len(groups))
    projectors = []
    total = 0
    for g, lab in zip(groups, labs):
        basis = gram_schmidt(g)
        total += len(basis)
        projectors.append(Projector.from_vectors(basis, lab))
    dim = projectors[0].dim
    if total != dim:
        raise InvalidMeasureError(f"groups span {total} dimensions, space has {dim}")
    return ProjectiveMeasure(tuple(projectors))


def standard_basis(dim: int) -> list[np.ndarray]:
    return [np.eye(dim, dtype=complex)[i] for i in range(dim)]


def fourier_basis(dim: int) -> list[np.ndarray]:
    """Columns of the unitary DFT matrix; for dim 2 this is the X (Hadamard) basis."""
    k = np.arange(dim)
    f = np.exp(2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim)
    return [f[:, i] for i in range(dim)]


def computational_measure(dim: int, labels=None) -> ProjectiveMeasure:
    return measure_from_basis(standard_basis(dim), labels)


def _check_dims(rho: DensityOperator, m: ProjectiveMeasure):
    if rho.dim != m.space_dim:
        raise DimensionError(f"state of dim {rho.dim} measured by a measure on dim {m.space_dim}")


def probability(rho: DensityOperator, p: Projector | np.ndarray) -> float:
    pm = p.matrix if isinstance(p, Projector) else as_matrix(p)
    return float(np.trace(rho.matrix @ pm).real)


def outcome_probabilities(rho: DensityOperator, m: ProjectiveMeasure) -> np.ndarray:
    """p_n = Tr(rho P_n) for every outcome, in declaration order."""
    _check_dims(rho, m)
    p = np.array([probability(rho, proj) for proj in m.projectors])
    if np.any(p < -DEFAULT_TOL) or abs(p.sum() - 1) > DEFAULT_TOL:
        raise ArithmeticError(f"outcome probabilities {p} are not a distribution")
    return np.clip(p, 0.0, 1.0)


def luders_reduce(rho: DensityOperator, p: Projector | np.ndarray, tol: float = NULL_EVENT_TOL) -> DensityOperator:
    """Post-measurement state P rho P / Tr(rho P)."""
    pm = p.matrix if isinstance(p, Projector) else as_matrix(p)
    if pm.shape[0] != rho.dim:
        raise DimensionError(f"projector of dim {pm.shape[0]} for a state of dim {rho.dim}")
    prob = probability(rho, pm)
    if prob <= tol:
        raise NullEventError(prob, getattr(p, "outcome_label", None))
    out = pm @ rho.matrix @ pm / prob
    return DensityOperator((out + dagger(out)) / 2, rho.space, rho.tol)


def conditional_after_evolution(
    rho_before: DensityOperator,
    first: ProjectiveMeasure,
    n: int,
    ev: EvolutionModel | None,
    second: ProjectiveMeasure,
) -> np.ndarray:
    """p(B_k, t | A_n, t0) = Tr(U rho(A_n) U^dagger P(B_k)), with rho(A_n) the Lüders state."""
    _check_dims(rho_before, first)
    _check_dims(rho_before, second)
    reduced = luders_reduce(rho_before, first[n])
    if ev is not None:
        reduced = evolve(reduced, ev)
    return outcome_probabilities(reduced, second)


def immediate_conditional(
    rho_before: DensityOperator, first: ProjectiveMeasure, n: int, second: ProjectiveMeasure
) -> np.ndarray:
    """Lüders probability p(B_k, t0+0 | A_n, t0) for every k."""
    return conditional_after_evolution(rho_before, first, n, None, second)


def transition_probabilities(a: Sequence, b: Sequence) -> np.ndarray:
    """Matrix ``T[n, k] = |<B_k|A_n>|^2`` between two bases."""
    av = np.array([as_vector(v) for v in a])
    bv = np.array([as_vector(v) for v in b])
    return np.abs(av.conj() @ bv.T) ** 2
