"""Statistical operators and their unitary evolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidStateError
from .linalg import DEFAULT_TOL, as_matrix, as_vector, dagger, is_unitary, kron_all, validate_density
from .spaces import CompositeSpace


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated density matrix attached to the space it acts on."""

    matrix: np.ndarray
    space: CompositeSpace
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise DimensionError(
                f"matrix of shape {m.shape} does not match space {self.space.labels} (dim {n})"
            )
        report = validate_density(m, self.tol)
        if not report.ok:
            raise InvalidStateError(report.describe())
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def marginal(self, labels) -> "DensityOperator":
        """Reduced state on the given factor labels (partial trace over the rest)."""
        from .linalg import partial_trace

        if isinstance(labels, str):
            labels = [labels]
        keep = set(labels)
        if keep == set(self.space.labels):
            return self
        traced = [lab for lab in self.space.labels if lab not in keep]
        m = partial_trace(self.matrix, self.space, traced)
        return DensityOperator(m, self.space.subspace(keep), self.tol)

    def is_pure(self, tol: float = 1e-10) -> bool:
        return abs(np.trace(self.matrix @ self.matrix).real - 1) <= tol

    def allclose(self, other, atol: float = 1e-12) -> bool:
        m = other.matrix if isinstance(other, DensityOperator) else other
        return bool(np.allclose(self.matrix, m, rtol=0, atol=atol))


def _space_for(dim: int, space: CompositeSpace | None) -> CompositeSpace:
    if space is None:
        return CompositeSpace.single(dim)
    if space.total_dim != dim:
        raise DimensionError(f"dimension {dim} does not match space {space.labels}")
    return space


def density(matrix, space: CompositeSpace | None = None, tol: float = DEFAULT_TOL) -> DensityOperator:
    m = as_matrix(matrix)
    return DensityOperator(m, _space_for(m.shape[0], space), tol)


def pure_state(v, space: CompositeSpace | None = None) -> DensityOperator:
    """|v><v| / <v|v>."""
    v = as_vector(v)
    norm2 = np.vdot(v, v).real
    if norm2 <= 0:
        raise InvalidStateError("cannot build a pure state from the zero vector")
    return DensityOperator(np.outer(v, v.conj()) / norm2, _space_for(v.size, space))


def maximally_mixed(dim: int, space: CompositeSpace | None = None) -> DensityOperator:
    return DensityOperator(np.eye(dim) / dim, _space_for(dim, space))


def uniform_superposition(n: int) -> np.ndarray:
    """Equal-weight superposition of ``n`` basis states, each amplitude 1/sqrt(n)."""
    if n < 1:
        raise ValueError("uniform_superposition needs n >= 1")
    return np.full(n, 1 / np.sqrt(n), dtype=complex)


def product_state(states: Sequence[DensityOperator], space: CompositeSpace | None = None) -> DensityOperator:
    """Tensor product of factor states; the result space concatenates their factors."""
    m = kron_all(s.matrix for s in states)
    if space is None:
        from .spaces import compose

        space = compose((f.label, f.dim) for s in states for f in s.space.factors)
    return DensityOperator(m, _space_for(m.shape[0], space))


@dataclass(frozen=True, eq=False)
class EvolutionModel:
    """Either an explicit unitary or the diagonal (nondestructive) phase evolution."""

    kind: str
    unitary: np.ndarray | None = None
    energies: tuple[float, ...] | None = None
    t0: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.kind == "explicit-unitary":
            if self.unitary is None:
                raise ValueError("explicit-unitary evolution needs a matrix")
            u = as_matrix(self.unitary)
            if not is_unitary(u):
                raise ValueError("evolution matrix is not unitary within 1e-10")
            object.__setattr__(self, "unitary", _frozen(u))
        elif self.kind == "diagonal-phase":
            if self.energies is None:
                raise ValueError("diagonal-phase evolution needs energies")
            object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
            if self.t < self.t0:
                raise ValueError("evolution must run forward in time (t >= t0)")
        else:
            raise ValueError(f"unknown evolution kind {self.kind!r}")

    @classmethod
    def explicit(cls, u) -> "EvolutionModel":
        return cls("explicit-unitary", unitary=u)

    @classmethod
    def diagonal_phase(cls, energies, t0: float = 0.0, t: float = 0.0) -> "EvolutionModel":
        return cls("diagonal-phase", energies=tuple(energies), t0=t0, t=t)

    @classmethod
    def identity(cls, dim: int) -> "EvolutionModel":
        return cls("explicit-unitary", unitary=np.eye(dim))

    @property
    def dim(self) -> int:
        return self.unitary.shape[0] if self.kind == "explicit-unitary" else len(self.energies)

    def matrix(self) -> np.ndarray:
        if self.kind == "explicit-unitary":
            return self.unitary
        return diagonal_phase_unitary(self.energies, self.t0, self.t)


def diagonal_phase_unitary(energies, t0: float, t: float) -> np.ndarray:
    """diag(exp(-i E_n (t - t0))) for piecewise-constant energies (hbar = 1)."""
    if t < t0:
        raise ValueError("t must not precede t0")
    e = np.asarray(energies, dtype=float)
    return np.diag(np.exp(-1j * e * (t - t0)))


def evolve(rho: DensityOperator, ev: EvolutionModel | np.ndarray) -> DensityOperator:
    """U rho U^dagger."""
    if not isinstance(ev, EvolutionModel):
        ev = EvolutionModel.explicit(ev)
    u = ev.matrix()
    if u.shape[0] != rho.dim:
        raise DimensionError(f"evolution of dim {u.shape[0]} applied to a state of dim {rho.dim}")
    out = u @ rho.matrix @ dagger(u)
    return DensityOperator((out + dagger(out)) / 2, rho.space, rho.tol)


@dataclass(frozen=True, eq=False)
class Observable:
    """Spectral form sum_n a_n P(A_n) over a projective measure."""

    measure: "ProjectiveMeasure"  # noqa: F821
    eigenvalues: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(a) for a in self.eigenvalues)
        if len(vals) != self.measure.outcome_count:
            raise ValueError(
                f"{len(vals)} eigenvalues for a measure with {self.measure.outcome_count} outcomes"
            )
        object.__setattr__(self, "eigenvalues", vals)

    def matrix(self) -> np.ndarray:
        return sum(a * p.matrix for a, p in zip(self.eigenvalues, self.measure.projectors))


def expectation(rho: DensityOperator, obs: Observable, tol: float = DEFAULT_TOL) -> float:
    """Tr(rho A); the imaginary residue must stay below ``tol``."""
    a = obs.matrix()
    if a.shape[0] != rho.dim:
        raise DimensionError("observable and state dimensions differ")
    val = np.trace(rho.matrix @ a)
    if abs(val.imag) > tol:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)
