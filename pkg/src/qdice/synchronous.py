"""Joint and spatial conditional probabilities of simultaneous measurements in two factors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NullEventError
from .linalg import DEFAULT_TOL, partial_trace
from .measurement import ProjectiveMeasure
from .spaces import CompositeSpace
from .states import DensityOperator


@dataclass(frozen=True, eq=False)
class JointDistribution:
    table: np.ndarray
    row_labels: tuple = ()
    col_labels: tuple = ()
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2:
            raise DimensionError("joint table must be 2-d")
        if np.any(t < -self.tol) or np.any(t > 1 + self.tol):
            raise ValueError("joint probabilities must lie in [0, 1]")
        if abs(t.sum() - 1) > self.tol:
            raise ValueError(f"joint table sums to {t.sum():.12g}, not 1")
        t = np.clip(t, 0.0, 1.0)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "row_labels", tuple(self.row_labels) or tuple(range(t.shape[0])))
        object.__setattr__(self, "col_labels", tuple(self.col_labels) or tuple(range(t.shape[1])))

    @property
    def shape(self):
        return self.table.shape

    def transposed(self) -> "JointDistribution":
        return JointDistribution(self.table.T, self.col_labels, self.row_labels, self.tol)


def joint_probability(
    rho: DensityOperator,
    space: CompositeSpace,
    a: tuple[str, ProjectiveMeasure],
    b: tuple[str, ProjectiveMeasure],
) -> JointDistribution:
    """table[n, k] = Tr(rho_AB P(A_n) ⊗ P(B_k)); factors other than the two named are traced out."""
    (label_a, ma), (label_b, mb) = a, b
    if label_a == label_b:
        raise ValueError("joint probability needs two distinct factors")
    if rho.space.dims != space.dims:
        raise DimensionError(f"state lives on {rho.space.labels}, not on {space.labels}")
    for lab, m in ((label_a, ma), (label_b, mb)):
        if space.dim_of(lab) != m.space_dim:
            raise DimensionError(f"measure on dim {m.space_dim} does not fit factor {lab!r}")
    others = [lab for lab in space.labels if lab not in (label_a, label_b)]
    m = rho.matrix
    sub = space
    if others:
        m = partial_trace(m, space, others)
        sub = space.subspace([label_a, label_b])
    # kept factors keep the space's own order; present A first regardless
    a_first = sub.labels[0] == label_a
    table = np.empty((ma.outcome_count, mb.outcome_count))
    for n, pa in enumerate(ma.projectors):
        for k, pb in enumerate(mb.projectors):
            op = np.kron(pa.matrix, pb.matrix) if a_first else np.kron(pb.matrix, pa.matrix)
            table[n, k] = np.trace(m @ op).real
    return JointDistribution(table, tuple(ma.labels), tuple(mb.labels), rho.tol)


def marginals(joint: JointDistribution) -> tuple[np.ndarray, np.ndarray]:
    """(p(A_n), p(B_k)) as row and column sums."""
    return joint.table.sum(axis=1), joint.table.sum(axis=0)


def spatial_conditional(joint: JointDistribution, given: tuple[int, int], tol: float = 1e-12) -> np.ndarray:
    """Condition on one cell of an axis.

    ``given=(1, k)`` returns p(A_n | B_k) over n; ``given=(0, n)`` returns
    p(B_k | A_n) over k.
    """
    axis, index = given
    if axis == 1:
        col = joint.table[:, index]
    elif axis == 0:
        col = joint.table[index, :]
    else:
        raise ValueError("axis must be 0 (condition on a row event) or 1 (on a column event)")
    total = col.sum()
    if total <= tol:
        raise NullEventError(float(total), (axis, index))
    return col / total


def conditional_tables(joint: JointDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Both directions at once: ``a_given_b[n, k] = p(A_n|B_k)``, ``b_given_a[n, k] = p(B_k|A_n)``.

    Slices with a zero conditioning marginal are filled with NaN.
    """
    pa, pb = marginals(joint)
    with np.errstate(invalid="ignore", divide="ignore"):
        a_given_b = np.where(pb > 1e-12, joint.table / np.where(pb > 0, pb, 1), np.nan)
        b_given_a = np.where(pa[:, None] > 1e-12, joint.table / np.where(pa > 0, pa, 1)[:, None], np.nan)
    return a_given_b, b_given_a
