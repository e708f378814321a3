"""Dense complex linear algebra for the small matrices used throughout qdice."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, LinearDependenceError
from .spaces import CompositeSpace

DEFAULT_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex array and reject non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"expected a non-empty matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if a.size == 0:
        raise DimensionError("empty vector")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product; entry ``(i*rb + k, j*cb + l)`` is ``a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Iterable) -> np.ndarray:
    out = None
    for m in mats:
        out = as_matrix(m) if out is None else np.kron(out, as_matrix(m))
    if out is None:
        raise ValueError("kron_all needs at least one matrix")
    return out


def embed(op, space: CompositeSpace, label: str) -> np.ndarray:
    """Pad an operator acting on one factor with identities on the others."""
    op = as_matrix(op)
    d = space.dim_of(label)
    if op.shape != (d, d):
        raise DimensionError(
            f"operator of shape {op.shape} does not act on factor {label!r} (dim {d})"
        )
    return kron_all(op if f.label == label else np.eye(f.dim) for f in space.factors)


def partial_trace(m, space: CompositeSpace, traced_labels) -> np.ndarray:
    """Trace out the named factors of an operator on ``space``.

    The kept factors stay in their original relative order.
    """
    m = as_matrix(m)
    n = space.total_dim
    if m.shape != (n, n):
        raise DimensionError(
            f"matrix of shape {m.shape} does not match space {space.labels} (dim {n})"
        )
    if isinstance(traced_labels, str):
        traced_labels = {traced_labels}
    traced = set(traced_labels)
    unknown = traced - set(space.labels)
    if unknown:
        raise KeyError(f"unknown labels {sorted(unknown)}")
    if not traced or traced == set(space.labels):
        raise ValueError("must trace out a nonempty proper subset of the factors")

    dims = space.dims
    k = len(dims)
    t = m.reshape(dims + dims)
    # einsum subscripts: row index i_p, column index j_p; traced factors share one letter
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    rows = [next(letters) for _ in range(k)]
    cols = [rows[p] if space.factors[p].label in traced else next(letters) for p in range(k)]
    kept = [p for p in range(k) if space.factors[p].label not in traced]
    out_sub = "".join(rows[p] for p in kept) + "".join(cols[p] for p in kept)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out_sub, t)
    d = int(np.prod([dims[p] for p in kept]))
    return reduced.reshape(d, d)


def gram_schmidt(vectors: Sequence, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Orthonormalize in order (modified Gram-Schmidt with one reorthogonalization pass).

    Raises :class:`LinearDependenceError` naming the first vector whose
    residual norm falls below ``tol``.
    """
    vecs = [as_vector(v) for v in vectors]
    if not vecs:
        raise ValueError("gram_schmidt needs at least one vector")
    dim = vecs[0].size
    if any(v.size != dim for v in vecs):
        raise DimensionError("all vectors must share one dimension")
    basis: list[np.ndarray] = []
    for i, v in enumerate(vecs):
        w = v.copy()
        for _ in range(2):
            for u in basis:
                w = w - np.vdot(u, w) * u
        norm = np.linalg.norm(w)
        if norm < tol:
            raise LinearDependenceError(i, norm)
        basis.append(w / norm)
    return basis


@dataclass(frozen=True)
class DensityReport:
    hermitian: bool
    psd: bool
    trace_one: bool
    hermiticity_error: float
    min_eigenvalue: float
    trace: complex

    @property
    def ok(self) -> bool:
        return self.hermitian and self.psd and self.trace_one

    def describe(self) -> str:
        bad = []
        if not self.hermitian:
            bad.append(f"not hermitian (max |m - m^H| = {self.hermiticity_error:.3e})")
        if not self.psd:
            bad.append(f"not positive semi-definite (min eigenvalue {self.min_eigenvalue:.3e})")
        if not self.trace_one:
            bad.append(f"trace {self.trace:.6g} != 1")
        return "; ".join(bad) or "valid density operator"


def validate_density(m, tol: float = DEFAULT_TOL) -> DensityReport:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"density operator must be square, got {m.shape}")
    herm_err = float(np.max(np.abs(m - dagger(m))))
    h = (m + dagger(m)) / 2
    min_eig = float(np.linalg.eigvalsh(h).min())
    tr = complex(np.trace(m))
    return DensityReport(
        hermitian=herm_err <= tol,
        psd=min_eig >= -tol,
        trace_one=abs(tr - 1) <= tol,
        hermiticity_error=herm_err,
        min_eigenvalue=min_eig,
        trace=tr,
    )


def is_unitary(u, tol: float = DEFAULT_TOL) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= tol)
