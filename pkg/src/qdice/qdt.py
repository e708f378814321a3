"""Quantum decision theory: prospects, their operator measure, and the utility/attraction split.

A prospect pairs alternative ``A_n`` with an emotion vector
``|z_n> = sum_a b_na |a>`` in the subject space. The decision space is
ordered (subject, alternative), so the prospect state is ``|z_n> ⊗ |A_n>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CalibrationError, DimensionError, InvalidMeasureError, WeakResolutionError
from .linalg import as_vector
from .measurement import ProjectiveMeasure
from .rand import complex_gaussian
from .spaces import CompositeSpace, compose
from .states import DensityOperator

WEAK_RESOLUTION_TOL = 1e-8
NON_INFORMATIVE_PRIOR = 0.25


@dataclass(frozen=True, eq=False)
class Prospect:
    alternative_index: int
    emotion_amplitudes: np.ndarray

    def __post_init__(self):
        b = as_vector(self.emotion_amplitudes)
        if not np.any(b):
            raise InvalidMeasureError(f"prospect {self.alternative_index}: emotion vector is zero")
        b.setflags(write=False)
        object.__setattr__(self, "emotion_amplitudes", b)

    @property
    def norm2(self) -> float:
        """<z_n|z_n>."""
        return float(np.vdot(self.emotion_amplitudes, self.emotion_amplitudes).real)


@dataclass(frozen=True, eq=False)
class ProspectMeasure:
    prospects: tuple[Prospect, ...]
    alternative_basis: ProjectiveMeasure
    subject_label: str = "S"
    alternative_label: str = "A"

    def __post_init__(self):
        ps = tuple(self.prospects)
        object.__setattr__(self, "prospects", ps)
        if len(ps) != self.alternative_basis.outcome_count:
            raise InvalidMeasureError(
                f"{len(ps)} prospects for {self.alternative_basis.outcome_count} alternatives"
            )
        if self.alternative_basis.is_degenerate:
            raise InvalidMeasureError("prospects need a nondegenerate alternative basis")
        if sorted(p.alternative_index for p in ps) != list(range(len(ps))):
            raise InvalidMeasureError("need exactly one prospect per alternative")
        d = {p.emotion_amplitudes.size for p in ps}
        if len(d) != 1:
            raise DimensionError("emotion vectors differ in dimension")
        object.__setattr__(self, "prospects", tuple(sorted(ps, key=lambda p: p.alternative_index)))

    @classmethod
    def from_amplitudes(cls, emotions, alternative_basis: ProjectiveMeasure, **kw) -> "ProspectMeasure":
        """One row of ``emotions`` per alternative, in alternative order."""
        rows = np.atleast_2d(np.asarray(emotions, dtype=complex))
        return cls(tuple(Prospect(n, b) for n, b in enumerate(rows)), alternative_basis, **kw)

    @property
    def subject_dim(self) -> int:
        return self.prospects[0].emotion_amplitudes.size

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.emotion_amplitudes for p in self.prospects])

    @property
    def space(self) -> CompositeSpace:
        return compose([(self.subject_label, self.subject_dim),
                        (self.alternative_label, self.alternative_basis.space_dim)])

    def rescaled(self, scales) -> "ProspectMeasure":
        scales = np.broadcast_to(np.asarray(scales, dtype=float), (len(self.prospects),))
        return ProspectMeasure.from_amplitudes(
            self.amplitudes * scales[:, None], self.alternative_basis,
            subject_label=self.subject_label, alternative_label=self.alternative_label,
        )


@dataclass(frozen=True, eq=False)
class ProspectDecomposition:
    p: np.ndarray
    f: np.ndarray
    q: np.ndarray
    utilities: np.ndarray | None = None
    tol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        for name in ("p", "f", "q"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.max(np.abs(self.p - (self.f + self.q))) > self.tol:
            raise ArithmeticError("prospect probability differs from utility + attraction")

    @property
    def normalized(self) -> bool:
        """Sum p = 1, sum f = 1, sum q = 0 and all bounds, within ``tol``."""
        t = self.tol
        return bool(
            abs(self.p.sum() - 1) <= t and abs(self.f.sum() - 1) <= t and abs(self.q.sum()) <= t
            and np.all(self.f >= -t) and np.all(self.f <= 1 + t)
            and np.all(self.p >= -t) and np.all(self.p <= 1 + t)
            and np.all(np.abs(self.q) <= 1 + t)
        )


def _check_state(rho: DensityOperator, pm: ProspectMeasure):
    if rho.space.dims != pm.space.dims:
        raise DimensionError(
            f"state on dims {rho.space.dims} but prospects live on {pm.space.dims} (subject, alternative)"
        )


def prospect_operators(pm: ProspectMeasure) -> list[np.ndarray]:
    """P(pi_n) = |z_n><z_n| ⊗ P(A_n); positive, rank one, not idempotent unless <z|z> = 1."""
    return [
        np.kron(np.outer(p.emotion_amplitudes, p.emotion_amplitudes.conj()), proj.matrix)
        for p, proj in zip(pm.prospects, pm.alternative_basis.projectors)
    ]


def weak_resolution_residual(rho: DensityOperator, pm: ProspectMeasure) -> float:
    """Tr(rho sum_n P(pi_n)) - 1."""
    _check_state(rho, pm)
    total = sum(prospect_operators(pm))
    return float(np.trace(rho.matrix @ total).real - 1)


def _raw_parts(rho: DensityOperator, pm: ProspectMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized (f_n, q_n): diagonal and off-diagonal emotion contributions."""
    f, q = [], []
    for p, proj in zip(pm.prospects, pm.alternative_basis.projectors):
        b = p.emotion_amplitudes
        zz = np.outer(b, b.conj())
        diag = np.diag(np.diag(zz))
        f.append(np.trace(rho.matrix @ np.kron(diag, proj.matrix)))
        q.append(np.trace(rho.matrix @ np.kron(zz - diag, proj.matrix)))
    f, q = np.array(f), np.array(q)
    if np.max(np.abs(f.imag)) > 1e-10 or np.max(np.abs(q.imag)) > 1e-10:
        raise ArithmeticError("utility or attraction term has an imaginary part")
    return f.real, q.real


def prospect_probabilities(
    rho: DensityOperator, pm: ProspectMeasure, tol: float = WEAK_RESOLUTION_TOL, check: bool = True
) -> np.ndarray:
    """p(pi_n) = Tr(rho P(pi_n)).

    With ``check`` the family must resolve unity on average for ``rho``;
    otherwise :class:`WeakResolutionError` carries the residual.
    """
    _check_state(rho, pm)
    p = np.array([np.trace(rho.matrix @ op).real for op in prospect_operators(pm)])
    if check and abs(p.sum() - 1) > tol:
        raise WeakResolutionError(float(p.sum() - 1))
    return p


def decompose(rho: DensityOperator, pm: ProspectMeasure, tol: float = WEAK_RESOLUTION_TOL) -> ProspectDecomposition:
    """Split prospect probabilities into utility fraction f and attraction factor q."""
    p = prospect_probabilities(rho, pm, tol)
    f, q = _raw_parts(rho, pm)
    return ProspectDecomposition(p, f, q)


def calibrate_emotions(rho: DensityOperator, pm: ProspectMeasure, mode: str = "balanced",
                       tol: float = 1e-12) -> ProspectMeasure:
    """Rescale emotion amplitudes so the family suits ``rho``.

    ``mode="common"`` applies one factor to every prospect, which only
    enforces ``sum p = 1``. ``mode="balanced"`` uses one nonnegative factor
    per prospect so that additionally ``sum f = 1`` and ``sum q = 0``; it
    fails with :class:`CalibrationError` when all attraction terms share a
    strict sign, since no rescaling can cancel them then.
    """
    _check_state(rho, pm)
    F, Q = _raw_parts(rho, pm)
    if mode == "common":
        total = (F + Q).sum()
        if total <= tol:
            raise CalibrationError("prospects carry no probability for this state")
        return pm.rescaled(np.sqrt(1 / total))
    if mode != "balanced":
        raise ValueError(f"unknown calibration mode {mode!r}")

    live = F > tol
    if not live.any():
        raise CalibrationError("prospects carry no probability for this state")
    ratio = np.where(live, Q / np.where(live, F, 1), 0.0)
    u = np.where(live, F, 0.0) / F[live].sum()
    mean = float(u @ ratio)
    if abs(mean) > tol:
        pick = np.argmin(np.where(live, ratio, np.inf)) if mean > 0 else np.argmax(np.where(live, ratio, -np.inf))
        if np.sign(ratio[pick]) == np.sign(mean) or ratio[pick] == 0:
            raise CalibrationError("attraction terms all share one sign; cannot balance")
        s = mean / (mean - ratio[pick])
        u = (1 - s) * u
        u[pick] += s
    scales = np.where(live, np.sqrt(u / np.where(live, F, 1)), 1.0)
    return pm.rescaled(scales)


def sample_emotions(subject_dim: int, count: int, seed: int,
                    rho: DensityOperator | None = None,
                    alternative_basis: ProjectiveMeasure | None = None,
                    mode: str = "common") -> np.ndarray:
    """``count`` random emotion vectors with i.i.d. standard complex Gaussian entries.

    Given ``rho`` and ``alternative_basis`` (with ``count`` outcomes), the
    vectors are then calibrated via :func:`calibrate_emotions`.
    """
    if subject_dim < 1 or count < 1:
        raise ValueError("subject_dim and count must be positive")
    b = complex_gaussian((count, subject_dim), np.random.default_rng(seed))
    if rho is None:
        return b
    if alternative_basis is None:
        raise ValueError("calibration needs the alternative basis")
    pm = ProspectMeasure.from_amplitudes(b, alternative_basis)
    return calibrate_emotions(rho, pm, mode).amplitudes


def luce_utility(attributes: Sequence[float]) -> np.ndarray:
    """Utility fractions a_n / sum(a)."""
    a = np.asarray(attributes, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("attributes must be a nonempty sequence")
    if np.any(a < 0):
        raise ValueError("attributes must be nonnegative")
    total = a.sum()
    if total == 0:
        raise ValueError("attributes are all zero")
    return a / total


def apply_prior(f: Sequence[float], signs: Sequence[int], magnitude: float = NON_INFORMATIVE_PRIOR,
                tol: float = 1e-10) -> np.ndarray:
    """p_n = f_n + magnitude * sign_n, kept normalized and inside [0, 1].

    Unbalanced signs get their mean adjustment removed first; if clamping
    fires the result is renormalized.
    """
    f = np.asarray(f, dtype=float)
    s = np.asarray(signs, dtype=float)
    if f.size < 2:
        raise ValueError("need at least two alternatives")
    if s.shape != f.shape:
        raise ValueError("one sign per alternative")
    if not np.all(np.isin(s, (-1, 0, 1))):
        raise ValueError("signs must be +1, -1 or 0")
    if abs(f.sum() - 1) > tol:
        raise ValueError(f"utility fractions sum to {f.sum():.12g}, not 1")
    adj = magnitude * s
    if adj.sum() != 0:
        adj = adj - adj.mean()
    p = f + adj
    clipped = np.clip(p, 0.0, 1.0)
    if np.any(clipped != p):
        clipped = clipped / clipped.sum()
    return clipped


@dataclass(frozen=True, eq=False)
class PriorReport:
    f: np.ndarray
    q: np.ndarray
    p: np.ndarray
    p_exp: np.ndarray | None = None

    @property
    def deviation(self) -> np.ndarray | None:
        return None if self.p_exp is None else np.abs(self.p - self.p_exp)


def prior_prediction(f: Sequence[float], signs: Sequence[int], p_exp: Sequence[float] | None = None,
                     magnitude: float = NON_INFORMATIVE_PRIOR) -> PriorReport:
    """Predict choice fractions from utility fractions and attraction signs."""
    f = np.asarray(f, dtype=float)
    p = apply_prior(f, signs, magnitude)
    return PriorReport(f, p - f, p, None if p_exp is None else np.asarray(p_exp, dtype=float))


DECOY_F = (0.4, 0.6)
DECOY_SIGNS = (+1, -1)
DECOY_EXPERIMENT = (0.61, 0.31)


def decoy_effect() -> PriorReport:
    """Oven choice with a decoy: quality gains attraction, price loses it."""
    return prior_prediction(DECOY_F, DECOY_SIGNS, DECOY_EXPERIMENT)
