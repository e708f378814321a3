"""Classical coins and dice: fair distributions, conditional tables, seeded Monte Carlo."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

RNG_ALGORITHM = "numpy.PCG64/SeedSequence(seed, spawn_key=(block,))"
BLOCK_SIZE = 8192


@dataclass(frozen=True, eq=False)
class ClassicalDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValueError("empty distribution")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(p.sum() - 1) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum():.15g}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


def fair_distribution(n: int) -> ClassicalDistribution:
    if n < 2:
        raise ValueError("a coin or die needs at least two sides")
    return ClassicalDistribution(np.full(n, 1.0 / n))


def classical_conditional(joint) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(b_given_a, a_given_b)`` with ``b_given_a[n, k] = f(B_k | A_n)``
    and ``a_given_b[n, k] = f(A_n | B_k)``.
    """
    j = np.asarray(joint, dtype=float)
    if j.ndim != 2:
        raise ValueError("joint table must be 2-d")
    if np.any(j < 0) or abs(j.sum() - 1) > 1e-12:
        raise ValueError("joint table must be nonnegative and sum to 1")
    fa, fb = j.sum(axis=1), j.sum(axis=0)
    if np.any(fa <= 0):
        raise ZeroDivisionError(f"row event {int(np.argmin(fa))} has zero probability")
    if np.any(fb <= 0):
        raise ZeroDivisionError(f"column event {int(np.argmin(fb))} has zero probability")
    return j / fa[:, None], j / fb[None, :]


@dataclass(frozen=True, eq=False)
class SampleReport:
    trials: int
    counts: np.ndarray
    frequencies: np.ndarray
    reference: np.ndarray
    sigma: np.ndarray
    seed: int
    algorithm: str = RNG_ALGORITHM
    sigmas: float = field(default=3.0)

    def __post_init__(self):
        if int(self.counts.sum()) != self.trials:
            raise ArithmeticError("counts do not add up to the number of trials")

    @property
    def bound(self) -> np.ndarray:
        """Per-outcome three-sigma binomial bound."""
        return self.sigmas * self.sigma

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.frequencies - self.reference)))

    @property
    def within_bounds(self) -> np.ndarray:
        return np.abs(self.frequencies - self.reference) <= self.bound

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "algorithm": self.algorithm,
            "counts": self.counts.tolist(),
            "frequencies": self.frequencies.tolist(),
            "reference": self.reference.tolist(),
            "three_sigma_bound": self.bound.tolist(),
            "max_abs_deviation": self.max_deviation,
            "all_within_bounds": bool(self.within_bounds.all()),
        }


def _block_counts(cdf: np.ndarray, seed: int, block: int, size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    return np.bincount(idx, minlength=cdf.size)


def monte_carlo(dist: ClassicalDistribution | np.ndarray, trials: int, seed: int,
                workers: int = 1) -> SampleReport:
    """Sample ``trials`` outcomes by inverse CDF.

    Trials are split into fixed blocks of ``BLOCK_SIZE``; block ``b`` draws
    from its own stream keyed by ``(seed, b)``, so counts do not depend on
    ``workers``.
    """
    if not isinstance(dist, ClassicalDistribution):
        dist = ClassicalDistribution(dist)
    if trials < 1:
        raise ValueError("trials must be positive")
    p = dist.probs
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    # outcomes with zero mass must never be hit: searchsorted(side="right") skips flat steps
    sizes = [min(BLOCK_SIZE, trials - s) for s in range(0, trials, BLOCK_SIZE)]
    jobs = list(enumerate(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _block_counts(cdf, seed, *j), jobs))
    else:
        parts = [_block_counts(cdf, seed, b, n) for b, n in jobs]
    counts = np.sum(parts, axis=0)[: p.size]
    return SampleReport(
        trials=trials,
        counts=counts,
        frequencies=counts / trials,
        reference=p.copy(),
        sigma=np.sqrt(p * (1 - p) / trials),
        seed=seed,
    )
