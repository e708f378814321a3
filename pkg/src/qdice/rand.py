"""Seeded random states, unitaries and bases for property tests and demos."""

from __future__ import annotations

import numpy as np


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def complex_gaussian(shape, seed=None) -> np.ndarray:
    """Standard circular complex Gaussian, E|z|^2 = 1."""
    rng = _rng(seed)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix."""
    z = complex_gaussian((dim, dim), seed)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_basis(dim: int, seed=None) -> list[np.ndarray]:
    u = random_unitary(dim, seed)
    return [u[:, i] for i in range(dim)]


def random_pure(dim: int, seed=None) -> np.ndarray:
    v = complex_gaussian(dim, seed)
    return v / np.linalg.norm(v)


def random_density(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Random full-rank (or given-rank) density matrix G G^H / Tr(G G^H)."""
    g = complex_gaussian((dim, rank or dim), seed)
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real
