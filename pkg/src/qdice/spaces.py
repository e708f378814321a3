"""Labelled tensor-product spaces.

Factors are kept in declaration order; every index computation in the
package is row-major over that order, so the first factor is the slowest
varying one.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

from .errors import DimensionError


@dataclass(frozen=True)
class Factor:
    label: str
    dim: int
    position: int


@dataclass(frozen=True)
class CompositeSpace:
    factors: tuple[Factor, ...]

    def __post_init__(self):
        labels = [f.label for f in self.factors]
        if not labels:
            raise DimensionError("a space needs at least one factor")
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate factor labels in {labels}")
        for i, f in enumerate(self.factors):
            if f.dim < 1:
                raise DimensionError(f"factor {f.label!r} has dimension {f.dim}")
            if f.position != i:
                raise DimensionError(f"factor {f.label!r} is out of position")

    @property
    def total_dim(self) -> int:
        return prod(f.dim for f in self.factors)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    def __len__(self):
        return len(self.factors)

    def __contains__(self, label):
        return label in self.labels

    def factor(self, label: str) -> Factor:
        for f in self.factors:
            if f.label == label:
                return f
        raise KeyError(f"no factor labelled {label!r} in space {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.factor(label).dim

    def index_of(self, label: str) -> int:
        return self.factor(label).position

    def subspace(self, labels: Iterable[str]) -> "CompositeSpace":
        """The space made of the given factors, in this space's order."""
        keep = set(labels)
        missing = keep - set(self.labels)
        if missing:
            raise KeyError(f"unknown labels {sorted(missing)}")
        return compose((f.label, f.dim) for f in self.factors if f.label in keep)

    @classmethod
    def single(cls, dim: int, label: str = "A") -> "CompositeSpace":
        return compose([(label, dim)])


def compose(factors: Iterable[tuple[str, int]] | Sequence[tuple[str, int]]) -> CompositeSpace:
    """Build a space from ``(label, dim)`` pairs, e.g. ``compose([("S", 2), ("A", 6)])``."""
    items = []
    for i, (label, dim) in enumerate(factors):
        if int(dim) != dim or dim < 1:
            raise DimensionError(f"factor {label!r}: dimension must be a positive integer")
        items.append(Factor(str(label), int(dim), i))
    return CompositeSpace(tuple(items))
