#!/usr/bin/env python3
"""
Ground set and partition matroid model
Partitions occupy contiguous index ranges; all objects are immutable after construction.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConstructionError, DimensionError

logger = logging.getLogger(__name__)

POLYTOPE_TOLERANCE = 1e-9


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GroundSet:
    """
    Partitioned element universe {0, ..., n-1}

    Attributes:
        partitions: Contiguous index ranges P_0, ..., P_{N-1}
        partition_index: Element index -> owning partition index
    """
    partitions: Tuple[range, ...]
    partition_index: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.partition_index.shape[0])

    @property
    def N(self) -> int:
        return len(self.partitions)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(p) for p in self.partitions)

    def partition_of(self, element: int) -> int:
        """
        Owning partition of an element

        Args:
            element: Element index

        Returns:
            Partition index i with element in P_i
        """
        if not 0 <= element < self.n:
            raise DimensionError(f"Element {element} outside ground set of size {self.n}")
        return int(self.partition_index[element])

    def elements(self, i: int) -> np.ndarray:
        """Element indices of partition i as an int array"""
        part = self.partitions[i]
        return np.arange(part.start, part.stop)


def new_ground(partition_sizes: Sequence[int]) -> GroundSet:
    """
    Build a ground set with contiguous partitions of the given sizes

    Args:
        partition_sizes: Size of each partition, in order

    Returns:
        GroundSet with n = sum(partition_sizes)
    """
    sizes = [int(s) for s in partition_sizes]
    if not sizes:
        raise ConstructionError("At least one partition is required")
    if any(s < 1 for s in sizes):
        raise ConstructionError(f"Partition sizes must be >= 1, got {sizes}")

    partitions = []
    start = 0
    for size in sizes:
        partitions.append(range(start, start + size))
        start += size

    partition_index = np.repeat(np.arange(len(sizes)), sizes)
    return GroundSet(tuple(partitions), _frozen_array(partition_index, np.int64))


@dataclass(frozen=True, eq=False)
class PartitionMatroid:
    """Partition matroid: at most budgets[i] elements from partition i"""
    ground: GroundSet
    budgets: Tuple[int, ...]

    def __post_init__(self):
        budgets = tuple(int(k) for k in self.budgets)
        object.__setattr__(self, 'budgets', budgets)
        if len(budgets) != self.ground.N:
            raise ConstructionError(
                f"Expected {self.ground.N} budgets, got {len(budgets)}")
        for i, (kappa, size) in enumerate(zip(budgets, self.ground.sizes)):
            if kappa < 1 or kappa > size:
                raise ConstructionError(
                    f"Budget of partition {i} must lie in [1, {size}], got {kappa}")

    @property
    def rank(self) -> int:
        return sum(self.budgets)


def new_matroid(ground: GroundSet, budgets: Optional[Sequence[int]] = None) -> PartitionMatroid:
    """Partition matroid over ground; budgets default to one per partition"""
    if budgets is None:
        budgets = [1] * ground.N
    return PartitionMatroid(ground, tuple(budgets))


@dataclass(frozen=True, eq=False)
class MembershipVector:
    """Fractional point x in [0,1]^n (selection probabilities)"""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DimensionError(f"Membership vector must be 1-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ConstructionError("Membership vector has non-finite entries")
        object.__setattr__(self, 'values', _frozen_array(values, float))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values > 0)

    @classmethod
    def zeros(cls, n: int) -> "MembershipVector":
        return cls(np.zeros(n))


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """Sorted, duplicate-free list of element indices"""
    members: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'members', tuple(sorted({int(j) for j in self.members})))

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, element) -> bool:
        return element in self.members

    def __eq__(self, other) -> bool:
        if isinstance(other, FeasibleSet):
            return self.members == other.members
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.members)

    def as_list(self) -> List[int]:
        return list(self.members)


def indicator_vector(members: Iterable[int], n: int) -> MembershipVector:
    """Indicator vector of a subset of {0, ..., n-1}"""
    values = np.zeros(n)
    for j in members:
        if not 0 <= j < n:
            raise DimensionError(f"Element {j} outside ground set of size {n}")
        values[j] = 1.0
    return MembershipVector(values)


def polytope_check(x: MembershipVector, m: PartitionMatroid) -> bool:
    """
    Membership of x in the matroid polytope (box plus per-partition sums)

    Args:
        x: Fractional point
        m: Partition matroid

    Returns:
        True iff 0 <= x_j <= 1 and sum over P_i <= kappa_i, within tolerance
    """
    if x.n != m.ground.n:
        raise DimensionError(f"Vector has length {x.n}, ground set has {m.ground.n} elements")

    values = x.values
    if np.any(values < -POLYTOPE_TOLERANCE) or np.any(values > 1.0 + POLYTOPE_TOLERANCE):
        return False
    for part, kappa in zip(m.ground.partitions, m.budgets):
        if values[part.start:part.stop].sum() > kappa + POLYTOPE_TOLERANCE:
            return False
    return True


def feasibility_check(S: FeasibleSet, m: PartitionMatroid) -> bool:
    """True iff S respects every per-partition cardinality cap"""
    counts = np.zeros(m.ground.N, dtype=np.int64)
    for j in S:
        counts[m.ground.partition_of(j)] += 1
    return bool(np.all(counts <= np.asarray(m.budgets)))
