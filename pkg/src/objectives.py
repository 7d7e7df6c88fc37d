#!/usr/bin/env python3
"""
Monotone submodular objectives
Facility location over an RBF similarity kernel, rating-matrix facility location,
modular weights and weighted coverage, all behind one oracle interface.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from errors import ConstructionError, DimensionError, ParameterError, PreconditionError
from ground_model import GroundSet

logger = logging.getLogger(__name__)

MONOTONICITY_TOLERANCE = 1e-9


class SubmodularOracle(ABC):
    """
    Set-function oracle f: 2^{0..n-1} -> R_+ with f(empty) = 0

    Subclasses implement evaluate(); gain_pairs() may be overridden with a
    vectorized version, the default loops over evaluate().
    """

    @property
    @abstractmethod
    def n(self) -> int:
        """Ground set size"""

    @abstractmethod
    def evaluate(self, subset: Iterable[int]) -> float:
        """Value of f on a subset given as element indices"""

    def __call__(self, subset: Iterable[int]) -> float:
        return self.evaluate(subset)

    def _indices(self, subset: Iterable[int]) -> np.ndarray:
        indices = np.unique(np.fromiter((int(j) for j in subset), dtype=np.int64))
        if indices.size and (indices[0] < 0 or indices[-1] >= self.n):
            raise DimensionError(f"Subset {indices.tolist()} has indices outside [0, {self.n})")
        return indices

    def gain_pairs(self, sample: np.ndarray, elements: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Values with and without each element for a sampled set R

        Args:
            sample: Boolean mask of length n describing R
            elements: Element indices j to evaluate

        Returns:
            Tuple (f(R | {j}), f(R minus {j})) of arrays aligned with elements
        """
        members = set(np.flatnonzero(sample).tolist())
        with_j = np.empty(len(elements))
        without_j = np.empty(len(elements))
        for k, j in enumerate(elements):
            j = int(j)
            with_j[k] = self.evaluate(members | {j})
            without_j[k] = self.evaluate(members - {j})
        return with_j, without_j


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Client-by-element similarity matrix with entries in [0, 1]"""
    k: np.ndarray

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        if k.ndim != 2:
            raise ConstructionError(f"Kernel must be a 2-D matrix, got shape {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ConstructionError("Kernel has non-finite entries")
        if np.any(k < 0.0) or np.any(k > 1.0):
            raise ConstructionError("Kernel entries must lie in [0, 1]")
        k.setflags(write=False)
        object.__setattr__(self, 'k', k)

    @property
    def n_clients(self) -> int:
        return int(self.k.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.k.shape[1])


@dataclass(frozen=True, eq=False)
class Embeddings:
    """Feature embeddings z_p (rows) with RBF bandwidth sigma"""
    vectors: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=float)
        if vectors.ndim != 2:
            raise ConstructionError(f"Embeddings must be an n x d matrix, got shape {vectors.shape}")
        if not np.all(np.isfinite(vectors)):
            raise ConstructionError("Embeddings have non-finite entries")
        vectors.setflags(write=False)
        object.__setattr__(self, 'vectors', vectors)
        object.__setattr__(self, 'sigma', float(self.sigma))

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def rbf_kernel(emb: Embeddings, clients: Optional[np.ndarray] = None) -> KernelMatrix:
    """
    RBF similarities K(p,q) = exp(-||z_p - z_q||^2 / (2 sigma^2))

    Args:
        emb: Element embeddings and bandwidth
        clients: Optional client embeddings (rows); defaults to the elements themselves

    Returns:
        KernelMatrix with one row per client and one column per element
    """
    if not emb.sigma > 0:
        raise ParameterError(f"RBF bandwidth must be positive, got {emb.sigma}")
    client_vectors = emb.vectors if clients is None else np.asarray(clients, dtype=float)
    if client_vectors.ndim != 2 or client_vectors.shape[1] != emb.dim:
        raise DimensionError(
            f"Client embeddings must have {emb.dim} columns, got shape {client_vectors.shape}")

    sq_dist = cdist(client_vectors, emb.vectors, metric='sqeuclidean')
    return KernelMatrix(np.exp(-sq_dist / (2.0 * emb.sigma ** 2)))


class _BestResponseObjective(SubmodularOracle):
    """
    scale * sum over clients of max_{q in S} weights[client, q], empty max = 0

    Shared by facility location and the rating objective.
    """

    def __init__(self, weights: np.ndarray, scale: float = 1.0):
        weights = np.array(weights, dtype=float)
        if weights.ndim != 2:
            raise ConstructionError(f"Weight matrix must be 2-D, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ConstructionError("Weight matrix entries must be finite and nonnegative")
        weights.setflags(write=False)
        self._weights = weights
        self._scale = float(scale)

    @property
    def n(self) -> int:
        return int(self._weights.shape[1])

    @property
    def n_clients(self) -> int:
        return int(self._weights.shape[0])

    def evaluate(self, subset: Iterable[int]) -> float:
        indices = self._indices(subset)
        if indices.size == 0:
            return 0.0
        return self._scale * float(self._weights[:, indices].max(axis=1).sum())

    def gain_pairs(self, sample: np.ndarray, elements: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        elements = np.asarray(elements, dtype=np.int64)
        members = np.flatnonzero(sample)
        n_clients = self.n_clients

        if members.size == 0:
            best = np.zeros(n_clients)
            second = np.zeros(n_clients)
            owner = np.full(n_clients, -1)
        else:
            block = self._weights[:, members]
            rows = np.arange(n_clients)
            local = block.argmax(axis=1)
            best = block[rows, local]
            owner = members[local]
            if members.size > 1:
                masked = block.copy()
                masked[rows, local] = -np.inf
                second = np.maximum(masked.max(axis=1), 0.0)
            else:
                second = np.zeros(n_clients)

        columns = self._weights[:, elements]
        with_j = np.maximum(best[:, None], columns).sum(axis=0)
        dropped = owner[:, None] == elements[None, :]
        without_j = np.where(dropped, second[:, None], best[:, None]).sum(axis=0)
        return self._scale * with_j, self._scale * without_j


class FacilityLocation(_BestResponseObjective):
    """f(S) = sum_p max_{q in S} K(p, q)"""

    def __init__(self, kernel: KernelMatrix):
        super().__init__(kernel.k, scale=1.0)
        self.kernel = kernel


class RatingObjective(_BestResponseObjective):
    """f(S) = (1/n_users) sum_u max_{j in S} r_{u,j} (average user satisfaction)"""

    def __init__(self, ratings: np.ndarray):
        ratings = np.asarray(ratings, dtype=float)
        if ratings.ndim != 2 or ratings.shape[0] < 1:
            raise ConstructionError(f"Ratings must be a users x items matrix, got shape {ratings.shape}")
        super().__init__(ratings, scale=1.0 / ratings.shape[0])
        self.ratings = self._weights

    @property
    def n_users(self) -> int:
        return self.n_clients


class ModularObjective(SubmodularOracle):
    """f(S) = sum_{j in S} w_j; total curvature 0"""

    def __init__(self, weights: Sequence[float]):
        weights = np.array(weights, dtype=float)
        if weights.ndim != 1:
            raise ConstructionError("Modular weights must be a 1-D list")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ConstructionError("Modular weights must be finite and nonnegative")
        weights.setflags(write=False)
        self.weights = weights

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    def evaluate(self, subset: Iterable[int]) -> float:
        indices = self._indices(subset)
        return float(self.weights[indices].sum())

    def gain_pairs(self, sample: np.ndarray, elements: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        elements = np.asarray(elements, dtype=np.int64)
        sample = np.asarray(sample, dtype=bool)
        base = float(self.weights[sample].sum())
        w = self.weights[elements]
        inside = sample[elements]
        with_j = np.where(inside, base, base + w)
        without_j = np.where(inside, base - w, base)
        return with_j, without_j


class WeightedCoverage(SubmodularOracle):
    """f(S) = total weight of items covered by at least one element of S"""

    def __init__(self, coverage_sets: Sequence[Iterable[int]], item_weights: Optional[Sequence[float]] = None):
        sets = [sorted({int(item) for item in items}) for items in coverage_sets]
        if not sets:
            raise ConstructionError("Coverage objective needs at least one element")
        n_items = 1 + max((items[-1] for items in sets if items), default=-1)
        if any(items and items[0] < 0 for items in sets):
            raise ConstructionError("Coverage item ids must be nonnegative")

        if item_weights is None:
            weights = np.ones(n_items)
        else:
            weights = np.array(item_weights, dtype=float)
            if weights.ndim != 1 or weights.shape[0] < n_items:
                raise ConstructionError(
                    f"Need a weight for each of the {n_items} items, got {weights.shape}")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ConstructionError("Item weights must be finite and nonnegative")

        incidence = np.zeros((len(sets), weights.shape[0]), dtype=bool)
        for j, items in enumerate(sets):
            incidence[j, items] = True
        incidence.setflags(write=False)
        weights.setflags(write=False)
        self.incidence = incidence
        self.item_weights = weights

    @property
    def n(self) -> int:
        return int(self.incidence.shape[0])

    def evaluate(self, subset: Iterable[int]) -> float:
        indices = self._indices(subset)
        if indices.size == 0:
            return 0.0
        covered = self.incidence[indices].any(axis=0)
        return float(self.item_weights[covered].sum())

    def gain_pairs(self, sample: np.ndarray, elements: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        elements = np.asarray(elements, dtype=np.int64)
        sample = np.asarray(sample, dtype=bool)
        multiplicity = self.incidence[sample].sum(axis=0)
        covered = multiplicity > 0
        base = float(self.item_weights[covered].sum())

        rows = self.incidence[elements]
        added = (rows & ~covered).astype(float) @ self.item_weights
        lost = (rows & (multiplicity == 1)).astype(float) @ self.item_weights
        inside = sample[elements]
        with_j = np.where(inside, base, base + added)
        without_j = np.where(inside, base - lost, base)
        return with_j, without_j


def weighted_coverage(coverage_sets: Sequence[Iterable[int]],
                      item_weights: Optional[Sequence[float]] = None) -> WeightedCoverage:
    """Build a weighted coverage objective; item weights default to 1"""
    return WeightedCoverage(coverage_sets, item_weights)


def facility_eval(S: Iterable[int], fl: FacilityLocation) -> float:
    """Facility-location value of S; 0 for the empty set"""
    return fl.evaluate(S)


def modular_eval(S: Iterable[int], m: ModularObjective) -> float:
    """Sum of weights over S"""
    return m.evaluate(S)


def marginal_gain(S: Iterable[int], j: int, f: SubmodularOracle) -> float:
    """
    Marginal gain f(S | {j}) - f(S)

    Args:
        S: Current subset
        j: Candidate element
        f: Monotone submodular oracle

    Returns:
        The gain, nonnegative for monotone f
    """
    if not 0 <= j < f.n:
        raise DimensionError(f"Element {j} outside ground set of size {f.n}")
    base = set(int(e) for e in S)
    gain = f.evaluate(base | {j}) - f.evaluate(base)
    if gain < -MONOTONICITY_TOLERANCE:
        raise PreconditionError(f"Negative marginal gain {gain} for element {j}: objective is not monotone")
    return gain


def partition_similarity(kernel: KernelMatrix, ground: GroundSet) -> np.ndarray:
    """
    Mean similarity between every pair of partitions

    Args:
        kernel: Element-by-element kernel (clients are the ground elements)
        ground: Partitioned ground set

    Returns:
        N x N matrix; entry (a, b) is the mean of K(p, q) over p in P_a, q in P_b
    """
    if kernel.n_clients != ground.n or kernel.n_elements != ground.n:
        raise DimensionError("Coupling report needs a square element-by-element kernel")
    coupling = np.empty((ground.N, ground.N))
    for a, pa in enumerate(ground.partitions):
        for b, pb in enumerate(ground.partitions):
            coupling[a, b] = kernel.k[pa.start:pa.stop, pb.start:pb.stop].mean()
    return coupling


def class_similarity(kernel: KernelMatrix, labels: Sequence[int]) -> np.ndarray:
    """
    Mean similarity between every pair of classes

    Args:
        kernel: Element-by-element kernel (clients are the ground elements)
        labels: Class label of every element

    Returns:
        C x C matrix over the sorted distinct labels; entry (a, b) is the mean
        of K(p, q) over p labelled a and q labelled b
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or kernel.n_clients != labels.size or kernel.n_elements != labels.size:
        raise DimensionError("Class coupling needs one label per element of a square kernel")
    members = [np.flatnonzero(labels == c) for c in np.unique(labels)]
    return np.array([[kernel.k[np.ix_(a, b)].mean() for b in members] for a in members])
