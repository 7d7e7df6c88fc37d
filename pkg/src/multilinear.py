#!/usr/bin/env python3
"""
Multilinear extension of a set function
Exact values and gradients by enumeration of all 2^n subsets (small n), and
Monte Carlo gradient estimates with counter-based per-sample RNG streams.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from errors import CapacityError, DimensionError, ParameterError
from ground_model import MembershipVector
from objectives import SubmodularOracle
from worker_pool import WorkerPool

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 20

# RNG stream ids derived from the single experiment seed
DATA_STREAM = 0
MC_STREAM = 1


def stream_rng(seed: int, stream: int, *counters: int) -> np.random.Generator:
    """Independent generator for (seed, stream, counters...)"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, *counters)))


@dataclass(frozen=True)
class SampleConfig:
    """Monte Carlo sample count K and 64-bit seed"""
    K: int = 100
    seed: int = 0

    def __post_init__(self):
        if int(self.K) < 1:
            raise ParameterError(f"Sample count K must be >= 1, got {self.K}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ParameterError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, 'K', int(self.K))
        object.__setattr__(self, 'seed', int(self.seed))


@dataclass(frozen=True, eq=False)
class GradientEstimate:
    """
    Gradient of the multilinear extension

    Attributes:
        g: Length-n gradient; entries that were not requested are NaN
        samples_used: Monte Carlo samples behind each entry (0 for exact)
        seed: Seed of the sample streams, None for exact
        elements: Estimated coordinates, None when every coordinate is present
    """
    g: np.ndarray
    samples_used: int = 0
    seed: Optional[int] = None
    elements: Optional[np.ndarray] = None

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, 'g', g)

    @property
    def exact(self) -> bool:
        return self.seed is None


def _check_point(x: MembershipVector, n: int) -> np.ndarray:
    if x.n != n:
        raise DimensionError(f"Vector has length {x.n}, objective has {n} elements")
    values = x.values
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise ParameterError("Membership probabilities must lie in [0, 1]")
    return values


def _restrict(values: np.ndarray, support: Optional[Sequence[int]]) -> np.ndarray:
    if support is None:
        return values
    restricted = np.zeros_like(values)
    support = np.asarray(support, dtype=np.int64)
    restricted[support] = values[support]
    return restricted


class ExactMultilinear:
    """
    Caches f over every subset of the ground set

    Subset masks use bit j for element j. Building the table costs 2^n oracle
    calls; afterwards each value is O(2^n) and each gradient O(n 2^n).
    """

    def __init__(self, f: SubmodularOracle, limit: int = ENUMERATION_LIMIT):
        n = f.n
        if n > limit:
            raise CapacityError(
                f"Exact enumeration needs n <= {limit}, got n = {n}; use the Monte Carlo path")
        self.f = f
        self.n = n

        table = np.empty(1 << n)
        for mask in range(1 << n):
            table[mask] = f.evaluate(j for j in range(n) if mask >> j & 1)
        table.setflags(write=False)
        self.table = table
        logger.debug(f"Subset table built for n = {n} ({1 << n} subsets)")

    def weights(self, values: np.ndarray) -> np.ndarray:
        """Probability of every subset mask under independent inclusion"""
        w = np.ones(1)
        for p in values:
            w = np.concatenate([w * (1.0 - p), w * p])
        return w

    def value(self, x: MembershipVector, support: Optional[Sequence[int]] = None) -> float:
        values = _restrict(_check_point(x, self.n), support)
        return float(self.weights(values) @ self.table)

    def gradient(self, x: MembershipVector, support: Optional[Sequence[int]] = None) -> GradientEstimate:
        values = _restrict(_check_point(x, self.n), support)
        w = self.weights(values)
        g = np.empty(self.n)
        for j in range(self.n):
            shape = (1 << (self.n - 1 - j), 2, 1 << j)
            w_j = w.reshape(shape).sum(axis=1)
            f_j = self.table.reshape(shape)
            g[j] = float((w_j * (f_j[:, 1, :] - f_j[:, 0, :])).sum())
        return GradientEstimate(g)


def exact_value(x: MembershipVector, f: SubmodularOracle) -> float:
    """
    Multilinear extension F(x) by enumeration

    Args:
        x: Fractional point
        f: Set-function oracle with n <= 20

    Returns:
        Sum over all subsets R of f(R) times the probability of R under x
    """
    return ExactMultilinear(f).value(x)


def exact_gradient(x: MembershipVector, f: SubmodularOracle,
                   support: Optional[Sequence[int]] = None) -> GradientEstimate:
    """
    Exact gradient E[f(R | {j}) - f(R minus {j})] by enumeration

    Args:
        x: Fractional point
        f: Set-function oracle with n <= 20
        support: Optional sampling support; coordinates of x outside it are treated as 0

    Returns:
        GradientEstimate with every coordinate filled in
    """
    return ExactMultilinear(f).gradient(x, support)


def mc_gradient(x: MembershipVector, f: SubmodularOracle, cfg: SampleConfig,
                support: Optional[Sequence[int]] = None,
                elements: Optional[Sequence[int]] = None,
                round_index: int = 0,
                pool: Optional[WorkerPool] = None) -> GradientEstimate:
    """
    Monte Carlo gradient of the multilinear extension

    Sample s of round r draws R from stream (seed, MC_STREAM, r, s), including
    each support element j independently with probability x_j. The per-sample
    differences are averaged in sample order, so the result does not depend on
    the worker count.

    Args:
        x: Fractional point
        f: Set-function oracle
        cfg: Sample count and seed
        support: Elements R is drawn over (default: the whole ground set)
        elements: Coordinates to estimate (default: all)
        round_index: Iteration counter folded into the stream derivation
        pool: Optional worker pool evaluating samples concurrently

    Returns:
        GradientEstimate; coordinates outside elements are NaN
    """
    if cfg.K < 1:
        raise ParameterError(f"Sample count K must be >= 1, got {cfg.K}")
    n = f.n
    values = _check_point(x, n)

    support_idx = np.arange(n) if support is None else np.unique(np.asarray(support, dtype=np.int64))
    element_idx = np.arange(n) if elements is None else np.unique(np.asarray(elements, dtype=np.int64))
    for name, idx in (('support', support_idx), ('elements', element_idx)):
        if idx.size and (idx[0] < 0 or idx[-1] >= n):
            raise DimensionError(f"{name} contains indices outside [0, {n})")
    support_probs = values[support_idx]

    def sample_difference(s: int) -> np.ndarray:
        rng = stream_rng(cfg.seed, MC_STREAM, round_index, s)
        draws = rng.random(support_idx.size)
        mask = np.zeros(n, dtype=bool)
        mask[support_idx[draws < support_probs]] = True
        with_j, without_j = f.gain_pairs(mask, element_idx)
        return with_j - without_j

    if pool is not None:
        differences = pool.map_ordered(sample_difference, range(cfg.K))
    else:
        differences = [sample_difference(s) for s in range(cfg.K)]

    g = np.full(n, np.nan)
    g[element_idx] = np.stack(differences).mean(axis=0)
    return GradientEstimate(
        g,
        samples_used=cfg.K,
        seed=cfg.seed,
        elements=None if element_idx.size == n else element_idx,
    )
