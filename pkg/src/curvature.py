#!/usr/bin/env python3
"""
Curvature analysis
Total and partition curvature of a monotone submodular objective, the
effective rate max{tau, 1 - c} and the threshold tau* = 1 - c.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from errors import DegenerateObjectiveError, DimensionError, ParameterError, PreconditionError
from ground_model import GroundSet
from multilinear import ExactMultilinear
from objectives import SubmodularOracle

logger = logging.getLogger(__name__)

CURVATURE_TOLERANCE = 1e-9
BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class CurvatureWitness:
    """Element attaining the minimum marginal-to-singleton ratio"""
    element: int
    set_size: int
    ratio: float


@dataclass(frozen=True, eq=False)
class CurvatureReport:
    """
    Curvature of an objective over a partitioned ground set

    Attributes:
        c_total: Total curvature c
        c_partition: Partition curvatures c_i
        tau_star: 1 - c_total
        witness: Minimizing element for c_total
        partition_witnesses: Minimizing element per partition (None when all were skipped)
        skipped: Elements with f({p}) <= 0, excluded from every minimum
    """
    c_total: float
    c_partition: Tuple[float, ...]
    tau_star: float
    witness: CurvatureWitness
    partition_witnesses: Tuple[Optional[CurvatureWitness], ...]
    skipped: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        def witness_dict(w: Optional[CurvatureWitness]) -> Optional[Dict[str, Any]]:
            if w is None:
                return None
            return {'element': w.element, 'set_size': w.set_size, 'ratio': w.ratio}

        return {
            'c_total': self.c_total,
            'c_partition': list(self.c_partition),
            'tau_star': self.tau_star,
            'safe_threshold': safe_threshold(self),
            'witness': witness_dict(self.witness),
            'partition_witnesses': [witness_dict(w) for w in self.partition_witnesses],
            'skipped': list(self.skipped),
        }


class EffectiveRate(NamedTuple):
    tau_eff: float
    bound: float


def _check_range(c: float, label: str) -> float:
    if c < -CURVATURE_TOLERANCE or c > 1.0 + CURVATURE_TOLERANCE:
        raise PreconditionError(f"{label} = {c} outside [0, 1]: objective is not monotone submodular")
    return c


def _shortcut_ratios(f: SubmodularOracle, ground: GroundSet) -> Tuple[np.ndarray, np.ndarray]:
    """Singleton values f({p}) and ratios (f(P) - f(P minus {p})) / f({p})"""
    if f.n != ground.n:
        raise DimensionError(f"Objective has {f.n} elements, ground set has {ground.n}")
    elements = np.arange(ground.n)
    singletons, _ = f.gain_pairs(np.zeros(ground.n, dtype=bool), elements)
    full, without = f.gain_pairs(np.ones(ground.n, dtype=bool), elements)
    ratios = np.full(ground.n, np.nan)
    positive = singletons > 0
    ratios[positive] = (full[positive] - without[positive]) / singletons[positive]
    return singletons, ratios


def _minimum(ratios: np.ndarray, candidates: np.ndarray, set_size: int) -> Optional[CurvatureWitness]:
    usable = candidates[~np.isnan(ratios[candidates])]
    if usable.size == 0:
        return None
    p = int(usable[np.argmin(ratios[usable])])
    return CurvatureWitness(element=p, set_size=set_size, ratio=float(ratios[p]))


def total_curvature(f: SubmodularOracle, ground: GroundSet) -> CurvatureReport:
    """
    Total and partition curvature from the full-set marginals

    For submodular f the smallest marginal of p is attained at the full set
    minus p, so c = 1 - min_p (f(P) - f(P minus {p})) / f({p}), using O(n)
    oracle work.

    Args:
        f: Monotone submodular oracle
        ground: Partitioned ground set

    Returns:
        CurvatureReport with c, every c_i and tau* = 1 - c
    """
    singletons, ratios = _shortcut_ratios(f, ground)
    skipped = tuple(int(p) for p in np.flatnonzero(~(singletons > 0)))
    if skipped:
        logger.warning(f"Curvature skips {len(skipped)} elements with zero singleton value: {list(skipped)}")

    witness = _minimum(ratios, np.arange(ground.n), ground.n - 1)
    if witness is None:
        raise DegenerateObjectiveError("Every singleton value is zero; curvature is undefined")
    c_total = _check_range(1.0 - witness.ratio, 'curvature')

    c_partition = []
    partition_witnesses = []
    for i in range(ground.N):
        w = _minimum(ratios, ground.elements(i), ground.n - 1)
        partition_witnesses.append(w)
        if w is None:
            logger.warning(f"Partition {i} has only zero-valued elements; its curvature is reported as 0")
            c_partition.append(0.0)
        else:
            c_partition.append(_check_range(1.0 - w.ratio, f'partition {i} curvature'))

    logger.debug(f"Curvature c={c_total:.6f}, partition curvatures {c_partition}")
    return CurvatureReport(
        c_total=c_total,
        c_partition=tuple(c_partition),
        tau_star=1.0 - c_total,
        witness=witness,
        partition_witnesses=tuple(partition_witnesses),
        skipped=skipped,
    )


def partition_curvature(f: SubmodularOracle, ground: GroundSet, i: int) -> float:
    """
    Curvature with the element restricted to partition i

    Args:
        f: Monotone submodular oracle
        ground: Partitioned ground set
        i: Partition index

    Returns:
        c_i, never larger than the total curvature
    """
    if not 0 <= i < ground.N:
        raise DimensionError(f"Partition {i} outside [0, {ground.N})")
    _, ratios = _shortcut_ratios(f, ground)
    witness = _minimum(ratios, ground.elements(i), ground.n - 1)
    if witness is None:
        raise DegenerateObjectiveError(f"Every singleton value in partition {i} is zero")
    return _check_range(1.0 - witness.ratio, f'partition {i} curvature')


def brute_force_curvature(f: SubmodularOracle, ground: GroundSet,
                          elements: Optional[Sequence[int]] = None) -> float:
    """
    Curvature as the minimum over every pair (S, p) with p not in S

    Args:
        f: Oracle with n <= 12
        ground: Partitioned ground set
        elements: Elements p to minimize over (default: all)

    Returns:
        1 - min over S, p of (f(S | {p}) - f(S)) / f({p})
    """
    if f.n != ground.n:
        raise DimensionError(f"Objective has {f.n} elements, ground set has {ground.n}")
    table = ExactMultilinear(f, limit=BRUTE_FORCE_LIMIT).table
    n = ground.n
    candidates = range(n) if elements is None else [int(p) for p in elements]

    best = math.inf
    for p in candidates:
        singleton = table[1 << p]
        if singleton <= 0:
            continue
        shape = (1 << (n - 1 - p), 2, 1 << p)
        blocks = table.reshape(shape)
        best = min(best, float((blocks[:, 1, :] - blocks[:, 0, :]).min() / singleton))
    if best == math.inf:
        raise DegenerateObjectiveError("Every singleton value is zero; curvature is undefined")
    return _check_range(1.0 - best, 'curvature')


def effective_rate(tau: float, c: float) -> EffectiveRate:
    """
    Effective rate tau_eff = max{tau, 1 - c} and its bound 1 - exp(-tau_eff)

    Args:
        tau: Threshold in (0, 1]
        c: Curvature in [0, 1]

    Returns:
        EffectiveRate(tau_eff, bound)
    """
    if not 0.0 < tau <= 1.0:
        raise ParameterError(f"tau must lie in (0, 1], got {tau}")
    if not -CURVATURE_TOLERANCE <= c <= 1.0 + CURVATURE_TOLERANCE:
        raise ParameterError(f"Curvature must lie in [0, 1], got {c}")
    c = min(max(c, 0.0), 1.0)
    tau_eff = max(tau, 1.0 - c)
    return EffectiveRate(tau_eff, 1.0 - math.exp(-tau_eff))


def safe_threshold(report: CurvatureReport) -> float:
    """Largest tau for which ATCG keeps a single active element per partition: 1 - max_i c_i"""
    return 1.0 - max(report.c_partition)
