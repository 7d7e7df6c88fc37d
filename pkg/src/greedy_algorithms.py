#!/usr/bin/env python3
"""
Greedy algorithms over a partition matroid
Sequential Greedy, Continuous Greedy and the adaptive thresholded variant
(ATCG) for unit and general per-partition budgets, with progress ratios,
top-k selection, rounding and a brute-force reference optimum.
"""

import bisect
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from errors import CapacityError, DimensionError, ParameterError, PreconditionError
from ground_model import FeasibleSet, MembershipVector, PartitionMatroid, polytope_check
from multilinear import (ENUMERATION_LIMIT, ExactMultilinear, GradientEstimate, SampleConfig,
                         mc_gradient)
from objectives import SubmodularOracle
from worker_pool import WorkerPool

logger = logging.getLogger(__name__)

RATIO_EPSILON = 1e-12
BRUTE_FORCE_CAP = 10 ** 6

ALGORITHMS = ('sg', 'cg', 'atcg', 'atcg_general')


class GradientMode(str, Enum):
    EXACT = 'exact'
    MONTE_CARLO = 'monte_carlo'


@dataclass(frozen=True)
class RunConfig:
    """
    Parameters of a continuous greedy run

    Attributes:
        T: Iteration horizon (step size 1/T)
        tau: Expansion threshold in (0, 1]; ignored by continuous greedy
        sample: Monte Carlo sample count and seed
        gradient_mode: Exact enumeration or Monte Carlo sampling
        record_gradients: Keep each iteration's gradient (needed for dominance audits)
        record_snapshots: Keep x after every iteration
        workers: Threads used for Monte Carlo samples
        value_enumeration_limit: Largest n whose trajectory values are computed exactly
    """
    T: int = 100
    tau: float = 0.5
    sample: SampleConfig = field(default_factory=SampleConfig)
    gradient_mode: GradientMode = GradientMode.MONTE_CARLO
    record_gradients: bool = True
    record_snapshots: bool = False
    workers: int = 1
    value_enumeration_limit: int = ENUMERATION_LIMIT

    def __post_init__(self):
        if int(self.T) < 1:
            raise ParameterError(f"Horizon T must be >= 1, got {self.T}")
        if not 0.0 < float(self.tau) <= 1.0:
            raise ParameterError(f"Threshold tau must lie in (0, 1], got {self.tau}")
        if int(self.workers) < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if not 0 <= int(self.value_enumeration_limit) <= ENUMERATION_LIMIT:
            raise ParameterError(
                f"value_enumeration_limit must lie in [0, {ENUMERATION_LIMIT}], "
                f"got {self.value_enumeration_limit}")
        try:
            mode = GradientMode(self.gradient_mode)
        except ValueError:
            raise ParameterError(f"Unknown gradient mode '{self.gradient_mode}'")
        object.__setattr__(self, 'gradient_mode', mode)
        object.__setattr__(self, 'T', int(self.T))
        object.__setattr__(self, 'tau', float(self.tau))


class ActiveState:
    """Per-partition active sets A_i and the server embedding set E = union of A_i"""

    def __init__(self, partitions: int):
        self._active: List[List[int]] = [[] for _ in range(partitions)]
        self._members = set()
        self._embedding: List[int] = []

    def add(self, i: int, j: int):
        if j in self._members:
            raise PreconditionError(f"Element {j} is already active")
        bisect.insort(self._active[i], j)
        bisect.insort(self._embedding, j)
        self._members.add(j)

    def __contains__(self, j) -> bool:
        return j in self._members

    def members(self, i: int) -> np.ndarray:
        return np.asarray(self._active[i], dtype=np.int64)

    def size(self, i: int) -> int:
        return len(self._active[i])

    @property
    def total(self) -> int:
        return len(self._embedding)

    @property
    def active(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(a) for a in self._active)

    @property
    def embedding_set(self) -> Tuple[int, ...]:
        return tuple(self._embedding)


@dataclass(frozen=True, eq=False)
class IterationRecord:
    """
    State after one iteration

    Attributes:
        t: Iteration index, 0-based
        F_value: Objective proxy of x after the update
        cumulative_embeddings_uploaded: Embeddings on the server so far
        total_active: Sum of active set sizes
        active_sizes: |A_i| per partition
        eta: Progress ratio per partition before any expansion
        eta_after: Progress ratio per partition after expansion
        new_activations: (partition, element) uploads made this iteration, in order
        selections: Coordinates incremented per partition
        gradient: Gradient used this iteration, when recorded
        x_snapshot: x after the update, when recorded
        nonpositive_partitions: Partitions whose best top-k gradient sum was <= 0
        unrestored_partitions: Partitions left below tau with inactive elements remaining
            (only possible when the partition gradient is nonpositive)
    """
    t: int
    F_value: float
    cumulative_embeddings_uploaded: int
    total_active: int
    active_sizes: Tuple[int, ...]
    eta: Tuple[float, ...] = ()
    eta_after: Tuple[float, ...] = ()
    new_activations: Tuple[Tuple[int, int], ...] = ()
    selections: Tuple[Tuple[int, ...], ...] = ()
    gradient: Optional[np.ndarray] = None
    x_snapshot: Optional[np.ndarray] = None
    nonpositive_partitions: Tuple[int, ...] = ()
    unrestored_partitions: Tuple[int, ...] = ()

    @property
    def eta_min(self) -> float:
        return min(self.eta) if self.eta else math.nan


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Full record of one algorithm run"""
    algorithm: str
    matroid: PartitionMatroid
    records: Tuple[IterationRecord, ...]
    x_final: MembershipVector
    final_F: float
    rounded_set: FeasibleSet
    rounded_value: float
    active_sets: Tuple[Tuple[int, ...], ...]
    embedding_set: Tuple[int, ...]
    config: Optional[RunConfig] = None

    @property
    def T(self) -> int:
        return len(self.records)

    @property
    def C_T(self) -> int:
        """Embeddings uploaded over the whole run"""
        if not self.records:
            return 0
        return self.records[-1].cumulative_embeddings_uploaded

    def same_trajectory(self, other: "RunTrace") -> bool:
        """
        Bit-level comparison of two traces, ignoring the algorithm label

        Args:
            other: Trace to compare against

        Returns:
            True iff every recorded quantity and the final point are identical
        """
        if len(self.records) != len(other.records):
            return False
        if not np.array_equal(self.x_final.values, other.x_final.values):
            return False
        if self.rounded_set != other.rounded_set or self.active_sets != other.active_sets:
            return False
        for mine, theirs in zip(self.records, other.records):
            scalars = ('t', 'F_value', 'cumulative_embeddings_uploaded', 'total_active',
                       'active_sizes', 'eta', 'eta_after', 'new_activations', 'selections',
                       'nonpositive_partitions', 'unrestored_partitions')
            if any(getattr(mine, name) != getattr(theirs, name) for name in scalars):
                return False
            for name in ('gradient', 'x_snapshot'):
                a, b = getattr(mine, name), getattr(theirs, name)
                if (a is None) != (b is None):
                    return False
                if a is not None and not np.array_equal(a, b):
                    return False
        return True


class Optimum(NamedTuple):
    """Best feasible set and its value"""
    best_set: FeasibleSet
    value: float

    @property
    def fractional_bound(self) -> float:
        """max of F over the matroid polytope; an integral optimum attains it"""
        return self.value


def _gradient_values(g: Union[GradientEstimate, np.ndarray, Sequence[float]]) -> np.ndarray:
    if isinstance(g, GradientEstimate):
        return g.g
    return np.asarray(g, dtype=float)


def top_k(values: np.ndarray, candidates: Sequence[int], k: int) -> np.ndarray:
    """
    The k candidates with the largest values, lowest index first among ties

    Args:
        values: Full-length value vector
        candidates: Element indices to choose from
        k: Number to select (fewer are returned when there are fewer candidates)

    Returns:
        Selected indices in rank order
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if candidates.size == 0 or k <= 0:
        return np.empty(0, dtype=np.int64)
    order = np.lexsort((candidates, -values[candidates]))
    return candidates[order[:k]]


def progress_ratio_kappa(g: Union[GradientEstimate, np.ndarray], A_i: Sequence[int],
                         P_i: Sequence[int], kappa_i: int) -> float:
    """
    Top-kappa gradient mass inside A_i relative to the whole partition

    Returns 0 for an empty A_i. When the partition's top-kappa sum is positive
    and its top-kappa elements all lie in A_i the ratio is exactly 1.

    Args:
        g: Gradient covering every element of P_i
        A_i: Active set, a subset of P_i
        P_i: Partition elements
        kappa_i: Budget of the partition

    Returns:
        sum of top-kappa over A_i / (sum of top-kappa over P_i + 1e-12)
    """
    if kappa_i < 1:
        raise ParameterError(f"Budget must be >= 1, got {kappa_i}")
    values = _gradient_values(g)
    partition = np.asarray(P_i, dtype=np.int64)
    active = np.asarray(A_i, dtype=np.int64)
    if not set(active.tolist()) <= set(partition.tolist()):
        raise PreconditionError("Active set is not contained in its partition")
    if active.size == 0:
        return 0.0
    if np.any(np.isnan(values[partition])):
        raise PreconditionError("Gradient does not cover every element of the partition")

    best_partition = top_k(values, partition, kappa_i)
    denominator = float(values[best_partition].sum())
    if denominator > 0 and set(best_partition.tolist()) <= set(active.tolist()):
        return 1.0
    numerator = float(values[top_k(values, active, kappa_i)].sum())
    return numerator / (denominator + RATIO_EPSILON)


def progress_ratio(g: Union[GradientEstimate, np.ndarray], A_i: Sequence[int], P_i: Sequence[int]) -> float:
    """Best active gradient entry over the best partition entry (+1e-12); 0 if A_i is empty"""
    return progress_ratio_kappa(g, A_i, P_i, 1)


def round_topk(x: MembershipVector, m: PartitionMatroid) -> FeasibleSet:
    """
    Partition-wise argmax rounding

    Args:
        x: Point in the matroid polytope
        m: Partition matroid

    Returns:
        Per partition, the kappa_i largest positive coordinates
    """
    if not polytope_check(x, m):
        raise PreconditionError("Cannot round a point outside the matroid polytope")
    chosen: List[int] = []
    for part, kappa in zip(m.ground.partitions, m.budgets):
        elements = np.arange(part.start, part.stop)
        positive = elements[x.values[elements] > 0]
        chosen.extend(top_k(x.values, positive, kappa).tolist())
    return FeasibleSet(tuple(chosen))


def _check_dimensions(f: SubmodularOracle, m: PartitionMatroid):
    if f.n != m.ground.n:
        raise DimensionError(f"Objective has {f.n} elements, ground set has {m.ground.n}")


def sequential_greedy_run(f: SubmodularOracle, m: PartitionMatroid) -> RunTrace:
    """
    Sequential Greedy recorded as a trace, one record per selected element

    Args:
        f: Monotone submodular oracle
        m: Partition matroid

    Returns:
        RunTrace whose rounded set is the greedy solution
    """
    _check_dimensions(f, m)
    ground = m.ground
    remaining = np.asarray(m.budgets, dtype=np.int64).copy()
    mask = np.zeros(ground.n, dtype=bool)
    state = ActiveState(ground.N)
    records: List[IterationRecord] = []

    while True:
        open_partitions = np.flatnonzero(remaining > 0)
        candidates = np.flatnonzero(~mask & np.isin(ground.partition_index, open_partitions))
        if candidates.size == 0:
            break
        with_j, without_j = f.gain_pairs(mask, candidates)
        gains = np.full(ground.n, -np.inf)
        gains[candidates] = with_j - without_j
        j = int(top_k(gains, candidates, 1)[0])
        if gains[j] <= 0:
            logger.debug(f"Greedy stops: best remaining gain {gains[j]:.3e}")
            break

        i = ground.partition_of(j)
        mask[j] = True
        remaining[i] -= 1
        state.add(i, j)
        selections = tuple((j,) if p == i else () for p in range(ground.N))
        records.append(IterationRecord(
            t=len(records),
            F_value=f.evaluate(state.embedding_set),
            cumulative_embeddings_uploaded=state.total,
            total_active=state.total,
            active_sizes=tuple(state.size(p) for p in range(ground.N)),
            new_activations=((i, j),),
            selections=selections,
        ))

    chosen = FeasibleSet(state.embedding_set)
    value = f.evaluate(chosen)
    x_final = MembershipVector(mask.astype(float))
    logger.info(f"Sequential greedy selected {len(chosen)} elements, value {value:.6f}")
    return RunTrace(
        algorithm='sg',
        matroid=m,
        records=tuple(records),
        x_final=x_final,
        final_F=value,
        rounded_set=chosen,
        rounded_value=value,
        active_sets=state.active,
        embedding_set=state.embedding_set,
    )


def sequential_greedy(f: SubmodularOracle, m: PartitionMatroid) -> FeasibleSet:
    """Greedy by largest marginal gain (ties to lowest index) until no positive gain or no budget"""
    return sequential_greedy_run(f, m).rounded_set


class _ContinuousGreedyRun:
    """
    Shared state of one continuous greedy run

    x is held as integer increment counts, x = counts / T, so partition sums
    are exact multiples of 1/T.
    """

    def __init__(self, f: SubmodularOracle, m: PartitionMatroid, cfg: RunConfig, algorithm: str):
        _check_dimensions(f, m)
        self.f = f
        self.m = m
        self.cfg = cfg
        self.algorithm = algorithm
        self.ground = m.ground
        self.counts = np.zeros(self.ground.n, dtype=np.int64)
        self.state = ActiveState(self.ground.N)
        self.records: List[IterationRecord] = []

        self.exact: Optional[ExactMultilinear] = None
        if cfg.gradient_mode is GradientMode.EXACT:
            self.exact = ExactMultilinear(f)
        self.value_model = self.exact
        if self.value_model is None and self.ground.n <= cfg.value_enumeration_limit:
            self.value_model = ExactMultilinear(f, limit=cfg.value_enumeration_limit)

        self.pool: Optional[WorkerPool] = None
        if cfg.gradient_mode is GradientMode.MONTE_CARLO and cfg.workers > 1:
            self.pool = WorkerPool(cfg.workers)

        logger.info(f"Starting {algorithm}: n={self.ground.n}, N={self.ground.N}, "
                    f"T={cfg.T}, tau={cfg.tau}, mode={cfg.gradient_mode.value}")

    @property
    def x(self) -> MembershipVector:
        return MembershipVector(self.counts / self.cfg.T)

    def partition_elements(self, i: int) -> np.ndarray:
        return self.ground.elements(i)

    def gradient(self, t: int) -> np.ndarray:
        """Gradient at the current x, R drawn over the embedding set"""
        support = self.state.embedding_set
        if self.exact is not None:
            return self.exact.gradient(self.x, support=support).g
        estimate = mc_gradient(self.x, self.f, self.cfg.sample, support=support,
                               round_index=t, pool=self.pool)
        return estimate.g

    def objective_value(self) -> float:
        x = self.x
        if self.value_model is not None:
            return self.value_model.value(x)
        return self.f.evaluate(round_topk(x, self.m))

    def activate(self, i: int, j: int, uploads: List[Tuple[int, int]]):
        self.state.add(i, j)
        uploads.append((i, j))

    def ratio(self, g: np.ndarray, i: int) -> float:
        return progress_ratio_kappa(g, self.state.members(i), self.partition_elements(i), self.m.budgets[i])

    def nonpositive(self, g: np.ndarray, i: int) -> bool:
        best = top_k(g, self.partition_elements(i), self.m.budgets[i])
        return float(g[best].sum()) <= 0.0

    def step(self, t: int, g: np.ndarray, selections: List[np.ndarray], eta: List[float],
             eta_after: List[float], uploads: List[Tuple[int, int]], flagged: List[int],
             unrestored: Sequence[int] = ()):
        for chosen in selections:
            self.counts[chosen] += 1
        if flagged:
            logger.warning(f"t={t}: nonpositive gradients in partitions {flagged}; ratio taken literally")
        if unrestored:
            logger.warning(f"t={t}: partitions {list(unrestored)} stay below tau={self.cfg.tau} after expansion")
        self.records.append(IterationRecord(
            t=t,
            F_value=self.objective_value(),
            cumulative_embeddings_uploaded=self.state.total,
            total_active=self.state.total,
            active_sizes=tuple(self.state.size(i) for i in range(self.ground.N)),
            eta=tuple(eta),
            eta_after=tuple(eta_after),
            new_activations=tuple(uploads),
            selections=tuple(tuple(int(j) for j in chosen) for chosen in selections),
            gradient=g.copy() if self.cfg.record_gradients else None,
            x_snapshot=self.x.values if self.cfg.record_snapshots else None,
            nonpositive_partitions=tuple(flagged),
            unrestored_partitions=tuple(unrestored),
        ))

    def finish(self) -> RunTrace:
        if self.pool is not None:
            self.pool.shutdown()
        x_final = self.x
        if not polytope_check(x_final, self.m):
            raise PreconditionError(f"{self.algorithm} left the matroid polytope")
        outside = set(x_final.support.tolist()) - set(self.state.embedding_set)
        if outside:
            raise PreconditionError(f"{self.algorithm} put mass on elements never uploaded: {sorted(outside)}")
        rounded = round_topk(x_final, self.m)
        rounded_value = self.f.evaluate(rounded)
        final_F = self.records[-1].F_value if self.records else self.objective_value()
        logger.info(f"{self.algorithm} finished: F={final_F:.6f}, rounded value={rounded_value:.6f}, "
                    f"C(T)={self.state.total}")
        return RunTrace(
            algorithm=self.algorithm,
            matroid=self.m,
            records=tuple(self.records),
            x_final=x_final,
            final_F=final_F,
            rounded_set=rounded,
            rounded_value=rounded_value,
            active_sets=self.state.active,
            embedding_set=self.state.embedding_set,
            config=self.cfg,
        )

    def abort(self):
        if self.pool is not None:
            self.pool.shutdown(wait=False)


def continuous_greedy(f: SubmodularOracle, m: PartitionMatroid, cfg: RunConfig) -> RunTrace:
    """
    Discretized continuous greedy with the per-partition top-k linear oracle

    Each iteration estimates the full gradient, adds 1/T to the kappa_i best
    coordinates of every partition and uploads an embedding the first time a
    coordinate becomes nonzero.

    Args:
        f: Monotone submodular oracle
        m: Partition matroid
        cfg: Run parameters (tau is ignored)

    Returns:
        RunTrace of the T iterations
    """
    run = _ContinuousGreedyRun(f, m, cfg, 'cg')
    try:
        for t in range(cfg.T):
            g = run.gradient(t)
            eta, eta_after, selections, uploads, flagged = [], [], [], [], []
            for i in range(run.ground.N):
                eta.append(run.ratio(g, i))
                if run.nonpositive(g, i):
                    flagged.append(i)
                chosen = top_k(g, run.partition_elements(i), m.budgets[i])
                for j in sorted(int(j) for j in chosen):
                    if j not in run.state:
                        run.activate(i, j, uploads)
                eta_after.append(run.ratio(g, i))
                selections.append(chosen)
            run.step(t, g, selections, eta, eta_after, uploads, flagged)
    except Exception:
        run.abort()
        raise
    return run.finish()


def atcg(f: SubmodularOracle, m: PartitionMatroid, cfg: RunConfig) -> RunTrace:
    """
    Adaptive thresholded continuous greedy for unit budgets

    Per iteration and partition: if the progress ratio is below tau and the
    active set is not the whole partition, the best inactive element is
    activated (one upload); then the best active element receives 1/T.

    Args:
        f: Monotone submodular oracle
        m: Partition matroid with every budget equal to 1
        cfg: Run parameters

    Returns:
        RunTrace of the T iterations
    """
    if any(kappa != 1 for kappa in m.budgets):
        logger.info("Budgets above 1 present, running the general-budget variant")
        return atcg_general(f, m, cfg)

    run = _ContinuousGreedyRun(f, m, cfg, 'atcg')
    try:
        for t in range(cfg.T):
            g = run.gradient(t)
            eta, eta_after, selections, uploads, flagged, unrestored = [], [], [], [], [], []
            for i in range(run.ground.N):
                partition = run.partition_elements(i)
                eta_i = run.ratio(g, i)
                eta.append(eta_i)
                if run.nonpositive(g, i):
                    flagged.append(i)
                if eta_i < cfg.tau and run.state.size(i) < partition.size:
                    inactive = partition[[j not in run.state for j in partition.tolist()]]
                    j = int(top_k(g, inactive, 1)[0])
                    run.activate(i, j, uploads)
                    logger.debug(f"t={t}: partition {i} activates {j} (eta={eta_i:.4f})")
                eta_after.append(run.ratio(g, i))
                if eta_after[-1] < cfg.tau and run.state.size(i) < partition.size:
                    unrestored.append(i)
                selections.append(top_k(g, run.state.members(i), 1))
            run.step(t, g, selections, eta, eta_after, uploads, flagged, unrestored)
    except Exception:
        run.abort()
        raise
    return run.finish()


def atcg_general(f: SubmodularOracle, m: PartitionMatroid, cfg: RunConfig) -> RunTrace:
    """
    Adaptive thresholded continuous greedy for budgets kappa_i >= 1

    The inner loop activates the best inactive element until the generalized
    ratio reaches tau and at least kappa_i elements are active, or the
    partition is exhausted. With a nonpositive partition gradient the ratio
    carries no signal and the loop stops after one activation. The kappa_i
    best active entries then receive 1/T each.

    Args:
        f: Monotone submodular oracle
        m: Partition matroid
        cfg: Run parameters

    Returns:
        RunTrace of the T iterations
    """
    run = _ContinuousGreedyRun(f, m, cfg, 'atcg_general')
    try:
        for t in range(cfg.T):
            g = run.gradient(t)
            eta, eta_after, selections, uploads, flagged, unrestored = [], [], [], [], [], []
            for i in range(run.ground.N):
                partition = run.partition_elements(i)
                kappa = m.budgets[i]
                degenerate = run.nonpositive(g, i)
                if degenerate:
                    flagged.append(i)
                eta_i = run.ratio(g, i)
                eta.append(eta_i)

                added = 0
                while run.state.size(i) < partition.size:
                    if run.state.size(i) >= kappa:
                        if eta_i >= cfg.tau or (degenerate and added):
                            break
                    inactive = partition[[j not in run.state for j in partition.tolist()]]
                    j = int(top_k(g, inactive, 1)[0])
                    run.activate(i, j, uploads)
                    added += 1
                    eta_i = run.ratio(g, i)
                    logger.debug(f"t={t}: partition {i} activates {j} (eta now {eta_i:.4f})")
                eta_after.append(eta_i)
                if eta_i < cfg.tau and run.state.size(i) < partition.size:
                    unrestored.append(i)
                selections.append(top_k(g, run.state.members(i), kappa))
            run.step(t, g, selections, eta, eta_after, uploads, flagged, unrestored)
    except Exception:
        run.abort()
        raise
    return run.finish()


def run_algorithm(algorithm: str, f: SubmodularOracle, m: PartitionMatroid,
                  cfg: Optional[RunConfig] = None) -> RunTrace:
    """Dispatch by algorithm name: sg, cg, atcg or atcg_general"""
    if algorithm == 'sg':
        return sequential_greedy_run(f, m)
    if cfg is None:
        cfg = RunConfig()
    runners = {'cg': continuous_greedy, 'atcg': atcg, 'atcg_general': atcg_general}
    if algorithm not in runners:
        raise ParameterError(f"Unknown algorithm '{algorithm}', expected one of {ALGORITHMS}")
    return runners[algorithm](f, m, cfg)


def _partition_choices(elements: range, kappa: int) -> List[Tuple[int, ...]]:
    choices: List[Tuple[int, ...]] = []
    for size in range(kappa + 1):
        choices.extend(itertools.combinations(elements, size))
    return choices


def brute_force_optimum(f: SubmodularOracle, m: PartitionMatroid, cap: int = BRUTE_FORCE_CAP) -> Optimum:
    """
    Exhaustive search over every feasible set

    Args:
        f: Set-function oracle
        m: Partition matroid
        cap: Largest number of candidate sets to enumerate

    Returns:
        Optimum with the first strictly best set in enumeration order
    """
    _check_dimensions(f, m)
    total = 1
    for part, kappa in zip(m.ground.partitions, m.budgets):
        total *= sum(math.comb(len(part), k) for k in range(kappa + 1))
    if total > cap:
        raise CapacityError(f"Brute force would enumerate {total} sets (cap {cap})")

    per_partition = [_partition_choices(part, kappa) for part, kappa in zip(m.ground.partitions, m.budgets)]
    best: Tuple[int, ...] = ()
    best_value = f.evaluate(())
    for combo in itertools.product(*per_partition):
        members = tuple(itertools.chain.from_iterable(combo))
        value = f.evaluate(members)
        if value > best_value:
            best, best_value = members, value
    logger.debug(f"Brute force over {total} sets: best value {best_value:.6f}")
    return Optimum(FeasibleSet(best), best_value)


def algorithm_summary(trace: RunTrace) -> Dict[str, object]:
    """Headline numbers of a trace"""
    return {
        'algorithm': trace.algorithm,
        'final_F': trace.final_F,
        'rounded_set': trace.rounded_set.as_list(),
        'rounded_value': trace.rounded_value,
        'C_T': trace.C_T,
    }
