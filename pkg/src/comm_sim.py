#!/usr/bin/env python3
"""
Server-assisted communication accounting
Rebuilds the message log of a run, tracks the counterfactual continuous
greedy picks for the dominance audit and evaluates the expected
communication bound under the Gaussian progress-ratio model.
"""

import dataclasses
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import ndtr

from errors import CapabilityError, DimensionError, FormatError, ParameterError
from greedy_algorithms import RunTrace, top_k

logger = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-9
ADAPTIVE_ALGORITHMS = ('atcg', 'atcg_general')


class EventKind(str, Enum):
    EMBEDDING_UPLOAD = 'embedding_upload'
    X_UPLOAD = 'x_upload'
    BROADCAST = 'broadcast'


@dataclass(frozen=True)
class CommEvent:
    """One logical message between an agent and the server"""
    t: int
    kind: EventKind
    agent: int
    element: Optional[int] = None
    payload_units: int = 1


@dataclass(frozen=True, eq=False)
class CommLedger:
    """
    Message log of one run

    Attributes:
        events: Messages in protocol order
        horizon: Number of iterations T
        n_agents: Number of agents N
        cum_embeddings: Embeddings on the server after each iteration
        initial_batch: Uploads made at t = 0
        counterfactual_cg_union: Per partition, the union of continuous greedy picks
            computed from the recorded gradients (None without gradients)
        cg_cum_embeddings: Prefix sizes of that union (None without gradients)
    """
    events: Tuple[CommEvent, ...]
    horizon: int
    n_agents: int
    cum_embeddings: np.ndarray
    initial_batch: int = 0
    counterfactual_cg_union: Optional[Tuple[Tuple[int, ...], ...]] = None
    cg_cum_embeddings: Optional[np.ndarray] = None

    @property
    def C_T(self) -> int:
        return int(self.cum_embeddings[-1]) if self.cum_embeddings.size else 0

    @property
    def after_initial_batch(self) -> int:
        """Uploads from t = 1 onwards"""
        return self.C_T - self.initial_batch

    def message_count(self, kind: Optional[EventKind] = None) -> int:
        if kind is None:
            return len(self.events)
        return sum(1 for event in self.events if event.kind == kind)

    def payload_units(self, kind: Optional[EventKind] = None) -> int:
        return sum(event.payload_units for event in self.events if kind is None or event.kind == kind)

    def payload_bytes(self, dim: int, bytes_per_value: int = 8) -> int:
        """Bytes of embedding payload uploaded, for d-dimensional embeddings"""
        if dim < 1 or bytes_per_value < 1:
            raise ParameterError("Embedding dimension and value width must be positive")
        return self.payload_units(EventKind.EMBEDDING_UPLOAD) * dim * bytes_per_value

    def message_counts(self) -> Dict[str, int]:
        return {kind.value: self.message_count(kind) for kind in EventKind}


def _counterfactual_union(trace: RunTrace) -> Tuple[List[set], np.ndarray]:
    ground = trace.matroid.ground
    union: List[set] = [set() for _ in range(ground.N)]
    prefix = np.zeros(len(trace.records), dtype=np.int64)
    for t, record in enumerate(trace.records):
        g = record.gradient
        for i in range(ground.N):
            picks = top_k(g, ground.elements(i), trace.matroid.budgets[i])
            union[i].update(int(j) for j in picks)
        prefix[t] = sum(len(u) for u in union)
    return union, prefix


def ledger_from_trace(trace: RunTrace) -> CommLedger:
    """
    Rebuild the message log of a run

    Per iteration each new activation is one embedding upload, each agent
    sends one x update carrying its incremented coordinates, and the server
    broadcasts the embeddings added since the previous round to every agent.

    Args:
        trace: Completed run

    Returns:
        CommLedger with prefix embedding counts
    """
    ground = trace.matroid.ground
    events: List[CommEvent] = []
    cumulative = np.zeros(len(trace.records), dtype=np.int64)
    uploaded = set()

    for position, record in enumerate(trace.records):
        if record.t != position:
            raise FormatError(f"Record {position} carries t={record.t}; iterations must be sequential")
        for agent, element in record.new_activations:
            if element in uploaded:
                raise FormatError(f"Element {element} uploaded twice (t={record.t})")
            if not 0 <= agent < ground.N or ground.partition_of(element) != agent:
                raise FormatError(f"Element {element} uploaded by agent {agent} that does not own it")
            uploaded.add(element)
            events.append(CommEvent(record.t, EventKind.EMBEDDING_UPLOAD, agent, element, 1))
        for agent, chosen in enumerate(record.selections):
            if chosen:
                events.append(CommEvent(record.t, EventKind.X_UPLOAD, agent, None, len(chosen)))
        for agent in range(ground.N):
            events.append(CommEvent(record.t, EventKind.BROADCAST, agent, None, len(record.new_activations)))

        cumulative[position] = len(uploaded)
        if record.cumulative_embeddings_uploaded != cumulative[position]:
            raise FormatError(
                f"t={record.t}: trace reports {record.cumulative_embeddings_uploaded} uploads, "
                f"message log has {cumulative[position]}")

    if trace.algorithm in ADAPTIVE_ALGORITHMS and trace.records:
        active_total = sum(len(a) for a in trace.active_sets)
        if cumulative[-1] != active_total:
            raise FormatError(f"C(T) = {cumulative[-1]} differs from the active set total {active_total}")

    union = prefix = None
    if trace.records and all(record.gradient is not None for record in trace.records):
        sets, prefix = _counterfactual_union(trace)
        union = tuple(tuple(sorted(s)) for s in sets)

    initial = len(trace.records[0].new_activations) if trace.records else 0
    logger.debug(f"Ledger for {trace.algorithm}: {len(events)} messages, C(T)={len(uploaded)}")
    return CommLedger(
        events=tuple(events),
        horizon=len(trace.records),
        n_agents=ground.N,
        cum_embeddings=cumulative,
        initial_batch=initial,
        counterfactual_cg_union=union,
        cg_cum_embeddings=prefix,
    )


def dominance_check(trace: RunTrace) -> bool:
    """
    Audit that the adaptive run never communicated more than continuous greedy would

    The counterfactual picks are the per-partition top-kappa entries of the
    same gradient the run used at each iteration.

    Args:
        trace: Run with recorded gradients

    Returns:
        True iff A_i(T) lies in the union of picks for every i and
        C_ATCG(t) <= C_CG(t) for every prefix t
    """
    if not trace.records:
        return True
    if any(record.gradient is None for record in trace.records):
        raise CapabilityError("Dominance audit needs the gradient of every iteration")

    union, prefix = _counterfactual_union(trace)
    for t, record in enumerate(trace.records):
        if record.cumulative_embeddings_uploaded > prefix[t]:
            logger.info(f"Dominance fails at t={t}: {record.cumulative_embeddings_uploaded} > {prefix[t]}")
            return False
    for i, active in enumerate(trace.active_sets):
        if not set(active) <= union[i]:
            logger.info(f"Dominance fails: partition {i} activated {sorted(set(active) - union[i])}")
            return False
    return True


def gaussian_cdf(z: float) -> float:
    """Standard normal CDF"""
    return float(ndtr(z))


@dataclass(frozen=True, eq=False)
class EtaStats:
    """
    Gaussian model of the progress ratios

    Attributes:
        eta_bar: T x N nominal ratios, row t for iteration t
        sigma: Per-partition standard deviation, > 0
        floored: Partitions whose sigma was raised to the floor
    """
    eta_bar: np.ndarray
    sigma: np.ndarray
    floored: Tuple[int, ...] = ()

    def __post_init__(self):
        eta_bar = np.array(self.eta_bar, dtype=float)
        sigma = np.array(self.sigma, dtype=float)
        if eta_bar.ndim != 2 or sigma.ndim != 1 or eta_bar.shape[1] != sigma.shape[0]:
            raise DimensionError(f"eta_bar {eta_bar.shape} and sigma {sigma.shape} do not match")
        if not np.all(np.isfinite(eta_bar)) or not np.all(np.isfinite(sigma)):
            raise ParameterError("Progress ratio statistics must be finite")
        if np.any(sigma <= 0):
            raise ParameterError("Every sigma_i must be positive")
        eta_bar.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, 'eta_bar', eta_bar)
        object.__setattr__(self, 'sigma', sigma)

    @property
    def T(self) -> int:
        return int(self.eta_bar.shape[0])

    @property
    def N(self) -> int:
        return int(self.eta_bar.shape[1])


def expected_comm_bound(stats: EtaStats, tau: float, T: int, N: int,
                        cg_expected: Optional[float] = None) -> float:
    """
    Expected communication of ATCG under the Gaussian ratio model

    Args:
        stats: Nominal ratios and per-partition spread
        tau: Threshold
        T: Horizon, > 1
        N: Number of partitions
        cg_expected: Expected C_CG(T); when given the smaller term is returned

    Returns:
        N + sum over t = 1..T-1 and i of Phi((tau - eta_bar_i(t)) / sigma_i)
    """
    if T <= 1:
        raise ParameterError(f"Horizon must exceed 1, got T={T}")
    if N != stats.N:
        raise DimensionError(f"Statistics cover {stats.N} partitions, bound requested for N={N}")
    if stats.T < T:
        raise ParameterError(f"Statistics cover {stats.T} iterations, bound needs {T}")
    z = (tau - stats.eta_bar[1:T]) / stats.sigma[None, :]
    bound = N + float(ndtr(z).sum())
    if cg_expected is not None:
        bound = min(bound, float(cg_expected))
    return bound


def _seedless(trace: RunTrace):
    if trace.config is None:
        raise ParameterError(f"{trace.algorithm} trace has no run configuration")
    cfg = trace.config
    return (trace.algorithm, trace.matroid.ground.sizes, trace.matroid.budgets,
            dataclasses.replace(cfg, sample=dataclasses.replace(cfg.sample, seed=0)))


def eta_stats_from_traces(traces: Sequence[RunTrace]) -> EtaStats:
    """
    Empirical ratio statistics from repeated seeded runs

    Args:
        traces: At least two runs whose configurations differ only in the seed

    Returns:
        EtaStats with per-(t, i) mean of the pre-expansion ratios and the
        pooled per-partition standard deviation
    """
    if len(traces) < 2:
        raise ParameterError(f"Need at least 2 traces, got {len(traces)}")
    reference = _seedless(traces[0])
    for trace in traces[1:]:
        if _seedless(trace) != reference:
            raise ParameterError("Traces differ in more than the seed")

    etas = np.array([[record.eta for record in trace.records] for trace in traces], dtype=float)
    if etas.ndim != 3 or etas.shape[1] == 0 or etas.shape[2] == 0:
        raise ParameterError("Traces carry no progress ratios")
    eta_bar = etas.mean(axis=0)
    sigma = np.sqrt(etas.var(axis=0, ddof=1).mean(axis=0))

    floored = tuple(int(i) for i in np.flatnonzero(sigma <= 0))
    if floored:
        logger.warning(f"Zero ratio variance in partitions {list(floored)}; sigma floored at {SIGMA_FLOOR}")
        sigma = np.where(sigma <= 0, SIGMA_FLOOR, sigma)
    return EtaStats(eta_bar, sigma, floored)


def write_ledger_csv(ledger: CommLedger, path: Union[str, Path]) -> Path:
    """Write messages.csv: t,kind,agent,element,payload_units"""
    path = Path(path)
    frame = pd.DataFrame(
        [(e.t, e.kind.value, e.agent, e.element, e.payload_units) for e in ledger.events],
        columns=['t', 'kind', 'agent', 'element', 'payload_units'],
    )
    frame['element'] = frame['element'].astype('Int64')
    frame.to_csv(path, index=False)
    logger.info(f"Message log written to {path}")
    return path
