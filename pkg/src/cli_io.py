#!/usr/bin/env python3
"""
Command-line interface and result files
Builds problem instances from an experiment configuration, runs the chosen
algorithm and writes trajectory, communication and summary files.
Subcommands: gen, run, sweep, curvature, bound.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from comm_sim import (ADAPTIVE_ALGORITHMS, CommLedger, dominance_check, eta_stats_from_traces,
                      expected_comm_bound, ledger_from_trace, write_ledger_csv)
from curvature import CurvatureReport, brute_force_curvature, effective_rate, safe_threshold, total_curvature
from data_io import (balanced_partition_sizes, gen_synthetic, load_coverage, load_embeddings,
                     load_eta_stats, load_ratings, synthetic_points, write_embeddings_csv, write_eta_stats)
from errors import ConfigError, SubmodularToolkitError
from experiment_config import ExperimentConfig, ExperimentConfigManager, SyntheticSpec, validation_messages
from greedy_algorithms import RunTrace, run_algorithm
from ground_model import PartitionMatroid, new_ground, new_matroid
from objectives import (Embeddings, FacilityLocation, KernelMatrix, ModularObjective, SubmodularOracle,
                        WeightedCoverage, class_similarity, partition_similarity, rbf_kernel)
from worker_pool import WorkerPool

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DEFAULT_SWEEP_TAUS = (0.3, 0.5, 0.7, 0.9)
RESOLVED_CONFIG = 'resolved_config.json'

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def configure_logging(level: str = 'INFO', log_file: Optional[str] = None):
    """Root logger setup for the command line"""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT,
                        handlers=handlers, force=True)


@dataclass
class Instance:
    """Objective, matroid and the optional geometric data behind them"""
    objective: SubmodularOracle
    matroid: PartitionMatroid
    embeddings: Optional[Embeddings] = None
    kernel: Optional[KernelMatrix] = None
    labels: Optional[np.ndarray] = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    instance: Instance
    trace: RunTrace
    ledger: CommLedger
    curvature: Optional[CurvatureReport]
    summary: Dict[str, Any] = field(default_factory=dict)
    output_dir: Optional[Path] = None


def build_instance(cfg: ExperimentConfig) -> Instance:
    """
    Construct the objective and partition matroid an experiment runs on

    Args:
        cfg: Validated experiment configuration

    Returns:
        Instance ready for the algorithm layer
    """
    embeddings = kernel = labels = None
    if cfg.objective == 'facility_rbf':
        if cfg.synthetic is not None:
            embeddings = gen_synthetic(cfg.synthetic, cfg.sigma)
            _, labels = synthetic_points(cfg.synthetic)
        else:
            embeddings = load_embeddings(cfg.data_path, cfg.sigma)
        kernel = rbf_kernel(embeddings)
        objective: SubmodularOracle = FacilityLocation(kernel)
    elif cfg.objective == 'facility_rating':
        objective = load_ratings(cfg.data_path)
    elif cfg.objective == 'modular':
        objective = ModularObjective(cfg.weights)
    elif cfg.coverage_sets:
        objective = WeightedCoverage(cfg.coverage_sets, cfg.item_weights)
    else:
        objective = load_coverage(cfg.data_path, cfg.item_weights)

    n = objective.n
    if cfg.partition_sizes is not None:
        sizes = list(cfg.partition_sizes)
        if sum(sizes) != n:
            raise ConfigError([f"partition_sizes sum to {sum(sizes)}, objective has {n} elements"])
    elif cfg.partition_count is not None:
        sizes = balanced_partition_sizes(n, cfg.partition_count)
    elif cfg.synthetic is not None:
        sizes = [cfg.synthetic.points_per_cluster] * cfg.synthetic.clusters
    else:
        raise ConfigError(["partition_sizes or partition_count is required"])

    matroid = new_matroid(new_ground(sizes), cfg.budgets)
    logger.info(f"Instance built: {cfg.objective}, n={n}, partitions={sizes}, budgets={list(matroid.budgets)}")
    return Instance(objective, matroid, embeddings, kernel, labels)


def curvature_report(cfg: ExperimentConfig, instance: Instance) -> Optional[CurvatureReport]:
    """Curvature when n is within the configured cap and the objective supports it"""
    if instance.matroid.ground.n > cfg.curvature_cap:
        return None
    try:
        return total_curvature(instance.objective, instance.matroid.ground)
    except SubmodularToolkitError as e:
        logger.warning(f"Curvature not reported: {e}")
        return None


def _run_frames(trace: RunTrace, ledger: CommLedger) -> Dict[str, pd.DataFrame]:
    t = [record.t for record in trace.records]
    return {
        'trajectory.csv': pd.DataFrame({'t': t, 'F_value': [r.F_value for r in trace.records]}),
        'communication.csv': pd.DataFrame({'t': t, 'cum_embeddings': ledger.cum_embeddings}),
        'active.csv': pd.DataFrame({
            't': t,
            'total_active': [r.total_active for r in trace.records],
            'eta_min': [r.eta_min for r in trace.records],
        }),
    }


def build_summary(cfg: ExperimentConfig, instance: Instance, trace: RunTrace, ledger: CommLedger,
                  report: Optional[CurvatureReport]) -> Dict[str, Any]:
    """Values written to summary.json"""
    ground = instance.matroid.ground
    summary: Dict[str, Any] = {
        'final_F': trace.final_F,
        'rounded_set': trace.rounded_set.as_list(),
        'rounded_value': trace.rounded_value,
        'C_T': trace.C_T,
        'tau': cfg.tau,
        'T': cfg.T,
        'K': cfg.K,
        'seed': cfg.seed,
        'algorithm': trace.algorithm,
        'objective': cfg.objective,
        'n': ground.n,
        'N': ground.N,
        'initial_batch': ledger.initial_batch,
        'message_counts': ledger.message_counts(),
    }
    if report is not None:
        rate = effective_rate(cfg.tau, min(max(report.c_total, 0.0), 1.0))
        summary.update({
            'c_total': report.c_total,
            'c_partition': list(report.c_partition),
            'tau_star': report.tau_star,
            'safe_threshold': safe_threshold(report),
            'tau_eff': rate.tau_eff,
            'bound': rate.bound,
        })
    if instance.embeddings is not None:
        summary['payload_bytes'] = ledger.payload_bytes(instance.embeddings.dim, cfg.embedding_dim_bytes)
    if trace.algorithm in ADAPTIVE_ALGORITHMS and ledger.counterfactual_cg_union is not None:
        summary['dominance'] = dominance_check(trace)
    return summary


def write_results(result: ExperimentResult, output_dir: Path) -> Path:
    """Write every result file of one experiment into output_dir"""
    output_dir.mkdir(parents=True, exist_ok=True)
    for name, frame in _run_frames(result.trace, result.ledger).items():
        frame.to_csv(output_dir / name, index=False)
    write_ledger_csv(result.ledger, output_dir / 'messages.csv')

    instance = result.instance
    if instance.kernel is not None and instance.kernel.n_clients == instance.matroid.ground.n:
        if instance.labels is not None:
            coupling = class_similarity(instance.kernel, instance.labels)
            index_label = 'class'
        else:
            coupling = partition_similarity(instance.kernel, instance.matroid.ground)
            index_label = 'partition'
        pd.DataFrame(coupling).to_csv(output_dir / 'coupling.csv', index_label=index_label)

    with open(output_dir / 'summary.json', 'w') as f:
        json.dump(result.summary, f, indent=2)
    logger.info(f"Results written to {output_dir}")
    return output_dir


def execute_experiment(cfg: ExperimentConfig, instance: Optional[Instance] = None,
                       write: bool = True) -> ExperimentResult:
    """
    Run one configured experiment end to end

    Args:
        cfg: Validated configuration
        instance: Prebuilt instance (built from cfg when None)
        write: Write result files into cfg.output_dir

    Returns:
        ExperimentResult with trace, ledger, curvature and summary
    """
    if instance is None:
        instance = build_instance(cfg)
    trace = run_algorithm(cfg.algorithm, instance.objective, instance.matroid, cfg.run_config())
    ledger = ledger_from_trace(trace)
    report = curvature_report(cfg, instance)
    result = ExperimentResult(cfg, instance, trace, ledger, report)
    result.summary = build_summary(cfg, instance, trace, ledger, report)
    if write:
        result.output_dir = write_results(result, Path(cfg.output_dir))
    return result


def run_experiment(cfg: ExperimentConfig) -> int:
    """
    Run one experiment and report success as an exit code

    Args:
        cfg: Validated configuration

    Returns:
        0 on success, 2 for configuration problems, 1 for any other failure
    """
    try:
        result = execute_experiment(cfg)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except (SubmodularToolkitError, OSError) as e:
        logger.error(f"Experiment failed: {e}")
        return EXIT_RUNTIME
    logger.info(f"rounded_value={result.summary['rounded_value']:.6f}, C(T)={result.summary['C_T']}")
    return EXIT_OK


def sweep(cfg: ExperimentConfig, taus: Optional[Sequence[float]] = None) -> pd.DataFrame:
    """
    Run one isolated experiment per threshold

    Each tau writes into <output_dir>/tau_<tau>; a sweep_summary.csv with one
    row per tau goes into output_dir itself.

    Args:
        cfg: Base configuration
        taus: Thresholds (default: cfg.taus, else 0.3, 0.5, 0.7, 0.9)

    Returns:
        The sweep summary table
    """
    taus = list(taus or cfg.taus or DEFAULT_SWEEP_TAUS)
    base_dir = Path(cfg.output_dir)
    instance = build_instance(cfg)
    parallel = cfg.workers > 1 and len(taus) > 1

    def run_one(tau: float) -> Dict[str, Any]:
        member = cfg.model_copy(update={
            'tau': tau,
            'output_dir': str(base_dir / f"tau_{tau:g}"),
            'workers': 1 if parallel else cfg.workers,
        })
        result = execute_experiment(member, instance)
        logger.info(f"Sweep member tau={tau:g} finished: C(T)={result.trace.C_T}")
        return {
            'tau': tau,
            'rounded_value': result.trace.rounded_value,
            'final_F': result.trace.final_F,
            'C_T': result.trace.C_T,
            'tau_eff': result.summary.get('tau_eff', math.nan),
            'bound': result.summary.get('bound', math.nan),
        }

    with WorkerPool(cfg.workers if parallel else 1) as pool:
        rows = pool.map_ordered(run_one, taus)

    table = pd.DataFrame(rows, columns=['tau', 'rounded_value', 'final_F', 'C_T', 'tau_eff', 'bound'])
    base_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(base_dir / 'sweep_summary.csv', index=False)
    logger.info(f"Sweep over {len(taus)} thresholds written to {base_dir}")
    return table


def repeated_bound(cfg: ExperimentConfig, repeats: int) -> Dict[str, Any]:
    """
    Empirical expected-communication check from repeated seeded runs

    Runs seeds seed .. seed + repeats - 1, writes eta_stats.csv into
    output_dir and compares the bound with the observed communication.
    """
    if repeats < 2:
        raise ConfigError([f"--repeats must be at least 2, got {repeats}"])
    instance = build_instance(cfg)
    algorithm = cfg.algorithm if cfg.algorithm in ADAPTIVE_ALGORITHMS else 'atcg'
    traces = []
    cg_counts = []
    for r in range(repeats):
        member = cfg.model_copy(update={'seed': cfg.seed + r, 'algorithm': algorithm})
        trace = run_algorithm(algorithm, instance.objective, instance.matroid, member.run_config())
        traces.append(trace)
        ledger = ledger_from_trace(trace)
        cg_counts.append(int(ledger.cg_cum_embeddings[-1]))

    stats = eta_stats_from_traces(traces)
    write_eta_stats(stats, Path(cfg.output_dir) / 'eta_stats.csv')
    N = instance.matroid.ground.N
    observed = np.array([trace.C_T for trace in traces], dtype=float)
    gaussian_term = expected_comm_bound(stats, cfg.tau, cfg.T, N)
    return {
        'bound': min(gaussian_term, float(np.mean(cg_counts))),
        'gaussian_term': gaussian_term,
        'cg_mean_C_T': float(np.mean(cg_counts)),
        'observed_mean_C_T': float(observed.mean()),
        'observed_se_C_T': float(observed.std(ddof=1) / math.sqrt(repeats)),
        'repeats': repeats,
        'tau': cfg.tau,
        'T': cfg.T,
        'N': N,
    }


def _add_config_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--config', type=str, help='Path to a flat JSON experiment configuration')
    parser.add_argument('--objective', choices=['facility_rbf', 'facility_rating', 'modular', 'coverage'],
                        help='Objective family')
    parser.add_argument('--data-path', dest='data_path', type=str,
                        help='Embeddings (id,f0,...), ratings (user,item,rating) or coverage (element,item) CSV')
    parser.add_argument('--algorithm', choices=['sg', 'cg', 'atcg', 'atcg_general'], help='Algorithm to run')
    parser.add_argument('--T', type=int, help='Iteration horizon (default 100)')
    parser.add_argument('--tau', type=float, help='Expansion threshold in (0, 1] (default 0.5)')
    parser.add_argument('--K', type=int, help='Monte Carlo samples per gradient (default 100)')
    parser.add_argument('--seed', type=int, help='Experiment seed (default 0)')
    parser.add_argument('--gradient-mode', dest='gradient_mode', choices=['exact', 'monte_carlo'],
                        help='Gradient computation (default monte_carlo)')
    parser.add_argument('--sigma', type=float, help='RBF bandwidth for facility_rbf')
    parser.add_argument('--partition-sizes', dest='partition_sizes', type=int, nargs='+',
                        help='Contiguous partition sizes')
    parser.add_argument('--partition-count', dest='partition_count', type=int,
                        help='Number of balanced partitions when sizes are not given')
    parser.add_argument('--budgets', type=int, nargs='+', help='Per-partition budgets kappa_i (default 1)')
    parser.add_argument('--output-dir', dest='output_dir', type=str, help='Result directory (default results)')
    parser.add_argument('--workers', type=int, help='Worker threads (default 1)')
    parser.add_argument('--log-level', dest='log_level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Logging level (default INFO)')
    parser.add_argument('--log-file', dest='log_file', type=str, help='Also log to this file')
    parser.add_argument('--curvature-cap', dest='curvature_cap', type=int,
                        help='Largest n for which curvature is reported (default 256)')
    parser.add_argument('--taus', type=float, nargs='+', help='Thresholds for sweep')
    parser.add_argument('--embedding-dim-bytes', dest='embedding_dim_bytes', type=int,
                        help='Bytes per embedding coordinate (default 8)')


CONFIG_FIELDS = ('objective', 'data_path', 'algorithm', 'T', 'tau', 'K', 'seed', 'gradient_mode', 'sigma',
                 'partition_sizes', 'partition_count', 'budgets', 'output_dir', 'workers', 'log_level',
                 'log_file', 'curvature_cap', 'taus', 'embedding_dim_bytes')


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='run_experiment',
        description='Continuous greedy and adaptive thresholded continuous greedy over partition matroids')
    subparsers = parser.add_subparsers(dest='command', required=True, metavar='command')

    gen = subparsers.add_parser('gen', help='Generate a synthetic embeddings CSV')
    gen.add_argument('--config', type=str, help="JSON file whose 'synthetic' object seeds the defaults")
    gen.add_argument('--clusters', type=int)
    gen.add_argument('--points-per-cluster', dest='points_per_cluster', type=int)
    gen.add_argument('--dim', type=int)
    gen.add_argument('--cluster-spread', dest='cluster_spread', type=float)
    gen.add_argument('--inter-cluster-distance', dest='inter_cluster_distance', type=float)
    gen.add_argument('--assignment', choices=['random', 'clustered'],
                     help='Shuffle points across agents (random) or keep clusters contiguous')
    gen.add_argument('--seed', type=int)
    gen.add_argument('--out', type=str, default='embeddings.csv', help='Output CSV path')

    for name, text in (('run', 'Run one experiment and write result files'),
                       ('sweep', 'Run one experiment per threshold'),
                       ('curvature', 'Print the curvature report as JSON')):
        sub = subparsers.add_parser(name, help=text)
        _add_config_arguments(sub)
        if name == 'curvature':
            sub.add_argument('--brute-force', dest='brute_force', action='store_true',
                             help='Cross-check against exhaustive enumeration (n <= 12)')

    bound = subparsers.add_parser('bound', help='Evaluate the expected-communication bound')
    _add_config_arguments(bound)
    bound.add_argument('--stats', type=str, help='eta_stats.csv (partition,t,eta_bar,sigma)')
    bound.add_argument('--N', type=int, help='Number of partitions (with --stats)')
    bound.add_argument('--repeats', type=int, help='Seeded runs used to estimate the statistics (with --config)')
    return parser


def _manager(args: argparse.Namespace) -> ExperimentConfigManager:
    overrides = {name: getattr(args, name, None) for name in CONFIG_FIELDS}
    manager = ExperimentConfigManager(args.config, overrides)
    configure_logging(manager.config.log_level, manager.config.log_file)
    return manager


def _save_resolved(manager: ExperimentConfigManager) -> Path:
    """Keep the configuration a run actually used next to its results"""
    return manager.save_config(str(Path(manager.config.output_dir) / RESOLVED_CONFIG))


def _command_gen(args: argparse.Namespace) -> int:
    settings: Dict[str, Any] = {}
    if args.config:
        with open(args.config, 'r') as f:
            settings.update(json.load(f).get('synthetic') or {})
    for name in ('clusters', 'points_per_cluster', 'dim', 'cluster_spread', 'inter_cluster_distance', 'assignment',
                 'seed'):
        value = getattr(args, name)
        if value is not None:
            settings[name] = value
    try:
        spec = SyntheticSpec.model_validate(settings)
    except ValidationError as e:
        raise ConfigError(validation_messages(e))
    path = write_embeddings_csv(gen_synthetic(spec), args.out)
    print(str(path))
    return EXIT_OK


def _command_curvature(args: argparse.Namespace) -> int:
    cfg = _manager(args).config
    instance = build_instance(cfg)
    report = total_curvature(instance.objective, instance.matroid.ground)
    output = report.to_dict()
    if args.brute_force:
        ground = instance.matroid.ground
        output['brute_force'] = {
            'c_total': brute_force_curvature(instance.objective, ground),
            'c_partition': [brute_force_curvature(instance.objective, ground, ground.elements(i))
                            for i in range(ground.N)],
        }
    print(json.dumps(output, indent=2))
    return EXIT_OK


def _command_bound(args: argparse.Namespace) -> int:
    if args.stats:
        missing = [flag for flag, value in (('--tau', args.tau), ('--T', args.T), ('--N', args.N)) if value is None]
        if missing:
            raise ConfigError([f"bound --stats needs {', '.join(missing)}"])
        stats = load_eta_stats(args.stats)
        value = expected_comm_bound(stats, args.tau, args.T, args.N)
        print(json.dumps({'bound': value, 'tau': args.tau, 'T': args.T, 'N': args.N}))
        return EXIT_OK
    if not args.config:
        raise ConfigError(["bound needs either --stats or --config"])
    cfg = _manager(args).config
    print(json.dumps(repeated_bound(cfg, args.repeats or 20), indent=2))
    return EXIT_OK


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and run a subcommand

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        if args.command == 'gen':
            return _command_gen(args)
        if args.command == 'run':
            manager = _manager(args)
            code = run_experiment(manager.config)
            if code == EXIT_OK:
                _save_resolved(manager)
            return code
        if args.command == 'sweep':
            manager = _manager(args)
            sweep(manager.config)
            _save_resolved(manager)
            return EXIT_OK
        if args.command == 'curvature':
            return _command_curvature(args)
        return _command_bound(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except (SubmodularToolkitError, OSError, json.JSONDecodeError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUNTIME


def main() -> int:
    configure_logging()
    return cli_dispatch(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
