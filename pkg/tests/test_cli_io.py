#!/usr/bin/env python3
"""
Tests for the command line and the result files
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from cli_io import (EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, RESOLVED_CONFIG, build_instance, cli_dispatch,
                    execute_experiment, sweep)
from comm_sim import EtaStats
from data_io import write_embeddings_csv, write_eta_stats
from errors import ConfigError
from experiment_config import ExperimentConfig, ExperimentConfigManager
from objectives import Embeddings

ROOT = Path(__file__).resolve().parents[1]
DEMO_CONFIG = str(ROOT / 'demo' / 'config.json')


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


def demo_config(output_dir, **overrides) -> ExperimentConfig:
    return ExperimentConfigManager(DEMO_CONFIG, {'output_dir': str(output_dir), **overrides}).config


def stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestRun:

    def test_demo_run_writes_results(self, tmp_path):
        out = tmp_path / 'out'
        assert cli_dispatch(['run', '--config', DEMO_CONFIG, '--output-dir', str(out)]) == EXIT_OK
        for name in ('trajectory.csv', 'communication.csv', 'active.csv', 'messages.csv', 'summary.json'):
            assert (out / name).exists()

        summary = json.loads((out / 'summary.json').read_text())
        assert summary['rounded_value'] == 5.0
        assert summary['rounded_set'] == [0, 2]
        assert summary['C_T'] == 2
        assert summary['initial_batch'] == 2
        assert summary['dominance'] is True
        assert summary['c_total'] == 0.0
        assert summary['tau_eff'] == 1.0

        trajectory = pd.read_csv(out / 'trajectory.csv')
        assert list(trajectory['t']) == list(range(10))
        assert np.all(np.diff(trajectory['F_value']) >= -1e-12)
        assert trajectory['F_value'].iloc[-1] == pytest.approx(5.0, abs=1e-9)
        communication = pd.read_csv(out / 'communication.csv')
        assert list(communication['cum_embeddings']) == [2] * 10
        active = pd.read_csv(out / 'active.csv')
        assert list(active.columns) == ['t', 'total_active', 'eta_min']

    def test_summary_matches_trace(self, tmp_path):
        result = execute_experiment(demo_config(tmp_path), write=False)
        assert result.output_dir is None
        assert result.summary['rounded_value'] == result.trace.rounded_value
        assert result.summary['C_T'] == result.trace.C_T == result.ledger.C_T
        assert result.summary['final_F'] == result.trace.final_F

    def test_synthetic_facility_writes_coupling(self, tmp_path):
        settings = {
            'objective': 'facility_rbf', 'sigma': 1.0, 'algorithm': 'atcg', 'T': 5, 'K': 10,
            'gradient_mode': 'exact', 'output_dir': str(tmp_path / 'out'),
            'synthetic': {'clusters': 2, 'points_per_cluster': 3, 'dim': 2, 'seed': 1, 'cluster_spread': 0.5,
                          'inter_cluster_distance': 3.0, 'assignment': 'random'},
        }
        config = tmp_path / 'config.json'
        config.write_text(json.dumps(settings))
        assert cli_dispatch(['run', '--config', str(config)]) == EXIT_OK
        coupling = pd.read_csv(tmp_path / 'out' / 'coupling.csv', index_col='class')
        assert coupling.shape == (2, 2)
        assert coupling.iloc[0, 0] > coupling.iloc[0, 1]
        assert coupling.iloc[1, 1] > coupling.iloc[1, 0]
        assert coupling.iloc[0, 1] == pytest.approx(coupling.iloc[1, 0])
        summary = json.loads((tmp_path / 'out' / 'summary.json').read_text())
        assert summary['n'] == 6 and summary['N'] == 2
        assert summary['payload_bytes'] == summary['C_T'] * 2 * 8

    def test_loaded_embeddings_write_partition_coupling(self, tmp_path):
        data = tmp_path / 'emb.csv'
        write_embeddings_csv(Embeddings(np.array([[0.0], [0.1], [1.0], [1.1]]), 0.5), data)
        argv = ['run', '--objective', 'facility_rbf', '--data-path', str(data), '--sigma', '0.5',
                '--partition-sizes', '2', '2', '--T', '5', '--gradient-mode', 'exact',
                '--output-dir', str(tmp_path / 'out')]
        assert cli_dispatch(argv) == EXIT_OK
        coupling = pd.read_csv(tmp_path / 'out' / 'coupling.csv', index_col='partition')
        assert coupling.shape == (2, 2)

    def test_run_saves_resolved_config(self, tmp_path):
        out = tmp_path / 'out'
        argv = ['run', '--config', DEMO_CONFIG, '--tau', '0.6', '--output-dir', str(out)]
        assert cli_dispatch(argv) == EXIT_OK
        saved = ExperimentConfigManager(str(out / RESOLVED_CONFIG)).config
        assert saved.model_dump() == demo_config(out, tau=0.6).model_dump()

    def test_failed_run_saves_no_config(self, tmp_path):
        argv = ['run', '--config', DEMO_CONFIG, '--budgets', '3', '1', '--output-dir', str(tmp_path)]
        assert cli_dispatch(argv) == EXIT_RUNTIME
        assert not (tmp_path / RESOLVED_CONFIG).exists()

    def test_malformed_ratings_exit_one(self, tmp_path):
        data = tmp_path / 'ratings.csv'
        data.write_text("user,item,rating\n0,0,4\n0,1,3,7\n1,0,5\n")
        argv = ['run', '--objective', 'facility_rating', '--data-path', str(data),
                '--partition-sizes', '1', '1', '--output-dir', str(tmp_path / 'out')]
        assert cli_dispatch(argv) == EXIT_RUNTIME

    def test_undecodable_embeddings_exit_one(self, tmp_path):
        data = tmp_path / 'emb.csv'
        data.write_bytes(b"id,f0\n0,1.0\n1,\xff\n")
        argv = ['run', '--objective', 'facility_rbf', '--data-path', str(data), '--sigma', '1.0',
                '--partition-sizes', '1', '1', '--output-dir', str(tmp_path / 'out')]
        assert cli_dispatch(argv) == EXIT_RUNTIME

    def test_partition_sizes_must_cover_objective(self, tmp_path):
        cfg = demo_config(tmp_path, partition_sizes=[2, 1])
        with pytest.raises(ConfigError):
            build_instance(cfg)

    def test_construction_failure_exits_one(self, tmp_path):
        argv = ['run', '--config', DEMO_CONFIG, '--budgets', '3', '1', '--output-dir', str(tmp_path)]
        assert cli_dispatch(argv) == EXIT_RUNTIME

    def test_missing_config_exits_two(self, tmp_path):
        assert cli_dispatch(['run', '--config', str(tmp_path / 'absent.json')]) == EXIT_USAGE

    def test_invalid_override_exits_two(self, tmp_path):
        argv = ['run', '--config', DEMO_CONFIG, '--tau', '1.5', '--output-dir', str(tmp_path)]
        assert cli_dispatch(argv) == EXIT_USAGE


class TestParser:

    def test_unknown_command(self):
        assert cli_dispatch(['optimize']) == EXIT_USAGE

    def test_no_command(self):
        assert cli_dispatch([]) == EXIT_USAGE

    def test_help(self, capsys):
        assert cli_dispatch(['--help']) == EXIT_OK
        assert 'sweep' in capsys.readouterr().out


class TestSweep:

    def test_sweep_writes_member_directories(self, tmp_path):
        out = tmp_path / 'sweep'
        assert cli_dispatch(['sweep', '--config', DEMO_CONFIG, '--output-dir', str(out)]) == EXIT_OK
        for tau in ('0.3', '0.5', '0.7', '0.9'):
            assert (out / f"tau_{tau}" / 'summary.json').exists()
        table = pd.read_csv(out / 'sweep_summary.csv')
        assert list(table['tau']) == [0.3, 0.5, 0.7, 0.9]
        assert list(table['C_T']) == [2, 2, 2, 2]
        assert list(table['rounded_value']) == [5.0] * 4
        saved = ExperimentConfigManager(str(out / RESOLVED_CONFIG)).config
        assert saved.model_dump() == demo_config(out).model_dump()

    def test_parallel_sweep_matches_serial(self, tmp_path):
        serial = sweep(demo_config(tmp_path / 'serial'), [0.2, 0.6])
        parallel = sweep(demo_config(tmp_path / 'parallel', workers=2), [0.2, 0.6])
        pd.testing.assert_frame_equal(serial, parallel)


class TestCurvatureCommand:

    def test_prints_report(self, capsys):
        assert cli_dispatch(['curvature', '--config', DEMO_CONFIG, '--brute-force']) == EXIT_OK
        report = stdout_json(capsys)
        assert report['c_total'] == 0.0
        assert report['c_partition'] == [0.0, 0.0]
        assert report['safe_threshold'] == 1.0
        assert report['brute_force']['c_total'] == 0.0


class TestBoundCommand:

    def test_from_stats_file(self, tmp_path, capsys):
        stats = EtaStats(np.full((10, 3), 0.4), np.full(3, 0.2))
        path = write_eta_stats(stats, tmp_path / 'eta_stats.csv')
        argv = ['bound', '--stats', str(path), '--tau', '0.4', '--T', '10', '--N', '3']
        assert cli_dispatch(argv) == EXIT_OK
        assert stdout_json(capsys)['bound'] == pytest.approx(3 + 9 * 3 * 0.5, abs=1e-9)

    def test_stats_needs_horizon(self, tmp_path):
        stats = EtaStats(np.full((4, 1), 0.4), np.full(1, 0.2))
        path = write_eta_stats(stats, tmp_path / 'eta_stats.csv')
        assert cli_dispatch(['bound', '--stats', str(path), '--tau', '0.4', '--N', '1']) == EXIT_USAGE

    def test_needs_a_source(self):
        assert cli_dispatch(['bound', '--tau', '0.4']) == EXIT_USAGE

    def test_repeated_runs(self, tmp_path, capsys):
        argv = ['bound', '--config', DEMO_CONFIG, '--repeats', '3', '--output-dir', str(tmp_path)]
        assert cli_dispatch(argv) == EXIT_OK
        result = stdout_json(capsys)
        assert result['bound'] == pytest.approx(2.0, abs=1e-9)
        assert result['observed_mean_C_T'] == 2.0
        assert result['cg_mean_C_T'] == 2.0
        assert (tmp_path / 'eta_stats.csv').exists()

    def test_single_repeat_is_rejected(self, tmp_path):
        argv = ['bound', '--config', DEMO_CONFIG, '--repeats', '1', '--output-dir', str(tmp_path)]
        assert cli_dispatch(argv) == EXIT_USAGE


class TestGenCommand:

    def test_writes_embeddings(self, tmp_path, capsys):
        out = tmp_path / 'emb.csv'
        argv = ['gen', '--clusters', '2', '--points-per-cluster', '3', '--dim', '2', '--seed', '9',
                '--out', str(out)]
        assert cli_dispatch(argv) == EXIT_OK
        assert capsys.readouterr().out.strip() == str(out)
        frame = pd.read_csv(out)
        assert list(frame.columns) == ['id', 'f0', 'f1']
        assert list(frame['id']) == list(range(6))

    def test_reads_synthetic_block(self, tmp_path):
        out = tmp_path / 'emb.csv'
        assert cli_dispatch(['gen', '--config', str(ROOT / 'config.json'), '--out', str(out)]) == EXIT_OK
        assert len(pd.read_csv(out)) == 180

    def test_invalid_synthetic_settings(self, tmp_path):
        assert cli_dispatch(['gen', '--clusters', '0', '--out', str(tmp_path / 'emb.csv')]) == EXIT_USAGE
