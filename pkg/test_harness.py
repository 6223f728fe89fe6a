#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试实验配置校验、标度拟合、扫描输出与旋转对比
"""

import csv
import json
import sys
from pathlib import Path
from types import SimpleNamespace

import pytest

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src" / "py"))

from steps.step07_harness.experiment_config import ExperimentConfig, InvalidExperiment
from steps.step07_harness.ghz_experiment import ghz_coherent_experiment
from steps.step07_harness.scaling_fit import fit_scaling_exponent
from steps.step07_harness.sweep_runner import (
    SWEEP_HEADER, cell_seed, rows_from_csv, run_reset_free, run_sweep, twirl_compare,
)


def _synthetic_rows(exponent: float, c: float = 1e-4, n_values=(1, 2, 3, 4)):
    rows = []
    for n in n_values:
        infid = c * (n + 1) ** exponent
        rows.append(SimpleNamespace(n=n, mean=1.0 - infid, stderr=1e-3 * infid))
    return rows


# ---------- 配置 ----------

@pytest.mark.parametrize("kwargs", [
    {"variant": "two-level", "init": "all-wait"},
    {"twirl": "in-situ"},
    {"init": "random-basis"},
    {"variant": "five-level"},
    {"n_min": 3, "n_max": 2},
    {"epsilons": [1.5]},
])
def test_invalid_experiments(kwargs):
    with pytest.raises(InvalidExperiment):
        ExperimentConfig(**kwargs).validate()


def test_unknown_experiment_key():
    with pytest.raises(InvalidExperiment):
        ExperimentConfig.from_dict({"experiment": {"bogus": 1}})


def test_from_dict_sections():
    config = ExperimentConfig.from_dict({
        "experiment": {"n_max": 2, "epsilons": [0.01]},
        "simulation": {"workers": 3, "slack_sigma": 2.5},
        "output": {"dir": "out"},
    })
    assert config.n_values == [1, 2]
    assert config.workers == 3
    assert config.slack_sigma == 2.5
    assert config.output_dir == "out"


def test_normalized_turns_on_doubling():
    config = ExperimentConfig(variant="two-level", init="random-basis").normalized()
    assert config.doubling
    in_situ = ExperimentConfig(variant="two-level", init="all-zero", twirl="in-situ").normalized()
    assert in_situ.doubling


def test_cell_seed_depends_on_cell():
    assert cell_seed(7, 1, 0) == cell_seed(7, 1, 0)
    assert cell_seed(7, 1, 0) != cell_seed(7, 2, 0)
    assert cell_seed(7, 1, 0) != cell_seed(7, 1, 1)


# ---------- 标度拟合 ----------

@pytest.mark.parametrize("exponent", [2.0, 4.0])
def test_fit_recovers_exponent(exponent):
    fit = fit_scaling_exponent(_synthetic_rows(exponent), samples=200)
    assert fit.exponent == pytest.approx(exponent, abs=1e-6)
    assert fit.ci_low <= fit.exponent <= fit.ci_high


def test_fit_separation():
    steep = fit_scaling_exponent(_synthetic_rows(4.0), samples=200)
    shallow = fit_scaling_exponent(_synthetic_rows(2.0), samples=200)
    assert steep.separated_above(shallow)
    assert not shallow.separated_above(steep)


def test_fit_rejects_duplicate_depth():
    rows = _synthetic_rows(2.0) + _synthetic_rows(2.0, n_values=(1,))
    with pytest.raises(ValueError):
        fit_scaling_exponent(rows)


def test_fit_needs_three_points():
    with pytest.raises(ValueError):
        fit_scaling_exponent(_synthetic_rows(2.0, n_values=(1, 2)))


def test_fit_rejects_noisy_rows():
    rows = _synthetic_rows(2.0)
    rows[0].stderr = 0.5 * (1.0 - rows[0].mean)
    with pytest.raises(ValueError):
        fit_scaling_exponent(rows)


# ---------- 扫描 ----------

def _zero_noise_config(tmp_path, **kwargs) -> ExperimentConfig:
    base = dict(n_min=1, n_max=2, epsilons=[0.0], trials=5, workers=1, seed=11, output_dir=str(tmp_path))
    base.update(kwargs)
    return ExperimentConfig(**base)


def test_zero_noise_sweep(tmp_path):
    result = run_sweep(_zero_noise_config(tmp_path), workers=1)
    assert [row.n for row in result.rows] == [1, 2]
    for row in result.rows:
        assert row.mean == pytest.approx(1.0)
        assert row.bound == 0.0
        assert row.satisfied
        assert row.bound_name == "theorem1"
    assert result.violations() == []


def test_sweep_is_reproducible(tmp_path):
    config = _zero_noise_config(tmp_path, epsilons=[0.02], n_max=1, trials=20)
    first = run_sweep(config, workers=1)
    second = run_sweep(config, workers=1)
    assert [r.mean for r in first.rows] == [r.mean for r in second.rows]
    assert [r.circuit_hash for r in first.rows] == [r.circuit_hash for r in second.rows]


def test_depolarizing_sweep_within_bound(tmp_path):
    config = _zero_noise_config(tmp_path, epsilons=[1e-3, 1e-2], noise_kind="depolarizing", trials=200)
    result = run_sweep(config, workers=1)
    assert len(result.rows) == 4
    assert all(row.bound_name == "theorem1" for row in result.rows)
    assert all(0.0 < row.bound for row in result.rows)
    assert result.violations() == []


@pytest.mark.parametrize("init", ["random-basis", "random-phase"])
def test_doubled_two_level_sweep_within_bound(tmp_path, init):
    config = _zero_noise_config(tmp_path, variant="two-level", init=init, doubling=True,
                                epsilons=[3e-3], noise_kind="pauli-x", trials=200)
    result = run_sweep(config, workers=1)
    assert all(row.bound_name == "theorem3" for row in result.rows)
    assert result.violations() == []


@pytest.mark.parametrize("variant,init,twirl,bound_name", [
    ("two-level", "all-zero", "in-situ", "theorem5_insitu"),
    ("three-level", "all-wait", "edge-classical", "theorem5_classical"),
])
def test_twirled_coherent_sweep_within_bound(tmp_path, variant, init, twirl, bound_name):
    config = _zero_noise_config(tmp_path, variant=variant, init=init, twirl=twirl, epsilons=[1e-5],
                                noise_kind="coherent-z", trials=100)
    result = run_sweep(config, workers=1)
    assert all(row.bound_name == bound_name for row in result.rows)
    assert all(row.bound < 1.0 for row in result.rows)
    assert result.violations() == []


def test_sweep_write_and_read_back(tmp_path):
    result = run_sweep(_zero_noise_config(tmp_path), workers=1)
    csv_path, json_path = result.write()
    with open(csv_path, 'r', encoding='utf-8') as f:
        assert next(csv.reader(f)) == SWEEP_HEADER
    rows = rows_from_csv(str(csv_path))
    assert len(rows) == len(result.rows)
    assert rows[0].satisfied is True
    assert rows[0].n == 1
    with open(json_path, 'r', encoding='utf-8') as f:
        sidecar = json.load(f)
    assert sidecar["seed"] == 11
    assert sidecar["violations"] == 0
    assert len(sidecar["circuit_hashes"]) == 2


def test_twirl_compare_zero_noise(tmp_path):
    config = _zero_noise_config(tmp_path, variant="two-level", init="all-zero", noise_kind="coherent-z", n_max=1)
    result = twirl_compare(config, modes=("none", "in-situ"), workers=1)
    assert sorted(row.twirl for row in result.rows) == ["in-situ", "none"]
    assert all(row.doubling for row in result.rows)
    for row in result.rows:
        assert row.mean == pytest.approx(1.0)
    by_mode = {row.twirl: row for row in result.rows}
    assert by_mode["in-situ"].bound_name == "theorem5_insitu"
    assert by_mode["none"].bound_name == "theorem2"


def test_edge_twirl_sweep(tmp_path):
    config = _zero_noise_config(tmp_path, twirl="edge-classical", n_max=1)
    result = run_sweep(config, workers=1)
    assert result.rows[0].mean == pytest.approx(1.0)
    assert result.rows[0].bound_name == "theorem5_classical"


def test_reset_free_queries(tmp_path):
    config = _zero_noise_config(tmp_path, variant="two-level", init="all-zero", doubling=True, trials=3)
    estimates = run_reset_free(config, n=1, eps=0.0, queries=2)
    assert len(estimates) == 2
    assert all(e.mean == pytest.approx(1.0) for e in estimates)


def test_sweep_without_sidecar(tmp_path):
    result = run_sweep(_zero_noise_config(tmp_path, n_max=1, write_sidecar=False), workers=1)
    csv_path, json_path = result.write()
    assert csv_path.exists()
    assert json_path is None
    assert not (tmp_path / "sweep.json").exists()


def test_ghz_experiment_rows(tmp_path):
    config = _zero_noise_config(tmp_path, n_max=1)
    report = ghz_coherent_experiment(config, kappa=1e-3)
    assert set(report.results()) == {"coherent", "stochastic"}
    for result in report.results().values():
        assert all(row.bound_name == "theorem4" for row in result.rows)
        assert all(row.satisfied for row in result.rows)
        assert all(row.stderr == 0.0 and row.trials == 0 for row in result.rows)
    # 单个深度点无法拟合
    assert report.coherent_fit is None
    assert not report.separated


def test_ghz_zero_kappa_is_exact(tmp_path):
    report = ghz_coherent_experiment(_zero_noise_config(tmp_path, n_max=3), kappa=0.0)
    for result in report.results().values():
        assert all(row.mean == pytest.approx(1.0, abs=1e-12) for row in result.rows)
    assert report.violations() == []


def test_ghz_coherent_exponent_exceeds_stochastic(tmp_path):
    """sin²κ = 1e-8 使 κ·τ·n 在 n <= 5 时仍远小于 1"""
    config = _zero_noise_config(tmp_path, n_min=2, n_max=5, bootstrap_samples=200)
    report = ghz_coherent_experiment(config)
    assert report.violations() == []
    assert [row.n for row in report.coherent.rows] == [2, 3, 4, 5]
    gap = report.coherent_fit.exponent - report.stochastic_fit.exponent
    assert gap >= 1.0
    assert report.coherent_fit.ci_low > report.stochastic_fit.ci_high
    assert report.separated
    ratios = report.ratios()
    assert all(later > earlier for earlier, later in zip(ratios, ratios[1:]))
    assert report.to_dict()["separated"] is True


def test_ghz_experiment_needs_fixed_init(tmp_path):
    config = _zero_noise_config(tmp_path, variant="two-level", init="random-basis", doubling=True)
    with pytest.raises(InvalidExperiment):
        ghz_coherent_experiment(config)


def test_ghz_experiment_rejects_large_kappa(tmp_path):
    with pytest.raises(ValueError):
        ghz_coherent_experiment(_zero_noise_config(tmp_path, n_max=1), kappa=0.5)
