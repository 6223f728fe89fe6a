#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试信道、错误率泛函、极分解、噪声模型、误差配置、好子空间与蒙特卡洛保真度估计
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src" / "py"))

from steps.step01_topology.tree_topology import RouterModel, build_tree
from steps.step02_state.local_operators import coherent_z as coherent_z_matrix
from steps.step02_state.register_layout import RegisterLayout
from steps.step02_state.sparse_state import basis_state
from steps.step03_circuit.circuit_runner import register_state, router_initial_state, uniform_addresses
from steps.step03_circuit.query_circuit import build_query_circuit
from steps.step04_noise.channels import (
    amplitude_damping, bit_flip, channel_for_rate, channel_from_declaration, coherent_z, depolarizing,
    error_rate, from_kraus, polar_split,
)
from steps.step04_noise.fidelity_estimator import estimate_query_fidelity
from steps.step04_noise.noise_model import (
    ErrorConfig, NoiseLocation, NoiseModel, branch_survival_probability, good_subspace, sample_config,
)
from steps.step06_oracle.exhaustive_oracle import exhaustive_chi_fidelity
from steps.step07_harness.oracle_checks import single_step_model


# ---------- 信道与错误率 ----------

def test_identity_channel_rate():
    assert error_rate(from_kraus([np.eye(2)])) == pytest.approx(0.0)


@pytest.mark.parametrize("p", [1e-3, 0.05, 0.2])
def test_depolarizing_rate(p):
    assert error_rate(depolarizing(p)) == pytest.approx(p)


@pytest.mark.parametrize("kappa", [0.01, 0.1, 0.4])
def test_coherent_rate(kappa):
    assert error_rate(coherent_z(kappa)) == pytest.approx(np.sin(kappa) ** 2)


def test_amplitude_damping_rate():
    assert error_rate(amplitude_damping(0.1)) == pytest.approx(0.1)


@pytest.mark.parametrize("kind", ["depolarizing", "pauli-x", "pauli-z", "coherent-z", "amplitude-damping"])
def test_channel_for_rate_hits_epsilon(kind):
    assert error_rate(channel_for_rate(kind, 3e-3)) == pytest.approx(3e-3)


def test_incomplete_kraus_rejected():
    with pytest.raises(ValueError):
        from_kraus([0.5 * np.eye(2)])


def test_channel_declaration():
    spec = channel_from_declaration({"kind": "coherent-z", "kappa": 0.03})
    assert spec.kappa == pytest.approx(0.03)
    pair = channel_from_declaration({"kind": "correlated-pauli", "p": 0.01, "labels": ["XX"]})
    assert pair.num_sites == 2
    with pytest.raises(ValueError):
        channel_from_declaration({"kind": "unknown"})


def test_lifted_kraus_stays_trace_preserving():
    spec = amplitude_damping(0.3)
    lifted = spec.lifted_kraus(3)
    assert np.allclose(sum(k.conj().T @ k for k in lifted), np.eye(3))


def test_polar_split_hermitian_positive():
    split = polar_split(np.diag([0.9, 0.5]))
    assert np.allclose(split.unitary, np.eye(2))
    assert split.kappa == pytest.approx(0.0, abs=1e-12)


def test_polar_split_unitary_input():
    split = polar_split(coherent_z_matrix(0.07))
    assert np.allclose(split.positive, np.eye(2))
    assert split.kappa == pytest.approx(0.07)


def test_polar_split_reconstructs():
    rng = np.random.default_rng(5)
    k0 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    k0 /= np.linalg.norm(k0, 2) * 1.1
    split = polar_split(k0)
    assert np.allclose(split.unitary @ split.positive, k0, atol=1e-12)


# ---------- 噪声模型 ----------

def test_per_router_locations_and_epsilon():
    tree = build_tree(2)
    layout = RegisterLayout.from_tree(tree)
    model = NoiseModel.per_router(tree, layout, depolarizing(1e-3))
    assert len(model.locations) == 3 * 2 + 4
    assert model.epsilon == pytest.approx(4e-3)
    assert model.is_bernoulli and model.is_stochastic
    assert not NoiseModel.per_router(tree, layout, coherent_z(0.01)).is_bernoulli


def test_disconnected_support_rejected():
    tree = build_tree(2)
    layout = RegisterLayout.from_tree(tree)
    declaration = [{"routers": [1, 2], "kind": "correlated-pauli", "p": 0.01, "labels": ["XX"]}]
    with pytest.raises(ValueError):
        NoiseModel.from_declaration(declaration, tree, layout)


def test_apply_sampled_forced_fire():
    spec = bit_flip(0.5)
    location = NoiseLocation((0,), (0,), spec)
    rng = np.random.default_rng(0)
    state = basis_state((3,), (0,))
    assert location.apply_sampled(state, rng, fire=False).amplitudes == state.amplitudes
    assert list(location.apply_sampled(state, rng, fire=True).amplitudes) == [(1,)]
    wait = basis_state((3,), (2,))
    assert list(location.apply_sampled(wait, rng, fire=True).amplitudes) == [(2,)]


def _leg_model(p):
    tree = build_tree(1, RouterModel.from_name("two-level"))
    layout = RegisterLayout.from_tree(tree)
    return NoiseModel.per_router(tree, layout, bit_flip(p))


def test_sample_config_extremes():
    assert not sample_config(_leg_model(0.0), 9, seed=1).chi.any()
    assert sample_config(_leg_model(1.0), 9, seed=1).chi.all()


def test_sample_config_statistics():
    p = 0.1
    config = sample_config(_leg_model(p), 24999, seed=2)
    count = config.chi.size
    assert count == 4 * 25000
    sigma = np.sqrt(p * (1 - p) / count)
    assert abs(config.chi.mean() - p) <= 4 * sigma


def _config_with_fault(model, tau, router):
    chi = np.zeros((len(model.locations), tau + 1), dtype=bool)
    if router is not None:
        row = next(j for j, loc in enumerate(model.locations) if loc.routers == (router,))
        chi[row, 3] = True
    return ErrorConfig(chi=chi)


def test_good_subspace_cases():
    tree = build_tree(2, RouterModel.from_name("two-level"))
    circuit = build_query_circuit(tree, (0, 1, 0, 1))
    model = NoiseModel.per_router(tree, circuit.layout, bit_flip(0.01))

    clean = good_subspace(_config_with_fault(model, circuit.tau, None), tree, circuit, model)
    assert clean.v_chi == frozenset(range(4))

    root = good_subspace(_config_with_fault(model, circuit.tau, 0), tree, circuit, model)
    assert root.v_chi == frozenset()

    left = good_subspace(_config_with_fault(model, circuit.tau, 1), tree, circuit, model)
    assert left.v_chi == frozenset({2, 3})
    # 左孩子的传播包络一直走到根
    assert left.v_prime == frozenset()


def test_good_subspace_rejects_wrong_width():
    tree = build_tree(1)
    circuit = build_query_circuit(tree, (0, 1))
    model = NoiseModel.per_router(tree, circuit.layout, bit_flip(0.01))
    with pytest.raises(ValueError):
        good_subspace(ErrorConfig(np.zeros((len(model.locations), 3), dtype=bool)), tree, circuit, model)


def test_branch_survival():
    tree = build_tree(1)
    layout = RegisterLayout.from_tree(tree)
    model = NoiseModel.per_router(tree, layout, bit_flip(0.1))
    assert branch_survival_probability(model, tree, 8, 0) == pytest.approx(0.9 ** (4 * 9))


# ---------- 蒙特卡洛估计 ----------

def test_zero_noise_estimate():
    tree = build_tree(2)
    circuit = build_query_circuit(tree, (1, 0, 0, 1))
    layout = circuit.layout
    model = NoiseModel.per_router(tree, layout, depolarizing(0.0))
    psi = register_state(layout, uniform_addresses(layout))
    estimate = estimate_query_fidelity(tree, circuit, model, psi, router_initial_state(layout, "all-wait"),
                                       trials=20, seed=1, workers=1)
    assert estimate.mean == pytest.approx(1.0)
    assert estimate.stderr == pytest.approx(0.0, abs=1e-12)


def test_estimate_reproducible():
    tree = build_tree(1)
    circuit = build_query_circuit(tree, (0, 1))
    layout = circuit.layout
    model = NoiseModel.per_router(tree, layout, depolarizing(0.1))
    psi = register_state(layout, uniform_addresses(layout))
    routers = router_initial_state(layout, "all-wait")
    first = estimate_query_fidelity(tree, circuit, model, psi, routers, trials=200, seed=9, workers=1)
    second = estimate_query_fidelity(tree, circuit, model, psi, routers, trials=200, seed=9, workers=1)
    assert first.mean == second.mean and first.stderr == second.stderr


def test_monte_carlo_matches_exhaustive():
    tree = build_tree(1)
    circuit = build_query_circuit(tree, (0, 1))
    layout = circuit.layout
    model = single_step_model(NoiseModel.per_router(tree, layout, depolarizing(0.2)), circuit.tau, seed=4)
    psi = register_state(layout, uniform_addresses(layout))
    routers = router_initial_state(layout, "all-wait")
    estimate = estimate_query_fidelity(tree, circuit, model, psi, routers, trials=4000, seed=4, workers=1)
    exact = exhaustive_chi_fidelity(circuit, model, psi, routers)
    assert abs(estimate.mean - exact) <= 4 * max(estimate.stderr, 1e-12)
