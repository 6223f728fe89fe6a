#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试信道旋转、嵌入旋转分析、原位延迟旋转帧与边缘旋转
"""

import sys
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src" / "py"))

from steps.step01_topology.tree_topology import RouterModel, build_tree
from steps.step02_state.local_operators import PAULI_LABELS
from steps.step02_state.register_layout import RegisterLayout
from steps.step02_state.sparse_state import fidelity_against_target_over_routers, tensor
from steps.step03_circuit.circuit_runner import (
    ideal_oracle_output, register_state, router_initial_state, run_circuit,
)
from steps.step03_circuit.query_circuit import build_query_circuit
from steps.step04_noise.channels import coherent_z, from_kraus, pauli_channel
from steps.step05_twirl.delayed_twirl import (
    dress_circuit, identity_frame, sample_twirl_frame, trace_flips,
)
from steps.step05_twirl.edge_twirl import (
    EdgeTwirlFactory, build_edge_twirled_circuit, memory_reshuffle,
)
from steps.step05_twirl.twirl_groups import (
    analyze_embedding_twirl, chi_matrix, pauli_group, pauli_rates, qutrit_bit_flip_candidates,
    random_channel, twirl_channel,
)


def _two_level_circuit(n: int, memory):
    tree = build_tree(n, RouterModel.from_name("two-level"))
    return build_query_circuit(tree, memory, doubled_layout=True)


# ---------- 信道旋转 ----------

def test_identity_chi():
    chi = chi_matrix(from_kraus([np.eye(2)]))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert np.allclose(chi, expected)


def test_pauli_channel_chi_is_diagonal():
    chi = chi_matrix(pauli_channel(0.1, 0.05, 0.02))
    assert np.allclose(chi, np.diag([0.83, 0.1, 0.05, 0.02]))


def test_twirled_random_channels_are_pauli():
    group = pauli_group()
    for seed in range(100):
        once = twirl_channel(random_channel(2, np.random.default_rng(seed)), group)
        chi = chi_matrix(once)
        off_diagonal = chi - np.diag(np.diag(chi))
        assert np.max(np.abs(off_diagonal)) < 1e-10, seed
        assert np.real(np.trace(chi)) == pytest.approx(1.0)
        assert np.allclose(chi_matrix(twirl_channel(once, group)), chi, atol=1e-10), seed


def test_coherent_twirl_rate():
    kappa = 0.05
    rates = pauli_rates(twirl_channel(coherent_z(kappa), pauli_group()))
    assert rates["Z"] == pytest.approx(np.sin(kappa) ** 2)
    assert rates["X"] == pytest.approx(0.0, abs=1e-12)


def test_twirl_idempotent():
    group = pauli_group()
    once = twirl_channel(random_channel(2, np.random.default_rng(5)), group)
    twice = twirl_channel(once, group)
    assert np.allclose(chi_matrix(once), chi_matrix(twice), atol=1e-10)


def test_pauli_channel_is_fixed_point():
    spec = pauli_channel(0.02, 0.03, 0.04)
    assert np.allclose(chi_matrix(twirl_channel(spec, pauli_group())), chi_matrix(spec), atol=1e-10)


def test_twirl_dimension_mismatch():
    with pytest.raises(ValueError):
        twirl_channel(random_channel(4, np.random.default_rng(0)), pauli_group())


def test_embedding_twirl_analysis():
    report = analyze_embedding_twirl(samples=5)
    assert len(report.group_labels) == 8
    assert report.max_outside_support < 1e-10
    assert report.fixed_point_deviation < 1e-10
    assert report.obstruction_confirmed


def test_qutrit_has_no_active_bit_flip():
    assert qutrit_bit_flip_candidates() == (0, 27)


# ---------- 原位延迟旋转 ----------

def test_frame_seed_reproducible():
    circuit = _two_level_circuit(2, (0, 1, 1, 0))
    first = sample_twirl_frame(circuit, 42)
    second = sample_twirl_frame(circuit, 42)
    assert first.layer_paulis == second.layer_paulis
    assert first.outer_pauli == second.outer_pauli
    assert first.dressing_swaps == second.dressing_swaps


def test_identity_frame():
    circuit = _two_level_circuit(1, (0, 1))
    frame = identity_frame(circuit)
    assert frame.is_identity
    assert np.allclose(frame.correction_matrix(), np.eye(4))
    assert not frame.dressing_swaps


def test_in_situ_rejects_three_level():
    circuit = build_query_circuit(build_tree(1), (0, 1), doubled_layout=True)
    with pytest.raises(ValueError):
        sample_twirl_frame(circuit, 0)


def test_z_only_frame_needs_no_dressing():
    circuit = _two_level_circuit(2, (1, 0, 0, 1))
    paulis = {(t, site): 'Z' for t in range(circuit.downstream_count) for site in circuit.layers[t].sites}
    pending, control_flips, dressing = trace_flips(circuit, paulis)
    assert pending == []
    assert control_flips == []
    assert dressing == []


def test_control_flip_dresses_router():
    circuit = _two_level_circuit(1, (0, 1))
    layout = circuit.layout
    # t=3 为根路由器的路由层，此时 c0 已吸收地址位
    pending, control_flips, dressing = trace_flips(circuit, {(3, layout.control_site(0)): 'X'})
    assert pending == []
    assert control_flips == [(3, 0)]
    assert dressing == [(3, 0)]


def test_frame_label_marginals_uniform():
    circuit = _two_level_circuit(1, (0, 1))
    layout = circuit.layout
    key = (0, layout.address_site(1))
    frames = 2000
    counts = Counter(sample_twirl_frame(circuit, seed).layer_paulis.get(key, 'I') for seed in range(frames))
    sigma = np.sqrt(0.25 * 0.75 / frames)
    for label in PAULI_LABELS:
        assert abs(counts[label] / frames - 0.25) <= 4 * sigma


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("init", ["all-zero", "random-basis"])
def test_dressed_circuits_retrieve(n, init):
    rng = np.random.default_rng(100 + n)
    memory = tuple(int(x) for x in rng.integers(0, 2, size=2 ** n))
    circuit = _two_level_circuit(n, memory)
    for seed in range(100):
        frame = sample_twirl_frame(circuit, seed)
        assert frame.ledger_closed
        dressed = dress_circuit(circuit, frame)
        layout = dressed.layout
        for i in range(len(memory)):
            psi = register_state(layout, {i: 1.0})
            routers = router_initial_state(layout, init, rng=rng)
            output = run_circuit(tensor(psi, routers), dressed)
            target = ideal_oracle_output(psi, memory, layout, dressed.output_site)
            fidelity = fidelity_against_target_over_routers(output, target)
            assert fidelity == pytest.approx(1.0, abs=1e-12), (seed, i)


# ---------- 边缘旋转 ----------

def test_memory_reshuffle():
    memory = (0, 0, 0, 0, 1, 1, 1, 1)
    assert memory_reshuffle(memory, ['X', 'I', 'I']) == (1, 1, 1, 1, 0, 0, 0, 0)
    assert memory_reshuffle(memory, ['Z', 'Z', 'I']) == memory
    shuffled = memory_reshuffle((0, 1, 1, 0, 1, 0, 0, 0), ['Y', 'X', 'I'])
    assert memory_reshuffle(shuffled, ['Y', 'X', 'I']) == (0, 1, 1, 0, 1, 0, 0, 0)


def test_memory_reshuffle_length_check():
    with pytest.raises(ValueError):
        memory_reshuffle((0, 1, 0), ['X', 'I'])


def test_identity_edge_frame_matches_plain_query():
    tree = build_tree(2)
    memory = (0, 1, 1, 1)
    layout = RegisterLayout.from_tree(tree)
    frame = {site: 'I' for site in range(layout.num_register_sites)}
    edge = build_edge_twirled_circuit(tree, memory, frame)
    plain = build_query_circuit(tree, memory)
    assert edge.tau == plain.tau
    assert edge.memory == plain.memory
    assert edge.metadata["reshuffled_memory"] == memory


def test_edge_frame_missing_site():
    tree = build_tree(1)
    layout = RegisterLayout.from_tree(tree)
    with pytest.raises(ValueError):
        build_edge_twirled_circuit(tree, (0, 1), {layout.address_site(1): 'X'})


@pytest.mark.parametrize("variant,init,doubled", [
    ("three-level", "all-wait", False),
    ("three-level", "all-wait", True),
    ("two-level", "random-basis", True),
])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_edge_twirled_queries_retrieve(variant, init, doubled, n):
    tree = build_tree(n, RouterModel.from_name(variant))
    rng = np.random.default_rng(20 + n)
    memory = tuple(int(x) for x in rng.integers(0, 2, size=2 ** n))
    factory = EdgeTwirlFactory(tree, memory, doubled=doubled)
    for _ in range(100):
        circuit = factory(rng)
        layout = circuit.layout
        for i in range(len(memory)):
            psi = register_state(layout, {i: 1.0})
            routers = router_initial_state(layout, init, rng=rng)
            output = run_circuit(tensor(psi, routers), circuit)
            target = ideal_oracle_output(psi, memory, layout, factory.output_site)
            assert fidelity_against_target_over_routers(output, target) == pytest.approx(1.0, abs=1e-12)
