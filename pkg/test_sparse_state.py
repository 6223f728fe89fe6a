#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试稀疏纯态引擎：基矢编码、CSWAP/路由门、局部门与 Kraus 分支、路由器求迹保真度
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src" / "py"))

from steps.step01_topology.tree_topology import build_tree
from steps.step02_state.local_operators import PAULI, coherent_z, lift_operator
from steps.step02_state.register_layout import RegisterLayout
from steps.step02_state.sparse_state import (
    SparseState, ZeroWeightBranch, apply_cswap, apply_local_kraus, apply_local_unitary,
    apply_routing_unitary, basis_state, fidelity_against_target_over_routers, measure_register, tensor,
)
from steps.step03_circuit.circuit_runner import register_state, router_initial_state
from utils.constants import WAIT

INV_SQRT2 = 1 / np.sqrt(2)


def _depth_one():
    tree = build_tree(1)
    return tree, RegisterLayout.from_tree(tree)


def test_layout_order():
    """a1 B c0 h0 L0 L1"""
    _, layout = _depth_one()
    labels = [layout.site_label(s) for s in range(layout.num_sites)]
    assert labels == ["a1", "B", "c0", "h0", "L0", "L1"]
    assert layout.router_of_site(layout.leg_site(1)) == 0


def test_plus_bus_encoding():
    tree = build_tree(3)
    layout = RegisterLayout.from_tree(tree)
    state = register_state(layout, {0: 1.0})
    assert state.support_size == 2
    for amp in state.amplitudes.values():
        assert amp == pytest.approx(INV_SQRT2)


def test_all_wait_routers_single_entry():
    tree = build_tree(2)
    layout = RegisterLayout.from_tree(tree)
    routers = router_initial_state(layout, "all-wait")
    assert routers.support_size == 1
    assert set(next(iter(routers.amplitudes))) == {WAIT}


def test_invalid_digit_on_qubit_site():
    with pytest.raises(ValueError):
        SparseState((2, 3), {(3, 0): 1.0})
    with pytest.raises(ValueError):
        SparseState((2, 3), {(0, 3): 1.0})


def test_normalize_zero_state():
    with pytest.raises(ZeroWeightBranch):
        SparseState((2,)).normalize()


def test_cswap_semantics():
    state = basis_state((3, 3, 3), (1, 0, 1))
    swapped = apply_cswap(state, 0, 1, 2, control_value=1)
    assert list(swapped.amplitudes) == [(1, 1, 0)]


def test_cswap_wait_control_idles():
    state = basis_state((3, 3, 3), (WAIT, 0, 1))
    for value in (0, 1):
        assert apply_cswap(state, 0, 1, 2, control_value=value).amplitudes == state.amplitudes


def test_cswap_is_involution():
    rng = np.random.default_rng(3)
    keys = [tuple(int(d) for d in rng.integers(0, 3, size=4)) for _ in range(6)]
    state = SparseState((3,) * 4, {k: complex(rng.normal(), rng.normal()) for k in keys}).normalize()
    twice = apply_cswap(apply_cswap(state, 0, 2, 3, 1), 0, 2, 3, 1)
    assert twice.amplitudes == state.amplitudes


def test_routing_control_zero():
    """(c=0, h=ψ, L0=W, L1=W) -> (0, W, ψ, W)"""
    tree, layout = _depth_one()
    state = basis_state(layout, (0, 0, 0, 1, WAIT, WAIT))
    routed = apply_routing_unitary(state, layout, tree, 0)
    assert list(routed.amplitudes) == [(0, 0, 0, WAIT, 1, WAIT)]


def test_routing_wait_control_idles():
    tree, layout = _depth_one()
    state = basis_state(layout, (0, 0, WAIT, 1, 0, WAIT))
    assert apply_routing_unitary(state, layout, tree, 0).amplitudes == state.amplitudes


def test_routing_control_one():
    """(c=1, h=ψ, L0=φ, L1=W) -> (1, W, φ, ψ)"""
    tree, layout = _depth_one()
    state = basis_state(layout, (0, 0, 1, 1, 0, WAIT))
    routed = apply_routing_unitary(state, layout, tree, 0)
    assert list(routed.amplitudes) == [(0, 0, 1, WAIT, 0, 1)]


def test_x_on_wait_is_identity():
    state = basis_state((3,), (WAIT,))
    assert apply_local_unitary(state, 0, PAULI['X']).amplitudes == state.amplitudes


def test_z_power_zero_is_identity():
    state = SparseState((2,), {(0,): INV_SQRT2, (1,): INV_SQRT2})
    result = apply_local_unitary(state, 0, np.linalg.matrix_power(PAULI['Z'], 0))
    assert result.amplitudes == pytest.approx(state.amplitudes)


def test_coherent_rotation_phases():
    kappa = 0.2
    state = SparseState((2,), {(0,): INV_SQRT2, (1,): INV_SQRT2})
    rotated = apply_local_unitary(state, 0, coherent_z(kappa))
    assert rotated.amplitudes[(0,)] == pytest.approx(np.exp(1j * kappa) * INV_SQRT2)
    assert rotated.amplitudes[(1,)] == pytest.approx(np.exp(-1j * kappa) * INV_SQRT2)


def test_non_unitary_rejected():
    state = basis_state((2,), (0,))
    with pytest.raises(ValueError):
        apply_local_unitary(state, 0, np.diag([1.0, 0.5]))


def test_scaled_identity_kraus_weight():
    p = 0.3
    state = SparseState((2,), {(0,): INV_SQRT2, (1,): INV_SQRT2})
    branch, weight = apply_local_kraus(state, 0, np.sqrt(1 - p) * np.eye(2))
    assert weight == pytest.approx(1 - p)
    assert branch.normalize().amplitudes == pytest.approx(state.amplitudes)


def test_amplitude_damping_branch_on_zero():
    gamma = 0.4
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    _, weight = apply_local_kraus(basis_state((2,), (0,)), 0, k1)
    assert weight == 0.0
    with pytest.raises(ZeroWeightBranch):
        apply_local_kraus(basis_state((2,), (0,)), 0, k1, strict=True)


def test_kraus_weight_matches_expectation():
    k0 = np.array([[1, 0], [0, np.sqrt(0.7)]])
    plus = SparseState((2,), {(0,): INV_SQRT2, (1,): INV_SQRT2})
    vec = np.array([INV_SQRT2, INV_SQRT2])
    _, weight = apply_local_kraus(plus, 0, k0)
    assert weight == pytest.approx(float(np.real(vec.conj() @ k0.conj().T @ k0 @ vec)))


def test_lift_keeps_wait_block():
    lifted = lift_operator(PAULI['X'], 1, 3)
    assert lifted[2, 2] == 1
    assert np.allclose(lifted[:2, :2], PAULI['X'])


def test_fidelity_product_with_target():
    _, layout = _depth_one()
    target = register_state(layout, {0: 1.0})
    routers = router_initial_state(layout, "all-wait")
    assert fidelity_against_target_over_routers(tensor(target, routers), target) == pytest.approx(1.0)


def test_fidelity_orthogonal():
    _, layout = _depth_one()
    target = register_state(layout, {0: 1.0})
    other = register_state(layout, {1: 1.0})
    routers = router_initial_state(layout, "all-wait")
    assert fidelity_against_target_over_routers(tensor(other, routers), target) == pytest.approx(0.0)


def test_fidelity_half_entangled():
    """(ψ⊗w1 + ψ⊥⊗w2)/√2 -> 0.5"""
    _, layout = _depth_one()
    target = register_state(layout, {0: 1.0})
    other = register_state(layout, {1: 1.0})
    first = tensor(target, router_initial_state(layout, "all-wait"))
    second = tensor(other, router_initial_state(layout, "all-zero"))
    amplitudes = {k: a * INV_SQRT2 for k, a in first.amplitudes.items()}
    amplitudes.update({k: a * INV_SQRT2 for k, a in second.amplitudes.items()})
    mixed = SparseState(layout.radices, amplitudes)
    assert fidelity_against_target_over_routers(mixed, target) == pytest.approx(0.5)


def test_debug_dump_is_sorted():
    state = SparseState((2, 2), {(1, 0): 0.6, (0, 1): 0.8})
    lines = state.debug_dump().splitlines()
    assert [line.split()[0] for line in lines] == ["01", "10"]


def test_measure_register_leaves_routers():
    _, layout = _depth_one()
    register = register_state(layout, {1: 1.0})
    routers = router_initial_state(layout, "all-zero")
    outcome, rest = measure_register(tensor(register, routers), layout.num_register_sites,
                                     np.random.default_rng(0))
    assert outcome[0] == 1
    assert rest.amplitudes == pytest.approx(routers.amplitudes)
