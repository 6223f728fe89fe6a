#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试路由树拓扑、分支、传播包络与粗粒化
"""

import json
import sys
from pathlib import Path

import pytest

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src" / "py"))

from steps.step01_topology.coarse_graining import all_grainings, coarse_grain, effective_error_rates
from steps.step01_topology.tree_topology import (
    RouterModel, address_bits, branch, branch_cell, build_tree, propagation_envelope,
)
from steps.step02_state.register_layout import RegisterLayout
from steps.step04_noise.channels import correlated_pauli, depolarizing
from steps.step04_noise.noise_model import NoiseModel


def test_level_sizes():
    """第 ℓ 层恰有 2^(ℓ-1) 个路由器"""
    tree = build_tree(3)
    assert tree.num_routers == 7
    assert [len(tree.routers_at_level(level)) for level in (1, 2, 3)] == [1, 2, 4]
    assert tree.memory_size == 8


def test_depth_one_tree():
    tree = build_tree(1)
    assert tree.num_routers == 1
    assert tree.memory_size == 2
    assert tree.leaf_cells == {0: (0, 1)}


def test_depth_two_children_are_leaves():
    tree = build_tree(2)
    assert tree.children[0] == (1, 2)
    assert tree.children[1] is None and tree.children[2] is None


def test_parent_child_consistency():
    tree = build_tree(4)
    for r in tree.routers:
        kids = tree.children[r]
        if kids is not None:
            assert all(tree.parent(k) == r for k in kids)
    cells = sorted(c for pair in tree.leaf_cells.values() for c in pair)
    assert cells == list(range(tree.memory_size))


def test_invalid_depth():
    with pytest.raises(ValueError):
        build_tree(0)


def test_branch_of_address_100():
    """根 -> 右孩子 -> 其左孩子 -> 左腿（单元4）"""
    tree = build_tree(3)
    assert branch(tree, "100") == [0, 2, 5]
    assert branch_cell(tree, "100") == 4
    assert branch(tree, 4) == branch(tree, (1, 0, 0))


def test_branch_length_and_cells():
    tree = build_tree(3)
    for i in range(tree.memory_size):
        assert len(branch(tree, i)) == tree.depth
        assert branch_cell(tree, i) == i


def test_branches_meet_only_at_root():
    tree = build_tree(2)
    assert set(branch(tree, "00")) & set(branch(tree, "11")) == {0}


def test_address_bits_rejects_bad_input():
    tree = build_tree(2)
    with pytest.raises(ValueError):
        address_bits(tree, "012")
    with pytest.raises(ValueError):
        address_bits(tree, 4)


def test_propagation_envelope():
    tree = build_tree(3)
    leftmost = tree.routers_at_level(3)[0]
    assert propagation_envelope(tree, leftmost) == frozenset(tree.routers)
    assert propagation_envelope(tree, 2) == tree.subtree(2) == frozenset({2, 5, 6})
    assert propagation_envelope(tree, 0) == frozenset(tree.routers)


def test_connected_subsets():
    tree = build_tree(3)
    assert tree.is_connected([0, 1, 3])
    assert not tree.is_connected([1, 2])
    assert tree.are_adjacent(1, 3)


def test_to_json_document():
    tree = build_tree(2, RouterModel.from_name("two-level"))
    document = json.loads(tree.to_json())
    assert document["depth"] == 2
    assert document["router_kind"] == "two-level"
    assert document["parent"] == [None, 0, 0]
    assert document["leaf_cells"] == {"1": [0, 1], "2": [2, 3]}


def test_unknown_router_kind():
    with pytest.raises(ValueError):
        RouterModel.from_name("four-level")


# ---------- 粗粒化 ----------

def test_identity_graining():
    tree = build_tree(3)
    grained = coarse_grain(tree, 1)
    assert grained.is_identity
    assert all(grained.quotient[r] == r for r in tree.routers)
    assert not grained.noiseless_peripheries


def test_two_level_contraction_gives_d5_router():
    tree = build_tree(2)
    grained = coarse_grain(tree, 2, 0)
    assert grained.super_dim == 5
    assert grained.super_routers[0] == (0, 1, 2)
    assert grained.super_router_of([0, 1]) == 0


def test_offset_graining_layers():
    """n=4, d=2, u=1：第1层与第4层不收缩，第2-3层收缩"""
    tree = build_tree(4)
    grained = coarse_grain(tree, 2, 1)
    assert grained.contracted_blocks == ((2, 3),)
    peripheral = set(tree.routers_at_level(1)) | set(tree.routers_at_level(4))
    assert grained.noiseless_peripheries == frozenset(peripheral)


def test_invalid_graining():
    tree = build_tree(2)
    with pytest.raises(ValueError):
        coarse_grain(tree, 3)
    with pytest.raises(ValueError):
        coarse_grain(tree, 2, 2)


def _model_with_clusters(tree, layout, clusters):
    model = NoiseModel.per_router(tree, layout, depolarizing(1e-3))
    for routers, p in clusters:
        model = model.extended(NoiseModel.correlated_pair(tree, layout, routers, correlated_pauli(p, ["XX"])).locations)
    return model


def test_single_router_channels_only_feed_eps1():
    tree = build_tree(2)
    layout = RegisterLayout.from_tree(tree)
    model = NoiseModel.per_router(tree, layout, depolarizing(1e-3))
    rates = effective_error_rates(all_grainings(tree, 2), model)
    # 叶路由器：控制、保持与两条存储腿
    assert rates.rates[1] == pytest.approx(4e-3)
    assert rates.rates[2] == 0.0
    assert not rates.unassignable


def test_correlated_error_goes_to_eps2():
    tree = build_tree(2)
    layout = RegisterLayout.from_tree(tree)
    model = _model_with_clusters(tree, layout, [((0, 1), 0.02)])
    rates = effective_error_rates(all_grainings(tree, 2), model)
    assert rates.rates[1] == pytest.approx(4e-3)
    assert rates.rates[2] == pytest.approx(0.02)


def test_clusters_in_one_super_router_add():
    tree = build_tree(2)
    layout = RegisterLayout.from_tree(tree)
    model = _model_with_clusters(tree, layout, [((0, 1), 0.02), ((0, 2), 0.03)])
    rates = effective_error_rates(all_grainings(tree, 2), model)
    assert rates.rates[2] == pytest.approx(0.05)
    assert len(rates.assignment) == len(model.locations)
