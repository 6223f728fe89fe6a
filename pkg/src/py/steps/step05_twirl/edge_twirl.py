#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
边缘旋转：只在查询两端的地址/总线寄存器上施加泡利，路由器内部不动
地址上的 X 型分量由经典存储重排 x'_j = x_{j⊕mask} 吸收，对两种路由器都适用
"""

from dataclasses import replace
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from steps.step02_state.local_operators import BITS_PAULI, PAULI_BITS, PAULI_LABELS
from steps.step02_state.register_layout import RegisterLayout
from steps.step03_circuit.gate_events import pauli_event
from steps.step03_circuit.query_circuit import (
    Layer, QueryCircuit, ScheduleKind, build_doubled_circuit, build_query_circuit,
)
from utils.log_util import log_debug


def address_mask(labels: Sequence[str]) -> int:
    """地址位上的 X/Y 组成的翻转掩码（第一个地址位为最高位）"""
    n = len(labels)
    mask = 0
    for m, label in enumerate(labels):
        if PAULI_BITS[label][0]:
            mask |= 1 << (n - 1 - m)
    return mask


def reshuffle_permutation(n: int, labels: Sequence[str]) -> Tuple[int, ...]:
    if len(labels) != n:
        raise ValueError(f"需要 {n} 个地址标签")
    mask = address_mask(labels)
    return tuple(j ^ mask for j in range(2 ** n))


def memory_reshuffle(memory: Sequence[int], labels: Sequence[str]) -> Tuple[int, ...]:
    """
    按地址位上的泡利重排经典存储

    Args:
        memory: 长度 2^n 的存储
        labels: 每个地址位的泡利标签

    Returns:
        tuple: x'，满足 x'_j = x_{j⊕mask}
    """
    n = len(labels)
    if len(memory) != 2 ** n:
        raise ValueError(f"存储长度 {len(memory)} 与 2^{n} 不符")
    permutation = reshuffle_permutation(n, labels)
    return tuple(int(memory[j]) for j in permutation)


def _register_sites(layout: RegisterLayout) -> List[int]:
    sites = [layout.address_site(m) for m in range(1, layout.depth + 1)] + [layout.bus_site]
    if layout.doubled:
        sites.append(layout.bus2_site)
    return sites


def sample_edge_paulis(layout: RegisterLayout, rng: np.random.Generator) -> Dict[int, str]:
    sites = _register_sites(layout)
    draws = rng.integers(0, 4, size=len(sites))
    return {site: PAULI_LABELS[d] for site, d in zip(sites, draws)}


def compile_end_paulis(layout: RegisterLayout, start: Mapping[int, str]) -> Dict[int, str]:
    """
    末端泡利：地址位取同一标签；总线的 Z 分量在 B 上撤销（双查询时 B' 也带上 Z），
    X 分量作用在 |+> 上平凡，直接丢弃；B' 的 Z 分量在 B' 上撤销
    """
    bits: Dict[int, List[int]] = {site: [0, 0] for site in _register_sites(layout)}

    def toggle(site: int, x: int, z: int):
        bits[site][0] ^= x
        bits[site][1] ^= z

    for m in range(1, layout.depth + 1):
        site = layout.address_site(m)
        toggle(site, *PAULI_BITS[start[site]])
    if PAULI_BITS[start[layout.bus_site]][1]:
        toggle(layout.bus_site, 0, 1)
        if layout.doubled:
            toggle(layout.bus2_site, 0, 1)
    if layout.doubled and PAULI_BITS[start[layout.bus2_site]][1]:
        toggle(layout.bus2_site, 0, 1)
    return {site: BITS_PAULI[tuple(b)] for site, b in bits.items()}


def _pauli_layer(layout: RegisterLayout, labels: Mapping[int, str]) -> Layer:
    events = [pauli_event(layout, site, label) for site, label in sorted(labels.items()) if label != 'I']
    return Layer(events, noisy=False, tag="boundary")


def build_edge_twirled_circuit(tree, memory: Sequence[int], frame_paulis: Mapping[int, str],
                               schedule_kind: ScheduleKind = ScheduleKind.SERIAL,
                               doubled: bool = False) -> QueryCircuit:
    """
    构造边缘旋转后的 (加倍) 查询：起始泡利 + 重排存储上的查询 + 编译后的末端泡利

    Args:
        tree: 路由树
        memory: 逻辑存储 x
        frame_paulis: 地址/总线位点 -> 泡利标签
        schedule_kind: 调度方式
        doubled: 是否为双查询

    Returns:
        QueryCircuit: kind="edge"；memory 保留逻辑存储，重排后的存储见 metadata
    """
    layout = RegisterLayout.from_tree(tree, doubled=doubled)
    missing = [layout.site_label(s) for s in _register_sites(layout) if s not in frame_paulis]
    if missing:
        raise ValueError(f"边缘泡利缺少位点: {missing}")
    labels = [frame_paulis[layout.address_site(m)] for m in range(1, tree.depth + 1)]
    reshuffled = memory_reshuffle(memory, labels)
    base = build_doubled_circuit(tree, reshuffled, schedule_kind) if doubled \
        else build_query_circuit(tree, reshuffled, schedule_kind)

    start = _pauli_layer(layout, frame_paulis)
    end = _pauli_layer(layout, compile_end_paulis(layout, frame_paulis))
    layers = [start] + base.layers + [end]
    circuit = replace(
        base, layers=layers, memory=tuple(int(x) for x in memory), kind="edge",
        copy_layer_indices=tuple(i + 1 for i in base.copy_layer_indices),
        metadata={
            "reshuffled_memory": reshuffled,
            "memory_permutation": reshuffle_permutation(tree.depth, labels),
            "frame": {layout.site_label(s): label for s, label in sorted(frame_paulis.items())},
        },
    )
    log_debug(f"边缘旋转: 掩码={address_mask(labels)}, 双查询={doubled}")
    return circuit


class EdgeTwirlFactory:
    """逐轨迹抽样边缘泡利并构造电路"""

    def __init__(self, tree, memory: Sequence[int], schedule_kind: ScheduleKind = ScheduleKind.SERIAL,
                 doubled: bool = False):
        self.tree = tree
        self.memory = tuple(int(x) for x in memory)
        self.schedule_kind = ScheduleKind(schedule_kind)
        self.doubled = doubled
        self.layout = RegisterLayout.from_tree(tree, doubled=doubled)
        self.output_site = self.layout.bus2_site if doubled else self.layout.bus_site

    def __call__(self, rng: np.random.Generator) -> QueryCircuit:
        paulis = sample_edge_paulis(self.layout, rng)
        return build_edge_twirled_circuit(self.tree, self.memory, paulis, self.schedule_kind, self.doubled)
