#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
分层查询电路构造
Q = V_d† V_x V_d：下行部分依次注入地址位（路由到第 m 层后吸收进控制位），
再注入总线并路由到存储腿；拷贝层对每条腿施加 Z^{x_i}；上行部分为下行层的镜像。
提供串行（每层一级门）与流水线（按位点冲突的 ASAP 打包）两种调度。
"""

import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from steps.step01_topology.tree_topology import TreeTopology
from steps.step02_state.register_layout import RegisterLayout
from .gate_events import (
    GateEvent, absorb_event, copy_event, cx_event, route_event, swap_event,
)
from utils.log_util import log_debug


class ScheduleKind(str, Enum):
    SERIAL = "serial"
    PIPELINED = "pipelined"


@dataclass
class Layer:
    """一个时间步内并行执行的门事件；noisy 表示该层之后是否跟随噪声信道"""
    events: List[GateEvent]
    noisy: bool = True
    tag: str = "route"

    def __post_init__(self):
        seen = set()
        for event in self.events:
            overlap = seen.intersection(event.sites)
            if overlap:
                raise ValueError(f"同一层内的事件共享位点: {sorted(overlap)}")
            seen.update(event.sites)

    @property
    def sites(self) -> set:
        return {s for event in self.events for s in event.sites}

    def token(self, layout: RegisterLayout) -> str:
        return ' '.join(event.token(layout) for event in self.events) or '-'


@dataclass
class QueryCircuit:
    """
    Attributes:
        tree: 路由树
        layout: 寄存器布局
        layers: 有序层 V_1 ... V_τ（含拷贝层、CX层、旋转层等）
        memory: 经典存储 x
        schedule_kind: 调度方式
        kind: query / doubled / empty / in-situ / edge
        copy_layer_indices: 拷贝层所在下标
        output_site: 取回比特所在的总线位点
        downstream_count: 单次查询下行部分的层数 D
    """
    tree: TreeTopology
    layout: RegisterLayout
    layers: List[Layer]
    memory: Tuple[int, ...]
    schedule_kind: ScheduleKind
    kind: str
    copy_layer_indices: Tuple[int, ...]
    output_site: int
    downstream_count: int
    metadata: Dict = field(default_factory=dict)

    @property
    def copy_layer_index(self) -> int:
        return self.copy_layer_indices[0]

    @property
    def noisy_layer_indices(self) -> List[int]:
        return [t for t, layer in enumerate(self.layers) if layer.noisy]

    @property
    def tau(self) -> int:
        """含噪时间步数减一（误差配置矩阵有 τ+1 列）"""
        return len(self.noisy_layer_indices) - 1

    def tokens(self) -> List[str]:
        return [layer.token(self.layout) for layer in self.layers]

    def serialize(self) -> str:
        """逐行文本格式：每行一层，'层号 N|- 标签: 事件记号...'"""
        lines = [f"# kind={self.kind} schedule={self.schedule_kind.value} depth={self.layout.depth} "
                 f"radix={self.layout.radix} tau={self.tau}"]
        for t, layer in enumerate(self.layers):
            lines.append(f"{t} {'N' if layer.noisy else '-'} {layer.tag}: {layer.token(self.layout)}")
        return '\n'.join(lines) + '\n'

    def content_hash(self) -> str:
        """git 风格的内容哈希：sha1('blob <长度>\\0' + 序列化文本)"""
        data = self.serialize().encode('utf-8')
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()

    def is_mirror_symmetric(self) -> bool:
        """未旋转电路的结构镜像对称：第 t 层与第 τ-t 层事件相同（双查询逐半检查）"""
        tokens = self.tokens()
        if self.kind == "doubled":
            cx_index = next(t for t, layer in enumerate(self.layers) if layer.tag == "cx")
            first, second = tokens[:cx_index], tokens[cx_index + 1:]
            return first == second and first == first[::-1]
        return tokens == tokens[::-1]


def _downstream_serial(tree: TreeTopology, layout: RegisterLayout) -> List[Layer]:
    """串行调度的下行层 V_d"""
    n = tree.depth
    root_hold = layout.hold_site(tree.root)
    layers: List[Layer] = []

    def route_level(level: int) -> Layer:
        return Layer([route_event(layout, tree, r) for r in tree.routers_at_level(level)], tag="route")

    for m in range(1, n + 1):
        layers.append(Layer([swap_event(layout, layout.address_site(m), root_hold)], tag="inject"))
        for level in range(1, m):
            layers.append(route_level(level))
        layers.append(Layer([absorb_event(layout, r) for r in tree.routers_at_level(m)], tag="absorb"))

    layers.append(Layer([swap_event(layout, layout.bus_site, root_hold)], tag="inject"))
    for level in range(1, n + 1):
        layers.append(route_level(level))
    return layers


def _pack_asap(layers: Sequence[Layer]) -> List[Layer]:
    """按位点冲突做 ASAP 打包：保持冲突事件的相对顺序，因此实现同一个酉算符"""
    packed: List[List[GateEvent]] = []
    last_layer: Dict[int, int] = {}
    for layer in layers:
        for event in layer.events:
            slot = 1 + max((last_layer.get(s, -1) for s in event.sites), default=-1)
            while len(packed) <= slot:
                packed.append([])
            packed[slot].append(event)
            for s in event.sites:
                last_layer[s] = slot
    return [Layer(events, tag="pipelined") for events in packed]


def downstream_layers(tree: TreeTopology, layout: RegisterLayout,
                      schedule_kind: ScheduleKind = ScheduleKind.SERIAL) -> List[Layer]:
    serial = _downstream_serial(tree, layout)
    if ScheduleKind(schedule_kind) == ScheduleKind.PIPELINED:
        return _pack_asap(serial)
    return serial


def copy_layer(layout: RegisterLayout, memory: Sequence[int]) -> Layer:
    return Layer([copy_event(layout, cell, x) for cell, x in enumerate(memory)], tag="copy")


def _check_memory(tree: TreeTopology, memory: Sequence[int]) -> Tuple[int, ...]:
    memory = tuple(int(x) for x in memory)
    if len(memory) != tree.memory_size:
        raise ValueError(f"存储长度 {len(memory)} 与 2^n = {tree.memory_size} 不符")
    if any(x not in (0, 1) for x in memory):
        raise ValueError("存储内容必须为比特")
    return memory


def _single_query_layers(tree, layout, memory, schedule_kind) -> Tuple[List[Layer], int]:
    down = downstream_layers(tree, layout, schedule_kind)
    layers = list(down) + [copy_layer(layout, memory)] + [replace(layer) for layer in reversed(down)]
    return layers, len(down)


def build_query_circuit(tree: TreeTopology, memory: Sequence[int],
                        schedule_kind: ScheduleKind = ScheduleKind.SERIAL,
                        doubled_layout: bool = False) -> QueryCircuit:
    """
    构造单次查询电路 Q = V_d† V_x V_d

    Args:
        tree: 路由树
        memory: 长度 2^n 的比特向量
        schedule_kind: serial / pipelined
        doubled_layout: 是否在含 B' 的布局上构造（供双查询与原位旋转复用）

    Returns:
        QueryCircuit: τ 由调度结果给出
    """
    memory = _check_memory(tree, memory)
    schedule_kind = ScheduleKind(schedule_kind)
    layout = RegisterLayout.from_tree(tree, doubled=doubled_layout)
    layers, d_count = _single_query_layers(tree, layout, memory, schedule_kind)
    circuit = QueryCircuit(
        tree=tree, layout=layout, layers=layers, memory=memory, schedule_kind=schedule_kind,
        kind="query", copy_layer_indices=(d_count,), output_site=layout.bus_site,
        downstream_count=d_count,
    )
    log_debug(f"构造查询电路: n={tree.depth}, 调度={schedule_kind.value}, D={d_count}, τ={circuit.tau}")
    return circuit


def build_doubled_circuit(tree: TreeTopology, memory: Sequence[int],
                          schedule_kind: ScheduleKind = ScheduleKind.SERIAL) -> QueryCircuit:
    """
    查询加倍 Q' = Q · CX(B' -> B) · Q
    B' 以 |+> 制备并作为控制位，经相位回踢携带 Z^{x_i}|+>；CX 层不计为含噪时间步
    """
    memory = _check_memory(tree, memory)
    schedule_kind = ScheduleKind(schedule_kind)
    layout = RegisterLayout.from_tree(tree, doubled=True)
    first, d_count = _single_query_layers(tree, layout, memory, schedule_kind)
    second, _ = _single_query_layers(tree, layout, memory, schedule_kind)
    cx_layer = Layer([cx_event(layout, layout.bus2_site, layout.bus_site)], noisy=False, tag="cx")
    layers = first + [cx_layer] + second
    circuit = QueryCircuit(
        tree=tree, layout=layout, layers=layers, memory=memory, schedule_kind=schedule_kind,
        kind="doubled", copy_layer_indices=(d_count, len(first) + 1 + d_count),
        output_site=layout.bus2_site, downstream_count=d_count,
    )
    log_debug(f"构造双查询电路: n={tree.depth}, τ'={circuit.tau}")
    return circuit


def build_empty_address_circuit(tree: TreeTopology, memory: Sequence[int],
                                schedule_kind: ScheduleKind = ScheduleKind.SERIAL,
                                doubled: bool = False) -> QueryCircuit:
    """
    空地址查询 Q̂：删除所有跨越 地址/总线 与 路由器 划分的门，地址与总线空转；
    层结构（含含噪时间步）与 Q（或 Q'）相同
    """
    base = build_doubled_circuit(tree, memory, schedule_kind) if doubled \
        else build_query_circuit(tree, memory, schedule_kind)
    boundary = base.layout.router_offset

    def crosses(event: GateEvent) -> bool:
        inside = [s < boundary for s in event.sites]
        return any(inside) and not all(inside)

    layers = [Layer([e for e in layer.events if not crosses(e)], noisy=layer.noisy, tag=layer.tag)
              for layer in base.layers]
    return replace(base, layers=layers, kind="empty")


def layer_count_summary(tree: TreeTopology, memory: Sequence[int]) -> Dict[str, Dict[str, int]]:
    """两种调度的层数与 τ 对比"""
    summary = {}
    for kind in ScheduleKind:
        circuit = build_query_circuit(tree, memory, kind)
        summary[kind.value] = {"downstream": circuit.downstream_count, "tau": circuit.tau}
    return summary
