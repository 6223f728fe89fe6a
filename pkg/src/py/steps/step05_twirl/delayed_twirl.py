#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
原位延迟旋转（两能级 QRAM）

下行部分 W 在每个 V_t 之前插入随机泡利层 P_t，上行镜像部分在 V_t 之后施加同一个 P_t，
得到 Q_tw = W† V_x W。作用在地址内容上的 X 型泡利会让路由器走错方向，
因此在受影响路由器的每次路由之后插入交换两个输出目标的修饰 SWAP。

X 型翻转的记账：地址内容在到达第 m 层并被吸收进控制位之前，翻转挂在账本上，
记录其来源路由器；吸收时翻转该来源子树内全部第 m 层路由器的修饰奇偶 f_r。
直接落在已吸收控制位上的翻转立即改变 f_r。
最终电路 Q'_tw = Q_tw · M · CX · T · Q_tw，其中 M = CX T† CX，使得 M·CX·T = CX。
"""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from steps.step02_state.local_operators import CX, PAULI, PAULI_LABELS, kron_all
from steps.step03_circuit.gate_events import (
    EventKind, cx_event, dress_event, pauli_event, unitary_event,
)
from steps.step03_circuit.query_circuit import Layer, QueryCircuit
from utils.log_util import log_debug

Token = Tuple


@dataclass
class PendingFlip:
    """挂账的 X 型翻转：第 address 个地址位的内容在 origin 路由器处被翻转"""
    address: int
    origin: int
    origin_level: int
    layer: int
    remaining: set = field(default_factory=set, repr=False)
    consumed_layer: Optional[int] = None

    @property
    def consumed(self) -> bool:
        return self.consumed_layer is not None


@dataclass
class TwirlFrame:
    """
    Attributes:
        layer_paulis: (下行层号, 位点) -> 非单位泡利标签
        outer_pauli: 作用在 (B', B) 上的 T
        seed: 抽样种子
        pending_flips: 挂账翻转
        control_flips: 直接作用在控制位上的翻转 (层号, 路由器)
        dressing_swaps: (下行层号, 路由器)：紧随 V_t 之后插入的修饰 SWAP
        memory_permutation: 边缘旋转路径下的存储置换
    """
    layer_paulis: Dict[Tuple[int, int], str]
    outer_pauli: Tuple[str, str]
    seed: int
    pending_flips: List[PendingFlip] = field(default_factory=list)
    control_flips: List[Tuple[int, int]] = field(default_factory=list)
    dressing_swaps: List[Tuple[int, int]] = field(default_factory=list)
    memory_permutation: Optional[Tuple[int, ...]] = None

    @property
    def is_identity(self) -> bool:
        return not self.layer_paulis and self.outer_pauli == ('I', 'I')

    @property
    def ledger_closed(self) -> bool:
        return all(flip.consumed for flip in self.pending_flips)

    def outer_matrix(self) -> np.ndarray:
        return kron_all([PAULI[label] for label in self.outer_pauli])

    def correction_matrix(self) -> np.ndarray:
        """M = CX · T† · CX"""
        return CX @ self.outer_matrix().conj().T @ CX

    def dump(self, layout) -> str:
        """帧转储：每行 '层号 位点 标签'，末尾为外层 T"""
        lines = [f"{t} {layout.site_label(site)} {label}"
                 for (t, site), label in sorted(self.layer_paulis.items())]
        lines.append(f"outer {layout.site_label(layout.bus2_site)} {self.outer_pauli[0]}")
        lines.append(f"outer {layout.site_label(layout.bus_site)} {self.outer_pauli[1]}")
        return '\n'.join(lines)


def _check_twirlable(circuit: QueryCircuit):
    if circuit.kind != "query":
        raise ValueError("原位旋转需要未旋转的单次查询电路")
    if circuit.layout.radix != 2:
        raise ValueError("电路层面的原位旋转只支持两能级 QRAM")
    if not circuit.layout.doubled:
        raise ValueError("原位旋转需要含 B' 的布局（build_query_circuit(..., doubled_layout=True)）")


def trace_flips(circuit: QueryCircuit, layer_paulis: Dict[Tuple[int, int], str]):
    """
    沿下行层追踪地址内容（令牌），确定挂账翻转与修饰 SWAP 的位置

    Returns:
        (pending_flips, control_flips, dressing_swaps)
    """
    layout, tree = circuit.layout, circuit.tree
    tokens: Dict[int, FrozenSet[Token]] = {s: frozenset() for s in range(layout.num_sites)}
    for m in range(1, layout.depth + 1):
        tokens[layout.address_site(m)] = frozenset({("addr", m)})
    tokens[layout.bus_site] = frozenset({("bus",)})

    parity = {r: 0 for r in tree.routers}
    pending: List[PendingFlip] = []
    control_flips: List[Tuple[int, int]] = []
    dressing: List[Tuple[int, int]] = []

    for t in range(circuit.downstream_count):
        layer = circuit.layers[t]
        for site in sorted(layer.sites):
            if layer_paulis.get((t, site), 'I') not in ('X', 'Y'):
                continue
            role = layout.site_role(site)
            for token in sorted(tokens[site]):
                if token[0] != "addr":
                    continue
                m = token[1]
                if role == "control":
                    r = layout.router_of_site(site)
                    parity[r] ^= 1
                    control_flips.append((t, r))
                    continue
                origin = tree.root if role == "address" else layout.router_of_site(site)
                targets = {r for r in tree.subtree(origin) if tree.level[r] == m}
                pending.append(PendingFlip(address=m, origin=origin, origin_level=tree.level[origin],
                                           layer=t, remaining=targets))

        dressed = []
        for event in layer.events:
            if event.kind == EventKind.ROUTE:
                _, h, left, right = event.sites
                if parity[event.router]:
                    dressing.append((t, event.router))
                    dressed.append((left, right))
                tokens[left], tokens[right], tokens[h] = (
                    tokens[left] | tokens[h], tokens[right] | tokens[h], tokens[left] | tokens[right])
            elif event.kind in (EventKind.SWAP, EventKind.ABSORB):
                a, b = event.sites
                tokens[a], tokens[b] = tokens[b], tokens[a]
                if event.kind == EventKind.ABSORB:
                    r = event.router
                    m = tree.level[r]
                    for flip in pending:
                        if flip.address == m and r in flip.remaining:
                            parity[r] ^= 1
                            flip.remaining.discard(r)
                            if not flip.remaining:
                                flip.consumed_layer = t
        for left, right in dressed:
            tokens[left], tokens[right] = tokens[right], tokens[left]
    return pending, control_flips, dressing


def sample_twirl_frame(circuit: QueryCircuit, seed: int) -> TwirlFrame:
    """
    为下行部分每层支撑位点均匀抽样泡利标签，并抽样外层 T

    Args:
        circuit: 含 B' 布局的两能级单次查询电路
        seed: 随机种子

    Returns:
        TwirlFrame: 带翻转账本与修饰 SWAP 表的帧
    """
    _check_twirlable(circuit)
    rng = np.random.default_rng(seed)
    layer_paulis: Dict[Tuple[int, int], str] = {}
    for t in range(circuit.downstream_count):
        sites = sorted(circuit.layers[t].sites)
        draws = rng.integers(0, 4, size=len(sites))
        for site, draw in zip(sites, draws):
            if draw:
                layer_paulis[(t, site)] = PAULI_LABELS[draw]
    outer = tuple(PAULI_LABELS[d] for d in rng.integers(0, 4, size=2))
    pending, control_flips, dressing = trace_flips(circuit, layer_paulis)
    frame = TwirlFrame(layer_paulis=layer_paulis, outer_pauli=outer, seed=int(seed), pending_flips=pending,
                       control_flips=control_flips, dressing_swaps=dressing)
    log_debug(f"旋转帧: {len(layer_paulis)} 个泡利, {len(pending)} 个挂账翻转, {len(dressing)} 个修饰 SWAP")
    return frame


def identity_frame(circuit: QueryCircuit) -> TwirlFrame:
    _check_twirlable(circuit)
    return TwirlFrame(layer_paulis={}, outer_pauli=('I', 'I'), seed=0)


def _twirled_single_query(circuit: QueryCircuit, frame: TwirlFrame) -> Tuple[List[Layer], int]:
    layout, tree = circuit.layout, circuit.tree
    by_layer: Dict[int, List] = {}
    for (t, site), label in sorted(frame.layer_paulis.items()):
        by_layer.setdefault(t, []).append(pauli_event(layout, site, label))
    dress_by_layer: Dict[int, List[int]] = {}
    for t, r in frame.dressing_swaps:
        dress_by_layer.setdefault(t, []).append(r)

    down: List[Layer] = []
    for t in range(circuit.downstream_count):
        if t in by_layer:
            down.append(Layer(by_layer[t], noisy=False, tag="twirl"))
        down.append(replace(circuit.layers[t]))
        if t in dress_by_layer:
            down.append(Layer([dress_event(layout, tree, r) for r in sorted(dress_by_layer[t])], tag="dress"))
    copy_layer = replace(circuit.layers[circuit.copy_layer_index])
    layers = down + [copy_layer] + [replace(layer) for layer in reversed(down)]
    return layers, len(down)


def dress_circuit(circuit: QueryCircuit, frame: TwirlFrame) -> QueryCircuit:
    """
    构造 Q'_tw = Q_tw · M · CX · T · Q_tw

    Raises:
        RuntimeError: 账本中仍有未消耗的翻转
    """
    _check_twirlable(circuit)
    open_flips = [flip for flip in frame.pending_flips if not flip.consumed]
    if open_flips:
        raise RuntimeError(f"电路末尾仍有 {len(open_flips)} 个未消耗的 X 型翻转")

    layout = circuit.layout
    first, down_count = _twirled_single_query(circuit, frame)
    second, _ = _twirled_single_query(circuit, frame)
    outer_sites = (layout.bus2_site, layout.bus_site)
    t_layer = Layer([pauli_event(layout, site, label) for site, label in zip(outer_sites, frame.outer_pauli)],
                    noisy=False, tag="twirl")
    cx_layer = Layer([cx_event(layout, layout.bus2_site, layout.bus_site)], noisy=False, tag="cx")
    m_layer = Layer([unitary_event(layout, outer_sites, frame.correction_matrix())], noisy=False, tag="twirl")
    layers = first + [t_layer, cx_layer, m_layer] + second
    offset = len(first) + 3
    return replace(
        circuit, layers=layers, kind="in-situ",
        copy_layer_indices=(down_count, offset + down_count), output_site=layout.bus2_site,
        metadata={"frame_seed": frame.seed, "dressing_swaps": len(frame.dressing_swaps)},
    )


def max_dressed_tau(circuit: QueryCircuit) -> int:
    """每个含路由事件的下行层都插入修饰层时 Q'_tw 的 τ（用于界的保守计算）"""
    routing_layers = sum(
        1 for t in range(circuit.downstream_count)
        if any(e.kind == EventKind.ROUTE for e in circuit.layers[t].events)
    )
    noisy_per_query = 2 * (circuit.downstream_count + routing_layers) + 1
    return 2 * noisy_per_query - 1


@dataclass
class InSituTwirlFactory:
    """逐轨迹抽样新帧并返回修饰后的双查询电路（可跨进程序列化）"""
    circuit: QueryCircuit

    def __post_init__(self):
        _check_twirlable(self.circuit)

    @property
    def layout(self):
        return self.circuit.layout

    @property
    def memory(self):
        return self.circuit.memory

    @property
    def output_site(self) -> int:
        return self.circuit.layout.bus2_site

    def __call__(self, rng: np.random.Generator) -> QueryCircuit:
        seed = int(rng.integers(0, 2 ** 63 - 1))
        return dress_circuit(self.circuit, sample_twirl_frame(self.circuit, seed))
