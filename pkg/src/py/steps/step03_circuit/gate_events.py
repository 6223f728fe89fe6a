#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
门事件：查询电路的最小组成单元
每个事件既能给出文本记号（用于电路序列化），也能给出基矢层面的键动作（稀疏与稠密引擎共用）
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from steps.step02_state.local_operators import CX, PAULI, lift_operator
from steps.step02_state.register_layout import RegisterLayout
from steps.step02_state.sparse_state import Action, operator_action, routing_key, routing_sites, swap_key


class EventKind(str, Enum):
    ROUTE = "route"
    SWAP = "swap"
    ABSORB = "absorb"
    DRESS = "dress"
    COPY = "copy"
    CX = "cx"
    PAULI = "pauli"
    UNITARY = "unitary"


PERMUTATION_KINDS = {EventKind.ROUTE, EventKind.SWAP, EventKind.ABSORB, EventKind.DRESS}


@dataclass(frozen=True, eq=False)
class GateEvent:
    """
    Attributes:
        kind: 事件类型
        sites: 支撑位点（路由事件为 控制, 保持, 左目标, 右目标）
        radix: 位点维数
        router: 路由/吸收/修饰事件所属的路由器
        label: 泡利标签
        exponent: 拷贝门的指数 x_i
        matrix: 一般酉门的矩阵（量子比特尺寸时自动提升）
    """
    kind: EventKind
    sites: Tuple[int, ...]
    radix: int
    router: Optional[int] = None
    label: str = ''
    exponent: int = 0
    matrix: Optional[np.ndarray] = None

    @property
    def is_permutation(self) -> bool:
        return self.kind in PERMUTATION_KINDS

    def token(self, layout: RegisterLayout) -> str:
        names = ','.join(layout.site_label(s) for s in self.sites)
        if self.kind == EventKind.COPY:
            return f"copy({names},{self.exponent})"
        if self.kind == EventKind.PAULI:
            return f"pauli({names},{self.label})"
        return f"{self.kind.value}({names})"

    @cached_property
    def action(self) -> Action:
        """基矢键动作：key -> [(新键, 系数)]"""
        if self.kind == EventKind.ROUTE:
            c, h, left, right = self.sites
            return lambda key: ((routing_key(key, c, h, left, right), 1.0),)
        if self.kind in (EventKind.SWAP, EventKind.ABSORB, EventKind.DRESS):
            a, b = self.sites
            return lambda key: ((swap_key(key, a, b), 1.0),)
        if self.kind == EventKind.COPY:
            leg = self.sites[0]
            if not self.exponent:
                return lambda key: ((key, 1.0),)
            return lambda key: ((key, -1.0 if key[leg] == 1 else 1.0),)
        radices = self._radices()
        return operator_action(self.sites, self.full_matrix, radices)

    @cached_property
    def full_matrix(self) -> np.ndarray:
        """事件在其支撑位点上的完整矩阵（置换类事件不使用）"""
        k = len(self.sites)
        if self.kind == EventKind.CX:
            base = CX
        elif self.kind == EventKind.PAULI:
            base = PAULI[self.label]
        elif self.kind == EventKind.UNITARY:
            base = np.asarray(self.matrix, dtype=complex)
            if base.shape == (self.radix ** k,) * 2:
                return base
        else:
            raise ValueError(f"事件 {self.kind.value} 没有矩阵表示")
        return lift_operator(base, k, self.radix)

    def __getstate__(self):
        # 缓存的闭包不可序列化，跨进程传递时丢弃
        state = dict(self.__dict__)
        state.pop('action', None)
        state.pop('full_matrix', None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)

    def _radices(self):
        # operator_action 只读取支撑位点的维数
        size = max(self.sites) + 1
        return (self.radix,) * size


def route_event(layout: RegisterLayout, tree, r: int) -> GateEvent:
    return GateEvent(EventKind.ROUTE, routing_sites(layout, tree, r), layout.radix, router=r)


def swap_event(layout: RegisterLayout, a: int, b: int) -> GateEvent:
    return GateEvent(EventKind.SWAP, (a, b), layout.radix)


def absorb_event(layout: RegisterLayout, r: int) -> GateEvent:
    """保持位内容吸收进控制位：SWAP(h_r, c_r)"""
    return GateEvent(EventKind.ABSORB, (layout.hold_site(r), layout.control_site(r)), layout.radix, router=r)


def dress_event(layout: RegisterLayout, tree, r: int) -> GateEvent:
    """修饰 SWAP：交换路由器 r 的两个输出目标"""
    _, _, left, right = routing_sites(layout, tree, r)
    return GateEvent(EventKind.DRESS, (left, right), layout.radix, router=r)


def copy_event(layout: RegisterLayout, cell: int, exponent: int) -> GateEvent:
    return GateEvent(EventKind.COPY, (layout.leg_site(cell),), layout.radix, exponent=int(exponent))


def cx_event(layout: RegisterLayout, control: int, target: int) -> GateEvent:
    return GateEvent(EventKind.CX, (control, target), layout.radix)


def pauli_event(layout: RegisterLayout, site: int, label: str) -> GateEvent:
    if label not in PAULI:
        raise ValueError(f"未知泡利标签: {label}")
    return GateEvent(EventKind.PAULI, (site,), layout.radix, label=label)


def unitary_event(layout: RegisterLayout, sites: Sequence[int], matrix: np.ndarray) -> GateEvent:
    return GateEvent(EventKind.UNITARY, tuple(sites), layout.radix, matrix=np.asarray(matrix, dtype=complex))
