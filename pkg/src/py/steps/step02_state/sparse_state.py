#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
稀疏纯态引擎
振幅表以混合进制基矢（每个位点一个数字）为键；所有门都以“键动作”表达：
给定一个基矢键，返回 [(新键, 系数)]。置换门与对角门保持支撑大小不增。
"""

from collections import defaultdict
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from utils.constants import NORM_TOL, PRUNE_TOL, UNITARY_TOL
from .local_operators import is_unitary, lift_operator
from .register_layout import RegisterLayout

Key = Tuple[int, ...]
Action = Callable[[Key], Iterable[Tuple[Key, complex]]]


class ZeroWeightBranch(RuntimeError):
    """Kraus 分支权重为零，调用方必须重新抽样"""


class SparseState:
    """
    稀疏振幅表

    Attributes:
        radices: 每个位点的维数
        amplitudes: 基矢键 -> 复振幅（不保存模小于 prune_tol 的项）
        prune_tol: 剪枝阈值
    """

    def __init__(self, radices: Sequence[int], amplitudes: Optional[Mapping[Key, complex]] = None,
                 prune_tol: float = PRUNE_TOL):
        self.radices: Tuple[int, ...] = tuple(radices)
        self.prune_tol = prune_tol
        self.amplitudes: Dict[Key, complex] = {}
        if amplitudes:
            for key, amp in amplitudes.items():
                key = tuple(key)
                self._check_key(key)
                if abs(amp) >= prune_tol:
                    self.amplitudes[key] = complex(amp)

    @property
    def num_sites(self) -> int:
        return len(self.radices)

    @property
    def support_size(self) -> int:
        return len(self.amplitudes)

    def copy(self) -> "SparseState":
        clone = SparseState(self.radices, prune_tol=self.prune_tol)
        clone.amplitudes = dict(self.amplitudes)
        return clone

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalize(self) -> "SparseState":
        norm_sq = self.norm_squared()
        if norm_sq <= 0.0:
            raise ZeroWeightBranch("零范数态无法归一化")
        scale = 1.0 / np.sqrt(norm_sq)
        self.amplitudes = {k: a * scale for k, a in self.amplitudes.items()}
        return self

    def apply_action(self, action: Action) -> "SparseState":
        """对每个基矢应用键动作并合并、剪枝，返回新态"""
        accumulated: Dict[Key, complex] = defaultdict(complex)
        for key, amp in self.amplitudes.items():
            for new_key, coeff in action(key):
                accumulated[new_key] += coeff * amp
        result = SparseState(self.radices, prune_tol=self.prune_tol)
        result.amplitudes = {k: a for k, a in accumulated.items() if abs(a) >= self.prune_tol}
        return result

    def apply_permutation(self, mapping: Callable[[Key], Key]) -> "SparseState":
        """置换门的快速路径：振幅只搬家不变化"""
        result = SparseState(self.radices, prune_tol=self.prune_tol)
        result.amplitudes = {mapping(k): a for k, a in self.amplitudes.items()}
        return result

    def debug_dump(self) -> str:
        """按数字串排序的确定性文本：每行 '数字串 实部 虚部'"""
        lines = []
        for key in sorted(self.amplitudes, key=lambda k: ''.join(map(str, k))):
            amp = self.amplitudes[key]
            lines.append(f"{''.join(map(str, key))} {amp.real:+.15e} {amp.imag:+.15e}")
        return '\n'.join(lines)

    def _check_key(self, key: Key):
        if len(key) != len(self.radices):
            raise ValueError(f"基矢长度 {len(key)} 与位点数 {len(self.radices)} 不符")
        for site, (digit, radix) in enumerate(zip(key, self.radices)):
            if not 0 <= digit < radix:
                raise ValueError(f"位点 {site} 的数字 {digit} 超出维数 {radix}")

    def __repr__(self) -> str:
        return f"SparseState(sites={self.num_sites}, support={self.support_size})"


def _radices_of(layout_or_radices: Union[RegisterLayout, Sequence[int]]) -> Tuple[int, ...]:
    if isinstance(layout_or_radices, RegisterLayout):
        return layout_or_radices.radices
    return tuple(layout_or_radices)


def basis_state(layout_or_radices, digits: Sequence[int]) -> SparseState:
    """单一基矢、振幅为1的态"""
    radices = _radices_of(layout_or_radices)
    return SparseState(radices, {tuple(int(d) for d in digits): 1.0})


def tensor(first: SparseState, second: SparseState) -> SparseState:
    """张量积 first ⊗ second（位点依次拼接）"""
    result = SparseState(first.radices + second.radices, prune_tol=first.prune_tol)
    result.amplitudes = {
        ka + kb: a * b
        for ka, a in first.amplitudes.items()
        for kb, b in second.amplitudes.items()
        if abs(a * b) >= first.prune_tol
    }
    return result


# ---------- 键动作 ----------

def swap_key(key: Key, a: int, b: int) -> Key:
    if key[a] == key[b]:
        return key
    digits = list(key)
    digits[a], digits[b] = digits[b], digits[a]
    return tuple(digits)


def cswap_key(key: Key, control: int, a: int, b: int, control_value: int) -> Key:
    return swap_key(key, a, b) if key[control] == control_value else key


def routing_key(key: Key, control: int, hold: int, left: int, right: int) -> Key:
    """路由门 = CSWAP(c=0: h<->左) · CSWAP(c=1: h<->右)；等待态控制位空转"""
    value = key[control]
    if value == 0:
        return swap_key(key, hold, left)
    if value == 1:
        return swap_key(key, hold, right)
    return key


def operator_action(sites: Sequence[int], matrix: np.ndarray, radices: Sequence[int]) -> Action:
    """
    作用在若干位点上的一般算符对应的键动作

    Args:
        sites: 位点序列（矩阵的张量顺序）
        matrix: prod(dims) 维方阵
        radices: 整个态的位点维数
    """
    sites = tuple(sites)
    dims = tuple(radices[s] for s in sites)
    dim = int(np.prod(dims))
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (dim, dim):
        raise ValueError(f"算符维数 {matrix.shape} 与位点维数 {dims} 不符")

    columns: List[List[Tuple[Tuple[int, ...], complex]]] = []
    for col in range(dim):
        rows = np.flatnonzero(matrix[:, col])
        columns.append([
            (tuple(int(x) for x in np.unravel_index(row, dims)), complex(matrix[row, col]))
            for row in rows
        ])

    def action(key: Key):
        col = 0
        for s, d in zip(sites, dims):
            col = col * d + key[s]
        out = []
        for digits, value in columns[col]:
            new_key = list(key)
            for s, digit in zip(sites, digits):
                new_key[s] = digit
            out.append((tuple(new_key), value))
        return out

    return action


# ---------- 门操作 ----------

def _check_sites(state: SparseState, *sites: int):
    for s in sites:
        if not 0 <= s < state.num_sites:
            raise ValueError(f"位点越界: {s}")
    if len(set(sites)) != len(sites):
        raise ValueError(f"位点必须互不相同: {sites}")


def apply_cswap(state: SparseState, control_site: int, target_a: int, target_b: int,
                control_value: int) -> SparseState:
    """控制位数字等于 control_value 的基矢交换两目标位点，其余不变"""
    _check_sites(state, control_site, target_a, target_b)
    if not 0 <= control_value < state.radices[control_site]:
        raise ValueError(f"控制值 {control_value} 超出位点维数")
    return state.apply_permutation(lambda k: cswap_key(k, control_site, target_a, target_b, control_value))


def routing_sites(layout: RegisterLayout, tree, r: int) -> Tuple[int, int, int, int]:
    """路由器 r 的 (控制, 保持, 左目标, 右目标) 位点；叶路由器的目标为存储腿"""
    kids = tree.children[r]
    if kids is None:
        left_cell, right_cell = tree.leaf_cells[r]
        left, right = layout.leg_site(left_cell), layout.leg_site(right_cell)
    else:
        left, right = layout.hold_site(kids[0]), layout.hold_site(kids[1])
    return layout.control_site(r), layout.hold_site(r), left, right


def apply_routing_unitary(state: SparseState, layout: RegisterLayout, tree, r: int) -> SparseState:
    """控制|0>把保持位路由到左孩子，|1>路由到右孩子，|W>空转"""
    c, h, left, right = routing_sites(layout, tree, r)
    _check_sites(state, c, h, left, right)
    return state.apply_permutation(lambda k: routing_key(k, c, h, left, right))


def _prepare_local_matrix(state: SparseState, sites: Sequence[int], matrix: np.ndarray,
                          wait_scale: complex = 1.0) -> np.ndarray:
    """量子比特尺寸的矩阵作用在三能级位点上时自动提升"""
    matrix = np.asarray(matrix, dtype=complex)
    dims = [state.radices[s] for s in sites]
    full_dim = int(np.prod(dims))
    if matrix.shape == (full_dim, full_dim):
        return matrix
    if matrix.shape == (2 ** len(sites),) * 2 and len(set(dims)) == 1:
        return lift_operator(matrix, len(sites), dims[0], wait_scale)
    raise ValueError(f"矩阵维数 {matrix.shape} 与位点维数 {dims} 不符")


def apply_local_unitary(state: SparseState, site: Union[int, Sequence[int]], matrix: np.ndarray) -> SparseState:
    """
    作用局部酉门；量子比特门作用在三能级位点时对 |W> 取恒等

    Raises:
        ValueError: 矩阵非酉（非酉算符请使用 apply_local_kraus）
    """
    sites = (site,) if isinstance(site, (int, np.integer)) else tuple(site)
    _check_sites(state, *sites)
    if not is_unitary(np.asarray(matrix), UNITARY_TOL):
        raise ValueError("矩阵不是酉矩阵")
    full = _prepare_local_matrix(state, sites, matrix)
    return state.apply_action(operator_action(sites, full, state.radices))


def apply_local_kraus(state: SparseState, site: Union[int, Sequence[int]], kraus: np.ndarray,
                      strict: bool = False) -> Tuple[SparseState, float]:
    """
    作用单个 Kraus 元，返回未归一化的后态及其分支权重（平方范数）

    Args:
        state: 输入态（应已归一化）
        site: 位点或位点序列
        kraus: Kraus 元，维数须与位点匹配
        strict: 为True时零权重分支抛出 ZeroWeightBranch

    Returns:
        (未归一化后态, 权重)
    """
    sites = (site,) if isinstance(site, (int, np.integer)) else tuple(site)
    _check_sites(state, *sites)
    kraus = np.asarray(kraus, dtype=complex)
    dims = [state.radices[s] for s in sites]
    if kraus.shape != (int(np.prod(dims)),) * 2:
        raise ValueError(f"Kraus 元维数 {kraus.shape} 与位点维数 {dims} 不符")
    if np.linalg.norm(kraus, 2) > 1 + UNITARY_TOL:
        raise ValueError("Kraus 元的算符范数超过1")
    branch_state = state.apply_action(operator_action(sites, kraus, state.radices))
    weight = branch_state.norm_squared()
    if strict and weight <= NORM_TOL ** 2:
        raise ZeroWeightBranch(f"位点 {sites} 上的 Kraus 分支权重为零")
    return branch_state, weight


def fidelity_against_target_over_routers(state: SparseState, target: SparseState) -> float:
    """
    对路由器求迹后与目标态的保真度 Σ_w |<ψ_out, w|φ>|²

    Args:
        state: 轨迹输出 φ（地址总线位点在前）
        target: 只定义在地址/总线位点上的目标态
    """
    width = target.num_sites
    if state.radices[:width] != target.radices:
        raise ValueError("目标态布局与输出态的地址/总线部分不一致")
    overlaps: Dict[Key, complex] = defaultdict(complex)
    for key, amp in state.amplitudes.items():
        t = target.amplitudes.get(key[:width])
        if t is not None:
            overlaps[key[width:]] += t.conjugate() * amp
    return float(sum(abs(v) ** 2 for v in overlaps.values()))


def measure_register(state: SparseState, width: int, rng: np.random.Generator) -> Tuple[Key, SparseState]:
    """
    在计算基下测量前 width 个位点，返回测量结果与坍缩后剩余位点上的归一化态
    （免重置连续查询时用于丢弃寄存器）
    """
    marginal: Dict[Key, float] = defaultdict(float)
    for key, amp in state.amplitudes.items():
        marginal[key[:width]] += abs(amp) ** 2
    outcomes = sorted(marginal)
    probs = np.array([marginal[o] for o in outcomes])
    chosen = outcomes[rng.choice(len(outcomes), p=probs / probs.sum())]
    rest = SparseState(state.radices[width:], prune_tol=state.prune_tol)
    rest.amplitudes = {k[width:]: a for k, a in state.amplitudes.items() if k[:width] == chosen}
    return chosen, rest.normalize()
