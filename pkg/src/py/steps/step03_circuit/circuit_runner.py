#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
电路执行：在稀疏纯态上逐层作用门事件，并在每个含噪时间步之后抽样作用噪声
"""

from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from steps.step02_state.register_layout import RegisterLayout
from steps.step02_state.sparse_state import SparseState
from utils.constants import NORM_TOL, WAIT
from .query_circuit import Layer, QueryCircuit

INV_SQRT2 = 1.0 / np.sqrt(2.0)


def apply_layer(state: SparseState, layer: Layer) -> SparseState:
    for event in layer.events:
        action = event.action
        if event.is_permutation:
            state = state.apply_permutation(lambda key, act=action: act(key)[0][0])
        else:
            state = state.apply_action(action)
    return state


def run_circuit(state: SparseState, circuit: QueryCircuit, noise=None, rng_seed=None,
                rng: Optional[np.random.Generator] = None, config=None) -> SparseState:
    """
    执行电路

    Args:
        state: 与电路布局一致的输入态
        circuit: 查询电路
        noise: 可选 NoiseModel
        rng_seed: 随机种子（未给出 rng 时使用）
        rng: 随机数发生器
        config: 可选 ErrorConfig，强制伯努利位置的触发模式

    Returns:
        SparseState: 输出轨迹态（含噪时已归一化）
    """
    if state.radices != circuit.layout.radices:
        raise ValueError(f"输入态布局（{state.num_sites} 个位点）与电路布局（{circuit.layout.num_sites} 个位点）不一致")
    locations = noise.locations if noise is not None else []
    if locations and rng is None:
        rng = np.random.default_rng(rng_seed)
    if config is not None and config.num_steps != circuit.tau + 1:
        raise ValueError("误差配置列数与电路时间步不一致")

    step = 0
    for layer in circuit.layers:
        state = apply_layer(state, layer)
        if not layer.noisy:
            continue
        for row, location in enumerate(locations):
            if location.active_at(step):
                fire = None if config is None else bool(config.chi[row, step])
                state = location.apply_sampled(state, rng, fire=fire)
        step += 1
    return state


# ---------- 输入态 ----------

def register_state(layout: RegisterLayout, address_amplitudes: Mapping, bus_plus: bool = True) -> SparseState:
    """
    地址/总线寄存器态 Σ α_i |i>|+>_B（双查询布局中 B' 同样为 |+>）

    Args:
        layout: 寄存器布局
        address_amplitudes: 地址（整数或比特串）-> 振幅，自动归一化
        bus_plus: 总线是否取 |+>（否则为 |0>）
    """
    n = layout.depth
    bus_values = (0, 1) if bus_plus else (0,)
    bus2_values = (0, 1) if layout.doubled else ()
    amplitudes: Dict[tuple, complex] = {}
    for address, alpha in address_amplitudes.items():
        bits = _bits(n, address)
        for b in bus_values:
            weight = INV_SQRT2 if bus_plus else 1.0
            if layout.doubled:
                for b2 in bus2_values:
                    amplitudes[bits + (b, b2)] = alpha * weight * INV_SQRT2
            else:
                amplitudes[bits + (b,)] = alpha * weight
    state = SparseState(layout.register_radices, amplitudes)
    return state.normalize()


def _bits(n: int, address) -> tuple:
    if isinstance(address, str):
        return tuple(int(ch) for ch in address)
    if isinstance(address, (int, np.integer)):
        return tuple((int(address) >> (n - 1 - m)) & 1 for m in range(n))
    return tuple(int(b) for b in address)


def uniform_addresses(layout: RegisterLayout) -> Dict[int, complex]:
    return {i: 1.0 for i in range(layout.memory_size)}


def ghz_addresses(layout: RegisterLayout) -> Dict[int, complex]:
    """GHZ 地址 (|0...0> + |1...1>)/√2"""
    return {0: 1.0, layout.memory_size - 1: 1.0}


def random_addresses(layout: RegisterLayout, rng: np.random.Generator) -> Dict[int, complex]:
    amps = rng.normal(size=layout.memory_size) + 1j * rng.normal(size=layout.memory_size)
    return {i: complex(a) for i, a in enumerate(amps)}


def router_initial_state(layout: RegisterLayout, init: str = "all-wait", rng: Optional[np.random.Generator] = None,
                         digits: Optional[Sequence[int]] = None) -> SparseState:
    """
    路由器（含存储腿）初态

    Args:
        layout: 寄存器布局
        init: all-wait / all-zero / random-basis / supplied
        rng: random-basis 使用的随机数发生器
        digits: supplied 时给定的数字串
    """
    size = layout.num_router_sites
    if init == "all-wait":
        if layout.radix != 3:
            raise ValueError("两能级路由器没有等待态")
        key = (WAIT,) * size
    elif init == "all-zero":
        key = (0,) * size
    elif init == "random-basis":
        if rng is None:
            raise ValueError("random-basis 初始化需要随机数发生器")
        key = tuple(int(d) for d in rng.integers(0, 2, size=size))
    elif init == "supplied":
        if digits is None or len(digits) != size:
            raise ValueError(f"supplied 初始化需要 {size} 个数字")
        key = tuple(int(d) for d in digits)
    else:
        raise ValueError(f"未知初始化方式: {init}")
    return SparseState(layout.router_radices, {key: 1.0})


def phase_superposition_state(layout: RegisterLayout, keys: Sequence[Sequence[int]],
                              probs: Sequence[float], phases: Sequence[float]) -> SparseState:
    """R(p_w) 中的路由器初态 Σ_w sqrt(p_w) e^{iθ_w} |w>"""
    if not (len(keys) == len(probs) == len(phases)):
        raise ValueError("keys / probs / phases 长度不一致")
    amplitudes = {tuple(k): np.sqrt(p) * np.exp(1j * theta) for k, p, theta in zip(keys, probs, phases)}
    return SparseState(layout.router_radices, amplitudes).normalize()


def ideal_oracle_output(psi_in: SparseState, memory: Sequence[int], layout: Optional[RegisterLayout] = None,
                        output_site: Optional[int] = None) -> SparseState:
    """
    理想预言机输出 Σ α_i |i> Z^{x_i}|+>

    Args:
        psi_in: 地址/总线寄存器上的输入态，输出位点须处于 |+>
        memory: 经典存储
        layout: 寄存器布局
        output_site: 取回比特所在位点（单查询为 B，双查询为 B'）
    """
    if layout is None:
        depth = int(round(np.log2(len(memory))))
        layout = RegisterLayout(depth=depth, radix=psi_in.radices[0], doubled=psi_in.num_sites == depth + 2)
    n = layout.depth
    if output_site is None:
        output_site = layout.bus2_site if layout.doubled else layout.bus_site
    if psi_in.radices != layout.register_radices:
        raise ValueError("输入态不在地址/总线寄存器上")
    if len(memory) != layout.memory_size:
        raise ValueError("存储长度不符")
    _check_plus(psi_in, output_site)

    output = SparseState(psi_in.radices, prune_tol=psi_in.prune_tol)
    for key, amp in psi_in.amplitudes.items():
        i = 0
        for bit in key[:n]:
            if bit not in (0, 1):
                raise ValueError("地址寄存器含非比特数字")
            i = (i << 1) | bit
        sign = -1.0 if (memory[i] and key[output_site] == 1) else 1.0
        output.amplitudes[key] = sign * amp
    return output


def _check_plus(psi_in: SparseState, site: int):
    """输出位点必须处于 |+>：每个基矢都有振幅相同的翻转伙伴"""
    for key, amp in psi_in.amplitudes.items():
        if key[site] not in (0, 1):
            raise ValueError("总线含非比特数字")
        partner = list(key)
        partner[site] ^= 1
        if abs(psi_in.amplitudes.get(tuple(partner), 0.0) - amp) > NORM_TOL:
            raise ValueError("预言机只对 |+> 总线定义")
