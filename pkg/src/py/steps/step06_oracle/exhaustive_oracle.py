#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
穷举误差配置的精确保真度 F = Σ_χ Pr(χ) F_χ，以及路由器初态相位不变性检查
每个伯努利位置的子信道是混合酉的，因此每条 (χ, 酉选择) 轨迹都是纯态，
深度优先枚举时共享公共前缀的演化
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from steps.step02_state.sparse_state import SparseState, fidelity_against_target_over_routers, tensor
from steps.step03_circuit.circuit_runner import apply_layer, ideal_oracle_output, phase_superposition_state
from steps.step03_circuit.query_circuit import QueryCircuit
from utils.constants import EXHAUSTIVE_CONFIG_CAP
from utils.log_util import log_debug, log_info
from .density_oracle import DenseState, run_density


def _noise_slots(circuit: QueryCircuit, model) -> List[Tuple[str, Any]]:
    """把电路展开为 ('layer', 层) 与 ('noise', 位置) 的有序序列"""
    ops: List[Tuple[str, Any]] = []
    locations = model.locations if model is not None else []
    step = 0
    for layer in circuit.layers:
        ops.append(("layer", layer))
        if not layer.noisy:
            continue
        for location in locations:
            if location.active_at(step) and location.spec.bernoulli.p > 0:
                ops.append(("noise", location))
        step += 1
    return ops


def configuration_count(circuit: QueryCircuit, model, cap: int = EXHAUSTIVE_CONFIG_CAP) -> int:
    """(χ, 酉选择) 组合总数；超过 cap 后提前返回"""
    total = 1
    for kind, item in _noise_slots(circuit, model):
        if kind == "noise":
            total *= 1 + len(item.spec.bernoulli.probs)
            if total > cap:
                return total
    return total


def _check_model(model):
    if model is None:
        return
    for location in model.locations:
        if location.spec.bernoulli is None:
            raise ValueError(f"位置 {location.sites} 的信道 {location.spec.name} 没有混合酉的伯努利分解")


def _router_mixture(router_init) -> List[Tuple[float, SparseState]]:
    if isinstance(router_init, SparseState):
        return [(1.0, router_init)]
    mixture = [(float(w), s) for w, s in router_init]
    total = sum(w for w, _ in mixture)
    return [(w / total, s) for w, s in mixture]


def exhaustive_chi_fidelity(circuit: QueryCircuit, model, psi_in: SparseState,
                            router_init: Union[SparseState, Sequence[Tuple[float, SparseState]]],
                            cap: int = EXHAUSTIVE_CONFIG_CAP) -> float:
    """
    枚举全部误差配置与酉选择，返回精确的期望保真度

    Args:
        circuit: 查询电路
        model: 全部为伯努利信道的噪声模型（None 为无噪声）
        psi_in: 地址/总线输入态
        router_init: 路由器初态，或 (权重, 态) 组成的混合
        cap: 组合数上限

    Raises:
        ValueError: 存在非伯努利信道，或组合数超过上限
    """
    _check_model(model)
    count = configuration_count(circuit, model, cap)
    if count > cap:
        raise ValueError(f"误差配置数超过上限 {cap}")
    target = ideal_oracle_output(psi_in, circuit.memory, circuit.layout, circuit.output_site)
    ops = _noise_slots(circuit, model)

    total = 0.0
    for weight, routers in _router_mixture(router_init):
        stack = [(tensor(psi_in, routers), 0, weight)]
        while stack:
            state, pos, w = stack.pop()
            while pos < len(ops) and ops[pos][0] == "layer":
                state = apply_layer(state, ops[pos][1])
                pos += 1
            if pos == len(ops):
                total += w * fidelity_against_target_over_routers(state, target)
                continue
            location = ops[pos][1]
            part = location.spec.bernoulli
            stack.append((state, pos + 1, w * (1.0 - part.p)))
            for k, q in enumerate(part.probs):
                if q <= 0:
                    continue
                fired = state.apply_action(location.unitary_action(k, state.radices))
                stack.append((fired, pos + 1, w * part.p * q))
    log_debug(f"穷举 {count} 个误差配置: F = {total:.12f}")
    return float(total)


@dataclass
class PhaseInvarianceReport:
    """同一 p_w、不同对角相位 Λ 的初态给出的精确保真度"""
    fidelities: List[float]
    method: str
    phases: List[List[float]] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        if not self.fidelities:
            return 0.0
        return float(max(self.fidelities) - min(self.fidelities))

    def to_dict(self) -> Dict[str, Any]:
        return {"fidelities": self.fidelities, "max_deviation": self.max_deviation, "method": self.method}


def _exact_fidelity(circuit, model, psi_in, routers) -> Tuple[float, str]:
    bernoulli = model is None or all(loc.spec.bernoulli is not None for loc in model.locations)
    if bernoulli and configuration_count(circuit, model) <= EXHAUSTIVE_CONFIG_CAP:
        return exhaustive_chi_fidelity(circuit, model, psi_in, routers), "exhaustive"
    target = ideal_oracle_output(psi_in, circuit.memory, circuit.layout, circuit.output_site)
    rho = run_density(circuit, model, DenseState.from_pure(tensor(psi_in, routers)))
    return rho.fidelity(target), "density"


def phase_invariance_check(circuit: QueryCircuit, model, psi_in: SparseState,
                           p_w: Mapping[Sequence[int], float], trials: int = 5, seed: int = 0) -> PhaseInvarianceReport:
    """
    在 R(p_w) 中取若干只差对角相位的路由器初态，比较精确保真度

    Args:
        circuit: 两能级加倍查询
        model: 噪声模型
        psi_in: 地址/总线输入态
        p_w: 路由器基矢 -> 概率
        trials: 初态个数（第一个取零相位）
        seed: 相位抽样种子
    """
    if circuit.layout.radix != 2:
        raise ValueError("相位不变性检查只针对两能级路由器")
    keys = [tuple(k) for k in p_w]
    probs = [float(p_w[k]) for k in p_w]
    rng = np.random.default_rng(seed)
    fidelities, phase_rows, method = [], [], "exhaustive"
    for t in range(trials):
        phases = np.zeros(len(keys)) if t == 0 else rng.uniform(0, 2 * np.pi, size=len(keys))
        routers = phase_superposition_state(circuit.layout, keys, probs, phases)
        value, method = _exact_fidelity(circuit, model, psi_in, routers)
        fidelities.append(float(value))
        phase_rows.append([float(x) for x in phases])
    report = PhaseInvarianceReport(fidelities=fidelities, method=method, phases=phase_rows)
    log_info(f"相位不变性检查: {trials} 个初态, 最大偏差 {report.max_deviation:.3e} ({method})")
    return report
