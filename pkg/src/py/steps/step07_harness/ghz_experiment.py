#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
GHZ 地址下的相干噪声实验
均匀 e^{iκZ} 噪声的相位在 |0...0> 与 |1...1> 两个分支上相干累积，不保真度按 τ²n² 增长；
对照组为 p = sin²κ 的泡利 Z 噪声，只按 τn 增长。
两种噪声都是对角的，可达基底只有几维，所以两组都用密度矩阵精确计算，不做轨迹抽样。
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from steps.step01_topology.tree_topology import build_tree
from steps.step03_circuit.circuit_runner import ghz_addresses, register_state, router_initial_state
from steps.step03_circuit.query_circuit import build_query_circuit
from steps.step04_noise.bounds import THEOREM4
from steps.step04_noise.channels import ChannelSpec, coherent_z, dephasing
from steps.step04_noise.noise_model import NoiseLocation, NoiseModel
from steps.step06_oracle.density_oracle import density_query_fidelity
from utils.constants import NORM_TOL
from utils.log_util import log_info, log_warning
from .experiment_config import ExperimentConfig, InvalidExperiment
from .scaling_fit import ScalingFit, fit_scaling_exponent
from .sweep_runner import SweepResult, SweepRow, cell_seed, memory_for

MAX_SIN2_KAPPA = 1e-2
# κ·τ·n 超过该值后相干相位不再是小角度，1-F 随 n 呈 cos² 振荡
SMALL_ANGLE_LIMIT = 0.1
DEFAULT_KAPPA = 1e-4
MIN_EXPONENT_GAP = 1.0


def ghz_closed_form(kappa: float, hits: int) -> Tuple[float, float]:
    """
    同一个携带地址位的控制位被噪声命中 hits 次时的精确保真度

    Returns:
        (相干 e^{iκZ} 的 cos²(hits·κ), 泡利 Z (p = sin²κ) 的 (1 + (1-2p)^hits) / 2)
    """
    p = np.sin(kappa) ** 2
    return float(np.cos(hits * kappa) ** 2), float((1.0 + (1.0 - 2.0 * p) ** hits) / 2.0)


def ghz_single_router_check(kappa: float, timesteps: Iterable[int], coherent: bool = True) -> Tuple[float, float]:
    """
    n = 1 三能级 QRAM，只在根控制位的指定时间步施加噪声；返回 (密度矩阵演化值, 闭式值)
    时间步须落在控制位持有地址位的区间 [1, 2D-2] 内
    """
    steps = frozenset(int(t) for t in timesteps)
    tree = build_tree(1)
    circuit = build_query_circuit(tree, (0, 1))
    layout = circuit.layout
    if not steps or min(steps) < 1 or max(steps) > circuit.tau - 2:
        raise ValueError(f"时间步须在 [1, {circuit.tau - 2}] 内")
    spec = coherent_z(kappa) if coherent else dephasing(float(np.sin(kappa) ** 2))
    model = NoiseModel([NoiseLocation((layout.control_site(tree.root),), (tree.root,), spec, steps)])
    psi_in = register_state(layout, ghz_addresses(layout))
    simulated = density_query_fidelity(circuit, model, psi_in, router_initial_state(layout, "all-wait"))
    closed = ghz_closed_form(kappa, len(steps))
    return simulated, closed[0] if coherent else closed[1]


@dataclass
class GhzReport:
    """
    Attributes:
        coherent: 相干 Z 噪声下逐深度的精确行
        stochastic: 匹配泡利 Z 噪声下的精确行
        coherent_fit: 相干组标度拟合（深度点不足或存在 1-F = 0 时为 None）
        stochastic_fit: 随机组标度拟合
        kappa: 相干转角
    """
    coherent: SweepResult
    stochastic: SweepResult
    coherent_fit: Optional[ScalingFit]
    stochastic_fit: Optional[ScalingFit]
    kappa: float

    @property
    def separated(self) -> bool:
        """相干组指数至少大 1，且自助区间不重叠"""
        if self.coherent_fit is None or self.stochastic_fit is None:
            return False
        return self.coherent_fit.separated_above(self.stochastic_fit, MIN_EXPONENT_GAP)

    def results(self) -> Dict[str, SweepResult]:
        return {"coherent": self.coherent, "stochastic": self.stochastic}

    def violations(self) -> List[SweepRow]:
        return self.coherent.violations() + self.stochastic.violations()

    def ratios(self) -> List[float]:
        """逐深度的相干/随机不保真度之比"""
        return [c.infidelity / s.infidelity if s.infidelity > 0 else float('inf')
                for c, s in zip(self.coherent.rows, self.stochastic.rows)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kappa": self.kappa,
            "sin2_kappa": float(np.sin(self.kappa) ** 2),
            "coherent_fit": self.coherent_fit.to_dict() if self.coherent_fit else None,
            "stochastic_fit": self.stochastic_fit.to_dict() if self.stochastic_fit else None,
            "separated": self.separated,
            "ratios": self.ratios(),
            "violations": len(self.violations()),
        }


def _ghz_row(config: ExperimentConfig, n: int, label: str, spec: ChannelSpec, eps: float) -> SweepRow:
    seed = cell_seed(config.seed, n, 0)
    tree = build_tree(n, config.router_model)
    circuit = build_query_circuit(tree, memory_for(n, seed), config.schedule)
    layout = circuit.layout
    model = NoiseModel.per_router(tree, layout, spec)
    psi_in = register_state(layout, ghz_addresses(layout))
    routers = router_initial_state(layout, config.init)
    fidelity = density_query_fidelity(circuit, model, psi_in, routers, config.density_dim_cap)
    bound = THEOREM4.evaluate(model.epsilon, circuit.tau, n, config.theorem4_prefactor)
    # trials = 0 表示精确值
    return SweepRow(
        n=n, tau=circuit.tau, epsilon=eps, epsilon_router=model.epsilon, variant=config.variant,
        init=config.init, twirl="none", doubling=False, noise=label, mean=fidelity, stderr=0.0, trials=0,
        seed=seed, bound_name=THEOREM4.name, bound=bound, satisfied=bool(1.0 - fidelity <= bound + NORM_TOL),
        circuit_hash=circuit.content_hash(),
    )


def _fit(rows: List[SweepRow], config: ExperimentConfig, label: str) -> Optional[ScalingFit]:
    try:
        return fit_scaling_exponent(rows, samples=config.bootstrap_samples, seed=config.seed)
    except ValueError as e:
        log_warning(f"GHZ {label} 组无法拟合标度指数: {e}")
        return None


def ghz_coherent_experiment(config: ExperimentConfig, kappa: float = DEFAULT_KAPPA) -> GhzReport:
    """
    GHZ 地址分别在相干 Z 与匹配的泡利 Z 噪声下逐深度精确计算，两组都按 A·ε(τ+1)²(n+1)² 检查，
    再分别拟合标度指数并比较

    Args:
        config: 基础实验配置（n 范围、seed、variant、init 等；init 须为固定初态）
        kappa: 相干转角，要求 sin²κ <= 1e-2

    Returns:
        GhzReport

    Raises:
        ValueError: sin²κ 过大，或路由器初态不是固定初态
    """
    p = float(np.sin(kappa) ** 2)
    if p > MAX_SIN2_KAPPA:
        raise ValueError(f"sin²κ = {p:.3e} 超过 {MAX_SIN2_KAPPA}")
    if not config.fixed_init:
        raise InvalidExperiment(f"GHZ 实验需要固定初态，收到 {config.variant}/{config.init}")
    config.validate()

    series = {"coherent": [], "stochastic": []}
    for n in config.n_values:
        series["coherent"].append(_ghz_row(config, n, "coherent-z", coherent_z(kappa), p))
        series["stochastic"].append(_ghz_row(config, n, "pauli-z", dephasing(p), p))

    worst = max(abs(kappa) * row.tau * row.n for row in series["coherent"])
    if worst > SMALL_ANGLE_LIMIT:
        log_warning(f"κ·τ·n = {worst:.3f} 超出小角度区间，相干组不保真度会随 n 振荡")

    report = GhzReport(
        coherent=SweepResult(config=config, rows=series["coherent"]),
        stochastic=SweepResult(config=config, rows=series["stochastic"]),
        coherent_fit=_fit(series["coherent"], config, "相干"),
        stochastic_fit=_fit(series["stochastic"], config, "随机"),
        kappa=kappa,
    )
    for c_row, s_row, ratio in zip(report.coherent.rows, report.stochastic.rows, report.ratios()):
        log_info(f"GHZ n={c_row.n}: 相干 1-F={c_row.infidelity:.3e}, 随机 1-F={s_row.infidelity:.3e}, 比值 {ratio:.2f}")
    if report.coherent_fit and report.stochastic_fit:
        log_info(f"GHZ 标度指数: 相干 {report.coherent_fit.exponent:.2f}, 随机 {report.stochastic_fit.exponent:.2f}, "
                 f"分离 {'是' if report.separated else '否'}")
    return report
