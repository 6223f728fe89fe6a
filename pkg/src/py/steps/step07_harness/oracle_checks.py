#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
小规模交叉验证：蒙特卡洛估计、穷举误差配置与密度矩阵演化三者对照
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from steps.step01_topology.tree_topology import RouterModel, build_tree
from steps.step02_state.sparse_state import tensor
from steps.step03_circuit.circuit_runner import (
    ideal_oracle_output, register_state, router_initial_state, uniform_addresses,
)
from steps.step03_circuit.query_circuit import build_doubled_circuit, build_query_circuit
from steps.step04_noise.channels import channel_for_rate
from steps.step04_noise.fidelity_estimator import FidelityEstimate, estimate_query_fidelity
from steps.step04_noise.noise_model import NoiseLocation, NoiseModel
from steps.step05_twirl.twirl_groups import analyze_embedding_twirl
from steps.step06_oracle.density_oracle import DenseState, run_density
from steps.step06_oracle.exhaustive_oracle import exhaustive_chi_fidelity, phase_invariance_check
from utils.constants import DENSITY_DIM_CAP, EXHAUSTIVE_CONFIG_CAP, SLACK_SIGMA
from utils.log_util import log_info

ORACLE_TOL = 1e-10


@dataclass
class OracleCheck:
    label: str
    monte_carlo: FidelityEstimate
    exhaustive: float
    density: Optional[float]

    @property
    def oracles_agree(self) -> bool:
        return self.density is None or abs(self.exhaustive - self.density) <= ORACLE_TOL

    @property
    def within_sigma(self) -> bool:
        return abs(self.monte_carlo.mean - self.exhaustive) <= SLACK_SIGMA * max(self.monte_carlo.stderr, 1e-12)

    @property
    def passed(self) -> bool:
        return self.oracles_agree and self.within_sigma

    def to_dict(self) -> Dict[str, Any]:
        return {"label": self.label, "monte_carlo": self.monte_carlo.to_dict(), "exhaustive": self.exhaustive,
                "density": self.density, "passed": self.passed}


def single_step_model(model: NoiseModel, tau: int, seed: int) -> NoiseModel:
    """每个位置只在一个随机含噪时间步生效，使穷举规模可控"""
    rng = np.random.default_rng(seed)
    return NoiseModel([
        NoiseLocation(loc.sites, loc.routers, loc.spec, frozenset({int(rng.integers(0, tau + 1))}))
        for loc in model.locations
    ])


def cross_check(n: int, variant: str, p: float, trials: int, seed: int, kind: str = "depolarizing",
                with_density: bool = True, workers: int = 1, density_cap: int = DENSITY_DIM_CAP,
                config_cap: int = EXHAUSTIVE_CONFIG_CAP) -> OracleCheck:
    """
    单个实例的三方对照

    Args:
        n: 树深度
        variant: three-level / two-level（两能级用 all-zero 初态）
        p: 伯努利概率
        trials: 蒙特卡洛轨迹数
        seed: 种子
        kind: 泡利型噪声类型
        with_density: 是否运行密度矩阵演化
        density_cap: 密度矩阵可达基底上限
        config_cap: 穷举组合数上限
    """
    tree = build_tree(n, RouterModel.from_name(variant))
    rng = np.random.default_rng(seed)
    memory = tuple(int(x) for x in rng.integers(0, 2, size=2 ** n))
    circuit = build_query_circuit(tree, memory)
    layout = circuit.layout
    model = single_step_model(NoiseModel.per_router(tree, layout, channel_for_rate(kind, p)), circuit.tau, seed)
    psi_in = register_state(layout, uniform_addresses(layout))
    routers = router_initial_state(layout, "all-wait" if variant == "three-level" else "all-zero")

    estimate = estimate_query_fidelity(tree, circuit, model, psi_in, routers, trials, seed, workers)
    exact = exhaustive_chi_fidelity(circuit, model, psi_in, routers, config_cap)
    density = None
    if with_density:
        target = ideal_oracle_output(psi_in, circuit.memory, layout, circuit.output_site)
        rho_in = DenseState.from_pure(tensor(psi_in, routers), density_cap)
        density = run_density(circuit, model, rho_in, density_cap).fidelity(target)
    check = OracleCheck(f"n={n},{variant},{kind},p={p}", estimate, exact, density)
    log_info(f"{check.label}: MC={estimate.mean:.6f}±{estimate.stderr:.1e}, 穷举={exact:.10f}, "
             f"密度={density if density is None else f'{density:.10f}'}")
    return check


def verify_suite(trials: int, seed: int, workers: int = 1, density_cap: int = DENSITY_DIM_CAP,
                 config_cap: int = EXHAUSTIVE_CONFIG_CAP) -> Dict[str, Any]:
    """verify 子命令运行的全部检查"""
    caps = {"workers": workers, "density_cap": density_cap, "config_cap": config_cap}
    checks: List[OracleCheck] = []
    for p in (0.01, 0.05):
        checks.append(cross_check(1, "three-level", p, trials, seed, **caps))
        checks.append(cross_check(1, "two-level", p, trials, seed, **caps))
        checks.append(cross_check(2, "two-level", p, trials, seed, kind="pauli-x", with_density=False, **caps))

    tree = build_tree(1, RouterModel.from_name("two-level"))
    circuit = build_doubled_circuit(tree, (0, 1))
    layout = circuit.layout
    model = single_step_model(NoiseModel.per_router(tree, layout, channel_for_rate("dephasing", 0.05)),
                              circuit.tau, seed)
    size = layout.num_router_sites
    rng = np.random.default_rng(seed)
    p_w = {tuple(int(d) for d in rng.integers(0, 2, size=size)): w for w in (0.5, 0.3, 0.2)}
    phase = phase_invariance_check(circuit, model, register_state(layout, uniform_addresses(layout)), p_w,
                                   trials=5, seed=seed)
    embedding = analyze_embedding_twirl(seed=seed)
    embedding_ok = embedding.obstruction_confirmed and embedding.max_outside_support < ORACLE_TOL
    return {
        "checks": [c.to_dict() for c in checks],
        "phase_invariance": phase.to_dict(),
        "embedding_twirl": embedding.to_dict(),
        "passed": all(c.passed for c in checks) and phase.max_deviation < ORACLE_TOL and embedding_ok,
    }
