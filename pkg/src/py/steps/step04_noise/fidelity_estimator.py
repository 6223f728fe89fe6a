#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
查询保真度的蒙特卡洛估计
第 k 条轨迹使用 SeedSequence(entropy=seed, spawn_key=(k,)) 派生的随机数，
因此结果与工作进程数和任务分配无关；轨迹批次通过进程池并行执行
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import psutil

from steps.step02_state.register_layout import RegisterLayout
from steps.step02_state.sparse_state import (
    SparseState, fidelity_against_target_over_routers, measure_register, tensor,
)
from steps.step03_circuit.circuit_runner import ideal_oracle_output, router_initial_state, run_circuit
from .noise_model import NoiseModel
from utils.log_util import log_debug, log_info


@dataclass
class FidelityEstimate:
    """查询保真度的蒙特卡洛估计；stderr = 样本标准差 / sqrt(trials)"""
    mean: float
    stderr: float
    trials: int
    seed: int

    @property
    def infidelity(self) -> float:
        return 1.0 - self.mean

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean, "stderr": self.stderr, "trials": self.trials, "seed": self.seed}


def resolve_workers(workers: Optional[int] = None) -> int:
    """workers <= 0 或未指定时使用物理核数"""
    if workers and workers > 0:
        return int(workers)
    return max(1, psutil.cpu_count(logical=False) or psutil.cpu_count() or 1)


def trajectory_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k,)))


@dataclass
class RouterInitSampler:
    """
    逐轨迹抽样的路由器初态（可跨进程序列化）

    Attributes:
        layout: 寄存器布局
        init: all-wait / all-zero / random-basis / random-phase / supplied
        digits: supplied 时的数字串
        support: random-phase 时叠加的基矢个数
    """
    layout: RegisterLayout
    init: str
    digits: Optional[Sequence[int]] = None
    support: int = 4

    def __call__(self, rng: np.random.Generator) -> SparseState:
        if self.init != "random-phase":
            return router_initial_state(self.layout, self.init, rng=rng, digits=self.digits)
        size = self.layout.num_router_sites
        keys = {tuple(int(d) for d in rng.integers(0, 2, size=size)) for _ in range(self.support)}
        keys = sorted(keys)
        probs = rng.dirichlet(np.ones(len(keys)))
        phases = rng.uniform(0, 2 * np.pi, size=len(keys))
        amplitudes = {k: np.sqrt(p) * np.exp(1j * t) for k, p, t in zip(keys, probs, phases)}
        return SparseState(self.layout.router_radices, amplitudes).normalize()


@dataclass
class TrajectoryTask:
    """一组轨迹共享的输入；circuit 与 router_init 既可以是固定对象，也可以是以 rng 为参数的工厂"""
    circuit: Any
    model: Optional[NoiseModel]
    register_in: SparseState
    router_init: Union[SparseState, Callable[[np.random.Generator], SparseState]]
    target: SparseState
    seed: int

    def run(self, k: int) -> float:
        rng = trajectory_rng(self.seed, k)
        circuit = self.circuit(rng) if callable(self.circuit) else self.circuit
        routers = self.router_init(rng) if callable(self.router_init) else self.router_init
        state = tensor(self.register_in, routers)
        output = run_circuit(state, circuit, self.model, rng=rng)
        return fidelity_against_target_over_routers(output, self.target)


def _run_chunk(task: TrajectoryTask, indices: Sequence[int]) -> List[float]:
    return [task.run(k) for k in indices]


def _chunks(trials: int, parts: int) -> List[range]:
    size = math.ceil(trials / parts)
    return [range(start, min(start + size, trials)) for start in range(0, trials, size)]


def run_trajectories(task: TrajectoryTask, trials: int, workers: int = 1) -> np.ndarray:
    """按轨迹编号顺序返回每条轨迹的保真度"""
    workers = resolve_workers(workers)
    if workers == 1 or trials < 2 * workers:
        return np.array(_run_chunk(task, range(trials)))
    chunks = _chunks(trials, workers * 4)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_run_chunk, [task] * len(chunks), chunks))
    return np.array([f for chunk in results for f in chunk])


def summarize(values: np.ndarray, seed: int) -> FidelityEstimate:
    trials = len(values)
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return FidelityEstimate(mean=float(np.clip(mean, 0.0, 1.0)), stderr=stderr, trials=trials, seed=seed)


def estimate_query_fidelity(tree, circuit, model: Optional[NoiseModel], psi_in: SparseState,
                            router_init, trials: int, seed: int, workers: int = 1) -> FidelityEstimate:
    """
    查询保真度 F = <ψ_out| Tr_R(σ_out) |ψ_out> 的蒙特卡洛估计

    Args:
        tree: 路由树
        circuit: QueryCircuit，或以 rng 为参数返回电路的工厂（旋转电路逐轨迹抽样）
        model: 噪声模型，None 表示无噪声
        psi_in: 地址/总线输入态（总线为 |+>）
        router_init: 路由器初态，或以 rng 为参数的抽样器
        trials: 轨迹数
        seed: 主种子
        workers: 进程数（1 为串行，<=0 为物理核数）

    Returns:
        FidelityEstimate: 均值、标准误、轨迹数与种子
    """
    if trials < 1:
        raise ValueError("trials 必须 >= 1")
    if circuit.layout.depth != tree.depth:
        raise ValueError("电路与路由树深度不一致")
    target = ideal_oracle_output(psi_in, circuit.memory, circuit.layout, circuit.output_site)
    task = TrajectoryTask(circuit=circuit, model=model, register_in=psi_in, router_init=router_init,
                          target=target, seed=int(seed))
    log_debug(f"估计查询保真度: n={tree.depth}, trials={trials}, seed={seed}")
    values = run_trajectories(task, trials, workers)
    estimate = summarize(values, int(seed))
    log_debug(f"F = {estimate.mean:.6f} ± {estimate.stderr:.2e}")
    return estimate


def estimate_reset_free_fidelity(tree, circuit, model: Optional[NoiseModel], psi_in: SparseState,
                                 router_init, queries: int, trials: int, seed: int) -> List[FidelityEstimate]:
    """
    免重置连续查询：路由器在查询之间不重新初始化，
    每次查询后在计算基下测量并丢弃地址/总线寄存器，剩余路由器态作为下一次查询的初态

    Returns:
        List[FidelityEstimate]: 第 q 次查询的保真度估计
    """
    target = ideal_oracle_output(psi_in, circuit.memory, circuit.layout, circuit.output_site)
    width = circuit.layout.num_register_sites
    per_query = np.zeros((trials, queries))
    for k in range(trials):
        rng = trajectory_rng(seed, k)
        routers = router_init(rng) if callable(router_init) else router_init
        for q in range(queries):
            output = run_circuit(tensor(psi_in, routers), circuit, model, rng=rng)
            per_query[k, q] = fidelity_against_target_over_routers(output, target)
            _, routers = measure_register(output, width, rng)
    estimates = [summarize(per_query[:, q], seed) for q in range(queries)]
    log_info("免重置查询保真度: " + ", ".join(f"{e.mean:.5f}" for e in estimates))
    return estimates
