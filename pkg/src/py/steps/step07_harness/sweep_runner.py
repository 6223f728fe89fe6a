#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
保真度扫描：在 (n, ε) 网格上估计查询保真度，并按误差标度汇总表检查对应的界
输出固定表头的 CSV 与 JSON 附属文件（配置、种子、电路序列化的内容哈希）
"""

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from steps.step01_topology.tree_topology import TreeTopology, build_tree
from steps.step02_state.register_layout import RegisterLayout
from steps.step02_state.sparse_state import SparseState
from steps.step03_circuit.circuit_runner import (
    ghz_addresses, random_addresses, register_state, uniform_addresses,
)
from steps.step03_circuit.query_circuit import build_doubled_circuit, build_query_circuit
from steps.step04_noise.bounds import select_bound
from steps.step04_noise.channels import channel_for_rate
from steps.step04_noise.fidelity_estimator import (
    FidelityEstimate, RouterInitSampler, estimate_query_fidelity, estimate_reset_free_fidelity, resolve_workers,
)
from steps.step04_noise.noise_model import NoiseModel
from steps.step05_twirl.delayed_twirl import InSituTwirlFactory, dress_circuit, identity_frame, max_dressed_tau
from steps.step05_twirl.edge_twirl import EdgeTwirlFactory, build_edge_twirled_circuit
from utils.constants import NORM_TOL
from utils.log_util import log_debug, log_info, log_warning
from .experiment_config import ExperimentConfig

SWEEP_HEADER = [
    "n", "tau", "epsilon", "epsilon_router", "variant", "init", "twirl", "doubling", "noise",
    "mean", "stderr", "trials", "seed", "bound_name", "bound", "satisfied", "circuit_hash",
]


@dataclass
class SweepRow:
    n: int
    tau: int
    epsilon: float
    epsilon_router: float
    variant: str
    init: str
    twirl: str
    doubling: bool
    noise: str
    mean: float
    stderr: float
    trials: int
    seed: int
    bound_name: str
    bound: float
    satisfied: bool
    circuit_hash: str

    @property
    def infidelity(self) -> float:
        return 1.0 - self.mean

    def as_list(self) -> List[Any]:
        return [getattr(self, name) for name in SWEEP_HEADER]


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: List[SweepRow] = field(default_factory=list)

    def violations(self) -> List[SweepRow]:
        return [row for row in self.rows if not row.satisfied]

    def select(self, **criteria) -> List[SweepRow]:
        """按字段值筛选，例如 select(noise="coherent-z", twirl="none")"""
        return [row for row in self.rows if all(getattr(row, k) == v for k, v in criteria.items())]

    def circuit_hashes(self) -> Dict[str, str]:
        return {f"n={row.n},twirl={row.twirl}": row.circuit_hash for row in self.rows}

    def write(self, out_dir: Optional[str] = None, stem: str = "sweep") -> Tuple[Path, Optional[Path]]:
        """
        写出 CSV 与 JSON 附属文件

        Returns:
            (csv 路径, json 路径；write_sidecar 关闭时为 None)
        """
        directory = Path(out_dir or self.config.output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        csv_path = directory / f"{stem}.csv"
        json_path = directory / f"{stem}.json"
        with open(csv_path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(SWEEP_HEADER)
            for row in self.rows:
                writer.writerow(row.as_list())
        if not self.config.write_sidecar:
            log_info(f"结果已写入: {csv_path}")
            return csv_path, None
        sidecar = {
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "circuit_hashes": self.circuit_hashes(),
            "violations": len(self.violations()),
            "created": datetime.now().isoformat(timespec='seconds'),
        }
        with open(json_path, 'w', encoding='utf-8') as f:
            json.dump(sidecar, f, ensure_ascii=False, indent=2)
        log_info(f"结果已写入: {csv_path}, {json_path}")
        return csv_path, json_path


def cell_seed(seed: int, n: int, j: int) -> int:
    """网格点 (n, 第 j 个 ε) 的派生种子，与工作进程分配无关"""
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(n, j)).generate_state(1)[0])


def memory_for(n: int, seed: int) -> Tuple[int, ...]:
    rng = np.random.default_rng(seed)
    return tuple(int(x) for x in rng.integers(0, 2, size=2 ** n))


def address_state(config: ExperimentConfig, layout: RegisterLayout, seed: int) -> SparseState:
    rng = np.random.default_rng(seed)
    if config.address == "uniform":
        amplitudes = uniform_addresses(layout)
    elif config.address == "ghz":
        amplitudes = ghz_addresses(layout)
    elif config.address == "basis":
        amplitudes = {int(rng.integers(0, layout.memory_size)): 1.0}
    else:
        amplitudes = random_addresses(layout, rng)
    return register_state(layout, amplitudes)


def build_noise_model(config: ExperimentConfig, tree: TreeTopology, layout: RegisterLayout, eps: float) -> NoiseModel:
    if config.noise_locations:
        return NoiseModel.from_declaration(config.noise_locations, tree, layout)
    return NoiseModel.per_router(tree, layout, channel_for_rate(config.noise_kind, eps))


def build_circuits(config: ExperimentConfig, tree: TreeTopology, memory: Sequence[int]):
    """
    Returns:
        (电路或逐轨迹工厂, 参考电路, 用于界的 τ)
    """
    if config.twirl == "in-situ":
        base = build_query_circuit(tree, memory, config.schedule, doubled_layout=True)
        reference = dress_circuit(base, identity_frame(base))
        return InSituTwirlFactory(base), reference, max_dressed_tau(base)
    if config.twirl == "edge-classical":
        factory = EdgeTwirlFactory(tree, memory, config.schedule, config.doubling)
        identity = {site: 'I' for site in range(factory.layout.num_register_sites)}
        reference = build_edge_twirled_circuit(tree, memory, identity, config.schedule, config.doubling)
        return factory, reference, reference.tau
    circuit = build_doubled_circuit(tree, memory, config.schedule) if config.doubling \
        else build_query_circuit(tree, memory, config.schedule)
    return circuit, circuit, circuit.tau


def run_cell(config: ExperimentConfig, n: int, j: int, workers: int = 1) -> SweepRow:
    """估计一个网格点并检查界"""
    eps = config.epsilons[j]
    seed = cell_seed(config.seed, n, j)
    tree = build_tree(n, config.router_model)
    memory = memory_for(n, seed)
    circuit, reference, tau = build_circuits(config, tree, memory)
    layout = reference.layout
    model = build_noise_model(config, tree, layout, eps)
    psi_in = address_state(config, layout, seed)
    sampler = RouterInitSampler(layout, config.init, digits=config.router_digits)

    estimate = estimate_query_fidelity(tree, circuit, model, psi_in, sampler, config.trials, seed, workers)
    choice = select_bound(config.variant, config.init, config.twirl, config.doubling,
                          "stochastic" if model.is_stochastic else "coherent")
    eps_router = model.epsilon
    bound = choice.evaluate(eps_router, tau, n, config.theorem4_prefactor)
    satisfied = estimate.infidelity <= bound + config.slack_sigma * estimate.stderr + NORM_TOL
    row = SweepRow(
        n=n, tau=tau, epsilon=eps, epsilon_router=eps_router, variant=config.variant, init=config.init,
        twirl=config.twirl, doubling=config.doubling,
        noise=config.noise_kind if not config.noise_locations else "declared",
        mean=estimate.mean, stderr=estimate.stderr, trials=estimate.trials, seed=seed,
        bound_name=choice.name, bound=bound, satisfied=bool(satisfied), circuit_hash=reference.content_hash(),
    )
    log_debug(f"n={n}, ε={eps}, 噪声模型 {model.describe()}: "
              f"1-F={row.infidelity:.3e}, 界({choice.name})={bound:.3e}")
    return row


def _run_cell_args(args) -> SweepRow:
    config, n, j = args
    return run_cell(config, n, j, workers=1)


def run_sweep(config: ExperimentConfig, workers: Optional[int] = None) -> SweepResult:
    """
    对 n × ε 网格逐点估计保真度

    Args:
        config: 实验配置（自动规范化与校验）
        workers: 进程数，默认取配置值

    Returns:
        SweepResult: 按 (n, ε) 排序的行，在给定种子下逐位可复现
    """
    config = config.normalized()
    workers = resolve_workers(config.workers if workers is None else workers)
    cells = [(config, n, j) for n in config.n_values for j in range(len(config.epsilons))]
    log_info(f"开始扫描: {len(cells)} 个网格点, {config.trials} 条轨迹/点, 进程数 {workers}")
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell_args, cells))
    else:
        rows = [run_cell(config, n, j, workers=workers) for config, n, j in cells]
    rows.sort(key=lambda row: (row.n, row.epsilon))
    result = SweepResult(config=config, rows=rows)
    if result.violations():
        log_warning(f"{len(result.violations())} 个网格点超出界")
    return result


def twirl_compare(config: ExperimentConfig, modes: Sequence[str] = ("none", "in-situ"),
                  workers: Optional[int] = None) -> SweepResult:
    """同一 ε 与种子下比较不同旋转模式"""
    rows: List[SweepRow] = []
    normalized = None
    doubling = config.doubling or "in-situ" in modes
    for mode in modes:
        result = run_sweep(replace(config, twirl=mode, doubling=doubling), workers)
        normalized = normalized or result.config
        rows.extend(result.rows)
    for n in config.n_values:
        by_mode = {row.twirl: row for row in rows if row.n == n and row.epsilon == config.epsilons[0]}
        log_info(f"n={n}: " + ", ".join(f"{m} 1-F={r.infidelity:.3e}±{r.stderr:.1e}" for m, r in by_mode.items()))
    return SweepResult(config=normalized, rows=rows)


def run_reset_free(config: ExperimentConfig, n: int, eps: float, queries: int) -> List[FidelityEstimate]:
    """免重置的连续加倍查询：路由器只在第一次查询前初始化"""
    seed = cell_seed(config.seed, n, 0)
    tree = build_tree(n, config.router_model)
    circuit = build_doubled_circuit(tree, memory_for(n, seed), config.schedule)
    model = build_noise_model(config, tree, circuit.layout, eps)
    psi_in = address_state(config, circuit.layout, seed)
    sampler = RouterInitSampler(circuit.layout, config.init, digits=config.router_digits)
    return estimate_reset_free_fidelity(tree, circuit, model, psi_in, sampler, queries, config.trials, seed)


def rows_from_csv(path: str) -> List[SweepRow]:
    """读回 CSV（scaling 拟合与审计用）"""
    types = {f.name: f.type for f in fields(SweepRow)}
    rows = []
    with open(path, 'r', encoding='utf-8') as f:
        for record in csv.DictReader(f):
            values = {}
            for name, text in record.items():
                kind = types[name]
                if kind in (bool, 'bool'):
                    values[name] = text == "True"
                elif kind in (int, 'int'):
                    values[name] = int(text)
                elif kind in (float, 'float'):
                    values[name] = float(text)
                else:
                    values[name] = text
            rows.append(SweepRow(**values))
    return rows
