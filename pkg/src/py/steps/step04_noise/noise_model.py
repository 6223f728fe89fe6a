#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
噪声模型、误差配置 χ 与好子空间分析
每个含噪时间步之后，按规范顺序（最小路由器编号、支撑大小、最小位点）依次作用全部噪声位置
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from steps.step01_topology.tree_topology import TreeTopology, branch, propagation_envelope
from steps.step02_state.register_layout import RegisterLayout
from steps.step02_state.sparse_state import SparseState, ZeroWeightBranch, operator_action
from .channels import ChannelSpec, channel_from_declaration, error_rate
from utils.constants import NORM_TOL
from utils.log_util import log_info, log_warning

MAX_RESAMPLE = 16


@dataclass(eq=False)
class NoiseLocation:
    """
    Attributes:
        sites: 信道作用的位点（顺序即 Kraus 元的张量顺序）
        routers: 支撑路由器集合（存储腿归属其叶路由器）
        spec: 信道
        timesteps: 生效的含噪时间步下标集合，None 表示每步都生效
    """
    sites: Tuple[int, ...]
    routers: Tuple[int, ...]
    spec: ChannelSpec
    timesteps: Optional[FrozenSet[int]] = None
    _actions: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.sites = tuple(self.sites)
        self.routers = tuple(sorted(set(self.routers)))
        if len(self.sites) != self.spec.num_sites:
            raise ValueError(f"位点数 {len(self.sites)} 与信道位点数 {self.spec.num_sites} 不符")
        if self.timesteps is not None:
            self.timesteps = frozenset(self.timesteps)

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return (min(self.routers) if self.routers else -1, len(self.routers), min(self.sites))

    def active_at(self, step: int) -> bool:
        return self.timesteps is None or step in self.timesteps

    def unitary_action(self, k: int, radices: Sequence[int]):
        key = ("u", k, radices[0])
        if key not in self._actions:
            matrix = self.spec.lifted_unitaries(radices[0])[k]
            self._actions[key] = operator_action(self.sites, matrix, radices)
        return self._actions[key]

    def kraus_action(self, k: int, radices: Sequence[int]):
        key = ("k", k, radices[0])
        if key not in self._actions:
            matrix = self.spec.lifted_kraus(radices[0])[k]
            self._actions[key] = operator_action(self.sites, matrix, radices)
        return self._actions[key]

    def apply_sampled(self, state: SparseState, rng: np.random.Generator,
                      fire: Optional[bool] = None) -> SparseState:
        """
        抽样作用一次本位置的信道

        Args:
            state: 归一化的轨迹态
            rng: 随机数发生器
            fire: 给定误差配置时强制触发/不触发（仅伯努利信道）
        """
        part = self.spec.bernoulli
        if part is not None:
            draw = rng.random()
            fired = (draw < part.p) if fire is None else fire
            if not fired:
                return state
            k = int(rng.choice(len(part.probs), p=part.probs)) if len(part.probs) > 1 else 0
            return state.apply_action(self.unitary_action(k, state.radices))

        kraus_count = len(self.spec.kraus)
        if kraus_count == 1:
            return state.apply_action(self.kraus_action(0, state.radices)).normalize()

        branches = [state.apply_action(self.kraus_action(k, state.radices)) for k in range(kraus_count)]
        weights = np.array([b.norm_squared() for b in branches])
        total = weights.sum()
        if total <= 0:
            raise ZeroWeightBranch(f"位置 {self.sites} 的全部 Kraus 分支权重为零")
        for _ in range(MAX_RESAMPLE):
            k = int(rng.choice(kraus_count, p=weights / total))
            if weights[k] > NORM_TOL ** 2:
                return branches[k].normalize()
            log_warning(f"位置 {self.sites} 抽到零权重 Kraus 分支 {k}，重新抽样")
        raise ZeroWeightBranch(f"位置 {self.sites} 连续抽到零权重分支")

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_actions"] = {}
        return state


@dataclass
class NoiseModel:
    """噪声位置列表；构造后按规范顺序排序"""
    locations: List[NoiseLocation] = field(default_factory=list)

    def __post_init__(self):
        self.locations = sorted(self.locations, key=lambda loc: loc.sort_key)

    @classmethod
    def per_router(cls, tree: TreeTopology, layout: RegisterLayout, spec: ChannelSpec,
                   include_legs: bool = True, registers: Sequence[str] = ("control", "hold")) -> "NoiseModel":
        """
        每个路由器的每个量子位上放置同一个单位点信道；叶路由器的存储腿也视为其一部分

        Args:
            tree: 路由树
            layout: 寄存器布局
            spec: 单位点信道
            include_legs: 是否给存储腿加噪声
            registers: 加噪声的路由器寄存器
        """
        if spec.num_sites != 1:
            raise ValueError("per_router 只接受单位点信道")
        locations = []
        for r in tree.routers:
            if "control" in registers:
                locations.append(NoiseLocation((layout.control_site(r),), (r,), spec))
            if "hold" in registers:
                locations.append(NoiseLocation((layout.hold_site(r),), (r,), spec))
            if include_legs and tree.children[r] is None:
                for cell in tree.leaf_cells[r]:
                    locations.append(NoiseLocation((layout.leg_site(cell),), (r,), spec))
        return cls(locations)

    @classmethod
    def from_declaration(cls, declarations: Iterable[Dict], tree: TreeTopology,
                         layout: RegisterLayout) -> "NoiseModel":
        """
        由配置文档构造噪声模型，每项形如
        {"routers": [0, 1], "registers": ["hold", "hold"], "kind": "correlated-pauli", "p": 0.01, "labels": ["XX"],
         "timesteps": [3, 4]}
        registers 取值 control / hold / leg0 / leg1，缺省为每个路由器的 hold
        """
        locations = []
        for item in declarations:
            routers = [int(r) for r in item["routers"]]
            registers = item.get("registers", ["hold"] * len(routers))
            if len(registers) != len(routers):
                raise ValueError(f"routers 与 registers 长度不一致: {item}")
            sites = [_register_site(tree, layout, r, reg) for r, reg in zip(routers, registers)]
            spec = channel_from_declaration(item)
            timesteps = item.get("timesteps")
            locations.append(NoiseLocation(tuple(sites), tuple(routers), spec,
                                           frozenset(timesteps) if timesteps is not None else None))
        model = cls(locations)
        model.validate(tree)
        log_info(f"从配置加载噪声模型: {len(model.locations)} 个位置")
        return model

    @classmethod
    def correlated_pair(cls, tree: TreeTopology, layout: RegisterLayout, routers: Sequence[int],
                        spec: ChannelSpec, registers: Sequence[str] = ("hold", "hold"),
                        timesteps: Optional[Iterable[int]] = None) -> "NoiseModel":
        """两个相邻路由器上的团簇信道"""
        if len(routers) != 2 or spec.num_sites != 2:
            raise ValueError("correlated_pair 需要两个路由器与两位点信道")
        a, b = (int(r) for r in routers)
        if not tree.are_adjacent(a, b):
            raise ValueError(f"路由器 {a} 与 {b} 不相邻")
        sites = tuple(_register_site(tree, layout, r, reg) for r, reg in zip((a, b), registers))
        location = NoiseLocation(sites, (a, b), spec, frozenset(timesteps) if timesteps is not None else None)
        return cls([location])

    def extended(self, more: Iterable[NoiseLocation]) -> "NoiseModel":
        return NoiseModel(list(self.locations) + list(more))

    @property
    def is_bernoulli(self) -> bool:
        return all(loc.spec.bernoulli is not None for loc in self.locations)

    @property
    def is_stochastic(self) -> bool:
        return all(loc.spec.is_stochastic for loc in self.locations)

    def validate(self, tree: TreeTopology, max_cluster: Optional[int] = None):
        """支撑必须是树上的连通子图，且大小不超过 max_cluster"""
        for loc in self.locations:
            if not tree.is_connected(loc.routers):
                raise ValueError(f"信道支撑 {loc.routers} 在树上不连通")
            if max_cluster is not None and len(loc.routers) > max_cluster:
                raise ValueError(f"信道支撑 {loc.routers} 超过团簇上限 {max_cluster}")

    def router_rate_sums(self) -> Dict[int, float]:
        """每个路由器上单路由器信道的错误率之和"""
        cache: Dict[int, float] = {}
        sums: Dict[int, float] = {}
        for loc in self.locations:
            if len(loc.routers) != 1:
                continue
            key = id(loc.spec)
            if key not in cache:
                cache[key] = error_rate(loc.spec)
            sums[loc.routers[0]] = sums.get(loc.routers[0], 0.0) + cache[key]
        return sums

    @property
    def epsilon(self) -> float:
        """界公式使用的单路由器错误率 ε（各路由器求和后的最大值，即 ε_1）"""
        sums = self.router_rate_sums()
        return max(sums.values()) if sums else 0.0

    def bernoulli_probabilities(self) -> np.ndarray:
        if not self.is_bernoulli:
            raise ValueError("模型含非伯努利信道，无法抽样误差配置")
        return np.array([loc.spec.bernoulli.p for loc in self.locations])

    def describe(self) -> str:
        names = sorted({loc.spec.name for loc in self.locations})
        return f"{len(self.locations)} 个位置, 信道: {', '.join(names) or '无'}"


def _register_site(tree: TreeTopology, layout: RegisterLayout, r: int, register: str) -> int:
    if register == "control":
        return layout.control_site(r)
    if register == "hold":
        return layout.hold_site(r)
    if register in ("leg0", "leg1"):
        if tree.children[r] is not None:
            raise ValueError(f"路由器 {r} 不是叶路由器，没有存储腿")
        return layout.leg_site(tree.leaf_cells[r][int(register[-1])])
    raise ValueError(f"未知寄存器: {register}")


@dataclass
class ErrorConfig:
    """误差配置 χ：行为噪声位置，列为含噪时间步 1..τ+1"""
    chi: np.ndarray

    @property
    def num_locations(self) -> int:
        return self.chi.shape[0]

    @property
    def num_steps(self) -> int:
        return self.chi.shape[1]

    def fired_locations(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.chi.any(axis=1))]


def sample_config(model: NoiseModel, tau: int, seed) -> ErrorConfig:
    """每个元素以所在位置的 p 独立取 1（未生效的时间步恒为 0）"""
    probs = model.bernoulli_probabilities()
    rng = np.random.default_rng(seed)
    steps = tau + 1
    chi = rng.random((len(model.locations), steps)) < probs[:, None]
    for row, loc in enumerate(model.locations):
        if loc.timesteps is not None:
            mask = np.array([loc.active_at(s) for s in range(steps)])
            chi[row] &= mask
    return ErrorConfig(chi=chi)


@dataclass(frozen=True)
class GoodSubspace:
    """V_χ 与（两能级时的）V'_χ"""
    v_chi: FrozenSet[int]
    v_prime: Optional[FrozenSet[int]] = None


def good_subspace(config: ErrorConfig, tree: TreeTopology, circuit, model: NoiseModel,
                  two_level: Optional[bool] = None) -> GoodSubspace:
    """
    V_χ = {i : 没有任何触发位置与 R_i 相交}；
    V'_χ 进一步去掉与任一触发路由器的传播包络 S_r 相交的分支

    Args:
        config: 误差配置
        tree: 路由树
        circuit: 查询电路（用于核对时间步数）
        model: 噪声模型（给出每个位置的支撑）
        two_level: 是否计算 V'_χ，默认按路由器模型判断
    """
    if config.num_locations != len(model.locations):
        raise ValueError("误差配置行数与噪声位置数不一致")
    if circuit is not None and config.num_steps != circuit.tau + 1:
        raise ValueError(f"误差配置列数 {config.num_steps} 与 τ+1 = {circuit.tau + 1} 不一致")
    if two_level is None:
        two_level = not tree.model.has_wait_state

    faulted = set()
    for row in config.fired_locations():
        faulted.update(model.locations[row].routers)

    envelope = set()
    if two_level:
        for r in faulted:
            envelope.update(propagation_envelope(tree, r))

    v_chi, v_prime = set(), set()
    for i in range(tree.memory_size):
        path = set(branch(tree, i))
        if path & faulted:
            continue
        v_chi.add(i)
        if two_level and not (path & envelope):
            v_prime.add(i)
    return GoodSubspace(frozenset(v_chi), frozenset(v_prime) if two_level else None)


def branch_survival_probability(model: NoiseModel, tree: TreeTopology, tau: int, i) -> float:
    """Pr(i ∈ V_χ)：与 R_i 相交的所有位置在全部生效时间步都不触发的概率"""
    probs = model.bernoulli_probabilities()
    path = set(branch(tree, i))
    survival = 1.0
    for p, loc in zip(probs, model.locations):
        if path.intersection(loc.routers):
            active = sum(1 for s in range(tau + 1) if loc.active_at(s))
            survival *= (1.0 - p) ** active
    return survival
