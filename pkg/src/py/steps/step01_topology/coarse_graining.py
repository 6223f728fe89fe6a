#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
粗粒化映射 g_{d,u} 与有效错误率 ε_d

g_{d,u} 保留顶部 u 层不收缩，随后每 d 层收缩为一个超级路由器（维数 D = 2^d + 1），
末尾不足 d 层的部分同样不收缩。d > 1 时未收缩的外围层在该粒化下视为无噪声。
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .tree_topology import TreeTopology
from utils.log_util import log_debug, log_info, log_warning


@dataclass(frozen=True)
class GrainedTree:
    """
    粗粒化后的路由树

    Attributes:
        d: 粒度
        u: 顶部不收缩的层数
        quotient: 路由器 -> 超级路由器编号
        super_routers: 超级路由器编号 -> 其包含的路由器
        super_dim: 超级路由器的局部维数 2^d + 1
        noiseless_peripheries: 本粒化下视为无噪声的外围路由器
        contracted_blocks: 被收缩的层区间 (起始层, 结束层)
    """
    d: int
    u: int
    quotient: Dict[int, int] = field(repr=False)
    super_routers: Dict[int, Tuple[int, ...]] = field(repr=False)
    super_dim: int
    noiseless_peripheries: FrozenSet[int]
    contracted_blocks: Tuple[Tuple[int, int], ...]

    @property
    def is_identity(self) -> bool:
        return self.d == 1

    def super_router_of(self, routers: Iterable[int]) -> Optional[int]:
        """若全部路由器落在同一个收缩后的超级路由器内，返回其编号"""
        targets = {self.quotient[r] for r in routers}
        if len(targets) != 1:
            return None
        sid = targets.pop()
        members = self.super_routers[sid]
        if not self.is_identity and len(members) == 1 and members[0] in self.noiseless_peripheries:
            return None
        return sid


@dataclass
class EffectiveRates:
    """有效错误率报告：rates[d] = ε_d；assignment[位置序号] = (d, u, 超级路由器)"""
    rates: Dict[int, float]
    assignment: Dict[int, Tuple[int, int, int]]
    unassignable: List[int]
    per_super_router: Dict[Tuple[int, int, int], float]

    def to_dict(self) -> Dict:
        return {
            "rates": {str(d): eps for d, eps in sorted(self.rates.items())},
            "assignment": {str(k): list(v) for k, v in sorted(self.assignment.items())},
            "unassignable": list(self.unassignable),
        }


def coarse_grain(tree: TreeTopology, d: int, u: int = 0) -> GrainedTree:
    """
    构造粗粒化 g_{d,u}

    Args:
        tree: 路由树
        d: 粒度，1 <= d <= n
        u: 顶部不收缩的层数，0 <= u <= d-1（d = 1 时忽略）

    Returns:
        GrainedTree: 仅通过边收缩得到的商树
    """
    n = tree.depth
    if not 1 <= d <= n:
        raise ValueError(f"粒度 d 必须在 [1, {n}] 内，收到: {d}")
    if d == 1:
        u = 0
    elif not 0 <= u <= d - 1:
        raise ValueError(f"偏移 u 必须在 [0, {d - 1}] 内，收到: {u}")

    quotient: Dict[int, int] = {}
    super_routers: Dict[int, Tuple[int, ...]] = {}
    peripheries = set()
    blocks: List[Tuple[int, int]] = []

    if d > 1:
        start = u + 1
        while start + d - 1 <= n:
            blocks.append((start, start + d - 1))
            start += d

    contracted_levels = {lvl for lo, hi in blocks for lvl in range(lo, hi + 1)}

    for lo, hi in blocks:
        for top in tree.routers_at_level(lo):
            members = sorted(r for r in tree.subtree(top) if tree.level[r] <= hi)
            for r in members:
                quotient[r] = top
            super_routers[top] = tuple(members)

    for r in tree.routers:
        if tree.level[r] in contracted_levels:
            continue
        quotient[r] = r
        super_routers[r] = (r,)
        if d > 1:
            peripheries.add(r)

    grained = GrainedTree(
        d=d, u=u, quotient=quotient, super_routers=super_routers,
        super_dim=2 ** d + 1, noiseless_peripheries=frozenset(peripheries),
        contracted_blocks=tuple(blocks),
    )
    log_debug(f"粗粒化 g_({d},{u}): 收缩层区间 {blocks}，外围路由器 {len(peripheries)} 个")
    return grained


def all_grainings(tree: TreeTopology, max_d: int) -> List[GrainedTree]:
    """按 (d, u) 字典序列出 d <= max_d 的全部粗粒化"""
    grainings = [coarse_grain(tree, 1, 0)]
    for d in range(2, min(max_d, tree.depth) + 1):
        for u in range(d):
            grainings.append(coarse_grain(tree, d, u))
    return grainings


def effective_error_rates(grainings: List[GrainedTree], noise) -> EffectiveRates:
    """
    将每个团簇信道分配到能容纳其支撑的最小 d（其次最小 u）的粒化，
    ε_d 取该粒度下各超级路由器所分得信道错误率之和的最大值

    Args:
        grainings: 候选粗粒化列表
        noise: NoiseModel

    Returns:
        EffectiveRates: 各 d 的有效错误率、分配表与无法分配的位置
    """
    from steps.step04_noise.channels import error_rate

    ordered = sorted(grainings, key=lambda g: (g.d, g.u))
    rates: Dict[int, float] = {g.d: 0.0 for g in ordered}
    per_super: Dict[Tuple[int, int, int], float] = {}
    assignment: Dict[int, Tuple[int, int, int]] = {}
    unassignable: List[int] = []

    rate_cache: Dict[int, float] = {}
    for index, location in enumerate(noise.locations):
        key = id(location.spec)
        if key not in rate_cache:
            rate_cache[key] = error_rate(location.spec)
        eps = rate_cache[key]

        for grained in ordered:
            sid = grained.super_router_of(location.routers)
            if sid is not None:
                slot = (grained.d, grained.u, sid)
                assignment[index] = slot
                per_super[slot] = per_super.get(slot, 0.0) + eps
                break
        else:
            unassignable.append(index)

    for (d, _, _), total in per_super.items():
        rates[d] = max(rates[d], total)

    if len(assignment) + len(unassignable) != len(noise.locations):
        raise RuntimeError("信道分配计数不一致")
    if unassignable:
        log_warning(f"有 {len(unassignable)} 个信道的支撑无法放入任何粒化")
    log_info(f"有效错误率: " + ", ".join(f"ε_{d}={eps:.3e}" for d, eps in sorted(rates.items())))
    return EffectiveRates(rates=rates, assignment=assignment, unassignable=unassignable, per_super_router=per_super)
