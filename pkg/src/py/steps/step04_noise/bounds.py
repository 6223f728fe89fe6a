#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
闭式保真度下界（以不保真度上界形式给出）与界的选择
所有公式直接使用调度器报告的 τ
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from utils.constants import THEOREM4_PREFACTOR


def _check(eps: float, tau: int, n: int):
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"ε 必须在 [0, 1] 内，收到: {eps}")
    if tau < 1 or n < 1:
        raise ValueError(f"τ 与 n 必须 >= 1，收到 τ={tau}, n={n}")


def bound_theorem1(eps: float, tau: int, n: int) -> float:
    """三能级、等待态初始化、随机噪声：4ε(τ+1)(n+1)"""
    _check(eps, tau, n)
    return 4 * eps * (tau + 1) * (n + 1)


def bound_lemma_two_level(eps: float, tau: int, n: int) -> float:
    """两能级、|0> 初始化：2ε(τ+1)(n+1)²"""
    _check(eps, tau, n)
    return 2 * eps * (tau + 1) * (n + 1) ** 2


def bound_theorem3(eps: float, tau: int, n: int, conservative: bool = True) -> float:
    """
    查询加倍、任意初始化：4ε(τ+1)(n+2)²
    conservative=False 时给出陈述中的 (n+1)² 形式
    """
    _check(eps, tau, n)
    width = n + 2 if conservative else n + 1
    return 4 * eps * (tau + 1) * width ** 2


def bound_theorem2(eps: float, tau: int, n: int, prefactor: float = THEOREM4_PREFACTOR) -> float:
    """相干噪声、任意初始化并查询加倍（或两能级初始化）：Aε(τ+1)²(n+2)⁴"""
    _check(eps, tau, n)
    return prefactor * eps * (tau + 1) ** 2 * (n + 2) ** 4


def bound_theorem4(eps: float, tau: int, n: int, prefactor: float = THEOREM4_PREFACTOR) -> float:
    """相干噪声（K_0 不必厄米）、三能级等待态初始化：Aε(τ+1)²(n+1)²"""
    _check(eps, tau, n)
    return prefactor * eps * (tau + 1) ** 2 * (n + 1) ** 2


def bound_theorem5_insitu(eps: float, tau: int, n: int) -> float:
    """原位延迟旋转：8ε(τ+1)(n+1)"""
    _check(eps, tau, n)
    return 8 * eps * (tau + 1) * (n + 1)


def bound_theorem5_classical(eps: float, tau: int, n: int) -> float:
    """边缘旋转 + 经典存储重排：8ε(τ+1)²(n+1)"""
    _check(eps, tau, n)
    return 8 * eps * (tau + 1) ** 2 * (n + 1)


def combine_infidelities_fvg(infidelities: Sequence[float]) -> float:
    """
    经迹距离合并多个不保真度上界：
    每项 δ 转为迹距离上界 D = sqrt(1 - (1-δ)²)，按三角不等式求和，再转回 1 - sqrt(1 - D²)
    """
    total = 0.0
    for delta in infidelities:
        if not 0.0 <= delta <= 1.0:
            raise ValueError(f"不保真度必须在 [0, 1] 内，收到: {delta}")
        total += math.sqrt(max(0.0, 1.0 - (1.0 - delta) ** 2))
    total = min(total, 1.0)
    return 1.0 - math.sqrt(1.0 - total ** 2)


@dataclass(frozen=True)
class BoundChoice:
    """选中的界：名称、函数与标度阶（假定 τ = O(n)）"""
    name: str
    function: Callable[[float, int, int], float]
    scaling: str

    def evaluate(self, eps: float, tau: int, n: int, prefactor: Optional[float] = None) -> float:
        """prefactor 只作用于相干噪声的两个界"""
        if prefactor is not None and self.function in (bound_theorem2, bound_theorem4):
            return self.function(eps, tau, n, prefactor)
        return self.function(eps, tau, n)


THEOREM1 = BoundChoice("theorem1", bound_theorem1, "n^2")
LEMMA_TWO_LEVEL = BoundChoice("lemma_two_level", bound_lemma_two_level, "n^3")
THEOREM2 = BoundChoice("theorem2", bound_theorem2, "n^6")
THEOREM3 = BoundChoice("theorem3", bound_theorem3, "n^3")
THEOREM4 = BoundChoice("theorem4", bound_theorem4, "n^4")
THEOREM5_INSITU = BoundChoice("theorem5_insitu", bound_theorem5_insitu, "n^2")
THEOREM5_CLASSICAL = BoundChoice("theorem5_classical", bound_theorem5_classical, "n^3")


def select_bound(variant: str, init: str, twirl: str, doubling: bool, noise_kind: str = "coherent") -> BoundChoice:
    """
    按误差标度汇总表选择适用的界

    Args:
        variant: two-level / three-level
        init: all-wait / all-zero / random-basis / random-phase / supplied
        twirl: none / in-situ / edge-classical
        doubling: 是否查询加倍
        noise_kind: stochastic（泡利型）或 coherent（一般/相干）

    Returns:
        BoundChoice
    """
    fixed_init = (variant == "three-level" and init == "all-wait") or (variant == "two-level" and init == "all-zero")

    if twirl == "in-situ":
        return THEOREM5_INSITU
    if twirl == "edge-classical":
        return THEOREM5_CLASSICAL
    if twirl != "none":
        raise ValueError(f"未知旋转模式: {twirl}")

    if noise_kind == "stochastic":
        if variant == "three-level" and fixed_init and not doubling:
            return THEOREM1
        if variant == "two-level" and fixed_init and not doubling:
            return LEMMA_TWO_LEVEL
        return THEOREM3

    if variant == "three-level" and fixed_init and not doubling:
        return THEOREM4
    return THEOREM2
