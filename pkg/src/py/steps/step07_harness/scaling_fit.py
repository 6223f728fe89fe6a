#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
不保真度标度指数拟合：log(1-F) 对 log(n+1) 的最小二乘斜率，配合参数化自助法置信区间
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np
from scipy.stats import linregress

from utils.log_util import log_info

MIN_POINTS = 3
MAX_RELATIVE_STDERR = 0.1


@dataclass
class ScalingFit:
    exponent: float
    intercept: float
    ci_low: float
    ci_high: float
    n_values: List[int]

    def separated_above(self, other: "ScalingFit", margin: float = 1.0) -> bool:
        """指数至少大 margin，且自助区间不重叠"""
        return self.exponent - other.exponent >= margin and self.ci_low > other.ci_high

    def to_dict(self) -> Dict[str, Any]:
        return {"exponent": self.exponent, "intercept": self.intercept,
                "ci": [self.ci_low, self.ci_high], "n_values": self.n_values}


def fit_scaling_exponent(rows: Sequence, samples: int = 2000, seed: int = 0, confidence: float = 0.95,
                         max_relative_stderr: float = MAX_RELATIVE_STDERR) -> ScalingFit:
    """
    Args:
        rows: 同一设置下的扫描行（需要 n、mean、stderr 属性）
        samples: 自助样本数
        seed: 自助抽样种子
        confidence: 置信水平
        max_relative_stderr: 允许的 stderr/(1-F) 上限

    Raises:
        ValueError: 深度点不足、同一深度出现多行、或统计误差过大
    """
    n_values = [int(row.n) for row in rows]
    if len(set(n_values)) != len(n_values):
        raise ValueError("同一深度出现多行，请先按单一设置筛选")
    if len(n_values) < MIN_POINTS:
        raise ValueError(f"至少需要 {MIN_POINTS} 个不同的深度，当前 {len(n_values)} 个")
    infid = np.array([1.0 - row.mean for row in rows])
    stderr = np.array([row.stderr for row in rows])
    if np.any(infid <= 0):
        raise ValueError("存在 1-F <= 0 的点，无法取对数")
    if np.any(stderr / infid >= max_relative_stderr):
        raise ValueError(f"相对统计误差超过 {max_relative_stderr}，需要更多轨迹")

    x = np.log(np.array(n_values) + 1.0)
    fit = linregress(x, np.log(infid))

    rng = np.random.default_rng(seed)
    draws = infid[None, :] + stderr[None, :] * rng.standard_normal((samples, len(infid)))
    draws = np.clip(draws, infid * 1e-3, None)
    slopes = np.array([np.polyfit(x, np.log(d), 1)[0] for d in draws])
    tail = 50.0 * (1.0 - confidence)
    ci_low, ci_high = np.percentile(slopes, [tail, 100.0 - tail])
    result = ScalingFit(exponent=float(fit.slope), intercept=float(fit.intercept),
                        ci_low=float(min(ci_low, fit.slope)), ci_high=float(max(ci_high, fit.slope)),
                        n_values=n_values)
    log_info(f"标度指数 {result.exponent:.3f}，{confidence:.0%} 区间 [{result.ci_low:.3f}, {result.ci_high:.3f}]")
    return result
