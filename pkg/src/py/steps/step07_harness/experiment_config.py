#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
实验配置：由 config.json 的 experiment / noise / simulation / output 段构造，并校验组合的合法性
"""

from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional

from steps.step01_topology.tree_topology import RouterModel
from steps.step03_circuit.query_circuit import ScheduleKind
from utils.constants import (
    DENSITY_DIM_CAP, EXHAUSTIVE_CONFIG_CAP, OUTPUT_DIR, SLACK_SIGMA, THEOREM4_PREFACTOR,
)
from utils.log_util import log_warning

VARIANTS = ("three-level", "two-level")
INITS = ("all-wait", "all-zero", "random-basis", "random-phase", "supplied")
TWIRLS = ("none", "in-situ", "edge-classical")
NOISE_KINDS = ("depolarizing", "pauli-x", "pauli-z", "dephasing", "coherent-z", "amplitude-damping")
ADDRESSES = ("uniform", "ghz", "basis", "random")


class InvalidExperiment(ValueError):
    """实验配置组合不合法"""


@dataclass
class ExperimentConfig:
    """
    Attributes:
        variant: three-level / two-level
        init: 路由器初始化方式
        n_min, n_max: 树深度范围
        epsilons: 名义单位点错误率
        noise_kind: 逐位点噪声类型（noise_locations 非空时改用显式声明）
        twirl: none / in-situ / edge-classical
        doubling: 是否查询加倍
        trials: 每个网格点的轨迹数
        seed: 主种子
        schedule: serial / pipelined
        address: 地址输入态
        noise_locations: 显式噪声位置声明
        router_digits: supplied 初始化的数字串
        workers: 进程数（0 为物理核数）
        output_dir: 结果目录
        slack_sigma: 界检查的统计余量（标准误倍数）
        theorem4_prefactor: 相干噪声界的常数 A
        bootstrap_samples: 标度拟合的自助样本数
        density_dim_cap: 密度矩阵可达基底上限
        exhaustive_config_cap: 穷举误差配置数上限
        write_sidecar: 是否写出 JSON 附属文件
    """
    variant: str = "three-level"
    init: str = "all-wait"
    n_min: int = 1
    n_max: int = 3
    epsilons: List[float] = field(default_factory=lambda: [1e-3])
    noise_kind: str = "depolarizing"
    twirl: str = "none"
    doubling: bool = False
    trials: int = 2000
    seed: int = 20240501
    schedule: str = "serial"
    address: str = "uniform"
    noise_locations: List[Dict[str, Any]] = field(default_factory=list)
    router_digits: Optional[List[int]] = None
    workers: int = 0
    output_dir: str = str(OUTPUT_DIR)
    slack_sigma: float = SLACK_SIGMA
    theorem4_prefactor: float = THEOREM4_PREFACTOR
    bootstrap_samples: int = 2000
    density_dim_cap: int = DENSITY_DIM_CAP
    exhaustive_config_cap: int = EXHAUSTIVE_CONFIG_CAP
    write_sidecar: bool = True

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> "ExperimentConfig":
        """由完整配置（load_config 的返回值）构造"""
        experiment = dict(config.get("experiment", {}))
        simulation = config.get("simulation", {})
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(experiment) - known)
        if unknown:
            raise InvalidExperiment(f"experiment 段含未知字段: {unknown}")
        experiment.setdefault("noise_locations", config.get("noise", {}).get("locations", []))
        experiment.setdefault("workers", simulation.get("workers", 0))
        experiment.setdefault("slack_sigma", simulation.get("slack_sigma", SLACK_SIGMA))
        for key in ("theorem4_prefactor", "bootstrap_samples", "density_dim_cap", "exhaustive_config_cap"):
            if key in simulation:
                experiment.setdefault(key, simulation[key])
        experiment.setdefault("write_sidecar", config.get("output", {}).get("write_sidecar", True))
        experiment.setdefault("output_dir", config.get("output", {}).get("dir", str(OUTPUT_DIR)))
        return cls(**experiment)

    @property
    def n_values(self) -> List[int]:
        return list(range(self.n_min, self.n_max + 1))

    @property
    def router_model(self) -> RouterModel:
        return RouterModel.from_name(self.variant)

    @property
    def fixed_init(self) -> bool:
        return (self.variant == "three-level" and self.init == "all-wait") or \
               (self.variant == "two-level" and self.init == "all-zero")

    def validate(self):
        """
        Raises:
            InvalidExperiment: 违反的条件写在消息里
        """
        _choice("variant", self.variant, VARIANTS)
        _choice("init", self.init, INITS)
        _choice("twirl", self.twirl, TWIRLS)
        _choice("address", self.address, ADDRESSES)
        if not self.noise_locations:
            _choice("noise_kind", self.noise_kind, NOISE_KINDS)
        if self.schedule not in {k.value for k in ScheduleKind}:
            raise InvalidExperiment(f"未知调度方式: {self.schedule}")
        if self.n_min < 1 or self.n_max < self.n_min:
            raise InvalidExperiment(f"深度范围无效: {self.n_min}..{self.n_max}")
        if self.trials < 1:
            raise InvalidExperiment("trials 必须 >= 1")
        if not self.epsilons or any(not 0.0 <= e <= 1.0 for e in self.epsilons):
            raise InvalidExperiment(f"错误率必须在 [0, 1] 内: {self.epsilons}")
        if self.variant == "two-level" and self.init == "all-wait":
            raise InvalidExperiment("两能级路由器没有等待态，不能用 all-wait 初始化")
        if self.twirl == "in-situ" and self.variant != "two-level":
            raise InvalidExperiment("原位旋转要求两能级路由器")
        if self.init == "supplied":
            if self.n_min != self.n_max or self.router_digits is None:
                raise InvalidExperiment("supplied 初始化需要单一深度与 router_digits")
        if not self.fixed_init and not self.doubling:
            raise InvalidExperiment("非固定初态必须查询加倍（拷贝门只能平凡地作用在路由器上）")
        if self.twirl == "in-situ" and not self.doubling:
            raise InvalidExperiment("原位旋转电路总是加倍查询")

    def normalized(self) -> "ExperimentConfig":
        """强制打开必需的查询加倍后校验"""
        config = self
        if not self.doubling and (not self.fixed_init or self.twirl == "in-situ"):
            log_warning(f"{self.variant}/{self.init}/{self.twirl} 需要查询加倍，已自动开启")
            config = replace(self, doubling=True)
        config.validate()
        return config

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _choice(name: str, value: str, allowed):
    if value not in allowed:
        raise InvalidExperiment(f"{name} 取值 {value} 不在 {list(allowed)} 中")
