#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置加载工具
读取项目根目录的config.json，并与内置默认值递归合并
"""

import copy
import json
from pathlib import Path
from typing import Any, Dict, Optional

from utils.constants import (
    CONFIG_FILE, DENSITY_DIM_CAP, EXHAUSTIVE_CONFIG_CAP, OUTPUT_DIR, SLACK_SIGMA, THEOREM4_PREFACTOR,
)
from utils.log_util import log_info, log_warning

DEFAULT_CONFIG: Dict[str, Any] = {
    "simulation": {
        "workers": 0,
        "density_dim_cap": DENSITY_DIM_CAP,
        "exhaustive_config_cap": EXHAUSTIVE_CONFIG_CAP,
        "slack_sigma": SLACK_SIGMA,
        "theorem4_prefactor": THEOREM4_PREFACTOR,
        "bootstrap_samples": 2000,
    },
    "experiment": {
        "variant": "three-level",
        "init": "all-wait",
        "n_min": 1,
        "n_max": 3,
        "epsilons": [1e-3],
        "noise_kind": "depolarizing",
        "twirl": "none",
        "doubling": False,
        "address": "uniform",
        "schedule": "serial",
        "trials": 2000,
        "seed": 20240501,
    },
    "noise": {
        "locations": [],
    },
    "output": {
        "dir": str(OUTPUT_DIR),
        "write_sidecar": True,
    },
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """递归合并字典，override中的值优先"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """
    加载配置文件

    Args:
        path: 配置文件路径，默认为项目根目录的config.json

    Returns:
        Dict: 合并默认值后的完整配置
    """
    config_path = Path(path) if path else CONFIG_FILE
    if not config_path.exists():
        if path:
            raise FileNotFoundError(f"配置文件不存在: {config_path}")
        log_warning(f"未找到配置文件 {config_path}，使用默认配置")
        return copy.deepcopy(DEFAULT_CONFIG)

    with open(config_path, 'r', encoding='utf-8') as f:
        user_config = json.load(f)

    log_info(f"已加载配置: {config_path}")
    return _merge(DEFAULT_CONFIG, user_config)
