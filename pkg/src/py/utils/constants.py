#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
项目常量定义
路径常量沿用项目布局，数值常量是各模块共享的容差与上限
"""

from pathlib import Path

# 项目根目录 - 从当前文件向上4级
PROJECT_ROOT = Path(__file__).parent.parent.parent.parent

# 重要路径
CONFIG_FILE = PROJECT_ROOT / "config.json"
OUTPUT_DIR = PROJECT_ROOT / "output"

# 路由器量子位的取值：0/1为主动子空间，2为等待态|W>
WAIT = 2

# 数值容差
PRUNE_TOL = 1e-15
UNITARY_TOL = 1e-12
KRAUS_TOL = 1e-10
NORM_TOL = 1e-12

# 精确验证的硬上限
DENSITY_DIM_CAP = 2 ** 14
EXHAUSTIVE_CONFIG_CAP = 2 ** 24

# 统计界检验的默认松弛（标准误倍数）
SLACK_SIGMA = 3.0

# 相干噪声界中未固定的前置常数A
THEOREM4_PREFACTOR = 4.0
