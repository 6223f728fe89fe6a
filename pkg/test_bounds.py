#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试闭式界、迹距离合并与界的选择表
"""

import math
import sys
from pathlib import Path

import pytest

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root / "src" / "py"))

from steps.step04_noise.bounds import (
    bound_lemma_two_level, bound_theorem1, bound_theorem2, bound_theorem3, bound_theorem4,
    bound_theorem5_classical, bound_theorem5_insitu, combine_infidelities_fvg, select_bound,
)

ALL_BOUNDS = [bound_theorem1, bound_lemma_two_level, bound_theorem2, bound_theorem3, bound_theorem4,
              bound_theorem5_insitu, bound_theorem5_classical]


def test_theorem1_example():
    """4 · 1e-3 · 10 · 3 = 0.12"""
    assert bound_theorem1(1e-3, 9, 2) == pytest.approx(0.12)


@pytest.mark.parametrize("bound", ALL_BOUNDS)
def test_zero_epsilon_gives_zero(bound):
    assert bound(0.0, 9, 2) == 0.0


def test_formulas():
    eps, tau, n = 2e-4, 13, 3
    assert bound_lemma_two_level(eps, tau, n) == pytest.approx(2 * eps * 14 * 16)
    assert bound_theorem3(eps, tau, n) == pytest.approx(4 * eps * 14 * 25)
    assert bound_theorem3(eps, tau, n, conservative=False) == pytest.approx(4 * eps * 14 * 16)
    assert bound_theorem4(eps, tau, n) == pytest.approx(4 * eps * 14 ** 2 * 16)
    assert bound_theorem2(eps, tau, n) == pytest.approx(4 * eps * 14 ** 2 * 5 ** 4)
    assert bound_theorem5_classical(eps, tau, n) == pytest.approx(8 * eps * 14 ** 2 * 4)


def test_insitu_is_twice_theorem1():
    for eps, tau, n in [(1e-3, 9, 2), (5e-4, 30, 4)]:
        assert bound_theorem5_insitu(eps, tau, n) == pytest.approx(2 * bound_theorem1(eps, tau, n))


def test_bad_arguments():
    with pytest.raises(ValueError):
        bound_theorem1(1.5, 9, 2)
    with pytest.raises(ValueError):
        bound_theorem1(1e-3, 0, 2)


def test_combine_single_entry():
    assert combine_infidelities_fvg([0.03]) == pytest.approx(0.03, abs=1e-12)


def test_combine_zeros():
    assert combine_infidelities_fvg([0.0, 0.0]) == 0.0


def test_combine_two_entries():
    total = math.sqrt(1 - 0.99 ** 2) + math.sqrt(1 - 0.98 ** 2)
    assert combine_infidelities_fvg([0.01, 0.02]) == pytest.approx(1 - math.sqrt(1 - total ** 2))


def test_combine_rejects_out_of_range():
    with pytest.raises(ValueError):
        combine_infidelities_fvg([1.2])


@pytest.mark.parametrize("variant,init,twirl,doubling,noise,expected", [
    ("three-level", "all-wait", "none", False, "stochastic", "theorem1"),
    ("two-level", "all-zero", "none", False, "stochastic", "lemma_two_level"),
    ("two-level", "random-basis", "none", True, "stochastic", "theorem3"),
    ("three-level", "random-phase", "none", True, "stochastic", "theorem3"),
    ("three-level", "all-wait", "none", False, "coherent", "theorem4"),
    ("two-level", "all-zero", "none", True, "coherent", "theorem2"),
    ("two-level", "random-basis", "none", True, "coherent", "theorem2"),
    ("two-level", "all-zero", "in-situ", True, "coherent", "theorem5_insitu"),
    ("two-level", "random-basis", "edge-classical", True, "coherent", "theorem5_classical"),
    ("three-level", "all-wait", "edge-classical", False, "coherent", "theorem5_classical"),
])
def test_select_bound_table(variant, init, twirl, doubling, noise, expected):
    assert select_bound(variant, init, twirl, doubling, noise).name == expected


def test_select_bound_unknown_twirl():
    with pytest.raises(ValueError):
        select_bound("three-level", "all-wait", "sideways", False)


def test_prefactor_only_scales_coherent_bounds():
    coherent = select_bound("three-level", "all-wait", "none", False, "coherent")
    stochastic = select_bound("three-level", "all-wait", "none", False, "stochastic")
    assert coherent.evaluate(1e-3, 8, 1, prefactor=2.0) == pytest.approx(0.5 * coherent.evaluate(1e-3, 8, 1))
    assert stochastic.evaluate(1e-3, 8, 1, prefactor=2.0) == stochastic.evaluate(1e-3, 8, 1)
