#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
桶队列(bucket-brigade)路由树拓扑
路由器按广度优先编号 0..2^n-2，r 的左右孩子为 2r+1 与 2r+2；
第 n 层的第 k 个路由器的两条输出腿对应存储单元 2k 与 2k+1
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple


class RouterKind(str, Enum):
    """路由器类型"""
    TWO_LEVEL = "two-level"
    THREE_LEVEL = "three-level"


@dataclass(frozen=True)
class RouterModel:
    """路由器模型：每个路由器持有控制量子位 r_c 与保持量子位 r_h"""
    kind: RouterKind = RouterKind.THREE_LEVEL

    @property
    def local_dim(self) -> int:
        return 3 if self.kind == RouterKind.THREE_LEVEL else 2

    @property
    def has_wait_state(self) -> bool:
        return self.kind == RouterKind.THREE_LEVEL

    @classmethod
    def from_name(cls, name: str) -> "RouterModel":
        try:
            return cls(RouterKind(name))
        except ValueError:
            raise ValueError(f"未知的路由器类型: {name}（可选 two-level / three-level）")


@dataclass(frozen=True)
class TreeTopology:
    """
    完美二叉路由树，构造后只读，可在并发轨迹间共享

    Attributes:
        depth: 树深 n
        model: 路由器模型
        level: 路由器 -> 层号(1..n)
        children: 路由器 -> (左, 右)，第 n 层为 None
        leaf_cells: 第 n 层路由器 -> (左腿单元, 右腿单元)
    """
    depth: int
    model: RouterModel
    level: Dict[int, int] = field(repr=False)
    children: Dict[int, Optional[Tuple[int, int]]] = field(repr=False)
    leaf_cells: Dict[int, Tuple[int, int]] = field(repr=False)

    @property
    def num_routers(self) -> int:
        return 2 ** self.depth - 1

    @property
    def routers(self) -> range:
        return range(self.num_routers)

    @property
    def memory_size(self) -> int:
        return 2 ** self.depth

    @property
    def root(self) -> int:
        return 0

    def routers_at_level(self, level: int) -> List[int]:
        """第 level 层的路由器（按编号升序）"""
        if not 1 <= level <= self.depth:
            raise ValueError(f"层号越界: {level}")
        start = 2 ** (level - 1) - 1
        return list(range(start, 2 * start + 1))

    def parent(self, r: int) -> Optional[int]:
        self._check_router(r)
        return None if r == 0 else (r - 1) // 2

    def is_left_child(self, r: int) -> bool:
        return r != 0 and r % 2 == 1

    def subtree(self, r: int) -> FrozenSet[int]:
        """以 r 为根的子树中的全部路由器"""
        self._check_router(r)
        nodes = []
        frontier = [r]
        while frontier:
            node = frontier.pop()
            nodes.append(node)
            kids = self.children[node]
            if kids is not None:
                frontier.extend(kids)
        return frozenset(nodes)

    def are_adjacent(self, a: int, b: int) -> bool:
        return self.parent(a) == b or self.parent(b) == a

    def is_connected(self, routers: Sequence[int]) -> bool:
        """路由器集合在树上是否诱导连通子图"""
        nodes = set(routers)
        if not nodes:
            return False
        for r in nodes:
            self._check_router(r)
        # 连通子树恰好有一个节点的父节点不在集合内
        tops = [r for r in nodes if self.parent(r) not in nodes]
        return len(tops) == 1

    def _check_router(self, r: int):
        if not 0 <= r < self.num_routers:
            raise ValueError(f"路由器编号越界: {r}")

    def to_json(self) -> str:
        """序列化为JSON文档（供黄金文件测试）"""
        document = {
            "depth": self.depth,
            "router_kind": self.model.kind.value,
            "routers": list(self.routers),
            "level": [self.level[r] for r in self.routers],
            "parent": [self.parent(r) for r in self.routers],
            "children": [list(self.children[r]) if self.children[r] else None for r in self.routers],
            "leaf_cells": {str(r): list(cells) for r, cells in sorted(self.leaf_cells.items())},
            "memory_size": self.memory_size,
        }
        return json.dumps(document, ensure_ascii=False, indent=2)


def build_tree(n: int, model: Optional[RouterModel] = None) -> TreeTopology:
    """
    构造深度为 n 的路由树

    Args:
        n: 树深，需 n >= 1
        model: 路由器模型，默认三能级

    Returns:
        TreeTopology: 满足全部拓扑不变量的路由树
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"树深必须为正整数，收到: {n}")
    model = model or RouterModel()

    num_routers = 2 ** n - 1
    level: Dict[int, int] = {}
    children: Dict[int, Optional[Tuple[int, int]]] = {}
    leaf_cells: Dict[int, Tuple[int, int]] = {}

    first_leaf = 2 ** (n - 1) - 1
    for r in range(num_routers):
        level[r] = (r + 1).bit_length()
        if level[r] < n:
            children[r] = (2 * r + 1, 2 * r + 2)
        else:
            children[r] = None
            k = r - first_leaf
            leaf_cells[r] = (2 * k, 2 * k + 1)

    return TreeTopology(depth=n, model=model, level=level, children=children, leaf_cells=leaf_cells)


def address_bits(tree: TreeTopology, i) -> Tuple[int, ...]:
    """把地址（整数或比特串/序列）转为最高位在前的 n 比特元组"""
    n = tree.depth
    if isinstance(i, str):
        if len(i) != n or any(ch not in "01" for ch in i):
            raise ValueError(f"地址必须为 {n} 位比特串，收到: {i!r}")
        return tuple(int(ch) for ch in i)
    if isinstance(i, int):
        if not 0 <= i < tree.memory_size:
            raise ValueError(f"地址越界: {i}")
        return tuple((i >> (n - 1 - m)) & 1 for m in range(n))
    bits = tuple(int(b) for b in i)
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"地址必须为 {n} 位，收到: {i!r}")
    return bits


def branch(tree: TreeTopology, i) -> List[int]:
    """
    地址 i 激活的分支 R_i：从根到存储单元的 n 个路由器

    Args:
        tree: 路由树
        i: 地址（整数、比特串或比特序列），第 m 位选择第 m 层的输出腿(0为左)

    Returns:
        List[int]: 按层排列的路由器编号
    """
    bits = address_bits(tree, i)
    path = [tree.root]
    for bit in bits[:-1]:
        left, right = tree.children[path[-1]]
        path.append(right if bit else left)
    return path


def branch_cell(tree: TreeTopology, i) -> int:
    """分支末端路由器的输出腿所指向的存储单元"""
    bits = address_bits(tree, i)
    leaf = branch(tree, bits)[-1]
    return tree.leaf_cells[leaf][bits[-1]]


def propagation_envelope(tree: TreeTopology, r: int) -> FrozenSet[int]:
    """
    两能级分析中的传播包络 S_r：
    从 r 向上走，只要当前节点是左孩子就继续；停在第一个右孩子或根，返回其子树
    """
    node = r
    tree._check_router(node)
    while tree.is_left_child(node):
        node = tree.parent(node)
    return tree.subtree(node)
