#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
规范寄存器布局
位点顺序：地址 a_1..a_n，总线 B，可选第二总线 B'，
随后按广度优先依次为每个路由器的控制位与保持位，最后是 2^n 个存储腿位点 L_0..L_{N-1}
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from steps.step01_topology.tree_topology import TreeTopology


@dataclass(frozen=True)
class RegisterLayout:
    """
    Attributes:
        depth: 树深 n
        radix: 每个位点的维数（三能级路由器为3，地址与总线与等待态交换内容，因此同样取3）
        doubled: 是否包含第二总线 B'
    """
    depth: int
    radix: int
    doubled: bool = False

    @classmethod
    def from_tree(cls, tree: TreeTopology, doubled: bool = False) -> "RegisterLayout":
        return cls(depth=tree.depth, radix=tree.model.local_dim, doubled=doubled)

    @property
    def num_routers(self) -> int:
        return 2 ** self.depth - 1

    @property
    def memory_size(self) -> int:
        return 2 ** self.depth

    @property
    def bus_site(self) -> int:
        return self.depth

    @property
    def bus2_site(self) -> int:
        if not self.doubled:
            raise ValueError("该布局不含第二总线 B'")
        return self.depth + 1

    @property
    def num_register_sites(self) -> int:
        """地址与总线位点数（保真度计算中保留的部分）"""
        return self.depth + (2 if self.doubled else 1)

    @property
    def router_offset(self) -> int:
        return self.num_register_sites

    @property
    def leg_offset(self) -> int:
        return self.router_offset + 2 * self.num_routers

    @property
    def num_sites(self) -> int:
        return self.leg_offset + self.memory_size

    @property
    def num_router_sites(self) -> int:
        return self.num_sites - self.num_register_sites

    @property
    def radices(self) -> Tuple[int, ...]:
        return (self.radix,) * self.num_sites

    @property
    def register_radices(self) -> Tuple[int, ...]:
        return (self.radix,) * self.num_register_sites

    @property
    def router_radices(self) -> Tuple[int, ...]:
        return (self.radix,) * self.num_router_sites

    def address_site(self, m: int) -> int:
        """第 m 个地址位（1起）"""
        if not 1 <= m <= self.depth:
            raise ValueError(f"地址位序号越界: {m}")
        return m - 1

    def control_site(self, r: int) -> int:
        self._check_router(r)
        return self.router_offset + 2 * r

    def hold_site(self, r: int) -> int:
        self._check_router(r)
        return self.router_offset + 2 * r + 1

    def leg_site(self, cell: int) -> int:
        if not 0 <= cell < self.memory_size:
            raise ValueError(f"存储单元越界: {cell}")
        return self.leg_offset + cell

    def router_of_site(self, site: int) -> Optional[int]:
        """位点所属的路由器；地址与总线返回None，存储腿归属其叶路由器"""
        self._check_site(site)
        if site < self.router_offset:
            return None
        if site < self.leg_offset:
            return (site - self.router_offset) // 2
        cell = site - self.leg_offset
        return (2 ** (self.depth - 1) - 1) + cell // 2

    def site_role(self, site: int) -> str:
        """位点角色：address / bus / bus2 / control / hold / leg"""
        self._check_site(site)
        if site < self.depth:
            return "address"
        if site == self.bus_site:
            return "bus"
        if site < self.router_offset:
            return "bus2"
        if site < self.leg_offset:
            return "control" if (site - self.router_offset) % 2 == 0 else "hold"
        return "leg"

    def site_label(self, site: int) -> str:
        """位点的可读标签，如 a1 / B / B2 / c0 / h3 / L5"""
        role = self.site_role(site)
        if role == "address":
            return f"a{site + 1}"
        if role == "bus":
            return "B"
        if role == "bus2":
            return "B2"
        if role == "leg":
            return f"L{site - self.leg_offset}"
        r = self.router_of_site(site)
        return f"{'c' if role == 'control' else 'h'}{r}"

    def _check_router(self, r: int):
        if not 0 <= r < self.num_routers:
            raise ValueError(f"路由器编号越界: {r}")

    def _check_site(self, site: int):
        if not 0 <= site < self.num_sites:
            raise ValueError(f"位点越界: {site}（共 {self.num_sites} 个）")
