#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
信道层面的旋转（群平均）与过程矩阵 χ
旋转 T(E)(ρ) = 1/|G| Σ_T T† E(T ρ T†) T 把信道投影到群的交换子上；
对泡利群旋转得到随机泡利信道
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from steps.step02_state.local_operators import PAULI_LABELS, pauli_string, qutrit_clock, qutrit_shift
from steps.step04_noise.channels import (
    ChannelSpec, choi_matrix, from_kraus, kraus_from_choi, pauli_channel,
)
from utils.log_util import log_debug, log_info


@dataclass
class TwirlGroup:
    """有限酉群（模全局相位）；elements 与 labels 一一对应"""
    elements: List[np.ndarray]
    labels: List[str]
    closed: bool = field(init=False, default=False)

    def __post_init__(self):
        if len(self.elements) != len(self.labels):
            raise ValueError("群元与标签数量不一致")
        dim = self.elements[0].shape[0]
        if not any(_equal_up_to_phase(e, np.eye(dim)) for e in self.elements):
            raise ValueError("群中缺少单位元")
        self.closed = all(
            any(_equal_up_to_phase(a @ b, c) for c in self.elements)
            for a in self.elements for b in self.elements
        )

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


def _equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    overlap = np.vdot(b, a)
    if abs(overlap) < tol:
        return False
    phase = overlap / abs(overlap)
    return np.allclose(a, phase * b, atol=tol)


def pauli_group(num_qubits: int = 1) -> TwirlGroup:
    labels = [''.join(p) for p in itertools.product(PAULI_LABELS, repeat=num_qubits)]
    return TwirlGroup([pauli_string(label) for label in labels], labels)


def group_closure(generators: Dict[str, np.ndarray]) -> TwirlGroup:
    """由生成元生成的群（模相位去重）"""
    dim = next(iter(generators.values())).shape[0]
    elements = [np.eye(dim, dtype=complex)]
    labels = ['I' * int(round(np.log2(dim)))]
    frontier = list(zip(labels, elements))
    while frontier:
        new_frontier = []
        for label, element in frontier:
            for g_label, g in generators.items():
                product = g @ element
                if not any(_equal_up_to_phase(product, e) for e in elements):
                    name = _pauli_name(product) or f"{g_label}*{label}"
                    elements.append(product)
                    labels.append(name)
                    new_frontier.append((name, product))
        frontier = new_frontier
    return TwirlGroup(elements, labels)


def _pauli_name(matrix: np.ndarray) -> str:
    num_qubits = int(round(np.log2(matrix.shape[0])))
    for labels in itertools.product(PAULI_LABELS, repeat=num_qubits):
        name = ''.join(labels)
        if _equal_up_to_phase(matrix, pauli_string(name)):
            return name
    return ''


def embedding_group() -> TwirlGroup:
    """两量子比特嵌入旋转群 <I⊗Z, Z⊗I, X⊗X>（模相位 8 个元素）"""
    return group_closure({"IZ": pauli_string("IZ"), "ZI": pauli_string("ZI"), "XX": pauli_string("XX")})


def twirl_channel(spec: ChannelSpec, group: TwirlGroup) -> ChannelSpec:
    """
    群平均后的信道；对完整泡利群返回带伯努利分解的泡利信道

    Raises:
        ValueError: 群与信道维数不符
    """
    if group.dim != spec.dim:
        raise ValueError(f"群维数 {group.dim} 与信道维数 {spec.dim} 不符")
    weight = 1.0 / len(group)
    conjugated = [np.sqrt(weight) * t.conj().T @ k @ t for t in group.elements for k in spec.kraus]
    choi = choi_matrix(conjugated)

    if spec.num_sites == 1 and len(group) == 4 and all(_pauli_name(t) for t in group.elements):
        rates = pauli_rates(from_kraus(kraus_from_choi(choi, spec.dim)))
        flip_total = rates["X"] + rates["Y"] + rates["Z"]
        if flip_total > 1.0:
            rates = {label: value / flip_total for label, value in rates.items()}
        twirled = pauli_channel(rates['X'], rates['Y'], rates['Z'])
        twirled.name = f"twirled({spec.name})"
        return twirled
    twirled = from_kraus(kraus_from_choi(choi, spec.dim), name=f"twirled({spec.name})")
    log_debug(f"旋转信道 {spec.name}: {len(twirled.kraus)} 个 Kraus 元")
    return twirled


def normalized_pauli_basis(num_qubits: int) -> Tuple[List[str], List[np.ndarray]]:
    labels = [''.join(p) for p in itertools.product(PAULI_LABELS, repeat=num_qubits)]
    scale = 1.0 / np.sqrt(2 ** num_qubits)
    return labels, [scale * pauli_string(label) for label in labels]


def chi_matrix(spec: ChannelSpec) -> np.ndarray:
    """
    归一化泡利基下的过程矩阵 χ_ab = Σ_μ c_μa conj(c_μb)，K_μ = Σ_a c_μa P̂_a；
    保迹信道的迹为 1
    """
    if spec.num_sites not in (1, 2):
        raise ValueError(f"χ 矩阵只支持一或两个量子比特，收到 {spec.num_sites}")
    _, basis = normalized_pauli_basis(spec.num_sites)
    coeffs = np.array([[np.trace(p.conj().T @ k) for p in basis] for k in spec.kraus])
    return coeffs.T @ coeffs.conj() / spec.dim


def pauli_rates(spec: ChannelSpec) -> Dict[str, float]:
    """χ 对角元给出的单比特泡利概率"""
    diagonal = np.real(np.diag(chi_matrix(spec)))
    labels, _ = normalized_pauli_basis(spec.num_sites)
    return {label: float(max(0.0, value)) for label, value in zip(labels, diagonal)}


def random_channel(dim: int, rng: np.random.Generator, num_kraus: int = 3) -> ChannelSpec:
    """随机信道：对高斯矩阵做等距正交化得到 Kraus 元"""
    stacked = rng.normal(size=(num_kraus * dim, dim)) + 1j * rng.normal(size=(num_kraus * dim, dim))
    q, _ = np.linalg.qr(stacked)
    kraus = [q[i * dim:(i + 1) * dim, :] for i in range(num_kraus)]
    return from_kraus(kraus, name="random")


def random_unital_channel(dim: int, rng: np.random.Generator, num_unitaries: int = 3) -> ChannelSpec:
    """随机混合酉（幺正保持）信道"""
    weights = rng.dirichlet(np.ones(num_unitaries))
    kraus = []
    for w in weights:
        z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        kraus.append(np.sqrt(w) * q)
    return from_kraus(kraus, name="random_unital")


@dataclass
class EmbeddingTwirlReport:
    """嵌入旋转分析结果"""
    group_labels: List[str]
    predicted_support: List[Tuple[str, str]]
    max_outside_support: float
    fixed_point_deviation: float
    qutrit_candidates: int
    qutrit_elements_checked: int

    @property
    def obstruction_confirmed(self) -> bool:
        return self.qutrit_candidates == 0

    def to_dict(self) -> Dict:
        return {
            "group_labels": self.group_labels,
            "predicted_support_size": len(self.predicted_support),
            "max_outside_support": self.max_outside_support,
            "fixed_point_deviation": self.fixed_point_deviation,
            "qutrit_candidates": self.qutrit_candidates,
            "qutrit_elements_checked": self.qutrit_elements_checked,
            "obstruction_confirmed": self.obstruction_confirmed,
        }


def predicted_embedding_support() -> List[Tuple[str, str]]:
    """旋转后 χ 的支撑：P_a P_b 正比于 II 或 ZZ 的指标对"""
    labels, _ = normalized_pauli_basis(2)
    centre = [pauli_string("II"), pauli_string("ZZ")]
    support = []
    for a in labels:
        for b in labels:
            product = pauli_string(a) @ pauli_string(b)
            if any(_equal_up_to_phase(product, c) for c in centre):
                support.append((a, b))
    return support


def qutrit_bit_flip_candidates() -> Tuple[int, int]:
    """
    穷举 27 个 qutrit 泡利元 ω^c X^a Z^b，统计同时满足
    “固定 |W>（至多差相位）且交换 |0>、|1>” 的元素个数
    """
    shift, clock = qutrit_shift(), qutrit_clock()
    omega = np.exp(2j * np.pi / 3)
    basis = np.eye(3)
    candidates = 0
    checked = 0
    for c, a, b in itertools.product(range(3), repeat=3):
        element = omega ** c * np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        checked += 1
        fixes_wait = _equal_up_to_phase(element @ basis[2], basis[2])
        swaps_active = _equal_up_to_phase(element @ basis[0], basis[1]) and \
            _equal_up_to_phase(element @ basis[1], basis[0])
        if fixes_wait and swaps_active:
            candidates += 1
    return candidates, checked


def analyze_embedding_twirl(samples: int = 20, seed: int = 0) -> EmbeddingTwirlReport:
    """
    对随机两比特信道做嵌入群旋转，检查 χ 支撑是否落在预测指标集内，
    并验证 qutrit 泡利群中不存在主动子空间上的比特翻转
    """
    rng = np.random.default_rng(seed)
    group = embedding_group()
    labels, _ = normalized_pauli_basis(2)
    index = {label: i for i, label in enumerate(labels)}
    support = predicted_embedding_support()
    mask = np.ones((16, 16), dtype=bool)
    for a, b in support:
        mask[index[a], index[b]] = False

    max_outside = 0.0
    for _ in range(samples):
        spec = random_unital_channel(4, rng)
        chi = chi_matrix(twirl_channel(spec, group))
        max_outside = max(max_outside, float(np.max(np.abs(chi[mask]))))

    # ZZ 相干旋转 e^{iκ ZZ} 已在交换子中，应为不动点
    kappa = 0.137
    zz_rotation = from_kraus([np.cos(kappa) * np.eye(4) + 1j * np.sin(kappa) * pauli_string("ZZ")], name="zz")
    deviation = float(np.max(np.abs(chi_matrix(twirl_channel(zz_rotation, group)) - chi_matrix(zz_rotation))))

    candidates, checked = qutrit_bit_flip_candidates()
    report = EmbeddingTwirlReport(
        group_labels=list(group.labels), predicted_support=support, max_outside_support=max_outside,
        fixed_point_deviation=deviation, qutrit_candidates=candidates, qutrit_elements_checked=checked,
    )
    log_info(f"嵌入旋转: 支撑外最大元 {max_outside:.2e}, 不动点偏差 {deviation:.2e}, "
             f"qutrit 候选 {candidates}/{checked}")
    return report
