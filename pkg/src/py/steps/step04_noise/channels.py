#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
信道描述与错误率泛函
ChannelSpec 保存局部（或团簇）空间上的 Kraus 表示；混合酉信道同时保存伯努利分解
E = (1-p)·id + p·Σ_k q_k U_k(·)U_k†，供快速轨迹抽样与穷举验证使用
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from steps.step02_state.local_operators import PAULI, coherent_z as coherent_z_matrix, lift_operator, pauli_string
from utils.constants import KRAUS_TOL


class ChannelTag(str, Enum):
    PAULI = "pauli"
    BERNOULLI = "bernoulli"
    COHERENT = "coherent"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class BernoulliPart:
    """伯努利分解：以概率 p 触发，触发后按 probs 选择酉算符"""
    p: float
    unitaries: Tuple[np.ndarray, ...]
    probs: Tuple[float, ...]
    labels: Tuple[str, ...] = ()


@dataclass(eq=False)
class ChannelSpec:
    """
    Attributes:
        kraus: Kraus 元列表（量子比特空间，团簇信道为 2^k 维）
        tag: pauli / bernoulli / coherent / general
        num_sites: 作用的位点数
        bernoulli: 可选的伯努利分解
        kappa: 相干旋转角（coherent 信道）
        name: 描述名
    """
    kraus: Tuple[np.ndarray, ...]
    tag: ChannelTag = ChannelTag.GENERAL
    num_sites: int = 1
    bernoulli: Optional[BernoulliPart] = None
    kappa: Optional[float] = None
    name: str = "general"
    _lift_cache: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.kraus:
            raise ValueError("Kraus 列表为空")
        self.kraus = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        dim = 2 ** self.num_sites
        for k in self.kraus:
            if k.shape != (dim, dim):
                raise ValueError(f"Kraus 元维数 {k.shape} 与 {self.num_sites} 个位点不符")
        completeness = sum(k.conj().T @ k for k in self.kraus)
        if not np.allclose(completeness, np.eye(dim), atol=KRAUS_TOL):
            raise ValueError("Kraus 元不满足 Σ K†K = I")
        if self.bernoulli is not None:
            reference = bernoulli_kraus(self.bernoulli, dim)
            if not np.allclose(choi_matrix(reference), choi_matrix(self.kraus), atol=KRAUS_TOL):
                raise ValueError("伯努利分解与 Kraus 表示不一致")

    @property
    def dim(self) -> int:
        return 2 ** self.num_sites

    @property
    def principal_index(self) -> int:
        """K_0：Tr(K†K) 最大的 Kraus 元"""
        weights = [float(np.real(np.trace(k.conj().T @ k))) for k in self.kraus]
        return int(np.argmax(weights))

    @property
    def principal_kraus(self) -> np.ndarray:
        return self.kraus[self.principal_index]

    @property
    def is_stochastic(self) -> bool:
        """触发部分全部由泡利串构成"""
        return self.tag == ChannelTag.PAULI

    def lifted_kraus(self, radix: int) -> Tuple[np.ndarray, ...]:
        """
        提升到 radix 维位点：K_μ -> K_μ ⊕ c_μ·I_W，c_μ = sqrt(Tr(K_μ†K_μ)/d)
        （对酉混合的 √w·U 恰为 √w·(U ⊕ I)，保持完全正定保迹）
        """
        key = ("kraus", radix)
        if key not in self._lift_cache:
            lifted = []
            for k in self.kraus:
                scale = np.sqrt(np.real(np.trace(k.conj().T @ k)) / self.dim)
                lifted.append(lift_operator(k, self.num_sites, radix, wait_scale=scale))
            self._lift_cache[key] = tuple(lifted)
        return self._lift_cache[key]

    def lifted_unitaries(self, radix: int) -> Tuple[np.ndarray, ...]:
        if self.bernoulli is None:
            raise ValueError(f"信道 {self.name} 没有伯努利分解")
        key = ("unitary", radix)
        if key not in self._lift_cache:
            self._lift_cache[key] = tuple(lift_operator(u, self.num_sites, radix) for u in self.bernoulli.unitaries)
        return self._lift_cache[key]

    def to_dict(self) -> Dict:
        """JSON 友好的描述（Kraus 元拆为实部/虚部数组）"""
        return {
            "name": self.name,
            "tag": self.tag.value,
            "num_sites": self.num_sites,
            "kappa": self.kappa,
            "kraus": [{"real": k.real.tolist(), "imag": k.imag.tolist()} for k in self.kraus],
        }

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_lift_cache"] = {}
        return state


# ---------- 信道代数 ----------

def choi_matrix(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Choi 矩阵 Σ_μ vec(K_μ) vec(K_μ)†（行优先向量化）"""
    vecs = [np.asarray(k, dtype=complex).reshape(-1) for k in kraus]
    return sum(np.outer(v, v.conj()) for v in vecs)


def kraus_from_choi(choi: np.ndarray, dim: int, tol: float = 1e-12) -> List[np.ndarray]:
    """由 Choi 矩阵的谱分解恢复最少的 Kraus 元"""
    choi = (choi + choi.conj().T) / 2
    eigvals, eigvecs = scipy.linalg.eigh(choi)
    kraus = []
    for value, vec in sorted(zip(eigvals, eigvecs.T), key=lambda pair: -pair[0]):
        if value > tol:
            kraus.append(np.sqrt(value) * vec.reshape(dim, dim))
    return kraus


def bernoulli_kraus(part: BernoulliPart, dim: int) -> List[np.ndarray]:
    kraus = []
    if part.p < 1:
        kraus.append(np.sqrt(1 - part.p) * np.eye(dim, dtype=complex))
    for u, q in zip(part.unitaries, part.probs):
        if part.p * q > 0:
            kraus.append(np.sqrt(part.p * q) * np.asarray(u, dtype=complex))
    return kraus


# ---------- 信道工厂 ----------

def _check_probability(p: float, name: str = "p"):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} 必须在 [0, 1] 内，收到: {p}")


def bernoulli(p: float, unitaries: Sequence[np.ndarray], probs: Optional[Sequence[float]] = None,
              labels: Sequence[str] = (), tag: ChannelTag = ChannelTag.BERNOULLI,
              name: str = "bernoulli") -> ChannelSpec:
    """伯努利信道：以概率 p 作用子信道 Σ q_k U_k(·)U_k†"""
    _check_probability(p)
    unitaries = tuple(np.asarray(u, dtype=complex) for u in unitaries)
    if not unitaries:
        raise ValueError("伯努利子信道至少需要一个酉算符")
    if probs is None:
        probs = [1.0 / len(unitaries)] * len(unitaries)
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0) or not np.isclose(probs.sum(), 1.0, atol=KRAUS_TOL):
        raise ValueError("子信道概率必须非负且和为1")
    dim = unitaries[0].shape[0]
    num_sites = int(round(np.log2(dim)))
    part = BernoulliPart(p=float(p), unitaries=unitaries, probs=tuple(float(q) for q in probs),
                         labels=tuple(labels))
    return ChannelSpec(kraus=tuple(bernoulli_kraus(part, dim)), tag=tag, num_sites=num_sites,
                       bernoulli=part, name=name)


def pauli_channel(px: float, py: float, pz: float) -> ChannelSpec:
    """单量子比特泡利信道"""
    p = px + py + pz
    _check_probability(p, "px+py+pz")
    labels, weights = [], []
    for label, w in (("X", px), ("Y", py), ("Z", pz)):
        if w < 0:
            raise ValueError("泡利概率不能为负")
        if w > 0:
            labels.append(label)
            weights.append(w)
    if not labels:
        labels, weights = ["X"], [1.0]
        p = 0.0
    probs = np.asarray(weights) / sum(weights)
    return bernoulli(p, [PAULI[l] for l in labels], probs, labels=labels, tag=ChannelTag.PAULI,
                     name=f"pauli({px:g},{py:g},{pz:g})")


def correlated_pauli(p: float, labels: Sequence[str], probs: Optional[Sequence[float]] = None) -> ChannelSpec:
    """多位点关联泡利信道，如 labels=['XX'] 作用在两个路由器的保持位上"""
    unitaries = [pauli_string(label) for label in labels]
    return bernoulli(p, unitaries, probs, labels=labels, tag=ChannelTag.PAULI,
                     name=f"correlated({','.join(labels)},{p:g})")


def depolarizing(p: float) -> ChannelSpec:
    spec = pauli_channel(p / 3, p / 3, p / 3)
    spec.name = f"depolarizing({p:g})"
    return spec


def bit_flip(p: float) -> ChannelSpec:
    spec = pauli_channel(p, 0.0, 0.0)
    spec.name = f"bit_flip({p:g})"
    return spec


def dephasing(p: float) -> ChannelSpec:
    spec = pauli_channel(0.0, 0.0, p)
    spec.name = f"dephasing({p:g})"
    return spec


def coherent_z(kappa: float) -> ChannelSpec:
    """相干相位误差 e^{iκZ}（单个 Kraus 元，错误率 sin²κ）"""
    return ChannelSpec(kraus=(coherent_z_matrix(kappa),), tag=ChannelTag.COHERENT, kappa=float(kappa),
                       name=f"coherent_z({kappa:g})")


def amplitude_damping(gamma: float) -> ChannelSpec:
    _check_probability(gamma, "gamma")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return ChannelSpec(kraus=(k0, k1), tag=ChannelTag.GENERAL, name=f"amplitude_damping({gamma:g})")


def from_kraus(kraus: Sequence[np.ndarray], name: str = "kraus") -> ChannelSpec:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus:
        raise ValueError("Kraus 列表为空")
    num_sites = int(round(np.log2(kraus[0].shape[0])))
    return ChannelSpec(kraus=tuple(kraus), tag=ChannelTag.GENERAL, num_sites=num_sites, name=name)


def channel_for_rate(kind: str, epsilon: float) -> ChannelSpec:
    """按名称构造错误率恰为 epsilon 的单位点信道"""
    if kind == "depolarizing":
        return depolarizing(epsilon)
    if kind == "pauli-x":
        return bit_flip(epsilon)
    if kind in ("pauli-z", "dephasing"):
        return dephasing(epsilon)
    if kind == "coherent-z":
        return coherent_z(float(np.arcsin(np.sqrt(epsilon))))
    if kind == "amplitude-damping":
        return amplitude_damping(epsilon)
    raise ValueError(f"未知噪声类型: {kind}")


def channel_from_declaration(declaration: Dict) -> ChannelSpec:
    """
    由配置声明构造信道

    声明示例：{"kind": "depolarizing", "p": 0.001}、{"kind": "coherent-z", "kappa": 0.03}、
    {"kind": "correlated-pauli", "p": 0.01, "labels": ["XX"]}、
    {"kind": "kraus", "kraus": [{"real": [[...]], "imag": [[...]]}, ...]}
    """
    kind = declaration.get("kind")
    if kind == "kraus":
        kraus = [np.asarray(k["real"], dtype=float) + 1j * np.asarray(k.get("imag", np.zeros_like(k["real"])), dtype=float)
                 for k in declaration["kraus"]]
        return from_kraus(kraus, name=declaration.get("name", "kraus"))
    if kind == "correlated-pauli":
        return correlated_pauli(float(declaration["p"]), declaration["labels"], declaration.get("probs"))
    if kind == "pauli":
        return pauli_channel(float(declaration.get("px", 0)), float(declaration.get("py", 0)),
                             float(declaration.get("pz", 0)))
    if kind == "coherent-z" and "kappa" in declaration:
        return coherent_z(float(declaration["kappa"]))
    if "p" in declaration:
        return channel_for_rate(kind, float(declaration["p"]))
    if "epsilon" in declaration:
        return channel_for_rate(kind, float(declaration["epsilon"]))
    raise ValueError(f"无法解析的信道声明: {declaration}")


# ---------- 错误率与极分解 ----------

def error_rate(spec: ChannelSpec) -> float:
    """
    ε = 1 - min_ψ |Re<K_0>_ψ|²
    min_ψ |<ψ|H|ψ>|（H 为 K_0 的厄米部分）在 H 定号时等于最小的 |本征值|，不定号时为 0
    """
    if not spec.kraus:
        raise ValueError("Kraus 列表为空")
    k0 = spec.principal_kraus
    hermitian = (k0 + k0.conj().T) / 2
    eigvals = scipy.linalg.eigvalsh(hermitian)
    if eigvals.min() > 0 or eigvals.max() < 0:
        s_min = float(np.min(np.abs(eigvals)))
    else:
        s_min = 0.0
    return float(np.clip(1.0 - s_min ** 2, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class PolarSplit:
    """K_0 = V_0 P_0；kappa 为 V_0 的最大本征相位（相干角）"""
    unitary: np.ndarray
    positive: np.ndarray
    kappa: float


def polar_split(k0: np.ndarray, tol: float = 1e-12) -> PolarSplit:
    """极分解 K_0 = V_0 P_0，P_0 = (K_0†K_0)^{1/2}"""
    k0 = np.asarray(k0, dtype=complex)
    singular_values = scipy.linalg.svdvals(k0)
    if singular_values.min() < tol:
        raise ValueError("K_0 奇异，无法进行极分解（ε = 1）")
    unitary, positive = scipy.linalg.polar(k0, side='right')
    phases = np.angle(scipy.linalg.eigvals(unitary))
    return PolarSplit(unitary=unitary, positive=positive, kappa=float(np.max(np.abs(phases))))
