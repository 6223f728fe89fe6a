#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
稠密密度矩阵预言机（小规模精确验证）
密度矩阵只在“可达基矢”上展开：从输入态的支撑出发，每作用一个门或 Kraus 元就把新出现的基矢并入基底。
算符在当前基底上以 scipy.sparse 矩阵表示；噪声按与轨迹抽样相同的规范顺序逐位置作用。
"""

from typing import Dict, Iterable, List, Sequence, Union

import numpy as np
from scipy import sparse
from scipy.linalg import eigvalsh

from steps.step02_state.sparse_state import Action, Key, SparseState, tensor
from steps.step03_circuit.circuit_runner import ideal_oracle_output
from steps.step03_circuit.query_circuit import QueryCircuit
from utils.constants import DENSITY_DIM_CAP
from utils.log_util import log_debug

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10


class DimensionCapExceeded(ValueError):
    """可达基底维数超过上限"""


class DenseState:
    """
    可达基底上的密度矩阵

    Attributes:
        radices: 每个位点的维数
        keys: 基底（混合进制键）
        matrix: 基底上的密度矩阵
        cap: 基底维数上限
    """

    def __init__(self, radices: Sequence[int], keys: Sequence[Key], matrix: np.ndarray,
                 cap: int = DENSITY_DIM_CAP):
        self.radices = tuple(radices)
        self.keys: List[Key] = [tuple(k) for k in keys]
        self.index: Dict[Key, int] = {k: j for j, k in enumerate(self.keys)}
        self.matrix = np.asarray(matrix, dtype=complex)
        self.cap = cap
        if self.matrix.shape != (len(self.keys), len(self.keys)):
            raise ValueError("密度矩阵尺寸与基底不符")
        self._check_cap()

    @classmethod
    def from_pure(cls, state: SparseState, cap: int = DENSITY_DIM_CAP) -> "DenseState":
        keys = sorted(state.amplitudes)
        vec = np.array([state.amplitudes[k] for k in keys], dtype=complex)
        return cls(state.radices, keys, np.outer(vec, vec.conj()), cap)

    @classmethod
    def from_mixture(cls, states: Sequence[SparseState], weights: Sequence[float],
                     cap: int = DENSITY_DIM_CAP) -> "DenseState":
        """Σ_k w_k |ψ_k><ψ_k|，权重自动归一化"""
        if len(states) != len(weights) or not states:
            raise ValueError("states 与 weights 长度不一致或为空")
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        keys = sorted({k for s in states for k in s.amplitudes})
        index = {k: j for j, k in enumerate(keys)}
        matrix = np.zeros((len(keys), len(keys)), dtype=complex)
        for w, s in zip(weights, states):
            vec = np.zeros(len(keys), dtype=complex)
            for k, a in s.amplitudes.items():
                vec[index[k]] = a
            matrix += w * np.outer(vec, vec.conj())
        return cls(states[0].radices, keys, matrix, cap)

    @property
    def dimension(self) -> int:
        return len(self.keys)

    @property
    def full_dimension(self) -> int:
        return int(np.prod(self.radices))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def check(self):
        """厄米、单位迹、半正定"""
        if np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise RuntimeError("密度矩阵不是厄米的")
        if abs(self.trace() - 1.0) > TRACE_TOL:
            raise RuntimeError(f"密度矩阵迹为 {self.trace():.3e}")
        if self.dimension and eigvalsh(self.matrix).min() < PSD_FLOOR:
            raise RuntimeError("密度矩阵不是半正定的")

    def fidelity(self, target: SparseState) -> float:
        """F = <ψ| Tr_R(ρ) |ψ>，target 只定义在地址/总线位点上"""
        width = target.num_sites
        if self.radices[:width] != target.radices:
            raise ValueError("目标态布局与密度矩阵的地址/总线部分不一致")
        amps = np.array([target.amplitudes.get(k[:width], 0.0) for k in self.keys], dtype=complex)
        groups = [k[width:] for k in self.keys]
        labels = {g: j for j, g in enumerate(sorted(set(groups)))}
        group_ids = np.array([labels[g] for g in groups])
        same = group_ids[:, None] == group_ids[None, :]
        return float(np.real(amps.conj() @ (self.matrix * same) @ amps))

    def _check_cap(self):
        if len(self.keys) > self.cap:
            raise DimensionCapExceeded(f"可达基底维数 {len(self.keys)} 超过上限 {self.cap}")

    def _locate(self, key: Key) -> int:
        j = self.index.get(key)
        if j is None:
            j = len(self.keys)
            self.keys.append(key)
            self.index[key] = j
            self._check_cap()
        return j

    def _triplets(self, action: Action, columns: int):
        rows, cols, vals = [], [], []
        for j in range(columns):
            for new_key, coef in action(self.keys[j]):
                if coef == 0:
                    continue
                rows.append(self._locate(new_key))
                cols.append(j)
                vals.append(coef)
        return rows, cols, vals

    def _grow(self):
        old = self.matrix.shape[0]
        dim = len(self.keys)
        if dim > old:
            grown = np.zeros((dim, dim), dtype=complex)
            grown[:old, :old] = self.matrix
            self.matrix = grown

    def apply_kraus(self, actions: Iterable[Action]):
        """ρ -> Σ_k A_k ρ A_k†；单个算符即为酉演化"""
        columns = len(self.keys)
        triplets = [self._triplets(action, columns) for action in actions]
        self._grow()
        dim = len(self.keys)
        result = np.zeros((dim, dim), dtype=complex)
        for rows, cols, vals in triplets:
            op = sparse.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(dim, dim))
            left = op @ self.matrix
            result += (op.conj() @ left.T).T
        self.matrix = result

    def apply_unitary(self, action: Action):
        self.apply_kraus([action])


def run_density(circuit: QueryCircuit, model, rho_in: Union[DenseState, SparseState],
                cap: int = DENSITY_DIM_CAP) -> DenseState:
    """
    精确信道复合：每层门之后按规范顺序作用全部生效的噪声位置

    Args:
        circuit: 查询电路
        model: NoiseModel 或 None
        rho_in: 输入密度矩阵（纯态自动转换）
        cap: 可达基底维数上限

    Returns:
        DenseState: 输出密度矩阵

    Raises:
        DimensionCapExceeded: 可达基底超过上限
    """
    rho = rho_in if isinstance(rho_in, DenseState) else DenseState.from_pure(rho_in, cap)
    if rho.radices != circuit.layout.radices:
        raise ValueError("输入密度矩阵与电路布局不一致")
    rho.cap = cap
    locations = model.locations if model is not None else []
    step = 0
    for layer in circuit.layers:
        for event in layer.events:
            rho.apply_unitary(event.action)
        if not layer.noisy:
            continue
        for location in locations:
            if not location.active_at(step):
                continue
            count = len(location.spec.kraus)
            rho.apply_kraus([location.kraus_action(k, rho.radices) for k in range(count)])
        step += 1
    log_debug(f"密度矩阵演化完成: 可达维数 {rho.dimension} / 全空间 {rho.full_dimension}")
    return rho


def density_query_fidelity(circuit: QueryCircuit, model, psi_in: SparseState,
                           router_init: Union[SparseState, DenseState], cap: int = DENSITY_DIM_CAP) -> float:
    """ψ_in ⊗ 路由器初态 经 run_density 后与理想输出的保真度"""
    target = ideal_oracle_output(psi_in, circuit.memory, circuit.layout, circuit.output_site)
    if isinstance(router_init, DenseState):
        reg = DenseState.from_pure(psi_in, cap)
        rho_in = _tensor_dense(reg, router_init, cap)
    else:
        rho_in = DenseState.from_pure(tensor(psi_in, router_init), cap)
    return run_density(circuit, model, rho_in, cap).fidelity(target)


def _tensor_dense(first: DenseState, second: DenseState, cap: int) -> DenseState:
    keys = [a + b for a in first.keys for b in second.keys]
    return DenseState(first.radices + second.radices, keys, np.kron(first.matrix, second.matrix), cap)
