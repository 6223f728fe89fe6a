#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
局部算符：泡利矩阵、张量积、以及把量子比特算符提升到三能级位点
三能级位点上的量子比特门只作用在主动子空间{0,1}，等待态|W>保持不变
"""

from functools import reduce
from typing import Dict, Sequence

import numpy as np

from utils.constants import UNITARY_TOL

PAULI: Dict[str, np.ndarray] = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}

PAULI_LABELS = ('I', 'X', 'Y', 'Z')

# (x, z) 比特表示，Y 记为 (1, 1)
PAULI_BITS = {'I': (0, 0), 'X': (1, 0), 'Y': (1, 1), 'Z': (0, 1)}
BITS_PAULI = {bits: label for label, bits in PAULI_BITS.items()}

CX = np.array([[1, 0, 0, 0],
               [0, 1, 0, 0],
               [0, 0, 0, 1],
               [0, 0, 1, 0]], dtype=complex)

SWAP = np.array([[1, 0, 0, 0],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1]], dtype=complex)


def pauli_string(labels: str) -> np.ndarray:
    """多量子比特泡利串，如 'XZ' -> X⊗Z"""
    return reduce(np.kron, [PAULI[ch] for ch in labels])


def kron_all(matrices: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, matrices)


def coherent_z(kappa: float) -> np.ndarray:
    """相干相位旋转 e^{iκZ}"""
    return np.diag([np.exp(1j * kappa), np.exp(-1j * kappa)])


def is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return np.allclose(matrix.conj().T @ matrix, np.eye(matrix.shape[0]), atol=tol)


def lift_operator(matrix: np.ndarray, num_sites: int, radix: int, wait_scale: complex = 1.0) -> np.ndarray:
    """
    把作用在 num_sites 个量子比特上的算符嵌入到 radix^num_sites 维空间

    Args:
        matrix: 2^k × 2^k 矩阵
        num_sites: 位点数 k
        radix: 目标位点维数（2 时原样返回）
        wait_scale: 含等待态分量上的对角系数（酉门取1）

    Returns:
        np.ndarray: radix^k × radix^k 矩阵
    """
    matrix = np.asarray(matrix, dtype=complex)
    qubit_dim = 2 ** num_sites
    if matrix.shape != (qubit_dim, qubit_dim):
        raise ValueError(f"算符维数 {matrix.shape} 与 {num_sites} 个量子比特不符")
    if radix == 2:
        return matrix.copy()
    if radix != 3:
        raise ValueError(f"不支持的位点维数: {radix}")

    dim = radix ** num_sites
    lifted = np.eye(dim, dtype=complex) * wait_scale
    active = []
    for q in range(qubit_dim):
        bits = [(q >> (num_sites - 1 - s)) & 1 for s in range(num_sites)]
        index = 0
        for bit in bits:
            index = index * radix + bit
        active.append(index)
    active = np.array(active)
    lifted[np.ix_(active, active)] = matrix
    return lifted


def qutrit_shift() -> np.ndarray:
    """qutrit 平移算符 X_3|k> = |k+1 mod 3>"""
    return np.roll(np.eye(3, dtype=complex), 1, axis=0)


def qutrit_clock() -> np.ndarray:
    """qutrit 时钟算符 Z_3 = diag(1, ω, ω²)"""
    omega = np.exp(2j * np.pi / 3)
    return np.diag([1, omega, omega ** 2])
