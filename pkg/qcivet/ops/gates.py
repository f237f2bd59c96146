#
# Copyright (c) 2026 The qcivet Authors. All Rights Reserved.
# This file is a part of the qcivet project.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Fixed-size gate matrices for one and two qubits.

Every function returns a fresh, read-only ``complex128`` array.
"""
import math

import numpy as np


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    m.setflags(write=False)
    return m


def _check_angle(theta: float) -> float:
    if not math.isfinite(theta):
        raise ValueError(f"Rotation angle must be finite, got {theta}.")
    return float(theta)


def ry(theta: float) -> np.ndarray:
    theta = _check_angle(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return _frozen([[c, -s], [s, c]])


def rx(theta: float) -> np.ndarray:
    theta = _check_angle(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return _frozen([[c, -1j * s], [-1j * s, c]])


def rz(theta: float) -> np.ndarray:
    theta = _check_angle(theta)
    phase = np.exp(0.5j * theta)
    return _frozen([[np.conj(phase), 0], [0, phase]])


def s_gate() -> np.ndarray:
    return _frozen([[1, 0], [0, 1j]])


def sdg_gate() -> np.ndarray:
    return _frozen([[1, 0], [0, -1j]])


def h_gate() -> np.ndarray:
    return _frozen(np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def x_gate() -> np.ndarray:
    return _frozen([[0, 1], [1, 0]])


def identity(dim: int = 2) -> np.ndarray:
    return _frozen(np.eye(dim))


def cnot() -> np.ndarray:
    """CNOT with the first (most significant) qubit as control."""
    return _frozen([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _frozen(np.kron(a, b))


PAULI_I = identity(2)
PAULI_X = x_gate()
PAULI_Y = _frozen([[0, -1j], [1j, 0]])
PAULI_Z = _frozen([[1, 0], [0, -1]])
