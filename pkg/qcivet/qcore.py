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
"""Complex linear algebra and quantum primitives for one and two qubits.

States are :class:`DensityOperator` values, stages are :class:`Channel`
values and measured quantities are :class:`Observable` values. All of them
are immutable once constructed; the functions in this module are pure.
"""
import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from qcivet.ops import PAULI_X, PAULI_Y, PAULI_Z, identity

# A square complex128 array of dimension 2 or 4.
ComplexMatrix = np.ndarray

SUPPORTED_DIMS = (2, 4)
HERMITIAN_ATOL = 1e-12
NORM_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10
UNITARY_ATOL = 1e-10
IMAG_RESIDUE_ATOL = 1e-10

__all__ = [
    "ComplexMatrix", "DensityOperator", "Channel", "ChannelKind",
    "Observable", "OBSERVABLE_X", "OBSERVABLE_Y", "OBSERVABLE_Z", "PAULIS",
    "apply", "expectation", "partial_trace_first", "trace_norm",
    "operator_norm", "diamond_distance_unitary",
    "diamond_distance_lower_bound", "fuse_gates", "with_gate_noise",
    "haar_unitary", "random_density", "random_pure_state", "pure_state",
    "ket0", "ket1", "ket_plus", "ket_minus", "frobenius_distance",
    "is_hermitian", "is_unitary", "equal_up_to_global_phase",
    "fibonacci_sphere"
]


def _as_square(m: np.ndarray) -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {arr.shape}.")
    return arr


def _freeze(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128, copy=True)
    m.setflags(write=False)
    return m


def _dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + _dagger(m))


def is_hermitian(m: ComplexMatrix, atol: float = HERMITIAN_ATOL) -> bool:
    m = _as_square(m)
    return bool(np.all(np.abs(m - m.conj().T) <= atol))


def is_unitary(m: ComplexMatrix, atol: float = UNITARY_ATOL) -> bool:
    m = _as_square(m)
    return bool(
        np.all(np.abs(m.conj().T @ m - np.eye(m.shape[0])) <= atol))


def equal_up_to_global_phase(u: ComplexMatrix,
                             v: ComplexMatrix,
                             atol: float = UNITARY_ATOL) -> bool:
    """U and V define the same conjugation channel iff |Tr(U†V)| = dim."""
    u, v = _as_square(u), _as_square(v)
    if u.shape != v.shape:
        return False
    return abs(abs(np.trace(u.conj().T @ v)) - u.shape[0]) <= atol


def pure_state(amplitudes: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if psi.shape[0] not in SUPPORTED_DIMS:
        raise ValueError(
            f"State dimension must be one of {SUPPORTED_DIMS}, got "
            f"{psi.shape[0]}.")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > NORM_ATOL:
        raise ValueError(f"State is not normalized: <psi|psi> = {norm!r}.")
    psi.setflags(write=False)
    return psi


def ket0() -> np.ndarray:
    return pure_state([1, 0])


def ket1() -> np.ndarray:
    return pure_state([0, 1])


def ket_plus() -> np.ndarray:
    return pure_state(np.array([1, 1]) / math.sqrt(2))


def ket_minus() -> np.ndarray:
    return pure_state(np.array([1, -1]) / math.sqrt(2))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A positive, unit-trace Hermitian matrix of dimension 2 or 4."""

    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        m = _as_square(self.matrix)
        if m.shape[0] not in SUPPORTED_DIMS:
            raise ValueError(
                f"Density operator dimension must be one of "
                f"{SUPPORTED_DIMS}, got {m.shape[0]}.")
        if not is_hermitian(m):
            raise ValueError("Density operator is not Hermitian.")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > TRACE_ATOL:
            raise ValueError(f"Density operator trace is {trace!r}, not 1.")
        min_eig = float(np.linalg.eigvalsh(m)[0])
        if min_eig < -PSD_ATOL:
            raise ValueError(
                f"Density operator is not positive: eigenvalue {min_eig!r}.")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_state(cls, psi: Sequence[complex]) -> "DensityOperator":
        psi = pure_state(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int = 2) -> "DensityOperator":
        return cls(np.eye(dim) / dim)

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: ComplexMatrix
    label: str

    def __post_init__(self) -> None:
        m = _as_square(self.matrix)
        if not is_hermitian(m):
            raise ValueError(f"Observable {self.label!r} is not Hermitian.")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"Observable({self.label!r})"


OBSERVABLE_X = Observable(PAULI_X, "X")
OBSERVABLE_Y = Observable(PAULI_Y, "Y")
OBSERVABLE_Z = Observable(PAULI_Z, "Z")
PAULIS: Tuple[Observable, ...] = (OBSERVABLE_X, OBSERVABLE_Y, OBSERVABLE_Z)


class ChannelKind(str, enum.Enum):
    UNITARY = "unitary-conjugation"
    DEPOLARIZING = "depolarizing"
    COMPOSITION = "composition"


@dataclass(frozen=True, eq=False)
class Channel:
    """A CPTP map: unitary conjugation, depolarizing, or an ordered
    composition of channels (parts are applied first to last)."""

    kind: ChannelKind
    dim: int
    unitary: Optional[ComplexMatrix] = None
    p: Optional[float] = None
    parts: Tuple["Channel", ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        if self.dim not in SUPPORTED_DIMS:
            raise ValueError(
                f"Channel dimension must be one of {SUPPORTED_DIMS}, got "
                f"{self.dim}.")
        if self.kind == ChannelKind.UNITARY:
            if self.unitary is None or not is_unitary(self.unitary):
                raise ValueError(f"Channel {self.label!r} is not unitary.")
            object.__setattr__(self, "unitary", _freeze(self.unitary))
        elif self.kind == ChannelKind.DEPOLARIZING:
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError(
                    f"Depolarizing probability must lie in [0, 1], got "
                    f"{self.p}.")
        else:
            if not self.parts:
                raise ValueError("A composition needs at least one part.")
            if any(part.dim != self.dim for part in self.parts):
                raise ValueError("Composed channels must share a dimension.")

    @classmethod
    def from_unitary(cls, u: ComplexMatrix, label: str = "") -> "Channel":
        u = _as_square(u)
        return cls(ChannelKind.UNITARY, u.shape[0], unitary=u, label=label)

    @classmethod
    def depolarizing(cls, p: float, dim: int = 2) -> "Channel":
        return cls(ChannelKind.DEPOLARIZING,
                   dim,
                   p=float(p),
                   label=f"depol({p:g})")

    @classmethod
    def compose(cls, *parts: "Channel", label: str = "") -> "Channel":
        if not parts:
            raise ValueError("A composition needs at least one part.")
        return cls(ChannelKind.COMPOSITION,
                   parts[0].dim,
                   parts=tuple(parts),
                   label=label or " -> ".join(p.label for p in parts))

    @classmethod
    def identity(cls, dim: int = 2) -> "Channel":
        return cls.from_unitary(identity(dim), label="id")

    def transform(self, m: np.ndarray) -> np.ndarray:
        """Apply the channel to a matrix, or a stack of matrices along the
        leading axes, without validating the result."""
        if self.kind == ChannelKind.UNITARY:
            assert self.unitary is not None
            return _hermitize(self.unitary @ m @ self.unitary.conj().T)
        if self.kind == ChannelKind.DEPOLARIZING:
            assert self.p is not None
            trace = np.trace(m, axis1=-2, axis2=-1)[..., None, None]
            return (1.0 - self.p) * m + self.p * trace * np.eye(
                self.dim) / self.dim
        for part in self.parts:
            m = part.transform(m)
        return m

    def apply(self, rho: DensityOperator) -> DensityOperator:
        if rho.dim != self.dim:
            raise ValueError(
                f"Channel {self.label!r} acts on dimension {self.dim}, "
                f"state has dimension {rho.dim}.")
        return DensityOperator(self.transform(rho.matrix))

    def gates(self) -> List[ComplexMatrix]:
        """Unitary leaves in application order."""
        if self.kind == ChannelKind.UNITARY:
            assert self.unitary is not None
            return [self.unitary]
        if self.kind == ChannelKind.DEPOLARIZING:
            return []
        return [g for part in self.parts for g in part.gates()]

    @property
    def gate_count(self) -> int:
        return len(self.gates())

    def as_unitary(self) -> Optional[ComplexMatrix]:
        """The product unitary when every leaf is a unitary conjugation."""
        if self.kind == ChannelKind.UNITARY:
            return self.unitary
        if self.kind == ChannelKind.DEPOLARIZING:
            return None if self.p else np.eye(self.dim)
        u = np.eye(self.dim, dtype=np.complex128)
        for part in self.parts:
            v = part.as_unitary()
            if v is None:
                return None
            u = v @ u
        return u

    def __repr__(self) -> str:
        return f"Channel({self.kind.value}, {self.label!r})"


def apply(channel: Channel, rho: DensityOperator) -> DensityOperator:
    return channel.apply(rho)


def expectation(obs: Observable, rho: DensityOperator) -> float:
    """Tr(O rho); the imaginary residue must vanish."""
    if obs.dim != rho.dim:
        raise ValueError(
            f"Observable {obs.label!r} has dimension {obs.dim}, state has "
            f"dimension {rho.dim}.")
    value = complex(np.trace(obs.matrix @ rho.matrix))
    if abs(value.imag) >= IMAG_RESIDUE_ATOL:
        raise ValueError(
            f"<{obs.label}> has imaginary residue {value.imag!r}.")
    return value.real


def partial_trace_first(rho_ab: DensityOperator) -> DensityOperator:
    """Trace out the first qubit of a two-qubit state."""
    if rho_ab.dim != 4:
        raise ValueError(
            f"Partial trace needs a two-qubit state, got dimension "
            f"{rho_ab.dim}.")
    blocks = rho_ab.matrix.reshape(2, 2, 2, 2)
    return DensityOperator(np.einsum("aiaj->ij", blocks))


def trace_norm(m: ComplexMatrix) -> float:
    """Schatten 1-norm (sum of singular values)."""
    return float(np.linalg.svd(_as_square(m), compute_uv=False).sum())


def operator_norm(m: ComplexMatrix) -> float:
    """Schatten infinity-norm (largest singular value)."""
    return float(np.linalg.svd(_as_square(m), compute_uv=False)[0])


def frobenius_distance(a: ComplexMatrix, b: ComplexMatrix) -> float:
    return float(np.linalg.norm(_as_square(a) - _as_square(b), "fro"))


def diamond_distance_unitary(u: ComplexMatrix, v: ComplexMatrix) -> float:
    """Exact diamond distance between two single-qubit unitary channels.

    With eigenphases phi_1, phi_2 of U†V and their separation wrapped to
    [0, pi], the distance is 2 sin(delta / 2).
    """
    u, v = _as_square(u), _as_square(v)
    if u.shape != (2, 2) or v.shape != (2, 2):
        raise ValueError("Closed form is only defined for 2x2 unitaries.")
    if not (is_unitary(u) and is_unitary(v)):
        raise ValueError("Both arguments must be unitary.")
    phases = np.angle(np.linalg.eigvals(u.conj().T @ v))
    delta = abs(float(phases[0] - phases[1])) % (2 * math.pi)
    delta = min(delta, 2 * math.pi - delta)
    return 2.0 * math.sin(delta / 2.0)


def fibonacci_sphere(n_points: int) -> np.ndarray:
    """Quasi-uniform unit vectors, shape (n_points, 3)."""
    if n_points < 1:
        raise ValueError("n_points must be positive.")
    k = np.arange(n_points) + 0.5
    z = 1.0 - 2.0 * k / n_points
    r = np.sqrt(1.0 - z * z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def diamond_distance_lower_bound(a: Channel,
                                 b: Channel,
                                 n_points: int = 10000) -> float:
    """Approximate (lower-bound) diamond distance for any qubit channels.

    Maximizes the trace norm of the output difference over pure inputs on a
    Fibonacci grid of the Bloch sphere. No ancilla is used, so the value can
    only under-estimate the true diamond distance.
    """
    if a.dim != 2 or b.dim != 2:
        raise ValueError("The grid estimator is defined for one qubit.")
    n = fibonacci_sphere(n_points)
    paulis = np.stack([PAULI_X, PAULI_Y, PAULI_Z])
    rhos = 0.5 * (np.eye(2)[None] + np.einsum("ki,iab->kab", n, paulis))
    diff = a.transform(rhos) - b.transform(rhos)
    norms = np.linalg.svd(diff, compute_uv=False).sum(axis=-1)
    return float(norms.max())


def fuse_gates(channel: Channel) -> Channel:
    """Merge a composition of unitaries into one native gate."""
    u = channel.as_unitary()
    if u is None:
        raise ValueError(
            f"Channel {channel.label!r} contains non-unitary parts.")
    return Channel.from_unitary(u, label=f"fused[{channel.label}]")


def with_gate_noise(channel: Channel, p: float) -> Channel:
    """Follow every unitary leaf with a depolarizing layer of strength p."""
    if p == 0:
        return channel
    if channel.kind == ChannelKind.UNITARY:
        return Channel.compose(channel,
                               Channel.depolarizing(p, channel.dim),
                               label=channel.label)
    if channel.kind == ChannelKind.DEPOLARIZING:
        return channel
    return Channel.compose(*(with_gate_noise(part, p)
                             for part in channel.parts),
                           label=channel.label)


def haar_unitary(rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random 2x2 unitary from the Euler-angle parameterization:
    U = e^{i a} [[e^{i psi} cos phi, e^{i chi} sin phi],
                 [-e^{-i chi} sin phi, e^{-i psi} cos phi]]
    with sin^2 phi uniform on [0, 1] and a, psi, chi uniform on [0, 2 pi).
    """
    xi = rng.random()
    alpha, psi, chi = rng.random(3) * 2 * math.pi
    phi = math.asin(math.sqrt(xi))
    u = np.array([[np.exp(1j * psi) * math.cos(phi),
                   np.exp(1j * chi) * math.sin(phi)],
                  [-np.exp(-1j * chi) * math.sin(phi),
                   np.exp(-1j * psi) * math.cos(phi)]])
    return np.exp(1j * alpha) * u


def random_pure_state(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return pure_state(z / np.linalg.norm(z))


def random_density(rng: np.random.Generator,
                   dim: int = 2) -> DensityOperator:
    """Full-rank Ginibre-ensemble density operator."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return DensityOperator(_hermitize(m / np.trace(m).real))
