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
"""Observable-deviation contracts between a reference stage and a candidate.

A candidate channel B honours the contract of a reference channel A when,
for every input state and every observable of the family, the expectation
values of the two outputs differ by at most the tolerance.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qcivet.qcore import (OBSERVABLE_Z, PAULIS, Channel, DensityOperator,
                          Observable, diamond_distance_unitary, expectation,
                          ket0, ket1, ket_minus, ket_plus, operator_norm)
from qcivet.ops import PAULI_X, PAULI_Y, PAULI_Z, rx, ry, rz, s_gate, sdg_gate

DEFAULT_THETA = 2 * math.pi / 5
DEFAULT_DELTA = 0.4

# ||sigma||_1 <= sqrt(3) * max_P |Tr(P sigma)| for traceless Hermitian 2x2
# sigma; sigma = X + Y + Z attains it.
PAULI_NORMING_CONSTANT = math.sqrt(3)
# diamond(A, B) <= 2 sqrt(2) * worst Pauli deviation on the four Pauli
# eigenstates, for single-qubit unitary pairs.
COMPLETENESS_CONSTANT = 2 * math.sqrt(2)

_IC_RANK_TOL = 1e-9
_HYPOTHESIS_SLACK = 1e-12

DeviationCell = Tuple[int, str]


@dataclass(frozen=True)
class ObservableFamily:
    observables: Tuple[Observable, ...]
    name: str

    def __post_init__(self) -> None:
        observables = tuple(self.observables)
        if not observables:
            raise ValueError(f"Observable family {self.name!r} is empty.")
        dims = {obs.dim for obs in observables}
        if len(dims) != 1:
            raise ValueError(
                f"Observable family {self.name!r} mixes dimensions {dims}.")
        object.__setattr__(self, "observables", observables)
        if self.spectrum_bound <= 0:
            raise ValueError(
                f"Observable family {self.name!r} has zero spectrum bound.")

    @property
    def dim(self) -> int:
        return self.observables[0].dim

    @property
    def spectrum_bound(self) -> float:
        """K = max operator norm over the family."""
        return max(operator_norm(obs.matrix) for obs in self.observables)

    @property
    def labels(self) -> List[str]:
        return [obs.label for obs in self.observables]


@dataclass(frozen=True)
class Contract:
    family: ObservableFamily
    tolerance: float
    inputs: Tuple[DensityOperator, ...]

    def __post_init__(self) -> None:
        if not self.tolerance >= 0 or not math.isfinite(self.tolerance):
            raise ValueError(
                f"Contract tolerance must be finite and >= 0, got "
                f"{self.tolerance}.")
        inputs = tuple(self.inputs)
        if not inputs:
            raise ValueError("Contract needs at least one input state.")
        if any(rho.dim != self.family.dim for rho in inputs):
            raise ValueError(
                "Contract inputs must match the observable dimension.")
        object.__setattr__(self, "inputs", inputs)


@dataclass(frozen=True)
class DeviationReport:
    worst: float
    per_cell: Dict[DeviationCell, float] = field(default_factory=dict)
    tolerance: float = 0.0
    passed: bool = True

    def passes(self, tolerance: float) -> bool:
        return self.worst <= tolerance


def default_inputs() -> List[DensityOperator]:
    """Four Pauli eigenstates plus two off-axis states."""
    off_axis = [
        rz(1.3) @ ry(0.7) @ ket0(),
        rz(0.4) @ ry(2.1) @ ket0(),
    ]
    return pauli_eigenstates() + [
        DensityOperator.from_state(psi) for psi in off_axis
    ]


def pauli_eigenstates() -> List[DensityOperator]:
    return [
        DensityOperator.from_state(psi)
        for psi in (ket0(), ket1(), ket_plus(), ket_minus())
    ]


def full_xyz() -> ObservableFamily:
    return ObservableFamily(PAULIS, "full-XYZ")


def weak_z() -> ObservableFamily:
    return ObservableFamily((OBSERVABLE_Z, ), "weak-Z")


def reference(theta: float = DEFAULT_THETA) -> Channel:
    return Channel.from_unitary(ry(theta), label=f"ry({theta:.6g})")


def b_good(theta: float = DEFAULT_THETA) -> Channel:
    """S Rx(theta) S-dagger, the same channel as Ry(theta) in other gates."""
    return Channel.compose(Channel.from_unitary(sdg_gate(), label="sdg"),
                           Channel.from_unitary(rx(theta),
                                                label=f"rx({theta:.6g})"),
                           Channel.from_unitary(s_gate(), label="s"),
                           label="B_good")


def b_bad(theta: float = DEFAULT_THETA,
          delta: float = DEFAULT_DELTA) -> Channel:
    return Channel.from_unitary(ry(theta + delta), label=f"B_bad({delta:g})")


def b_sneaky(theta: float = DEFAULT_THETA) -> Channel:
    return make_sneaky(reference(theta), OBSERVABLE_Z)


def worst_deviation(a: Channel, b: Channel,
                    contract: Contract) -> DeviationReport:
    if a.dim != contract.family.dim or b.dim != contract.family.dim:
        raise ValueError(
            f"Channels of dimension ({a.dim}, {b.dim}) do not match a "
            f"contract of dimension {contract.family.dim}.")
    per_cell: Dict[DeviationCell, float] = {}
    for idx, rho in enumerate(contract.inputs):
        out_a, out_b = a.apply(rho), b.apply(rho)
        for obs in contract.family.observables:
            per_cell[(idx, obs.label)] = abs(
                expectation(obs, out_b) - expectation(obs, out_a))
    worst = max(per_cell.values())
    return DeviationReport(worst=worst,
                           per_cell=per_cell,
                           tolerance=contract.tolerance,
                           passed=worst <= contract.tolerance)


def is_informationally_complete(family: ObservableFamily) -> bool:
    """Whether {I} and the family span the real space of Hermitian
    matrices of the family's dimension."""
    d = family.dim
    mats = [np.eye(d)] + [obs.matrix for obs in family.observables]
    rows = np.array(
        [np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats])
    return int(np.linalg.matrix_rank(rows, tol=_IC_RANK_TOL)) == d * d


def sneaky_override_possible(family: ObservableFamily) -> bool:
    """A candidate can match the family exactly while being a different
    channel iff the family is not informationally complete."""
    return not is_informationally_complete(family)


def make_sneaky(a: Channel, weak_obs: Observable) -> Channel:
    """Follow ``a`` by S-conjugation, which commutes with Z."""
    if a.dim != 2:
        raise ValueError("Sneaky construction is single-qubit only.")
    if weak_obs.dim != 2 or not np.allclose(weak_obs.matrix, PAULI_Z):
        raise ValueError(
            f"Sneaky construction only supports the Z witness, got "
            f"{weak_obs.label!r}.")
    return Channel.compose(a,
                           Channel.from_unitary(s_gate(), label="s"),
                           label=f"sneaky[{a.label}]")


def _unitary_of(channel: Channel) -> np.ndarray:
    u = channel.as_unitary()
    if u is None:
        raise NotImplementedError(
            f"Exact diamond distance needs a unitary channel, "
            f"{channel.label!r} is not.")
    return u


def soundness_margin(
        a: Channel, b: Channel, family: ObservableFamily,
        inputs: Sequence[DensityOperator]) -> Tuple[float, float]:
    """Returns (worst observable deviation, K * diamond distance)."""
    u, v = _unitary_of(a), _unitary_of(b)
    report = worst_deviation(a, b, Contract(family, 0.0, tuple(inputs)))
    return report.worst, family.spectrum_bound * diamond_distance_unitary(
        u, v)


def completeness_bound(a: Channel, b: Channel) -> Tuple[float, float]:
    """Returns (diamond distance, 2 sqrt(2) * worst Pauli deviation on the
    four Pauli eigenstates)."""
    u, v = _unitary_of(a), _unitary_of(b)
    report = worst_deviation(
        a, b, Contract(full_xyz(), 0.0, tuple(pauli_eigenstates())))
    return diamond_distance_unitary(u, v), COMPLETENESS_CONSTANT * report.worst


def _is_pauli_family(family: ObservableFamily) -> bool:
    if family.dim != 2:
        return False
    covered = set()
    for obs in family.observables:
        for idx, pauli in enumerate((PAULI_X, PAULI_Y, PAULI_Z)):
            if np.allclose(obs.matrix, pauli):
                covered.add(idx)
                break
        else:
            return False
    return covered == {0, 1, 2}


def stage_inputs(a1: Channel,
                 inputs: Sequence[DensityOperator]) -> List[DensityOperator]:
    """States the second stage receives: the inputs and their images."""
    return list(inputs) + [a1.apply(rho) for rho in inputs]


def measured_tolerances(
    a1: Channel,
    b1: Channel,
    a2: Channel,
    b2: Channel,
    fam1: ObservableFamily,
    fam2: ObservableFamily,
    inputs: Optional[Sequence[DensityOperator]] = None
) -> Tuple[float, float]:
    """Smallest (eps1, eps2) for which both stage contracts hold."""
    inputs = default_inputs() if inputs is None else list(inputs)
    eps1 = worst_deviation(a1, b1, Contract(fam1, 0.0, tuple(inputs))).worst
    eps2 = worst_deviation(
        a2, b2, Contract(fam2, 0.0, tuple(stage_inputs(a1, inputs)))).worst
    return eps1, eps2


def composition_bound(
    a1: Channel,
    b1: Channel,
    a2: Channel,
    b2: Channel,
    fam1: ObservableFamily,
    fam2: ObservableFamily,
    eps1: float,
    eps2: float,
    inputs: Optional[Sequence[DensityOperator]] = None
) -> Tuple[float, float]:
    """Returns (worst fam2 deviation of B2.B1 vs A2.A1, eps2 + K2 c eps1).

    Stage one is checked on the inputs; stage two on the inputs together
    with their images under A1.
    """
    if not _is_pauli_family(fam1):
        raise NotImplementedError(
            f"Norming constant is only known for the Pauli family, got "
            f"{fam1.name!r}.")
    inputs = default_inputs() if inputs is None else list(inputs)
    dev1 = worst_deviation(a1, b1, Contract(fam1, eps1, tuple(inputs)))
    if dev1.worst > eps1 + _HYPOTHESIS_SLACK:
        raise ValueError(
            f"Stage one deviation {dev1.worst:.6g} exceeds eps1={eps1:g}.")
    dev2 = worst_deviation(
        a2, b2, Contract(fam2, eps2, tuple(stage_inputs(a1, inputs))))
    if dev2.worst > eps2 + _HYPOTHESIS_SLACK:
        raise ValueError(
            f"Stage two deviation {dev2.worst:.6g} exceeds eps2={eps2:g}.")
    chained = worst_deviation(Channel.compose(a1, a2),
                              Channel.compose(b1, b2),
                              Contract(fam2, 0.0, tuple(inputs)))
    rhs = eps2 + fam2.spectrum_bound * PAULI_NORMING_CONSTANT * eps1
    return chained.worst, rhs


def empirical_constant(a: Channel, b: Channel) -> float:
    """Diamond distance over worst full-XYZ deviation on the default
    inputs."""
    diamond = diamond_distance_unitary(_unitary_of(a), _unitary_of(b))
    dev = worst_deviation(a, b,
                          Contract(full_xyz(), 0.0,
                                   tuple(default_inputs()))).worst
    if dev == 0:
        raise ValueError("Empirical constant is undefined for equal "
                         "observable behaviour.")
    return diamond / dev
