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

import math

import numpy as np
import pytest

from qcivet.contracts import (COMPLETENESS_CONSTANT, DEFAULT_THETA, Contract,
                              ObservableFamily, b_bad, b_good, b_sneaky,
                              completeness_bound, composition_bound,
                              default_inputs, empirical_constant, full_xyz,
                              is_informationally_complete, make_sneaky,
                              measured_tolerances, pauli_eigenstates,
                              reference, sneaky_override_possible,
                              soundness_margin, weak_z, worst_deviation)
from qcivet.ops import PAULI_X, PAULI_Z, ry
from qcivet.qcore import (OBSERVABLE_X, OBSERVABLE_Y, OBSERVABLE_Z, Channel,
                          DensityOperator, Observable, apply,
                          diamond_distance_unitary, haar_unitary, ket0)


def _contract(family, inputs, tolerance=0.0):
    return Contract(family, tolerance, tuple(inputs))


@pytest.mark.parametrize("candidate, full, weak, atol", [
    (b_good, 0.0, 0.0, 1e-9),
    (lambda: b_bad(DEFAULT_THETA, 0.4), 0.395, 0.395, 2e-3),
    (b_sneaky, 1.401, 0.0, 2e-3),
])
def test_separation_table(inputs, candidate, full, weak, atol):
    a = reference()
    b = candidate()
    full_report = worst_deviation(a, b, _contract(full_xyz(), inputs))
    weak_report = worst_deviation(a, b, _contract(weak_z(), inputs))
    assert full_report.worst == pytest.approx(full, abs=atol)
    if weak == 0.0:
        assert weak_report.worst <= 1e-9
    else:
        assert weak_report.worst == pytest.approx(weak, abs=atol)


def test_report_cells_and_pass_flag(inputs):
    report = worst_deviation(reference(), b_bad(),
                             _contract(full_xyz(), inputs, 0.5))
    assert set(report.per_cell) == {(i, label)
                                     for i in range(len(inputs))
                                     for label in ("X", "Y", "Z")}
    assert report.worst == max(report.per_cell.values())
    assert report.passed
    strict = worst_deviation(reference(), b_bad(),
                             _contract(full_xyz(), inputs, 0.1))
    assert not strict.passed


def test_deviation_is_symmetric(inputs, rng):
    for _ in range(20):
        a = Channel.from_unitary(haar_unitary(rng))
        b = Channel.from_unitary(haar_unitary(rng))
        ab = worst_deviation(a, b, _contract(full_xyz(), inputs))
        ba = worst_deviation(b, a, _contract(full_xyz(), inputs))
        assert ab.worst == pytest.approx(ba.worst, abs=1e-12)
    same = worst_deviation(reference(), reference(),
                           _contract(full_xyz(), inputs))
    assert same.worst == 0.0
    assert all(v == 0.0 for v in same.per_cell.values())


@pytest.mark.parametrize("tolerance", [0.0, 0.1, 0.39, 0.4, 1.0])
def test_pass_is_monotone_in_tolerance(inputs, tolerance):
    report = worst_deviation(reference(), b_bad(),
                             _contract(full_xyz(), inputs, tolerance))
    if report.passed:
        for larger in (tolerance + 1e-6, tolerance + 0.5, 10.0):
            assert report.passes(larger)


def test_worst_deviation_dim_mismatch(inputs):
    four = Channel.identity(4)
    with pytest.raises(ValueError):
        worst_deviation(four, four, _contract(full_xyz(), inputs))


def test_contract_validation(inputs):
    with pytest.raises(ValueError):
        Contract(full_xyz(), -0.1, tuple(inputs))
    with pytest.raises(ValueError):
        Contract(full_xyz(), 0.1, ())
    with pytest.raises(ValueError):
        ObservableFamily((), "empty")
    with pytest.raises(ValueError):
        ObservableFamily((Observable(np.zeros((2, 2)), "0"), ), "zero")


def test_spectrum_bound():
    assert full_xyz().spectrum_bound == pytest.approx(1.0)
    scaled = ObservableFamily((Observable(3 * PAULI_Z, "3Z"), ), "scaled")
    assert scaled.spectrum_bound == pytest.approx(3.0)


@pytest.mark.parametrize("observables, expected", [
    ((OBSERVABLE_X, OBSERVABLE_Y, OBSERVABLE_Z), True),
    ((OBSERVABLE_Z, ), False),
    ((OBSERVABLE_X, OBSERVABLE_Y, OBSERVABLE_Z, OBSERVABLE_X), True),
    ((OBSERVABLE_X, OBSERVABLE_Z), False),
    ((Observable(PAULI_X + PAULI_Z, "X+Z"), OBSERVABLE_Y,
      Observable(PAULI_X - PAULI_Z, "X-Z")), True),
])
def test_informational_completeness(observables, expected):
    family = ObservableFamily(observables, "f")
    assert is_informationally_complete(family) is expected
    assert sneaky_override_possible(family) is (not expected)


def test_make_sneaky_only_supports_z():
    with pytest.raises(ValueError):
        make_sneaky(reference(), OBSERVABLE_X)
    with pytest.raises(ValueError):
        make_sneaky(Channel.identity(4), OBSERVABLE_Z)


def test_make_sneaky_keeps_zero_state():
    rho = DensityOperator.from_state(ket0())
    out = apply(make_sneaky(Channel.identity(), OBSERVABLE_Z), rho)
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)


def test_sneaky_is_invisible_to_z(rng, inputs):
    for _ in range(100):
        a = Channel.from_unitary(haar_unitary(rng))
        sneaky = make_sneaky(a, OBSERVABLE_Z)
        report = worst_deviation(a, sneaky, _contract(weak_z(), inputs))
        assert report.worst <= 1e-9


def test_sneaky_fingerprint_over_angles(rng, inputs):
    thetas = [DEFAULT_THETA] + list(rng.uniform(0.3, 2.8, size=20))
    for theta in thetas:
        a, b = reference(theta), b_sneaky(theta)
        assert worst_deviation(a, b, _contract(weak_z(),
                                               inputs)).worst <= 1e-9
        assert worst_deviation(a, b, _contract(full_xyz(),
                                               inputs)).worst >= 0.6


def test_soundness_examples(inputs):
    lhs, rhs = soundness_margin(reference(), reference(), full_xyz(), inputs)
    assert lhs == 0.0
    assert rhs < 1e-9
    lhs, rhs = soundness_margin(reference(), b_bad(), full_xyz(), inputs)
    assert lhs == pytest.approx(0.395, abs=2e-3)
    assert rhs == pytest.approx(0.397, abs=1e-3)
    assert lhs <= rhs


def test_soundness_rejects_noisy_channels(inputs):
    noisy = Channel.compose(reference(), Channel.depolarizing(0.1))
    with pytest.raises(NotImplementedError):
        soundness_margin(reference(), noisy, full_xyz(), inputs)
    with pytest.raises(NotImplementedError):
        completeness_bound(noisy, reference())


def test_soundness_sweep(rng, inputs):
    for _ in range(100):
        a = Channel.from_unitary(haar_unitary(rng))
        b = Channel.from_unitary(haar_unitary(rng))
        lhs, rhs = soundness_margin(a, b, full_xyz(), inputs)
        assert lhs <= rhs + 1e-9


def test_completeness_examples():
    diamond, bound = completeness_bound(reference(), reference())
    assert diamond < 1e-9 and bound == 0.0
    diamond, bound = completeness_bound(reference(), b_bad())
    assert diamond == pytest.approx(0.397, abs=1e-3)
    assert bound / COMPLETENESS_CONSTANT >= 0.389
    assert diamond <= bound


def test_completeness_sweep(rng):
    for _ in range(100):
        a = Channel.from_unitary(haar_unitary(rng))
        b = Channel.from_unitary(haar_unitary(rng))
        diamond, bound = completeness_bound(a, b)
        assert diamond <= bound + 1e-9


def test_indistinguishable_pairs_are_the_same_channel(rng, inputs):
    for _ in range(100):
        u = haar_unitary(rng)
        a = Channel.from_unitary(u)
        b = Channel.from_unitary(np.exp(1j * rng.uniform(0, 2 * math.pi)) *
                                 u)
        dev = worst_deviation(a, b, _contract(full_xyz(), inputs)).worst
        assert dev <= 1e-9
        assert diamond_distance_unitary(a.unitary, b.unitary) <= 1e-7


def test_composition_identical_pairs(inputs):
    a = reference()
    lhs, rhs = composition_bound(a, a, a, a, full_xyz(), full_xyz(), 0.0,
                                 0.0, inputs)
    assert lhs == 0.0
    assert rhs == 0.0


def test_composition_rotation_chain(inputs):
    a = reference()
    b = b_bad(DEFAULT_THETA, 0.05)
    eps1, eps2 = measured_tolerances(a, b, a, b, full_xyz(), full_xyz(),
                                     inputs)
    assert eps1 > 0 and eps2 > 0
    lhs, rhs = composition_bound(a, b, a, b, full_xyz(), full_xyz(), eps1,
                                 eps2, inputs)
    assert 0 < lhs <= rhs + 1e-9


def test_composition_rejects_failed_hypothesis(inputs):
    a, b = reference(), b_bad()
    with pytest.raises(ValueError):
        composition_bound(a, b, a, a, full_xyz(), full_xyz(), 0.01, 0.0,
                          inputs)
    with pytest.raises(ValueError):
        composition_bound(a, a, a, b, full_xyz(), full_xyz(), 0.0, 0.01,
                          inputs)


def test_composition_requires_pauli_first_family(inputs):
    a = reference()
    with pytest.raises(NotImplementedError):
        composition_bound(a, a, a, a, weak_z(), full_xyz(), 0.0, 0.0,
                          inputs)


def test_composition_sweep(rng, inputs):
    fam = full_xyz()
    for _ in range(100):
        a1 = Channel.from_unitary(haar_unitary(rng))
        a2 = Channel.from_unitary(haar_unitary(rng))
        b1 = Channel.from_unitary(ry(rng.uniform(-0.2, 0.2)) @ a1.unitary)
        b2 = Channel.from_unitary(
            ry(rng.uniform(-0.2, 0.2)) @ a2.unitary)
        eps1, eps2 = measured_tolerances(a1, b1, a2, b2, fam, fam, inputs)
        lhs, rhs = composition_bound(a1, b1, a2, b2, fam, fam, eps1, eps2,
                                     inputs)
        assert lhs <= rhs + 1e-9


def test_empirical_constant_probe():
    ratio = empirical_constant(reference(), b_bad(DEFAULT_THETA, 0.4))
    assert ratio == pytest.approx(1.005, abs=0.02)
    with pytest.raises(ValueError):
        empirical_constant(reference(), reference())


def test_input_sets():
    assert len(default_inputs()) == 6
    eig = pauli_eigenstates()
    assert len(eig) == 4
    np.testing.assert_allclose(default_inputs()[0].matrix, eig[0].matrix)
    b = b_good()
    assert b.gate_count == 3
    np.testing.assert_allclose(abs(np.trace(b.as_unitary().conj().T @ ry(
        DEFAULT_THETA))), 2.0, atol=1e-12)
