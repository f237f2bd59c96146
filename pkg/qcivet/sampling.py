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
"""Shot-based Pauli estimation and the noise / perturbation sweeps.

Random streams are counter-based: every sweep cell gets its own
``numpy.random.Philox`` generator keyed by ``SeedSequence([seed, *cell])``,
so results do not depend on the order in which cells are evaluated.
Shots are drawn from the exact Z-distribution of the analytically
propagated noisy state.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import (Callable, Dict, Iterable, List, Optional, Sequence,
                    Tuple, TypeVar)

import numpy as np
from scipy import stats as scipy_stats

from qcivet import envs
from qcivet.contracts import (DEFAULT_DELTA, DEFAULT_THETA, b_bad, b_good,
                              b_sneaky, default_inputs, full_xyz, reference,
                              weak_z)
from qcivet.logger import init_logger
from qcivet.ops import PAULI_X, PAULI_Y, PAULI_Z, h_gate, ry, sdg_gate
from qcivet.qcore import (OBSERVABLE_Z, PAULIS, Channel, DensityOperator,
                          Observable, expectation, fuse_gates,
                          with_gate_noise)

logger = init_logger(__name__)

_T = TypeVar("_T")
_R = TypeVar("_R")

DEFAULT_SHOTS = 4096
DEFAULT_TRIALS = 20
DEFAULT_P_VALUES = (0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.07,
                    0.10)
DEFAULT_DELTA_VALUES = (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8)
SLOPE_FIT_RANGE = (0.001, 0.05)

# Leading element of every stream key, one per kind of experiment.
_STREAM_NOISE_SWEEP = 0
_STREAM_PER_INPUT = 1
_STREAM_SEPARATION = 2

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ShotConfig:
    shots: int = DEFAULT_SHOTS
    trials: int = DEFAULT_TRIALS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}.")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}.")


@dataclass(frozen=True)
class NoiseSpec:
    gate_p: float = 0.0
    readout_flip: float = 0.0

    def __post_init__(self) -> None:
        for name in ("gate_p", "readout_flip"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}.")


# Synthetic stand-ins for two device classes. Values are configuration.
DEVICE_PROXIES: Dict[str, NoiseSpec] = {
    "heron-proxy": NoiseSpec(gate_p=2e-4, readout_flip=0.01),
    "eagle-proxy": NoiseSpec(gate_p=3e-4, readout_flip=0.02),
}


@dataclass(frozen=True)
class TrialStats:
    mean: float
    std: float
    p95: float
    samples: Tuple[float, ...] = field(default_factory=tuple)

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> "TrialStats":
        if not samples:
            raise ValueError("TrialStats needs at least one sample.")
        values = np.asarray(samples, dtype=np.float64)
        ordered = np.sort(values)
        # Nearest rank: the ceil(0.95 n)-th smallest value.
        rank = -(-95 * len(ordered) // 100)
        return cls(mean=float(values.mean()),
                   std=float(values.std()),
                   p95=float(ordered[rank - 1]),
                   samples=tuple(float(v) for v in values))


def cell_rng(seed: int, *cell: int) -> np.random.Generator:
    """Independent generator for one sweep cell."""
    key = [seed & _SEED_MASK] + [int(c) for c in cell]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _map_cells(fn: Callable[[_T], _R], cells: Iterable[_T]) -> List[_R]:
    workers = envs.QCIVET_SWEEP_WORKERS
    if workers <= 1:
        return [fn(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def basis_change(pauli: Observable) -> List[Channel]:
    """Gates rotating the pauli eigenbasis onto Z: H for X, S-dagger then H
    for Y, nothing for Z."""
    if pauli.dim == 2 and np.allclose(pauli.matrix, PAULI_X):
        return [Channel.from_unitary(h_gate(), label="h")]
    if pauli.dim == 2 and np.allclose(pauli.matrix, PAULI_Y):
        return [
            Channel.from_unitary(sdg_gate(), label="sdg"),
            Channel.from_unitary(h_gate(), label="h")
        ]
    if pauli.dim == 2 and np.allclose(pauli.matrix, PAULI_Z):
        return []
    raise ValueError(
        f"Only single-qubit X, Y and Z can be measured, got "
        f"{pauli.label!r}.")


def measured_z(state_prep: Channel, rho: DensityOperator,
               pauli: Observable, gate_p: float) -> float:
    """<Z> after state_prep and the basis change, each gate followed by
    depolarizing noise of strength gate_p."""
    circuit = Channel.compose(state_prep, *basis_change(pauli))
    return expectation(OBSERVABLE_Z,
                       with_gate_noise(circuit, gate_p).apply(rho))


def noisy_expectation(state_prep: Channel, rho: DensityOperator,
                      pauli: Observable, noise: NoiseSpec) -> float:
    """Expected value of :func:`estimate_pauli`."""
    return (1.0 - 2.0 * noise.readout_flip) * measured_z(
        state_prep, rho, pauli, noise.gate_p)


def _sample_estimate(z: float, readout_flip: float, shots: int,
                     rng: np.random.Generator) -> float:
    p0 = min(max(0.5 * (1.0 + z), 0.0), 1.0)
    ones = rng.random(shots) >= p0
    if readout_flip > 0:
        ones ^= rng.random(shots) < readout_flip
    n1 = int(np.count_nonzero(ones))
    return (shots - 2 * n1) / shots


def estimate_pauli(state_prep: Channel, rho: DensityOperator,
                   pauli: Observable, noise: NoiseSpec, cfg: ShotConfig,
                   rng: np.random.Generator) -> float:
    """Shot estimate (n0 - n1) / shots of the pauli after state_prep."""
    if rho.dim != 2:
        raise ValueError("Pauli estimation is single-qubit only.")
    z = measured_z(state_prep, rho, pauli, noise.gate_p)
    return _sample_estimate(z, noise.readout_flip, cfg.shots, rng)


def _worst_over_cells(z_table: Dict[Tuple[int, int], float],
                      refs: Dict[Tuple[int, int], float], readout_flip: float,
                      cfg: ShotConfig, stream: Tuple[int, ...],
                      trial: int) -> float:
    """Worst |estimate - reference| over all cells for one trial."""
    worst = 0.0
    for (i, k), z in z_table.items():
        rng = cell_rng(cfg.seed, *stream, trial, i, k)
        est = _sample_estimate(z, readout_flip, cfg.shots, rng)
        worst = max(worst, abs(est - refs[(i, k)]))
    return worst


def _reference_table(
        a_ref: Channel, inputs: Sequence[DensityOperator],
        paulis: Sequence[Observable]) -> Dict[Tuple[int, int], float]:
    table = {}
    for i, rho in enumerate(inputs):
        out = a_ref.apply(rho)
        for k, pauli in enumerate(paulis):
            table[(i, k)] = expectation(pauli, out)
    return table


def _measured_table(
        b: Channel, inputs: Sequence[DensityOperator],
        paulis: Sequence[Observable],
        gate_p: float) -> Dict[Tuple[int, int], float]:
    return {(i, k): measured_z(b, rho, pauli, gate_p)
            for i, rho in enumerate(inputs)
            for k, pauli in enumerate(paulis)}


def noise_sweep(b: Channel,
                a_ref: Channel,
                p_values: Sequence[float],
                cfg: ShotConfig,
                inputs: Optional[Sequence[DensityOperator]] = None,
                readout_flip: float = 0.0) -> Dict[float, TrialStats]:
    """Per-trial worst deviation of noisy estimates of ``b`` from the
    noiseless ``a_ref`` over the three Paulis and the inputs, per p."""
    inputs = default_inputs() if inputs is None else list(inputs)
    refs = _reference_table(a_ref, inputs, PAULIS)
    results: Dict[float, TrialStats] = {}
    for p_idx, p in enumerate(p_values):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"Depolarizing probability {p} not in [0, 1].")
        z_table = _measured_table(b, inputs, PAULIS, p)
        samples = _map_cells(
            partial(_worst_over_cells, z_table, refs, readout_flip, cfg,
                    (_STREAM_NOISE_SWEEP, p_idx)), range(cfg.trials))
        results[p] = TrialStats.from_samples(samples)
        logger.info("noise sweep p=%g: mean=%.6f p95=%.6f", p,
                    results[p].mean, results[p].p95)
    return results


def delta_sweep(
    theta: float = DEFAULT_THETA,
    delta_values: Sequence[float] = DEFAULT_DELTA_VALUES,
    inputs: Optional[Sequence[DensityOperator]] = None
) -> Dict[float, Tuple[float, float]]:
    """Analytic (full-XYZ, Z-only) worst deviation of Ry(theta + delta)
    from Ry(theta), per delta."""
    inputs = default_inputs() if inputs is None else list(inputs)
    a_ref = Channel.from_unitary(ry(theta))
    curve: Dict[float, Tuple[float, float]] = {}
    for delta in delta_values:
        b = Channel.from_unitary(ry(theta + delta))
        full = z_only = 0.0
        for rho in inputs:
            out_a, out_b = a_ref.apply(rho), b.apply(rho)
            devs = {
                pauli.label:
                abs(expectation(pauli, out_b) - expectation(pauli, out_a))
                for pauli in PAULIS
            }
            full = max(full, *devs.values())
            z_only = max(z_only, devs["Z"])
        curve[delta] = (full, z_only)
    return curve


def fit_slope(noise_stats: Dict[float, TrialStats],
              lo: float = SLOPE_FIT_RANGE[0],
              hi: float = SLOPE_FIT_RANGE[1]) -> float:
    """Ordinary least-squares slope of mean deviation against p on
    [lo, hi]."""
    points = sorted((p, s.mean) for p, s in noise_stats.items()
                    if lo <= p <= hi)
    if len(points) < 2:
        raise ValueError(
            f"Need at least two p values in [{lo}, {hi}] to fit a slope.")
    xs, ys = zip(*points)
    return float(scipy_stats.linregress(xs, ys).slope)


@dataclass(frozen=True)
class CalibrationWindow:
    """Overlay rows ("p" | "delta", x, y) and the tolerance window
    (lower, upper) at one operating point."""

    rows: List[Tuple[str, float, float]]
    operating_p: float
    delta_target: float
    lower: float
    upper: float

    @property
    def empty(self) -> bool:
        return self.lower >= self.upper

    def contains(self, tolerance: float) -> bool:
        return self.lower < tolerance < self.upper


def calibration_window(noise_stats: Dict[float, TrialStats],
                       logic_curve: Dict[float, float],
                       operating_p: Optional[float] = None,
                       delta_target: float = DEFAULT_DELTA
                       ) -> CalibrationWindow:
    """The noise floor is the p95 at ``operating_p`` (largest p when
    unset); the ceiling is the logical deviation at ``delta_target``."""
    if not noise_stats or not logic_curve:
        raise ValueError("Both the noise and the logic curve are required.")
    if operating_p is None:
        operating_p = max(noise_stats)
    if operating_p not in noise_stats:
        raise ValueError(f"No noise statistics at p={operating_p}.")
    if delta_target not in logic_curve:
        raise ValueError(f"No logical deviation at delta={delta_target}.")
    rows = [("p", p, s.p95) for p, s in noise_stats.items()]
    rows += [("delta", d, dev) for d, dev in logic_curve.items()]
    return CalibrationWindow(rows=rows,
                             operating_p=operating_p,
                             delta_target=delta_target,
                             lower=noise_stats[operating_p].p95,
                             upper=logic_curve[delta_target])


def per_input_calibration(
        a_ref: Channel,
        noise: NoiseSpec,
        cfg: ShotConfig,
        inputs: Optional[Sequence[DensityOperator]] = None
) -> List[TrialStats]:
    """Per-input <Z> deviation of the noisy reference from its ideal value,
    one TrialStats per input."""
    inputs = default_inputs() if inputs is None else list(inputs)
    stats = []
    for i, rho in enumerate(inputs):
        ideal = expectation(OBSERVABLE_Z, a_ref.apply(rho))
        z = measured_z(a_ref, rho, OBSERVABLE_Z, noise.gate_p)
        samples = [
            abs(
                _sample_estimate(
                    z, noise.readout_flip, cfg.shots,
                    cell_rng(cfg.seed, _STREAM_PER_INPUT, i, trial)) - ideal)
            for trial in range(cfg.trials)
        ]
        stats.append(TrialStats.from_samples(samples))
    return stats


def separation_candidates(theta: float = DEFAULT_THETA,
                          delta: float = DEFAULT_DELTA
                          ) -> Dict[str, Channel]:
    return {
        "B_good": fuse_gates(b_good(theta)),
        "B_bad": b_bad(theta, delta),
        "B_sneaky": fuse_gates(b_sneaky(theta)),
    }


def noisy_separation(
        noise: NoiseSpec,
        cfg: ShotConfig,
        theta: float = DEFAULT_THETA,
        delta: float = DEFAULT_DELTA) -> Dict[str, Dict[str, TrialStats]]:
    """Worst deviation of each candidate from the noiseless reference under
    both contracts, estimated with shots under ``noise``."""
    a_ref = reference(theta)
    inputs = default_inputs()
    families = (full_xyz(), weak_z())
    table: Dict[str, Dict[str, TrialStats]] = {}
    for c_idx, (name, b) in enumerate(
            separation_candidates(theta, delta).items()):
        table[name] = {}
        for f_idx, family in enumerate(families):
            paulis = family.observables
            refs = _reference_table(a_ref, inputs, paulis)
            z_table = _measured_table(b, inputs, paulis, noise.gate_p)
            stream = (_STREAM_SEPARATION, c_idx, f_idx)
            samples = _map_cells(
                partial(_worst_over_cells, z_table, refs, noise.readout_flip,
                        cfg, stream), range(cfg.trials))
            table[name][family.name] = TrialStats.from_samples(samples)
    return table
