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
"""Experiment drivers: each ``*_data`` function returns plain rows, each
``run_*`` function writes them under an output directory and returns the
paths written. CSV numbers use 9 significant digits; JSON is canonical."""
import csv
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from qcivet.anchor import FileAnchor, verify_against_anchor
from qcivet.auditchain import (AuditLog, StageSpec, canonicalize, scenario,
                               verify_full_chain)
from qcivet.contracts import (COMPLETENESS_CONSTANT, DEFAULT_DELTA,
                              DEFAULT_THETA, PAULI_NORMING_CONSTANT, Contract,
                              b_bad, b_good, b_sneaky, completeness_bound,
                              composition_bound, default_inputs,
                              empirical_constant, full_xyz, make_sneaky,
                              measured_tolerances, reference,
                              soundness_margin, weak_z, worst_deviation)
from qcivet.engine import bench_commit
from qcivet.logger import init_logger
from qcivet.ops import PAULI_X, PAULI_Y, PAULI_Z, cnot, kron, ry
from qcivet.pipelines import run_demo, write_report
from qcivet.qcore import (OBSERVABLE_Z, Channel, DensityOperator,
                          diamond_distance_lower_bound,
                          diamond_distance_unitary,
                          frobenius_distance, fuse_gates, haar_unitary,
                          ket0, operator_norm, partial_trace_first,
                          pure_state, trace_norm)
from qcivet.sampling import (DEVICE_PROXIES, ShotConfig, calibration_window,
                             cell_rng, delta_sweep, fit_slope, noise_sweep,
                             noisy_separation, per_input_calibration)

logger = init_logger(__name__)

Row = Sequence[Any]

# Stream tags for the seeded experiments.
_STREAM_EXP2 = 20
_STREAM_THEOREMS = 30

DEFAULT_OPERATING_P = 0.001
DEFAULT_SWEEP_SIZE = 100
THEOREM_ATOL = 1e-9


def _fmt(value: Any) -> Any:
    if isinstance(value, float):
        return f"{value:.9g}"
    return value


def write_csv(path: str, header: Sequence[str], rows: Sequence[Row]) -> str:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    logger.info("wrote %s", path)
    return path


def write_json(path: str, obj: Any) -> str:
    with open(path, "wb") as f:
        f.write(canonicalize(obj))
    logger.info("wrote %s", path)
    return path


@dataclass
class RunManifest:
    command: str
    seed: int
    parameters: StageSpec = field(default_factory=dict)
    output_paths: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "parameters": self.parameters,
            "output_paths": self.output_paths,
        }

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, f"{self.command}-manifest.json")
        return write_json(path, self.to_dict())


def _paths(out_dir: str, *names: str) -> List[str]:
    os.makedirs(out_dir, exist_ok=True)
    return [os.path.join(out_dir, name) for name in names]


def exp1_data(theta: float = DEFAULT_THETA,
              delta: float = DEFAULT_DELTA) -> Tuple[List[Row], List[Row]]:
    """Worst deviation table (candidate, full-XYZ, weak-Z) and the
    per-(candidate, input, observable) grid."""
    a = reference(theta)
    inputs = tuple(default_inputs())
    candidates = {
        "B_good": b_good(theta),
        "B_bad": b_bad(theta, delta),
        "B_sneaky": b_sneaky(theta),
    }
    table, grid = [], []
    for name, b in candidates.items():
        full = worst_deviation(a, b, Contract(full_xyz(), 0.0, inputs))
        weak = worst_deviation(a, b, Contract(weak_z(), 0.0, inputs))
        table.append((name, full.worst, weak.worst))
        for (idx, label), dev in full.per_cell.items():
            grid.append((name, idx, label, dev))
    return table, grid


def run_exp1(out_dir: str, theta: float, delta: float) -> List[str]:
    table, grid = exp1_data(theta, delta)
    table_path, grid_path = _paths(out_dir, "exp1_table.csv",
                                   "exp1_grid.csv")
    return [
        write_csv(table_path, ("candidate", "full_xyz", "weak_z"), table),
        write_csv(grid_path, ("candidate", "input", "observable",
                              "deviation"), grid),
    ]


def _bell_like(alpha: complex, beta: complex) -> DensityOperator:
    """CNOT applied to (a|0> + b|1>)|0>."""
    psi = cnot() @ kron(pure_state([alpha, beta]), ket0())
    return DensityOperator.from_state(psi)


def exp2_data(seed: int, trials: int = 10) -> List[Row]:
    """Frobenius distance between Tr_A of a|00> + b|11> and
    diag(|a|^2, |b|^2), for two fixed and ``trials`` random pairs."""
    cases: List[Tuple[str, complex, complex]] = [
        ("alpha=1", 1.0, 0.0),
        ("alpha=beta", 1 / math.sqrt(2), 1 / math.sqrt(2)),
    ]
    for trial in range(trials):
        z = cell_rng(seed, _STREAM_EXP2, trial).normal(size=4)
        amp = np.array([z[0] + 1j * z[1], z[2] + 1j * z[3]])
        amp /= np.linalg.norm(amp)
        cases.append((f"random-{trial}", complex(amp[0]), complex(amp[1])))
    rows = []
    for name, alpha, beta in cases:
        reduced = partial_trace_first(_bell_like(alpha, beta))
        analytic = np.diag([abs(alpha)**2, abs(beta)**2])
        rows.append((name, float(abs(alpha)**2),
                     frobenius_distance(reduced.matrix, analytic)))
    return rows


def run_exp2(out_dir: str, seed: int) -> List[str]:
    rows = exp2_data(seed)
    csv_path, json_path = _paths(out_dir, "exp2.csv", "exp2_summary.json")
    return [
        write_csv(csv_path, ("case", "abs_alpha_sq", "frobenius"), rows),
        write_json(json_path, {"max_frobenius": max(r[2] for r in rows)}),
    ]


def _stats_rows(stats) -> List[Row]:
    return [(x, s.mean, s.std, s.p95) for x, s in stats.items()]


def exp3_data(p_values: Sequence[float],
              cfg: ShotConfig,
              theta: float = DEFAULT_THETA):
    """Noise sweep of the transpiled (fused) B_good against the noiseless
    reference."""
    return noise_sweep(fuse_gates(b_good(theta)), reference(theta), p_values,
                       cfg)


def run_exp3(out_dir: str, p_values: Sequence[float], cfg: ShotConfig,
             theta: float) -> List[str]:
    stats = exp3_data(p_values, cfg, theta)
    csv_path, json_path = _paths(out_dir, "exp3.csv", "exp3_fit.json")
    paths = [write_csv(csv_path, ("p", "mean", "std", "p95"),
                       _stats_rows(stats))]
    try:
        paths.append(write_json(json_path, {"slope": fit_slope(stats)}))
    except ValueError as e:
        logger.warning("slope not fitted: %s", e)
    return paths


def exp4_data(delta_values: Sequence[float],
              theta: float = DEFAULT_THETA) -> List[Row]:
    curve = delta_sweep(theta, delta_values)
    return [(d, full, z, math.sin(d)) for d, (full, z) in curve.items()]


def run_exp4(out_dir: str, delta_values: Sequence[float],
             theta: float) -> List[str]:
    (csv_path, ) = _paths(out_dir, "exp4.csv")
    return [
        write_csv(csv_path, ("delta", "full_dev", "z_dev", "sin_delta"),
                  exp4_data(delta_values, theta))
    ]


def window_data(p_values: Sequence[float],
                delta_values: Sequence[float],
                cfg: ShotConfig,
                theta: float = DEFAULT_THETA,
                operating_p: float = DEFAULT_OPERATING_P,
                delta_target: float = DEFAULT_DELTA):
    p_values = list(p_values)
    if operating_p not in p_values:
        p_values.append(operating_p)
    delta_values = list(delta_values)
    if delta_target not in delta_values:
        delta_values.append(delta_target)
    noise = exp3_data(p_values, cfg, theta)
    logic = {d: full for d, (full, _) in delta_sweep(theta,
                                                      delta_values).items()}
    return calibration_window(noise, logic, operating_p, delta_target)


def run_window(out_dir: str, p_values: Sequence[float],
               delta_values: Sequence[float], cfg: ShotConfig,
               theta: float) -> List[str]:
    window = window_data(p_values, delta_values, cfg, theta)
    csv_path, json_path = _paths(out_dir, "window.csv", "window.json")
    return [
        write_csv(csv_path, ("axis", "x", "y"), window.rows),
        write_json(
            json_path, {
                "operating_p": window.operating_p,
                "delta_target": window.delta_target,
                "lower": window.lower,
                "upper": window.upper,
                "empty": window.empty,
            }),
    ]


def exp5_data(cfg: ShotConfig, theta: float = DEFAULT_THETA) -> List[Row]:
    rows = []
    for device, noise in DEVICE_PROXIES.items():
        for idx, s in enumerate(
                per_input_calibration(reference(theta), noise, cfg)):
            rows.append((device, idx, s.mean, s.std, s.p95))
    return rows


def run_exp5(out_dir: str, cfg: ShotConfig, theta: float) -> List[str]:
    (csv_path, ) = _paths(out_dir, "exp5.csv")
    return [
        write_csv(csv_path, ("device", "input", "mean", "std", "p95"),
                  exp5_data(cfg, theta))
    ]


def exp6_data(cfg: ShotConfig,
              theta: float = DEFAULT_THETA,
              delta: float = DEFAULT_DELTA) -> List[Row]:
    rows = []
    for device, noise in DEVICE_PROXIES.items():
        table = noisy_separation(noise, cfg, theta, delta)
        for candidate, per_family in table.items():
            for family, s in per_family.items():
                rows.append((device, candidate, family, s.mean, s.std, s.p95))
    return rows


def run_exp6(out_dir: str, cfg: ShotConfig, theta: float,
             delta: float) -> List[str]:
    (csv_path, ) = _paths(out_dir, "exp6.csv")
    return [
        write_csv(csv_path,
                  ("device", "candidate", "family", "mean", "std", "p95"),
                  exp6_data(cfg, theta, delta))
    ]


def probe_data(theta: float = DEFAULT_THETA,
               delta: float = DEFAULT_DELTA) -> Dict[str, float]:
    a, b = reference(theta), b_bad(theta, delta)
    diamond = diamond_distance_unitary(ry(theta), ry(theta + delta))
    return {
        "diamond": diamond,
        "grid_lower_bound": diamond_distance_lower_bound(a, b),
        "ratio": empirical_constant(a, b),
        "completeness_constant": COMPLETENESS_CONSTANT,
    }


def run_probe(out_dir: str, theta: float, delta: float) -> List[str]:
    (json_path, ) = _paths(out_dir, "probe.json")
    return [write_json(json_path, probe_data(theta, delta))]


def _small_rotation(rng: np.random.Generator, max_angle: float) -> Channel:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.random() * max_angle
    generator = axis[0] * PAULI_X + axis[1] * PAULI_Y + axis[2] * PAULI_Z
    u = math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * generator
    return Channel.from_unitary(u, label="perturbation")


def _random_traceless(rng: np.random.Generator) -> np.ndarray:
    r = rng.normal(size=3)
    return r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z


def _random_hermitian(rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return 0.5 * (g + g.conj().T)


def theorem_data(seed: int, n: int = DEFAULT_SWEEP_SIZE) -> Dict[str, dict]:
    """Seeded property sweeps; every entry reports how many of ``n``
    random configurations broke the inequality."""
    inputs = default_inputs()
    family = full_xyz()
    counts = {
        name: 0
        for name in ("soundness", "completeness", "composition",
                     "sneaky_existence", "sneaky_converse", "norming",
                     "holder")
    }
    worst_ratio = 0.0
    for t in range(n):
        rng = cell_rng(seed, _STREAM_THEOREMS, t)
        u_a = haar_unitary(rng)
        a = Channel.from_unitary(u_a, label="a")
        b = Channel.from_unitary(haar_unitary(rng), label="b")

        lhs, rhs = soundness_margin(a, b, family, inputs)
        counts["soundness"] += lhs > rhs + THEOREM_ATOL

        diamond, bound = completeness_bound(a, b)
        counts["completeness"] += diamond > bound + THEOREM_ATOL

        a2 = Channel.from_unitary(haar_unitary(rng), label="a2")
        b1 = Channel.compose(a, _small_rotation(rng, 0.2))
        b2 = Channel.compose(a2, _small_rotation(rng, 0.2))
        eps1, eps2 = measured_tolerances(a, b1, a2, b2, family, family,
                                         inputs)
        lhs, rhs = composition_bound(a, b1, a2, b2, family, family, eps1,
                                     eps2, inputs)
        counts["composition"] += lhs > rhs + THEOREM_ATOL

        sneaky = make_sneaky(a, OBSERVABLE_Z)
        z_dev = worst_deviation(a, sneaky,
                                Contract(weak_z(), 0.0, tuple(inputs))).worst
        counts["sneaky_existence"] += z_dev > THEOREM_ATOL

        # Same channel up to a global phase.
        twin = Channel.from_unitary(
            np.exp(2j * math.pi * rng.random()) * u_a,
            label="twin")
        dev = worst_deviation(a, twin, Contract(family, 0.0,
                                                tuple(inputs))).worst
        if dev <= THEOREM_ATOL:
            twin_diamond = diamond_distance_unitary(u_a, twin.unitary)
            counts["sneaky_converse"] += twin_diamond > 1e-7
        else:
            counts["sneaky_converse"] += 1

        sigma = _random_traceless(rng)
        pauli_max = max(
            abs(np.trace(p @ sigma)) for p in (PAULI_X, PAULI_Y, PAULI_Z))
        ratio = trace_norm(sigma) / pauli_max
        worst_ratio = max(worst_ratio, ratio)
        counts["norming"] += ratio > PAULI_NORMING_CONSTANT + THEOREM_ATOL

        obs, sigma = _random_hermitian(rng), _random_hermitian(rng)
        counts["holder"] += (abs(np.trace(obs @ sigma)) >
                             operator_norm(obs) * trace_norm(sigma) +
                             THEOREM_ATOL)
    report = {name: {"checked": n, "violations": int(v)}
              for name, v in counts.items()}
    report["norming"]["worst_ratio"] = worst_ratio
    return report


def run_theorems(out_dir: str, seed: int) -> List[str]:
    (json_path, ) = _paths(out_dir, "theorems.json")
    return [write_json(json_path, theorem_data(seed))]


def chain_demo_data(kind: str) -> Tuple[dict, AuditLog]:
    log = scenario(kind)
    result = verify_full_chain(log)
    return {
        "kind": kind,
        "ok": result.ok,
        "index": result.index,
        "reason": result.reason,
        "records": len(log),
    }, log


def run_chain_demo(out_dir: str, kind: str) -> List[str]:
    report, log = chain_demo_data(kind)
    json_path, log_path = _paths(out_dir, f"chain-{kind}.json",
                                 f"chain-{kind}.jsonl")
    log.export(log_path)
    return [write_json(json_path, report), log_path]


def run_demo_command(out_dir: str, domain: str, scenario_name: str,
                     seed: int, shots: int) -> Tuple[List[str], bool]:
    """Returns the written paths and whether the outcome matched the
    expected catching mechanism."""
    report_path, log_path, anchor_path = _paths(
        out_dir, f"demo-{domain}-{scenario_name}.json",
        f"demo-{domain}-{scenario_name}.jsonl",
        f"demo-{domain}-{scenario_name}.anchor")
    if os.path.exists(anchor_path):
        os.remove(anchor_path)
    outcome = run_demo(domain,
                       scenario_name,
                       seed=seed,
                       shots=shots,
                       anchor=FileAnchor(anchor_path))
    write_report(outcome, report_path)
    outcome.log.export(log_path)
    logger.info("%s/%s caught_by=%s", domain, scenario_name,
                outcome.caught_by)
    return [report_path, log_path, anchor_path], outcome.expected


def run_bench(out_dir: str, reps: int, n_stages: int) -> List[str]:
    stats = bench_commit(n_stages, reps)
    (json_path, ) = _paths(out_dir, "bench.json")
    return [
        write_json(
            json_path, {
                "n_stages": stats.n_stages,
                "reps": stats.reps,
                "median_us": stats.median_us,
                "p99_us": stats.p99_us,
                "pipeline_median_us": stats.pipeline_median_us,
                "per_stage_median_us": list(stats.per_stage_median_us),
            })
    ]


def verify_artifacts(log_path: str,
                     anchor_path: Optional[str] = None) -> Optional[str]:
    """Replay a persisted audit log and, when given, check it against an
    anchor file. Returns None when both pass, else a message naming the
    violation kind."""
    log = AuditLog.load(log_path, verify=False)
    chain = verify_full_chain(log)
    if not chain.ok:
        return f"hash violation: {chain}"
    if anchor_path is not None:
        anchored = verify_against_anchor(FileAnchor(anchor_path), log)
        if not anchored.ok:
            return f"anchor violation: {anchored}"
    return None
