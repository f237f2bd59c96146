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
"""Six-stage demonstration pipelines and their attack scenarios.

Three domains are modelled: ``vqe`` (ground-state energy estimation),
``fraud`` (quantum-kernel fraud scoring) and ``cloud`` (audited QPU job
execution). Stage spec values are illustrative configuration.

Every domain runs under four scenarios and each attack must be caught by
the matching mechanism:

========  ==================
clean     none
drift     commit-observable
tamper    replay-hash
rewrite   anchor
========  ==================
"""
import copy
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from qcivet.anchor import Anchor, InMemoryAnchor, verify_against_anchor
from qcivet.auditchain import (AuditLog, StageSpec, build_chain, canonicalize,
                               verify_full_chain)
from qcivet.engine import (IntegrityVerifier, IntegrityViolation,
                           ObservableCheck, StageResult, ViolationKind)
from qcivet.logger import init_logger
from qcivet.ops import ry, rz, x_gate
from qcivet.qcore import OBSERVABLE_Z, Channel, DensityOperator, ket0
from qcivet.sampling import (DEVICE_PROXIES, NoiseSpec, ShotConfig,
                             cell_rng, estimate_pauli)

logger = init_logger(__name__)

DOMAINS = ("vqe", "fraud", "cloud")
SCENARIOS = ("clean", "tamper", "drift", "rewrite")
MODES = ("honest", "drift")

CAUGHT_BY_NONE = "none"
CAUGHT_BY_OBSERVABLE = "commit-observable"
CAUGHT_BY_REPLAY = "replay-hash"
CAUGHT_BY_ANCHOR = "anchor"

EXPECTED_CAUGHT_BY: Dict[str, str] = {
    "clean": CAUGHT_BY_NONE,
    "tamper": CAUGHT_BY_REPLAY,
    "drift": CAUGHT_BY_OBSERVABLE,
    "rewrite": CAUGHT_BY_ANCHOR,
}

# vqe
VQE_REFERENCE_ENERGY = -1.137270174
VQE_TOLERANCE = 0.04
VQE_ANSATZ_ANGLE = 2 * math.pi / 5
VQE_DRIFT_ANGLE = 0.4
VQE_ENERGY_SCALE = 0.5

# fraud
FRAUD_TOLERANCE = 0.05
FRAUD_SAMPLES = (0.1, 0.7, 1.3, 2.0)
FRAUD_POISON_SHIFT = 0.1
FRAUD_ALERT_THRESHOLD = 0.65

# cloud
CLOUD_TOLERANCE = 0.05
CLOUD_TRACER_GATES = 300
CLOUD_HERON_GATE_P = 0.0004
CLOUD_EAGLE_GATE_P = 0.0008


@dataclass(frozen=True)
class StageDefinition:
    name: str
    spec: StageSpec
    quantum: bool = False


SpecEdit = Callable[[StageSpec], StageSpec]


@dataclass(frozen=True)
class PipelineTemplate:
    domain: str
    stages: Tuple[StageDefinition, ...]
    quantum_stage_index: int
    # (stage index, edit) applied to a committed record after the run.
    tamper: Tuple[int, SpecEdit]
    # (stage index, edit) applied while rebuilding the chain offline.
    rewrite: Tuple[int, SpecEdit]

    def __post_init__(self) -> None:
        if len(self.stages) != 6:
            raise ValueError(
                f"{self.domain} pipeline must have 6 stages, got "
                f"{len(self.stages)}.")
        quantum = [i for i, s in enumerate(self.stages) if s.quantum]
        if quantum != [self.quantum_stage_index]:
            raise ValueError(
                f"{self.domain} pipeline must have exactly one quantum "
                f"stage at index {self.quantum_stage_index}.")

    def specs(self) -> List[StageSpec]:
        return [copy.deepcopy(stage.spec) for stage in self.stages]


def _with(key: str, value) -> SpecEdit:

    def edit(spec: StageSpec) -> StageSpec:
        edited = copy.deepcopy(spec)
        edited[key] = value
        return edited

    return edit


def _stage(name: str, quantum: bool = False, **fields) -> StageDefinition:
    return StageDefinition(name, {"name": name, **fields}, quantum)


def _vqe_template() -> PipelineTemplate:
    stages = (
        _stage("molecular_geometry",
               molecule="H2",
               bond_length_angstrom=0.735,
               basis_set="sto-3g",
               charge=0,
               multiplicity=1),
        _stage("active_space_selection",
               active_electrons=2,
               active_orbitals=2),
        _stage("hamiltonian_construction",
               mapping="jordan-wigner",
               n_qubits=4,
               n_pauli_terms=15),
        _stage("ansatz_synthesis", ansatz="UCCSD", reps=1, n_parameters=3),
        _stage("vqe_optimisation",
               quantum=True,
               optimizer="COBYLA",
               max_iter=200,
               shots=4096,
               reference_energy_ha=VQE_REFERENCE_ENERGY,
               tolerance_ha=VQE_TOLERANCE,
               device_class="heron-proxy"),
        _stage("result_interpretation",
               units="hartree",
               report="ground-state-energy"),
    )
    return PipelineTemplate("vqe", stages, 4,
                            tamper=(1, _with("active_orbitals", 4)),
                            rewrite=(1, _with("active_electrons", 4)))


def _fraud_template() -> PipelineTemplate:
    stages = (
        _stage("transaction_ingestion",
               source="synthetic-batch",
               n_transactions=len(FRAUD_SAMPLES),
               window="24h"),
        _stage("feature_engineering",
               features=["amount_z", "merchant_risk", "velocity",
                         "geo_distance"],
               scaling="standard"),
        _stage("quantum_kernel_preparation",
               feature_map="ry-rz",
               n_qubits=1,
               n_samples=len(FRAUD_SAMPLES)),
        _stage("qpu_kernel_evaluation",
               quantum=True,
               estimator="compute-uncompute",
               shots=4096,
               tolerance=FRAUD_TOLERANCE),
        _stage("classification", model="svc", regularization=1.0),
        _stage("alert_decision", threshold=FRAUD_ALERT_THRESHOLD),
    )
    return PipelineTemplate(
        "fraud", stages, 3,
        tamper=(5, _with("threshold", 0.95)),
        rewrite=(1, _with("features", ["amount_z", "merchant_risk"])))


def _cloud_template() -> PipelineTemplate:
    stages = (
        _stage("customer_submission",
               customer="acme-pharma",
               circuit=f"tracer-x{CLOUD_TRACER_GATES}",
               shots=4096,
               contracted_class="heron"),
        _stage("cloud_transpilation",
               optimization_level=1,
               basis_gates=["rz", "sx", "x", "cz"]),
        _stage("backend_assignment",
               backend="heron-proxy-01",
               device_class="heron"),
        _stage("calibration_verification",
               snapshot="cal-2026-10-01T00:00Z",
               gate_error=CLOUD_HERON_GATE_P),
        _stage("job_execution",
               quantum=True,
               tracer_gates=CLOUD_TRACER_GATES,
               tolerance=CLOUD_TOLERANCE),
        _stage("result_delivery", format="counts-json"),
    )
    return PipelineTemplate(
        "cloud", stages, 4,
        tamper=(3, _with("snapshot", "cal-2026-06-15T00:00Z")),
        rewrite=(2, _with("backend", "eagle-proxy-07")))


_TEMPLATES: Dict[str, Callable[[], PipelineTemplate]] = {
    "vqe": _vqe_template,
    "fraud": _fraud_template,
    "cloud": _cloud_template,
}


def template_for(domain: str) -> PipelineTemplate:
    if domain not in _TEMPLATES:
        raise ValueError(
            f"Unknown domain {domain!r}; expected one of {DOMAINS}.")
    return _TEMPLATES[domain]()


def _vqe_checks(mode: str, cfg: ShotConfig) -> List[ObservableCheck]:
    theta = VQE_ANSATZ_ANGLE
    if mode == "drift":
        theta += VQE_DRIFT_ANGLE
    prep = Channel.from_unitary(ry(theta), label="ansatz")
    rng = cell_rng(cfg.seed, DOMAINS.index("vqe"), MODES.index(mode))
    est = estimate_pauli(prep, DensityOperator.from_state(ket0()),
                         OBSERVABLE_Z, DEVICE_PROXIES["heron-proxy"], cfg,
                         rng)
    # The energy landscape is linear in <Z> around the ansatz optimum.
    energy = VQE_REFERENCE_ENERGY + VQE_ENERGY_SCALE * (
        est - math.cos(VQE_ANSATZ_ANGLE))
    return [
        ObservableCheck("H", energy, VQE_REFERENCE_ENERGY, VQE_TOLERANCE)
    ]


def _feature_state(x: float) -> np.ndarray:
    return rz(x) @ ry(x) @ ket0()


def ideal_kernel(samples=FRAUD_SAMPLES) -> np.ndarray:
    states = [_feature_state(x) for x in samples]
    return np.array([[abs(np.vdot(a, b))**2 for b in states]
                     for a in states])


def estimated_kernel(cfg: ShotConfig,
                     noise: NoiseSpec,
                     samples=FRAUD_SAMPLES) -> np.ndarray:
    """Compute-uncompute kernel: K_ij is the |0> probability after
    U(x_j)^dagger U(x_i)."""
    n = len(samples)
    kernel = np.eye(n)
    rho0 = DensityOperator.from_state(ket0())
    for i in range(n):
        for j in range(i + 1, n):
            xi, xj = samples[i], samples[j]
            circuit = Channel.compose(
                Channel.from_unitary(ry(xi), label="ry"),
                Channel.from_unitary(rz(xi), label="rz"),
                Channel.from_unitary(rz(-xj), label="rz"),
                Channel.from_unitary(ry(-xj), label="ry"))
            rng = cell_rng(cfg.seed, DOMAINS.index("fraud"), i, j)
            z = estimate_pauli(circuit, rho0, OBSERVABLE_Z, noise, cfg, rng)
            kernel[i, j] = kernel[j, i] = 0.5 * (1.0 + z)
    return kernel


def _fraud_checks(mode: str, cfg: ShotConfig) -> List[ObservableCheck]:
    kernel = estimated_kernel(cfg, DEVICE_PROXIES["heron-proxy"])
    if mode == "drift":
        kernel[0, 1] += FRAUD_POISON_SHIFT
        kernel[1, 0] += FRAUD_POISON_SHIFT
    worst = float(np.max(np.abs(kernel - ideal_kernel())))
    return [ObservableCheck("kernel", worst, 0.0, FRAUD_TOLERANCE)]


def tracer_circuit(n_gates: int = CLOUD_TRACER_GATES) -> Channel:
    if n_gates % 2:
        raise ValueError("The tracer needs an even number of X gates.")
    x = Channel.from_unitary(x_gate(), label="x")
    return Channel.compose(*([x] * n_gates), label=f"tracer-x{n_gates}")


def _cloud_checks(mode: str, cfg: ShotConfig) -> List[ObservableCheck]:
    gate_p = CLOUD_EAGLE_GATE_P if mode == "drift" else CLOUD_HERON_GATE_P
    rng = cell_rng(cfg.seed, DOMAINS.index("cloud"), MODES.index(mode))
    est = estimate_pauli(tracer_circuit(),
                         DensityOperator.from_state(ket0()), OBSERVABLE_Z,
                         NoiseSpec(gate_p=gate_p), cfg, rng)
    expected = (1.0 - CLOUD_HERON_GATE_P)**CLOUD_TRACER_GATES
    return [
        ObservableCheck("tracer", abs(est - expected), 0.0, CLOUD_TOLERANCE)
    ]


_SIMULATIONS: Dict[str, Callable[[str, ShotConfig], List[ObservableCheck]]] = {
    "vqe": _vqe_checks,
    "fraud": _fraud_checks,
    "cloud": _cloud_checks,
}


def quantum_stage_simulation(
        domain: str,
        mode: str = "honest",
        cfg: Optional[ShotConfig] = None) -> List[ObservableCheck]:
    """Observable checks for the domain's quantum stage. ``drift`` runs a
    perturbed channel: a rotated ansatz, a poisoned kernel entry or a
    downgraded device class."""
    if domain not in _SIMULATIONS:
        raise ValueError(
            f"Unknown domain {domain!r}; expected one of {DOMAINS}.")
    if mode not in MODES:
        raise ValueError(f"Unknown mode {mode!r}; expected one of {MODES}.")
    return _SIMULATIONS[domain](mode, cfg or ShotConfig(trials=1))


@dataclass
class ScenarioOutcome:
    domain: str
    scenario: str
    caught_by: str
    violation: Optional[IntegrityViolation]
    log: AuditLog
    committed: int

    @property
    def expected(self) -> bool:
        return self.caught_by == EXPECTED_CAUGHT_BY[self.scenario]

    def to_report(self) -> dict:
        report = {
            "domain": self.domain,
            "scenario": self.scenario,
            "caught_by": self.caught_by,
        }
        if self.violation is not None:
            report["violation"] = self.violation.to_dict()
        return report


def write_report(outcome: ScenarioOutcome, path: str) -> None:
    with open(path, "wb") as f:
        f.write(canonicalize(outcome.to_report()))


def _commit_label(violation: IntegrityViolation) -> str:
    if violation.kind == ViolationKind.OBSERVABLE:
        return CAUGHT_BY_OBSERVABLE
    return f"commit-{violation.kind.value}"


def run_demo(domain: str,
             scenario: str,
             seed: int = 0,
             shots: int = 4096,
             anchor: Optional[Anchor] = None) -> ScenarioOutcome:
    """Run the domain's pipeline under one scenario and report which
    mechanism caught the attack."""
    if scenario not in SCENARIOS:
        raise ValueError(
            f"Unknown scenario {scenario!r}; expected one of {SCENARIOS}.")
    template = template_for(domain)
    anchor = anchor if anchor is not None else InMemoryAnchor()
    verifier = IntegrityVerifier(anchor)
    cfg = ShotConfig(shots=shots, trials=1, seed=seed)
    mode = "drift" if scenario == "drift" else "honest"

    for idx, stage in enumerate(template.stages):
        checks = (quantum_stage_simulation(domain, mode, cfg)
                  if idx == template.quantum_stage_index else [])
        try:
            verifier.commit_stage(
                StageResult(stage.name, copy.deepcopy(stage.spec), checks))
        except IntegrityViolation as violation:
            logger.info("%s/%s aborted at stage %d", domain, scenario, idx)
            return ScenarioOutcome(domain, scenario, _commit_label(violation),
                                   violation, verifier.log,
                                   verifier.committed)

    log = verifier.log
    if scenario == "tamper":
        index, edit = template.tamper
        record = log.records[index]
        log.records[index] = replace(record, spec=edit(record.spec))
    elif scenario == "rewrite":
        index, edit = template.rewrite
        specs = template.specs()
        specs[index] = edit(specs[index])
        log = build_chain(specs, log.algorithm)

    chain = verify_full_chain(log)
    if not chain.ok:
        assert chain.index is not None
        violation = IntegrityViolation(ViolationKind.HASH, chain.index,
                                       str(chain))
        return ScenarioOutcome(domain, scenario, CAUGHT_BY_REPLAY, violation,
                               log, verifier.committed)
    anchored = verify_against_anchor(anchor, log)
    if not anchored.ok:
        violation = IntegrityViolation(ViolationKind.ANCHOR,
                                       anchored.index or 0, str(anchored))
        return ScenarioOutcome(domain, scenario, CAUGHT_BY_ANCHOR, violation,
                               log, verifier.committed)
    return ScenarioOutcome(domain, scenario, CAUGHT_BY_NONE, None, log,
                           verifier.committed)
