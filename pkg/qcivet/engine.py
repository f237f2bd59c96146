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
"""Streaming integrity verification for staged pipelines.

Each :meth:`IntegrityVerifier.commit_stage` call

1. checks every attached observable against its calibrated tolerance,
2. computes the next head from the in-memory head and the stage spec,
3. checks that the in-memory head still matches the persisted log,
4. appends the record and submits the new head to the external anchor.

Any failure raises :class:`IntegrityViolation`; the host must not launch
downstream stages afterwards.
"""
import copy
import enum
import math
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from qcivet.anchor import (Anchor, AnchorUnavailableError, AnchorVerification,
                           InMemoryAnchor)
from qcivet.anchor import verify_against_anchor as _verify_against_anchor
from qcivet.auditchain import (AuditLog, ChainRecord, ChainVerification,
                               StageSpec, compute_hash)
from qcivet.auditchain import verify_full_chain as _verify_full_chain
from qcivet.logger import init_logger

logger = init_logger(__name__)


class ViolationKind(str, enum.Enum):
    HASH = "hash"
    OBSERVABLE = "observable"
    ANCHOR = "anchor"
    STORAGE = "storage"


class IntegrityViolation(Exception):

    def __init__(self, kind: ViolationKind, stage_index: int,
                 message: str) -> None:
        super().__init__(
            f"{kind.value} violation at stage {stage_index}: {message}")
        self.kind = kind
        self.stage_index = stage_index
        self.message = message

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "stage_index": self.stage_index,
            "message": self.message,
        }


@dataclass(frozen=True)
class ObservableCheck:
    label: str
    measured: float
    reference: float
    tolerance: float

    def __post_init__(self) -> None:
        for name in ("measured", "reference", "tolerance"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(
                    f"Observable {self.label!r}: {name} must be finite.")
        if self.tolerance < 0:
            raise ValueError(
                f"Observable {self.label!r}: tolerance must be >= 0, got "
                f"{self.tolerance}.")

    @property
    def deviation(self) -> float:
        return abs(self.measured - self.reference)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


@dataclass(frozen=True)
class StageResult:
    name: str
    spec: StageSpec
    observables: Tuple[ObservableCheck, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("Stage name must be non-empty.")
        object.__setattr__(self, "observables", tuple(self.observables))


class IntegrityVerifier:
    """One verifier per pipeline; commits must be serialized by the
    caller."""

    def __init__(self, anchor: Anchor, log: Optional[AuditLog] = None) -> None:
        self.anchor = anchor
        self.log = log if log is not None else AuditLog()
        self._head = self.log.head
        self._committed = len(self.log)
        # Indices of committed records whose anchor submission failed.
        self.unanchored: List[int] = []

    @property
    def head(self) -> str:
        return self._head

    @property
    def committed(self) -> int:
        return self._committed

    def _halt(self, kind: ViolationKind, stage_index: int,
              message: str) -> IntegrityViolation:
        logger.error("halted at stage %d (%s): %s", stage_index, kind.value,
                     message)
        return IntegrityViolation(kind, stage_index, message)

    def commit_stage(self, result: StageResult) -> ChainRecord:
        stage_index = self._committed
        for check in result.observables:
            if not check.passed:
                raise self._halt(
                    ViolationKind.OBSERVABLE, stage_index,
                    f"{result.name}: <{check.label}> = {check.measured:.9g}, "
                    f"reference {check.reference:.9g}, |delta| = "
                    f"{check.deviation:.4g} > {check.tolerance:g}")

        spec = copy.deepcopy(result.spec)
        new_head = compute_hash(self._head, spec, self.log.algorithm)

        if self.log.head != self._head:
            raise self._halt(
                ViolationKind.HASH, stage_index,
                f"{result.name}: in-memory head {self._head} does not match "
                f"persisted head {self.log.head}")

        try:
            record = self.log.append_record(
                ChainRecord(result.name, spec, self._head, new_head))
        except OSError as e:
            raise self._halt(ViolationKind.STORAGE, stage_index,
                             f"{result.name}: audit log write failed: {e}"
                             ) from e
        self._head = new_head
        self._committed += 1

        try:
            seq = self.anchor.submit(new_head)
        except AnchorUnavailableError as e:
            self.unanchored.append(stage_index)
            raise self._halt(ViolationKind.ANCHOR, stage_index,
                             f"{result.name}: {e}") from e
        logger.debug("committed stage %d (%s) head=%s anchor_seq=%d",
                     stage_index, result.name, new_head, seq)
        return record

    def verify_full_chain(self) -> ChainVerification:
        return _verify_full_chain(self.log)

    def verify_against_anchor(self) -> AnchorVerification:
        return _verify_against_anchor(self.anchor, self.log)


def commit_stage(verifier: IntegrityVerifier,
                 result: StageResult) -> ChainRecord:
    return verifier.commit_stage(result)


@dataclass(frozen=True)
class BenchStats:
    n_stages: int
    reps: int
    median_us: Optional[float] = None
    p99_us: Optional[float] = None
    pipeline_median_us: Optional[float] = None
    per_stage_median_us: Tuple[float, ...] = ()

    @property
    def empty(self) -> bool:
        return self.median_us is None


def _nearest_rank(values: np.ndarray, q: float) -> float:
    ordered = np.sort(values)
    rank = max(1, math.ceil(q * len(ordered)))
    return float(ordered[rank - 1])


def _bench_spec(i: int) -> StageSpec:
    return {
        "name": f"stage-{i}",
        "index": i,
        "params": {
            "shots": 4096,
            "tolerance": 0.05,
            "backend": "simulator"
        }
    }


def bench_commit(n_stages: int, reps: int) -> BenchStats:
    """Wall-clock commit latency against an in-memory anchor, in
    microseconds."""
    if n_stages < 0 or reps < 0:
        raise ValueError(
            f"n_stages and reps must be >= 0, got {n_stages}, {reps}.")
    if n_stages == 0 or reps == 0:
        return BenchStats(n_stages, reps)
    results = [
        StageResult(f"stage-{i}", _bench_spec(i),
                    (ObservableCheck("Z", 0.31, 0.309, 0.05), ))
        for i in range(n_stages)
    ]
    per_commit = np.empty((reps, n_stages), dtype=np.float64)
    pipeline = np.empty(reps, dtype=np.float64)
    for rep in range(reps):
        verifier = IntegrityVerifier(InMemoryAnchor())
        start = time.perf_counter_ns()
        for i, result in enumerate(results):
            t0 = time.perf_counter_ns()
            verifier.commit_stage(result)
            per_commit[rep, i] = (time.perf_counter_ns() - t0) / 1e3
        pipeline[rep] = (time.perf_counter_ns() - start) / 1e3
    flat = per_commit.ravel()
    stats = BenchStats(
        n_stages=n_stages,
        reps=reps,
        median_us=float(np.median(flat)),
        p99_us=_nearest_rank(flat, 0.99),
        pipeline_median_us=float(np.median(pipeline)),
        per_stage_median_us=tuple(
            float(v) for v in np.median(per_commit, axis=0)))
    logger.info("bench %d stages x %d reps: median %.2f us, p99 %.2f us",
                n_stages, reps, stats.median_us, stats.p99_us)
    return stats
