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

import logging
import shutil

import pytest

from qcivet.anchor import FileAnchor
from qcivet.auditchain import (GENESIS, AuditLog, build_chain, compute_hash,
                               verify_full_chain)
from qcivet.engine import (BenchStats, IntegrityVerifier, IntegrityViolation,
                           ObservableCheck, StageResult, ViolationKind,
                           bench_commit, commit_stage)
from tests.qcivet_utils import commit_all, passing_check


def test_clean_run(memory_anchor, base_specs):
    verifier = commit_all(memory_anchor, base_specs, [passing_check()])
    assert verifier.committed == len(base_specs)
    assert verifier.head == build_chain(base_specs).head
    assert verifier.verify_full_chain().ok
    assert verifier.verify_against_anchor().ok
    assert verifier.unanchored == []
    assert [e.head for e in memory_anchor.entries()] == verifier.log.heads()


def test_clean_run_with_file_anchor(file_anchor, base_specs):
    verifier = commit_all(file_anchor, base_specs)
    assert verifier.verify_against_anchor().ok


def test_observable_check_fields():
    check = ObservableCheck("H", -1.20, -1.137270174, 0.04)
    assert check.deviation == pytest.approx(0.062729826)
    assert not check.passed
    assert ObservableCheck("Z", 0.0, 0.05, 0.05).passed
    with pytest.raises(ValueError):
        ObservableCheck("Z", float("nan"), 0.0, 0.1)
    with pytest.raises(ValueError):
        ObservableCheck("Z", 0.0, 0.0, -0.1)
    with pytest.raises(ValueError):
        StageResult("", {})


def test_observable_violation_halts(memory_anchor, base_specs, caplog,
                                    monkeypatch):
    monkeypatch.setattr(logging.getLogger("qcivet"), "propagate", True)
    verifier = IntegrityVerifier(memory_anchor)
    for spec in base_specs[:4]:
        verifier.commit_stage(StageResult(spec["name"], spec))
    bad = StageResult("vqe", base_specs[4],
                      (ObservableCheck("H", -1.20, -1.137270174, 0.04), ))
    head_before = verifier.head
    with caplog.at_level(logging.ERROR), pytest.raises(
            IntegrityViolation) as excinfo:
        commit_stage(verifier, bad)
    violation = excinfo.value
    assert violation.kind is ViolationKind.OBSERVABLE
    assert violation.stage_index == 4
    assert "0.06273" in violation.message
    assert violation.to_dict()["kind"] == "observable"
    # nothing is recorded for the failed stage
    assert verifier.head == head_before
    assert verifier.committed == 4
    assert len(verifier.log) == 4
    assert len(memory_anchor) == 4
    assert "halted at stage 4" in caplog.text


def test_desynchronized_head_is_a_hash_violation(memory_anchor, base_specs):
    verifier = IntegrityVerifier(memory_anchor)
    for spec in base_specs[:3]:
        verifier.commit_stage(StageResult(spec["name"], spec))
    verifier.log.append("rogue", {"rogue": True})
    with pytest.raises(IntegrityViolation) as excinfo:
        verifier.commit_stage(StageResult("next", base_specs[3]))
    assert excinfo.value.kind is ViolationKind.HASH
    assert excinfo.value.stage_index == 3
    assert len(memory_anchor) == 3


def test_anchor_outage_keeps_the_record(memory_anchor, base_specs):
    verifier = IntegrityVerifier(memory_anchor)
    verifier.commit_stage(StageResult("a", base_specs[0]))
    memory_anchor.available = False
    with pytest.raises(IntegrityViolation) as excinfo:
        verifier.commit_stage(StageResult("b", base_specs[1]))
    assert excinfo.value.kind is ViolationKind.ANCHOR
    assert excinfo.value.stage_index == 1
    assert verifier.committed == 2
    assert verifier.unanchored == [1]
    assert verifier.verify_full_chain().ok
    memory_anchor.available = True
    result = verifier.verify_against_anchor()
    assert result.status == "absent"
    assert result.index == 1


def test_commit_copies_the_spec(memory_anchor):
    spec = {"name": "s", "params": {"k": 1}}
    verifier = IntegrityVerifier(memory_anchor)
    record = verifier.commit_stage(StageResult("s", spec))
    spec["params"]["k"] = 2
    assert record.spec["params"]["k"] == 1
    assert record.prev_hash == GENESIS
    assert record.hash == compute_hash(GENESIS, {
        "name": "s",
        "params": {
            "k": 1
        }
    })
    assert verify_full_chain(verifier.log).ok


def test_unserializable_spec_is_rejected_atomically(memory_anchor):
    verifier = IntegrityVerifier(memory_anchor)
    with pytest.raises(ValueError):
        verifier.commit_stage(StageResult("s", {"x": float("inf")}))
    assert verifier.committed == 0
    assert verifier.head == GENESIS
    assert len(memory_anchor) == 0


def test_resume_from_persisted_log(tmp_path, base_specs):
    log_path = str(tmp_path / "chain.jsonl")
    anchor = FileAnchor(str(tmp_path / "anchor.log"))
    first = IntegrityVerifier(anchor, AuditLog(log_path))
    for spec in base_specs[:3]:
        first.commit_stage(StageResult(spec["name"], spec))

    resumed = IntegrityVerifier(anchor, AuditLog.load(log_path))
    assert resumed.committed == 3
    assert resumed.head == first.head
    for spec in base_specs[3:]:
        resumed.commit_stage(StageResult(spec["name"], spec))
    assert resumed.head == build_chain(base_specs).head
    assert resumed.verify_against_anchor().ok


def test_log_write_failure_leaves_no_record(tmp_path, memory_anchor,
                                            base_specs):
    log_dir = tmp_path / "logs"
    log_dir.mkdir()
    verifier = IntegrityVerifier(memory_anchor,
                                 AuditLog(str(log_dir / "chain.jsonl")))
    verifier.commit_stage(StageResult("a", base_specs[0]))
    head_before = verifier.head

    shutil.rmtree(log_dir)
    with pytest.raises(IntegrityViolation) as excinfo:
        verifier.commit_stage(StageResult("b", base_specs[1]))
    assert excinfo.value.kind is ViolationKind.STORAGE
    assert excinfo.value.stage_index == 1
    assert isinstance(excinfo.value.__cause__, OSError)
    assert verifier.committed == 1
    assert len(verifier.log) == 1
    assert verifier.head == head_before == verifier.log.head
    assert len(memory_anchor) == 1

    # once storage is back the next commit extends the surviving head
    log_dir.mkdir()
    record = verifier.commit_stage(StageResult("c", base_specs[2]))
    assert record.prev_hash == head_before
    assert verifier.committed == 2
    assert len(verifier.log) == 2
    assert verifier.verify_full_chain().ok
    assert verifier.verify_against_anchor().ok


def test_bench_commit_latency():
    stats = bench_commit(6, 2000)
    assert stats.n_stages == 6 and stats.reps == 2000
    assert not stats.empty
    assert len(stats.per_stage_median_us) == 6
    assert stats.median_us < 1000.0
    assert stats.p99_us < 2000.0
    assert stats.pipeline_median_us < 5000.0
    assert stats.median_us <= stats.p99_us


def test_bench_commit_edge_cases():
    assert bench_commit(0, 10).empty
    assert bench_commit(6, 0) == BenchStats(6, 0)
    with pytest.raises(ValueError):
        bench_commit(-1, 10)
