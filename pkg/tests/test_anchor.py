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

import re

import numpy as np
import pytest

from qcivet.anchor import (AnchorUnavailableError, FileAnchor, InMemoryAnchor,
                           submit, verify_against_anchor)
from qcivet.auditchain import build_chain, scenario, verify_full_chain

_LINE_RE = re.compile(r"^\d+\t[0-9a-f]{64}\t\d+$")


def _submit_all(anchor, log):
    return [submit(anchor, head) for head in log.heads()]


@pytest.mark.parametrize("anchor_fixture", ["file_anchor", "memory_anchor"])
def test_sequence_numbers(anchor_fixture, base_specs, request):
    anchor = request.getfixturevalue(anchor_fixture)
    log = build_chain(base_specs)
    assert _submit_all(anchor, log) == list(range(len(base_specs)))
    entries = anchor.entries()
    assert [e.head for e in entries] == log.heads()
    assert [e.seq for e in entries] == list(range(len(base_specs)))
    assert len(anchor) == len(base_specs)
    timestamps = [e.timestamp_ms for e in entries]
    assert timestamps == sorted(timestamps)


def test_file_format(file_anchor, anchor_path, base_specs):
    log = build_chain(base_specs)
    _submit_all(file_anchor, log)
    with open(anchor_path, encoding="utf-8") as f:
        text = f.read()
    assert text.endswith("\n")
    lines = text.splitlines()
    assert len(lines) == len(base_specs)
    for seq, line in enumerate(lines):
        assert _LINE_RE.match(line)
        assert line.startswith(f"{seq}\t")


def test_file_anchor_only_grows(file_anchor, anchor_path, base_specs):
    log = build_chain(base_specs)
    sizes = []
    for head in log.heads() * 2:
        file_anchor.submit(head)
        with open(anchor_path, encoding="utf-8") as f:
            sizes.append(len(f.read().splitlines()))
    assert sizes == sorted(sizes)
    assert sizes[-1] == 2 * len(base_specs)


@pytest.mark.parametrize("head", ["", "0" * 63, "G" * 64, "A" * 64, 42])
def test_malformed_heads_are_rejected(memory_anchor, file_anchor, head):
    with pytest.raises(ValueError):
        memory_anchor.submit(head)
    with pytest.raises(ValueError):
        file_anchor.submit(head)


def test_missing_file_reads_empty(tmp_path):
    assert FileAnchor(str(tmp_path / "none.log")).entries() == []


def test_unwritable_anchor_is_unavailable(tmp_path):
    anchor = FileAnchor(str(tmp_path / "missing-dir" / "anchor.log"))
    with pytest.raises(AnchorUnavailableError):
        anchor.submit("a" * 64)


def test_partial_tail_is_ignored_on_read(anchor_path):
    with open(anchor_path, "w", encoding="utf-8") as f:
        f.write(f"0\t{'a' * 64}\t1\n1\t{'b' * 10}")
    anchor = FileAnchor(anchor_path)
    assert [e.head for e in anchor.entries()] == ["a" * 64]
    with pytest.raises(AnchorUnavailableError):
        anchor.submit("c" * 64)


def test_corrupt_anchor(anchor_path):
    with open(anchor_path, "w", encoding="utf-8") as f:
        f.write(f"5\t{'a' * 64}\t1\n")
    with pytest.raises(AnchorUnavailableError):
        FileAnchor(anchor_path).entries()


def test_offline_memory_anchor(memory_anchor):
    memory_anchor.available = False
    with pytest.raises(AnchorUnavailableError):
        memory_anchor.submit("a" * 64)
    with pytest.raises(AnchorUnavailableError):
        memory_anchor.entries()
    memory_anchor.available = True
    assert memory_anchor.entries() == []


def test_verify_matching_block(memory_anchor, base_specs):
    memory_anchor.submit("f" * 64)
    log = build_chain(base_specs)
    _submit_all(memory_anchor, log)
    result = verify_against_anchor(memory_anchor, log)
    assert result.ok
    assert result.index == 1
    assert str(result) == "ok (index 1)"


def test_empty_log_is_trivially_anchored(memory_anchor):
    assert verify_against_anchor(memory_anchor, build_chain([])).ok


def test_rewrite_is_absent(memory_anchor, base_specs):
    _submit_all(memory_anchor, build_chain(base_specs))
    rewritten = scenario("rewrite", base_specs)
    result = verify_against_anchor(memory_anchor, rewritten)
    assert not result.ok
    assert result.status == "absent"
    assert result.index == 2


def test_interleaved_heads_are_not_contiguous(memory_anchor, base_specs):
    log = build_chain(base_specs)
    for head in log.heads():
        memory_anchor.submit(head)
        memory_anchor.submit("e" * 64)
    result = verify_against_anchor(memory_anchor, log)
    assert result.status == "not-contiguous"
    assert result.index is None


def test_reordered_heads_are_not_contiguous(memory_anchor, base_specs):
    heads = build_chain(base_specs).heads()
    for head in [heads[1], heads[0]] + heads[2:]:
        memory_anchor.submit(head)
    result = verify_against_anchor(memory_anchor, build_chain(base_specs))
    assert result.status == "not-contiguous"


def test_duplicate_submissions_collapse(memory_anchor, base_specs):
    log = build_chain(base_specs)
    for head in log.heads():
        memory_anchor.submit(head)
        memory_anchor.submit(head)
    assert len(memory_anchor) == 2 * len(base_specs)
    assert verify_against_anchor(memory_anchor, log).ok


def test_prefix_of_anchored_history_verifies(file_anchor, base_specs):
    full = build_chain(base_specs)
    _submit_all(file_anchor, full)
    assert verify_against_anchor(file_anchor, build_chain(base_specs[:3])).ok


def test_offline_rewrite_never_passes_the_anchor(base_specs):
    for seed in range(100):
        rng = np.random.default_rng(seed)
        specs = [dict(spec, nonce=int(rng.integers(1 << 30)))
                 for spec in base_specs]
        anchor = InMemoryAnchor()
        _submit_all(anchor, build_chain(specs))
        rewritten = scenario("rewrite", specs)
        assert verify_full_chain(rewritten).ok
        assert not verify_against_anchor(anchor, rewritten).ok
