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
"""Canonical spec serialization and the hash-chained audit trail.

Each record stores ``hash = H(prev_hash_ascii || canonical(spec))`` where
``prev_hash_ascii`` is the 64-character lowercase hex of the previous head
and the head of an empty log is :data:`GENESIS`.
"""
import copy
import hashlib
import json
import math
import os
import threading
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from qcivet import envs
from qcivet.logger import init_logger

logger = init_logger(__name__)

StageSpec = Dict[str, Any]

GENESIS = "0" * 64
SUPPORTED_ALGORITHMS = ("sha256", "sha3_256")

SCENARIO_KINDS = ("honest", "tamper", "inject", "skip", "rewrite")
TAMPER_INDEX = 3
INJECT_INDEX = 3
SKIP_INDEX = 2
REWRITE_INDEX = 2

REASON_LINKAGE = "prev-hash-linkage-broken"
REASON_MISMATCH = "recomputed-hash-mismatch"
REASON_UNSERIALIZABLE = "spec-not-canonicalizable"


def _encode_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"Non-finite number {value!r} cannot be hashed.")
    if value.is_integer() and abs(value) >= 1e16:
        # repr would switch to an exponent here.
        return f"{int(value)}.0"
    return repr(value)


def _encode(value: Any, out: List[str]) -> None:
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_encode_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, dict):
        for key in value:
            if not isinstance(key, str):
                raise ValueError(f"Spec keys must be strings, got {key!r}.")
        out.append("{")
        for i, key in enumerate(sorted(value, key=lambda k: k.encode())):
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _encode(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise ValueError(
            f"Unsupported spec value of type {type(value).__name__}.")


def canonicalize(spec: Any) -> bytes:
    """UTF-8 JSON with keys sorted by byte order and no whitespace.

    Integers never carry an exponent, decimals use the shortest round-trip
    form and integral decimals keep a trailing ``.0``. NumPy scalars are
    encoded as the builtin value they hold.
    """
    out: List[str] = []
    _encode(spec, out)
    return "".join(out).encode("utf-8")


def parse_spec(data: bytes) -> StageSpec:
    return json.loads(data.decode("utf-8"))


def _resolve_algorithm(algorithm: Optional[str]) -> str:
    algorithm = algorithm or envs.QCIVET_HASH_ALGORITHM
    if algorithm not in SUPPORTED_ALGORITHMS:
        raise ValueError(
            f"Unsupported hash algorithm {algorithm!r}; expected one of "
            f"{SUPPORTED_ALGORITHMS}.")
    return algorithm


def compute_hash(prev_hash: str,
                 spec: StageSpec,
                 algorithm: Optional[str] = None) -> str:
    digest = hashlib.new(_resolve_algorithm(algorithm))
    digest.update(prev_hash.encode("ascii"))
    digest.update(canonicalize(spec))
    return digest.hexdigest()


@dataclass(frozen=True)
class ChainRecord:
    stage_name: str
    spec: StageSpec
    prev_hash: str
    hash: str

    def to_line(self) -> str:
        return canonicalize({
            "name": self.stage_name,
            "spec": self.spec,
            "prev_hash": self.prev_hash,
            "hash": self.hash,
        }).decode("utf-8")

    @classmethod
    def from_line(cls, line: str) -> "ChainRecord":
        try:
            obj = json.loads(line)
            return cls(stage_name=obj["name"],
                       spec=obj["spec"],
                       prev_hash=obj["prev_hash"],
                       hash=obj["hash"])
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ValueError(f"Malformed audit log line: {line!r}") from e


@dataclass(frozen=True)
class ChainVerification:
    ok: bool
    index: Optional[int] = None
    reason: Optional[str] = None

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return f"failure at index {self.index}: {self.reason}"


class ChainVerificationError(ValueError):
    """A persisted audit log failed replay on load."""

    def __init__(self, verification: ChainVerification) -> None:
        super().__init__(f"Audit log does not replay: {verification}")
        self.verification = verification


class AuditLog:
    """Ordered chain records, optionally mirrored to a JSON-lines file.

    ``records`` is a plain list; edits made to it directly are reported by
    :func:`verify_full_chain`.
    """

    def __init__(self,
                 path: Optional[str] = None,
                 algorithm: Optional[str] = None) -> None:
        self.records: List[ChainRecord] = []
        self.path = path
        self.algorithm = _resolve_algorithm(algorithm)
        self._lock = threading.Lock()
        if path is not None and os.path.exists(path) and os.path.getsize(
                path) > 0:
            raise ValueError(
                f"Audit log {path} already exists; use AuditLog.load.")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def genesis(self) -> str:
        return GENESIS

    @property
    def head(self) -> str:
        return self.records[-1].hash if self.records else GENESIS

    def _persist(self, record: ChainRecord) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(record.to_line() + "\n")

    def append(self, name: str, spec: StageSpec) -> ChainRecord:
        with self._lock:
            prev = self.head
            record = ChainRecord(stage_name=name,
                                 spec=spec,
                                 prev_hash=prev,
                                 hash=compute_hash(prev, spec,
                                                   self.algorithm))
            self._persist(record)
            self.records.append(record)
        logger.debug("appended %s -> %s", name, record.hash)
        return record

    def append_record(self, record: ChainRecord) -> ChainRecord:
        """Append a record whose hash was computed by the caller."""
        with self._lock:
            if record.prev_hash != self.head:
                raise ValueError(
                    f"Record {record.stage_name!r} does not extend head "
                    f"{self.head}.")
            self._persist(record)
            self.records.append(record)
        return record

    def heads(self) -> List[str]:
        return [record.hash for record in self.records]

    def export(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for record in self.records:
                f.write(record.to_line() + "\n")

    @classmethod
    def from_records(cls,
                     records: Sequence[ChainRecord],
                     algorithm: Optional[str] = None) -> "AuditLog":
        log = cls(algorithm=algorithm)
        log.records = list(records)
        return log

    @classmethod
    def load(cls,
             path: str,
             verify: bool = True,
             algorithm: Optional[str] = None) -> "AuditLog":
        with open(path, encoding="utf-8") as f:
            records = [
                ChainRecord.from_line(line) for line in f if line.strip()
            ]
        log = cls.from_records(records, algorithm)
        if verify:
            result = verify_full_chain(log)
            if not result.ok:
                raise ChainVerificationError(result)
        return log


def append(log: AuditLog, name: str, spec: StageSpec) -> ChainRecord:
    return log.append(name, spec)


def verify_full_chain(log: AuditLog) -> ChainVerification:
    """Replay every hash from genesis and report the first bad record."""
    expected_prev = GENESIS
    for index, record in enumerate(list(log.records)):
        if record.prev_hash != expected_prev:
            return ChainVerification(False, index, REASON_LINKAGE)
        try:
            recomputed = compute_hash(record.prev_hash, record.spec,
                                      log.algorithm)
        except ValueError:
            return ChainVerification(False, index, REASON_UNSERIALIZABLE)
        if recomputed != record.hash:
            return ChainVerification(False, index, REASON_MISMATCH)
        expected_prev = record.hash
    return ChainVerification(True)


def default_base_specs() -> List[StageSpec]:
    """Six illustrative stage specs for the chain scenarios."""
    names = ("ingest", "prepare", "compile", "execute", "postprocess",
             "release")
    return [{
        "name": name,
        "index": i,
        "params": {
            "version": f"1.{i}.0",
            "retries": i % 3,
            "weight": 0.5 + 0.1 * i
        }
    } for i, name in enumerate(names)]


def _stage_name(spec: StageSpec, index: int) -> str:
    name = spec.get("name")
    return name if isinstance(name, str) else f"stage-{index}"


def alter_spec(spec: StageSpec) -> StageSpec:
    """Default attacker edit: a deep copy with one field changed."""
    altered = copy.deepcopy(spec)
    altered["altered"] = not bool(altered.get("altered", False))
    return altered


def build_chain(specs: Sequence[StageSpec],
                algorithm: Optional[str] = None) -> AuditLog:
    log = AuditLog(algorithm=algorithm)
    for i, spec in enumerate(specs):
        log.append(_stage_name(spec, i), copy.deepcopy(spec))
    return log


def scenario(kind: str,
             base: Optional[Sequence[StageSpec]] = None,
             mutate: Callable[[StageSpec], StageSpec] = alter_spec,
             algorithm: Optional[str] = None) -> AuditLog:
    """Build the chain of ``base`` and attack it.

    ``tamper`` edits record 3's spec after commit, ``inject`` splices a
    self-consistent forged record in at position 3, ``skip`` removes record
    2 and ``rewrite`` rebuilds a fresh valid chain with record 2 altered.
    """
    base = default_base_specs() if base is None else list(base)
    if kind not in SCENARIO_KINDS:
        raise ValueError(
            f"Unknown scenario {kind!r}; expected one of {SCENARIO_KINDS}.")
    if len(base) < 4:
        raise ValueError(
            f"Scenarios need at least 4 stages, got {len(base)}.")
    if kind == "rewrite":
        specs = [copy.deepcopy(s) for s in base]
        specs[REWRITE_INDEX] = mutate(specs[REWRITE_INDEX])
        return build_chain(specs, algorithm)

    log = build_chain(base, algorithm)
    records = list(log.records)
    if kind == "tamper":
        victim = records[TAMPER_INDEX]
        records[TAMPER_INDEX] = replace(victim, spec=mutate(victim.spec))
    elif kind == "inject":
        prev = records[INJECT_INDEX - 1].hash
        forged_spec = mutate(records[INJECT_INDEX].spec)
        forged_spec["name"] = "injected"
        records.insert(
            INJECT_INDEX,
            ChainRecord("injected", forged_spec, prev,
                        compute_hash(prev, forged_spec, log.algorithm)))
    elif kind == "skip":
        del records[SKIP_INDEX]
    return AuditLog.from_records(records, log.algorithm)
