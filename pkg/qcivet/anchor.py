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
"""External append-only anchors for chain heads.

:class:`FileAnchor` simulates a timestamping authority with an
append-only text file, one entry per line::

    seq<TAB>head<TAB>timestamp_ms<LF>

Subclass :class:`Anchor` to plug in a networked transparency-log client.
"""
import os
import re
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

from qcivet.auditchain import AuditLog
from qcivet.logger import init_logger

try:
    import fcntl
except ImportError:
    fcntl = None  # type: ignore

logger = init_logger(__name__)

_HEAD_RE = re.compile(r"^[0-9a-f]{64}$")

STATUS_OK = "ok"
STATUS_NOT_CONTIGUOUS = "not-contiguous"
STATUS_ABSENT = "absent"


class AnchorUnavailableError(RuntimeError):
    """The anchor could not be read or written."""


class AnchorEntry(NamedTuple):
    seq: int
    head: str
    timestamp_ms: int


def _check_head(head: str) -> None:
    if not isinstance(head, str) or not _HEAD_RE.match(head):
        raise ValueError(
            f"Anchor heads must be 64 lowercase hex characters, got "
            f"{head!r}.")


def _now_ms() -> int:
    return time.time_ns() // 1_000_000


class Anchor(ABC):

    @abstractmethod
    def submit(self, head: str) -> int:
        """Record ``head`` and return its sequence number."""
        raise NotImplementedError

    @abstractmethod
    def entries(self) -> List[AnchorEntry]:
        raise NotImplementedError

    def __len__(self) -> int:
        return len(self.entries())


class InMemoryAnchor(Anchor):
    """Process-local anchor. Set ``available = False`` to simulate an
    outage."""

    def __init__(self) -> None:
        self._entries: List[AnchorEntry] = []
        self._lock = threading.Lock()
        self.available = True

    def submit(self, head: str) -> int:
        _check_head(head)
        if not self.available:
            raise AnchorUnavailableError("In-memory anchor is offline.")
        with self._lock:
            seq = len(self._entries)
            self._entries.append(AnchorEntry(seq, head, _now_ms()))
        return seq

    def entries(self) -> List[AnchorEntry]:
        if not self.available:
            raise AnchorUnavailableError("In-memory anchor is offline.")
        with self._lock:
            return list(self._entries)


def _parse_entries(text: str, path: str) -> List[AnchorEntry]:
    # The segment after the last newline is a partial append in flight.
    lines = text.split("\n")[:-1]
    entries = []
    for lineno, line in enumerate(lines):
        fields = line.split("\t")
        try:
            seq, head, ts = int(fields[0]), fields[1], int(fields[2])
        except (IndexError, ValueError) as e:
            raise AnchorUnavailableError(
                f"Corrupt anchor {path} at line {lineno + 1}.") from e
        if len(fields) != 3 or seq != lineno or not _HEAD_RE.match(head):
            raise AnchorUnavailableError(
                f"Corrupt anchor {path} at line {lineno + 1}.")
        entries.append(AnchorEntry(seq, head, ts))
    return entries


class FileAnchor(Anchor):

    def __init__(self, path: str) -> None:
        self.path = path

    def submit(self, head: str) -> int:
        _check_head(head)
        try:
            with open(self.path, "a+", encoding="utf-8") as f:
                if fcntl is not None:
                    fcntl.flock(f.fileno(), fcntl.LOCK_EX)
                try:
                    f.seek(0)
                    text = f.read()
                    if text and not text.endswith("\n"):
                        raise AnchorUnavailableError(
                            f"Anchor {self.path} ends with a partial entry.")
                    seq = len(_parse_entries(text, self.path))
                    f.write(f"{seq}\t{head}\t{_now_ms()}\n")
                    f.flush()
                    os.fsync(f.fileno())
                finally:
                    if fcntl is not None:
                        fcntl.flock(f.fileno(), fcntl.LOCK_UN)
        except OSError as e:
            raise AnchorUnavailableError(
                f"Cannot append to anchor {self.path}: {e}") from e
        logger.debug("anchored %s as seq %d", head, seq)
        return seq

    def entries(self) -> List[AnchorEntry]:
        if not os.path.exists(self.path):
            return []
        try:
            with open(self.path, encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise AnchorUnavailableError(
                f"Cannot read anchor {self.path}: {e}") from e
        return _parse_entries(text, self.path)


def submit(anchor: Anchor, head: str) -> int:
    return anchor.submit(head)


@dataclass(frozen=True)
class AnchorVerification:
    """``index`` is the anchor sequence number where the block starts when
    ok, and the first local record missing from the anchor when absent."""

    status: str
    index: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    def __str__(self) -> str:
        if self.index is None:
            return self.status
        return f"{self.status} (index {self.index})"


def verify_against_anchor(anchor: Anchor,
                          log: AuditLog) -> AnchorVerification:
    """The local heads must appear in the anchor as one contiguous,
    ordered block. Consecutive duplicate submissions count once."""
    heads = log.heads()
    if not heads:
        return AnchorVerification(STATUS_OK)
    collapsed: List[AnchorEntry] = []
    for entry in anchor.entries():
        if not collapsed or collapsed[-1].head != entry.head:
            collapsed.append(entry)
    anchored = {entry.head for entry in collapsed}
    for index, head in enumerate(heads):
        if head not in anchored:
            return AnchorVerification(STATUS_ABSENT, index)
    n = len(heads)
    for start, entry in enumerate(collapsed):
        if entry.head != heads[0]:
            continue
        if [e.head for e in collapsed[start:start + n]] == heads:
            return AnchorVerification(STATUS_OK, entry.seq)
    return AnchorVerification(STATUS_NOT_CONTIGUOUS)
