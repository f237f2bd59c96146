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

import json
import string
from dataclasses import replace
from typing import Iterator, List, Optional, Sequence

import numpy as np

from qcivet.anchor import Anchor
from qcivet.auditchain import ChainRecord, StageSpec, canonicalize
from qcivet.engine import IntegrityVerifier, ObservableCheck, StageResult
from qcivet.qcore import DensityOperator


MUTATION_ALPHABET = string.ascii_letters + string.digits + string.punctuation


def mutate_one_char(text: str, rng: np.random.Generator) -> str:
    """Replace one character of ``text`` with a different one."""
    pos = int(rng.integers(len(text)))
    choices = [c for c in MUTATION_ALPHABET if c != text[pos]]
    return text[:pos] + choices[int(rng.integers(len(choices)))] + text[pos +
                                                                          1:]


def single_char_variants(text: str) -> Iterator[str]:
    for pos, current in enumerate(text):
        for c in MUTATION_ALPHABET:
            if c != current:
                yield text[:pos] + c + text[pos + 1:]


def mutated_spec(canonical: bytes, text: str) -> Optional[StageSpec]:
    """The spec ``text`` decodes to, or None when it is not a JSON object
    or canonicalizes back to ``canonical``."""
    try:
        spec = json.loads(text)
    except ValueError:
        return None
    if not isinstance(spec, dict):
        return None
    try:
        if canonicalize(spec) == canonical:
            return None
    except ValueError:
        pass
    return spec


def with_spec(records: Sequence[ChainRecord], index: int,
              spec: StageSpec) -> List[ChainRecord]:
    """Swap the spec of one record, keeping its stored hashes."""
    out = list(records)
    out[index] = replace(out[index], spec=spec)
    return out


def check_density_valid(rho: DensityOperator, atol: float = 1e-10) -> None:
    """Assert trace one, Hermiticity and positivity."""
    m = rho.matrix
    assert abs(np.trace(m) - 1.0) <= 1e-12
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(m)[0] >= -atol


def passing_check(label: str = "Z") -> ObservableCheck:
    return ObservableCheck(label, 0.31, 0.309, 0.05)


def commit_all(anchor: Anchor,
               specs: Sequence[StageSpec],
               checks: Optional[List[ObservableCheck]] = None
               ) -> IntegrityVerifier:
    verifier = IntegrityVerifier(anchor)
    for spec in specs:
        verifier.commit_stage(
            StageResult(spec["name"], spec, tuple(checks or ())))
    return verifier
