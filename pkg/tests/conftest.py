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

import numpy as np
import pytest

from qcivet.anchor import FileAnchor, InMemoryAnchor
from qcivet.auditchain import default_base_specs
from qcivet.contracts import default_inputs
from qcivet.logger import init_logger

logger = init_logger(__name__)

SEED = 20260101


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in ("QCIVET_OUT", "QCIVET_HASH_ALGORITHM",
                 "QCIVET_SWEEP_WORKERS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


@pytest.fixture
def inputs():
    return default_inputs()


@pytest.fixture
def base_specs():
    return default_base_specs()


@pytest.fixture
def anchor_path(tmp_path) -> str:
    return str(tmp_path / "anchor.log")


@pytest.fixture
def file_anchor(anchor_path) -> FileAnchor:
    return FileAnchor(anchor_path)


@pytest.fixture
def memory_anchor() -> InMemoryAnchor:
    return InMemoryAnchor()
