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

import os
from typing import TYPE_CHECKING, Any, Callable, Dict, Optional

if TYPE_CHECKING:
    QCIVET_OUT: Optional[str] = None
    QCIVET_CONFIGURE_LOGGING: int = 1
    QCIVET_LOGGING_LEVEL: str = "INFO"
    QCIVET_HASH_ALGORITHM: str = "sha256"
    QCIVET_SWEEP_WORKERS: int = 1

# The begin-* and end* here are used by the documentation generator
# to extract the used env vars.

# begin-env-vars-definition

environment_variables: Dict[str, Callable[[], Any]] = {

    # Output directory for CLI artifacts. When set, overrides `--out`.
    "QCIVET_OUT":
    lambda: os.environ.get("QCIVET_OUT", None),

    # If set to 0, qcivet will not configure logging.
    # If set to 1, qcivet will configure logging using the default
    # configuration.
    "QCIVET_CONFIGURE_LOGGING":
    lambda: int(os.getenv("QCIVET_CONFIGURE_LOGGING", "1")),

    # Logging level of the `qcivet` root logger.
    "QCIVET_LOGGING_LEVEL":
    lambda: os.getenv("QCIVET_LOGGING_LEVEL", "INFO").upper(),

    # Digest used for the audit chain. Only digests rendering as 64 hex
    # characters are accepted: "sha256" or "sha3_256".
    "QCIVET_HASH_ALGORITHM":
    lambda: os.getenv("QCIVET_HASH_ALGORITHM", "sha256").lower(),

    # Worker threads used to evaluate independent sweep cells.
    "QCIVET_SWEEP_WORKERS":
    lambda: int(os.getenv("QCIVET_SWEEP_WORKERS", "1")),
}

# end-env-vars-definition


def __getattr__(name: str):
    # lazy evaluation of environment variables
    if name in environment_variables:
        return environment_variables[name]()
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return list(environment_variables.keys())
