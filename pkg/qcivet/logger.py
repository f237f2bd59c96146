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
"""Logging configuration for qcivet."""
import logging
from logging import Logger
from logging.config import dictConfig
from typing import Any, Dict

from qcivet import envs

_FORMAT = "%(levelname)s %(asctime)s %(filename)s:%(lineno)d] %(message)s"
_DATE_FORMAT = "%m-%d %H:%M:%S"


class NewLineFormatter(logging.Formatter):
    """Adds logging prefix to newlines to align multi-line messages."""

    def format(self, record: logging.LogRecord) -> str:
        msg = super().format(record)
        if record.message != "":
            parts = msg.split(record.message)
            msg = msg.replace("\n", "\r\n" + parts[0])
        return msg


def _default_logging_config() -> Dict[str, Any]:
    return {
        "formatters": {
            "qcivet": {
                "()": NewLineFormatter,
                "datefmt": _DATE_FORMAT,
                "format": _FORMAT,
            },
        },
        "handlers": {
            "qcivet": {
                "class": "logging.StreamHandler",
                "formatter": "qcivet",
                "level": envs.QCIVET_LOGGING_LEVEL,
                "stream": "ext://sys.stdout",
            },
        },
        "loggers": {
            "qcivet": {
                "handlers": ["qcivet"],
                "level": envs.QCIVET_LOGGING_LEVEL,
                "propagate": False,
            },
        },
        "version": 1,
        "disable_existing_loggers": False,
    }


def _configure_qcivet_root_logger() -> None:
    if not envs.QCIVET_CONFIGURE_LOGGING:
        return
    dictConfig(_default_logging_config())


def init_logger(name: str) -> Logger:
    """The main purpose of this function is to ensure that loggers are
    retrieved in such a way that we can be sure the root qcivet logger has
    already been configured."""

    return logging.getLogger(name)


# The root logger is initialized when the module is imported.
# This is thread-safe as the module is only imported once,
# guaranteed by the Python GIL.
_configure_qcivet_root_logger()

logger = init_logger(__name__)
