# SPDX-License-Identifier: Apache-2.0
"""Python access to the autoplan environments, formalizer and optimizer."""

from ._autoplan import (
    Session,
    cli,
    evaluate,
    formalize,
    optimize,
    prompt_template,
    task_ids,
)

__all__ = [
    "Session",
    "cli",
    "evaluate",
    "formalize",
    "optimize",
    "prompt_template",
    "task_ids",
]
