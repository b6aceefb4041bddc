"""
命令列子命令：validate / train / imagine / infer / eval / make-toy
"""

from .commands import (
    COMMANDS,
    cmd_eval,
    cmd_imagine,
    cmd_infer,
    cmd_make_toy,
    cmd_train,
    cmd_validate,
    write_provenance,
)

__all__ = [
    "COMMANDS",
    "cmd_eval",
    "cmd_imagine",
    "cmd_infer",
    "cmd_make_toy",
    "cmd_train",
    "cmd_validate",
    "write_provenance",
]
