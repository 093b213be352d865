"""Repair of heap bugs in .mc programs."""

import json

from . import _heapfix
from ._heapfix import PatchError, ProgramError, apply_patch, format_program

__all__ = ["PatchError", "ProgramError", "analyze", "apply_patch", "format_program", "repair"]


def analyze(source, unroll=2, path_budget=256):
    """Bugs and per-function footprints as a dict."""
    return json.loads(_heapfix.analyze(source, unroll, path_budget))


def repair(source, **config):
    """Repair report as a dict. Keywords mirror the CLI flags."""
    return json.loads(_heapfix.repair(source, **config))
