"""Resource caps shared by the enumerating modules."""

from __future__ import annotations

import os
from dataclasses import dataclass


class CapExceeded(RuntimeError):
    """An enumeration or computation would exceed a configured cap."""


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


@dataclass
class Limits:
    max_tree_leaves: int = 8
    max_planar_tree_leaves: int = 10
    max_cells: int = 2_000_000
    max_vertices: int = 9
    snf_max_cols: int = 2000


def limits() -> Limits:
    """Current limits; ``KNOTSS_MAX_CELLS`` caps basis enumeration size."""
    return Limits(max_cells=_env_int("KNOTSS_MAX_CELLS", Limits.max_cells))
