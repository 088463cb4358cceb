"""Quantisation tables with the transform's output scaling folded in.

Scaling a coefficient by ``s`` and dividing by ``Q`` is the same as dividing
the unscaled graph output by ``Q / s``, so the ``1/K`` gains and butterfly
normalisations cost nothing once they live in the table.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

N = 8


@dataclass(frozen=True, eq=False)
class QuantTable:
    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.shape != (N, N):
            raise ValueError(f"quantisation table must be 8x8, got {q.shape}")
        if not np.all(np.isfinite(q)) or np.any(q <= 0):
            raise ValueError("quantisation table entries must be positive")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @classmethod
    def uniform(cls, value: float = 16.0) -> "QuantTable":
        return cls(np.full((N, N), float(value)))

    @classmethod
    def load(cls, path: str | Path) -> "QuantTable":
        """Read a whitespace-separated 8x8 matrix; ``#`` starts a comment."""
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                try:
                    rows.append([float(tok) for tok in line.split()])
                except ValueError as exc:
                    raise ValueError(f"{path}: bad number in {line!r}") from exc
        if len(rows) != N or any(len(r) != N for r in rows):
            raise ValueError(f"{path}: expected 8 rows of 8 values")
        return cls(np.array(rows))


@dataclass(frozen=True, eq=False)
class FoldedQuantTable:
    q_folded: np.ndarray
    source: QuantTable
    scale_grid: np.ndarray

    @property
    def q(self) -> np.ndarray:
        return self.q_folded


Table = Union[QuantTable, FoldedQuantTable, np.ndarray]


def fold_scales(table: QuantTable, out_scale) -> FoldedQuantTable:
    s = np.asarray(out_scale, dtype=float)
    if s.shape != (N,):
        raise ValueError("out_scale must have 8 entries")
    if np.any(s <= 0):
        raise ValueError("out_scale entries must be positive")
    grid = np.outer(s, s)
    return FoldedQuantTable(table.q / grid, table, grid)


def _entries(table: Table) -> np.ndarray:
    return table.q if isinstance(table, (QuantTable, FoldedQuantTable)) else np.asarray(table, dtype=float)


def round_half_away(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(coeffs, table: Table) -> np.ndarray:
    """Levels ``round(coeff / entry)``, halves rounded away from zero.  Works on stacks of blocks."""
    return round_half_away(np.asarray(coeffs, dtype=float) / _entries(table)).astype(np.int64)


def dequantize(levels, table: Table) -> np.ndarray:
    return np.asarray(levels, dtype=float) * _entries(table)


def count_ties(coeffs, table: Table, tol: float = 1e-9) -> int:
    """Number of coefficients whose ``coeff / entry`` sits on a rounding tie."""
    r = np.asarray(coeffs, dtype=float) / _entries(table)
    frac = np.abs(r - np.trunc(r))
    return int(np.count_nonzero(np.abs(frac - 0.5) <= tol))
