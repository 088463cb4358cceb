"""Forward transform, quantise, dequantise, exact inverse: the round-trip demo."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dct8 import Mode, ScaledTransform, dct2_matrix_exact, transform_2d
from .pgm import from_blocks, to_blocks
from .quant import QuantTable, dequantize, fold_scales, quantize

LEVEL_SHIFT = 128


@dataclass
class RoundtripResult:
    psnr: float
    mse: float
    reconstruction: np.ndarray
    levels: np.ndarray
    nonzero_levels: int


def psnr(a, b, peak: float = 255.0) -> float:
    mse = float(np.mean((np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) ** 2))
    return float("inf") if mse == 0 else 10.0 * np.log10(peak * peak / mse)


def forward(img, t: ScaledTransform, mode: Mode = "real") -> tuple[np.ndarray, np.ndarray]:
    """Unscaled per-block coefficients ``(rows, cols, 8, 8)`` and the scale grid."""
    blocks = to_blocks(np.asarray(img, dtype=np.int64) - LEVEL_SHIFT)
    if mode == "real":
        blocks = blocks.astype(float)
    return transform_2d(t, blocks, mode)


def roundtrip(img, t: ScaledTransform, table: QuantTable, mode: Mode = "real") -> RoundtripResult:
    """Quantise graph outputs with the folded table and rebuild with ``C^T Y C``."""
    y, grid = forward(img, t, mode)
    folded = fold_scales(table, t.out_scale)
    levels = quantize(y, folded)
    coeffs = dequantize(levels, folded) * grid
    c = dct2_matrix_exact()
    rec = c.T @ coeffs @ c + LEVEL_SHIFT
    rec = np.clip(np.rint(from_blocks(rec)), 0, 255)
    err = psnr(img, rec)
    mse = float(np.mean((np.asarray(img, dtype=float) - rec) ** 2))
    return RoundtripResult(err, mse, rec.astype(np.uint8), levels, int(np.count_nonzero(levels)))
