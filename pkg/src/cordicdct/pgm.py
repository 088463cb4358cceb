"""Binary PGM (P5, 8-bit) images and 8x8 block tiling."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class PgmError(ValueError):
    pass


def _tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    toks: list[bytes] = []
    pos = 0
    while len(toks) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PgmError("truncated PGM header")
        toks.append(data[start:pos])
    return toks, pos


def parse_pgm(data: bytes) -> np.ndarray:
    toks, pos = _tokens(data, 4)
    if toks[0] != b"P5":
        raise PgmError(f"not a binary PGM (magic {toks[0]!r})")
    try:
        width, height, maxval = (int(t) for t in toks[1:])
    except ValueError as exc:
        raise PgmError("non-numeric PGM header field") from exc
    if width <= 0 or height <= 0:
        raise PgmError("PGM dimensions must be positive")
    if not 0 < maxval <= 255:
        raise PgmError(f"only 8-bit PGM is supported (maxval {maxval})")
    # exactly one whitespace byte separates header and raster
    pos += 1
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise PgmError("PGM raster is shorter than the header says")
    img = np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()
    if img.max(initial=0) > maxval:
        raise PgmError("pixel value exceeds maxval")
    return img


def read_pgm(path: str | Path) -> np.ndarray:
    return parse_pgm(Path(path).read_bytes())


def encode_pgm(img) -> bytes:
    a = np.asarray(img)
    if a.ndim != 2:
        raise PgmError("PGM images are 2-D")
    a = np.clip(np.rint(a), 0, 255).astype(np.uint8)
    h, w = a.shape
    return b"P5\n%d %d\n255\n" % (w, h) + a.tobytes()


def write_pgm(path: str | Path, img) -> None:
    Path(path).write_bytes(encode_pgm(img))


def to_blocks(img) -> np.ndarray:
    """Tile an image into ``(rows, cols, 8, 8)`` blocks in row-major order."""
    a = np.asarray(img)
    h, w = a.shape
    if h % 8 or w % 8:
        raise PgmError(f"image dimensions {w}x{h} are not multiples of 8")
    return a.reshape(h // 8, 8, w // 8, 8).swapaxes(1, 2)


def from_blocks(blocks) -> np.ndarray:
    b = np.asarray(blocks)
    r, c = b.shape[:2]
    return b.swapaxes(1, 2).reshape(r * 8, c * 8)
