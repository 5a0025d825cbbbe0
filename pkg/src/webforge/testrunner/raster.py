"""Screenshot encoding and pixel analysis.

The probe driver synthesizes its screenshots with a tiny, dependency-free PNG
encoder so the bytes are stable across environments (replay fingerprints
include image bytes). Analysis goes through Pillow so screenshots from real
browsers (arbitrary PNG subformats) work too.
"""

from __future__ import annotations

import io
import struct
import zlib
from collections import Counter

from PIL import Image

# A page is called blank when at least this fraction of pixels falls into a
# single quantized color bucket.
BLANK_DOMINANCE_THRESHOLD = 0.995

# Channel values are divided into 8 buckets of 32 levels each; antialiasing
# noise stays in one bucket while any real content escapes it.
_BUCKET = 32


def encode_png(pixels: list[list[tuple[int, int, int]]]) -> bytes:
    """Minimal RGB8 PNG encoder (filter 0, fixed zlib level): stable bytes."""
    height = len(pixels)
    width = len(pixels[0]) if height else 0

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (
            struct.pack(">I", len(data))
            + tag
            + data
            + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
        )

    raw = b"".join(
        b"\x00" + b"".join(struct.pack("BBB", *pixel) for pixel in row)
        for row in pixels
    )
    header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(raw, 6))
        + chunk(b"IEND", b"")
    )


def render_text_screenshot(
    text: str, columns: int = 48, rows: int = 20, cell: int = 8
) -> bytes:
    """Render page text as a deterministic character-density raster.

    Each non-space character fills a dark block in a fixed grid on a white
    canvas. The result is not readable, but it preserves exactly the property
    deployment verification needs: a page without content renders as a
    uniform image, a page with content does not.
    """
    width, height = columns * cell, rows * cell
    canvas = [[(255, 255, 255)] * width for _ in range(height)]
    col = row = 0
    for ch in text:
        if ch == "\n":
            col, row = 0, row + 1
            if row >= rows:
                break
            continue
        if not ch.isspace():
            x0, y0 = col * cell, row * cell
            for y in range(y0 + 1, y0 + cell - 1):
                for x in range(x0 + 1, x0 + cell - 1):
                    canvas[y][x] = (17, 17, 17)
        col += 1
        if col >= columns:
            col, row = 0, row + 1
            if row >= rows:
                break
    return encode_png(canvas)


def dominant_color_fraction(png_bytes: bytes) -> float:
    """Fraction of pixels in the most common quantized color bucket."""
    with Image.open(io.BytesIO(png_bytes)) as image:
        rgb = image.convert("RGB")
        raw = rgb.tobytes()
        total = rgb.width * rgb.height
    if total == 0:
        return 1.0
    counts = Counter(
        (raw[i] // _BUCKET, raw[i + 1] // _BUCKET, raw[i + 2] // _BUCKET)
        for i in range(0, len(raw), 3)
    )
    return counts.most_common(1)[0][1] / total


def is_blank_screen(png_bytes: bytes, threshold: float = BLANK_DOMINANCE_THRESHOLD) -> bool:
    return dominant_color_fraction(png_bytes) >= threshold
