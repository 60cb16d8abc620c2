"""Image bytes <-> uint8 RGB arrays.

PNG goes through Pillow; binary PPM (P6, maxval 255) is handled here so a
dependency-free interchange format always exists. Both are lossless for
8-bit RGB.
"""

import io
import re

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..validation import check_rgb_image

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG or P6 PPM bytes into an (h, w, 3) uint8 array."""
    if data[:8] == PNG_MAGIC:
        try:
            with Image.open(io.BytesIO(data)) as img:
                return np.asarray(img.convert("RGB"), dtype=np.uint8)
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            raise ValueError(f"could not decode PNG data: {exc}") from exc
    if data[:2] == b"P6":
        return _decode_ppm(data)
    raise ValueError("unsupported image data: expected PNG or binary PPM (P6)")


def encode_image(image, format: str = "png") -> bytes:
    """Encode an (h, w, 3) uint8 array as PNG or P6 PPM bytes."""
    image = check_rgb_image(image)
    fmt = format.lower().lstrip(".")
    if fmt == "png":
        buf = io.BytesIO()
        Image.fromarray(image, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()
    if fmt in ("ppm", "p6"):
        return _encode_ppm(image)
    raise ValueError(f"unsupported image format {format!r} (use png or ppm)")


def read_image(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def write_image(path, image) -> None:
    path = str(path)
    fmt = "ppm" if path.lower().endswith(".ppm") else "png"
    with open(path, "wb") as fh:
        fh.write(encode_image(image, fmt))


def _encode_ppm(image) -> bytes:
    h, w = image.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + image.tobytes()


def _decode_ppm(data: bytes) -> np.ndarray:
    # header: "P6", width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed, then a single whitespace byte before the raster
    pos = 2
    tokens = []
    while len(tokens) < 3:
        if pos >= len(data):
            raise ValueError("truncated PPM header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise ValueError("truncated PPM comment")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        else:
            m = re.match(rb"\d+", data[pos:])
            if not m:
                raise ValueError(f"malformed PPM header near byte {pos}")
            tokens.append(int(m.group(0)))
            pos += m.end()
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ValueError("malformed PPM header: missing separator before raster")
    pos += 1
    w, h, maxval = tokens
    if maxval != 255:
        raise ValueError(f"unsupported PPM maxval {maxval} (only 255)")
    if w < 1 or h < 1:
        raise ValueError(f"invalid PPM dimensions {w}x{h}")
    need = w * h * 3
    raster = data[pos:pos + need]
    if len(raster) < need:
        raise ValueError(f"truncated PPM raster: have {len(raster)} of {need} bytes")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()
