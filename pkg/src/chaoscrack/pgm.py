"""Binary PGM (P5) reading/writing and seeded synthetic images."""
from __future__ import annotations

import re

import numpy as np

from .cipher import as_image
from .errors import MalformedHeaderError, TruncatedPayloadError, WrongMaxvalError

_WS = b" \t\r\n\v\f"
_TOKEN = re.compile(rb"[^\s#]+")


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    # PNM header: whitespace-separated tokens; '#' starts a comment to end of line.
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and (data[pos] in _WS or data[pos:pos + 1] == b"#"):
            if data[pos:pos + 1] == b"#":
                end = data.find(b"\n", pos)
                pos = len(data) if end < 0 else end + 1
            else:
                pos += 1
        m = _TOKEN.match(data, pos)
        if m is None:
            raise MalformedHeaderError("PGM header ended early")
        tokens.append(m.group())
        pos = m.end()
    # exactly one whitespace byte separates the maxval from the raster
    if pos >= len(data) or data[pos] not in _WS:
        raise MalformedHeaderError("missing whitespace after maxval")
    return tokens, pos + 1


def read_pgm(data: bytes) -> np.ndarray:
    if not data.startswith(b"P5"):
        raise MalformedHeaderError("not a binary PGM (magic P5 expected)")
    tokens, offset = _header_tokens(data, 4)
    if tokens[0] != b"P5":
        raise MalformedHeaderError(f"bad magic {tokens[0]!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise MalformedHeaderError(f"non-numeric header field in {tokens[1:]}") from None
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise WrongMaxvalError(f"maxval must be 255, got {maxval}")
    payload = data[offset:offset + width * height]
    if len(payload) < width * height:
        raise TruncatedPayloadError(f"expected {width * height} pixel bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(img) -> bytes:
    img = as_image(img)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def load_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, img) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))


_GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of SplitMix64 seeded with ``seed`` (integer-only, wraps mod 2**64)."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN_GAMMA * np.arange(1, n + 1, dtype=np.uint64)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def random_image(seed: int, M: int, N: int) -> np.ndarray:
    """Pseudorandom ``M x N`` image: pixel ``k`` (row-major) is the top byte of SplitMix64 output ``k``."""
    if M < 1 or N < 1:
        raise ValueError("image dimensions must be >= 1")
    return (splitmix64(seed, M * N) >> np.uint64(56)).astype(np.uint8).reshape(M, N)
