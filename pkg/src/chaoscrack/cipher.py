"""Reference encryption and decryption.

Images are 2-D ``uint8`` arrays of shape ``(M, N)`` (height, width).  For a
key sequence ``c`` of 400 floats the cipher computes

    C[i, j] = I[p_c[i], p_r[j]] ^ s[(i*N + j) % 400]

where ``p_c`` and ``p_r`` are stable arg-sorts of ``c`` cyclically extended
to ``M`` and ``N`` entries and ``s`` is the substitution byte stream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .keystream import KEYSTREAM_LENGTH, IntegratorParams, MasterKey, generate_keystream


@dataclass(frozen=True)
class CipherConfig:
    # rotate the byte stream by 200 before masking, as the original scheme does
    apply_200_shift: bool = False


def as_image(img) -> np.ndarray:
    """Validate and return ``img`` as a 2-D uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"gray image must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
            raise ValueError("pixel values must be integers in 0..255")
        arr = arr.astype(np.uint8)
    return arr


def is_permutation(p) -> bool:
    p = np.asarray(p)
    if p.ndim != 1 or not np.issubdtype(p.dtype, np.integer):
        return False
    return np.array_equal(np.sort(p), np.arange(p.size))


def permutation_from_sequence(c, length: int) -> np.ndarray:
    """Stable ascending arg-sort of ``c`` cyclically extended to ``length`` entries."""
    if length < 1:
        raise ValueError("length must be >= 1")
    c = np.asarray(c)
    extended = c[np.arange(length) % c.size]
    return np.argsort(extended, kind="stable")


def mask_byte_index(i: int, j: int, N: int) -> int:
    return (i * N + j) % KEYSTREAM_LENGTH


def mask_indices(M: int, N: int) -> np.ndarray:
    """Keystream position addressed by every pixel of an ``M x N`` image."""
    return (np.arange(M)[:, None] * N + np.arange(N)[None, :]) % KEYSTREAM_LENGTH


def masking_stream(c_bytes, cfg: CipherConfig = CipherConfig()) -> np.ndarray:
    s = np.asarray(c_bytes, dtype=np.uint8)
    if cfg.apply_200_shift:
        s = np.roll(s, -200)
    return s


def permute(img: np.ndarray, p_c: np.ndarray, p_r: np.ndarray) -> np.ndarray:
    return img[np.ix_(p_c, p_r)]


def unpermute(img: np.ndarray, p_c: np.ndarray, p_r: np.ndarray) -> np.ndarray:
    out = np.empty_like(img)
    out[np.ix_(p_c, p_r)] = img
    return out


def apply_mask(img: np.ndarray, s: np.ndarray) -> np.ndarray:
    M, N = img.shape
    return img ^ s[mask_indices(M, N)]


def encrypt_with(img, p_c, p_r, s) -> np.ndarray:
    """Encrypt with explicit maps and a 400-byte masking stream."""
    img = as_image(img)
    return apply_mask(permute(img, p_c, p_r), np.asarray(s, dtype=np.uint8))


def decrypt_with(img, p_c, p_r, s) -> np.ndarray:
    img = as_image(img)
    return unpermute(apply_mask(img, np.asarray(s, dtype=np.uint8)), p_c, p_r)


def _material(M: int, N: int, key: MasterKey, params: IntegratorParams, cfg: CipherConfig):
    ks = generate_keystream(key, params)
    return (
        permutation_from_sequence(ks.c, M),
        permutation_from_sequence(ks.c, N),
        masking_stream(ks.c_bytes, cfg),
    )


def encrypt(img, key: MasterKey, params: IntegratorParams = IntegratorParams(),
            cfg: CipherConfig = CipherConfig()) -> np.ndarray:
    img = as_image(img)
    return encrypt_with(img, *_material(*img.shape, key, params, cfg))


def decrypt(img, key: MasterKey, params: IntegratorParams = IntegratorParams(),
            cfg: CipherConfig = CipherConfig()) -> np.ndarray:
    img = as_image(img)
    return decrypt_with(img, *_material(*img.shape, key, params, cfg))
