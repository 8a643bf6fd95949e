"""Single-query chosen-plaintext attack with a 3-row probe.

The probe has an all-black row and columns whose pixel sums are
``1, 2, ..., q``.  With ``q = 400`` all three rows are masked by the same
400 bytes, so the ciphertext row holding the black row *is* the masking
stream; unmasking the other rows and summing columns yields the map.

Narrower probes (``q < 400``) mask each row with a different window of the
stream.  :func:`solve_narrow_probe` handles them by constraint propagation,
but three windows of ``q`` bytes can cover at most ``3q`` of the 400
positions, so small probes are underdetermined.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..cipher import as_image, is_permutation
from ..eqkey import EquivalentKey, PartialMap, prop1_project, prop2_extend
from ..errors import AmbiguityError, DimensionMismatchError, NonConformingOracleError
from ..keystream import KEYSTREAM_LENGTH
from ..oracle import EncryptionOracle


@dataclass(frozen=True, eq=False)
class CpaProbe:
    image: np.ndarray

    @property
    def width(self) -> int:
        return self.image.shape[1]

    def column_sums(self) -> np.ndarray:
        return self.image.sum(axis=0, dtype=np.int64)


def build_chosen_image(q: int = KEYSTREAM_LENGTH) -> CpaProbe:
    """3 x q probe; 1-based column ``j`` holds ``(0, j mod 256 + j // 256, 255 * (j // 256))``."""
    if not 1 <= q <= KEYSTREAM_LENGTH:
        raise ValueError(f"probe width must be in 1..{KEYSTREAM_LENGTH}")
    j = np.arange(1, q + 1)
    img = np.zeros((3, q), dtype=np.uint8)
    img[1] = j % 256 + j // 256
    img[2] = (j // 256) * 255
    return CpaProbe(img)


def _unmasked_column_map(cipher: np.ndarray, z: int):
    stream = cipher[z]
    unmasked = cipher ^ stream[None, :]
    p = unmasked.sum(axis=0, dtype=np.int64) - 1
    return p, stream


def locate_black_row(cipher) -> tuple[int, np.ndarray]:
    """Find the ciphertext row that carries the probe's black row.

    Each of the three rows is tried as the masking stream; only the right
    one turns the column sums into a permutation of ``1..400``.
    """
    cipher = as_image(cipher)
    if cipher.shape != (3, KEYSTREAM_LENGTH):
        raise DimensionMismatchError(
            f"black-row search needs a 3x{KEYSTREAM_LENGTH} ciphertext, got {cipher.shape}")
    passing = [z for z in range(3) if is_permutation(_unmasked_column_map(cipher, z)[0])]
    if len(passing) != 1:
        raise AmbiguityError(f"{len(passing)} rows pass the black-row test (want exactly 1)")
    z = passing[0]
    return z, cipher[z].copy()


def recover_map_and_stream(cipher, z: int) -> tuple[np.ndarray, np.ndarray]:
    cipher = as_image(cipher)
    p, stream = _unmasked_column_map(cipher, z)
    if not is_permutation(p):
        raise NonConformingOracleError("unmasked column sums are not a permutation")
    return p, stream.copy()


@dataclass(frozen=True, eq=False)
class NarrowProbeResult:
    map: PartialMap
    sub_bytes: np.ndarray
    coverage: np.ndarray


class _Contradiction(Exception):
    pass


def _propagate_probe(values: np.ndarray, cipher: np.ndarray, row_perm) -> NarrowProbeResult:
    q = values.shape[1]
    plain_rows = values[list(row_perm)].astype(np.int64)      # plain row seen in cipher row r
    window = (np.arange(3)[:, None] * q + np.arange(q)[None, :]) % KEYSTREAM_LENGTH
    C = cipher.astype(np.int64)
    cand = np.ones((q, q), dtype=bool)                        # [cipher column, plain column]
    stream = np.full(KEYSTREAM_LENGTH, -1, dtype=np.int64)

    changed = True
    while changed:
        changed = False
        for r in range(3):
            known = stream[window[r]] >= 0
            if known.any():
                seen = C[r, known] ^ stream[window[r, known]]
                narrowed = cand[known] & (plain_rows[r][None, :] == seen[:, None])
                if not np.array_equal(narrowed, cand[known]):
                    cand[known] = narrowed
                    changed = True
        if not cand.any(axis=1).all():
            raise _Contradiction
        for r in range(3):
            lo = np.where(cand, plain_rows[r][None, :], 256).min(axis=1)
            hi = np.where(cand, plain_rows[r][None, :], -1).max(axis=1)
            fresh = (lo == hi) & (stream[window[r]] < 0)
            for pos, val in zip(window[r, fresh], C[r, fresh] ^ lo[fresh]):
                if stream[pos] >= 0 and stream[pos] != val:
                    raise _Contradiction
                stream[pos] = val
                changed = True
        rows_single = cand.sum(axis=1) == 1
        taken = cand[rows_single].any(axis=0)
        if cand[rows_single].sum(axis=0).max(initial=0) > 1:
            raise _Contradiction
        clear = ~rows_single[:, None] & taken[None, :] & cand
        if clear.any():
            cand[clear] = False
            changed = True
        col_counts = cand.sum(axis=0)
        if (col_counts == 0).any():
            raise _Contradiction
        for k in np.flatnonzero(col_counts == 1):
            j = np.flatnonzero(cand[:, k])[0]
            if cand[j].sum() > 1:
                cand[j] = False
                cand[j, k] = True
                changed = True

    pm = PartialMap(tuple(frozenset(np.flatnonzero(row).tolist()) for row in cand))
    if pm.complete and q >= 3:
        if not np.array_equal(prop1_project(pm.to_permutation(), 3), np.asarray(row_perm)):
            raise _Contradiction
    coverage = stream >= 0
    return NarrowProbeResult(pm, np.where(coverage, stream, 0).astype(np.uint8), coverage)


def solve_narrow_probe(probe: CpaProbe, cipher) -> NarrowProbeResult:
    """Recover what a ``3 x q`` probe ciphertext determines, for any ``q``.

    All six orders of the probe rows are tried; the result keeps only what
    every consistent order agrees on.
    """
    cipher = as_image(cipher)
    if cipher.shape != probe.image.shape:
        raise DimensionMismatchError("ciphertext and probe shapes differ")
    results = []
    for perm in itertools.permutations(range(3)):
        try:
            results.append(_propagate_probe(probe.image, cipher, perm))
        except _Contradiction:
            continue
    if not results:
        raise NonConformingOracleError("no ordering of the probe rows explains the ciphertext")
    first = results[0]
    cands = [set(c) for c in first.map.candidates]
    coverage = first.coverage.copy()
    for other in results[1:]:
        for c, extra in zip(cands, other.map.candidates):
            c |= extra
        coverage &= other.coverage & (other.sub_bytes == first.sub_bytes)
    pm = PartialMap(tuple(frozenset(c) for c in cands))
    return NarrowProbeResult(pm, np.where(coverage, first.sub_bytes, 0).astype(np.uint8), coverage)


def run_cpa_attack(oracle: EncryptionOracle, M: int, N: int,
                   probe_width: int = KEYSTREAM_LENGTH) -> EquivalentKey:
    """Recover an equivalent key for ``M x N`` images from one probe query.

    The default 3x400 probe works for every geometry; targets longer than
    400 get their maps by periodic extension, which assumes the cipher
    sorts stably.  ``probe_width < 400`` only serves targets no longer than
    the probe and may leave the key underdetermined.
    """
    L = max(M, N)
    probe = build_chosen_image(probe_width)
    if probe_width < KEYSTREAM_LENGTH and L > probe_width:
        raise DimensionMismatchError(f"a 3x{probe_width} probe cannot serve a {M}x{N} target")
    cipher = oracle.query(probe.image)

    if probe_width == KEYSTREAM_LENGTH:
        z, _ = locate_black_row(cipher)
        p, stream = recover_map_and_stream(cipher, z)
        base = prop2_extend(p, L) if L > KEYSTREAM_LENGTH else p
        return EquivalentKey(base_map=base, sub_bytes=stream, geometry=(M, N))

    result = solve_narrow_probe(probe, cipher)
    if not result.map.complete:
        raise AmbiguityError(
            f"3x{probe_width} probe resolved only {result.map.resolved_fraction:.1%} of the map")
    return EquivalentKey(base_map=result.map.to_permutation(), sub_bytes=result.sub_bytes,
                         geometry=(M, N), coverage=result.coverage)
