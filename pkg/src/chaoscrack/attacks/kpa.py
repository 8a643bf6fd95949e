"""Known-plaintext attack by column fingerprints.

When the width is a multiple of 400, every pixel of a column is masked by
the same byte, and the cipher column is a row-shuffled, constant-XORed copy
of one plain column.  The multiset of value multiplicities survives both
operations, so columns can be matched by it.  A match is only accepted when
it is unique; tied columns stay as candidate sets.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..cipher import as_image, mask_indices
from ..eqkey import EquivalentKey, PartialMap, partial_map_for, propagate
from ..errors import DimensionMismatchError, InconsistencyError
from ..keystream import KEYSTREAM_LENGTH

ColumnFingerprint = tuple[int, ...]


def column_fingerprint(img, j: int) -> ColumnFingerprint:
    """Value multiplicities of column ``j``, largest first."""
    col = as_image(img)[:, j]
    return tuple(sorted(np.bincount(col, minlength=256)[np.unique(col)].tolist(), reverse=True))


def column_fingerprints(img) -> list[ColumnFingerprint]:
    img = as_image(img)
    return [column_fingerprint(img, j) for j in range(img.shape[1])]


def _check_pair(plain, cipher) -> tuple[np.ndarray, np.ndarray]:
    plain, cipher = as_image(plain), as_image(cipher)
    if plain.shape != cipher.shape:
        raise DimensionMismatchError(f"pair shapes differ: {plain.shape} vs {cipher.shape}")
    if plain.shape[1] % KEYSTREAM_LENGTH:
        raise DimensionMismatchError(
            f"width {plain.shape[1]} is not a multiple of {KEYSTREAM_LENGTH}; "
            "column fingerprints do not survive the masking")
    return plain, cipher


def match_columns(plain, cipher) -> PartialMap:
    """Candidate plain columns for every cipher column."""
    plain, cipher = _check_pair(plain, cipher)
    by_print: dict[ColumnFingerprint, list[int]] = {}
    for k, fp in enumerate(column_fingerprints(plain)):
        by_print.setdefault(fp, []).append(k)
    cands = []
    for j, fp in enumerate(column_fingerprints(cipher)):
        if fp not in by_print:
            raise InconsistencyError(f"cipher column {j} matches no plain column")
        cands.append(frozenset(by_print[fp]))
    claims = Counter(next(iter(c)) for c in cands if len(c) == 1)
    clash = [k for k, n in claims.items() if n > 1]
    if clash:
        raise InconsistencyError(f"plain columns {clash} are claimed by several cipher columns")
    return PartialMap(tuple(cands))


def recover_substitution_kpa(plain, cipher, p_hat: PartialMap) -> tuple[np.ndarray, np.ndarray]:
    """Masking bytes from every pixel whose row and column sources are both resolved.

    Returns ``(bytes, coverage)``; raises :class:`InconsistencyError` when two
    pixels disagree about one masking byte, which means a wrong match upstream.
    """
    plain, cipher = _check_pair(plain, cipher)
    M, N = plain.shape
    if len(p_hat) != N:
        raise DimensionMismatchError(f"map has {len(p_hat)} entries for width {N}")
    p_r = p_hat.as_array()
    p_c = partial_map_for(p_hat, M).as_array()
    rows, cols = np.flatnonzero(p_c >= 0), np.flatnonzero(p_r >= 0)
    sub = np.zeros(KEYSTREAM_LENGTH, dtype=np.uint8)
    coverage = np.zeros(KEYSTREAM_LENGTH, dtype=bool)
    if rows.size == 0 or cols.size == 0:
        return sub, coverage
    vals = (plain[np.ix_(p_c[rows], p_r[cols])] ^ cipher[np.ix_(rows, cols)]).astype(np.int64).ravel()
    pos = mask_indices(M, N)[np.ix_(rows, cols)].ravel()
    lo = np.full(KEYSTREAM_LENGTH, 256, dtype=np.int64)
    hi = np.full(KEYSTREAM_LENGTH, -1, dtype=np.int64)
    np.minimum.at(lo, pos, vals)
    np.maximum.at(hi, pos, vals)
    coverage = hi >= 0
    bad = np.flatnonzero(coverage & (lo != hi))
    if bad.size:
        raise InconsistencyError(f"contradictory keystream bytes at positions {bad[:10].tolist()}")
    sub[coverage] = lo[coverage]
    return sub, coverage


@dataclass(frozen=True, eq=False)
class KpaResult:
    map: PartialMap
    sub_bytes: np.ndarray
    coverage: np.ndarray
    geometry: tuple[int, int]
    pairs: int

    @property
    def resolved_fraction(self) -> float:
        return self.map.resolved_fraction

    @property
    def coverage_fraction(self) -> float:
        return float(self.coverage.mean())

    @property
    def key(self) -> EquivalentKey | None:
        """The equivalent key, or None while the map is still ambiguous."""
        if not self.map.complete:
            return None
        return EquivalentKey(base_map=self.map.to_permutation(), sub_bytes=self.sub_bytes,
                             geometry=self.geometry, coverage=self.coverage)


def run_kpa_attack(pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> KpaResult:
    """Intersect column matches over all pairs, then read off the masking bytes."""
    pairs = [_check_pair(p, c) for p, c in pairs]
    if not pairs:
        raise ValueError("known-plaintext attack needs at least one pair")
    N = pairs[0][0].shape[1]
    if any(p.shape[1] != N for p, _ in pairs):
        raise DimensionMismatchError("all pairs must share one width")

    cands = [set(c) for c in match_columns(*pairs[0]).candidates]
    for plain, cipher in pairs[1:]:
        for c, more in zip(cands, match_columns(plain, cipher).candidates):
            c &= more
    p_hat = PartialMap(propagate(cands, N))

    sub = np.zeros(KEYSTREAM_LENGTH, dtype=np.uint8)
    coverage = np.zeros(KEYSTREAM_LENGTH, dtype=bool)
    for plain, cipher in pairs:
        s, cov = recover_substitution_kpa(plain, cipher, p_hat)
        clash = coverage & cov & (sub != s)
        if clash.any():
            raise InconsistencyError(f"pairs disagree on keystream positions {np.flatnonzero(clash)[:10].tolist()}")
        sub = np.where(cov, s, sub)
        coverage |= cov
    return KpaResult(p_hat, sub, coverage, pairs[0][0].shape, len(pairs))
