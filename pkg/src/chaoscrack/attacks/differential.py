"""Two-query differential attack.

XORing two ciphertexts cancels the masking, leaving a permutation-only
image of the plaintext difference.  With the upper-triangular difference
(255 where row <= column), column ``j`` of the cipher difference holds
exactly ``p(j) + 1`` white pixels.  The all-zero member of the pair then
exposes the masking bytes directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cipher import is_permutation, mask_indices
from ..eqkey import EquivalentKey
from ..errors import NonConformingOracleError
from ..keystream import KEYSTREAM_LENGTH
from ..oracle import EncryptionOracle


@dataclass(frozen=True, eq=False)
class ChosenPair:
    first: np.ndarray
    second: np.ndarray

    @property
    def size(self) -> int:
        return self.first.shape[0]


def build_chosen_pair(L: int) -> ChosenPair:
    if L < 1:
        raise ValueError("L must be >= 1")
    first = np.zeros((L, L), dtype=np.uint8)
    second = np.triu(np.full((L, L), 255, dtype=np.uint8))
    return ChosenPair(first, second)


def recover_permutation_from_diff(diff, L: int) -> np.ndarray:
    diff = np.asarray(diff)
    if diff.shape != (L, L):
        raise NonConformingOracleError(f"difference image must be {L}x{L}, got {diff.shape}")
    if not np.isin(diff, (0, 255)).all():
        raise NonConformingOracleError("difference image holds values other than 0 and 255")
    white = diff == 255
    p = white.sum(axis=0) - 1
    if not is_permutation(p):
        raise NonConformingOracleError("column white-counts do not form a permutation")
    # the row counts carry the same map: row i has L - p(i) white pixels
    if not np.array_equal(white.sum(axis=1), L - p):
        raise NonConformingOracleError("row white-counts disagree with column white-counts")
    return p


def recover_substitution_diff(plain, cipher, p_c, p_r) -> tuple[np.ndarray, np.ndarray]:
    """Masking bytes from one known pair once the maps are known.

    Walks rows from the top until all 400 positions are seen, so images
    narrower than 400 still work.  Returns ``(bytes, coverage)``; positions
    never addressed by the image (only when ``M*N < 400``) are left uncovered.
    """
    cipher = np.asarray(cipher)
    M, N = cipher.shape
    rows_needed = min(M, -(-KEYSTREAM_LENGTH // N))
    idx = mask_indices(rows_needed, N)
    stripped = np.asarray(plain)[np.ix_(p_c[:rows_needed], p_r)] ^ cipher[:rows_needed]
    sub = np.zeros(KEYSTREAM_LENGTH, dtype=np.uint8)
    coverage = np.zeros(KEYSTREAM_LENGTH, dtype=bool)
    sub[idx.ravel()] = stripped.ravel()
    coverage[idx.ravel()] = True
    return sub, coverage


def run_differential_attack(oracle: EncryptionOracle, M: int, N: int) -> EquivalentKey:
    """Recover an equivalent key for ``M x N`` images with two oracle queries."""
    L = max(M, N)
    pair = build_chosen_pair(L)
    c1 = oracle.query(pair.first)
    c2 = oracle.query(pair.second)
    p = recover_permutation_from_diff(c1 ^ c2, L)
    sub, coverage = recover_substitution_diff(pair.first, c1, p, p)
    # a target no larger than the probe square addresses no more positions than it
    assert coverage[np.unique(mask_indices(M, N))].all()
    # the shorter axis map is derived by projection when the key is applied
    return EquivalentKey(base_map=p, sub_bytes=sub, geometry=(M, N), coverage=coverage)
