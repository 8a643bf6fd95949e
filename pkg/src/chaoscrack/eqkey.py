"""Equivalent keys: what the attacks recover instead of the master key.

An :class:`EquivalentKey` holds one permutation map plus the 400 masking
bytes.  Because both image axes are permuted by arg-sorts of the same
cyclically extended sequence, every map the cipher needs can be derived
from a single "base" map:

* shorter maps are the base map filtered to values ``< length``
  (:func:`prop1_project`), which holds for any stable arg-sort of a prefix;
* longer maps follow from the length-400 map by inserting ``k`` right after
  ``k mod 400`` (:func:`prop2_extend`), which is exactly what a stable sort
  does with the repeated values of a periodic sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cipher import (
    CipherConfig, as_image, decrypt_with, is_permutation, mask_indices, masking_stream,
    permutation_from_sequence,
)
from .errors import AmbiguityError, CoverageError, DimensionMismatchError, InconsistencyError, KeyFileError
from .keystream import KEYSTREAM_LENGTH, IntegratorParams, MasterKey, generate_keystream


def prop1_project(p_long, M: int) -> np.ndarray:
    """Map for the first ``M`` sequence entries, from the map of a longer prefix."""
    p_long = np.asarray(p_long)
    if M > p_long.size:
        raise DimensionMismatchError(f"cannot project a length-{p_long.size} map to {M}")
    return p_long[p_long < M]


def prop2_extend(p_base, K: int, period: int | None = None) -> np.ndarray:
    """Extend the map of one period of a periodic sequence to ``K`` entries.

    Each ``k >= period`` is placed after ``k mod period``; several values
    sharing an anchor follow it in ascending order.  Sound only against a
    stable sort of a period without repeated values.
    """
    p_base = np.asarray(p_base)
    period = p_base.size if period is None else period
    if p_base.size != period:
        raise DimensionMismatchError("base map length must equal the period")
    if K < period:
        raise DimensionMismatchError(f"K={K} is shorter than the period {period}")
    reps = -(-K // period)
    blocks = p_base[:, None] + period * np.arange(reps)[None, :]
    flat = blocks.ravel()
    return flat[flat < K]


_NEEDS_FULL_PERIOD = "maps longer than the recovered one need a base of at least 400 entries"


@dataclass(frozen=True, eq=False)
class EquivalentKey:
    """Permutation map and masking bytes recovered for an ``M x N`` target.

    ``coverage[k]`` is False for masking positions an attack could not see;
    such keys only decrypt images that never address those positions.
    """

    base_map: np.ndarray
    sub_bytes: np.ndarray
    geometry: tuple[int, int]
    coverage: np.ndarray = field(default=None)

    def __post_init__(self):
        base = np.asarray(self.base_map, dtype=np.int64)
        sub = np.asarray(self.sub_bytes, dtype=np.uint8)
        cov = (np.ones(KEYSTREAM_LENGTH, dtype=bool) if self.coverage is None
               else np.asarray(self.coverage, dtype=bool))
        if not is_permutation(base):
            raise ValueError("base_map is not a bijection")
        if sub.shape != (KEYSTREAM_LENGTH,) or cov.shape != (KEYSTREAM_LENGTH,):
            raise ValueError("sub_bytes and coverage must have 400 entries")
        sub = np.where(cov, sub, 0).astype(np.uint8)
        for name, arr in (("base_map", base), ("sub_bytes", sub), ("coverage", cov)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "geometry", (int(self.geometry[0]), int(self.geometry[1])))

    @property
    def complete(self) -> bool:
        return bool(self.coverage.all())

    def map_for(self, length: int) -> np.ndarray:
        base = self.base_map
        if length == base.size:
            return base
        if length < base.size:
            return prop1_project(base, length)
        if base.size < KEYSTREAM_LENGTH:
            raise DimensionMismatchError(_NEEDS_FULL_PERIOD)
        return prop2_extend(prop1_project(base, KEYSTREAM_LENGTH), length)

    def maps_for(self, M: int, N: int) -> tuple[np.ndarray, np.ndarray]:
        return self.map_for(M), self.map_for(N)

    def agrees_with(self, other: "EquivalentKey", M: int | None = None, N: int | None = None) -> bool:
        """Same action on ``M x N`` images (default: this key's geometry)."""
        M, N = (self.geometry if M is None else (M, N))
        if any(not np.array_equal(a, b) for a, b in zip(self.maps_for(M, N), other.maps_for(M, N))):
            return False
        needed = np.unique(mask_indices(M, N))
        if not (self.coverage[needed].all() and other.coverage[needed].all()):
            return False
        return np.array_equal(self.sub_bytes[needed], other.sub_bytes[needed])

    def __eq__(self, other):
        if not isinstance(other, EquivalentKey):
            return NotImplemented
        return (self.geometry == other.geometry
                and np.array_equal(self.base_map, other.base_map)
                and np.array_equal(self.sub_bytes, other.sub_bytes)
                and np.array_equal(self.coverage, other.coverage))

    __hash__ = None

    # file format ------------------------------------------------------------

    def dumps(self) -> str:
        M, N = self.geometry
        lines = [
            f"EQKEY v1 {M} {N} {self.base_map.size}",
            " ".join(str(int(v)) for v in self.base_map),
            self.sub_bytes.tobytes().hex(),
        ]
        if not self.complete:
            lines.append("COVERAGE " + "".join("1" if b else "0" for b in self.coverage))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "EquivalentKey":
        lines = text.splitlines()
        if len(lines) not in (3, 4):
            raise KeyFileError(f"expected 3 or 4 lines, got {len(lines)}")
        head = lines[0].split()
        if len(head) != 5 or head[:2] != ["EQKEY", "v1"]:
            raise KeyFileError(f"bad header {lines[0]!r}")
        try:
            M, N, L = (int(v) for v in head[2:])
            base = np.array([int(v) for v in lines[1].split()], dtype=np.int64)
        except ValueError as exc:
            raise KeyFileError(str(exc)) from None
        if base.size != L:
            raise KeyFileError(f"header says L={L} but map has {base.size} entries")
        if not is_permutation(base):
            raise KeyFileError("base map is not a bijection")
        hexline = lines[2].strip()
        if len(hexline) != 2 * KEYSTREAM_LENGTH or hexline != hexline.lower():
            raise KeyFileError("substitution line must be 400 lowercase hex bytes")
        try:
            sub = np.frombuffer(bytes.fromhex(hexline), dtype=np.uint8)
        except ValueError as exc:
            raise KeyFileError(str(exc)) from None
        coverage = None
        if len(lines) == 4:
            tag, _, bits = lines[3].partition(" ")
            if tag != "COVERAGE" or len(bits) != KEYSTREAM_LENGTH or set(bits) - {"0", "1"}:
                raise KeyFileError("bad COVERAGE line")
            coverage = np.array([b == "1" for b in bits])
        return cls(base_map=base, sub_bytes=sub, geometry=(M, N), coverage=coverage)


def equivalent_from_master(key: MasterKey, params: IntegratorParams, M: int, N: int,
                           cfg: CipherConfig = CipherConfig()) -> EquivalentKey:
    """The key material the cipher itself uses for ``M x N`` images."""
    ks = generate_keystream(key, params)
    length = max(KEYSTREAM_LENGTH, M, N)
    return EquivalentKey(
        base_map=permutation_from_sequence(ks.c, length),
        sub_bytes=masking_stream(ks.c_bytes, cfg),
        geometry=(M, N),
    )


def decrypt_with_equivalent(cipher, ek: EquivalentKey) -> np.ndarray:
    cipher = as_image(cipher)
    M, N = cipher.shape
    needed = np.unique(mask_indices(M, N))
    missing = needed[~ek.coverage[needed]]
    if missing.size:
        raise CoverageError(f"{missing.size} masking bytes needed for {M}x{N} were not recovered")
    p_c, p_r = ek.maps_for(M, N)
    return decrypt_with(cipher, p_c, p_r, ek.sub_bytes)


# partial maps -------------------------------------------------------------------


@dataclass(frozen=True)
class PartialMap:
    """Per-position candidate sets for a permutation that is only partly known."""

    candidates: tuple[frozenset, ...]

    def __len__(self):
        return len(self.candidates)

    @classmethod
    def from_permutation(cls, p) -> "PartialMap":
        return cls(tuple(frozenset((int(v),)) for v in p))

    @property
    def entries(self) -> list[int | None]:
        return [next(iter(c)) if len(c) == 1 else None for c in self.candidates]

    @property
    def resolved(self) -> np.ndarray:
        return np.array([len(c) == 1 for c in self.candidates], dtype=bool)

    @property
    def resolved_fraction(self) -> float:
        return float(self.resolved.mean()) if self.candidates else 1.0

    @property
    def complete(self) -> bool:
        return bool(self.resolved.all())

    def to_permutation(self) -> np.ndarray:
        if not self.complete:
            raise AmbiguityError("map is only partially resolved")
        return np.array(self.entries, dtype=np.int64)

    def as_array(self) -> np.ndarray:
        """Resolved entries, -1 where unknown."""
        return np.array([-1 if e is None else e for e in self.entries], dtype=np.int64)


def propagate(candidates: Sequence[set | frozenset], universe: int) -> tuple[frozenset, ...]:
    """Bijection constraint propagation over candidate sets for values ``0..universe-1``.

    Resolved values are removed from every other set, and a value admissible
    at a single position is fixed there.  Raises :class:`InconsistencyError`
    if a set empties, two positions claim one value, or a value has no home.
    """
    cands = [set(c) for c in candidates]
    changed = True
    while changed:
        changed = False
        owner: dict[int, int] = {}
        for pos, c in enumerate(cands):
            if not c:
                raise InconsistencyError(f"position {pos} has no admissible value")
            if len(c) == 1:
                v = next(iter(c))
                if v in owner:
                    raise InconsistencyError(f"positions {owner[v]} and {pos} both resolve to {v}")
                owner[v] = pos
        for pos, c in enumerate(cands):
            if len(c) > 1 and not owner.keys().isdisjoint(c):
                c.difference_update(owner.keys())
                changed = True
        if changed:
            continue
        homes: dict[int, list[int]] = {}
        for pos, c in enumerate(cands):
            for v in c:
                homes.setdefault(v, []).append(pos)
        for v in range(universe):
            where = homes.get(v)
            if not where:
                raise InconsistencyError(f"value {v} has no admissible position")
            if len(where) == 1 and len(cands[where[0]]) > 1:
                cands[where[0]] = {v}
                changed = True
    return tuple(frozenset(c) for c in cands)


def _blockwise(pm: PartialMap, out_len: int, block: Callable[[int], tuple[int, ...]]) -> PartialMap:
    # Each source position expands into block(value); walk from both ends while
    # the block size stays independent of the unknown value.
    out: list[set | None] = [None] * out_len

    def put(pos: int, vals: set):
        out[pos] = vals if out[pos] is None else out[pos] & vals

    pos = 0
    for cands in pm.candidates:
        blocks = [block(v) for v in cands]
        if len({len(b) for b in blocks}) != 1:
            break
        for r in range(len(blocks[0])):
            put(pos + r, {b[r] for b in blocks})
        pos += len(blocks[0])
    pos = out_len
    for cands in reversed(pm.candidates):
        blocks = [block(v) for v in cands]
        if len({len(b) for b in blocks}) != 1:
            break
        size = len(blocks[0])
        for r in range(size):
            put(pos - size + r, {b[r] for b in blocks})
        pos -= size
    everything = set(range(out_len))
    return PartialMap(propagate([everything if c is None else c for c in out], out_len))


def project_partial(pm: PartialMap, M: int) -> PartialMap:
    """:func:`prop1_project` for a partially known map."""
    if M > len(pm):
        raise DimensionMismatchError(f"cannot project a length-{len(pm)} map to {M}")
    return _blockwise(pm, M, lambda v: (v,) if v < M else ())


def extend_partial(pm: PartialMap, K: int) -> PartialMap:
    """:func:`prop2_extend` for a partially known map of one period."""
    period = len(pm)
    if K < period:
        raise DimensionMismatchError(f"K={K} is shorter than the period {period}")
    return _blockwise(pm, K, lambda v: tuple(range(v, K, period)))


def partial_map_for(pm: PartialMap, length: int) -> PartialMap:
    """Partial counterpart of :meth:`EquivalentKey.map_for`."""
    if length == len(pm):
        return pm
    if length < len(pm):
        return project_partial(pm, length)
    if len(pm) < KEYSTREAM_LENGTH:
        raise DimensionMismatchError(_NEEDS_FULL_PERIOD)
    return extend_partial(project_partial(pm, KEYSTREAM_LENGTH), length)
