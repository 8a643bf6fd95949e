import itertools

import numpy as np
import pytest

from chaoscrack.cipher import encrypt_with
from chaoscrack.eqkey import prop1_project
from chaoscrack.keystream import IntegratorParams, MasterKey, sample_master_key
from chaoscrack.oracle import EncryptionOracle

DEMO_KEY = MasterKey(0.41337, 0.11121, 0.24494)
DEFAULT_PARAMS = IntegratorParams()


@pytest.fixture
def demo_key():
    return DEMO_KEY


@pytest.fixture
def params():
    return DEFAULT_PARAMS


def random_keys(n, seed=0):
    rng = np.random.default_rng(seed)
    return [sample_master_key(rng) for _ in range(n)]


class MapOracle(EncryptionOracle):
    """Oracle built from an explicit base map and stream instead of a master key."""

    def __init__(self, base_map, stream):
        super().__init__()
        self.base_map = np.asarray(base_map)
        self.stream = np.asarray(stream, dtype=np.uint8)

    def _answer(self, img, n):
        M, N = img.shape
        return encrypt_with(img, prop1_project(self.base_map, M), prop1_project(self.base_map, N), self.stream)


class RecordingOracle(EncryptionOracle):
    """Wraps another oracle and remembers the shape of every query."""

    def __init__(self, inner):
        super().__init__()
        self.inner = inner
        self.shapes = []

    def _answer(self, img, n):
        self.shapes.append(img.shape)
        return self.inner.query(img)


def _partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def distinct_fingerprint_image(rng, M=64, N=400):
    """M x N image whose columns all have different value-multiplicity profiles."""
    parts = list(itertools.islice(_partitions(M), N))
    assert len(parts) == N
    img = np.empty((M, N), dtype=np.uint8)
    for j, part in enumerate(parts):
        values = rng.choice(256, size=len(part), replace=False)
        col = np.repeat(values, part)
        img[:, j] = rng.permutation(col)
    order = rng.permutation(N)
    return img[:, order]


def naive_stable_argsort(seq):
    """O(L^2) selection: repeatedly take the smallest remaining value, lowest index first."""
    remaining = list(range(len(seq)))
    out = []
    while remaining:
        best = remaining[0]
        for i in remaining[1:]:
            if seq[i] < seq[best]:
                best = i
        out.append(best)
        remaining.remove(best)
    return out


# acceptance reporting ----------------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
