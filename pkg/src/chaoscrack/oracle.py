"""Encryption oracles: the only way attacks are allowed to touch the hidden key."""
from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cipher import CipherConfig, as_image, encrypt
from .eqkey import EquivalentKey, decrypt_with_equivalent
from .errors import MalformedAnswerError, OracleTimeoutError, PgmFormatError
from .keystream import IntegratorParams, MasterKey
from .pgm import random_image, read_pgm, write_pgm


class EncryptionOracle:
    """Encrypts attacker-chosen images under a fixed hidden key and counts queries.

    Subclasses implement :meth:`_answer`.  Queries are serialized by a lock.
    """

    def __init__(self):
        self.queries = 0
        self._lock = threading.Lock()

    def query(self, img) -> np.ndarray:
        img = as_image(img)
        with self._lock:
            self.queries += 1
            out = as_image(self._answer(img, self.queries))
        if out.shape != img.shape:
            raise MalformedAnswerError(f"answer shape {out.shape} != query shape {img.shape}")
        return out

    def _answer(self, img: np.ndarray, n: int) -> np.ndarray:
        raise NotImplementedError

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class LocalOracle(EncryptionOracle):
    def __init__(self, key: MasterKey, params: IntegratorParams = IntegratorParams(),
                 cfg: CipherConfig = CipherConfig()):
        super().__init__()
        # closure keeps the key off the public attribute surface
        self._answer = lambda img, n: encrypt(img, key, params, cfg)


def make_local_oracle(key: MasterKey, params: IntegratorParams = IntegratorParams(),
                      cfg: CipherConfig = CipherConfig()) -> LocalOracle:
    return LocalOracle(key, params, cfg)


class TranscriptOracle(EncryptionOracle):
    """File-exchange oracle for black-box implementations.

    Query ``n`` (from 1) is written as ``query-<n>.pgm``; the oracle then
    polls for ``answer-<n>.pgm``.  :meth:`close` drops a ``done`` sentinel.
    """

    def __init__(self, exchange_dir, timeout: float = 60.0, poll_interval: float = 0.05):
        super().__init__()
        self.exchange_dir = Path(exchange_dir)
        self.exchange_dir.mkdir(parents=True, exist_ok=True)
        self.timeout = timeout
        self.poll_interval = poll_interval

    def _answer(self, img: np.ndarray, n: int) -> np.ndarray:
        qpath = self.exchange_dir / f"query-{n}.pgm"
        apath = self.exchange_dir / f"answer-{n}.pgm"
        tmp = qpath.with_suffix(".pgm.tmp")
        tmp.write_bytes(write_pgm(img))
        os.replace(tmp, qpath)

        deadline = time.monotonic() + self.timeout
        last_error, last_size = None, None
        while True:
            if apath.exists():
                data = apath.read_bytes()
                try:
                    answer = read_pgm(data)
                except PgmFormatError as exc:
                    # the writer may still be busy; give up once the file stops growing
                    if last_error is not None and len(data) == last_size:
                        raise MalformedAnswerError(f"{apath.name}: {exc}") from exc
                    last_error, last_size = exc, len(data)
                else:
                    if answer.shape != img.shape:
                        raise MalformedAnswerError(
                            f"{apath.name} is {answer.shape[0]}x{answer.shape[1]}, "
                            f"query was {img.shape[0]}x{img.shape[1]}")
                    return answer
            if time.monotonic() >= deadline:
                if last_error is not None:
                    raise MalformedAnswerError(f"{apath.name}: {last_error}")
                raise OracleTimeoutError(f"no {apath.name} within {self.timeout} s")
            time.sleep(self.poll_interval)

    def close(self):
        (self.exchange_dir / "done").touch()


def make_transcript_oracle(exchange_dir, timeout: float = 60.0,
                           poll_interval: float = 0.05) -> TranscriptOracle:
    return TranscriptOracle(exchange_dir, timeout, poll_interval)


@dataclass
class VerificationReport:
    seed: int
    geometry: tuple[int, int]
    mismatches: list[int] = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.mismatches)

    @property
    def passed(self) -> bool:
        return all(m == 0 for m in self.mismatches)

    @property
    def total_mismatches(self) -> int:
        return sum(self.mismatches)


def verify_equivalent_key(oracle: EncryptionOracle, ek: EquivalentKey, trials: int,
                          seed: int = 0) -> VerificationReport:
    """Encrypt ``trials`` seeded random images via the oracle and decrypt them with ``ek``.

    Trial ``t`` uses ``random_image(seed + t, M, N)`` at the key's geometry.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    M, N = ek.geometry
    report = VerificationReport(seed=seed, geometry=(M, N))
    for t in range(trials):
        plain = random_image(seed + t, M, N)
        recovered = decrypt_with_equivalent(oracle.query(plain), ek)
        report.mismatches.append(int(np.count_nonzero(recovered != plain)))
    return report
