"""Chaotic key sequence of the attacked cipher.

The generator integrates the hyperbolic-sine jerk system

    x''' = -0.75 x'' - x - 1.2e-6 * sinh(x' / 0.026)

from the master key ``(x0, x'0, x''0)`` with fixed-step RK4, interleaves the
velocity and acceleration components, keeps the fractional part of the
samples scaled by 1e6 and finally turns each value into a substitution byte
``floor(c * 1e8) mod 256``.  The cipher always uses exactly 400 values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DivergenceError, InsufficientSamplesError

KEYSTREAM_LENGTH = 400

DAMPING = 0.75
SINH_GAIN = 1.2e-6
SINH_SCALE = 0.026
DIVERGENCE_BOUND = 1e10

_DECORRELATION_SCALE = 10**6
_BYTE_SCALE = 10**8


@dataclass(frozen=True)
class MasterKey:
    """Initial conditions of ``x``, ``x'`` and ``x''``, each in [0, 1]."""

    x0: float
    xd0: float
    xdd0: float

    def __post_init__(self):
        for name in ("x0", "xd0", "xdd0"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value!r} outside [0, 1]")
            object.__setattr__(self, name, value)

    @classmethod
    def parse(cls, text: str) -> "MasterKey":
        """Parse ``"x0,xd0,xdd0"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"master key needs three comma-separated numbers, got {text!r}")
        return cls(*(float(p) for p in parts))

    def __str__(self):
        return f"{self.x0!r},{self.xd0!r},{self.xdd0!r}"

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x0, self.xd0, self.xdd0)


@dataclass(frozen=True)
class IntegratorParams:
    step: float = 0.01
    transient_steps: int = 1000
    sample_stride: int = 1

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.transient_steps < 0:
            raise ValueError("transient_steps must be >= 0")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")


@dataclass(frozen=True, eq=False)
class ChaoticKeystream:
    """Decorrelated sequence ``c`` (400 floats in [0, 1)) and its bytes ``c_bytes``."""

    c: np.ndarray
    c_bytes: np.ndarray

    def __post_init__(self):
        if self.c.shape != (KEYSTREAM_LENGTH,) or self.c_bytes.shape != (KEYSTREAM_LENGTH,):
            raise ValueError("keystream must hold exactly 400 values")
        self.c.setflags(write=False)
        self.c_bytes.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, ChaoticKeystream):
            return NotImplemented
        return np.array_equal(self.c, other.c) and np.array_equal(self.c_bytes, other.c_bytes)

    __hash__ = None


def _derivative(x: float, xd: float, xdd: float) -> tuple[float, float, float]:
    try:
        wall = SINH_GAIN * math.sinh(xd / SINH_SCALE)
    except OverflowError:
        raise DivergenceError(f"sinh overflow at x'={xd!r}") from None
    return xd, xdd, -DAMPING * xdd - x - wall


def _rk4_step(state: tuple[float, float, float], h: float) -> tuple[float, float, float]:
    x, y, z = state
    a1, b1, c1 = _derivative(x, y, z)
    a2, b2, c2 = _derivative(x + 0.5 * h * a1, y + 0.5 * h * b1, z + 0.5 * h * c1)
    a3, b3, c3 = _derivative(x + 0.5 * h * a2, y + 0.5 * h * b2, z + 0.5 * h * c2)
    a4, b4, c4 = _derivative(x + h * a3, y + h * b3, z + h * c3)
    h6 = h / 6.0
    out = (
        x + h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        y + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
        z + h6 * (c1 + 2.0 * c2 + 2.0 * c3 + c4),
    )
    for v in out:
        if not math.isfinite(v) or abs(v) > DIVERGENCE_BOUND:
            raise DivergenceError(f"trajectory left |state| <= {DIVERGENCE_BOUND:g}: {out}")
    return out


def integrate_trajectory(key: MasterKey, params: IntegratorParams, count: int) -> np.ndarray:
    """Evolve the jerk system and return ``count`` samples.

    Returns an array of shape ``(count, 3)`` whose columns are ``x``, ``x'``
    and ``x''``.  The first row is the state right after ``transient_steps``
    warm-up steps; consecutive rows are ``sample_stride`` steps apart.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    h = params.step
    state = key.as_tuple()
    for _ in range(params.transient_steps):
        state = _rk4_step(state, h)
    out = np.empty((count, 3))
    for n in range(count):
        out[n] = state
        if n + 1 < count:
            for _ in range(params.sample_stride):
                state = _rk4_step(state, h)
    return out


def build_mixed_sequence(samples) -> np.ndarray:
    """Take ``x'`` at even indices and ``x''`` at odd indices (first 400 samples)."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 3:
        raise ValueError("samples must have shape (n, 3)")
    if samples.shape[0] < KEYSTREAM_LENGTH:
        raise InsufficientSamplesError(
            f"need {KEYSTREAM_LENGTH} samples, got {samples.shape[0]}"
        )
    s = samples[:KEYSTREAM_LENGTH]
    m = s[:, 2].copy()
    m[0::2] = s[0::2, 1]
    return m


_BELOW_ONE = np.nextafter(1.0, 0.0)


def decorrelate(m) -> np.ndarray:
    """Fractional part of ``m * 1e6`` (floor semantics, so negatives land in [0, 1))."""
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise ValueError("decorrelate needs finite input")
    scaled = m * _DECORRELATION_SCALE
    c = scaled - np.floor(scaled)
    # -tiny - floor(-tiny) rounds up to exactly 1.0 in binary64
    return np.where(c >= 1.0, _BELOW_ONE, c)


def substitution_bytes(c) -> np.ndarray:
    """``floor(c * 1e8) mod 256`` evaluated exactly on the binary64 value of ``c``.

    A float product ``c * 1e8`` can round onto the next integer, so the
    floor is taken on the exact rational ``num/den`` of each double instead.
    """
    out = []
    for value in np.asarray(c, dtype=np.float64).ravel():
        num, den = float(value).as_integer_ratio()
        out.append((num * _BYTE_SCALE // den) % 256)
    return np.array(out, dtype=np.uint8).reshape(np.shape(c))


@lru_cache(maxsize=256)
def generate_keystream(key: MasterKey, params: IntegratorParams = IntegratorParams()) -> ChaoticKeystream:
    samples = integrate_trajectory(key, params, KEYSTREAM_LENGTH)
    c = decorrelate(build_mixed_sequence(samples))
    return ChaoticKeystream(c=c, c_bytes=substitution_bytes(c))


def sample_master_key(rng: np.random.Generator, params: IntegratorParams = IntegratorParams(),
                      max_tries: int = 1000) -> MasterKey:
    """Draw a uniform key in [0, 1]^3 whose trajectory stays bounded under ``params``.

    Roughly half of the cube (large ``x'0``) is too stiff for explicit RK4 at
    the default step; those keys raise :class:`DivergenceError` and are redrawn.
    """
    for _ in range(max_tries):
        key = MasterKey(*rng.random(3))
        try:
            generate_keystream(key, params)
        except DivergenceError:
            continue
        return key
    raise DivergenceError(f"no integrable key found in {max_tries} draws")
