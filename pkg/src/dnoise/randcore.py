"""Bit sources and the exact randomness primitives every sampler builds on.

All randomness in this package flows through a :class:`BitSource`.  The
production source draws from the OS cryptographic generator; the seeded source
exists for tests and reproducible CLI runs only and must never be used to
protect real data.
"""

from __future__ import annotations

import os
import secrets
from abc import ABC, abstractmethod
from fractions import Fraction

ENV_SEED_VAR = "DNOISE_TEST_SEED"


class BitSource(ABC):
    """A metered stream of independent unbiased bits.

    Instances are single-owner: concurrent samplers need one source each.
    ``bits_consumed`` counts every bit handed out, supporting the
    runtime-concentration measurements.
    """

    __slots__ = ("bits_consumed",)

    def __init__(self) -> None:
        self.bits_consumed = 0

    @abstractmethod
    def _fill(self) -> int:
        """Return a fresh block of ``_BLOCK`` random bits as an int."""

    _BLOCK = 64

    def bits(self, k: int) -> int:
        """Draw k bits and return them as an integer in [0, 2**k)."""
        if k <= 0:
            return 0
        self.bits_consumed += k
        buf = self._buffer
        have = self._buffered
        while have < k:
            buf = (buf << self._BLOCK) | self._fill()
            have += self._BLOCK
        out = buf & ((1 << k) - 1)
        self._buffer = buf >> k
        self._buffered = have - k
        return out

    def next_bit(self) -> int:
        return self.bits(1)


class SystemBitSource(BitSource):
    """Bits from the OS cryptographic source (``secrets``)."""

    __slots__ = ("_buffer", "_buffered")
    _BLOCK = 512

    def __init__(self) -> None:
        super().__init__()
        self._buffer = 0
        self._buffered = 0

    def _fill(self) -> int:
        return secrets.randbits(self._BLOCK)


_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class SeededBitSource(BitSource):
    """Deterministic counter-based generator.  FOR TESTS ONLY.

    Seeding makes runs reproducible, which is exactly what a privacy
    deployment must avoid; a realistic deployment also has to worry that its
    physical bit source is imperfect.  Production code uses
    :class:`SystemBitSource`.
    """

    __slots__ = ("_state", "_buffer", "_buffered")

    def __init__(self, seed: int) -> None:
        super().__init__()
        self._state = seed & _MASK64
        self._buffer = 0
        self._buffered = 0

    def _fill(self) -> int:
        # splitmix64: a counter-based mix with full 64-bit output
        self._state = (self._state + _SPLITMIX_GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


def source_from_env() -> tuple[BitSource, int | None]:
    """Production source, or the seeded test source when the env var is set.

    Returns ``(source, seed)`` with ``seed`` None for the production source.
    """
    raw = os.environ.get(ENV_SEED_VAR)
    if raw is None:
        return SystemBitSource(), None
    try:
        seed = int(raw, 10)
    except ValueError as exc:
        raise ValueError(f"{ENV_SEED_VAR} must be a decimal integer, got {raw!r}") from exc
    return SeededBitSource(seed), seed


def uniform_below(src: BitSource, n: int) -> int:
    """Exactly uniform draw from {0, ..., n-1} by rejection on k-bit blocks."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if n == 1:
        return 0
    k = (n - 1).bit_length()
    bits = src.bits
    while True:
        d = bits(k)
        if d < n:
            return d


def _bernoulli_ratio(src: BitSource, num: int, den: int) -> int:
    # Bernoulli(num/den) for 0 <= num <= den without reducing the fraction.
    return 1 if uniform_below(src, den) < num else 0


def bernoulli_rational(src: BitSource, p: Fraction) -> int:
    """Return 1 with probability exactly p (a rational in [0, 1])."""
    p = Fraction(p)
    if p < 0 or p > 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 0:
        return 0
    if p == 1:
        return 1
    return _bernoulli_ratio(src, p.numerator, p.denominator)
