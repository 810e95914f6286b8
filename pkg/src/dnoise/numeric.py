"""Exact rationals, certified interval arithmetic, and series summation.

Every real-valued quantity this package reports is a :class:`CertifiedInterval`
``[lo, hi]`` computed with directed rounding, so ``lo <= exact value <= hi``
holds unconditionally.  Rationals are plain :class:`fractions.Fraction`
values, normalized eagerly on construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

from mpmath.ctx_iv import MPIntervalContext

Rational = Fraction

DEFAULT_PRECISION = 128
MAX_PRECISION_DOUBLINGS = 4
MAX_SERIES_TERMS = 10_000_000

ScalarLike = Union[int, Fraction, "CertifiedInterval"]


class SeriesConvergenceError(RuntimeError):
    """Raised when a series cutoff exceeds the configured hard limit."""


class IndeterminateComparisonError(RuntimeError):
    """Raised when a comparison stays undecided at the maximum precision."""


_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")


def parse_rational(text: str) -> Fraction:
    """Parse the textual rational format ``p/q`` or ``p`` (optional leading -)."""
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational in p/q form: {text!r}")
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator: {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(value: Fraction) -> str:
    """Inverse of :func:`parse_rational`; round-trips exactly."""
    return str(Fraction(value))


_CONTEXTS: dict[int, MPIntervalContext] = {}


def _context(precision_bits: int) -> MPIntervalContext:
    if precision_bits < 2:
        raise ValueError(f"precision_bits must be >= 2, got {precision_bits}")
    ctx = _CONTEXTS.get(precision_bits)
    if ctx is None:
        ctx = MPIntervalContext()
        ctx.prec = precision_bits
        _CONTEXTS[precision_bits] = ctx
    return ctx


def _raw_to_fraction(raw) -> Fraction:
    # raw is an mpmath libmp tuple (sign, mantissa, exponent, bitcount)
    sign, man, exp, _ = raw
    if man == 0:
        if exp == 0:
            return Fraction(0)
        raise OverflowError("non-finite interval endpoint")
    value = Fraction(int(man)) * Fraction(2) ** exp
    return -value if sign else value


def _sci_string(value: Fraction, digits: int, round_up: bool) -> str:
    """Exact decimal scientific form, rounded in the stated direction."""
    if value == 0:
        mantissa = "0" if digits <= 1 else "0." + "0" * (digits - 1)
        return mantissa + "e+00"
    sign = "-" if value < 0 else ""
    mag = abs(value)
    # exponent e with 10^e <= mag < 10^(e+1)
    e = math.floor(math.log10(float(mag))) if 1e-300 < float(mag) < 1e300 else None
    if e is None:
        # out of float range: locate by exact comparisons from a bit-length guess
        num, den = mag.numerator, mag.denominator
        e = int((num.bit_length() - den.bit_length()) * 0.30103)
    while mag >= Fraction(10) ** (e + 1):
        e += 1
    while mag < Fraction(10) ** e:
        e -= 1
    scaled = mag / Fraction(10) ** (e - digits + 1)  # in [10^(d-1), 10^d)
    n = scaled.numerator // scaled.denominator
    up = round_up != (value < 0)  # digits of |value|: ceil if rounding away matches
    if up and scaled != n:
        n += 1
    if n >= 10**digits:
        n //= 10
        e += 1
    s = str(n)
    mantissa = s[0] + "." + s[1:] if digits > 1 else s
    return f"{sign}{mantissa}e{e:+03d}"


class CertifiedInterval:
    """A closed interval guaranteed to contain an exact real value.

    Arithmetic widens outward (directed rounding); comparisons are
    three-valued: ``certainly_*`` methods return ``True`` only when the
    endpoint ordering proves the relation.
    """

    __slots__ = ("_iv", "precision_bits")

    def __init__(self, value, precision_bits: int = DEFAULT_PRECISION):
        ctx = _context(precision_bits)
        if isinstance(value, CertifiedInterval):
            iv = ctx.convert(value._iv)
        elif isinstance(value, Fraction):
            iv = ctx.mpf(value.numerator) / ctx.mpf(value.denominator)
        elif isinstance(value, int):
            iv = ctx.mpf(value)
        elif isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(f"non-finite float: {value}")
            iv = ctx.mpf(Fraction(value).numerator) / ctx.mpf(Fraction(value).denominator)
        else:
            iv = ctx.convert(value)
        self._iv = iv
        self.precision_bits = precision_bits
        if not (iv.a <= iv.b):
            raise ValueError("invalid interval endpoints")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def _wrap(cls, iv, precision_bits: int) -> "CertifiedInterval":
        obj = object.__new__(cls)
        obj._iv = iv
        obj.precision_bits = precision_bits
        return obj

    @classmethod
    def from_endpoints(cls, lo, hi, precision_bits: int = DEFAULT_PRECISION) -> "CertifiedInterval":
        """Hull of two values (each may be int, Fraction, or interval)."""
        a = cls(lo, precision_bits)
        b = cls(hi, precision_bits)
        ctx = _context(precision_bits)
        return cls._wrap(ctx.mpf([a._iv.a, b._iv.b]), precision_bits)

    @classmethod
    def pi(cls, precision_bits: int = DEFAULT_PRECISION) -> "CertifiedInterval":
        return cls._wrap(+_context(precision_bits).pi, precision_bits)

    # -- endpoints -------------------------------------------------------------

    @property
    def lo(self) -> Fraction:
        """Exact lower endpoint (binary floats are dyadic rationals)."""
        return _raw_to_fraction(self._iv._mpi_[0])

    @property
    def hi(self) -> Fraction:
        return _raw_to_fraction(self._iv._mpi_[1])

    @property
    def lo_float(self) -> float:
        return float(self._iv.a)

    @property
    def hi_float(self) -> float:
        return float(self._iv.b)

    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.hi + self.lo) / 2

    def lo_str(self, digits: int = 6) -> str:
        """Lower endpoint in scientific notation, rounded downward."""
        return _sci_string(self.lo, digits, round_up=False)

    def hi_str(self, digits: int = 6) -> str:
        """Upper endpoint in scientific notation, rounded upward (safe side)."""
        return _sci_string(self.hi, digits, round_up=True)

    # -- arithmetic --------------------------------------------------------------

    def _coerce(self, other) -> Optional["CertifiedInterval"]:
        if isinstance(other, CertifiedInterval):
            return other
        if isinstance(other, (int, Fraction)):
            return CertifiedInterval(other, self.precision_bits)
        return None

    def _binop(self, other, op) -> "CertifiedInterval":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        bits = max(self.precision_bits, rhs.precision_bits)
        ctx = _context(bits)
        a = ctx.convert(self._iv)
        b = ctx.convert(rhs._iv)
        return CertifiedInterval._wrap(op(a, b), bits)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        if rhs.contains_zero():
            raise ZeroDivisionError("division by an interval containing zero")
        return self._binop(rhs, lambda a, b: a / b)

    def __rtruediv__(self, other):
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs / self

    def __neg__(self):
        return CertifiedInterval._wrap(-self._iv, self.precision_bits)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        return CertifiedInterval._wrap(self._iv ** n, self.precision_bits)

    def exp(self) -> "CertifiedInterval":
        ctx = _context(self.precision_bits)
        return CertifiedInterval._wrap(ctx.exp(self._iv), self.precision_bits)

    def log(self) -> "CertifiedInterval":
        if not self.certainly_gt(0):
            raise ValueError("log requires a certainly positive interval")
        ctx = _context(self.precision_bits)
        return CertifiedInterval._wrap(ctx.log(self._iv), self.precision_bits)

    def sqrt(self) -> "CertifiedInterval":
        if self.lo < 0:
            raise ValueError("sqrt requires a nonnegative interval")
        ctx = _context(self.precision_bits)
        return CertifiedInterval._wrap(ctx.sqrt(self._iv), self.precision_bits)

    def cos(self) -> "CertifiedInterval":
        ctx = _context(self.precision_bits)
        return CertifiedInterval._wrap(ctx.cos(self._iv), self.precision_bits)

    def sin(self) -> "CertifiedInterval":
        ctx = _context(self.precision_bits)
        return CertifiedInterval._wrap(ctx.sin(self._iv), self.precision_bits)

    def clamp(self, lo: Fraction | int = 0, hi: Fraction | int = 1) -> "CertifiedInterval":
        """Intersect with [lo, hi]; sound when the exact value lies there."""
        new_lo = max(self.lo, Fraction(lo))
        new_hi = min(self.hi, Fraction(hi))
        if new_lo > new_hi:
            raise ValueError("clamp produced an empty interval")
        return CertifiedInterval.from_endpoints(new_lo, new_hi, self.precision_bits)

    # -- comparisons --------------------------------------------------------------

    def certainly_le(self, other: ScalarLike) -> bool:
        rhs = self._coerce(other)
        return self.hi <= rhs.lo

    def certainly_lt(self, other: ScalarLike) -> bool:
        rhs = self._coerce(other)
        return self.hi < rhs.lo

    def certainly_ge(self, other: ScalarLike) -> bool:
        rhs = self._coerce(other)
        return self.lo >= rhs.hi

    def certainly_gt(self, other: ScalarLike) -> bool:
        rhs = self._coerce(other)
        return self.lo > rhs.hi

    def possibly_le(self, other: ScalarLike) -> bool:
        rhs = self._coerce(other)
        return self.lo <= rhs.hi

    def contains(self, value: Union[int, Fraction, "CertifiedInterval"]) -> bool:
        if isinstance(value, CertifiedInterval):
            return self.lo <= value.lo and value.hi <= self.hi
        v = Fraction(value)
        return self.lo <= v <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def intersects(self, other: "CertifiedInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __repr__(self) -> str:
        return f"CertifiedInterval[{self.lo_str(10)}, {self.hi_str(10)}]@{self.precision_bits}"


def interval(value, precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    """Shorthand constructor."""
    return CertifiedInterval(value, precision_bits)


def exp_of(value: ScalarLike, precision_bits: int = DEFAULT_PRECISION) -> CertifiedInterval:
    return CertifiedInterval(value, precision_bits).exp()


def resolve_comparison(
    predicate: Callable[[int], Optional[bool]],
    precision_bits: int = DEFAULT_PRECISION,
    max_doublings: int = MAX_PRECISION_DOUBLINGS,
) -> bool:
    """Evaluate a three-valued predicate, doubling precision until decided.

    ``predicate(bits)`` returns True/False when the comparison is certified at
    that precision and None when the intervals still overlap.
    """
    bits = precision_bits
    for _ in range(max_doublings + 1):
        out = predicate(bits)
        if out is not None:
            return out
        bits *= 2
    raise IndeterminateComparisonError(
        f"comparison undecided after {max_doublings} precision doublings "
        f"(final precision {bits // 2} bits); raise precision_bits explicitly"
    )


# -- integer square root -------------------------------------------------------


def isqrt_floor_plus_one(sigma2: Fraction) -> int:
    """Least positive integer t with t*t > sigma2 (exact, rational-only)."""
    sigma2 = Fraction(sigma2)
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    t = math.isqrt(sigma2.numerator // sigma2.denominator)
    while t * t * sigma2.denominator <= sigma2.numerator:
        t += 1
    return max(t, 1)


# -- certified series summation -------------------------------------------------


@dataclass(frozen=True)
class SeriesSpec:
    """An infinite series with a certified bound on omitted tails.

    ``term(x)`` is the x-th term (interval or exact rational).  ``tail_bound(B)``
    must certifiably dominate the absolute sum of ALL terms with index beyond B
    (for two-sided series: both ``x > B`` and ``x < -B``).  ``two_sided`` sums
    over all integers; otherwise summation runs upward from ``start``.
    """

    term: Callable[[int], ScalarLike]
    tail_bound: Callable[[int], ScalarLike]
    two_sided: bool = True
    start: int = 0


def _upper_of(value: ScalarLike) -> Fraction:
    if isinstance(value, CertifiedInterval):
        return value.hi
    return Fraction(value)


def sum_series(
    spec: SeriesSpec,
    target_abs_error,
    precision_bits: int = DEFAULT_PRECISION,
) -> CertifiedInterval:
    """Sum a rapidly decaying series into a certified interval.

    The returned interval contains the exact infinite sum; its width is at most
    ``2 * target_abs_error`` plus the rounding widening of the partial sum.
    """
    target = Fraction(target_abs_error) if not isinstance(target_abs_error, CertifiedInterval) else target_abs_error.lo
    if target <= 0:
        raise ValueError("target_abs_error must be positive")

    span = 16
    while _upper_of(spec.tail_bound(spec.start + span if not spec.two_sided else span)) > target:
        span *= 2
        if span > MAX_SERIES_TERMS:
            raise SeriesConvergenceError(
                f"series cutoff exceeded {MAX_SERIES_TERMS} terms without "
                f"meeting target {float(target):g}"
            )

    total = CertifiedInterval(0, precision_bits)
    if spec.two_sided:
        total = total + spec.term(0)
        for x in range(1, span + 1):
            total = total + spec.term(x) + spec.term(-x)
        cutoff = span
    else:
        for x in range(spec.start, spec.start + span + 1):
            total = total + spec.term(x)
        cutoff = spec.start + span

    tail = spec.tail_bound(cutoff)
    tail_hi = _upper_of(tail)
    pad = CertifiedInterval.from_endpoints(-tail_hi, tail_hi, precision_bits)
    return total + pad
