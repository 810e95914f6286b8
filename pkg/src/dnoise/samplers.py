"""Exact samplers for Bernoulli(exp(-gamma)), discrete Laplace, and discrete Gaussian.

Every sampler touches only integer/rational arithmetic and a
:class:`~dnoise.randcore.BitSource`; no real-valued exp/log/sqrt is ever
evaluated, so the output laws are exact on a finite computer.  Each call
reports :class:`SampleStats` (outer-loop iterations and bits drawn).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .numeric import isqrt_floor_plus_one
from .randcore import BitSource, _bernoulli_ratio, uniform_below


@dataclass(frozen=True)
class DLapParams:
    """Scale t/s for the discrete Laplace; both parts positive integers."""

    s: int
    t: int

    def __post_init__(self):
        if not (isinstance(self.s, int) and self.s >= 1):
            raise ValueError(f"s must be a positive integer, got {self.s}")
        if not (isinstance(self.t, int) and self.t >= 1):
            raise ValueError(f"t must be a positive integer, got {self.t}")

    @property
    def scale(self) -> Fraction:
        return Fraction(self.t, self.s)


@dataclass(frozen=True)
class DGaussParams:
    sigma2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "sigma2", Fraction(self.sigma2))
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")


@dataclass(frozen=True)
class ScaledDGaussParams:
    """Discrete Gaussian on the grid mu + alpha*Z; mu must sit on the grid."""

    alpha: Fraction
    mu: Fraction
    sigma2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "mu", Fraction(self.mu))
        object.__setattr__(self, "sigma2", Fraction(self.sigma2))
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if (self.mu / self.alpha).denominator != 1:
            raise ValueError(f"mu={self.mu} is not an integer multiple of alpha={self.alpha}")


@dataclass(frozen=True)
class SampleStats:
    outer_iterations: int
    bits_consumed: int
    truncated: bool = False


class IterationCapExceeded(RuntimeError):
    """Internal signal: the optional outer-iteration cap was hit."""


def _bernoulli_exp_unit(src: BitSource, num: int, den: int) -> int:
    # Bernoulli(exp(-num/den)) for 0 <= num <= den, von Neumann parity loop.
    if num == 0:
        return 1
    k = 1
    while _bernoulli_ratio(src, num, den * k):
        k += 1
    return k & 1


def _bernoulli_exp_ratio(src: BitSource, num: int, den: int) -> int:
    # Bernoulli(exp(-num/den)) for num/den >= 0, iterative over unit chunks.
    whole, rest = divmod(num, den)
    for _ in range(whole):
        if not _bernoulli_exp_unit(src, 1, 1):
            return 0
    if rest == 0:
        return 1
    return _bernoulli_exp_unit(src, rest, den)


def sample_bernoulli_exp(src: BitSource, gamma: Fraction) -> int:
    """Return 1 with probability exactly exp(-gamma), gamma >= 0 rational."""
    gamma = Fraction(gamma)
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    return _bernoulli_exp_ratio(src, gamma.numerator, gamma.denominator)


def sample_geometric_unit(src: BitSource) -> int:
    """Geometric(1 - 1/e): Pr[V=k] = (1-e^-1) e^-k for k = 0, 1, 2, ..."""
    v = 0
    while _bernoulli_exp_unit(src, 1, 1):
        v += 1
    return v


def _dlaplace_once(src: BitSource, s: int, t: int, max_outer: int | None) -> tuple[int, int]:
    # Returns (value, outer_iterations); raises IterationCapExceeded past the cap.
    iterations = 0
    bits = src.bits
    while True:
        iterations += 1
        if max_outer is not None and iterations > max_outer:
            raise IterationCapExceeded
        u = uniform_below(src, t)
        if not _bernoulli_exp_unit(src, u, t):
            continue
        v = 0
        while _bernoulli_exp_unit(src, 1, 1):
            v += 1
        y = (u + t * v) // s
        b = bits(1)
        if b and y == 0:
            continue
        return (-y if b else y), iterations


def sample_dlaplace(
    src: BitSource,
    params: DLapParams,
    max_outer_iterations: int | None = None,
) -> tuple[int, SampleStats]:
    """One exact draw from the discrete Laplace with scale t/s.

    Pr[Z=z] = (e^(s/t)-1)/(e^(s/t)+1) * e^(-|z|s/t).  With a cap set, hitting
    it returns 0 flagged ``truncated`` — the caller accepts the documented
    additive privacy degradation delta' = Pr[cap exceeded].
    """
    start_bits = src.bits_consumed
    try:
        value, iterations = _dlaplace_once(src, params.s, params.t, max_outer_iterations)
    except IterationCapExceeded:
        return 0, SampleStats(max_outer_iterations, src.bits_consumed - start_bits, truncated=True)
    return value, SampleStats(iterations, src.bits_consumed - start_bits)


def sample_dgauss(
    src: BitSource,
    params: DGaussParams,
    max_outer_iterations: int | None = None,
) -> tuple[int, SampleStats]:
    """One exact draw from the discrete Gaussian with variance parameter sigma2.

    Rejection from a discrete Laplace of scale t = floor(sigma)+1; the
    acceptance probability exp(-(|Y| - sigma2/t)^2 / (2 sigma2)) is assembled
    as one exact rational, so the accepted law is exactly proportional to
    e^(-y^2/(2 sigma2)).
    """
    sigma2 = params.sigma2
    p, q = sigma2.numerator, sigma2.denominator
    t = isqrt_floor_plus_one(sigma2)
    # acceptance exponent (|y| - sigma2/t)^2/(2 sigma2) = (|y| q t - p)^2 / (2 p q t^2)
    den = 2 * p * q * t * t
    qt = q * t
    start_bits = src.bits_consumed
    iterations = 0
    while True:
        iterations += 1
        if max_outer_iterations is not None and iterations > max_outer_iterations:
            return 0, SampleStats(max_outer_iterations, src.bits_consumed - start_bits, truncated=True)
        y, _ = _dlaplace_once(src, 1, t, None)
        num = (abs(y) * qt - p) ** 2
        if _bernoulli_exp_ratio(src, num, den):
            return y, SampleStats(iterations, src.bits_consumed - start_bits)


def sample_dgauss_scaled(
    src: BitSource,
    params: ScaledDGaussParams,
    max_outer_iterations: int | None = None,
) -> tuple[Fraction, SampleStats]:
    """Draw from the discrete Gaussian over mu + alpha*Z with variance param sigma2.

    Equivalent to alpha*X + mu for X drawn on the integers with parameter
    sigma2/alpha^2.
    """
    inner = DGaussParams(params.sigma2 / (params.alpha * params.alpha))
    x, stats = sample_dgauss(src, inner, max_outer_iterations)
    return params.alpha * x + params.mu, stats
