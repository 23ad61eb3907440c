"""
Bit-level telescoping decomposition of ``|x - y|**p``.

Values are fixed point with ``u`` fractional bits, stored as integer
numerators over ``2**u``; rounding and modular norms are therefore exact.
For a level i the family is

    F_i(x, y)  = max(0, |x - y| - 2**i) ** p
    G_i(x, y)  = F_i(x^(i), y^(i))              g_i = G_i - G_(i+1)
    ghat_i     = same as g_i with |.| replaced by the norm modulo B_i = 2**i / eta

``ghat_i`` only depends on ``(x^(i) mod B_i) / 2**i``, a symbol of the
reduced alphabet of size M = 1/eta, which is what makes every level a
small-alphabet correlation. M is a power of two >= 8, so B_i is a multiple
of 2**(i+1) and one reduced symbol serves both terms of ``ghat_i``.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np

from .errors import InvalidArgumentError, RangeError

logger = logging.getLogger(__name__)

MIN_ALPHABET = 8
# numerators of scaled values (< 9 * U * 2**u) must fit in int64
MAX_FRAC_BITS = 28
# largest reduced alphabet for which LevelKernel.table is materialized
MAX_TABLE_SIZE = 4096
# scaling by r < 9 needs F_i to vanish up to 9 * U < 2**(u + 4)
SCALED_EXTRA_LEVELS = 4


@dataclass(frozen=True)
class FixedPoint:
    """Nonnegative value ``numerator / 2**frac_bits``."""

    numerator: int
    frac_bits: int

    def __post_init__(self):
        if self.frac_bits < 0:
            raise InvalidArgumentError(f"frac_bits must be >= 0, got {self.frac_bits}")
        if self.numerator < 0:
            raise InvalidArgumentError("fixed-point values are nonnegative")

    @classmethod
    def of(cls, value: Union[int, float, Fraction], frac_bits: int) -> "FixedPoint":
        scaled = Fraction(value) * (1 << frac_bits)
        if scaled.denominator != 1:
            raise InvalidArgumentError(
                f"{value} is not a multiple of 2**-{frac_bits}"
            )
        return cls(int(scaled), frac_bits)

    @property
    def value(self) -> float:
        return math.ldexp(self.numerator, -self.frac_bits)

    def __float__(self) -> float:
        return self.value


Number = Union[FixedPoint, int, float, Fraction]


@dataclass(frozen=True)
class DecompParams:
    """
    Parameters of one decomposition run.

    ``eta`` is always ``1 / M`` with M a power of two >= 8. ``level_hi`` is
    ``u`` for integer inputs and ``u + 4`` for inputs scaled by r < 9.
    """

    p: float
    eps: float
    eta: float
    U: int
    u: int
    level_lo: int
    level_hi: int

    def __post_init__(self):
        M = round(1 / self.eta)
        if M < MIN_ALPHABET or M & (M - 1) or abs(M * self.eta - 1) > 1e-12:
            raise InvalidArgumentError(
                f"1/eta must be a power of two >= {MIN_ALPHABET}, got eta={self.eta}"
            )
        if not self.level_lo <= 0 <= self.level_hi:
            raise InvalidArgumentError("level range must contain 0")
        if self.U != 1 << self.u:
            raise InvalidArgumentError(f"U must equal 2**u, got U={self.U}, u={self.u}")
        if self.p < 0:
            raise InvalidArgumentError(f"p must be >= 0, got {self.p}")

    @classmethod
    def build(
        cls,
        p: float,
        eps: float,
        U: int,
        eta: float,
        scaled: bool = False,
    ) -> "DecompParams":
        """
        Round ``eta`` down to the next ``1 / 2**k`` (k >= 3) and fix the
        level range for U.
        """
        if U < 2 or U & (U - 1):
            raise InvalidArgumentError(f"U must be a power of two >= 2, got {U}")
        if not eta > 0:
            raise InvalidArgumentError(f"eta must be positive, got {eta}")
        if not eps > 0:
            raise InvalidArgumentError(f"eps must be positive, got {eps}")
        u = U.bit_length() - 1
        if u > MAX_FRAC_BITS:
            raise RangeError(f"U = 2**{u} exceeds the supported 2**{MAX_FRAC_BITS}")
        M = max(MIN_ALPHABET, 1 << max(0, math.ceil(1 / eta) - 1).bit_length())
        level_hi = u + SCALED_EXTRA_LEVELS if scaled else u
        return cls(float(p), float(eps), 1.0 / M, U, u, -u, level_hi)

    @property
    def M(self) -> int:
        return round(1 / self.eta)

    @property
    def levels(self) -> range:
        return range(self.level_lo, self.level_hi + 1)

    def modulus(self, i: int) -> FixedPoint:
        """B_i = 2**i / eta as a fixed-point value."""
        self.check_level(i)
        return FixedPoint(self.M << (i + self.u), self.u)

    def check_level(self, i: int) -> None:
        if not self.level_lo <= i <= self.level_hi:
            raise InvalidArgumentError(
                f"level {i} outside [{self.level_lo}, {self.level_hi}]"
            )


@dataclass(frozen=True)
class LevelKernel:
    """ghat_i over the reduced alphabet: ``table[a][b]`` for a, b in [0, M)."""

    level: int
    M: int
    p: float

    def lookup(self, a, b) -> np.ndarray:
        return kernel_values(a, b, self.level, self.p, self.M)

    @cached_property
    def table(self) -> np.ndarray:
        if self.M > MAX_TABLE_SIZE:
            raise RangeError(
                f"refusing to materialize a {self.M}x{self.M} table; use lookup()"
            )
        symbols = np.arange(self.M)
        table = self.lookup(symbols[:, np.newaxis], symbols[np.newaxis, :])
        table.setflags(write=False)
        return table


def lp_power(values, p: float) -> np.ndarray:
    """
    Elementwise ``values**p`` for nonnegative values with ``0**p = 0``; at
    ``p = 0`` this is the indicator of a nonzero value.
    """
    values = np.asarray(values, dtype=np.float64)
    if p == 0:
        return (values > 0).astype(np.float64)
    out = np.zeros_like(values)
    np.power(values, p, out=out, where=values > 0)
    return out


def _pair(x: Number, y: Number, min_bits: int = 0) -> Tuple[int, int, int]:
    """Return numerators of x and y over a common 2**bits and the bits."""
    bits = min_bits
    for value in (x, y):
        if isinstance(value, FixedPoint):
            bits = max(bits, value.frac_bits)
    numerators = []
    for value in (x, y):
        if isinstance(value, FixedPoint):
            numerators.append(value.numerator << (bits - value.frac_bits))
        else:
            numerators.append(FixedPoint.of(value, bits).numerator)
    return numerators[0], numerators[1], bits


def _round_numerator(numerator, shift: int):
    return (numerator >> shift) << shift


def _excess(distance: int, i: int, bits: int) -> float:
    """max(0, distance / 2**bits - 2**i) as a float."""
    if i + bits >= 0:
        excess = distance - (1 << (i + bits))
        return math.ldexp(max(0, excess), -bits)
    return max(0.0, math.ldexp(distance, -bits) - 2.0 ** i)


def _power(value: float, p: float) -> float:
    return float(lp_power(value, p))


def round_down(x: FixedPoint, i: int) -> FixedPoint:
    """x^(i): the largest multiple of 2**i that is <= x."""
    if i < -x.frac_bits:
        raise InvalidArgumentError(
            f"level {i} is finer than the 2**-{x.frac_bits} grid"
        )
    return FixedPoint(_round_numerator(x.numerator, i + x.frac_bits), x.frac_bits)


def _mod_norm_numerator(r: int, c: int) -> int:
    rest = r % c
    return min(rest, c - rest)


def mod_norm(r: Number, c: Number) -> FixedPoint:
    """
    ||r||_c = min(r mod c, c - (r mod c)).

    :param r: Value to reduce.
    :param c: Positive modulus.
    :return: A fixed-point value in [0, c/2].
    """
    r_num, c_num, bits = _pair(r, c)
    if c_num <= 0:
        raise InvalidArgumentError(f"modulus must be positive, got {c}")
    return FixedPoint(_mod_norm_numerator(r_num, c_num), bits)


def F(i: int, x: Number, y: Number, p: float) -> float:
    """F_i(x, y) = max(0, |x - y| - 2**i) ** p."""
    x_num, y_num, bits = _pair(x, y)
    return _power(_excess(abs(x_num - y_num), i, bits), p)


def f(i: int, x: Number, y: Number, p: float) -> float:
    """f_i = F_i - F_(i+1) on unrounded inputs."""
    return F(i, x, y, p) - F(i + 1, x, y, p)


def g(i: int, x: Number, y: Number, p: float) -> float:
    """g_i(x, y) = F_i(x^(i), y^(i)) - F_(i+1)(x^(i+1), y^(i+1))."""
    has_grid = isinstance(x, FixedPoint) or isinstance(y, FixedPoint)
    x_num, y_num, bits = _pair(x, y, min_bits=0 if has_grid else max(0, -i))
    if i < -bits:
        raise InvalidArgumentError(f"level {i} is finer than the 2**-{bits} grid")
    lo = abs(_round_numerator(x_num, i + bits) - _round_numerator(y_num, i + bits))
    hi = abs(_round_numerator(x_num, i + 1 + bits) - _round_numerator(y_num, i + 1 + bits))
    return _power(_excess(lo, i, bits), p) - _power(_excess(hi, i + 1, bits), p)


def g_hat(i: int, x: Number, y: Number, params: DecompParams) -> float:
    """
    ghat_i: g_i with both distances taken modulo B_i = 2**i / eta.

    :param i: Level in ``params.levels``.
    :param x: First value, on the 2**-u grid.
    :param y: Second value, on the 2**-u grid.
    :param params: Decomposition parameters.
    """
    params.check_level(i)
    x_num, y_num, bits = _pair(x, y, min_bits=params.u)
    if bits != params.u:
        raise InvalidArgumentError(f"values must lie on the 2**-{params.u} grid")
    shift = i + bits
    modulus = params.M << shift
    lo = _mod_norm_numerator(
        _round_numerator(x_num, shift) - _round_numerator(y_num, shift), modulus
    )
    hi = _mod_norm_numerator(
        _round_numerator(x_num, shift + 1) - _round_numerator(y_num, shift + 1), modulus
    )
    return _power(_excess(lo, i, bits), params.p) - _power(_excess(hi, i + 1, bits), params.p)


def reduce_symbol(x: Number, i: int, params: DecompParams) -> int:
    """The reduced symbol (x^(i) mod B_i) / 2**i in [0, M)."""
    params.check_level(i)
    x_num, _, bits = _pair(x, 0, min_bits=params.u)
    if bits != params.u:
        raise InvalidArgumentError(f"values must lie on the 2**-{params.u} grid")
    return (x_num >> (i + bits)) % params.M


def reduce_numerators(numerators, i: int, params: DecompParams) -> np.ndarray:
    """Vectorized ``reduce_symbol`` over numerators on the 2**-u grid."""
    params.check_level(i)
    numerators = np.asarray(numerators, dtype=np.int64)
    return (numerators >> (i + params.u)) & (params.M - 1)


def _wrap(d, M: int):
    rest = np.mod(d, M)
    return np.minimum(rest, M - rest)


def kernel_values(a, b, i: int, p: float, M: int) -> np.ndarray:
    """
    ghat_i evaluated on reduced symbols, broadcasting over a and b.

    Distances are counted in units of 2**i; the second term rounds both
    symbols down to even, which is x^(i+1) modulo B_i.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    unit = 2.0 ** i
    near = _wrap(a - b, M)
    far = _wrap((a & ~1) - (b & ~1), M)
    first = lp_power(np.maximum(near - 1, 0) * unit, p)
    second = lp_power(np.maximum(far - 2, 0) * unit, p)
    return first - second


def build_level_kernel(i: int, params: DecompParams) -> LevelKernel:
    """Kernel of level i over the reduced alphabet of size M = 1/eta."""
    params.check_level(i)
    logger.debug("level kernel i=%d M=%d p=%g", i, params.M, params.p)
    return LevelKernel(i, params.M, params.p)


def telescope_check(x: Number, y: Number, params: DecompParams) -> Tuple[float, float]:
    """
    Return ``(sum_i f_i(x, y), sum_i g_i(x, y))`` over the level range.

    Both sums telescope to ``F(-u, x, y)``.
    """
    p = params.p
    f_sum = math.fsum(f(i, x, y, p) for i in params.levels)
    g_sum = math.fsum(g(i, x, y, p) for i in params.levels)
    return f_sum, g_sum


def to_numerators(symbols, params: DecompParams, scale: Optional[int] = None) -> np.ndarray:
    """
    Numerators over 2**u of integer symbols, optionally multiplied by the
    fixed-point factor ``scale / 2**u``.
    """
    symbols = np.asarray(symbols, dtype=np.int64)
    if scale is None:
        return symbols << params.u
    return symbols * np.int64(scale)
