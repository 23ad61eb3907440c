import math
from typing import Tuple

import numpy as np

from .errors import InvalidArgumentError
from .exact_engine import IntString

DISTRIBUTIONS = ("uniform", "adversarial")
# share of adversarial symbols placed next to a rounding boundary
BOUNDARY_SHARE = 0.75


def _boundary_level(u: int) -> int:
    return math.ceil(u / 2)


def _near_boundary(size: int, U: int, rng: np.random.Generator) -> np.ndarray:
    """Values k * 2**i + d with i >= u/2 and d in {-1, 0, 1}, clipped to [0, U)."""
    u = U.bit_length() - 1
    lo = _boundary_level(u)
    levels = rng.integers(lo, max(lo, u - 1) + 1, size=size)
    multiples = rng.integers(0, (U >> levels) + 1)
    offsets = rng.integers(-1, 2, size=size)
    return np.clip(multiples * (1 << levels) + offsets, 0, U - 1)


def generate_string(
    n: int, U: int, distribution: str, rng: np.random.Generator
) -> IntString:
    if distribution not in DISTRIBUTIONS:
        raise InvalidArgumentError(
            f"distribution must be one of {DISTRIBUTIONS}, got {distribution!r}"
        )
    uniform = rng.integers(0, U, size=n)
    if distribution == "uniform":
        return IntString(uniform, U)
    boundary = _near_boundary(n, U, rng)
    pick = rng.random(n) < BOUNDARY_SHARE
    return IntString(np.where(pick, boundary, uniform), U)


def generate_instance(
    n: int, m: int, U: int, distribution: str = "uniform", seed: int = 0
) -> Tuple[IntString, IntString]:
    """
    Random text and pattern over [U].

    :param n: Text length.
    :param m: Pattern length, 1 <= m <= n.
    :param U: Alphabet bound, a power of two.
    :param distribution: ``uniform`` or ``adversarial`` (values next to
        multiples of 2**i with i >= u/2).
    :param seed: Seed of the generator.
    """
    if not 1 <= m <= n:
        raise InvalidArgumentError(f"need 1 <= m <= n, got n={n}, m={m}")
    if U < 2 or U & (U - 1):
        raise InvalidArgumentError(f"U must be a power of two >= 2, got {U}")
    rng = np.random.default_rng(seed)
    text = generate_string(n, U, distribution, rng)
    pattern = generate_string(m, U, distribution, rng)
    return text, pattern


def boundary_fraction(string: IntString) -> float:
    """Share of symbols within distance 1 of a multiple of 2**ceil(u/2)."""
    if len(string) == 0:
        return 0.0
    step = 1 << _boundary_level(string.u)
    rest = string.symbols % step
    near = np.minimum(rest, step - rest) <= 1
    return float(np.mean(near))
