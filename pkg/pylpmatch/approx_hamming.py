"""
Randomized (1 + eps)-approximate Hamming distance, the p -> 0 limit of the
randomized l_p algorithm.

At p = 0 the level kernel becomes

    ghat_i = [||x^(i) - y^(i)||_B_i > 2**i] - [||x^(i+1) - y^(i+1)||_B_i > 2**(i+1)]

which is the pointwise limit of the l_p level kernel with the convention
0**0 = 0 and x**0 = 1. Inputs keep their native alphabet.
"""

import logging
import time
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional

import numpy as np

from .approx_randomized import RandomScale, check_seed, default_reps, median_combine, scaled_power_sums
from .convolution import CorrelationStats
from .decomposition import MAX_TABLE_SIZE, DecompParams, kernel_values
from .errors import InvalidArgumentError, RangeError
from .exact_engine import DistanceArray, StringLike, check_pair

logger = logging.getLogger(__name__)

ETA_CONSTANT = 144


@dataclass(frozen=True)
class HammingKernelLevel:
    """Indicator-valued level kernel with entries in {-1, 0, 1}."""

    level: int
    M: int

    def lookup(self, a, b) -> np.ndarray:
        return kernel_values(a, b, self.level, 0.0, self.M)

    @cached_property
    def table(self) -> np.ndarray:
        if self.M > MAX_TABLE_SIZE:
            raise RangeError(
                f"refusing to materialize a {self.M}x{self.M} table; use lookup()"
            )
        symbols = np.arange(self.M)
        table = self.lookup(symbols[:, np.newaxis], symbols[np.newaxis, :]).astype(np.int8)
        table.setflags(write=False)
        return table


def build_hamming_kernel(i: int, params: DecompParams) -> HammingKernelLevel:
    params.check_level(i)
    return HammingKernelLevel(i, params.M)


def hamming_eta(eps: float, u: int) -> float:
    return eps / (ETA_CONSTANT * u)


def hamming_params(eps: float, U: int, eta: Optional[float] = None) -> DecompParams:
    if eta is None:
        eta = hamming_eta(eps, U.bit_length() - 1)
    return DecompParams.build(0.0, eps, U, eta, scaled=True)


def approx_hamming_single(
    T: StringLike,
    P: StringLike,
    eps: float,
    scale: RandomScale,
    eta: Optional[float] = None,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
    workers: int = 1,
) -> DistanceArray:
    """One scaled run; level sums rounded to integers and clipped to [0, m]."""
    _check_eps(eps)
    T, P = check_pair(T, P)
    params = hamming_params(eps, max(T.U, P.U), eta)
    sums = scaled_power_sums(
        T, P, params, scale, block_len, stats, workers,
        kernel_factory=build_hamming_kernel,
    )
    return DistanceArray(np.clip(np.rint(sums), 0, len(P)), "count")


def approx_hamming(
    T: StringLike,
    P: StringLike,
    eps: float,
    seed: int = 0,
    t: Optional[int] = None,
    eta: Optional[float] = None,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
    workers: int = 1,
) -> DistanceArray:
    """
    Approximate Hamming text-to-pattern distance.

    Args:
        T: Text symbols.
        P: Pattern symbols.
        eps: Target relative error in (0, 1].
        seed: Seed; run k draws its scale from (seed, k).
        t: Odd number of runs; defaults to 2 * ceil(log2 n) + 1.
        eta: Optional override of eta = eps / (144 log U).

    Returns:
        DistanceArray: Per-position median counts.
    """
    _check_eps(eps)
    check_seed(seed)
    T, P = check_pair(T, P)
    if t is None:
        t = default_reps(len(T))
    if t < 1 or t % 2 == 0:
        raise InvalidArgumentError(f"repetition count t must be odd and >= 1, got {t}")
    params = hamming_params(eps, max(T.U, P.U), eta)
    started = time.perf_counter()
    runs: List[np.ndarray] = []
    for run in range(t):
        scale = RandomScale.draw(seed, run, params.u)
        sums = scaled_power_sums(
            T, P, params, scale, block_len, stats, workers,
            kernel_factory=build_hamming_kernel,
        )
        runs.append(np.clip(np.rint(sums), 0, len(P)))
    values = median_combine(runs)
    logger.info(
        "approx-hamming: n=%d m=%d eps=%g eta=1/%d t=%d seed=%d in %.3fs",
        len(T), len(P), eps, params.M, t, seed, time.perf_counter() - started,
    )
    return DistanceArray(values, "count")


def _check_eps(eps: float) -> None:
    if not 0 < eps <= 1:
        raise InvalidArgumentError(f"eps must lie in (0, 1], got {eps}")
