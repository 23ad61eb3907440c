"""
Deterministic (1 + eps)-approximate l_p text-to-pattern distance for p >= 1.

Every level i of the decomposition is a correlation over the reduced
alphabet of size 1/eta with eta = eps / 128; the level arrays are summed
per position and the 1/p root is taken at the end.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Tuple

import numpy as np

from .convolution import CorrelationStats
from .decomposition import DecompParams, build_level_kernel, reduce_numerators, to_numerators
from .errors import InvalidArgumentError
from .exact_engine import (
    DistanceArray,
    IntString,
    StringLike,
    alphabet_correlate,
    check_pair,
    window_power_sums,
)

logger = logging.getLogger(__name__)

ETA_DIVISOR = 128
# windows whose level total is within this many noise budgets per eps of 0
# are recomputed directly
NEAR_MATCH_FACTOR = 4


@dataclass(frozen=True)
class ApproxRequest:
    """Inputs of the deterministic algorithm; validated on construction."""

    T: IntString
    P: IntString
    p: float
    eps: float

    def __post_init__(self):
        T, P = check_pair(self.T, self.P)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "P", P)
        if self.p < 1:
            raise InvalidArgumentError(
                f"the deterministic algorithm needs p >= 1, got p={self.p}; "
                "use the randomized algorithm for 0 < p < 1"
            )
        if not 0 < self.eps <= 1 / self.p:
            raise InvalidArgumentError(
                f"eps must lie in (0, 1/p] = (0, {1 / self.p:g}], got {self.eps}"
            )
        if self.eps < 4 / self.U:
            raise InvalidArgumentError(
                f"eps={self.eps} is below 4/U={4 / self.U:g}; at this precision "
                "the exact engines (brute force or exact_even_p) are the right tool"
            )

    @property
    def U(self) -> int:
        return max(self.T.U, self.P.U)


def deterministic_eta(eps: float) -> float:
    return eps / ETA_DIVISOR


def _compensated_sum(rows: List[np.ndarray]) -> np.ndarray:
    total = np.zeros_like(rows[0])
    compensation = np.zeros_like(rows[0])
    for row in rows:
        step = total + row
        compensation += np.where(
            np.abs(total) >= np.abs(row), (total - step) + row, (row - step) + total
        )
        total = step
    return total + compensation


def level_power_totals(
    text_numerators: np.ndarray,
    pattern_numerators: np.ndarray,
    params: DecompParams,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
    workers: int = 1,
    dense: bool = False,
    kernel_factory: Callable[[int, DecompParams], Any] = build_level_kernel,
) -> Tuple[np.ndarray, float]:
    """
    Sum over all levels of the text-to-pattern distance under ghat_i,
    together with the summed correlation error budget of those levels.

    Inputs are numerators over 2**u. Levels are summed from the lowest
    upward with compensated summation; the totals are returned raw.
    With ``dense`` every one of the M reduced characters is correlated,
    not only those present in the text. ``kernel_factory(i, params)`` must
    return an object with a vectorized ``lookup(a, b)``.
    """
    text_numerators = np.asarray(text_numerators, dtype=np.int64)
    pattern_numerators = np.asarray(pattern_numerators, dtype=np.int64)

    def run_level(i: int) -> Tuple[np.ndarray, float]:
        kernel = kernel_factory(i, params)
        return alphabet_correlate(
            reduce_numerators(text_numerators, i, params),
            reduce_numerators(pattern_numerators, i, params),
            kernel.lookup,
            block_len=block_len,
            stats=stats,
            alphabet_size=params.M if dense else None,
        )

    levels = list(params.levels)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run_level, levels))
    else:
        results = [run_level(i) for i in levels]

    totals = _compensated_sum([row for row, _ in results])
    noise = sum(bound for _, bound in results)
    return totals, noise


def level_power_sums(*args, **kwargs) -> np.ndarray:
    """
    ``level_power_totals`` with totals inside the error budget set to 0 and
    negative totals clamped.
    """
    totals, noise = level_power_totals(*args, **kwargs)
    totals[np.abs(totals) <= noise] = 0.0
    return np.maximum(totals, 0.0)


def settle_near_matches(
    T: IntString, P: IntString, p: float, totals: np.ndarray, noise: float, eps: float
) -> np.ndarray:
    """
    Clamp level totals at 0 and recompute directly every window whose total
    lies within NEAR_MATCH_FACTOR * noise / eps of zero.

    The correlation error budget grows with U**p, so for large alphabets it
    can exceed eps times a small true distance; those windows cost O(m) each.
    """
    values = np.maximum(totals, 0.0)
    flagged = np.flatnonzero(np.abs(totals) <= NEAR_MATCH_FACTOR * noise / eps)
    if flagged.size:
        values[flagged] = window_power_sums(T, P, p, flagged)
        logger.debug("recomputed %d near-match windows directly", flagged.size)
    return values


def approx_lp_ge1(
    req: ApproxRequest,
    eta: Optional[float] = None,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
    workers: int = 1,
    dense: bool = False,
) -> DistanceArray:
    """
    (1 + eps)-approximate l_p distances for p >= 1.

    :param req: Validated request.
    :param eta: Optional override of eta = eps / 128 (benchmarking only).
    :param block_len: Optional correlation block length.
    :param stats: Optional counters to update.
    :param workers: Threads used to run levels in parallel.
    :param dense: Correlate all 1/eta reduced characters of every level.
    :return: DistanceArray on the ``lp`` scale.
    """
    if eta is None:
        eta = deterministic_eta(req.eps)
    elif eta > deterministic_eta(req.eps):
        logger.warning(
            "eta=%g is coarser than eps/%d=%g; the (1 + eps) guarantee does not apply",
            eta, ETA_DIVISOR, deterministic_eta(req.eps),
        )
    params = DecompParams.build(req.p, req.eps, req.U, eta)
    started = time.perf_counter()
    totals, noise = level_power_totals(
        to_numerators(req.T.symbols, params),
        to_numerators(req.P.symbols, params),
        params,
        block_len=block_len,
        stats=stats,
        workers=workers,
        dense=dense,
    )
    sums = settle_near_matches(req.T, req.P, req.p, totals, noise, req.eps)
    logger.info(
        "approx-det: n=%d m=%d p=%g eps=%g eta=1/%d levels=[%d, %d] in %.3fs",
        len(req.T), len(req.P), req.p, req.eps, params.M,
        params.level_lo, params.level_hi, time.perf_counter() - started,
    )
    return DistanceArray(sums, "power", req.p).root()


def approx_lp(
    T: StringLike, P: StringLike, p: float, eps: float, **options
) -> DistanceArray:
    """Shorthand for ``approx_lp_ge1(ApproxRequest(T, P, p, eps), **options)``."""
    return approx_lp_ge1(ApproxRequest(T, P, p, eps), **options)
