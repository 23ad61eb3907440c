"""
Randomized (1 + eps)-approximate l_p distance for 0 < p < 1.

A single run multiplies both strings by a random r in [1, 9), runs the
level decomposition on the scaled fixed-point values over the extended
level range and divides the p-th power sums by r**p. A run is within
(1 +- eps) with probability 2/3; the per-position median of t independent
runs holds with high probability.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .approx_deterministic import level_power_totals, settle_near_matches
from .convolution import CorrelationStats
from .decomposition import DecompParams, FixedPoint, to_numerators
from .errors import InvalidArgumentError
from .exact_engine import DistanceArray, IntString, StringLike, check_pair

logger = logging.getLogger(__name__)

ETA_CONSTANT = 15555
SCALE_LIMIT = 9
MAX_SEED = 1 << 64


@dataclass(frozen=True)
class RandomScale:
    """The factor r = numerator / 2**frac_bits in [1, 9) of one run."""

    numerator: int
    frac_bits: int
    seed: int = 0
    run: int = 0

    def __post_init__(self):
        one = 1 << self.frac_bits
        if not one <= self.numerator < SCALE_LIMIT * one:
            raise InvalidArgumentError(
                f"scale {self.numerator}/2**{self.frac_bits} is outside [1, {SCALE_LIMIT})"
            )

    @classmethod
    def draw(cls, seed: int, run: int, frac_bits: int) -> "RandomScale":
        """
        Draw r uniformly from the 2**-frac_bits grid of [1, 9).

        The generator is keyed by ``(seed, run)`` so runs are reproducible
        and independent of execution order.
        """
        check_seed(seed)
        rng = np.random.default_rng(np.random.SeedSequence([seed, run]))
        numerator = int(rng.integers(1 << frac_bits, SCALE_LIMIT << frac_bits))
        return cls(numerator, frac_bits, seed, run)

    @classmethod
    def unit(cls, frac_bits: int) -> "RandomScale":
        return cls(1 << frac_bits, frac_bits)

    @property
    def r(self) -> FixedPoint:
        return FixedPoint(self.numerator, self.frac_bits)

    @property
    def value(self) -> float:
        return self.r.value


def check_seed(seed: int) -> None:
    if not 0 <= seed < MAX_SEED:
        raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")


def randomized_eta(eps: float, p: float, u: int) -> float:
    return eps * p / (ETA_CONSTANT * u * math.log(2))


def default_reps(n: int) -> int:
    return 2 * math.ceil(math.log2(max(n, 2))) + 1


def median_combine(runs: Sequence[np.ndarray]) -> np.ndarray:
    """Per-position median of an odd number of equally long arrays."""
    if len(runs) % 2 == 0:
        raise InvalidArgumentError(f"median needs an odd number of runs, got {len(runs)}")
    return np.median(np.vstack(runs), axis=0)


@dataclass(frozen=True)
class AmplifiedRequest:
    """Inputs of the amplified randomized algorithm; validated on construction."""

    T: IntString
    P: IntString
    p: float
    eps: float
    t: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        T, P = check_pair(self.T, self.P)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "P", P)
        _check_p(self.p)
        if not self.eps > 0:
            raise InvalidArgumentError(f"eps must be positive, got {self.eps}")
        floor = 12 * math.log(2) ** 2 / self.U
        if self.eps < floor:
            raise InvalidArgumentError(
                f"eps={self.eps} is below 12 ln(2)**2 / U = {floor:g}; "
                "use brute_force_lp at this precision"
            )
        if self.t is None:
            object.__setattr__(self, "t", default_reps(len(T)))
        if self.t < 1 or self.t % 2 == 0:
            raise InvalidArgumentError(f"repetition count t must be odd and >= 1, got {self.t}")
        check_seed(self.seed)

    @property
    def U(self) -> int:
        return max(self.T.U, self.P.U)


def _check_p(p: float) -> None:
    if not 0 < p < 1:
        raise InvalidArgumentError(
            f"the randomized algorithm needs 0 < p < 1, got p={p}; "
            "use the deterministic algorithm for p >= 1"
        )


def scaled_power_totals(
    T: IntString,
    P: IntString,
    params: DecompParams,
    scale: RandomScale,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
    workers: int = 1,
    **options,
) -> Tuple[np.ndarray, float]:
    """Raw level totals of r*T against r*P and their error budget, divided by r**p."""
    if scale.frac_bits != params.u:
        raise InvalidArgumentError(
            f"scale lives on the 2**-{scale.frac_bits} grid, expected 2**-{params.u}"
        )
    totals, noise = level_power_totals(
        to_numerators(T.symbols, params, scale.numerator),
        to_numerators(P.symbols, params, scale.numerator),
        params,
        block_len=block_len,
        stats=stats,
        workers=workers,
        **options,
    )
    factor = scale.value ** params.p
    return totals / factor, noise / factor


def scaled_power_sums(*args, **kwargs) -> np.ndarray:
    """Level sums of r*T against r*P, divided by r**p, snapped and clamped at 0."""
    totals, noise = scaled_power_totals(*args, **kwargs)
    totals[np.abs(totals) <= noise] = 0.0
    return np.maximum(totals, 0.0)


def approx_lp_le1_single(
    T: StringLike,
    P: StringLike,
    p: float,
    eps: float,
    scale: RandomScale,
    eta: Optional[float] = None,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
    workers: int = 1,
) -> DistanceArray:
    """
    One randomized run for 0 < p < 1.

    :param T: Text over [U].
    :param P: Pattern over [U].
    :param p: Exponent in (0, 1).
    :param eps: Target relative error.
    :param scale: The factor r of this run, on the 2**-u grid.
    :param eta: Optional override of eta = eps p / (15555 log U ln 2).
    :return: DistanceArray on the ``lp`` scale.
    """
    _check_p(p)
    T, P = check_pair(T, P)
    U = max(T.U, P.U)
    u = U.bit_length() - 1
    if eta is None:
        eta = randomized_eta(eps, p, u)
    params = DecompParams.build(p, eps, U, eta, scaled=True)
    totals, noise = scaled_power_totals(T, P, params, scale, block_len, stats, workers)
    sums = settle_near_matches(T, P, p, totals, noise, eps)
    return DistanceArray(sums, "power", p).root()


def approx_lp_le1(
    req: AmplifiedRequest,
    eta: Optional[float] = None,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
    workers: int = 1,
) -> DistanceArray:
    """
    Median of ``req.t`` independent runs; run k uses the scale drawn from
    ``(req.seed, k)``.
    """
    u = req.U.bit_length() - 1
    if eta is None:
        eta = randomized_eta(req.eps, req.p, u)
    params = DecompParams.build(req.p, req.eps, req.U, eta, scaled=True)
    started = time.perf_counter()
    runs: List[np.ndarray] = []
    for run in range(req.t):
        scale = RandomScale.draw(req.seed, run, params.u)
        totals, noise = scaled_power_totals(
            req.T, req.P, params, scale, block_len, stats, workers
        )
        sums = settle_near_matches(req.T, req.P, req.p, totals, noise, req.eps)
        runs.append(np.power(sums, 1.0 / req.p))
        logger.debug("run %d: r=%g", run, scale.value)
    values = median_combine(runs)
    logger.info(
        "approx-rand: n=%d m=%d p=%g eps=%g eta=1/%d t=%d seed=%d in %.3fs",
        len(req.T), len(req.P), req.p, req.eps, params.M, req.t, req.seed,
        time.perf_counter() - started,
    )
    return DistanceArray(values, "lp", req.p)
