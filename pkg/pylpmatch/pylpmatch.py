import logging
import time
from typing import Optional, Dict, Any

import numpy as np

from .config import Settings, load_settings, save_settings
from .convolution import CorrelationStats, correlate
from .errors import InvalidArgumentError
from .exact_engine import (
    DistanceArray,
    StringLike,
    brute_force_hamming,
    brute_force_lp,
    check_pair,
    exact_even_p,
    small_alphabet_distance,
)
from .approx_deterministic import ApproxRequest, approx_lp_ge1
from .approx_randomized import AmplifiedRequest, RandomScale, approx_lp_le1, approx_lp_le1_single
from .approx_hamming import approx_hamming
from .report import ApproxReport, build_report

logger = logging.getLogger(__name__)

ALGORITHMS = (
    "exact-brute",
    "exact-alphabet",
    "exact-even-p",
    "approx-det",
    "approx-rand",
    "approx-hamming",
)
RANDOMIZED = ("approx-rand", "approx-hamming")
# n * m above which the brute-force oracle is refused
ORACLE_LIMIT = 10 ** 8
# relative tolerance used when verifying an exact engine
EXACT_TOLERANCE = 1e-6


def resolve_algorithm(p: float, algorithm: str = "auto") -> str:
    """
    Pick the engine for p, or check that the requested one supports p.

    p = 0 means Hamming distance.
    """
    if p < 0:
        raise InvalidArgumentError(f"p must be >= 0, got {p}")
    if algorithm == "auto":
        if p == 0:
            return "approx-hamming"
        return "approx-rand" if p < 1 else "approx-det"
    if algorithm not in ALGORITHMS:
        raise InvalidArgumentError(
            f"unknown algorithm {algorithm!r}; choose one of {', '.join(ALGORITHMS)}"
        )
    if algorithm == "exact-even-p" and (p != int(p) or p < 2 or int(p) % 2):
        raise InvalidArgumentError("exact-even-p needs an even integer p >= 2")
    if algorithm == "approx-det" and p < 1:
        raise InvalidArgumentError("approx-det needs p >= 1; use approx-rand for 0 < p < 1")
    if algorithm == "approx-rand" and not 0 < p < 1:
        raise InvalidArgumentError("approx-rand needs 0 < p < 1")
    if algorithm == "approx-hamming" and p != 0:
        raise InvalidArgumentError("approx-hamming computes Hamming distance; pass p=0")
    return algorithm


class pyLpMatch:
    def __init__(
        self,
        workers: Optional[int] = None,
        block_len: Optional[int] = None,
        seed: Optional[int] = None,
        output_format: Optional[str] = None,
        env_path: str = ".env",
        save_config: bool = False,
    ):
        """
        Initialize the pyLpMatch instance.

        :param workers: Threads used for level parallelism.
        :param block_len: Override of the correlation block length.
        :param seed: Default seed of randomized algorithms.
        :param output_format: Default output format (csv or json).
        :param env_path: Path to the environment file.
        :param save_config: Whether to write the resolved settings back to the environment file.
        """
        self.env_path = env_path
        self.settings: Settings = load_settings(
            env_path,
            workers=workers,
            block_len=block_len,
            seed=seed,
            output_format=output_format,
        )
        self.stats = CorrelationStats()
        if save_config:
            save_settings(self.settings, env_path)

    @property
    def workers(self) -> int:
        return self.settings.workers

    @property
    def block_len(self) -> Optional[int]:
        return self.settings.block_len

    def _engine_options(self) -> Dict[str, Any]:
        return {"block_len": self.block_len, "stats": self.stats}

    def correlate(self, text, pattern) -> np.ndarray:
        return correlate(text, pattern, **self._engine_options())

    def brute_force_lp(self, T: StringLike, P: StringLike, p: float) -> DistanceArray:
        return brute_force_lp(T, P, p)

    def brute_force_hamming(self, T: StringLike, P: StringLike) -> DistanceArray:
        return brute_force_hamming(T, P)

    def small_alphabet_distance(self, T, P, reduce_t, reduce_p, kernel, M: int) -> DistanceArray:
        return small_alphabet_distance(
            T, P, reduce_t, reduce_p, kernel, M, **self._engine_options()
        )

    def exact_even_p(self, T: StringLike, P: StringLike, p: int) -> DistanceArray:
        return exact_even_p(T, P, p, **self._engine_options())

    def approx_lp_ge1(
        self, T: StringLike, P: StringLike, p: float, eps: float, eta: Optional[float] = None,
        dense: bool = False,
    ) -> DistanceArray:
        return approx_lp_ge1(
            ApproxRequest(T, P, p, eps), eta=eta, workers=self.workers, dense=dense,
            **self._engine_options(),
        )

    def approx_lp_le1_single(
        self, T: StringLike, P: StringLike, p: float, eps: float,
        scale: RandomScale, eta: Optional[float] = None,
    ) -> DistanceArray:
        return approx_lp_le1_single(
            T, P, p, eps, scale, eta=eta, workers=self.workers, **self._engine_options()
        )

    def approx_lp_le1(
        self, T: StringLike, P: StringLike, p: float, eps: float,
        t: Optional[int] = None, seed: Optional[int] = None, eta: Optional[float] = None,
    ) -> DistanceArray:
        seed = self.settings.seed if seed is None else seed
        return approx_lp_le1(
            AmplifiedRequest(T, P, p, eps, t, seed),
            eta=eta, workers=self.workers, **self._engine_options(),
        )

    def approx_hamming(
        self, T: StringLike, P: StringLike, eps: float,
        t: Optional[int] = None, seed: Optional[int] = None, eta: Optional[float] = None,
    ) -> DistanceArray:
        seed = self.settings.seed if seed is None else seed
        return approx_hamming(
            T, P, eps, seed=seed, t=t, eta=eta, workers=self.workers, **self._engine_options()
        )

    def _exact_alphabet(self, T, P, p: float) -> DistanceArray:
        U = max(T.U, P.U)
        if p == 0:
            kernel = lambda a, b: (a != b).astype(np.float64)
        else:
            kernel = lambda a, b: np.power(np.abs(a - b).astype(np.float64), p)
        sums = small_alphabet_distance(T, P, None, None, kernel, U, **self._engine_options())
        # correlation noise can leave tiny negatives
        values = np.maximum(sums.values, 0.0)
        if p == 0:
            return DistanceArray(np.rint(values), "count")
        return DistanceArray(values, "power", p).root()

    def distance(
        self,
        T: StringLike,
        P: StringLike,
        p: float,
        eps: Optional[float] = None,
        algorithm: str = "auto",
        t: Optional[int] = None,
        seed: Optional[int] = None,
        eta: Optional[float] = None,
        dense: bool = False,
    ) -> DistanceArray:
        """
        Compute the text-to-pattern distance with the chosen engine.

        :param T: Text over [U].
        :param P: Pattern over [U].
        :param p: Exponent; 0 selects Hamming distance.
        :param eps: Relative error of approximate engines.
        :param algorithm: One of ALGORITHMS or ``auto``.
        :param t: Repetitions of randomized engines.
        :param seed: Seed of randomized engines.
        :param eta: Override of the engine's eta.
        :param dense: approx-det only; correlate every reduced character.
        :return: l_p values, or mismatch counts when p = 0.
        """
        algorithm = resolve_algorithm(p, algorithm)
        if algorithm.startswith("approx") and eps is None:
            raise InvalidArgumentError(f"{algorithm} needs eps")
        T, P = check_pair(T, P)

        if algorithm == "exact-brute":
            if p == 0:
                return brute_force_hamming(T, P)
            return brute_force_lp(T, P, p).root()
        if algorithm == "exact-alphabet":
            return self._exact_alphabet(T, P, p)
        if algorithm == "exact-even-p":
            return self.exact_even_p(T, P, int(p)).root()
        if algorithm == "approx-det":
            return self.approx_lp_ge1(T, P, p, eps, eta=eta, dense=dense)
        if algorithm == "approx-rand":
            return self.approx_lp_le1(T, P, p, eps, t=t, seed=seed, eta=eta)
        return self.approx_hamming(T, P, eps, t=t, seed=seed, eta=eta)

    def verify(
        self,
        T: StringLike,
        P: StringLike,
        p: float,
        eps: Optional[float] = None,
        algorithm: str = "auto",
        t: Optional[int] = None,
        seed: Optional[int] = None,
        eta: Optional[float] = None,
        corrupt: Optional[float] = None,
    ) -> ApproxReport:
        """
        Run an engine next to the brute-force oracle and compare per position.

        ``corrupt`` inflates the approximation by the given factor plus one;
        it exists so the failure path can be exercised.
        Exact engines are held to EXACT_TOLERANCE when eps is not given.
        """
        T, P = check_pair(T, P)
        if len(T) * len(P) > ORACLE_LIMIT:
            raise InvalidArgumentError(
                f"n * m = {len(T) * len(P)} exceeds {ORACLE_LIMIT}; the oracle would be "
                "too slow, verify on a smaller instance"
            )
        algorithm = resolve_algorithm(p, algorithm)
        seed = self.settings.seed if seed is None else seed
        started = time.perf_counter()
        approx = self.distance(T, P, p, eps, algorithm, t=t, seed=seed, eta=eta)
        elapsed = time.perf_counter() - started
        exact = self.distance(T, P, p, algorithm="exact-brute")
        if corrupt is not None:
            approx = DistanceArray(approx.values * corrupt + 1.0, approx.scale, approx.p)
        params = {"n": len(T), "m": len(P), "p": p, "t": t, "eta": eta, "wall_time": elapsed}
        report = build_report(
            algorithm, eps if eps is not None else EXACT_TOLERANCE, exact, approx, params,
            seed=seed if algorithm in RANDOMIZED else None,
        )
        logger.info(
            "verify %s: max error %.3g, mean error %.3g, %d violations",
            algorithm, report.max_error, report.mean_error, report.violations,
        )
        return report
