"""
Exact text-to-pattern distances.

The brute-force evaluators are the oracles every approximate engine is
checked against. ``small_alphabet_distance`` computes the distance under an
arbitrary kernel with one correlation per alphabet character, and
``exact_even_p`` expands ``(t - q)**p`` binomially into p + 1 correlations.
Engines return p-th powers; the 1/p root is applied by ``DistanceArray.root``.
"""

import logging
from dataclasses import dataclass
from math import comb
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .convolution import (
    MAX_BATCH_ELEMENTS,
    CorrelationStats,
    block_geometry,
    correlate_many,
    correlation_error_bound,
)
from .errors import InvalidArgumentError, RangeError

logger = logging.getLogger(__name__)

SCALES = ("power", "lp", "count")
MAX_EXACT_FLOAT = 2.0 ** 53
# relative accuracy exact_even_p keeps on every window
EXACT_RELATIVE_ERROR = 1e-6


@dataclass(frozen=True)
class IntString:
    """A string over the integer alphabet [U] with U a power of two."""

    symbols: np.ndarray
    U: int

    def __post_init__(self):
        symbols = np.asarray(self.symbols)
        if symbols.ndim != 1:
            raise InvalidArgumentError("symbols must be a one-dimensional sequence")
        if symbols.size and not np.issubdtype(symbols.dtype, np.integer):
            if not np.all(np.mod(symbols, 1) == 0):
                raise InvalidArgumentError("symbols must be integers")
        symbols = symbols.astype(np.int64)
        if self.U < 2 or self.U & (self.U - 1):
            raise InvalidArgumentError(f"U must be a power of two >= 2, got {self.U}")
        if symbols.size and (symbols.min() < 0 or symbols.max() >= self.U):
            raise InvalidArgumentError(f"symbols must lie in [0, {self.U})")
        symbols.setflags(write=False)
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def from_values(cls, values: Sequence[int], U: Optional[int] = None) -> "IntString":
        symbols = np.asarray(values, dtype=np.int64)
        if U is None:
            top = int(symbols.max()) if symbols.size else 0
            U = max(2, 1 << top.bit_length())
        return cls(symbols, U)

    @property
    def u(self) -> int:
        return self.U.bit_length() - 1

    def __len__(self) -> int:
        return int(self.symbols.size)


@dataclass(frozen=True)
class DistanceArray:
    """
    Distances of the pattern to every length-m text window.

    ``scale`` tells what the entries are: ``power`` for sums of p-th powers,
    ``lp`` for l_p values and ``count`` for mismatch counts.
    """

    values: np.ndarray
    scale: str = "power"
    p: Optional[float] = None

    def __post_init__(self):
        if self.scale not in SCALES:
            raise InvalidArgumentError(f"scale must be one of {SCALES}, got {self.scale!r}")
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def root(self) -> "DistanceArray":
        """Return the l_p values; a no-op unless the entries are p-th powers."""
        if self.scale != "power":
            return self
        if self.p is None or self.p <= 0:
            raise InvalidArgumentError("taking the 1/p root needs a positive p")
        return DistanceArray(np.power(self.values, 1.0 / self.p), "lp", self.p)


StringLike = Union[IntString, Sequence[int], np.ndarray]
KernelLike = Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def as_int_string(values: StringLike, U: Optional[int] = None) -> IntString:
    if isinstance(values, IntString):
        return values
    return IntString.from_values(values, U)


def check_pair(T: StringLike, P: StringLike) -> Tuple[IntString, IntString]:
    if not isinstance(T, IntString) or not isinstance(P, IntString):
        raw_t = np.asarray(T.symbols if isinstance(T, IntString) else T, dtype=np.int64)
        raw_p = np.asarray(P.symbols if isinstance(P, IntString) else P, dtype=np.int64)
        top = max(int(raw_t.max()) if raw_t.size else 0, int(raw_p.max()) if raw_p.size else 0)
        U = max(2, 1 << top.bit_length())
        if isinstance(T, IntString):
            U = max(U, T.U)
        if isinstance(P, IntString):
            U = max(U, P.U)
        T, P = IntString(raw_t, U), IntString(raw_p, U)
    if len(P) < 1:
        raise InvalidArgumentError("pattern must not be empty")
    if len(P) > len(T):
        raise InvalidArgumentError(
            f"pattern length {len(P)} exceeds text length {len(T)}"
        )
    return T, P


def _window_chunks(T: IntString, P: IntString):
    windows = sliding_window_view(T.symbols, len(P))
    rows = max(1, MAX_BATCH_ELEMENTS // len(P))
    for start in range(0, windows.shape[0], rows):
        yield start, windows[start:start + rows]


def brute_force_lp(T: StringLike, P: StringLike, p: float) -> DistanceArray:
    """
    Oracle for the p-th powers ``sum_j |t[i + j] - p[j]|**p`` of every window.

    :param T: Text over [U].
    :param P: Pattern over [U], not longer than the text.
    :param p: Positive exponent.
    :return: DistanceArray on the ``power`` scale.
    """
    if p <= 0:
        raise InvalidArgumentError(f"p must be positive, got {p}")
    T, P = check_pair(T, P)
    out = np.empty(len(T) - len(P) + 1, dtype=np.float64)
    pattern = P.symbols
    for start, windows in _window_chunks(T, P):
        diffs = np.abs(windows - pattern).astype(np.float64)
        out[start:start + windows.shape[0]] = np.power(diffs, p).sum(axis=1)
    return DistanceArray(out, "power", float(p))


def window_power_sums(T: IntString, P: IntString, p: float, positions) -> np.ndarray:
    """``sum_j |t[i + j] - p[j]|**p`` for the window starts in ``positions`` only."""
    windows = sliding_window_view(T.symbols, len(P))
    positions = np.asarray(positions, dtype=np.int64)
    out = np.empty(positions.size, dtype=np.float64)
    rows = max(1, MAX_BATCH_ELEMENTS // len(P))
    for start in range(0, positions.size, rows):
        chunk = windows[positions[start:start + rows]]
        diffs = np.abs(chunk - P.symbols).astype(np.float64)
        out[start:start + chunk.shape[0]] = np.power(diffs, p).sum(axis=1)
    return out


def brute_force_hamming(T: StringLike, P: StringLike) -> DistanceArray:
    """Oracle counting mismatching positions of every window."""
    T, P = check_pair(T, P)
    out = np.empty(len(T) - len(P) + 1, dtype=np.float64)
    for start, windows in _window_chunks(T, P):
        out[start:start + windows.shape[0]] = np.count_nonzero(windows != P.symbols, axis=1)
    return DistanceArray(out, "count")


def kernel_lookup(kernel: KernelLike, M: int) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Turn an M x M table or a vectorized callable into a broadcasting lookup."""
    if callable(kernel):
        return kernel
    table = np.asarray(kernel, dtype=np.float64)
    if table.shape != (M, M):
        raise InvalidArgumentError(f"kernel table must have shape ({M}, {M}), got {table.shape}")
    if not np.all(np.isfinite(table)):
        raise InvalidArgumentError("kernel table contains NaN or infinite entries")
    return lambda a, b: table[a, b]


def alphabet_correlate(
    reduced_text: np.ndarray,
    reduced_pattern: np.ndarray,
    lookup: Callable[[np.ndarray, np.ndarray], np.ndarray],
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
    alphabet_size: Optional[int] = None,
) -> Tuple[np.ndarray, float]:
    """
    Sum over the characters c present in the reduced text of the correlation
    of the indicator of c with ``lookup(c, reduced_pattern)``.

    Characters absent from the text have an all-zero indicator and are
    skipped unless ``alphabet_size`` asks for every character in
    [0, alphabet_size). Returns the sums and their absolute error budget.
    """
    n, m = reduced_text.size, reduced_pattern.size
    length, _, _ = block_geometry(n, m, block_len)
    if alphabet_size is None:
        present = np.unique(reduced_text)
    else:
        present = np.arange(alphabet_size, dtype=np.int64)
    totals = np.zeros(n - m + 1, dtype=np.float64)
    bound = 0.0
    group = max(1, MAX_BATCH_ELEMENTS // (2 * n))
    for start in range(0, present.size, group):
        chars = present[start:start + group]
        indicators = (reduced_text[np.newaxis, :] == chars[:, np.newaxis]).astype(np.float64)
        weights = np.broadcast_to(
            np.asarray(
                lookup(chars[:, np.newaxis], reduced_pattern[np.newaxis, :]),
                dtype=np.float64,
            ),
            (chars.size, m),
        )
        if not np.all(np.isfinite(weights)):
            raise InvalidArgumentError("kernel produced NaN or infinite values")
        rows = correlate_many(indicators, weights, block_len=length, stats=stats)
        # fixed reduction order: character by character
        for row in rows:
            totals += row
        peak = np.abs(weights).max(axis=1)
        bound += sum(correlation_error_bound(m, 1.0, float(w), length) for w in peak)
    return totals, bound


def small_alphabet_distance(
    T: Union[StringLike, np.ndarray],
    P: Union[StringLike, np.ndarray],
    reduce_t: Optional[Callable[[np.ndarray], np.ndarray]],
    reduce_p: Optional[Callable[[np.ndarray], np.ndarray]],
    kernel: KernelLike,
    M: int,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
) -> DistanceArray:
    """
    Text-to-pattern distance under ``kernel(reduce_t(t), reduce_p(q))``
    computed with one correlation per reduced character.

    Args:
        T: Text symbols.
        P: Pattern symbols.
        reduce_t: Vectorized map from text symbols into [0, M); None is identity.
        reduce_p: Vectorized map from pattern symbols into [0, M); None is identity.
        kernel: M x M table or vectorized callable over reduced symbols.
        M: Size of the reduced alphabet.
        block_len: Optional correlation block length.
        stats: Optional counters to update.

    Returns:
        DistanceArray: ``values[i] = sum_j kernel(...)`` on the ``power`` scale.
    """
    if M <= 0:
        raise InvalidArgumentError(f"alphabet size M must be positive, got {M}")
    text = np.asarray(T.symbols if isinstance(T, IntString) else T, dtype=np.int64)
    pattern = np.asarray(P.symbols if isinstance(P, IntString) else P, dtype=np.int64)
    if pattern.size < 1:
        raise InvalidArgumentError("pattern must not be empty")
    if pattern.size > text.size:
        raise InvalidArgumentError(
            f"pattern length {pattern.size} exceeds text length {text.size}"
        )
    reduced_text = np.asarray(reduce_t(text) if reduce_t else text, dtype=np.int64)
    reduced_pattern = np.asarray(reduce_p(pattern) if reduce_p else pattern, dtype=np.int64)
    for name, reduced in (("text", reduced_text), ("pattern", reduced_pattern)):
        if reduced.size and (reduced.min() < 0 or reduced.max() >= M):
            raise InvalidArgumentError(f"reduced {name} symbols must lie in [0, {M})")

    totals, _ = alphabet_correlate(
        reduced_text, reduced_pattern, kernel_lookup(kernel, M), block_len, stats
    )
    return DistanceArray(totals, "power")


def exact_even_p(
    T: StringLike,
    P: StringLike,
    p: int,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
) -> DistanceArray:
    """
    Exact ``sum_j (t[i + j] - p[j])**p`` for even p via the binomial
    expansion into p + 1 correlations of power vectors.

    :param T: Text over [U].
    :param P: Pattern over [U].
    :param p: Even positive integer.
    :raises RangeError: when ``m * U**p`` is not below 2**53.
    """
    if p != int(p) or int(p) < 2 or int(p) % 2:
        raise InvalidArgumentError(f"p must be an even positive integer, got {p}")
    p = int(p)
    T, P = check_pair(T, P)
    m = len(P)
    U = max(T.U, P.U)
    if m * float(U) ** p >= MAX_EXACT_FLOAT:
        raise RangeError(
            f"m * U**p = {m} * {U}**{p} is not below 2**53; use brute_force_lp"
        )

    text = T.symbols.astype(np.float64)
    pattern = P.symbols.astype(np.float64)
    powers = np.arange(p + 1)
    texts = np.power(text[np.newaxis, :], powers[:, np.newaxis])
    patterns = np.power(pattern[np.newaxis, :], (p - powers)[:, np.newaxis])
    coefficients = np.array(
        [comb(p, k) * (-1) ** (p - k) for k in range(p + 1)], dtype=np.float64
    )

    length, _, _ = block_geometry(len(T), m, block_len)
    terms = correlate_many(texts, patterns, block_len=length, stats=stats)
    totals = np.zeros(terms.shape[1], dtype=np.float64)
    bound = 0.0
    for k in range(p + 1):
        totals += coefficients[k] * terms[k]
        bound += abs(coefficients[k]) * correlation_error_bound(
            m, texts[k].max(initial=0.0), patterns[k].max(initial=0.0), length
        )
    # integer inputs give an integer answer; round whenever the budget allows
    if bound < 0.25:
        totals = np.rint(totals)
    else:
        # windows this close to zero are summed directly
        flagged = np.flatnonzero(np.abs(totals) <= bound / EXACT_RELATIVE_ERROR)
        if flagged.size:
            totals[flagged] = window_power_sums(T, P, p, flagged)
    logger.debug("exact_even_p: p=%d m=%d error budget %.3g", p, m, bound)
    return DistanceArray(np.maximum(totals, 0.0), "power", float(p))
