"""
Blocked FFT cross-correlation.

Every exact and approximate engine in the package reduces to sliding dot
products of a text row against a pattern row. ``correlate`` computes them
with real FFTs over overlapping text blocks of power-of-two length
``L = 2 * m'`` (``m'`` is ``m`` rounded up to a power of two); each block
yields ``L - m + 1`` outputs, so one correlation costs O(n log m).

Error budget: with double precision the absolute error of an output entry
is at most ``ERROR_CONSTANT * m * log2(L) * max|text| * max|pattern| * 2**-52``
(see ``correlation_error_bound``). Kernel values stay below ``U**p <= 2**64``
and ``n <= 2**20`` at desk scale, which keeps the bound far below the
quantities the approximation engines care about.
"""

import logging
import math
import threading
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidArgumentError

logger = logging.getLogger(__name__)

ERROR_CONSTANT = 8.0
# rows * padded length handled per FFT batch
MAX_BATCH_ELEMENTS = 1 << 22


class CorrelationStats:
    """Thread-safe counters of the work done by the correlation engine."""

    def __init__(self):
        self._lock = threading.Lock()
        self.correlations = 0
        self.blocks = 0
        self.fft_calls = 0

    def record(self, rows: int, blocks_per_row: int) -> None:
        with self._lock:
            self.correlations += rows
            self.blocks += rows * blocks_per_row
            self.fft_calls += 2 * rows * blocks_per_row

    def reset(self) -> None:
        with self._lock:
            self.correlations = 0
            self.blocks = 0
            self.fft_calls = 0

    def as_dict(self):
        return {
            "correlations": self.correlations,
            "blocks": self.blocks,
            "fft_calls": self.fft_calls,
        }


def next_power_of_two(value: int) -> int:
    return 1 << max(0, int(value) - 1).bit_length()


def default_block_len(m: int) -> int:
    return 2 * next_power_of_two(m)


def block_geometry(n: int, m: int, block_len: Optional[int] = None) -> Tuple[int, int, int]:
    """
    Return ``(L, step, blocks)`` used to correlate a length-n text with a
    length-m pattern.

    :param n: Text length.
    :param m: Pattern length.
    :param block_len: Optional block length; must be a power of two >= m.
    """
    _check_lengths(n, m)
    if block_len is None:
        block_len = default_block_len(m)
    elif block_len < m or block_len & (block_len - 1):
        raise InvalidArgumentError(
            f"block length must be a power of two >= m={m}, got {block_len}"
        )
    # a single block covers short texts
    block_len = max(next_power_of_two(m), min(block_len, next_power_of_two(n)))
    step = block_len - m + 1
    blocks = -(-(n - m + 1) // step)
    return block_len, step, blocks


def correlation_error_bound(
    m: int, max_text: float, max_pattern: float, block_len: Optional[int] = None
) -> float:
    """Absolute error budget of one output entry of ``correlate``."""
    if block_len is None:
        block_len = default_block_len(m)
    log_len = math.log2(max(block_len, 2))
    return (
        ERROR_CONSTANT * m * log_len * abs(max_text) * abs(max_pattern)
        * np.finfo(np.float64).eps
    )


def _check_lengths(n: int, m: int) -> None:
    if m < 1:
        raise InvalidArgumentError("pattern must not be empty")
    if m > n:
        raise InvalidArgumentError(
            f"pattern length {m} exceeds text length {n}"
        )


def _as_rows(values, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array[np.newaxis, :]
    if array.ndim != 2:
        raise InvalidArgumentError(f"{name} must be one- or two-dimensional")
    if not np.all(np.isfinite(array)):
        raise InvalidArgumentError(f"{name} contains NaN or infinite entries")
    return array


def correlate_many(
    texts,
    patterns,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
) -> np.ndarray:
    """
    Correlate each text row with the pattern row of the same index.

    Args:
        texts: Array of shape (k, n).
        patterns: Array of shape (k, m).
        block_len: Optional power-of-two block length >= m.
        stats: Optional counters to update.

    Returns:
        np.ndarray: Shape (k, n - m + 1); row r holds
        ``out[r, i] = sum_j texts[r, i + j] * patterns[r, j]``.
    """
    texts = _as_rows(texts, "text")
    patterns = _as_rows(patterns, "pattern")
    if texts.shape[0] != patterns.shape[0]:
        raise InvalidArgumentError(
            f"got {texts.shape[0]} text rows but {patterns.shape[0]} pattern rows"
        )
    rows, n = texts.shape
    m = patterns.shape[1]
    length, step, blocks = block_geometry(n, m, block_len)
    out_len = n - m + 1

    padded_len = (blocks - 1) * step + length
    padded = np.zeros((rows, padded_len), dtype=np.float64)
    padded[:, :n] = texts

    result = np.empty((rows, out_len), dtype=np.float64)
    chunk = max(1, MAX_BATCH_ELEMENTS // (blocks * length))
    for start in range(0, rows, chunk):
        stop = min(rows, start + chunk)
        windows = sliding_window_view(padded[start:stop], length, axis=-1)[:, ::step, :]
        pattern_spectrum = np.conj(np.fft.rfft(patterns[start:stop], length))
        spectrum = np.fft.rfft(windows, axis=-1) * pattern_spectrum[:, np.newaxis, :]
        products = np.fft.irfft(spectrum, length, axis=-1)[:, :, :step]
        result[start:stop] = products.reshape(stop - start, blocks * step)[:, :out_len]

    if stats is not None:
        stats.record(rows, blocks)
    logger.debug(
        "correlated %d rows: n=%d m=%d block=%d step=%d blocks=%d",
        rows, n, m, length, step, blocks,
    )
    return result


def correlate(
    text,
    pattern,
    block_len: Optional[int] = None,
    stats: Optional[CorrelationStats] = None,
) -> np.ndarray:
    """
    Sliding dot products ``out[i] = sum_j text[i + j] * pattern[j]`` for
    ``i = 0 .. n - m`` via blocked FFT.

    :param text: Real vector of length n.
    :param pattern: Real vector of length m, 1 <= m <= n.
    :param block_len: Optional power-of-two block length >= m.
    :param stats: Optional counters to update.
    :return: Real vector of length n - m + 1.
    """
    text = np.asarray(text, dtype=np.float64)
    pattern = np.asarray(pattern, dtype=np.float64)
    if text.ndim != 1 or pattern.ndim != 1:
        raise InvalidArgumentError("correlate expects one-dimensional vectors")
    return correlate_many(text, pattern, block_len=block_len, stats=stats)[0]


def naive_correlate(text, pattern) -> np.ndarray:
    """Direct O(n*m) evaluation of the ``correlate`` contract, used as an oracle."""
    text = _as_rows(text, "text")[0]
    pattern = _as_rows(pattern, "pattern")[0]
    n, m = text.size, pattern.size
    _check_lengths(n, m)
    out_len = n - m + 1
    out = np.zeros(out_len, dtype=np.float64)
    for j in range(m):
        out += text[j:j + out_len] * pattern[j]
    return out
