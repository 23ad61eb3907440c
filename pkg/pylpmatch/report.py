from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from .exact_engine import DistanceArray

ZERO_TOLERANCE = 1e-9


def relative_errors(exact, approx, atol: float = ZERO_TOLERANCE) -> np.ndarray:
    """
    Per-position ``|approx - exact| / exact``.

    Where the exact value is 0 the error is 0 if the approximation is within
    ``atol`` of 0 and infinite otherwise.
    """
    exact = np.asarray(exact, dtype=np.float64)
    approx = np.asarray(approx, dtype=np.float64)
    diff = np.abs(approx - exact)
    errors = np.zeros_like(exact)
    nonzero = exact != 0
    errors[nonzero] = diff[nonzero] / np.abs(exact[nonzero])
    errors[~nonzero & (diff > atol)] = np.inf
    return errors


@dataclass
class ApproxReport:
    """Per-position comparison of an approximation against the exact oracle."""

    algorithm: str
    eps: float
    exact: np.ndarray
    approx: np.ndarray
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        self.exact = np.asarray(self.exact, dtype=np.float64)
        self.approx = np.asarray(self.approx, dtype=np.float64)
        self.errors = relative_errors(self.exact, self.approx)

    @property
    def max_error(self) -> float:
        return float(self.errors.max()) if self.errors.size else 0.0

    @property
    def mean_error(self) -> float:
        return float(self.errors.mean()) if self.errors.size else 0.0

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.errors > self.eps))

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> Dict[str, Any]:
        def finite(value: float):
            return value if np.isfinite(value) else None

        return {
            "algorithm": self.algorithm,
            "eps": self.eps,
            "seed": self.seed,
            "params": self.params,
            "max_error": finite(self.max_error),
            "mean_error": finite(self.mean_error),
            "violations": self.violations,
            "passed": self.passed,
            "positions": [
                {
                    "index": index,
                    "exact": float(e),
                    "approx": float(a),
                    "error": finite(float(err)),
                }
                for index, (e, a, err) in enumerate(zip(self.exact, self.approx, self.errors))
            ],
        }


def build_report(
    algorithm: str,
    eps: float,
    exact: DistanceArray,
    approx: DistanceArray,
    params: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
) -> ApproxReport:
    """Compare two arrays on the same scale (l_p values or counts)."""
    return ApproxReport(
        algorithm, eps, exact.root().values, approx.root().values, params or {}, seed
    )
