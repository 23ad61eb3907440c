from .pylpmatch import pyLpMatch
from .errors import (
    LpMatchError,
    InvalidArgumentError,
    RangeError,
    InstanceFormatError,
    VerificationError,
)
from .exact_engine import IntString, DistanceArray
