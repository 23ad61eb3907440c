"""
Instance and result files.

An instance file holds one string: a header line ``n U`` and a line with n
whitespace-separated integers (UTF-8, LF line endings). Distance files are
either CSV ``index,value`` with 17 significant digits or a JSON object
``{"params": ..., "values": [...], "summary": ...}``. JSON floats are written
with the shortest repr that reads back to the same double, which never
needs more than 17 significant digits; FLOAT_FORMAT applies to CSV only.
"""

import csv
import io
import json
import sys
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .errors import InstanceFormatError, InvalidArgumentError
from .exact_engine import DistanceArray, IntString

FLOAT_FORMAT = "{:.17g}"


def _open_write(path: str):
    if path == "-":
        return _StdoutHandle()
    return open(path, "w", encoding="utf-8", newline="\n")


class _StdoutHandle:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def read_instance(path: str) -> IntString:
    """
    Parse an instance file.

    :param path: Path of the file.
    :return: The string it holds.
    :raises InstanceFormatError: when the header or the symbols are malformed.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    header = lines[0].split() if lines else []
    if len(header) != 2:
        raise InstanceFormatError(f"{path}: first line must be 'n U'")
    try:
        n, U = int(header[0]), int(header[1])
        symbols = [int(token) for token in " ".join(lines[1:]).split()]
    except ValueError as e:
        raise InstanceFormatError(f"{path}: {e}") from e
    if len(symbols) != n:
        raise InstanceFormatError(f"{path}: header announces {n} symbols, found {len(symbols)}")
    try:
        return IntString(np.asarray(symbols, dtype=np.int64), U)
    except InvalidArgumentError as e:
        raise InstanceFormatError(f"{path}: {e}") from e


def write_instance(path: str, string: IntString) -> None:
    with _open_write(path) as fh:
        fh.write(f"{len(string)} {string.U}\n")
        fh.write(" ".join(str(int(s)) for s in string.symbols))
        fh.write("\n")


def write_distances(
    path: str,
    distances: DistanceArray,
    output_format: str = "json",
    params: Optional[Dict[str, Any]] = None,
    summary: Optional[Dict[str, Any]] = None,
) -> None:
    """Write a distance array as CSV or JSON; ``-`` writes to stdout."""
    if output_format == "csv":
        with _open_write(path) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", "value"])
            for index, value in enumerate(distances.values):
                writer.writerow([index, FLOAT_FORMAT.format(value)])
    elif output_format == "json":
        document = {
            "params": dict(params or {}, scale=distances.scale, p=distances.p),
            "values": [float(v) for v in distances.values],
            "summary": summary or {},
        }
        with _open_write(path) as fh:
            json.dump(document, fh, indent=2)
            fh.write("\n")
    else:
        raise InvalidArgumentError(f"unknown output format {output_format!r}")


def read_distances(path: str) -> Tuple[DistanceArray, Dict[str, Any]]:
    """Read a file written by ``write_distances``; returns values and params."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        document = json.loads(text)
        params = document.get("params", {})
        return (
            DistanceArray(
                np.asarray(document["values"], dtype=np.float64),
                params.get("scale", "power"),
                params.get("p"),
            ),
            params,
        )
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or rows[0] != ["index", "value"]:
        raise InstanceFormatError(f"{path}: missing 'index,value' header")
    values = [float(value) for _, value in rows[1:]]
    return DistanceArray(np.asarray(values, dtype=np.float64), "lp"), {}


def write_json(path: str, document: Dict[str, Any]) -> None:
    with _open_write(path) as fh:
        json.dump(document, fh, indent=2)
        fh.write("\n")
