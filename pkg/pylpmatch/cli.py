"""
Command-line front end.

    pylpmatch gen    --n 1024 --m 64 --U 256 --text t.txt --pattern p.txt
    pylpmatch dist   --text t.txt --pattern p.txt --p 2 --eps 0.1
    pylpmatch verify --text t.txt --pattern p.txt --p 0.5 --eps 0.25 --seed 7
    pylpmatch bench  --sizes 4096,8192 --eps 0.5,0.25 --algorithms approx-det

Exit codes: 0 ok, 1 usage, 2 I/O, 3 verification failure.
"""

import argparse
import logging
import sys
import time
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .approx_deterministic import deterministic_eta
from .convolution import block_geometry
from .decomposition import DecompParams, reduce_numerators, to_numerators
from .errors import InstanceFormatError, InvalidArgumentError, LpMatchError, VerificationError
from .exact_engine import IntString
from .files import read_instance, write_distances, write_instance, write_json
from .generate import DISTRIBUTIONS, generate_instance
from .pylpmatch import ALGORITHMS, pyLpMatch, resolve_algorithm

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VERIFY = 3


class ArgumentParser(argparse.ArgumentParser):
    """Raises instead of exiting so usage errors share the exit code mapping."""

    def error(self, message):
        raise InvalidArgumentError(f"{self.prog}: {message}")


def _int_list(raw: str) -> List[int]:
    return [int(item) for item in raw.split(",") if item.strip()]


def _float_list(raw: str) -> List[float]:
    return [float(item) for item in raw.split(",") if item.strip()]


def _str_list(raw: str) -> List[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--text", required=True, help="text instance file")
    parser.add_argument("--pattern", required=True, help="pattern instance file")
    parser.add_argument("--p", type=float, required=True, help="exponent; 0 for Hamming")
    parser.add_argument("--eps", type=float, default=None, help="relative error")
    parser.add_argument(
        "--algorithm", default="auto", choices=("auto",) + ALGORITHMS,
        help="engine (default: chosen from p)",
    )
    parser.add_argument("--reps", type=int, default=None, help="odd repetition count")
    parser.add_argument("--eta", type=float, default=None, help="override of eta")
    parser.add_argument("--dense", action="store_true",
                        help="approx-det: correlate every reduced character")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="pylpmatch",
        description="Exact and approximate text-to-pattern l_p distances",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--env-file", default=".env", help="settings file (default: .env)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    parser.add_argument("--block-len", type=int, default=None, help="correlation block length")
    parser.add_argument("--seed", type=int, default=None, help="seed (default from settings)")
    sub = parser.add_subparsers(dest="command", parser_class=ArgumentParser)

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("--n", type=int, required=True, help="text length")
    gen.add_argument("--m", type=int, required=True, help="pattern length")
    gen.add_argument("--U", type=int, required=True, help="alphabet bound, a power of two")
    gen.add_argument("--distribution", default="uniform", choices=DISTRIBUTIONS)
    gen.add_argument("--text", required=True, help="text output file")
    gen.add_argument("--pattern", required=True, help="pattern output file")

    dist = sub.add_parser("dist", help="compute the distance array")
    _add_engine_flags(dist)
    dist.add_argument("--format", dest="output_format", default=None, choices=("csv", "json"))
    dist.add_argument("--output", default="-", help="output file (default: stdout)")

    verify = sub.add_parser("verify", help="compare an engine against the exact oracle")
    _add_engine_flags(verify)
    verify.add_argument("--report", default="-", help="report file (default: stdout)")
    verify.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)

    bench = sub.add_parser("bench", help="time engines over a grid of sizes")
    bench.add_argument("--sizes", type=_int_list, default=[4096, 8192], help="comma-separated n")
    bench.add_argument("--m", type=int, default=64, help="pattern length")
    bench.add_argument("--U", type=int, default=256, help="alphabet bound")
    bench.add_argument("--eps", type=_float_list, default=[0.5], help="comma-separated eps")
    bench.add_argument("--p", type=float, default=1.0, help="exponent")
    bench.add_argument("--algorithms", type=_str_list, default=["approx-det"],
                       help="comma-separated engines")
    bench.add_argument("--reps", type=int, default=None, help="odd repetition count")
    bench.add_argument("--dense", action="store_true",
                       help="approx-det: correlate every reduced character")
    bench.add_argument("--output", default="-", help="CSV output file (default: stdout)")
    return parser


def _summary(client: pyLpMatch, T: IntString, P: IntString, p: float,
             eps: Optional[float], algorithm: str, elapsed: float) -> Dict[str, Any]:
    return {
        "n": len(T),
        "m": len(P),
        "p": p,
        "eps": eps,
        "algorithm": algorithm,
        "wall_time": elapsed,
        **client.stats.as_dict(),
    }


def _print_summary(summary: Dict[str, Any]) -> None:
    eps = "-" if summary["eps"] is None else f"{summary['eps']:g}"
    print(
        f"n={summary['n']} m={summary['m']} p={summary['p']:g} eps={eps} "
        f"algorithm={summary['algorithm']} time={summary['wall_time']:.3f}s "
        f"correlations={summary['correlations']}",
        file=sys.stderr,
    )


def cmd_gen(client: pyLpMatch, args) -> int:
    T, P = generate_instance(args.n, args.m, args.U, args.distribution, client.settings.seed)
    write_instance(args.text, T)
    write_instance(args.pattern, P)
    logger.info("wrote %s (n=%d) and %s (m=%d)", args.text, len(T), args.pattern, len(P))
    return EXIT_OK


def cmd_dist(client: pyLpMatch, args) -> int:
    T, P = read_instance(args.text), read_instance(args.pattern)
    algorithm = resolve_algorithm(args.p, args.algorithm)
    started = time.perf_counter()
    distances = client.distance(
        T, P, args.p, args.eps, algorithm,
        t=args.reps, seed=client.settings.seed, eta=args.eta, dense=args.dense,
    )
    summary = _summary(client, T, P, args.p, args.eps, algorithm, time.perf_counter() - started)
    params = {"algorithm": algorithm, "eps": args.eps, "eta": args.eta}
    if algorithm in ("approx-rand", "approx-hamming"):
        params.update(seed=client.settings.seed, reps=args.reps)
    write_distances(
        args.output, distances, args.output_format or client.settings.output_format,
        params, summary,
    )
    _print_summary(summary)
    return EXIT_OK


def cmd_verify(client: pyLpMatch, args) -> int:
    T, P = read_instance(args.text), read_instance(args.pattern)
    corrupt = 1.0 + 2.0 * (args.eps or 0.0) if args.corrupt else None
    report = client.verify(
        T, P, args.p, args.eps, args.algorithm,
        t=args.reps, seed=client.settings.seed, eta=args.eta, corrupt=corrupt,
    )
    write_json(args.report, report.to_dict())
    _print_summary(_summary(
        client, T, P, args.p, args.eps, report.algorithm, report.params["wall_time"]
    ))
    if not report.passed:
        raise VerificationError(
            f"{report.violations} of {len(report.errors)} positions exceed eps={report.eps:g} "
            f"(max error {report.max_error:.3g})",
            report,
        )
    return EXIT_OK


def predicted_counts(T: IntString, P: IntString, p: float, eps: float,
                     block_len: Optional[int], dense: bool) -> Dict[str, int]:
    """
    Count model of approx-det: one correlation per level and present reduced
    text symbol (every one of the 1/eta symbols with ``dense``), each split
    into the same number of blocks, two transforms per block.
    """
    params = DecompParams.build(p, eps, max(T.U, P.U), deterministic_eta(eps))
    _, _, blocks_per_row = block_geometry(len(T), len(P), block_len)
    if dense:
        correlations = len(params.levels) * params.M
    else:
        numerators = to_numerators(T.symbols, params)
        correlations = sum(
            int(np.unique(reduce_numerators(numerators, i, params)).size)
            for i in params.levels
        )
    blocks = correlations * blocks_per_row
    return {
        "predicted_correlations": correlations,
        "predicted_blocks": blocks,
        "predicted_fft_calls": 2 * blocks,
    }


def run_bench(client: pyLpMatch, sizes: Sequence[int], m: int, U: int,
              eps_grid: Sequence[float], p: float, algorithms: Sequence[str],
              reps: Optional[int] = None, dense: bool = False) -> pd.DataFrame:
    """Time every (n, eps, algorithm) cell on a seeded uniform instance."""
    rows = []
    for n in sizes:
        T, P = generate_instance(n, m, U, "uniform", client.settings.seed)
        for eps in eps_grid:
            for name in algorithms:
                algorithm = resolve_algorithm(p, name)
                client.stats.reset()
                started = time.perf_counter()
                client.distance(
                    T, P, p, eps, algorithm, t=reps, seed=client.settings.seed,
                    dense=dense and algorithm == "approx-det",
                )
                elapsed = time.perf_counter() - started
                row = {
                    "n": n, "m": m, "eps": eps, "algorithm": algorithm,
                    "time": elapsed, **client.stats.as_dict(),
                }
                if algorithm == "approx-det":
                    row.update(predicted_counts(T, P, p, eps, client.block_len, dense))
                rows.append(row)
                logger.info("bench n=%d eps=%g %s: %.3fs", n, eps, algorithm, elapsed)
    return pd.DataFrame(rows)


def cmd_bench(client: pyLpMatch, args) -> int:
    table = run_bench(
        client, args.sizes, args.m, args.U, args.eps, args.p, args.algorithms,
        reps=args.reps, dense=args.dense,
    )
    if args.output == "-":
        table.to_csv(sys.stdout, index=False)
    else:
        table.to_csv(args.output, index=False)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "dist": cmd_dist,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _configure_logging(args.verbose)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        client = pyLpMatch(
            workers=args.threads,
            block_len=args.block_len,
            seed=args.seed,
            output_format=getattr(args, "output_format", None),
            env_path=args.env_file,
        )
        return COMMANDS[args.command](client, args)
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except (OSError, InstanceFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except LpMatchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
