"""The ``gpt-lab`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 search budget exceeded.
"""

import argparse
import json
import sys
import time

from . import __version__, config
from .commands import (
    cmd_bitcommit,
    cmd_broadcast,
    cmd_distinguish,
    cmd_nondisturb,
    cmd_space,
    cmd_teleport_conclusive,
    cmd_teleport_group,
    cmd_teleport_necessity,
    cmd_tensor,
    load_space,
    parse_matrix,
    parse_range,
    parse_state,
)
from .errors import GptLabError, SearchBudgetExceeded
from .serialize import decode_checked, dumps, load_json
from .verify import verify_report

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--scalar", choices=("exact", "float"), default=None,
                   help="arithmetic mode (default: the space's native mode)")
    p.add_argument("--eps", type=float, default=None, help="floating tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=0, help="random seed for simulations")
    p.add_argument("--budget", type=int, default=None, help="search budget")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="record wall time in the report")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="gpt-lab", description="Generalized probabilistic theory toolkit.")
    parser.add_argument("--version", action="version", version=f"gpt-lab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("space", parents=[common], help="build or load a state space")
    p.add_argument("kind", choices=("classical", "polygon", "custom", "builtin"))
    p.add_argument("param", help="n for classical/polygon, a JSON path for custom, a name for builtin")

    p = sub.add_parser("tensor", parents=[common], help="minimal or maximal tensor product")
    p.add_argument("A")
    p.add_argument("B")
    p.add_argument("--kind", choices=("min", "max"), default="max")

    p = sub.add_parser("distinguish", parents=[common], help="joint distinguishability")
    p.add_argument("space")
    p.add_argument("states", nargs="+", help="vK, center, or comma-separated coordinates")

    p = sub.add_parser("broadcast", parents=[common], help="broadcastability of a set of states")
    p.add_argument("space")
    p.add_argument("states", nargs="+")
    p.add_argument("--candidate", action="append", default=None,
                   help="extra candidate state for the search (repeatable)")

    p = sub.add_parser("nondisturb", parents=[common], help="is a positive map nondisturbing")
    p.add_argument("space")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--matrix", help='rows separated by ";", entries by ","')
    g.add_argument("--map", help="JSON file holding a matrix (list of rows)")

    p = sub.add_parser("bitcommit", parents=[common], help="bit commitment construction and analysis")
    p.add_argument("space")
    p.add_argument("--n", default="1..10", help="subsystem counts: a..b, a,b,c or a single n")
    p.add_argument("--csv", default=None, help="write the binding series as CSV")
    p.add_argument("--runs", type=int, default=10_000, help="seeded honest runs per bit")

    p = sub.add_parser("teleport", parents=[common], help="teleportation schemes")
    p.add_argument("space")
    m = p.add_mutually_exclusive_group(required=True)
    m.add_argument("--group", help="Zn, Dn, Sn or trivial: deterministic scheme from a group")
    m.add_argument("--conclusive", action="store_true", help="conclusive scheme through B = A")
    m.add_argument("--necessity", action="store_true",
                   help="search for a conclusive scheme and compare with weak self-duality")

    p = sub.add_parser("verify", help="re-check every certificate in a report")
    p.add_argument("report")
    p.add_argument("--eps", type=float, default=None, help="re-check with this tolerance as well")
    return parser


def _run(args, argv):
    scalar = args.scalar
    command = ["gpt-lab"] + [a for a in argv if a != "--timing"]
    # --out and --timing do not change the result, so they stay out of the echo
    if args.out is not None:
        i = command.index("--out") if "--out" in command else None
        if i is not None:
            del command[i:i + 2]
        else:
            command = [a for a in command if not a.startswith("--out=")]
    c = args.command
    if c == "space":
        return cmd_space(args.kind, args.param, scalar, command)
    if c == "tensor":
        return cmd_tensor(load_space(args.A, scalar), load_space(args.B, scalar), args.kind, command)
    A = load_space(args.space, scalar)
    if c == "distinguish":
        return cmd_distinguish(A, [parse_state(A, s) for s in args.states], command)
    if c == "broadcast":
        cands = None if args.candidate is None else [parse_state(A, s) for s in args.candidate]
        return cmd_broadcast(A, [parse_state(A, s) for s in args.states], cands, args.budget, command)
    if c == "nondisturb":
        if args.matrix is not None:
            M = parse_matrix(args.matrix, A.exact)
        else:
            M = decode_checked(load_json(args.map), A.exact)
        return cmd_nondisturb(A, M, command)
    if c == "bitcommit":
        if args.runs < 0:
            raise ValueError("--runs must be nonnegative")
        return cmd_bitcommit(A, parse_range(args.n), args.runs, args.seed, args.csv, command=command)
    if c == "teleport":
        if args.group is not None:
            return cmd_teleport_group(A, args.group, args.budget, command)
        if args.conclusive:
            return cmd_teleport_conclusive(A, args.budget, command)
        return cmd_teleport_necessity(A, args.budget, command)
    raise UsageError(f"unknown command {c}")


def cmd_verify(path, eps=None, out=None):
    """Re-check a report file; 0 when every check passes, 1 naming the first failure."""
    out = sys.stdout if out is None else out
    rep = load_json(path)
    stored = rep.get("eps", config.get_eps()) if isinstance(rep, dict) else config.get_eps()
    tolerances = [stored] if eps is None or eps == stored else [stored, eps]
    code = EXIT_OK
    for tol in tolerances:
        ok, passed, err = verify_report(rep, tol)
        if ok:
            print(f"PASS eps={tol!r}: {len(passed)} checks", file=out)
        else:
            print(f"FAIL eps={tol!r}: {err}", file=out)
        # the exit code follows the tolerance the caller asked for
        code = EXIT_OK if ok else EXIT_VERIFY
    return code


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return cmd_verify(args.report, args.eps)
        t0 = time.perf_counter()
        with config.tolerance(args.eps if args.eps is not None else config.get_eps()):
            report = _run(args, argv)
        if args.timing:
            report["timing"] = {"seconds": round(time.perf_counter() - t0, 6)}
    except SearchBudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (GptLabError, ValueError, OSError, json.JSONDecodeError, UsageError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = dumps(report)
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
