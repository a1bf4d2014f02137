"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 bound violation.
Vertices in JSON output are 1-based, like the ``--pattern`` syntax.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from . import experiments as ex
from .dist import parse_dist, regularity_profile
from .errors import DomainError
from .pruning import certify_lower_bound, default_delta
from .ratefn import RateFunction
from .solvers import HELD_KARP_CAP, COPY_MAX_N, solve
from .structures import FamilyKind, predict

EXIT_USAGE, EXIT_DOMAIN, EXIT_VIOLATION = 1, 2, 3
FAMILIES = [k.value for k in FamilyKind]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _num(x: float) -> str:
    text = format(x, ".15g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def _grid(text: str) -> list[float]:
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--grid expects a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError("--grid needs step > 0 and a <= b")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [a + k * step for k in range(count)]


def _add_family(p, need_n=True):
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--dist", required=True, help="gaussian[:sigma] | laplace[:scale] | uniform[:a] | rademacher | steptail[:K]")
    if need_n:
        p.add_argument("--n", type=int, required=True)
    p.add_argument("--pattern", help='triangle | c4 | k4 | "v=4;edges=1-2,2-3,3-1,1-4"')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rwgraph", description="Extremal structures in randomly weighted complete graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ratefn", help="evaluate the rate function or its inverse")
    p.add_argument("--dist", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eval", type=float, metavar="T")
    g.add_argument("--inverse", type=float, metavar="Y")

    p = sub.add_parser("check-tails", help="print t, -log P(X>t) / rate(t) as CSV")
    p.add_argument("--dist", required=True)
    p.add_argument("--grid", required=True, metavar="A:B:STEP")

    p = sub.add_parser("predict", help="leading-order value of the optimum")
    _add_family(p)

    p = sub.add_parser("solve", help="solve one seeded instance exactly")
    _add_family(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trial", type=int, default=0)

    p = sub.add_parser("certify", help="pruning certificates, one CSV row per trial")
    _add_family(p)
    p.add_argument("--delta", type=float, help="default 1/log n")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)

    p = sub.add_parser("simulate", help="Monte Carlo trials and a summary report")
    _add_family(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--certify", action="store_true", help="also record pruning certificates")
    p.add_argument("--out", help="report path; .json writes the full report, anything else CSV rows")

    p = sub.add_parser("table", help="ratio table over several n")
    _add_family(p, need_n=False)
    p.add_argument("--n-list", required=True, help="comma-separated, e.g. 25,50,100")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    return parser


def _cmd_ratefn(args, out):
    r = RateFunction(parse_dist(args.dist))
    value = r.legendre(args.eval) if args.eval is not None else r.inverse(args.inverse)
    print(_num(value), file=out)
    return 0


def _cmd_check_tails(args, out):
    d = parse_dist(args.dist)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "r"])
    for t, ratio in regularity_profile(d, _grid(args.grid)):
        w.writerow([_num(t), _num(ratio)])
    return 0


def _cmd_predict(args, out):
    f = ex.make_family(args.family, args.n, args.pattern)
    print(_num(predict(f, RateFunction(parse_dist(args.dist)))), file=out)
    return 0


def _cmd_solve(args, out):
    d = parse_dist(args.dist)
    f = ex.make_family(args.family, args.n, args.pattern)
    sol = solve(f, ex.gen_instance(f, d, args.seed, args.trial))
    doc = {
        "family": f.kind.value, "dist": d.spec, "n": f.n, "seed": args.seed, "trial": args.trial,
        "weight": sol.weight,
        "edges": [[a + 1, b + 1] for a, b in sol.edges],
    }
    if sol.vertices is not None:
        doc["vertices"] = [v + 1 for v in sol.vertices]
    print(json.dumps(doc), file=out)
    return 0


def _cmd_certify(args, out):
    d = parse_dist(args.dist)
    f = ex.make_family(args.family, args.n, args.pattern)
    delta = default_delta(f.n) if args.delta is None else args.delta
    r = RateFunction(d)
    pred = predict(f, r)
    exact_ok = not ((f.kind in (FamilyKind.HAMCYCLE, FamilyKind.PATH) and f.n > HELD_KARP_CAP)
                    or (f.kind is FamilyKind.COPY and f.n > COPY_MAX_N))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trial", "level", "found", "certified_bound", "exact_optimum", "ratio_to_prediction", "length"])
    for t in range(args.trials):
        inst = ex.gen_instance(f, d, args.seed, t)
        cert = certify_lower_bound(f, inst, delta, d, rate=r)
        exact = solve(f, inst).weight if exact_ok else None
        ratio = cert.certified_bound / pred if cert.found and pred else None
        w.writerow([t, ex._fmt(cert.level), int(cert.found), ex._fmt(cert.certified_bound),
                    ex._fmt(exact), ex._fmt(ratio), "" if cert.length is None else cert.length])
    return 0


def _cmd_simulate(args, out):
    d = parse_dist(args.dist)
    f = ex.make_family(args.family, args.n, args.pattern)
    rep = ex.run_trials(f, d, args.trials, args.seed, workers=args.workers, certify=args.certify)
    if args.out:
        ex.write_report(rep, args.out)
    print(json.dumps(rep.summary()), file=out)
    return 0 if rep.ok else EXIT_VIOLATION


def _cmd_table(args, out):
    d = parse_dist(args.dist)
    try:
        n_list = [int(v) for v in args.n_list.split(",") if v]
    except ValueError:
        raise UsageError(f"--n-list expects integers, got {args.n_list!r}") from None
    rows = ex.ratio_table(args.family, d, n_list, args.trials, args.seed,
                          pattern=args.pattern, workers=args.workers)
    header = ["n", "mean", "prediction", "ratio_mean", "stderr", "ewn_bound", "max", "finite_n_upper"]
    sink = open(args.out, "w", newline="") if args.out else None
    try:
        for stream in filter(None, (out, sink)):
            w = csv.writer(stream, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([r.n] + [ex._fmt(getattr(r, k)) for k in header[1:]])
    finally:
        if sink:
            sink.close()
    violated = any(r.max > r.finite_n_upper or r.mean > r.ewn_bound + 3.0 * r.stderr for r in rows)
    return EXIT_VIOLATION if violated else 0


COMMANDS = {
    "ratefn": _cmd_ratefn,
    "check-tails": _cmd_check_tails,
    "predict": _cmd_predict,
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "simulate": _cmd_simulate,
    "table": _cmd_table,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(str(exc).rstrip(), file=err)
        return EXIT_USAGE
    except (DomainError, OSError) as exc:
        print(f"rwgraph: {exc}", file=err)
        return EXIT_DOMAIN
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
