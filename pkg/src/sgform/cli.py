"""Command-line entry point: ``sgform {graph,resistance,energy,gamma,besov,audit-all}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from sgform import audits
from sgform.besov import (
    ALPHA, BETA_STAR, DEFAULT_EPS, PAIR_BUDGET, PROBE_CSV_HEADER, PairQuadrature, abel_probe, as_profile, discrete_Ebeta,
    partial_sums,
)
from sgform.energy import An_Dn, Bn, vertex_function
from sgform.geometry import GRAPH_CSV_HEADER, build_graph, word_str
from sgform.good import GoodFunction
from sgform.resistance import AUDIT_CSV_HEADER, corner_bound_audit, pair_resistance

DEFAULT_LEVEL_CAP = 8


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _good(text: str) -> GoodFunction:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--good takes three comma-separated values x0,x1,x2")
    return GoodFunction(*(_fraction(p) for p in parts))


def _floats(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _format_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def render(rows: list[dict], header: list[str], fmt: str) -> str:
    if fmt == "json":
        clean = [{k: (str(_format_value(r[k])) if isinstance(r[k], Fraction) else r[k]) for k in header}
                 for r in rows]
        return json.dumps(clean, indent=2) + "\n"
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([_format_value(r[k]) for k in header])
    return buf.getvalue()


# ---------------------------------------------------------------------------

def cmd_graph(args) -> tuple[list, list, int]:
    g = build_graph(args.level)
    rows = []
    for e in g.edges:
        p = e.shared_point
        rows.append({"level": g.level, "w1": word_str(e.w1), "w2": word_str(e.w2), "kind": e.kind.value,
                     "shared_a_num": p.a.numerator, "shared_a_den": p.a.denominator,
                     "shared_b_num": p.b.numerator, "shared_b_den": p.b.denominator})
    return rows, GRAPH_CSV_HEADER, 0


def cmd_resistance(args):
    if args.bound_audit:
        worst, rows = corner_bound_audit(args.level)
        return rows, AUDIT_CSV_HEADER, 0 if worst <= 1 else 1
    rows = []
    for n in range(1, args.level + 1):
        R = pair_resistance(n, (0,) * n, (1,) * n)
        target = (5.0 / 3.0) ** n - 1
        rows.append({"n": n, "w1": "0" * n, "w2": "1" * n, "R": R, "closed_form": target,
                     "rel_error": abs(R / target - 1)})
    return rows, ["n", "w1", "w2", "R", "closed_form", "rel_error"], 0


def cmd_energy(args):
    U = args.good
    rows = []
    for n in range(1, args.level + 1):
        A, D = An_Dn(U, n)
        B = Bn(vertex_function(U, n))
        rows.append({"n": n, "A_n": A, "B_n": B, "D_n": D})
    return rows, ["n", "A_n", "B_n", "D_n"], 0


def cmd_gamma(args):
    rows = abel_probe(args.good, args.eps)
    status = 0 if all(r["verdict"] == "pass" for r in rows) else 1
    return rows, PROBE_CSV_HEADER, status


def cmd_besov(args):
    U = GoodFunction(*(float(v) for v in args.good.boundary))
    pq = PairQuadrature(U, args.depth)
    prof = as_profile(U)
    rows = []
    for beta in args.beta:
        if beta >= BETA_STAR:
            series = float("inf")
        else:
            series = discrete_Ebeta(prof, beta).value
        terms = pq.level_terms(beta, args.depth - 1)
        rows.append({"beta": beta, "depth": args.depth, "Ebeta_series": series,
                     "Ebeta_series_to_depth": float(partial_sums(prof, beta, args.depth)[-1]),
                     "Ebeta_quad": pq.ebeta(beta), "B22": float(terms.sum()), "B2inf": float(terms.max())})
    header = ["beta", "depth", "Ebeta_series", "Ebeta_series_to_depth", "Ebeta_quad", "B22", "B2inf"]
    return rows, header, 0


def cmd_audit_all(args):
    results = audits.run_all(level=args.level, depth=args.depth, seed=args.seed)
    rows = []
    for r in results:
        print(r.line(), file=sys.stderr)
        rows.append({"criterion": r.number, "title": r.title, "pass": r.passed, "summary": r.summary})
        if not r.passed:
            for bad in r.failing_rows():
                print(f"    failing: {bad}", file=sys.stderr)
    status = 0 if all(r.passed for r in results) else 1
    return rows, ["criterion", "title", "pass", "summary"], status


COMMANDS = {
    "graph": cmd_graph,
    "resistance": cmd_resistance,
    "energy": cmd_energy,
    "gamma": cmd_gamma,
    "besov": cmd_besov,
    "audit-all": cmd_audit_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgform", description="Energies, resistances and Besov audits on the Sierpinski gasket.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--level", type=int, default=None, help="graph level n")
    common.add_argument("--max-level", type=int, default=DEFAULT_LEVEL_CAP, help="cap on --level (default 8)")
    common.add_argument("--depth", type=int, default=7, help="quadrature depth m")
    common.add_argument("--beta", type=_floats, default=None, help="comma-separated beta values")
    common.add_argument("--eps", type=_floats, default=list(DEFAULT_EPS), help="comma-separated eps = beta* - beta")
    common.add_argument("--good", type=_good, default=GoodFunction(1, 0, 0), help="boundary values x0,x1,x2")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("graph", parents=[common], help="edge list of X_n")
    res = sub.add_parser("resistance", parents=[common], help="corner resistances of X_1..X_n")
    res.add_argument("--bound-audit", action="store_true", help="audit R_n(w, i^n) against (5/2)(5/3)^n instead")
    sub.add_parser("energy", parents=[common], help="A_n, B_n, D_n of a good function")
    sub.add_parser("gamma", parents=[common], help="Abel probe of the limit form")
    sub.add_parser("besov", parents=[common], help="series, double-integral and metric Besov quantities")
    sub.add_parser("audit-all", parents=[common], help="run every acceptance audit")
    return parser


DEFAULT_LEVELS = {"graph": 2, "resistance": 5, "energy": 6, "gamma": 1, "besov": 1, "audit-all": 8}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.level is None:
        args.level = DEFAULT_LEVELS[args.command]
    if args.level < 1:
        parser.error("--level must be >= 1")
    if args.level > args.max_level:
        parser.error(f"--level {args.level} exceeds the cap {args.max_level} (raise it with --max-level)")
    if args.depth < 2:
        parser.error("--depth must be >= 2")
    if any(e <= 0 for e in args.eps):
        parser.error("--eps values must be positive")
    if args.beta is None:
        args.beta = audits.beta_grid()
    if any(b <= ALPHA for b in args.beta):
        parser.error(f"--beta values must exceed alpha = {ALPHA:.6f}")
    if args.command == "besov" and 9**args.depth // 2 > PAIR_BUDGET:
        parser.error(f"--depth {args.depth} exceeds the pair budget")

    rows, header, status = COMMANDS[args.command](args)
    text = render(rows, header, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
