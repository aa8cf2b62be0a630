"""Command line interface.

Exit codes: 0 success, 1 validation error, 2 budget exhausted, 3 self-test failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction

from .errors import BudgetExceeded, ValidationError

log = logging.getLogger("schursigma")

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_SELFTEST = 0, 1, 2, 3


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _budgets(args, targets=()):
    from .tree import Budgets

    return Budgets(max_class=args.max_class, max_order=args.max_order, max_mult_rank=args.max_mult_rank,
                   lift_budget=args.budget_lifts, orbit_budget=args.aut_budget, targets=tuple(targets),
                   all_children=getattr(args, "all_children", False))


# -- verbs ------------------------------------------------------------------------------


def cmd_free_quotient(args):
    from .cover import free_quotient
    from .pcgroup import format_presentation

    W = free_quotient(args.p, args.g, args.c, max_gens=args.budget_gens)
    text = format_presentation(W) if args.presentation else f"order {args.p}^{W.n} = {W.order}\n"
    _emit(text, args.out)


def cmd_enumerate(args):
    from .measure import meas_enumerate, meas_sample

    if args.sample:
        rep = meas_sample(args.p, args.g, args.c, args.sample, args.seed)
    else:
        rep = meas_enumerate(args.p, args.g, args.c, args.budget_tuples)
    _emit(rep.to_text(), args.out)


def cmd_measure(args):
    from .ipad import ipad
    from .measure import meas_formula
    from .pcgroup import parse_presentation

    G = parse_presentation(_read_text(args.group))
    m = meas_formula(G, certified=args.certified)
    _emit(f"{m}\t{float(m):.4f}\t{ipad(G)}\n", args.out)


def cmd_ipad(args):
    from .ipad import ipad, is_settled
    from .pcgroup import parse_presentation

    G = parse_presentation(_read_text(args.group))
    line = str(ipad(G))
    if G.p_class >= 2:
        line += "\tsettled" if is_settled(G) else "\tunsettled"
    _emit(line + "\n", args.out)


def cmd_tree(args):
    from .tree import TreeBuilder, serialize

    tree = TreeBuilder(args.p, args.g, _budgets(args), args.seed).build()
    _emit(serialize(tree), args.out)
    bad = [n.label for n in tree if n.agrees is False]
    if bad:
        raise ValidationError("closed-form and lifted measures disagree at " + ", ".join(bad))


def _targets(args):
    from .ipad import parse_ipad

    targets = [parse_ipad(t) for t in args.target or ()]
    if args.targets_from:
        from .harness.census import census
        from .harness.fielddata import load_census_data, parse_field_data

        recs = load_census_data() if args.targets_from == "bundled" else parse_field_data(args.targets_from)
        targets += [r.ipad for r in census(recs).rows]
    return targets


def format_survey(rows) -> str:
    lines = ["# ipad\tresolved\tunresolved\tresolved_approx"]
    for I, r in rows.items():
        lines.append(f"{I}\t{r.resolved}\t{r.unresolved}\t{float(r.resolved):.4f}")
    return "\n".join(lines) + "\n"


def cmd_survey(args):
    from .ipad import ipad_survey
    from .tree import TreeBuilder, deserialize

    if args.tree:
        tree = deserialize(_read_text(args.tree))
    else:
        tree = TreeBuilder(args.p, args.g, _budgets(args, _targets(args)), args.seed).build()
    rows = ipad_survey(tree, args.max_class)
    if args.resolved_only:
        rows = {I: r for I, r in rows.items() if r.resolved}
    _emit(format_survey(rows), args.out)


def cmd_census(args):
    from .harness.census import census
    from .harness.fielddata import load_census_data, parse_field_data

    recs = load_census_data() if args.data == "bundled" else parse_field_data(args.data, args.p, args.g)
    rep = census(recs, _intervals(args), args.top)
    _emit(rep.to_text(proportions=args.proportions), args.out)


def cmd_compare(args):
    from .harness.census import census, compare, bundled_predictions
    from .harness.fielddata import load_census_data, parse_field_data
    from .ipad import parse_ipad

    recs = load_census_data() if args.data == "bundled" else parse_field_data(args.data, args.p, args.g)
    rep = census(recs, _intervals(args), args.top)
    if args.predictions:
        preds = {}
        for ln in _read_text(args.predictions).splitlines():
            if ln.strip() and not ln.startswith("#"):
                ip, val = ln.split("\t")[:2]
                preds[parse_ipad(ip)] = Fraction(val)
    else:
        preds = bundled_predictions()
    _emit(compare(rep, preds, args.p, args.g).to_text(), args.out)


def cmd_selftest(args):
    from .harness.selftest import run_selftest

    ok = run_selftest(quick=args.quick, stream=sys.stdout)
    return EXIT_OK if ok else EXIT_SELFTEST


def _intervals(args):
    from .harness.census import DEFAULT_INTERVALS

    if not args.intervals:
        return DEFAULT_INTERVALS
    out = []
    for part in args.intervals.split(","):
        lo, _, hi = part.partition("-")
        out.append((int(lo), int(hi)))
    return tuple(out)


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schursigma", description="Schur sigma-groups, relation measures and IPAD statistics.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=3, help="odd prime (default 3)")
    common.add_argument("--g", type=int, default=2, help="generator rank (default 2)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; work runs in one thread")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--budget-tuples", type=int, default=10**6, help="relation tuples to enumerate")
    common.add_argument("--budget-lifts", type=int, default=10**6, help="relation lifts per node")
    common.add_argument("--budget-gens", type=int, default=None, help="pc generators of free quotients")
    common.add_argument("--max-mult-rank", type=int, default=8)
    common.add_argument("--max-order", type=int, default=None, help="expand only nodes of order <= p^E")
    common.add_argument("--aut-budget", type=int, default=200_000, help="largest orbit of subspaces to enumerate")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("free-quotient", parents=[common], help="order or presentation of F/P_c(F)")
    sp.add_argument("--c", type=int, required=True)
    sp.add_argument("--presentation", action="store_true")
    sp.set_defaults(func=cmd_free_quotient)

    sp = sub.add_parser("enumerate", parents=[common], help="measure of every class-c Schur group")
    sp.add_argument("--c", type=int, default=2)
    sp.add_argument("--sample", type=int, default=0, help="Monte Carlo with this many tuples")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("measure", parents=[common], help="closed-form measure of a group")
    sp.add_argument("group", help="presentation file, or - for stdin")
    sp.add_argument("--certified", action="store_true", help="require a Schur witness first")
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("ipad", parents=[common], help="IPAD of a group")
    sp.add_argument("group", help="presentation file, or - for stdin")
    sp.set_defaults(func=cmd_ipad)

    for verb, func, helptext in (("tree", cmd_tree, "expand the Schur sigma-tree"),
                                 ("survey", cmd_survey, "resolved and unresolved mass per IPAD")):
        sp = sub.add_parser(verb, parents=[common], help=helptext)
        sp.add_argument("--max-class", type=int, default=3)
        sp.set_defaults(func=func)
        if verb == "tree":
            sp.add_argument("--all-children", action="store_true", help="also record non-Schur children")
        else:
            sp.add_argument("--tree", help="survey a saved tree file instead of expanding")
            sp.add_argument("--target", action="append", help="only expand towards this IPAD (repeatable)")
            sp.add_argument("--targets-from", help="CSV file of field data, or 'bundled'; its top IPADs become targets")
            sp.add_argument("--resolved-only", action="store_true")

    for verb, func, helptext in (("census", cmd_census, "IPAD frequencies per discriminant interval"),
                                 ("compare", cmd_compare, "observed proportions against predictions")):
        sp = sub.add_parser(verb, parents=[common], help=helptext)
        sp.add_argument("data", nargs="?", default="bundled", help="CSV file, or 'bundled' for the bundled data")
        sp.add_argument("--intervals", help="comma-separated lo-hi ranges of |d| (default five of width 200000)")
        sp.add_argument("--top", type=int, default=14)
        sp.set_defaults(func=func)
        if verb == "census":
            sp.add_argument("--proportions", action="store_true")
        else:
            sp.add_argument("--predictions", help="survey output to compare against (default: bundled values)")

    sp = sub.add_parser("selftest", parents=[common], help="check the anchored facts")
    sp.add_argument("--quick", action="store_true", help="skip the slower checks")
    sp.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        rc = args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return rc or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
