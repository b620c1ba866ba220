"""Command-line front end: ``grl <area> <verb> ...``.

Exit codes: 0 success, 1 property refuted or a definite negative answer
(Nontrivial, Infinite, counterexample found), 2 Unknown or budget exceeded,
3 input error (a JSON error object is printed).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .exactalg import DimensionMismatch, Field, InvalidComplex
from .fds import (
    ComplexFamily,
    ConcreteFds,
    FdsError,
    RankProfile,
    SplitFamily,
    as_fraction,
    bigger_than_counterexample,
    colimit_rank,
    direct_sum,
    estimate_growth_rate,
    filtration_dominance_report,
    growth_rate,
    les_collapse_isomorphism,
    random_exact_triangle,
    random_split_family,
    split_bound_rows,
    tensor,
    verify_isomorphism,
)
from .groups import (
    Exceeded,
    GroupError,
    Presentation,
    abelianization,
    conjugacy_count,
    conjugacy_growth_rate,
    free_product,
    parse_group_class,
    search_nontrivial_quotient,
    todd_coxeter,
    triviality_semidecide,
)
from .handles import (
    HandleError,
    HomotopyLedger,
    build_N2,
    build_N4,
    build_NP,
    end_connect_sum,
    framing_obstruction_group,
    product_with_T,
    synth_boundary_model,
    verify_contractible,
)
from .verdict import DISCLAIMER, STATUS, Verdict, cn_comparison, distinguish, np_verdict, replay

OK, NEGATIVE, UNKNOWN, INPUT_ERROR = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# ---------------------------------------------------------------------------
# input helpers


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _presentation(path: str) -> Presentation:
    return Presentation.from_json(_read_json(path))


def _fds_operand(text: str, field: Field):
    """A profile literal such as ``poly:2`` or a path to a concrete system."""
    if not os.path.exists(text) and text != "-" and (":" in text or text in ("zero", "exp")):
        return RankProfile.parse(text)
    return ConcreteFds.from_json(_read_json(text), field)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default)


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _fds_result(x) -> dict:
    if isinstance(x, RankProfile):
        return {"profile": x.to_json(), "gamma": growth_rate(x).to_json()}
    return {"system": x.to_json(), "colimit_ranks": [colimit_rank(x, i) for i in range(len(x.grid))] if x.stabilized else None}


# ---------------------------------------------------------------------------
# fds verbs


def _fds_gamma(args, field):
    if args.profile:
        p = RankProfile.parse(args.profile)
        g = growth_rate(p)
        return OK, {"profile": p.to_json(), "gamma": g.to_json(), "exact": True}, str(g)
    if not args.file:
        raise InputError("fds gamma needs --profile or a system file")
    v = ConcreteFds.from_json(_read_json(args.file), field)
    est = estimate_growth_rate(v)
    return OK, {"estimate": est.to_json(), "exact": False}, f"{est.rate} (window estimate, slope {est.slope})"


def _fds_combine(args, field, op):
    a, b = _fds_operand(args.left, field), _fds_operand(args.right, field)
    out = op(a, b)
    res = _fds_result(out)
    text = str(res["gamma"]) if "gamma" in res else _dump(res["system"])
    return OK, res, text


def _fds_bigger(args, field):
    v = ConcreteFds.from_json(_read_json(args.bigger), field)
    w = ConcreteFds.from_json(_read_json(args.smaller), field)
    cex = bigger_than_counterexample(v, w, args.a, args.b, args.c)
    if cex is None:
        return OK, {"holds": True, "constants": [args.a, args.b, args.c]}, "holds on the window"
    x, y = cex
    return NEGATIVE, {"holds": False, "counterexample": {"x": str(x), "y": str(y)}}, f"refuted at x = {x}, y = {y}"


def _fds_les(args, field):
    rng = random.Random(args.seed)
    failures = []
    for trial in range(args.trials):
        v, w, u, tri, c = random_exact_triangle(field, rng, args.length, args.max_block)
        phi, phi_inv = les_collapse_isomorphism(v, w, u, tri, c)
        if not verify_isomorphism(v, w, phi, phi_inv):
            failures.append(trial)
    res = {"trials": args.trials, "failures": failures, "seed": args.seed}
    return (OK if not failures else NEGATIVE), res, f"{args.trials - len(failures)}/{args.trials} isomorphisms verified"


def _fds_filtration(args, field):
    fam = ComplexFamily.from_json(_read_json(args.file), field)
    r = filtration_dominance_report(fam, args.m, args.n)
    res = {"holds": r.holds, "kappa": str(r.kappa), "constants": [str(c) for c in r.constants],
           "submodel_bigger": r.submodel_bigger, "transported_bigger": r.transported_bigger}
    return (OK if r.holds else NEGATIVE), res, ("dominance holds" if r.holds else "dominance refuted") + f", kappa = {r.kappa}"


def _split_rows_json(rows):
    return [{"x": str(r.x), "h_b": r.h_b_image, "h_q": r.h_q_image, "a_dim": r.a_dim, "holds": r.holds} for r in rows]


def _fds_splitbound(args, field):
    if args.file:
        rows = split_bound_rows(SplitFamily.from_json(_read_json(args.file), field), args.c)
        bad = [r for r in rows if not r.holds]
        return (OK if not bad else NEGATIVE), {"rows": _split_rows_json(rows)}, f"{len(rows) - len(bad)}/{len(rows)} rows satisfy the bound"
    rng = random.Random(args.seed)
    checked, violations = 0, []
    for trial in range(args.trials):
        fam = random_split_family(field, rng, sub=args.shape)
        for c in sorted(set(fam.grid[j] / fam.grid[i] for i in range(len(fam.grid)) for j in range(i, len(fam.grid)))):
            for r in split_bound_rows(fam, c):
                checked += 1
                if not r.holds:
                    violations.append({"trial": trial, "c": str(c), "x": str(r.x)})
    res = {"trials": args.trials, "checked": checked, "violations": violations, "seed": args.seed}
    return (OK if not violations else NEGATIVE), res, f"{len(violations)} violations in {checked} checks"


# ---------------------------------------------------------------------------
# group verbs


def _group_h1(args, field):
    ab = abelianization(_presentation(args.file))
    return OK, ab.to_json(), str(ab)


def _group_freeprod(args, field):
    ps = [_presentation(f) for f in args.files]
    out = free_product(*ps).to_json()
    if args.out:
        Path(args.out).write_text(_dump(out) + "\n", encoding="utf-8")
    return OK, out, _dump(out)


def _group_tc(args, field):
    p = _presentation(args.file)
    try:
        t = todd_coxeter(p, args.max_cosets)
    except Exceeded as exc:
        return UNKNOWN, {"status": "Exceeded", "budget": exc.budget, "defined": exc.defined}, f"Exceeded after {exc.defined} cosets"
    return OK, {"status": "Finite", "order": t.order}, f"order {t.order}"


def _group_quotient(args, field):
    w = search_nontrivial_quotient(_presentation(args.file), args.max_degree)
    if w is None:
        return UNKNOWN, {"status": "NoWitness", "max_degree": args.max_degree}, f"no nontrivial map to S_n for n <= {args.max_degree}"
    return NEGATIVE, {"status": "Nontrivial", "witness": w.to_json()}, "Nontrivial: " + ", ".join(w.to_json()["cycles"])


def _group_trivial(args, field):
    t = triviality_semidecide(_presentation(args.file), args.max_cosets, args.max_degree)
    code = {"Trivial": OK, "Nontrivial": NEGATIVE, "Unknown": UNKNOWN}[t.status]
    return code, t.to_json(), f"{t.status} ({t.method})"


def _group_conjcount(args, field):
    g = parse_group_class(args.group_class)
    table = conjugacy_count(g, args.x_max)
    est = table.tail_estimate()
    res = {"group": str(g), **table.to_json(), "tail_estimate": est.to_json()}
    return OK, res, " ".join(str(c) for c in table.counts)


def _group_conjrate(args, field):
    g = parse_group_class(args.group_class)
    rate = conjugacy_growth_rate(g)
    return OK, {"group": str(g), "gamma_cong": rate.to_json()}, str(rate)


# ---------------------------------------------------------------------------
# handle verbs


def _ledger_out(args, l: HomotopyLedger):
    data = l.to_json()
    if args.out:
        Path(args.out).write_text(_dump(data) + "\n", encoding="utf-8")
    summary = {"homology": l.homology.to_json(), "half_dim": l.half_dim, "acyclic": l.is_acyclic(),
               "sphere_degree": l.sphere_degree(), "ledger": data}
    h = l.homology
    groups = ", ".join(f"H_{i} = {h.describe(i)}" for i in h.nonzero_degrees()) or "all zero"
    return OK, summary, f"half_dim {l.half_dim}; {groups}"


def _handle_stage(stage):
    def run(args, field):
        p = _presentation(args.file)
        l = synth_boundary_model(p, args.n)
        if stage in ("n2", "n4"):
            l = build_N2(l)
        if stage == "n4":
            l = build_N4(product_with_T(l))
        if stage == "np":
            l = build_NP(p, args.n)
        return _ledger_out(args, l)
    return run


def _handle_sum(args, field):
    l1 = HomotopyLedger.from_json(_read_json(args.left))
    l2 = HomotopyLedger.from_json(_read_json(args.right))
    return _ledger_out(args, end_connect_sum(l1, l2))


def _handle_verify(args, field):
    l = HomotopyLedger.from_json(_read_json(args.file))
    r = verify_contractible(l, args.max_cosets, args.max_degree)
    code = {"Certified": OK, "HomologyObstruction": NEGATIVE, "Pi1Nontrivial": NEGATIVE, "Pi1Unknown": UNKNOWN}[r.status]
    return code, r.to_json(), r.status


def _handle_framing(args, field):
    g = framing_obstruction_group(args.sphere_dim, args.rank, not args.unoriented)
    return OK, {"sphere_dim": args.sphere_dim, "bundle_rank": args.rank, "group": g}, g


# ---------------------------------------------------------------------------
# verdict verbs


_VERDICT_CODES = {"Finite": OK, "Infinite": NEGATIVE, "Interval": UNKNOWN, "Unknown": UNKNOWN}


def _verdict_json(v: Verdict) -> dict:
    out = v.to_json()
    out["replay_ok"] = replay(v)
    return out


def _verdict_np(args, field):
    v = np_verdict(_presentation(args.file), args.n, args.max_cosets, args.max_degree)
    return _VERDICT_CODES[v.conclusion], _verdict_json(v), f"{v.conclusion}: Gamma in [{v.lower}, {v.upper}]"


def _verdict_distinguish(args, field):
    status, v1, v2 = distinguish(_presentation(args.left), _presentation(args.right), args.n, args.max_cosets, args.max_degree)
    code = {"Distinguished": OK, "NotDistinguished": NEGATIVE, "Unknown": UNKNOWN}[status]
    return code, {"status": status, "verdicts": [_verdict_json(v1), _verdict_json(v2)]}, f"{status} ({v1.conclusion} vs {v2.conclusion})"


def _verdict_cn(args, field):
    data = _read_json(args.file)
    if "conclusion" in data:
        v = Verdict.from_json(data)
    else:
        v = np_verdict(Presentation.from_json(data), args.n, args.max_cosets, args.max_degree)
    status = cn_comparison(v)
    return (OK if status == "NotStandardCn" else UNKNOWN), {"status": status, "verdict": _verdict_json(v)}, status


# ---------------------------------------------------------------------------
# corpus


CORPUS_COLUMNS = ("file", "name", "generators", "relators", "group_fact", "method", "conclusion", "lower", "upper", "cn", "replay", "error")


def corpus_row(path: str, n: int = 8, max_cosets: int = 100_000, max_degree: int = 5) -> dict:
    row = dict.fromkeys(CORPUS_COLUMNS, "")
    row["file"] = Path(path).name
    try:
        p = Presentation.load(path)
        v = np_verdict(p, n, max_cosets, max_degree)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row.update(name=p.name, generators=p.generators, relators=len(p.relators), group_fact=v.group_fact,
               method=v.facts["group_evidence"]["method"], conclusion=v.conclusion, lower=str(v.lower),
               upper=str(v.upper), cn=cn_comparison(v), replay=replay(v))
    return row


def corpus_run(directory, n: int = 8, max_cosets: int = 100_000, max_degree: int = 5, jobs: int = 1) -> list[dict]:
    """One verdict row per ``*.json`` file, ordered by filename."""
    d = Path(directory)
    if not d.is_dir():
        raise InputError(f"not a directory: {directory}")
    files = sorted(str(f) for f in d.glob("*.json"))
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(corpus_row, files, [n] * len(files), [max_cosets] * len(files), [max_degree] * len(files)))
    return [corpus_row(f, n, max_cosets, max_degree) for f in files]


def _corpus(args, field):
    rows = corpus_run(args.directory, args.n, args.max_cosets, args.max_degree, args.jobs)
    lines = ["\t".join(CORPUS_COLUMNS)] + ["\t".join(str(r[c]) for c in CORPUS_COLUMNS) for r in rows]
    return OK, {"columns": list(CORPUS_COLUMNS), "rows": rows}, "\n".join(lines)


# ---------------------------------------------------------------------------
# parser and dispatch


def _fraction_arg(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the full JSON report")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-cosets", type=int, default=100_000)
    common.add_argument("--max-degree", type=int, default=5)
    common.add_argument("--x-max", type=int, default=40)
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    common.add_argument("--field", choices=("f2", "q"), default=None, help="overrides GRL_FIELD")

    top = _Parser(prog="grl", description="Growth-rate toolkit: filtered directed systems, groups, handle ledgers, verdicts.")
    top.add_argument("--version", action="version", version=f"grl {__version__}")
    areas = top.add_subparsers(dest="area", required=True, parser_class=_Parser)

    def verb(group, name, handler, help=None):
        sp = group.add_parser(name, parents=[common], help=help)
        sp.set_defaults(handler=handler)
        return sp

    fds = areas.add_parser("fds", help="filtered directed systems").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    sp = verb(fds, "gamma", _fds_gamma, "growth rate of a profile (exact) or system (estimate)")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--profile")
    for name, op in (("tensor", tensor), ("sum", direct_sum)):
        sp = verb(fds, name, lambda a, f, op=op: _fds_combine(a, f, op))
        sp.add_argument("left", help="profile literal (poly:2) or system JSON")
        sp.add_argument("right")
    sp = verb(fds, "bigger", _fds_bigger, "is BIGGER bigger than SMALLER with constants (A, B, C)")
    sp.add_argument("bigger")
    sp.add_argument("smaller")
    for c in ("a", "b", "c"):
        sp.add_argument(f"--{c}", type=_fraction_arg, default=Fraction(1))
    sp = verb(fds, "les", _fds_les, "random exact triangles through the collapse isomorphism")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--length", type=int, default=4)
    sp.add_argument("--max-block", type=int, default=2)
    sp = verb(fds, "filtration", _fds_filtration)
    sp.add_argument("file")
    sp.add_argument("--m", type=_fraction_arg, required=True)
    sp.add_argument("--n", type=_fraction_arg, required=True)
    sp = verb(fds, "splitbound", _fds_splitbound)
    sp.add_argument("file", nargs="?")
    sp.add_argument("--c", type=_fraction_arg, default=Fraction(1))
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--shape", choices=("a", "b"), default=None, help="which block is the subsystem in random trials")

    grp = areas.add_parser("group", help="finitely presented groups").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for name, handler in (("h1", _group_h1), ("tc", _group_tc), ("quotient", _group_quotient), ("trivial", _group_trivial)):
        verb(grp, name, handler).add_argument("file")
    sp = verb(grp, "freeprod", _group_freeprod)
    sp.add_argument("files", nargs="+")
    sp.add_argument("--out")
    for name, handler in (("conjcount", _group_conjcount), ("conjrate", _group_conjrate)):
        verb(grp, name, handler).add_argument("group_class", help="e.g. freeabelian:2, free:2, symmetric:3, freeproduct:cyclic:2,cyclic:2")

    hdl = areas.add_parser("handle", help="handle ledgers").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for name in ("model", "n2", "n4", "np"):
        sp = verb(hdl, name, _handle_stage(name))
        sp.add_argument("file")
        sp.add_argument("--n", type=int, default=8)
        sp.add_argument("--out")
    sp = verb(hdl, "sum", _handle_sum)
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--out")
    verb(hdl, "verify", _handle_verify).add_argument("file")
    sp = verb(hdl, "framing", _handle_framing)
    sp.add_argument("--sphere-dim", type=int, required=True)
    sp.add_argument("--rank", type=int, default=3)
    sp.add_argument("--unoriented", action="store_true")

    ver = areas.add_parser("verdict", help="growth-rate verdicts").add_subparsers(dest="verb", required=True, parser_class=_Parser)
    sp = verb(ver, "np", _verdict_np)
    sp.add_argument("file")
    sp.add_argument("--n", type=int, default=8)
    sp = verb(ver, "distinguish", _verdict_distinguish)
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--n", type=int, default=8)
    sp = verb(ver, "cn", _verdict_cn, "compare with standard C^n; accepts a verdict or a presentation")
    sp.add_argument("file")
    sp.add_argument("--n", type=int, default=8)

    sp = areas.add_parser("corpus", parents=[common], help="verdict table for a directory of presentations")
    sp.set_defaults(handler=_corpus)
    sp.add_argument("directory")
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--jobs", type=int, default=1)
    return top


_INPUT_ERRORS = (InputError, FdsError, GroupError, HandleError, DimensionMismatch, InvalidComplex,
                 ValueError, KeyError, TypeError, IndexError)


def dispatch(argv: list[str]) -> tuple[int, str]:
    """Run one command; returns the exit code and the text to print."""
    wants_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        field = Field.parse(args.field) if args.field else Field.default()
        start = time.perf_counter()
        code, result, text = args.handler(args, field)
        elapsed = time.perf_counter() - start
    except _INPUT_ERRORS as exc:
        message = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        err = {"error": type(exc).__name__, "message": message, "exit_code": INPUT_ERROR}
        return INPUT_ERROR, _dump(err)
    if not args.json:
        return code, text
    report = {
        "command": [a for a in argv if a not in ("--json", "--timing")],
        "exit_code": code,
        "result": result,
        "provenance": {
            "version": __version__,
            "field": field.name,
            "budgets": {"max_cosets": args.max_cosets, "max_degree": args.max_degree, "x_max": args.x_max},
            "seed": args.seed,
            "rule_status": STATUS,
        },
    }
    if args.area == "verdict" or args.area == "corpus":
        report["disclaimer"] = DISCLAIMER
    if args.timing:
        report["timing_seconds"] = round(elapsed, 6)
    return code, _dump(report)


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if argv and argv[0] in ("-h", "--help", "--version") or any(a in ("-h", "--help") for a in argv):
        build_parser().parse_args(argv)  # prints and exits 0
    code, text = dispatch(argv)
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
