"""Command-line front end: simulate, rmatrix, verify, graph.

Exit codes: 0 success, 1 verification failure or declined computation,
2 malformed input, 3 missing structure backend, 4 size cap exceeded,
5 evolution-mode disagreement.
"""
from __future__ import annotations

import argparse
import json
import random
import sys

from .algebra import FAMILIES, AlgebraSpec
from .automaton import (
    AutomatonState,
    column_diagram_check,
    evolve_T,
    evolve_T_factorized,
    evolve_carrier,
    evolve_fine,
    parse_state,
)
from .backends import BackendMissing, GraphError, export_graph_text, load_graph, make_backend
from .crystal import (
    CapExceeded,
    FormatError,
    Tensor,
    enumerate_crystal,
    parse_element,
    parse_tensor,
    t_closed,
    t_def,
)
from .rmatrix import (
    InapplicableError,
    RMatrixError,
    r_composite,
    r_factorized,
    sample_domain_element,
    verify_theorem,
    yang_baxter_check,
)


def _add_algebra_args(p: argparse.ArgumentParser):
    p.add_argument("--algebra", required=True, choices=FAMILIES)
    p.add_argument("--rank", required=True, type=int)
    p.add_argument("--brace", choices=("upper", "lower"), default="upper")
    p.add_argument("--crystal-graph", action="append", default=[], metavar="PATH",
                   help="crystal graph file; repeatable, one per capacity")


def _spec(args) -> AlgebraSpec:
    return AlgebraSpec(args.algebra, args.rank, args.brace)


def _backend(args):
    return make_backend(_spec(args), tuple(args.crystal_graph))


def _csv_ints(text: str, what: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise FormatError(f"{what} must be comma-separated integers, got {text!r}") from None
    if not vals:
        raise FormatError(f"{what} must not be empty")
    return vals


def _emit(report: dict, path: str | None, echo: bool = True) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    if echo or not path:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# simulate


def _render_rows(states, pad: int, sep: str):
    occupied = [s for s in states if s.window]
    if occupied:
        lo = min(s.window_start for s in occupied) - pad
        hi = max(s.window_start + len(s.window) - 1 for s in occupied) + pad
    else:
        lo, hi = -pad, pad
    return [s.render(lo, hi, sep=sep) for s in states], lo, hi


def cmd_simulate(args) -> int:
    bk = _backend(args)
    spec = bk.spec
    pattern = _csv_ints(args.capacities, "--capacities") if args.capacities else None
    state = parse_state(spec, args.background_k, args.state, pattern, args.window_start)
    for c in set(state.pattern):
        if not bk.covers(c):
            raise BackendMissing(
                f"no backend for {spec.family} rank {spec.rank} B_{c}; "
                f"supply --crystal-graph"
            )
    M_fixed = None if args.M == "auto" else int(args.M)

    def carrier_step(st):
        if M_fixed is not None:
            return evolve_carrier(bk, st, M_fixed)
        nxt, M_used = evolve_T(bk, st)
        _, trace = evolve_carrier(bk, st, M_used)
        return nxt, trace

    k, d = state.k, spec.d
    rows: list[AutomatonState] = [state]
    traces: list[list] = [[]]
    disagreement = None
    if args.mode == "fine":
        for m in range(k + 1, k + args.steps + 1):
            rows.append(evolve_fine(bk, state, m))
            traces.append([])
    else:
        cur = state
        for t in range(1, args.steps + 1):
            if args.mode == "carrier":
                cur, trace = carrier_step(cur)
                traces.append(trace)
            elif args.mode == "factorized":
                cur = evolve_T_factorized(bk, cur, 1)
                traces.append([])
            else:  # all three must agree
                by_carrier, trace = carrier_step(rows[-1])
                by_weyl = evolve_T_factorized(bk, rows[-1], 1)
                by_fine = evolve_fine(bk, state, k + t * d)
                if not (by_carrier == by_weyl == by_fine):
                    disagreement = t
                cur = by_carrier
                traces.append(trace)
            rows.append(cur)

    lines, lo, hi = _render_rows(rows, args.pad, args.sep)
    for line in lines:
        print(line)

    if args.emit_json:
        steps = []
        for idx, st in enumerate(rows):
            m = k + idx if args.mode == "fine" else k + idx * d
            steps.append({
                "m": m,
                "window_start": lo,
                "sites": [st.site(j).word() for j in range(lo, hi + 1)],
                "carrier": [c.word() for c in traces[idx]],
            })
        _emit({
            "schema": 1,
            "algebra": spec.family,
            "rank": spec.rank,
            "brace": spec.brace,
            "k": k,
            "mode": args.mode,
            "steps": steps,
        }, args.emit_json, echo=False)

    if disagreement is not None:
        print(f"modes disagree at step {disagreement}", file=sys.stderr)
        return 5
    return 0


# ---------------------------------------------------------------------------
# rmatrix


def cmd_rmatrix(args) -> int:
    bk = _backend(args)
    spec = bk.spec
    lhs = parse_element(spec, args.lhs)
    rhs = parse_tensor(spec, args.rhs)
    t = Tensor((lhs,) + rhs.factors)
    if args.mode == "oracle":
        image = r_composite(bk, t, 1)
        print(image.word())
        return 0
    margin = args.margin if args.margin is not None else sum(f.l for f in rhs.factors)
    print(t.word())
    try:
        image, trace = r_factorized(bk, t, k=args.k, margin=margin)
    except InapplicableError as err:
        for step in (err.trace.steps if err.trace else ()):
            print(f"S_{step.color} -> {step.state_after.word()}")
        print(f"inapplicable ({err.reason}): {err}", file=sys.stderr)
        return 1
    for step in trace.steps:
        print(f"S_{step.color} -> {step.state_after.word()}")
    print(f"-> {image.word()}")
    return 0


# ---------------------------------------------------------------------------
# verify suites


def cmd_verify_theorem(args) -> int:
    bk = _backend(args)
    shape = _csv_ints(args.shape, "--shape")
    M = None if args.M == "auto" else int(args.M)
    report = verify_theorem(
        bk, shape, k=args.k, trials=args.trials, seed=args.seed,
        margin=args.margin, M=M, jobs=args.jobs,
    )
    _emit(report, args.emit_json)
    return 0 if not report["failures"] else 1


def cmd_verify_yb(args) -> int:
    bk = _backend(args)
    sizes = _csv_ints(args.sizes, "--sizes")
    if len(sizes) != 3:
        raise FormatError("--sizes needs exactly three entries")
    cases, mismatches = yang_baxter_check(bk, sizes)
    report = {
        "schema": 1, "suite": "yb", "algebra": bk.spec.family, "rank": bk.spec.rank,
        "sizes": list(sizes), "cases": cases, "mismatches": mismatches,
        "failures": [] if mismatches == 0 else [{"sizes": list(sizes), "mismatches": mismatches}],
    }
    _emit(report, args.emit_json)
    return 0 if mismatches == 0 else 1


def cmd_verify_tmap(args) -> int:
    bk = _backend(args)
    spec = bk.spec
    levels = sorted(set(range(1, args.l + 1)) | set(bk.graphs))
    failures = []
    checked = 0
    for l in levels:
        if not bk.covers(l):
            continue
        seen = {}
        for el in enumerate_crystal(spec, l):
            checked += 1
            tv = t_def(bk, el)
            if tv != t_closed(el):
                failures.append({"l": l, "element": el.word(), "check": "closed-form",
                                 "expected": list(t_closed(el)), "got": list(tv)})
            if tv in seen:
                failures.append({"l": l, "element": el.word(), "check": "injectivity",
                                 "collides": seen[tv]})
            seen[tv] = el.word()
    report = {
        "schema": 1, "suite": "tmap", "algebra": spec.family, "rank": spec.rank,
        "brace": spec.brace, "levels": levels, "elements": checked,
        "failures": failures,
    }
    _emit(report, args.emit_json)
    return 0 if not failures else 1


def cmd_verify_corollary(args) -> int:
    bk = _backend(args)
    spec = bk.spec
    d = spec.d
    period = d * spec.sigma_order
    failures = []
    passes = 0
    for tnum in range(args.trials):
        rng = random.Random(args.seed + tnum)
        k = tnum % period
        c = rng.randint(1, args.max_cap)
        pool = enumerate_crystal(spec, c)
        width = rng.randint(1, args.max_window)
        window = tuple(rng.choice(pool) for _ in range(width))
        state = AutomatonState(spec, k, 0, window, (c,))
        entry = {"seed": args.seed + tnum, "k": k, "capacity": c,
                 "state": state.render(pad=0, sep=".")}
        bad = []
        by_weyl = evolve_T_factorized(bk, state, 1)
        by_carrier, _ = evolve_T(bk, state)
        by_fine = evolve_fine(bk, state, k + d)
        if by_weyl != by_carrier:
            bad.append({"check": "factorized-vs-carrier",
                        "expected": by_carrier.render(), "got": by_weyl.render()})
        if by_fine != by_carrier:
            bad.append({"check": "fine-vs-carrier",
                        "expected": by_carrier.render(), "got": by_fine.render()})
        if evolve_T_factorized(bk, by_weyl, -1) != state:
            bad.append({"check": "inverse"})
        if by_weyl.weight_profile() != state.weight_profile():
            bad.append({"check": "conservation",
                        "expected": state.weight_profile(),
                        "got": by_weyl.weight_profile()})
        if tnum % 10 == 0:
            sq = evolve_T_factorized(bk, state, 2)
            fine2 = evolve_fine(bk, state, k + 2 * d)
            step2, _ = evolve_T(bk, by_carrier)
            if not (sq == fine2 == step2):
                bad.append({"check": "two-step"})
        if bad:
            entry["problems"] = bad
            failures.append(entry)
        else:
            passes += 1
    report = {
        "schema": 1, "suite": "corollary", "algebra": spec.family, "rank": spec.rank,
        "brace": spec.brace, "trials": args.trials, "passes": passes,
        "failures": failures,
    }
    _emit(report, args.emit_json)
    return 0 if not failures else 1


def cmd_verify_columns(args) -> int:
    bk = _backend(args)
    spec = bk.spec
    d = spec.d
    failures = []
    flagged = 0
    passes = 0
    pool = enumerate_crystal(spec, args.l)
    margin = args.margin if args.margin is not None else args.l
    M = (2 * margin + spec.rank + 2) if args.M == "auto" else int(args.M)
    for tnum in range(args.trials):
        rng = random.Random(args.seed + tnum)
        k = tnum % (d * spec.sigma_order)
        u = sample_domain_element(spec, M, spec.letter_at(k), margin, rng)
        b = rng.choice(pool)
        try:
            rep = column_diagram_check(bk, u, b, k=k, margin=margin)
        except InapplicableError:
            flagged += 1
            continue
        if rep["ok"]:
            passes += 1
        else:
            failures.append({"seed": args.seed + tnum, "k": k,
                             "u": u.word(), "b": b.word(), "report": rep})
    report = {
        "schema": 1, "suite": "columns", "algebra": spec.family, "rank": spec.rank,
        "brace": spec.brace, "l": args.l, "M": M, "margin": margin,
        "trials": args.trials, "passes": passes, "flagged": flagged,
        "failures": failures,
    }
    _emit(report, args.emit_json)
    return 0 if not failures else 1


# ---------------------------------------------------------------------------
# graph


def cmd_graph_check(args) -> int:
    try:
        provider = load_graph(args.path)
    except GraphError as err:
        print(str(err), file=sys.stderr)
        return 1
    print(f"ok: {provider.family} rank {provider.rank} B_{provider.l}")
    return 0


def cmd_graph_export(args) -> int:
    bk = _backend(args)
    if not bk.covers(args.l):
        raise BackendMissing(
            f"nothing to export for {bk.spec.family} rank {bk.spec.rank} B_{args.l}"
        )
    text = export_graph_text(bk, args.l)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="crystal-ca")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the cellular automaton")
    _add_algebra_args(p)
    p.add_argument("--background-k", type=int, default=0)
    p.add_argument("--capacities", default=None,
                   help="periodic site-capacity pattern, e.g. 2,2,1,2,1,2,2")
    p.add_argument("--window-start", type=int, default=0)
    p.add_argument("--state", required=True)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--mode", choices=("carrier", "factorized", "fine", "all"),
                   default="carrier")
    p.add_argument("--M", default="auto")
    p.add_argument("--sep", default=".")
    p.add_argument("--pad", type=int, default=1)
    p.add_argument("--emit-json", default=None, metavar="PATH")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rmatrix", help="apply the combinatorial R matrix")
    _add_algebra_args(p)
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--mode", choices=("oracle", "factorized"), default="oracle")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--margin", type=int, default=None)
    p.set_defaults(func=cmd_rmatrix)

    v = sub.add_parser("verify", help="run a verification suite")
    vs = v.add_subparsers(dest="suite", required=True)

    p = vs.add_parser("theorem")
    _add_algebra_args(p)
    p.add_argument("--shape", required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margin", type=int, default=None)
    p.add_argument("--M", default="auto")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--emit-json", default=None)
    p.set_defaults(func=cmd_verify_theorem)

    p = vs.add_parser("yb")
    _add_algebra_args(p)
    p.add_argument("--sizes", required=True)
    p.add_argument("--emit-json", default=None)
    p.set_defaults(func=cmd_verify_yb)

    p = vs.add_parser("tmap")
    _add_algebra_args(p)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--emit-json", default=None)
    p.set_defaults(func=cmd_verify_tmap)

    p = vs.add_parser("corollary")
    _add_algebra_args(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-window", type=int, default=8)
    p.add_argument("--max-cap", type=int, default=3)
    p.add_argument("--emit-json", default=None)
    p.set_defaults(func=cmd_verify_corollary)

    p = vs.add_parser("columns")
    _add_algebra_args(p)
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margin", type=int, default=None)
    p.add_argument("--M", default="auto")
    p.add_argument("--emit-json", default=None)
    p.set_defaults(func=cmd_verify_columns)

    g = sub.add_parser("graph", help="crystal graph files")
    gs = g.add_subparsers(dest="action", required=True)

    p = gs.add_parser("check")
    p.add_argument("path")
    p.set_defaults(func=cmd_graph_check)

    p = gs.add_parser("export")
    _add_algebra_args(p)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_graph_export)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except BackendMissing as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except CapExceeded as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except GraphError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (InapplicableError, RMatrixError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
