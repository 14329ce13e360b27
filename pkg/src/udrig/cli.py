"""Command-line interface.

Exit codes: 0 proven / valid / success, 1 refuted / invalid,
2 undecided / failure to construct, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from . import report
from .claims import CongruenceClaim, DistanceClaim, Outcome, parse_claim
from .combinator import StrengthenError, strengthen_diamond, strengthen_star
from .congruence import CongruenceError, TruncationQuery, truncated_equiv_closed_form, truncated_equiv_search
from .creal import CReal, ExprSyntaxError
from .enumerator import InvalidConfiguration, spectrum, try_enumerate, verify
from .gadgets import (
    ClosureBudgetExceeded,
    NoVerifiedConstruction,
    SearchBudget,
    Side,
    attach_rhombus,
    attach_triangle,
    build_chain,
    build_epsilon_witness,
    build_spindle,
    catalog_names,
    constructible_closure,
    load_gadget,
    search_witness,
)
from .geometry import UnknownLabel, validate
from .io import ConfigFormatError, config_to_dict, load_config, save_config
from .refuter import RefuterParams, refute

OK, REFUTED, UNDECIDED, USAGE = 0, 1, 2, 3

log = logging.getLogger("udrig")


class UsageError(Exception):
    pass


def _labels(text: str, n: int) -> list:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n or not all(parts):
        raise UsageError(f"expected {n} comma-separated labels, got {text!r}")
    return parts


def _outcome_code(outcome: Outcome) -> int:
    return {Outcome.PROVEN: OK, Outcome.REFUTED: REFUTED, Outcome.UNDECIDED: UNDECIDED}[outcome]


def _params(args) -> RefuterParams:
    return RefuterParams(restarts=args.restarts, seed=args.seed)


# -- commands ----------------------------------------------------------------------
# Each returns (exit code, report body, summary lines).


def cmd_validate(args, c):
    r = validate(c)
    code = OK if r.valid else (UNDECIDED if r.undecided and not (r.bad_edges or r.undeclared_units) else REFUTED)
    lines = [f"valid: {r.valid}"]
    lines += [f"bad edge: {u}-{v}" for u, v in r.bad_edges]
    lines += [f"undeclared unit pair: {u}-{v}" for u, v in r.undeclared_units]
    lines += [f"undecided pair: {u}-{v}" for u, v in r.undecided]
    return code, {"validation": report.validation(r)}, lines


def cmd_enumerate(args, c):
    e, reason = try_enumerate(c)
    if e is None:
        return UNDECIDED, {"enumeration": None, "reason": reason}, [f"enumeration failed: {reason}"]
    return OK, {"enumeration": report.enumeration(e)}, [f"{len(e)} solutions ({e.method})"]


def cmd_spectrum(args, c):
    x, y = _labels(args.pair, 2)
    sp = spectrum(c, x, y)
    body = {"pair": [x, y], "spectrum": report.spectrum(sp)}
    if not sp.complete:
        return UNDECIDED, body, [f"spectrum incomplete: {sp.reason}"]
    return OK, body, [f"spectrum({x},{y}) = {{{', '.join(v.to_string() for v in sp.values)}}}"]


def _claim(args):
    if not args.claim:
        raise UsageError("--claim is required")
    return parse_claim(args.claim)


def cmd_verify(args, c):
    claim = _claim(args)
    v = verify(c, claim, _params(args))
    return _outcome_code(v.outcome), {"verdict": report.verdict(claim, v)}, [f"{args.claim}: {v.outcome.value}"]


def cmd_refute(args, c):
    claim = _claim(args)
    c.require(*claim.labels)
    v = refute(c, claim, _params(args))
    code = REFUTED if v.refuted else UNDECIDED
    return code, {"verdict": report.verdict(claim, v)}, [f"{args.claim}: {v.outcome.value}"]


def cmd_build(args, c):
    kind = args.kind
    if kind == "catalog":
        if not args.name:
            raise UsageError(f"build catalog needs --name, one of {', '.join(catalog_names())}")
        out = load_gadget(args.name)
    else:
        if c is None:
            raise UsageError(f"build {kind} needs an input configuration")
        if not args.at:
            raise UsageError(f"build {kind} needs --at")
        if kind == "triangle":
            p, q = _labels(args.at, 2)
            out = attach_triangle(c, p, q, Side(args.side))
        elif kind == "rhombus":
            b, d = _labels(args.at, 2)
            out = attach_rhombus(c, b, d)
        elif kind == "chain":
            x, y = _labels(args.at, 2)
            out = build_chain(c, x, y, args.k)
        elif kind == "spindle":
            x, y = _labels(args.at, 2)
            out = build_spindle(c, x, y)
        else:  # epsilon
            x, y = _labels(args.at, 2)
            if not args.eps:
                raise UsageError("build epsilon needs --eps")
            out = build_epsilon_witness(c, x, y, CReal.of(args.eps), SearchBudget.of(args.budget))
    if args.write_config:
        save_config(out, args.write_config)
    return OK, {"configuration": config_to_dict(out)}, [f"built {kind}: {len(out.points)} points, {len(out.unit_edges)} unit edges"]


def cmd_strengthen(args, c):
    claim = _claim(args)
    if isinstance(claim, DistanceClaim):
        res = strengthen_star(c, claim.x, claim.y)
    elif isinstance(claim, CongruenceClaim):
        res = strengthen_diamond(c, claim.k, claim.l, claim.m, claim.n)
    else:
        raise UsageError("strengthen takes a star/wstar or diamond/wdiamond claim")
    strong = type(claim)(*claim.labels)
    v = verify(res.config, strong, _params(args))
    if args.write_config:
        save_config(res.config, args.write_config)
    body = {
        "kits": res.manifest(),
        "configuration": config_to_dict(res.config),
        "verdict": report.verdict(strong, v),
    }
    lines = [f"{len(res.kits)} kits adjoined, {len(res.config.points)} points", f"strong claim: {v.outcome.value}"]
    return _outcome_code(v.outcome), body, lines


def cmd_closure(args, c):
    cands = constructible_closure(c, args.depth, args.cap)
    body = {
        "depth": args.depth,
        "candidates": [
            {"label": k.point.label, "coords": [report.number(x) for x in k.point.coords], "parents": list(k.parents), "depth": k.depth}
            for k in cands
        ],
    }
    return OK, body, [f"{len(cands)} candidates up to depth {args.depth}"]


def cmd_search(args, c):
    x, y = _labels(args.pair, 2)
    eps = CReal.of(args.eps) if args.eps else None
    res = search_witness(c, x, y, SearchBudget.of(args.budget), epsilon=eps)
    body = {
        "pair": [x, y],
        "success": res.success,
        "explored": res.explored,
        "best_spectrum": report.spectrum(res.best_spectrum),
        "configuration": config_to_dict(res.config) if res.success else None,
    }
    if res.success and args.write_config:
        save_config(res.config, args.write_config)
    summary = "witness found" if res.success else "no witness within budget"
    return (OK if res.success else UNDECIDED), body, [f"{summary} ({res.explored} configurations explored)"]


def cmd_congruence(args, c):
    labels = _labels(args.labels, 4) if args.labels else list(c.labels[:4])
    if len(labels) != 4:
        raise UsageError("congruence needs four points a, b, c, d")
    pts = [c.point(lab) for lab in labels]
    try:
        q = TruncationQuery(*pts, N=args.N, denominator_bound=args.denominator_bound)
    except CongruenceError as exc:
        raise UsageError(str(exc)) from None
    closed = truncated_equiv_closed_form(q)
    found = truncated_equiv_search(q)
    rows = []
    lines = [f"{'n':>4}  {'closed':<7} {'search':<7} r"]
    for a, b in zip(closed.levels, found.levels):
        rows.append(
            {
                "n": a.n,
                "closed_form": a.holds,
                "search": b.holds,
                "false_by_search": b.false_by_search,
                "r": None if a.r is None else str(a.r),
                "witness": None
                if not b.holds
                else {"r": str(b.r), "x": b.x.to_strings(), "y": b.y.to_strings()},
            }
        )
        flag = "*" if b.false_by_search else ""
        lines.append(f"{a.n:>4}  {str(a.holds):<7} {str(b.holds) + flag:<7} {'' if a.r is None else a.r}")
    body = {"labels": labels, "levels": rows, "holds": closed.holds, "first_failure": closed.first_failure()}
    lines.append(f"overall: {closed.holds}")
    return (OK if closed.holds else REFUTED), body, lines


COMMANDS = {
    "validate": cmd_validate,
    "enumerate": cmd_enumerate,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "refute": cmd_refute,
    "build": cmd_build,
    "strengthen": cmd_strengthen,
    "closure": cmd_closure,
    "search": cmd_search,
    "congruence": cmd_congruence,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="comparison budget in bits (default: $UDRIG_PRECISION or 256)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=32)
    common.add_argument("--budget", type=int, default=2, help="search budget: points added per branch")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--timing", action="store_true", help="record wall-clock duration in the manifest")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="udrig", description="Unit-distance rigidity toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help, config=True):
        sp = sub.add_parser(name, parents=[common], help=help)
        if config:
            sp.add_argument("config", help="configuration JSON file")
        return sp

    sp = add("validate", "check declared unit edges against the coordinates")
    sp = add("enumerate", "all unit-preserving placements modulo isometry")
    sp = add("spectrum", "achievable image distances of a pair")
    sp.add_argument("--pair", required=True, help="X,Y")
    sp = add("verify", "decide a claim")
    sp.add_argument("--claim", required=True, help="star:X,Y | wstar:X,Y | diamond:K,L,M,N | wdiamond:... | eps:X,Y,expr")
    sp = add("refute", "numerical counterexample search with exact certification")
    sp.add_argument("--claim", required=True)
    sp = sub.add_parser("build", parents=[common], help="apply a gadget builder")
    sp.add_argument("kind", choices=["triangle", "rhombus", "chain", "spindle", "epsilon", "catalog"])
    sp.add_argument("config", nargs="?", help="configuration JSON file")
    sp.add_argument("--at", help="attachment labels, e.g. B,D")
    sp.add_argument("--side", choices=["up", "down"], default="up")
    sp.add_argument("--k", type=int, default=2, help="chain length")
    sp.add_argument("--eps", help="epsilon expression for build epsilon")
    sp.add_argument("--name", help="catalog gadget name")
    sp.add_argument("--write-config", help="also write the built configuration file here")
    sp = add("strengthen", "adjoin epsilon-witness kits for every pair")
    sp.add_argument("--claim", required=True, help="star:X,Y or diamond:K,L,M,N (weak variants accepted)")
    sp.add_argument("--write-config")
    sp = add("closure", "unit-circle intersection candidates")
    sp.add_argument("--depth", type=int, default=1)
    sp.add_argument("--cap", type=int, default=500)
    sp = add("search", "best-first search for a witness configuration")
    sp.add_argument("--pair", required=True)
    sp.add_argument("--eps", help="accept spectra within eps of the distance")
    sp.add_argument("--write-config")
    sp = add("congruence", "finite truncations of the congruence definition")
    sp.add_argument("--N", type=int, default=5)
    sp.add_argument("--denominator-bound", type=int, default=64)
    sp.add_argument("--labels", help="a,b,c,d (default: the first four points)")
    return p


def _parameters(args) -> dict:
    skip = {"command", "config", "out", "timing", "verbose", "write_config"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    if params.get("precision") is None:
        params["precision"] = int(os.environ.get("UDRIG_PRECISION", 0)) or 256
    return params


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.precision is not None:
        if args.precision < 16:
            print("udrig: --precision must be at least 16 bits", file=sys.stderr)
            return USAGE
        os.environ["UDRIG_PRECISION"] = str(args.precision)
    start = time.perf_counter()
    inputs = []
    try:
        c = None
        if getattr(args, "config", None):
            inputs.append(args.config)
            c = load_config(args.config)
        code, body, lines = COMMANDS[args.command](args, c)
    except (NoVerifiedConstruction, StrengthenError, ClosureBudgetExceeded) as exc:
        return _emit(args, inputs, start, UNDECIDED, {"error": str(exc)}, [f"failed: {exc}"])
    except (ConfigFormatError, UsageError, ExprSyntaxError, UnknownLabel, InvalidConfiguration, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"udrig: {msg}", file=sys.stderr)
        return USAGE
    except OSError as exc:
        print(f"udrig: {exc}", file=sys.stderr)
        return USAGE
    return _emit(args, inputs, start, code, body, lines)


def _emit(args, inputs, start, code, body, lines) -> int:
    duration = time.perf_counter() - start if args.timing else None
    doc = {"manifest": report.manifest(args.command, inputs, _parameters(args), duration), "exit_code": code, **body}
    text = report.dumps(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        for line in lines:
            print(line)
    else:
        for line in lines:
            print(line, file=sys.stderr)
        sys.stdout.write(text)
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
