"""Command-line front end.

Exit status: 0 on success, 1 when the answer is a negative verdict
(distinct orbits, nothing to separate), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import sys

from . import alphasets, backforth, conjugacy, gspace, multicode
from .ordinal import parse_ordinal
from .perm import EMPTY, PermError, format_perm, parse_finset, parse_partial


class UsageError(Exception):
    pass


def _space(args) -> gspace.EffectiveGSpace:
    if not args.instance:
        raise UsageError("--instance is required")
    try:
        with open(args.instance) as fh:
            text = fh.read()
    except OSError as err:
        raise UsageError(f"cannot read {args.instance}: {err.strerror}") from None
    return gspace.parse_instance(text).build()


def _point(space, text, flag: str) -> int:
    if text is None:
        raise UsageError(f"{flag} is required")
    return gspace.parse_designator(space, text)


def _sigma(text):
    return EMPTY if text is None else parse_partial(text)


def cmd_refine(args, out) -> int:
    space = _space(args)
    trace = alphasets.stabilization(space, jobs=args.jobs)
    level = trace.stabilization_level.finite
    if args.trace:
        for k in range(1, level + 2):
            out(f"level {k}: {trace.class_count(k)} classes")
    out(f"stabilization_level = {level}")
    return 0


def cmd_rank(args, out) -> int:
    space = _space(args)
    x = _point(space, args.x, "--x")
    out(f"gamma_star = {alphasets.gamma_star(space, x)}")
    return 0


def cmd_iso(args, out) -> int:
    space = _space(args)
    x = _point(space, args.x, "--x")
    y = _point(space, args.y, "--y")
    res = backforth.decide_orbit(space, x, y)
    if res.same:
        out(f"orbit-equal via g={format_perm(res.element)}")
        return 0
    w = res.witness
    out(f"distinct at level {w.level}; witness: {multicode.to_text(w.code)}")
    return 1


def cmd_separate(args, out) -> int:
    space = _space(args)
    x = _point(space, args.x, "--x")
    y = _point(space, args.y, "--y")
    s, d = _sigma(args.sigma), _sigma(args.delta)
    try:
        w = backforth.separate(space, x, s, y, d)
    except alphasets.AlphaError as err:
        if "no separation" in str(err):
            out("no separation exists")
            return 1
        raise
    out(f"level {w.level}; witness: {multicode.to_text(w.code)}")
    return 0


def cmd_multicode(args, out) -> int:
    op = args.op
    if op == "build":
        space = _space(args)
        x = _point(space, args.x, "--x")
        alpha = parse_ordinal(args.alpha or "1")
        out(multicode.to_text(multicode.build_ux(space, x, _sigma(args.sigma), alpha)))
        return 0
    if not args.code:
        raise UsageError("--code is required")
    u = multicode.from_text(args.code)
    if op == "validate":
        kind, rank = multicode.validate(u)
        out(f"{kind} {rank}")
    elif op == "eval":
        space = _space(args)
        for p in sorted(multicode.evaluate(u, space)):
            out(space.name(p))
    elif op == "equiv":
        if not args.code2:
            raise UsageError("--code2 is required")
        out("true" if multicode.equiv(u, multicode.from_text(args.code2)) else "false")
    return 0


def cmd_conjugacy(args, out) -> int:
    if args.f is None or args.g is None:
        raise UsageError("--f and --g are required")
    f = conjugacy.parse_cycle_permutation(args.f)
    g = conjugacy.parse_cycle_permutation(args.g)
    c = parse_finset(args.c or "")
    if args.op == "check":
        res = conjugacy.cosets_disjoint(f, g, c)
        if res.disjoint:
            out(f"DISJOINT k={res.k} m={res.m}")
        elif res.conjugator is not None:
            out(f"NOT-DISJOINT h={res.conjugator}")
        else:
            core = ",".join(f"{a}>{b}" for a, b in sorted(res.core.items()))
            out(f"NOT-DISJOINT core={core or '-'}")
    else:
        res = conjugacy.cosets_disjoint(f, g, c)
        if not res.disjoint:
            out("no separation exists")
            return 1
        out(conjugacy.separating_open_set(f, g, c).describe())
    return 0


def cmd_export_mx(args, out) -> int:
    space = _space(args)
    x = _point(space, args.x, "--x")
    text = gspace.export_mx(space, x)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as err:
            raise UsageError(f"cannot write {args.out}: {err.strerror}") from None
    else:
        out(text.rstrip("\n"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orbitcode", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, points=True):
        sp.add_argument("--instance")
        sp.add_argument("--jobs", type=int, default=1)
        if points:
            sp.add_argument("--x")
            sp.add_argument("--y")

    sp = sub.add_parser("refine", help="refinement trace and stabilization level")
    common(sp, points=False)
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_refine)

    sp = sub.add_parser("rank", help="gamma-star rank of a point")
    common(sp)
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("iso", help="decide whether two points share an orbit")
    common(sp)
    sp.set_defaults(func=cmd_iso)

    sp = sub.add_parser("separate", help="separating code for two coset sets")
    common(sp)
    sp.add_argument("--sigma")
    sp.add_argument("--delta")
    sp.set_defaults(func=cmd_separate)

    sp = sub.add_parser("multicode", help="validate, evaluate, compare or build codes")
    sp.add_argument("op", choices=["eval", "validate", "equiv", "build"])
    common(sp)
    sp.add_argument("--code")
    sp.add_argument("--code2")
    sp.add_argument("--sigma")
    sp.add_argument("--alpha")
    sp.set_defaults(func=cmd_multicode)

    sp = sub.add_parser("conjugacy", help="coset disjointness under conjugation")
    sp.add_argument("op", choices=["check", "separate"])
    sp.add_argument("--f")
    sp.add_argument("--g")
    sp.add_argument("--c")
    sp.set_defaults(func=cmd_conjugacy)

    sp = sub.add_parser("export-mx", help="write the two-sorted structure of a point")
    common(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_mx)
    return p


def run(argv: list[str], out=None, err=None) -> int:
    out = out or (lambda s: print(s))
    err = err or (lambda s: print(s, file=sys.stderr))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        err("error: --jobs must be at least 1")
        return 2
    try:
        return args.func(args, out)
    except (UsageError, gspace.SpaceError, PermError, multicode.CodeError,
            alphasets.AlphaError, ValueError) as exc:
        err(f"error: {exc}")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
