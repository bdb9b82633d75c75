"""Command-line front end.

Exit codes: 0 success (for perm-check: permutation lattice), 1 negative
verdict or failed check, 2 parse, validation or usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import CycMackeyError, NotExact, NotPermutation
from .gentle import functor_of, gentle_is_projective, gentle_resolution, max_min
from .generate import KINDS, InstanceSpec, make_instance
from .lattice import is_permutation, perm_multiplicities, tate
from .mackey import (SIX_TERM_POSITIONS, h0, h_0, mackey_validate, predicates,
                     section_cohomology, six_term_check)
from .presenter import gldim_witness, present_lattice, verify_presentation
from .serialize import (dumps, lattice_from_json, lattice_to_json, load_json,
                        mackey_from_json, presentation_to_json)


class UsageError(Exception):
    pass


def _emit(args, obj: dict) -> None:
    text = dumps(obj)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check_pn(args, p: int, n: int) -> None:
    if args.p is not None and args.p != p:
        raise UsageError(f"--p {args.p} does not match the input (p = {p})")
    if args.n is not None and args.n != n:
        raise UsageError(f"--n {args.n} does not match the input (n = {n})")


def _load_lattice(args):
    M = lattice_from_json(load_json(args.file))
    _check_pn(args, M.p, M.n)
    return M


def _load_functor(args):
    """A Mackey functor from a functor file, or h0/h_0 of a lattice file."""
    data = load_json(args.file)
    if isinstance(data, dict) and "action" in data:
        M = lattice_from_json(data)
        X = h0(M) if args.functor == "h0" else h_0(M)
    else:
        X = mackey_from_json(data, validate=False)
    _check_pn(args, X.p, X.n)
    return X


def _mod(V) -> dict:
    return V.to_json()


# ---------------------------------------------------------------- commands

def cmd_perm_check(args) -> int:
    M = _load_lattice(args)
    cert = is_permutation(M)
    out = {"verdict": cert.verdict, "p": M.p, "n": M.n, "rank": M.rank,
           "coinvariant_torsion": [list(t) for t in cert.coinvariant_torsion],
           "h1_torsion": [list(t) for t in cert.h1]}
    if cert.verdict:
        out["multiplicities"] = perm_multiplicities(M)
    _emit(args, out)
    return 0 if cert.verdict else 1


def cmd_perm_decompose(args) -> int:
    M = _load_lattice(args)
    try:
        f = perm_multiplicities(M)
    except NotPermutation:
        _emit(args, {"permutation": False})
        return 1
    _emit(args, {"permutation": True, "multiplicities": f,
                 "orbits": [{"level": k, "count": c, "size": M.p ** k} for k, c in enumerate(f) if c]})
    return 0


def cmd_present(args) -> int:
    M = _load_lattice(args)
    pres = present_lattice(M)
    ok = verify_presentation(M, pres)
    out = presentation_to_json(pres)
    out["verified"] = ok
    _emit(args, out)
    return 0 if ok else 1


def cmd_tate(args) -> int:
    M = _load_lattice(args)
    levels = [args.k] if args.k is not None else list(range(M.n + 1))
    degrees = [args.degree] if args.degree is not None else [-1, 0, 1]
    out = {"p": M.p, "n": M.n, "groups": [
        {"level": k, "degree": d, "group": _mod(tate(M, k, d)), "label": tate(M, k, d).describe()}
        for k in levels for d in degrees]}
    _emit(args, out)
    return 0


def cmd_mackey_axioms(args) -> int:
    X = _load_functor(args)
    try:
        mackey_validate(X)
    except CycMackeyError as exc:
        _emit(args, {"valid": False, "violation": f"{type(exc).__name__}: {exc}"})
        return 1
    pr = predicates(X)
    _emit(args, {"valid": True, "predicates": {
        "i_injective": pr.i_injective, "type_H0": pr.type_H0, "hilbert90": pr.hilbert90,
        "t_surjective": pr.t_surjective, "type_H_0": pr.type_H_0, "co_hilbert90": pr.co_hilbert90}})
    return 0


def cmd_section(args) -> int:
    X = _load_functor(args)
    mackey_validate(X)
    if (args.j is None) != (args.k is None):
        raise UsageError("give both --j and --k, or neither")
    pairs = [(args.j, args.k)] if args.j is not None else [
        (j, k) for k in range(X.n + 1) for j in range(k)]
    sections, status = [], 0
    for j, k in pairs:
        s = section_cohomology(X, j, k)
        try:
            six_term_check(X, j, k)
            exact, where = True, None
        except NotExact as exc:
            exact, where, status = False, str(exc), 1
        sections.append({"j": j, "k": k, "k0": _mod(s.k0), "k1": _mod(s.k1),
                         "c0": _mod(s.c0), "c1": _mod(s.c1),
                         "six_term_exact": exact, "failure_position": where})
    _emit(args, {"p": X.p, "n": X.n, "positions": list(SIX_TERM_POSITIONS), "sections": sections})
    return status


def cmd_gentle(args) -> int:
    d = args.diagram
    F = functor_of(args.p if args.p is not None else 2, d)
    mx, mn = max_min(d)
    res = gentle_resolution(F)
    exact = res.is_exact()
    proj = gentle_is_projective(F)
    _emit(args, {"diagram": d, "n": len(d), "max": mx, "min": mn,
                 "q0": res.q0_mult, "q1": res.q1_mult, "exact": exact,
                 "projective": proj is not None})
    return 0 if exact else 1


def cmd_gldim_witness(args) -> int:
    p = args.p if args.p is not None else 2
    n = args.n if args.n is not None else 1
    w = gldim_witness(p, n)
    _emit(args, {"p": p, "n": n, "statement": f"Ext3(B,T) = {w.ext3_label}",
                 "ext3_torsion": list(w.ext3_torsion),
                 "b_resolution_length": w.b_resolution_length,
                 "b_resolution_multiplicities": [list(m) for m in w.b_resolution_mults],
                 "i_injective_resolution_lengths": {k: v for k, v in w.i_injective_lengths},
                 "h0_resolution_lengths": {k: v for k, v in w.h0_lengths}})
    return 0


def cmd_generate(args) -> int:
    mult = None
    if args.mult:
        try:
            mult = tuple(int(x) for x in args.mult.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --mult {args.mult!r}") from exc
    spec = InstanceSpec(args.seed if args.seed is not None else 0,
                        args.p if args.p is not None else 2,
                        args.n if args.n is not None else 1,
                        args.kind, mult, args.rank)
    M = make_instance(spec)
    _emit(args, lattice_to_json(M))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="the prime p")
    common.add_argument("--n", type=int, help="the group has order p^n")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out", help="write output to FILE instead of standard output")
    common.add_argument("--format", choices=["json"], default="json")

    parser = argparse.ArgumentParser(prog="cycmackey",
                                     description="Lattices and Mackey functors for cyclic p-groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, file_arg=True, functor=False):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if file_arg:
            sp.add_argument("file", help="input JSON file")
        if functor:
            sp.add_argument("--functor", choices=["h0", "h_0"], default="h0",
                            help="functor built from a lattice input")
        sp.set_defaults(func=func)
        return sp

    add("perm-check", cmd_perm_check, "decide whether a lattice is a permutation lattice")
    add("perm-decompose", cmd_perm_decompose, "orbit multiplicities of a permutation lattice")
    add("present", cmd_present, "presentation by permutation lattices")
    sp = add("tate", cmd_tate, "Tate cohomology of the subgroups")
    sp.add_argument("--k", type=int, help="subgroup level (default: all)")
    sp.add_argument("--degree", type=int, choices=[-1, 0, 1], help="degree (default: all)")
    add("mackey-axioms", cmd_mackey_axioms, "validate a Mackey functor", functor=True)
    sp = add("section", cmd_section, "section cohomology and six-term exactness", functor=True)
    sp.add_argument("--j", type=int)
    sp.add_argument("--k", type=int)
    sp = add("gentle", cmd_gentle, "resolve a rank-one gentle functor", file_arg=False)
    sp.add_argument("diagram", help="word over '<' and '>'")
    add("gldim-witness", cmd_gldim_witness, "global dimension witnesses", file_arg=False)
    sp = add("generate", cmd_generate, "generate a seeded random lattice", file_arg=False)
    sp.add_argument("--kind", choices=KINDS, default="permutation+conjugate")
    sp.add_argument("--mult", help="comma-separated orbit multiplicities")
    sp.add_argument("--rank", type=int, help="rank bound or rank")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (CycMackeyError, UsageError, ValueError, KeyError, TypeError,
            OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
