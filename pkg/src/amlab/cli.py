"""Command-line front end.

Every command prints one JSON report to stdout.  Exact rationals are
rendered as 'p/q' strings, never as floats.  Exit codes: 0 when every
requested verdict verified, 2 when a certified result could not be
verified within the step budget, 1 on failures, counterexamples or
configuration errors (the JSON then carries a machine-readable error
code).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import AmlabError, BudgetExceeded
from .schemes import Scheme, hamming, johnson, parse_scheme_spec
from .spectra import CodeVector, parameters
from . import corpus as corpus_mod
from . import designs, engine


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(payload: dict, config: dict, command: str) -> None:
    report = {
        "tool": "amlab",
        "version": __version__,
        "command": command,
        "config": _jsonable(config),
        "result": _jsonable(payload),
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _load_code(args, scheme: Scheme | None = None):
    """Resolve --code: either 'corpus:<name>' or a path to a code file."""
    src = args.code
    if src.startswith("corpus:"):
        entry = corpus_mod.corpus_entry(src.split(":", 1)[1])
        chi = entry.build()
        return chi, chi.scheme
    if scheme is None:
        if not getattr(args, "scheme", None):
            raise AmlabError("--scheme is required when --code is a file")
        scheme = parse_scheme_spec(args.scheme)
    return corpus_mod.load_code(src, scheme), scheme


def _resolve_bases(chi: CodeVector, spec: str):
    """--base: explicit vertex, 'zero', 'auto', or 'all-members'."""
    sch = chi.scheme
    if spec == "all-members":
        return [sch.decode(i) for i in chi.support_indices()]
    if spec == "zero":
        return [sch.decode(0)]
    if spec == "auto":
        if sch.family == "hamming":
            return [sch.decode(0)]
        return [sch.decode(chi.support_indices()[0])]
    if sch.family == "hamming":
        word = tuple(int(c) for c in spec)
    else:
        word = tuple(int(p) for p in spec.split(","))
    return [sch.as_word(word)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_scheme_info(args):
    if args.family == "hamming":
        sch = hamming(args.d, args.q)
    else:
        if args.n is None:
            raise AmlabError("--n is required for johnson schemes")
        sch = johnson(args.n, args.d)
    _emit(sch.describe(), vars(args), "scheme info")
    return 0


def cmd_code_params(args):
    chi, sch = _load_code(args)
    out = []
    for base in _resolve_bases(chi, args.base):
        pars = parameters(chi, base)
        d = pars.as_dict()
        d["base_vertex"] = corpus_mod.format_vertex(sch, base)
        out.append(d)
    _emit(
        {"scheme": sch.spec_string(), "code_size": len(chi), "parameters": out},
        {k: v for k, v in vars(args).items() if k != "func"},
        "code params",
    )
    return 0


def cmd_am_check(args):
    chi, sch = _load_code(args)
    budget = args.budget
    reports = []
    exit_code = 0
    for base in _resolve_bases(chi, args.base):
        if args.version == "1":
            rep = engine.am_v1(chi, base, args.refine, verify=True,
                               verify_designs=args.verify_designs, budget=budget)
        elif args.version == "2":
            rep = engine.am_v2(chi, base, args.refine, verify=True,
                               verify_designs=args.verify_designs, budget=budget)
        elif args.version == "3":
            rep = engine.am_v3(chi, base, verify=True,
                               verify_designs=args.verify_designs, budget=budget)
        elif args.version == "cor1":
            t = args.t if args.t is not None else engine.am_v1(
                chi, base, args.refine, verify=False).t
            rep = engine.cor1_check(chi, base, t, budget=budget)
        elif args.version == "cor2":
            t = args.t if args.t is not None else engine.am_v2(
                chi, base, args.refine, verify=False).t
            rep = engine.cor2_check(chi, base, t, budget=budget)
        else:
            raise AmlabError(f"unknown theorem version {args.version!r}")
        if args.verify_designs and args.t is not None and args.version in "123":
            rep.conclusions = engine.extract_and_check_designs(
                chi, base, args.t, budget
            )
        reports.append(rep)
        if not rep.all_verified:
            exit_code = 1
        elif rep.budget_limited and exit_code == 0:
            exit_code = 2
    _emit(
        {"reports": [r.as_dict() for r in reports]},
        {k: v for k, v in vars(args).items() if k != "func"},
        "am check",
    )
    return exit_code


def cmd_design_verify(args):
    chi, sch = _load_code(args)
    base = _resolve_bases(chi, args.base)[0]
    prof = chi.base_profile(base)
    shells = (
        [k for k in range(sch.D + 1) if prof.occupied[k]]
        if args.all_shells
        else [args.shell]
    )
    results = []
    exit_code = 0
    for k in shells:
        blocks = designs.shell_design_extract(chi, base, k)
        if blocks.block_size < args.t:
            results.append(
                {"shell": k, "checked": False,
                 "reason": f"block size {blocks.block_size} < t"}
            )
            continue
        try:
            res = designs.t_design_check(blocks, args.t, args.budget)
        except BudgetExceeded as exc:
            results.append({"shell": k, "checked": False, "reason": str(exc)})
            exit_code = max(exit_code, 2)
            continue
        results.append({"shell": k, "checked": True, **res.as_dict()})
        if not res.ok:
            exit_code = 1
    _emit(
        {
            "scheme": sch.spec_string(),
            "base": corpus_mod.format_vertex(sch, base),
            "t": args.t,
            "shells": results,
        },
        {k: v for k, v in vars(args).items() if k != "func"},
        "design verify",
    )
    return exit_code


def cmd_bounds_martin(args):
    chi, sch = _load_code(args)
    fn = engine.martin_trichotomy_P if args.side == "P" else engine.martin_trichotomy_Q
    outcome = fn(chi, args.t)
    _emit(
        outcome.as_dict(),
        {k: v for k, v in vars(args).items() if k != "func"},
        "bounds martin",
    )
    return 0 if outcome.ok else 1


def cmd_tmod_decompose(args):
    from . import tlab

    sch = parse_scheme_spec(args.scheme)
    base = _resolve_bases(CodeVector(sch, {0: 1}), args.base)[0] if args.base != "zero" else sch.decode(0)
    ops = tlab.build_operators(sch, base)
    recs = tlab.decompose_modules(ops, seed=args.seed)
    payload = {
        "scheme": sch.spec_string(),
        "base": corpus_mod.format_vertex(sch, base),
        "seed": args.seed,
        "module_count": len(recs),
        "modules": [
            {
                "endpoint": r.endpoint,
                "dual_endpoint": r.dual_endpoint,
                "diameter": r.diameter,
                "displacement": r.displacement,
                "thin": r.thin,
                "dual_thin": r.dual_thin,
                "dim": r.dim,
                "estar_dims": list(r.estar_dims),
                "e_dims": list(r.e_dims),
            }
            for r in recs
        ],
        "signature_multiset": [
            {"signature": _jsonable(sig), "multiplicity": m}
            for sig, m in tlab.signature_multiset(recs)
        ],
    }
    if args.out:
        with open(args.out, "wt", encoding="utf-8") as fh:
            json.dump(_jsonable(payload), fh, indent=2)
    _emit(payload, {k: v for k, v in vars(args).items() if k != "func"}, "tmod decompose")
    return 0


def cmd_tmod_verify(args):
    from . import tlab

    sch = parse_scheme_spec(args.scheme)
    base = sch.decode(0) if args.base in ("zero", "auto") else _resolve_bases(
        CodeVector(sch, {0: 1}), args.base)[0]
    ops = tlab.build_operators(sch, base)
    recs = tlab.decompose_modules(ops, seed=args.seed)
    wanted = args.checks.split(",")
    payload = {"scheme": sch.spec_string(), "seed": args.seed, "checks": {}}
    ok = True
    if "tridiagonal" in wanted:
        v = tlab.verify_tridiagonal(ops, recs)
        payload["checks"]["tridiagonal"] = v.as_dict()
        ok &= v.ok
    if "itt" in wanted:
        v = tlab.verify_itt(ops, recs)
        payload["checks"]["itt"] = v.as_dict()
        ok &= v.ok
    if "split" in wanted or "lemma6" in wanted:
        v = tlab.split_decomposition(ops, recs)
        payload["checks"]["split"] = v.as_dict()
        ok &= v.ok
    _emit(payload, {k: v for k, v in vars(args).items() if k != "func"}, "tmod verify")
    return 0 if ok else 1


def cmd_corpus_list(args):
    entries = [
        {
            "name": e.name,
            "scheme": e.scheme_spec,
            "fingerprint": _jsonable(e.fingerprint),
            "note": e.note,
        }
        for e in corpus_mod.CORPUS.values()
    ]
    _emit({"entries": entries}, {}, "corpus list")
    return 0


def cmd_corpus_emit(args):
    entry = corpus_mod.corpus_entry(args.name)
    chi = entry.build()
    corpus_mod.save_code(chi, args.out)
    _emit(
        {"name": entry.name, "scheme": entry.scheme_spec, "size": len(chi),
         "written_to": args.out},
        {k: v for k, v in vars(args).items() if k != "func"},
        "corpus emit",
    )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="amlab",
        description="Exact Assmus-Mattson analysis on Hamming and Johnson schemes",
    )
    p.add_argument("--threads", type=int, default=1,
                   help="cap on worker threads (execution is deterministic)")
    sub = p.add_subparsers(dest="group", required=True)

    scheme = sub.add_parser("scheme").add_subparsers(dest="cmd", required=True)
    info = scheme.add_parser("info", help="emit the exact scheme descriptor")
    info.add_argument("--family", choices=["hamming", "johnson"], required=True)
    info.add_argument("--d", type=int, required=True)
    info.add_argument("--q", type=int, default=2)
    info.add_argument("--n", type=int, default=None)
    info.add_argument("--json", action="store_true", help="(default) JSON output")
    info.set_defaults(func=cmd_scheme_info)

    code = sub.add_parser("code").add_subparsers(dest="cmd", required=True)
    cp = code.add_parser("params", help="exact parameter bundle of a code")
    cp.add_argument("--scheme", default=None)
    cp.add_argument("--code", required=True, help="code file or corpus:<name>")
    cp.add_argument("--base", default="auto")
    cp.set_defaults(func=cmd_code_params)

    am = sub.add_parser("am").add_subparsers(dest="cmd", required=True)
    ac = am.add_parser("check", help="run an Assmus-Mattson analysis")
    ac.add_argument("--version", required=True, choices=["1", "2", "3", "cor1", "cor2"])
    ac.add_argument("--scheme", default=None)
    ac.add_argument("--code", required=True)
    ac.add_argument("--base", default="auto")
    ac.add_argument("--refine", action="store_true")
    ac.add_argument("--verify-designs", action="store_true")
    ac.add_argument("--t", type=int, default=None)
    ac.add_argument("--budget", type=int, default=None)
    ac.set_defaults(func=cmd_am_check)

    design = sub.add_parser("design").add_subparsers(dest="cmd", required=True)
    dv = design.add_parser("verify", help="exhaustive t-design check per sphere")
    dv.add_argument("--scheme", default=None)
    dv.add_argument("--code", required=True)
    dv.add_argument("--base", default="auto")
    dv.add_argument("--t", type=int, required=True)
    shell_group = dv.add_mutually_exclusive_group(required=True)
    shell_group.add_argument("--shell", type=int)
    shell_group.add_argument("--all-shells", action="store_true")
    dv.add_argument("--budget", type=int, default=None)
    dv.set_defaults(func=cmd_design_verify)

    bounds = sub.add_parser("bounds").add_subparsers(dest="cmd", required=True)
    bm = bounds.add_parser("martin", help="distance-bound trichotomy")
    bm.add_argument("--side", choices=["P", "Q"], required=True)
    bm.add_argument("--scheme", default=None)
    bm.add_argument("--code", required=True)
    bm.add_argument("--t", type=int, default=None)
    bm.set_defaults(func=cmd_bounds_martin)

    tmod = sub.add_parser("tmod").add_subparsers(dest="cmd", required=True)
    td = tmod.add_parser("decompose", help="dense module decomposition")
    td.add_argument("--scheme", required=True)
    td.add_argument("--base", default="zero")
    td.add_argument("--seed", type=int, default=0)
    td.add_argument("--out", default=None)
    td.set_defaults(func=cmd_tmod_decompose)
    tv = tmod.add_parser("verify", help="structural checks on the decomposition")
    tv.add_argument("--checks", default="tridiagonal,itt,split,lemma6")
    tv.add_argument("--scheme", required=True)
    tv.add_argument("--base", default="zero")
    tv.add_argument("--seed", type=int, default=0)
    tv.set_defaults(func=cmd_tmod_verify)

    corpus_p = sub.add_parser("corpus").add_subparsers(dest="cmd", required=True)
    cl = corpus_p.add_parser("list", help="list built-in codes")
    cl.set_defaults(func=cmd_corpus_list)
    ce = corpus_p.add_parser("emit", help="write a built-in code to a file")
    ce.add_argument("--name", required=True)
    ce.add_argument("--out", required=True)
    ce.set_defaults(func=cmd_corpus_emit)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        json.dump({"error": exc.code, "message": str(exc)}, sys.stdout)
        sys.stdout.write("\n")
        return 2
    except AmlabError as exc:
        json.dump({"error": exc.code, "message": str(exc)}, sys.stdout)
        sys.stdout.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
