"""Command-line front end: every pipeline behind one executable with stable exit codes."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import traceback
from fractions import Fraction
from typing import Mapping

from . import __version__
from .catalog import (
    ParallelGameSpec,
    chsh,
    cglmp,
    cglmp_deterministic,
    i3322_game,
    magic_square,
    parallel_compose,
)
from .core import (
    BellFunctional,
    dump_json,
    format_rational,
    functional_from_json,
    parse_rational,
)
from .dimbounds import xi_lower_kv, xi_lower_parallel, xi_report, xor_bounds
from .errors import BellforgeError, InternalError
from .games import classify, game_to_json, lift_to_deterministic
from .gaplp import bounds_from_report, optimize_gap
from .localbound import local_bound_exact, local_bound_naive, seesaw_lower_bound
from .nsspace import check_equivalence
from .shotstats import GameSummary, kv_bounds, kv_plan, plan_single_shot, pvalue_lhv


def _read_doc(path: str) -> dict:
    if path == "-":
        return json.loads(sys.stdin.read())
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_doc(doc: Mapping, out: str | None) -> None:
    text = dump_json(doc)
    if out in (None, "-"):
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _digest(doc: Mapping) -> str:
    return hashlib.sha256(dump_json(doc).encode()).hexdigest()


def _frac(value: Fraction) -> str:
    return format_rational(value)


def _emit(args, started, results, lines, warnings=(), inputs=None) -> int:
    if getattr(args, "json", False):
        report = {
            "command": list(getattr(args, "_argv", [])),
            "results": results,
            "version": __version__,
            "warnings": list(warnings),
        }
        if inputs:
            report["inputs"] = inputs
        if not getattr(args, "stable", False):
            report["seconds"] = round(time.perf_counter() - started, 6)
        print(dump_json(report))
    else:
        for line in lines:
            print(line)
        for warning in warnings:
            print(f"warning: {warning}")
    return 0


def _load_functional(path: str) -> tuple[BellFunctional, dict]:
    doc = _read_doc(path)
    return functional_from_json(doc), doc


def _catalog_game(name: str):
    base, _, arg = name.lower().partition(":")
    base = base.replace("_", "-")
    if base == "chsh":
        return "chsh", chsh()
    if base == "cglmp":
        if not arg:
            raise BellforgeError("cglmp needs an output count, e.g. cglmp:3")
        return f"cglmp:{int(arg)}", cglmp(int(arg))
    if base in ("cglmp-det", "cglmp-deterministic"):
        if not arg:
            raise BellforgeError("cglmp-det needs an output count, e.g. cglmp-det:3")
        return f"cglmp-det:{int(arg)}", cglmp_deterministic(int(arg))
    if base == "i3322":
        return "i3322", i3322_game()
    if base in ("magicsquare", "magic-square"):
        return "magicsquare", magic_square()
    raise BellforgeError(f"unknown catalog game {name!r}")


def cmd_catalog(args) -> int:
    name, game = _catalog_game(args.name)
    if args.parallel:
        threshold = int(args.threshold) if args.threshold is not None else None
        delta = parse_rational(args.delta, exact=False) if args.delta is not None else None
        if threshold is None and delta is None:
            threshold = args.parallel
        spec = ParallelGameSpec(game, args.parallel, threshold=threshold, delta=delta)
        game = parallel_compose(spec)
        name = f"{name}^{args.parallel}"
    _write_doc(game_to_json(game, meta={"name": name}), args.out)
    return 0


def cmd_localbound(args) -> int:
    started = time.perf_counter()
    functional, doc = _load_functional(args.source)
    if args.naive:
        result = local_bound_naive(functional)
    elif args.seesaw:
        result = seesaw_lower_bound(functional, restarts=args.seesaw, seed=args.seed)
    else:
        result = local_bound_exact(functional, threads=args.threads, budget=args.budget)
    results = {
        "value": _frac(result.value),
        "value_float": float(result.value),
        "exact": result.exact,
        "engine": result.engine,
        "strategies_scanned": result.strategies_scanned,
        "alice": list(result.alice.assignment),
        "bob": list(result.bob.assignment),
    }
    kind = "local bound" if result.exact else "local bound (lower estimate)"
    lines = [f"{kind}: {_frac(result.value)} = {float(result.value)!r}"]
    return _emit(args, started, results, lines, inputs={"functional": _digest(doc)})


def cmd_optimize(args) -> int:
    started = time.perf_counter()
    functional, doc = _load_functional(args.source)
    report = optimize_gap(
        functional,
        lexicographic=not args.no_lex,
        compute_ns_bound=not args.no_ns_bound,
    )
    nonzero = [(i, c) for i, c in enumerate(report.gamma) if c]
    results = {
        "g": _frac(report.g),
        "alpha": _frac(report.alpha),
        "gamma_nonzero": [{"index": i, "v": _frac(c)} for i, c in nonzero],
        "gamma_size": len(report.gamma),
        "certificate_digest": report.certificate.digest,
        "lex_passes": report.lex_passes,
        "pivots": report.pivots,
    }
    if report.ns_bound is not None:
        results["ns_bound"] = _frac(report.ns_bound)
    lines = [
        f"minimal spread g: {_frac(report.g)} = {float(report.g)!r}",
        f"offset alpha: {_frac(report.alpha)} = {float(report.alpha)!r}",
        f"gamma: {len(nonzero)} nonzero of {len(report.gamma)}",
        f"certificate: verified, digest {report.certificate.digest[:16]}",
    ]
    if report.ns_bound is not None:
        lines.append(f"no-signalling bound of game: {_frac(report.ns_bound)}")

    local_bound = None
    if args.local_bound is not None:
        local_bound = parse_rational(args.local_bound, exact=False)
    elif args.compute_local_bound:
        local_bound = local_bound_exact(functional, threads=args.threads).value
        results["functional_local_bound"] = _frac(local_bound)
        lines.append(f"functional local bound: {_frac(local_bound)}")
    if local_bound is not None and args.tsirelson is not None:
        bounds = bounds_from_report(report, local_bound, args.tsirelson)
        results["omega_l"] = _frac(bounds.omega_local)
        results["omega_l_float"] = float(bounds.omega_local)
        results["omega_q"] = float(bounds.omega_quantum)
        results["chi"] = float(bounds.chi)
        lines += [
            f"omega_l: {_frac(bounds.omega_local)} = {float(bounds.omega_local)!r}",
            f"omega_q: {float(bounds.omega_quantum)!r}",
            f"chi: {float(bounds.chi)!r}",
        ]
    if args.out:
        _write_doc(game_to_json(report.game, meta={"g": _frac(report.g), "alpha": _frac(report.alpha)}), args.out)
    return _emit(args, started, results, lines, inputs={"functional": _digest(doc)})


def cmd_lift(args) -> int:
    started = time.perf_counter()
    functional, doc = _load_functional(args.source)
    game, alpha, g = lift_to_deterministic(functional)
    results = {
        "g": _frac(g),
        "alpha": _frac(alpha),
        "scenario": list(game.scenario.shape[:2]) + [game.scenario.kA, game.scenario.kB],
    }
    lines = [
        f"lifted to {game.scenario.sA}x{game.scenario.sB} inputs, deterministic predicate",
        f"bound map: K -> (K + {_frac(alpha)}) / {_frac(g)}",
    ]
    if args.out:
        _write_doc(game_to_json(game, meta={"g": _frac(g), "alpha": _frac(alpha)}), args.out)
    return _emit(args, started, results, lines, inputs={"functional": _digest(doc)})


def cmd_classify(args) -> int:
    started = time.perf_counter()
    functional, doc = _load_functional(args.source)
    info = classify(functional)
    results = {
        "is_game": info.is_game,
        "is_deterministic": info.is_deterministic,
        "is_unique": info.is_unique,
        "is_xor": info.is_xor,
        "reason": info.reason,
    }
    lines = [
        f"game: {info.is_game}" + (f" ({info.reason})" if info.reason else ""),
        f"deterministic predicate: {info.is_deterministic}",
        f"unique game: {info.is_unique}",
        f"xor game: {info.is_xor}",
    ]
    return _emit(args, started, results, lines, inputs={"functional": _digest(doc)})


def cmd_equivalence(args) -> int:
    started = time.perf_counter()
    m1, doc1 = _load_functional(args.first)
    m2, doc2 = _load_functional(args.second)
    witness = check_equivalence(m1, m2)
    if witness is None:
        results = {"equivalent": False}
        lines = ["not equivalent"]
    else:
        results = {
            "equivalent": True,
            "scale": _frac(witness.scale),
            "translations": [_frac(t) for t in witness.translations],
            "gamma": [_frac(c) for c in witness.gamma],
        }
        lines = [f"equivalent with scale {_frac(witness.scale)}"]
    inputs = {"first": _digest(doc1), "second": _digest(doc2)}
    return _emit(args, started, results, lines, inputs=inputs)


def cmd_plan(args) -> int:
    started = time.perf_counter()
    summary = GameSummary(
        omega_l=parse_rational(args.omega_l, exact=False),
        omega_q=args.omega_q,
        outputs_d=args.outputs,
        local_dim=args.local_dim,
    )
    plan = plan_single_shot(summary, args.delta, args.pvalue, args.qsuccess)
    results = {
        "rounds": plan.rounds,
        "threshold": plan.threshold,
        "rao_bound": plan.rao_bound,
        "rao_bound_log10": plan.rao_bound_log10,
        "quantum_success": plan.quantum_success,
        "dim_exponent": plan.dim_exponent,
    }
    lines = [
        f"rounds: {plan.rounds}",
        f"threshold: {plan.threshold}",
        f"p-value bound: {plan.rao_bound!r} (log10 {plan.rao_bound_log10:.3f})",
        f"quantum success: {plan.quantum_success!r}",
    ]
    if plan.dim_exponent is not None:
        lines.append(f"total dimension: 2^{plan.dim_exponent:.1f}")
    return _emit(args, started, results, lines, warnings=plan.warnings)


def cmd_pvalue(args) -> int:
    started = time.perf_counter()
    omega = parse_rational(args.omega_l, exact=False)
    value = pvalue_lhv(float(omega), args.wins, args.rounds)
    results = {"pvalue": value}
    if args.exact or args.rounds <= 1000:
        exact = pvalue_lhv(omega, args.wins, args.rounds, exact=True)
        results["pvalue_exact"] = _frac(exact)
        lines = [f"p-value: {_frac(exact)} = {float(exact)!r}"]
    else:
        lines = [f"p-value: {value!r}"]
    return _emit(args, started, results, lines)


def cmd_kv(args) -> int:
    started = time.perf_counter()
    if args.pvalue is not None:
        plan = kv_plan(args.pvalue)
        exponent, bounds = plan.exponent, plan.bounds
    elif args.dim_exponent is not None:
        exponent = args.dim_exponent
        bounds = kv_bounds(exponent, args.eta)
    else:
        raise BellforgeError("give a target --pvalue or a --dim-exponent")
    results = {
        "dim_exponent": exponent,
        "eta": bounds.eta,
        "omega_l_upper": bounds.omega_l_upper,
        "omega_q_lower": bounds.omega_q_lower,
    }
    lines = [
        f"dimension: 2^{exponent}",
        f"eta: {bounds.eta!r}",
        f"omega_l <= {bounds.omega_l_upper!r}",
        f"omega_q >= {bounds.omega_q_lower!r}",
    ]
    return _emit(args, started, results, lines)


def cmd_bounds_xi(args) -> int:
    started = time.perf_counter()
    report = xi_report(args.dim, K=args.K)
    results = {
        "dimension": report.dimension,
        "upper_povm": report.upper_povm,
        "upper_projective": report.upper_projective,
    }
    lines = [f"xi upper (projective): {report.upper_projective!r}"]
    if not args.projective:
        lines.insert(0, f"xi upper (povm): {report.upper_povm!r}")
    if args.xor:
        bound = xor_bounds(args.dim, args.K, maxent=args.maxent)
        results["upper_xor"] = bound.value
        results["xor_order"] = bound.order
        results["xor_K"] = bound.K
        kind = "maximally entangled" if args.maxent else "general"
        lines.append(
            f"xi upper (xor, {kind}, K({bound.order}) = {bound.K}): {bound.value!r}"
        )
    return _emit(args, started, results, lines)


def cmd_bounds_xi_lower(args) -> int:
    started = time.perf_counter()
    if args.kv:
        if args.dim_exponent is None:
            raise BellforgeError("--kv needs --dim-exponent")
        value = xi_lower_kv(args.dim_exponent)
        results = {"lower_kv": value, "dim_exponent": args.dim_exponent}
        lines = [f"xi lower (hypercube family): {value!r}"]
    elif args.parallel:
        summary = GameSummary(
            omega_l=parse_rational(args.omega_l, exact=False),
            omega_q=args.omega_q,
            outputs_d=args.outputs,
        )
        value = xi_lower_parallel(summary, args.copies, args.delta)
        log_value = xi_lower_parallel(summary, args.copies, args.delta, log=True)
        results = {"lower_parallel": value, "lower_parallel_log": log_value}
        lines = [f"xi lower (parallel repetition): {value!r} (log {log_value:.3f})"]
    else:
        raise BellforgeError("choose --kv or --parallel")
    return _emit(args, started, results, lines)


def _add_report_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--json", action="store_true", help="machine-readable report")
    parser.add_argument("--stable", action="store_true", help="omit timing from the report")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellforge",
        description="Exact nonlocal-game toolkit: gap optimisation, local bounds, planning.",
    )
    parser.add_argument("--version", action="version", version=f"bellforge {__version__}")
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("catalog", help="emit a built-in game as JSON")
    p.add_argument("name", help="chsh | cglmp:<d> | cglmp-det:<d> | i3322 | magicsquare")
    p.add_argument("--parallel", type=int, default=0, help="compose this many copies")
    p.add_argument("--threshold", type=int, default=None,
                   help="required wins (default: all copies)")
    p.add_argument("--delta", default=None, help="margin defining the threshold")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("localbound", help="exact local bound by strategy enumeration")
    p.add_argument("source", nargs="?", default="-")
    p.add_argument("--exact", action="store_true", help="exact scan (the default)")
    p.add_argument("--naive", action="store_true", help="reference double enumeration")
    p.add_argument("--seesaw", type=int, default=0, metavar="RESTARTS",
                   help="alternating best-response lower bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--budget", type=int, default=1 << 27)
    _add_report_flags(p)
    p.set_defaults(func=cmd_localbound)

    p = sub.add_parser("optimize", help="equivalent game with the largest gap")
    p.add_argument("source", nargs="?", default="-")
    p.add_argument("--tsirelson", type=float, default=None,
                   help="quantum bound of the input functional")
    p.add_argument("--local-bound", default=None,
                   help="known local bound of the input functional")
    p.add_argument("--compute-local-bound", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--no-lex", action="store_true", help="skip the tie-breaking passes")
    p.add_argument("--no-ns-bound", action="store_true")
    p.add_argument("--out", default=None, help="write the optimal game JSON here")
    _add_report_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("lift", help="deterministic-predicate game on doubled inputs")
    p.add_argument("source", nargs="?", default="-")
    p.add_argument("--out", default=None)
    _add_report_flags(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("classify", help="game / deterministic / unique / xor flags")
    p.add_argument("source", nargs="?", default="-")
    _add_report_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("equivalence", help="affine equivalence of two functionals")
    p.add_argument("first")
    p.add_argument("second")
    _add_report_flags(p)
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("plan", help="repetitions needed for a single-shot rejection")
    p.add_argument("--omega-l", required=True)
    p.add_argument("--omega-q", type=float, required=True)
    p.add_argument("--outputs", type=int, required=True)
    p.add_argument("--local-dim", type=int, default=None)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--pvalue", type=float, required=True)
    p.add_argument("--qsuccess", type=float, default=None)
    _add_report_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("pvalue", help="binomial tail p-value of a win count")
    p.add_argument("--wins", type=int, required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--omega-l", required=True)
    p.add_argument("--exact", action="store_true")
    _add_report_flags(p)
    p.set_defaults(func=cmd_pvalue)

    p = sub.add_parser("kv", help="hypercube-game dimension for a target p-value")
    p.add_argument("--pvalue", type=float, default=None)
    p.add_argument("--dim-exponent", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    _add_report_flags(p)
    p.set_defaults(func=cmd_kv)

    p = sub.add_parser("bounds", help="dimension-dependent bounds on the gap measure")
    bounds_sub = p.add_subparsers(dest="bounds_command")

    q = bounds_sub.add_parser("xi", help="upper bounds at a local dimension")
    q.add_argument("--dim", type=int, required=True)
    q.add_argument("--projective", action="store_true")
    q.add_argument("--xor", action="store_true")
    q.add_argument("--K", type=float, default=None)
    q.add_argument("--maxent", action="store_true")
    _add_report_flags(q)
    q.set_defaults(func=cmd_bounds_xi)

    q = bounds_sub.add_parser("xi-lower", help="constructive lower bounds")
    q.add_argument("--kv", action="store_true")
    q.add_argument("--dim-exponent", type=int, default=None)
    q.add_argument("--parallel", action="store_true")
    q.add_argument("--omega-l", default=None)
    q.add_argument("--omega-q", type=float, default=None)
    q.add_argument("--outputs", type=int, default=None)
    q.add_argument("--copies", type=int, default=None)
    q.add_argument("--delta", type=float, default=None)
    _add_report_flags(q)
    q.set_defaults(func=cmd_bounds_xi_lower)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    raw = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        args = parser.parse_args(raw)
    except SystemExit as exc:
        return 0 if not exc.code else 1
    if not hasattr(args, "func"):
        parser.print_help()
        return 1
    args._argv = raw
    try:
        return args.func(args) or 0
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except BellforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
