"""Command-line front end.

Subcommands: ``gen`` compiles an instance to QUBO artifacts, ``solve`` runs
the annealer, ``verify`` audits an assignment, ``oracle`` answers by brute
force, ``stats`` prints matrix statistics, and ``check`` runs the whole
pipeline and reports agreement between the QUBO route and the oracle.

``check`` exit codes: 0 containment confirmed by a verified zero-energy
witness, 1 non-containment confirmed by the oracle, 2 inconclusive (no
zero-energy state found and the oracle was skipped), 3 errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import formats
from .decode import decode, encode_witness, verify_display
from .graphs import GraphError
from .oracle import MAX_ORACLE_RETICULATIONS, OracleTooLarge, displays
from .qubo import (LabelMismatch, NotDisplayable, build_qubo,
                   compile_instance, stats)
from .solver import AnnealParams, evaluate, solve_anneal

ERROR_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(ERROR_EXIT)


def _dump(obj, path: str | None) -> None:
    obj = {"version": "1", **obj}
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _read_instance(args):
    text = Path(args.input).read_text()
    return formats.parse_instance(text, format=args.format)


def _anneal_params(args) -> AnnealParams:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("TC_QUBO_SEED", "0"))
    return AnnealParams(restarts=args.restarts, sweeps=args.sweeps, seed=seed)


def cmd_gen(args) -> int:
    network, tree = _read_instance(args)
    inst = compile_instance(network, tree, subset_leaves=args.subset_leaves)
    q = build_qubo(inst)
    prefix = args.output
    Path(prefix + ".qubo").write_text(formats.write_qubo_text(q))
    Path(prefix + ".varmap").write_text(formats.write_varmap(inst.layout))
    _dump(stats(q).to_obj(), prefix + ".stats.json")
    _dump(stats(q).to_obj(), None)
    return 0


def cmd_stats(args) -> int:
    network, tree = _read_instance(args)
    inst = compile_instance(network, tree, subset_leaves=args.subset_leaves)
    _dump(stats(build_qubo(inst)).to_obj(), args.output)
    return 0


def cmd_solve(args) -> int:
    network, tree = _read_instance(args)
    inst = compile_instance(network, tree, subset_leaves=args.subset_leaves)
    q = build_qubo(inst)
    res = solve_anneal(q, _anneal_params(args), inst=inst, threads=args.threads)
    if args.output:
        Path(args.output + ".assignment").write_text(
            formats.write_assignment(res.best))
        _dump(res.to_obj(), args.output + ".solve.json")
    _dump(res.to_obj(), None)
    return 0


def cmd_verify(args) -> int:
    network, tree = _read_instance(args)
    inst = compile_instance(network, tree, subset_leaves=args.subset_leaves)
    bits = formats.read_assignment(Path(args.assignment).read_text(),
                                   inst.layout.m)
    report = verify_display(decode(bits, inst), inst)
    obj = report.to_obj()
    obj["energy"] = evaluate(build_qubo(inst), bits)
    _dump(obj, args.output)
    return 0


def cmd_oracle(args) -> int:
    network, tree = _read_instance(args)
    answer, witness = displays(network, tree)
    obj = {"displays": answer, "witness": _witness_obj(witness)}
    _dump(obj, args.output)
    return 0


def _witness_obj(witness):
    if witness is None:
        return None
    return {
        "kept_vertices": sorted(witness.kept_vertices),
        "deleted_vertices": sorted(witness.deleted_vertices),
        "path_of": {str(u): list(p) for u, p in sorted(witness.path_of.items())},
        "connecting_edge": {f"{u} {v}": list(e) for (u, v), e
                            in sorted(witness.connecting_edge.items())},
    }


def cmd_check(args) -> int:
    network, tree = _read_instance(args)
    report: dict = {"displays": None, "qubo_zero": None, "agree": None}
    try:
        inst = compile_instance(network, tree, subset_leaves=args.subset_leaves)
    except LabelMismatch:
        raise
    except NotDisplayable as exc:
        report.update(displays=False, reason=str(exc))
        _dump(report, args.output)
        return 1

    q = build_qubo(inst)
    res = solve_anneal(q, _anneal_params(args), inst=inst, threads=args.threads)
    report["qubo_zero"] = res.reached_zero
    report["energy"] = res.energy
    verified = False
    if res.reached_zero:
        verified = verify_display(decode(res.best, inst), inst).verdict
        report["witness_verified"] = verified

    oracle_answer = None
    if network.alpha <= MAX_ORACLE_RETICULATIONS:
        oracle_answer, witness = displays(network, tree)
        report["displays"] = oracle_answer
        if oracle_answer and not verified:
            # the annealer missed the ground state; certify through the oracle
            bits = encode_witness(witness, inst)
            verified = evaluate(q, bits) == 0
            report["witness_verified"] = verified
    if oracle_answer is not None and report["qubo_zero"] is not None:
        report["agree"] = oracle_answer == res.reached_zero

    _dump(report, args.output)
    if verified:
        return 0
    if oracle_answer is False:
        return 1
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tcqubo", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_required=False):
        p.add_argument("--input", required=True, help="instance file")
        p.add_argument("--format", choices=("json", "edgelist"), default="json")
        p.add_argument("--subset-leaves", action="store_true",
                       help="allow the tree to use a subset of the network labels")
        p.add_argument("--output", required=output_required,
                       help="output path or artifact prefix")

    def solver_flags(p):
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (default: $TC_QUBO_SEED or 0)")
        p.add_argument("--restarts", type=int, default=100)
        p.add_argument("--sweeps", type=int, default=2000)
        p.add_argument("--threads", type=int, default=None,
                       help="concurrent restarts (default: available cores)")

    p = sub.add_parser("gen", help="compile an instance to QUBO artifacts")
    common(p, output_required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="matrix size and density")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("solve", help="anneal the compiled QUBO")
    common(p)
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="audit an assignment file")
    common(p)
    p.add_argument("--assignment", required=True, help="assignment file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="brute-force containment answer")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="full pipeline with agreement report")
    common(p)
    solver_flags(p)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else ERROR_EXIT
    except (OSError, GraphError, formats.ParseError, NotDisplayable,
            OracleTooLarge, ValueError) as exc:
        print(f"tcqubo: error: {exc}", file=sys.stderr)
        return ERROR_EXIT


if __name__ == "__main__":
    sys.exit(main())
