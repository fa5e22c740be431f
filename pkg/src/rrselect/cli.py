"""Command line interface.

Exit codes: 0 ok, 1 usage error, 2 runtime error, 3 verification failure.
Instance arguments take a file path or ``builtin:ex1`` / ``builtin:ex2``;
selections are 1-based comma-separated item lists.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .adversary import adv_brute, adv_solve
from .core import InstanceError, ParseError, Scenario, labels, support, write_instance
from .experiment import load_config, resolve_instance, run_experiment
from .generators import GeneratorSpec, gen_random, gen_reduction
from .incremental import EnumerationLimitError, inc_solve
from .mip_export import (ExternalSolverError, ModelError, SolutionParseError, build_m1, build_m2,
                         build_m3, run_external, selection_from, write_lp)
from .plots import plot
from .solvers import (Limits, full_candidate_pool, full_scenario_pool, rec_brute, solve_m1,
                      solve_m2, initial_candidate)
from .special_case import solve_special
from .verify import run_checks

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(payload, sort_keys=True, default=_jsonable))
    else:
        print(text)


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (set, frozenset, tuple)):
        return list(v)
    raise TypeError(f"not serialisable: {type(v)}")


def cmd_solve(args):
    inst = resolve_instance(args.instance)
    payload = {"method": args.method}
    if args.method in ("m1", "m2"):
        solve = solve_m1 if args.method == "m1" else solve_m2
        value, x, log = solve(inst, Limits(time_limit=args.time_limit))
        payload.update(status=log.status, iterations=len(log.iterations), lb=log.lower,
                       ub=log.upper, trace=list(log.rows()))
    elif args.method == "special":
        if not inst.is_pair_instance():
            raise InstanceError("method 'special' needs two items per part, one pick per part "
                                "and gamma = k = 1")
        value, x = solve_special(inst)
    else:
        value, x = rec_brute(inst)
    payload.update(value=value, selection=labels(support(x)))
    lines = [f"value {value}", "selection " + " ".join(map(str, payload["selection"]))]
    if "status" in payload:
        lines.append(f"status {payload['status']} after {payload['iterations']} iterations "
                     f"(lb {payload['lb']}, ub {payload['ub']})")
        if args.trace:
            lines += [f"  {r['iteration']}: lb {r['lb']} ub {r['ub']} x {r['x']} new {r['generated']}"
                      for r in payload["trace"]]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_adv(args):
    inst = resolve_instance(args.instance)
    x = inst.selection(args.x)
    if args.brute:
        res = adv_brute(inst, x)
        payload = {"value": res.value, "attacked": res.scenario.labels()}
    else:
        res = adv_solve(inst, x)
        payload = {"value": res.value, "attacked": res.scenario.labels(), "beta": res.beta,
                   "alpha": list(res.alpha), "budget": list(res.budget)}
    text = f"value {payload['value']}\nattacked {' '.join(map(str, payload['attacked'])) or '-'}"
    if not args.brute:
        text += f"\nbeta {res.beta}\nalpha {list(res.alpha)}\nbudget {list(res.budget)}"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_inc(args):
    inst = resolve_instance(args.instance)
    x = inst.selection(args.x)
    attacked = frozenset(i - 1 for i in args.attack or [])
    res = inc_solve(inst, x, Scenario(attacked))
    payload = {"value": res.value, "recovery": res.labels()}
    _emit(args, payload, f"value {res.value}\nrecovery {' '.join(map(str, res.labels()))}")
    return EXIT_OK


def cmd_generate(args):
    if args.family == "reduction":
        if not args.A:
            raise InstanceError("family 'reduction' needs --A")
        inst = gen_reduction(args.A)
    else:
        spec = GeneratorSpec(family=args.family, K=args.K, n_j=args.n_j, gamma=args.gamma, k=args.k,
                             cost_range=tuple(args.cost_range), seed=args.seed)
        inst = gen_random(spec)
    text = write_instance(inst)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        _emit(args, {"path": args.output, "n": inst.n, "K": inst.K, "digest": inst.digest()},
              f"wrote {args.output} (n={inst.n}, K={inst.K})")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _export_pool(inst, formulation, pool):
    if pool == "full":
        return full_scenario_pool(inst) if formulation == "m1" else full_candidate_pool(inst)
    if pool == "generated":
        if formulation == "m1":
            return solve_m1(inst)[2].pool
        return solve_m2(inst, shortcut=False)[2].pool
    return [Scenario()] if formulation == "m1" else [initial_candidate(inst)]


def cmd_export(args):
    inst = resolve_instance(args.instance)
    if args.formulation == "m3":
        model = build_m3(inst, allow_large=args.allow_large)
    else:
        pool = _export_pool(inst, args.formulation, args.pool)
        model = (build_m1 if args.formulation == "m1" else build_m2)(inst, pool)
    text = write_lp(model)
    payload = {"formulation": args.formulation, "variables": len(model.variables),
               "constraints": len(model.constraints)}
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        payload["path"] = args.output
    if args.solve:
        sol = run_external(model, args.solver)
        payload.update(status=sol.status, objective=sol.rounded,
                       selection=labels(support(selection_from(sol, inst))))
    if args.output or args.solve or args.json:
        lines = [f"{args.formulation}: {payload['variables']} variables, "
                 f"{payload['constraints']} constraints"]
        if args.solve:
            lines.append(f"external {sol.status}: objective {sol.rounded}, selection "
                         + " ".join(map(str, payload["selection"])))
        _emit(args, payload, "\n".join(lines))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_experiment(args):
    config = load_config(args.config)
    if args.workers is not None:
        config.workers = args.workers
    out = Path(args.output or config.output)
    records, summary, errors = run_experiment(config, out)
    written = plot(out / "results.csv", out, config.time_limit) if args.plot else []
    payload = {"records": len(records), "output": str(out), "errors": errors,
               "summary": summary, "plots": [str(p) for p in written]}
    lines = [f"{len(records)} records written to {out / 'results.csv'}"]
    lines += [f"{r['method']:>7} {str(r['sweep']):>4}: solved {r['solved']:.2f}, "
              f"time {r['time_ms']:.1f} ms, iterations {r['iterations']:.2f}" for r in summary]
    lines += [f"error: {e}" for e in errors]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_verify(args):
    results = run_checks(quick=args.quick, seed=args.seed)
    payload = [{"check": r.name, "cases": r.cases, "mismatches": r.mismatches,
                "seconds": round(r.seconds, 3)} for r in results]
    lines = [f"{'ok  ' if r.ok else 'FAIL'} {r.name}: {r.cases} comparisons, "
             f"{len(r.mismatches)} mismatches ({r.seconds:.1f} s)" for r in results]
    lines += [f"  {m}" for r in results for m in r.mismatches[:10]]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY


def cmd_plot(args):
    written = plot(args.csv, args.output, args.time_limit, args.sweep_label)
    _emit(args, {"plots": [str(p) for p in written]}, "\n".join(f"wrote {p}" for p in written))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    parser = _Parser(prog="rrselect", description=__doc__.splitlines()[0],
                     epilog="exit codes: 0 ok, 1 usage, 2 runtime error, 3 verification failure")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="solve the recoverable robust problem")
    p.add_argument("instance")
    p.add_argument("--method", choices=("brute", "m1", "m2", "special"), default="m2")
    p.add_argument("--time-limit", type=float, default=float("inf"))
    p.add_argument("--trace", action="store_true", help="print the bound sequence")
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("adv", parents=[common], help="worst case for a fixed selection")
    p.add_argument("instance")
    p.add_argument("--x", type=_int_list, required=True, help="selected items, e.g. 1,4")
    p.add_argument("--brute", action="store_true", help="enumerate attacks instead")
    p.set_defaults(run=cmd_adv)

    p = sub.add_parser("inc", parents=[common], help="best recovery under one scenario")
    p.add_argument("instance")
    p.add_argument("--x", type=_int_list, required=True)
    p.add_argument("--attack", type=_int_list, help="attacked items (default: none)")
    p.set_defaults(run=cmd_inc)

    p = sub.add_parser("generate", parents=[common], help="write a generated instance")
    p.add_argument("--family", choices=("i1", "i2", "reduction"), default="i1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--n-j", dest="n_j", type=int, default=5)
    p.add_argument("--gamma", type=int, default=2)
    p.add_argument("--k", type=int)
    p.add_argument("--cost-range", type=_int_list, default=[1, 100])
    p.add_argument("--A", type=_int_list, help="numbers for the reduction family")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_generate)

    p = sub.add_parser("export", parents=[common], help="write an LP model")
    p.add_argument("instance")
    p.add_argument("--formulation", choices=("m1", "m2", "m3"), default="m1")
    p.add_argument("--pool", choices=("nominal", "full", "generated"), default="nominal")
    p.add_argument("--allow-large", action="store_true", help="override the m3 size guard")
    p.add_argument("--solve", action="store_true", help="run the external solver")
    p.add_argument("--solver", help="command template with {model} and {solution}")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_export)

    p = sub.add_parser("experiment", parents=[common], help="run a batch experiment")
    p.add_argument("config")
    p.add_argument("--workers", type=int)
    p.add_argument("--output")
    p.add_argument("--plot", action="store_true", help="also write SVG charts")
    p.set_defaults(run=cmd_experiment)

    p = sub.add_parser("verify", parents=[common], help="compare fast routines with oracles")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("plot", parents=[common], help="SVG charts from a results CSV")
    p.add_argument("csv")
    p.add_argument("-o", "--output", default=".")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--sweep-label", default="sweep")
    p.set_defaults(run=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return args.run(args)
    except (InstanceError, ParseError, ModelError, SolutionParseError, ExternalSolverError,
            EnumerationLimitError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
