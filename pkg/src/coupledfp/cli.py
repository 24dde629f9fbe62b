"""Command line front end.

Exit codes: 0 success (or a certified / requested outcome), 1 a falsified
certification, an exhausted falsification budget or a refused problem,
2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import contraction, control, fredholm, solver
from .config import ConfigError, load_condition_config, load_fredholm_config
from .contraction import ConditionSpec, Verdict, certify, check_mixed_monotone, example_map
from .control import FunctionClass, parse_control, validate
from .solver import SolverConfig, SolverError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text)


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _solver_cfg(args) -> SolverConfig:
    kw = {}
    if args.tol is not None:
        kw["tolerance"] = args.tol
    if args.max_iter is not None:
        kw["max_iterations"] = args.max_iter
    return SolverConfig(**kw)


def cmd_solve_example(args) -> int:
    F = example_map()
    phi, psi = control.identity(), control.linear(0.25)
    ok = True

    rep = certify(ConditionSpec.berinde(phi, psi), F, args.budget, args.seed)
    print(f"{rep.label}: {rep.verdict.value} ({rep.tuples_tested} tuples)")
    ok &= rep.certified
    for spec in [ConditionSpec.luong(phi, psi)] + [ConditionSpec.bhaskar(k / 10) for k in range(1, 10)]:
        rep = certify(spec, F, args.budget, args.seed)
        w = rep.witness
        where = f" at x={w.x} y={w.y} u={w.u} v={w.v}: {w.lhs!r} > {w.rhs!r}" if w else ""
        print(f"{rep.label}: {rep.verdict.value}{where}")
        ok &= not rep.certified

    cfg = _solver_cfg(args)
    fp, trace = solver.solve(F, -2.0, 3.0, cfg)
    diag = solver.diagonal_check(fp, trace, cfg)
    print(
        f"coupled fixed point ({fp.x.values[0]:.3e}, {fp.y.values[0]:.3e}) after {trace.iterations} iterations, "
        f"residual {fp.residual:.3e}, diagonal {diag.ok}"
    )
    _write(args.out, trace.to_csv())
    return EXIT_OK if ok and diag.ok else EXIT_FAIL


def _condition_from_args(args):
    cfg = load_condition_config(
        args.config,
        condition=args.condition,
        map=args.map,
        phi=args.phi,
        psi=args.psi,
        k=args.k,
        dimension=args.dimension,
    )
    return cfg, cfg.coupled_map(), cfg.spec()


def _run_check(args, want_witness: bool) -> int:
    cfg, F, spec = _condition_from_args(args)
    sampler = contraction.TupleSampler(F.dimension, radius=cfg.radius)
    mono = check_mixed_monotone(F, sampler, args.budget, args.seed)
    if not mono.certified:
        print(f"warning: {F.label} is not mixed monotone on the sample (witness index {mono.witness.index})")
    rep = certify(spec, F, args.budget, args.seed, sampler)
    print(json.dumps(rep.witness_record(), sort_keys=True))
    _write(args.out, rep.to_json() + "\n")
    found = rep.verdict is Verdict.FALSIFIED
    if want_witness:
        return EXIT_OK if found else EXIT_FAIL
    return EXIT_FAIL if found else EXIT_OK


def cmd_certify(args) -> int:
    return _run_check(args, want_witness=False)


def cmd_falsify(args) -> int:
    return _run_check(args, want_witness=True)


def cmd_solve_fredholm(args) -> int:
    path = args.config_file or args.config
    if not path:
        raise ConfigError("config: solve-fredholm needs a config file")
    cfg = load_fredholm_config(path)
    problem = cfg.problem(args.grid)
    pair = cfg.lower_upper_pair(problem.grid_size)
    try:
        result = fredholm.solve_integral_equation(
            problem, pair, cfg.solver_config(args.tol, args.max_iter), fredholm.ValueSampler(seed=args.seed)
        )
    except fredholm.AssumptionError as exc:
        print(f"refused: {exc}")
        print(exc.report.summary())
        if not exc.report.norm_ok:
            print("condition (iii) fails: (lambda+mu) sup int [K1-K2] ds > 1")
        return EXIT_FAIL
    except fredholm.LowerUpperError as exc:
        print(f"refused: {exc}")
        for w in exc.witnesses[:10]:
            print(f"  node {w.node} (t={w.t:g}): {w.side}={w.value!r} vs {w.bound!r}")
        return EXIT_FAIL
    except SolverError as exc:
        print(f"failed: {exc}")
        return EXIT_FAIL
    print(result.report.summary())
    print(
        f"solved on {problem.grid_size} nodes in {result.trace.iterations} iterations; "
        f"residual {result.residual:.3e}; x(a)={float(result.solution.values[0])!r}, x(b)={float(result.solution.values[-1])!r}"
    )
    _write(args.out, fredholm.solution_csv(result.grid, result.solution))
    _write(args.trace_out, result.trace.to_csv())
    return EXIT_OK


def cmd_validate_functions(args) -> int:
    names: list[tuple[str, FunctionClass]] = []
    if args.config:
        data = json.loads(Path(args.config).read_text())
        for key, cls in (("phi", FunctionClass.PHI), ("psi", FunctionClass.PSI), ("theta", FunctionClass.THETA)):
            vals = data.get(key, [])
            names += [(v, cls) for v in ([vals] if isinstance(vals, str) else vals)]
    names += [(n, FunctionClass.PHI) for n in args.phi or []]
    names += [(n, FunctionClass.PSI) for n in args.psi or []]
    names += [(n, FunctionClass.THETA) for n in args.theta or []]
    if not names:
        names = [("theta1:0.25", FunctionClass.THETA), ("theta2", FunctionClass.THETA), ("theta3", FunctionClass.THETA)]
    all_ok = True
    for name, cls in names:
        try:
            fn = parse_control(name, cls)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{cls.value}: {exc.args[0] if exc.args else exc}") from None
        rep = validate(fn)
        all_ok &= rep.passed
        first = f"; first violation at t={rep.violations[0].input!r}: {rep.violations[0].expected}" if rep.violations else ""
        print(f"{cls.value} {name}: {'pass' if rep.passed else 'fail'} ({len(rep.violations)} violations{first})")
    return EXIT_OK if all_ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output file")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--budget", type=int, default=10_000)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--grid", type=int)

    check = argparse.ArgumentParser(add_help=False)
    check.add_argument("--condition", choices=[k.value for k in contraction.ConditionKind])
    check.add_argument("--map", help="built-in map: " + ", ".join(contraction.MAP_NAMES))
    check.add_argument("--phi", help="built-in control function, e.g. identity")
    check.add_argument("--psi", help="built-in control function, e.g. linear:0.25")
    check.add_argument("--k", type=float, help="constant of the bhaskar condition")
    check.add_argument("--dimension", type=int)

    p = argparse.ArgumentParser(prog="coupledfp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve-example", parents=[common], help="run the (x-2y)/4 example end to end")
    s.set_defaults(func=cmd_solve_example)
    s = sub.add_parser("certify", parents=[common, check], help="search for a violation; exit 1 if one is found")
    s.set_defaults(func=cmd_certify)
    s = sub.add_parser("falsify", parents=[common, check], help="search for a violation; exit 0 if one is found")
    s.set_defaults(func=cmd_falsify)
    s = sub.add_parser("solve-fredholm", parents=[common], help="solve an integral equation from a config")
    s.add_argument("config_file", nargs="?")
    s.add_argument("--trace-out", help="write the iteration trace CSV here")
    s.set_defaults(func=cmd_solve_fredholm)
    s = sub.add_parser("validate-functions", parents=[common], help="sampled class checks for control functions")
    s.add_argument("--phi", action="append")
    s.add_argument("--psi", action="append")
    s.add_argument("--theta", action="append")
    s.set_defaults(func=cmd_validate_functions)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.budget < 1:
        _err("--budget: must be >= 1")
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        _err(exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc))
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        _err(f"config: invalid JSON ({exc.msg})")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
