"""Command-line front end.

Subcommands: ``nearest`` (solve for a nearby passive system), ``check``
(passivity diagnostics), ``gen`` (test-instance generation) and ``bench``
(benchmark grid from a config file).  Machine-readable ``key=value`` summary
lines go to stdout, diagnostics to stderr; exit code 1 flags I/O or parse
problems, 2 solver failures.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys

import numpy as np

from ._io import load_system, ph_from_dict, save_system, system_to_dict
from .analysis import passivity_report
from .errors import NearprError
from .experiments import (MsdParams, msd_generate, msd_perturb,
                          perturb_to_distance, random_pr_system, relative_error,
                          run_benchmark)
from .fgm import FgmOptions, solve_nearest
from .init import (init_lmi_formula, init_lmi_solve, init_random,
                   init_standard, init_true, solve_delta_lmi)
from .model import LtiSystem, PhForm, Weights
from .projections import Bounds

__all__ = ["main"]


class _UsageError(Exception):
    """Bad flags or arguments (maps to exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="nearpr",
                     description="Nearest passive (positive-real) LTI system solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_near = sub.add_parser("nearest", help="compute a nearby passive system")
    p_near.add_argument("--input", required=True, help="system JSON file")
    p_near.add_argument("--output", help="write solved system + PH form JSON here")
    p_near.add_argument("--mode", choices=["standard", "descriptor"],
                        help="override the file's mode")
    p_near.add_argument("--init", default="standard",
                        choices=["standard", "lmi-formula", "lmi-solve",
                                 "random", "true", "file"])
    p_near.add_argument("--init-file", help="PH form JSON for --init file")
    p_near.add_argument("--weights", help="w1,w2,w3,w4[,w5]")
    p_near.add_argument("--deltaK", type=float, default=0.0)
    p_near.add_argument("--nuZ", type=float, default=0.0)
    p_near.add_argument("--max-iters", type=int, default=100_000)
    p_near.add_argument("--max-seconds", type=float, default=60.0)
    p_near.add_argument("--tol", type=float, default=1e-10,
                        help="relative decrease stopping threshold")
    p_near.add_argument("--seed", type=int, default=0, help="seed for --init random")
    p_near.add_argument("--alpha1", type=float, default=0.5)
    p_near.add_argument("--trace", help="write the iteration trace CSV here")

    p_check = sub.add_parser("check", help="passivity/admissibility diagnostics")
    p_check.add_argument("--input", required=True)
    p_check.add_argument("--output", help="write the diagnostics report JSON here")
    p_check.add_argument("--delta", action="store_true",
                         help="also solve the delta-relaxed LMIs")

    p_gen = sub.add_parser("gen", help="generate test instances")
    gen_sub = p_gen.add_subparsers(dest="kind", required=True)
    g_msd = gen_sub.add_parser("msd", help="mass-spring-damper chain")
    g_msd.add_argument("--p", type=int, required=True)
    g_msd.add_argument("--m", type=int, required=True)
    g_msd.add_argument("--eps", type=float, default=0.0,
                       help="damping perturbation (0 = none)")
    g_msd.add_argument("--seed", type=int, default=0)
    g_msd.add_argument("--spd-shift", type=float, default=0.1)
    g_msd.add_argument("--output-prefix", default="msd")
    g_rand = gen_sub.add_parser("random", help="random passive descriptor system")
    g_rand.add_argument("--n", type=int, required=True)
    g_rand.add_argument("--m", type=int, required=True)
    g_rand.add_argument("--eps-rel", type=float, default=0.0,
                        help="relative perturbation distance (0 = none)")
    g_rand.add_argument("--seed", type=int, default=0)
    g_rand.add_argument("--output-prefix", default="random")

    p_bench = sub.add_parser("bench", help="run a benchmark config")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--output-prefix", default="bench")
    return parser


def _parse_weights(text: str | None) -> Weights:
    if text is None:
        return Weights()
    try:
        return Weights.from_sequence([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise _UsageError(f"bad --weights: {exc}") from exc


def _make_init(args, target: LtiSystem, ph_file: PhForm | None, mode: str,
               w: Weights) -> PhForm:
    if args.init == "standard":
        return init_standard(target, mode=mode)
    if args.init in ("lmi-formula", "lmi-solve"):
        lmi = solve_delta_lmi(target)
        print(f"delta_star={lmi.delta_star!r}")
        print(f"lmi_status={lmi.solver_status}")
        if args.init == "lmi-formula":
            return init_lmi_formula(target, lmi, mode=mode)
        return init_lmi_solve(target, lmi, mode=mode, w=w)
    if args.init == "random":
        return init_random(target, seed=args.seed, mode=mode)
    if args.init == "true":
        if ph_file is None:
            raise _UsageError("--init true requires a ph block in the input file")
        return init_true(ph_file, target.D)
    if args.init == "file":
        if not args.init_file:
            raise _UsageError("--init file requires --init-file")
        _, ph = load_system(args.init_file) if _has_system_block(args.init_file) \
            else (None, _load_ph_only(args.init_file))
        if ph is None:
            raise _UsageError(f"{args.init_file} carries no ph block")
        return ph
    raise _UsageError(f"unknown init {args.init!r}")


def _has_system_block(path: str) -> bool:
    with open(path) as fh:
        doc = json.load(fh)
    return isinstance(doc, dict) and "A" in doc


def _load_ph_only(path: str) -> PhForm:
    with open(path) as fh:
        doc = json.load(fh)
    block = doc.get("ph", doc) if isinstance(doc, dict) else None
    if not isinstance(block, dict):
        raise ValueError(f"{path} carries no ph block")
    return ph_from_dict(block)


def _cmd_nearest(args) -> int:
    target, ph_file = load_system(args.input)
    mode = args.mode or ("standard" if target.standard else "descriptor")
    if mode == "standard" and not target.standard:
        raise _UsageError("standard mode requires a standard (E = I) input system")
    w = _parse_weights(args.weights)
    init = _make_init(args, target, ph_file, mode, w)
    if init.n != target.n or init.m != target.m:
        raise _UsageError(f"initial PH form is ({init.n}, {init.m}) but the "
                          f"system is ({target.n}, {target.m})")
    if init.mode != mode:
        raise _UsageError(f"initial PH form is {init.mode} but the run mode "
                          f"is {mode}")
    opts = FgmOptions(alpha1=args.alpha1, max_iters=args.max_iters,
                      max_seconds=args.max_seconds, tol_rel_decrease=args.tol)
    bounds = Bounds(deltaK=args.deltaK, nuZ=args.nuZ)
    ph, solved, trace = solve_nearest(target, init, w=w, bounds=bounds, opts=opts)
    print(f"final_objective={trace.final_objective!r}")
    print(f"initial_objective={trace.objectives[0]!r}")
    print(f"iterations={trace.iterations[-1]}")
    print(f"seconds={trace.seconds[-1]:.3f}")
    print(f"relative_error={relative_error(target, solved, include_e=(mode == 'descriptor'))!r}")
    for key, a, b in zip("EABCD", target.matrices(), solved.matrices()):
        denom = np.linalg.norm(a)
        rel = np.linalg.norm(a - b) / denom if denom > 0 else np.linalg.norm(a - b)
        print(f"rel_err_{key}={100 * rel:.6f}%")
    if args.trace:
        trace.write_csv(args.trace)
    if args.output:
        save_system(args.output, solved, ph)
    return 0


def _cmd_check(args) -> int:
    target, ph_file = load_system(args.input)
    x = ph_file.Q if ph_file is not None else None
    report = passivity_report(target, x=x, compute_delta=args.delta)
    print(f"regular={report.regular}")
    print(f"index_le_one={report.index_le_one}")
    print(f"max_real_part={report.max_real_part!r}")
    print(f"finite_eigenvalues={';'.join(f'{z.real:.12g}{z.imag:+.12g}j' for z in report.finite_eigenvalues)}")
    print(f"grid_min={report.grid_min!r}")
    if report.lmi_lambda_max is not None:
        certified = (report.lmi_lambda_max <= 1e-9
                     and report.lmi_lambda_min_etx >= -1e-9
                     and report.lmi_asym_norm <= 1e-9)
        print(f"lmi_lambda_max={report.lmi_lambda_max!r}")
        print(f"lmi_certified={certified}")
    print(f"hamiltonian_verdict={report.hamiltonian_verdict}")
    if report.delta_star is not None:
        print(f"delta_star={report.delta_star!r}")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(report.to_json())
            fh.write("\n")
    return 0


def _cmd_gen(args) -> int:
    if args.kind == "msd":
        params = MsdParams(p=args.p, m=args.m, seed=args.seed,
                           spd_shift=args.spd_shift)
        ph, sys = msd_generate(params)
        true_path = f"{args.output_prefix}_true.json"
        save_system(true_path, sys, ph)
        print(f"true_file={true_path}")
        if args.eps > 0:
            perturbed = msd_perturb(ph, sys, args.eps)
            pert_path = f"{args.output_prefix}_perturbed.json"
            save_system(pert_path, perturbed)
            print(f"perturbed_file={pert_path}")
        return 0
    if args.kind == "random":
        ph, sys = random_pr_system(args.n, args.m, args.seed)
        true_path = f"{args.output_prefix}_true.json"
        save_system(true_path, sys, ph)
        print(f"true_file={true_path}")
        if args.eps_rel > 0:
            perturbed, delta = perturb_to_distance(ph, sys, args.eps_rel)
            pert_path = f"{args.output_prefix}_perturbed.json"
            save_system(pert_path, perturbed)
            print(f"perturbed_file={pert_path}")
            print(f"delta_used={delta!r}")
            print(f"achieved_distance={relative_error(perturbed, sys)!r}")
        return 0
    raise _UsageError(f"unknown gen kind {args.kind!r}")


def _cmd_bench(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    report = run_benchmark(config)
    csv_path = f"{args.output_prefix}.csv"
    json_path = f"{args.output_prefix}.json"
    report.write_csv(csv_path)
    report.write_json(json_path)
    print(f"cells={len(report.rows)}")
    failures = sum(1 for row in report.rows if row.get("error"))
    print(f"failures={failures}")
    print(f"csv={csv_path}")
    print(f"json={json_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "nearest":
            return _cmd_nearest(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "bench":
            return _cmd_bench(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1
    except NearprError as exc:
        print(f"solver error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
