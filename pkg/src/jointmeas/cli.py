"""Command-line interface: ``jointmeas {synth,simulate,reproduce,validate}``."""

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import montecarlo as mc
from .errors import JointMeasError
from .experiment import (
    DEFAULT_SEED,
    REF_P,
    REF_RUNS,
    REF_SHOTS,
    REF_THETAS,
    ExperimentConfig,
    build_reference_experiments,
    emit,
    load_config,
    render_csv,
    render_json,
    run_experiment,
)
from .kernels import BACKEND
from .povm import max_theta, synthesize


def _vec(v):
    return [round(float(x), 12) for x in v]


def cmd_synth(args):
    theta = math.radians(args.theta)
    design = synthesize(args.p, theta, math.radians(args.phi))
    info = {
        "p": design.p,
        "theta_deg": args.theta,
        "phi_deg": args.phi,
        "alpha": design.alpha,
        "beta": design.beta,
        "a": _vec(design.a),
        "b": _vec(design.b),
        "c": _vec(design.c),
        "d": _vec(design.d),
        "relabeled": design.relabeled,
        "theta_max_deg": math.degrees(max_theta(args.p)),
    }
    if args.format == "json":
        print(json.dumps(info, indent=2))
    else:
        for k, v in info.items():
            print(f"{k:>14}: {v}")
    return 0


def _apply_overrides(cfg, args):
    kw = {}
    if args.seed is not None:
        kw["master_seed"] = mc.RngSeed(args.seed, cfg.master_seed.stream)
    if args.shots is not None:
        kw["shots_per_run"] = args.shots
    if args.runs is not None:
        kw["runs"] = args.runs
    if args.sampler is not None:
        kw["sampler"] = args.sampler
    if args.poisson:
        kw["poisson_totals"] = True
    return replace(cfg, **kw) if kw else cfg


def _write(rows, cfg, args, destination):
    if destination is None:
        text = render_csv(rows) if args.format == "csv" else render_json(rows, cfg)
        sys.stdout.write(text)
    else:
        emit(rows, args.format, destination, config=cfg)


def _flag_report(rows, name):
    bad = [r for r in rows if r.flagged]
    for r in bad:
        print(f"{name}: theta = {r.theta:g} deg flagged ({r.status})", file=sys.stderr)
    return bad


def cmd_simulate(args):
    if args.config:
        cfg = load_config(args.config)
        kw = {}
        if args.thetas:
            kw["theta_list"] = tuple(args.thetas)
        if args.p is not None:
            kw["p"] = args.p
        if args.phi is not None:
            kw["azimuth_phi"] = args.phi
        cfg = replace(cfg, **kw)
    else:
        thetas = args.thetas if args.thetas else list(REF_THETAS)
        cfg = ExperimentConfig(
            name="simulate",
            a_axis=(0.0, 0.0, 1.0),
            azimuth_phi=args.phi or 0.0,
            theta_list=thetas,
            p=REF_P if args.p is None else args.p,
            shots_per_run=REF_SHOTS,
            runs=REF_RUNS,
            master_seed=mc.RngSeed(DEFAULT_SEED),
            input_state=(0.0, 0.0, 1.0),
        )
    cfg = _apply_overrides(cfg, args)
    rows = run_experiment(cfg, exact=args.exact, workers=args.workers)
    _write(rows, cfg, args, args.output)
    bad = _flag_report(rows, cfg.name)
    return 1 if bad and not args.allow_degenerate else 0


def cmd_reproduce(args):
    seed = DEFAULT_SEED if args.seed is None else args.seed
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    any_bad = False
    print(f"kernel backend: {BACKEND}")
    for cfg in build_reference_experiments(seed=seed):
        cfg = _apply_overrides(cfg, args)
        rows = run_experiment(cfg, exact=args.exact, workers=args.workers)
        path = out / f"{cfg.name}.{args.format}"
        emit(rows, args.format, path, config=cfg)
        within = 0
        print(f"{cfg.name} (phi = {cfg.azimuth_phi:g} deg) -> {path}")
        print(f"  {'theta':>5}  {'sin^2 2t':>10}  {'delta_prod':>10}  {'err':>9}  {'z':>6}")
        for r in rows:
            if r.flagged:
                continue
            dp, bound = r.delta_product, r.sin_sq_2theta.value
            z = (dp.value - bound) / dp.std_err if dp.std_err > 0 else 0.0
            within += abs(z) <= 3.0
            print(f"  {r.theta:5g}  {bound:10.6f}  {dp.value:10.6f}  {dp.std_err:9.2e}  {z:6.2f}")
        print(f"  {within}/{len(rows)} points within 3 sigma of the bound")
        any_bad |= bool(_flag_report(rows, cfg.name))
    return 1 if any_bad and not args.allow_degenerate else 0


def cmd_validate(args):
    from .checks import run_checks

    results = run_checks(full=args.full)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def _run_options(p):
    p.add_argument("--seed", type=int, default=None, help="master seed (64-bit unsigned)")
    p.add_argument("--shots", type=int, default=None, help="heralded shots per run")
    p.add_argument("--runs", type=int, default=None, help="runs per theta point")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--exact", action="store_true", help="use exact Born probabilities as pseudo-counts")
    p.add_argument("--sampler", choices=mc.SAMPLERS, default=None)
    p.add_argument("--poisson", action="store_true", help="Poisson-distributed shots per run")
    p.add_argument("--workers", type=int, default=1, help="threads over theta points")
    p.add_argument("--allow-degenerate", action="store_true", help="exit 0 even if rows are flagged")


def build_parser():
    parser = argparse.ArgumentParser(prog="jointmeas", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="optimal alpha, beta, c, d for one geometry")
    p.add_argument("--p", type=float, default=REF_P)
    p.add_argument("--theta", type=float, required=True, help="half-angle theta in degrees")
    p.add_argument("--phi", type=float, default=0.0, help="azimuth of b in degrees")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="run one experiment config")
    p.add_argument("--config", type=str, default=None, help="YAML experiment config")
    p.add_argument("--p", type=float, default=None, help=f"selection probability (default {REF_P})")
    p.add_argument("--phi", type=float, default=None, help="azimuth in degrees (default 0)")
    p.add_argument("--thetas", type=float, nargs="+", default=None, help="theta list in degrees")
    p.add_argument("--output", type=str, default=None, help="output file (default: stdout)")
    _run_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="run the three reference sweeps")
    p.add_argument("--output", type=str, default="results", help="output directory")
    _run_options(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("validate", help="run built-in property and oracle checks")
    p.add_argument("--full", action="store_true", help="include full-scale and calibration checks")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except JointMeasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
