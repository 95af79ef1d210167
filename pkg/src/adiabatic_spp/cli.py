"""Command-line front end.

Every option can also be given through the environment as
``AQO_SPP_<OPTION>`` (e.g. ``AQO_SPP_DT=0.005``); explicit flags win.
Exit codes: 0 success, 2 invalid input, 3 capacity exceeded, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .dos import approximate_gcd_scan, coarse_grained_dos
from .errors import SppError, ValidationError
from .evolution import METHODS, IntegratorConfig, propagate, write_profile_csv
from .experiments import minimize_complexity, scaling_sweep
from .hamiltonian import DriverParams, Schedule
from .spectral import adiabatic_spectrum, gap_report, write_spectrum_csv
from .spp_core import (
    DEFAULT_K,
    SppInstance,
    brute_force_min_residue,
    build_cost_spectrum,
    enumerate_residues,
    generate_instance,
)

ENV_PREFIX = "AQO_SPP_"
ORACLE_MAX_N = 22

log = logging.getLogger("adiabatic_spp")


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_instance(args) -> SppInstance:
    if args.instance:
        return SppInstance.load(args.instance)
    if args.n is None:
        raise ValidationError("give --instance FILE or --n (with --b, --seed)")
    return generate_instance(args.n, args.b, args.seed)


def _problem(args):
    inst = _load_instance(args)
    table = enumerate_residues(inst)
    costs = build_cost_spectrum(inst, table, args.K)
    return inst, table, costs


def _integrator(args, **extra) -> IntegratorConfig:
    return IntegratorConfig(method=args.method, dt=args.dt, **extra)


def _gnuplot(path: Path, datafile: str, body: str) -> None:
    path.write_text(f"set datafile separator ','\n{body.format(data=datafile)}\npause -1\n")


def cmd_gen(args) -> int:
    inst = generate_instance(args.n, args.b, args.seed)
    out = Path(args.out) if args.out else _out_dir(args) / "instance.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    inst.save(out)
    summary = {"instance": str(out), "n": inst.n, "b": inst.b}
    if inst.n <= ORACLE_MAX_N:
        best, zs = brute_force_min_residue(inst)
        summary.update(min_residue=best, min_residue_a=math.ldexp(best, -inst.b), optimal=len(zs))
    print(json.dumps(summary))
    return 0


def cmd_oracle(args) -> int:
    inst = _load_instance(args)
    best, zs = brute_force_min_residue(inst)
    print(json.dumps({"min_residue": best, "min_residue_a": math.ldexp(best, -inst.b), "optimal": zs}))
    return 0


def cmd_evolve(args) -> int:
    inst, table, costs = _problem(args)
    sched = Schedule(energy_shift=args.shift)
    res = propagate(inst, costs, DriverParams.uniform(inst.n), sched, args.T, _integrator(args), table)
    out = _out_dir(args)
    res.write_json(out / "evolution.json", {"d0": costs.d0, "L": costs.L, "config": _config(args)})
    write_profile_csv(out / "profile.csv", res.profile, table, costs)
    costs.write_csv(out / "degeneracies.csv")
    if args.gnuplot:
        _gnuplot(out / "profile.gp", "profile.csv",
                 "set logscale y\nplot '{data}' every ::1 using 1:4 with points title '|<z|psi(T)>|^2'")
    print(json.dumps({"p0": res.p0, "d0": costs.d0, "norm_drift": res.norm_drift}))
    return 0


def cmd_sweep_t(args) -> int:
    inst, table, costs = _problem(args)
    curve = minimize_complexity(
        inst, costs, DriverParams.uniform(inst.n), Schedule(), _integrator(args),
        t_min=args.t_min, t_max=args.t_max, grid_points=args.points, budget=args.budget, table=table,
    )
    out = _out_dir(args)
    curve.write_csv(out / "complexity_curve.csv")
    _write_json(out / "complexity.json", {**curve.summary(), "config": _config(args)})
    if args.gnuplot:
        _gnuplot(out / "complexity.gp", "complexity_curve.csv",
                 "set logscale xy\nplot '{data}' every ::1 using 1:3 with linespoints title 'C(T)'")
    print(json.dumps(curve.summary(), default=_jsonable))
    return 0


def cmd_sweep_n(args) -> int:
    if args.n_min > args.n_max:
        raise ValidationError(f"empty n range [{args.n_min}, {args.n_max}]")
    report = scaling_sweep(
        range(args.n_min, args.n_max + 1), args.instances, b=args.b, K=args.K, seed=args.seed,
        cfg=_integrator(args), fit_range=(args.fit_min, args.fit_max),
        search={"budget": args.budget}, jobs=args.jobs,
    )
    out = _out_dir(args)
    report.write_csv(out / "sweep.csv")
    summary = {**report.to_dict(), "cli": _config(args)}
    _write_json(out / "sweep.json", summary)
    with open(out / "scatter.csv", "w") as fh:
        fh.write("n,ln_C_star,is_median\n")
        for n, v in report.per_n.items():
            for c in v["C_star"]:
                fh.write(f"{n},{math.log(c)!r},0\n")
            fh.write(f"{n},{math.log(v['median_C_star'])!r},1\n")
    if args.gnuplot and report.fit:
        f = report.fit
        _gnuplot(out / "scaling.gp", "scatter.csv",
                 f"plot '{{data}}' every ::1 using 1:2 title 'ln C*', "
                 f"{f['slope']!r}*x+{f['intercept']!r} title 'fit'")
    print(json.dumps({"fit": report.fit, "failures": report.failures}))
    return 0


def cmd_spectrum(args) -> int:
    inst, _, costs = _problem(args)
    res = adiabatic_spectrum(
        inst, costs, DriverParams.uniform(inst.n), Schedule(energy_shift=args.shift),
        np.linspace(0.0, 1.0, args.s_points), m=args.levels,
    )
    out = _out_dir(args)
    write_spectrum_csv(res, out / "spectrum.csv")
    report = gap_report(res, args.T)
    _write_json(out / "gap.json", {**report, "d0": costs.d0, "config": _config(args)})
    if args.gnuplot:
        _gnuplot(out / "spectrum.gp", "spectrum.csv",
                 "plot '{data}' every ::1 using 1:3 with points pt 7 ps 0.3 title 'g_k(s)'")
    print(json.dumps(report))
    return 0


def cmd_dos(args) -> int:
    inst = _load_instance(args)
    hist = coarse_grained_dos(enumerate_residues(inst), args.window)
    out = _out_dir(args)
    hist.write_csv(out / "dos.csv")
    summary = {"n": hist.n, "window": hist.window, "sigma2": hist.sigma2, "config": _config(args)}
    if args.q:
        summary["resonances"] = [r.to_dict() for r in approximate_gcd_scan(inst, args.q)]
    _write_json(out / "dos.json", summary)
    if args.gnuplot:
        _gnuplot(out / "dos.gp", "dos.csv",
                 "plot '{data}' every ::1 using 1:2 title 'rho_bar', '' every ::1 using 1:3 with lines title 'Gaussian'")
    print(json.dumps({"sigma2": hist.sigma2, "bins": int(hist.counts.size)}))
    return 0


def _instance_args(p, *, need_k=True):
    p.add_argument("--instance", help="instance JSON file (alphas are authoritative)")
    p.add_argument("--n", type=int, help="generate an instance of this size instead of --instance")
    p.add_argument("--b", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    if need_k:
        p.add_argument("--K", type=float, default=DEFAULT_K)


def _integrator_args(p):
    p.add_argument("--dt", type=float, default=None, help="time step (default: 1e-2 within the stability guard)")
    p.add_argument("--method", choices=METHODS, default="split")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adiabatic-spp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
        return p

    p = add("gen", cmd_gen, "generate a random instance file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="instance path (default OUT_DIR/instance.json)")

    p = add("oracle", cmd_oracle, "exhaustive minimum residue")
    _instance_args(p, need_k=False)

    p = add("evolve", cmd_evolve, "propagate once for a given T")
    _instance_args(p)
    _integrator_args(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--shift", type=float, default=0.0)

    p = add("sweep-t", cmd_sweep_t, "minimize C(T) for one instance")
    _instance_args(p)
    _integrator_args(p)
    p.add_argument("--t-min", type=float, default=0.25)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--budget", type=int, default=48)

    p = add("sweep-n", cmd_sweep_n, "optimal complexity versus n with exponential fit")
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--instances", type=int, default=11)
    p.add_argument("--b", type=int, default=25)
    p.add_argument("--K", type=float, default=DEFAULT_K)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fit-min", type=int, default=11)
    p.add_argument("--fit-max", type=int, default=17)
    p.add_argument("--budget", type=int, default=48)
    p.add_argument("--jobs", type=int, default=1)
    _integrator_args(p)

    p = add("spectrum", cmd_spectrum, "adiabatic eigenvalues and minimum gap")
    _instance_args(p)
    p.add_argument("--s-points", type=int, default=101)
    p.add_argument("--levels", type=int, default=None, help="number of lowest levels (default d0 + 12)")
    p.add_argument("--shift", type=float, default=0.0, help="constant added to the problem Hamiltonian")
    p.add_argument("--T", type=float, default=None, help="report the adiabaticity parameter for this T")

    p = add("dos", cmd_dos, "coarse-grained density of residues")
    _instance_args(p, need_k=False)
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--q", type=float, nargs="*", default=[], help="approximate-gcd candidates to scan")

    for sp in sub.choices.values():
        _apply_env(sp)
    return parser


def _apply_env(parser: argparse.ArgumentParser) -> None:
    for action in parser._actions:
        if not action.option_strings or action.dest in ("help", "func"):
            continue
        raw = os.environ.get(ENV_PREFIX + action.dest.upper())
        if raw is None:
            continue
        if action.nargs == 0:
            value = raw.strip().lower() in ("1", "true", "yes", "on")
        elif action.nargs == "*":
            value = [action.type(x) if action.type else x for x in raw.split(",") if x]
        else:
            value = action.type(raw) if action.type else raw
        action.default = value
        action.required = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SppError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
    except OSError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": 2}
    print(json.dumps(err), file=sys.stderr)
    return err["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
