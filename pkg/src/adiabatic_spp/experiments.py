"""Complexity metric, minimization over the run time T, and sweeps over problem size."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import SppError, ValidationError
from .evolution import IntegratorConfig, propagate
from .hamiltonian import DriverParams, Schedule
from .spp_core import DEFAULT_K, build_cost_spectrum, enumerate_residues, generate_instance

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5) - 1) / 2
DEFAULT_T_MIN = 0.25


def default_t_max(n: int) -> float:
    return 20.0 * 2.0 ** (0.4 * n)


def complexity(T: float, p0: float, d0: int) -> float:
    """Expected total run time ``(T + 1) d0 / p0``; ``inf`` when ``p0 == 0``."""
    if d0 < 1:
        raise ValidationError("empty ground level (d0=0): no bitstring to find; raise K")
    if not 0.0 <= p0 <= 1.0 + 1e-9:
        raise ValidationError(f"p0 must be a probability, got {p0}")
    if p0 == 0.0:
        return math.inf
    return (T + 1.0) * d0 / p0


@dataclass
class ComplexityCurve:
    d0: int
    points: list  # (T, p0, C), sorted by T
    T_star: float
    C_star: float
    p0_star: float
    bracketed: bool
    pruned: list = field(default_factory=list)  # grid T values skipped because (T+1) d0 >= best C

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["T", "p0", "C"])
            for T, p0, C in self.points:
                w.writerow([repr(T), repr(p0), repr(C)])

    def summary(self) -> dict:
        return {"d0": self.d0, "T_star": self.T_star, "C_star": self.C_star, "p0_star": self.p0_star,
                "bracketed": self.bracketed, "evaluations": len(self.points), "pruned": self.pruned}


def minimize_complexity(
    inst,
    costs,
    params: DriverParams,
    sched: Schedule,
    cfg: IntegratorConfig | None = None,
    t_min: float = DEFAULT_T_MIN,
    t_max: float | None = None,
    grid_points: int = 16,
    budget: int = 48,
    rel_tol: float = 0.05,
    prune: bool = True,
    table=None,
) -> ComplexityCurve:
    """Minimize ``C(T)`` on a geometric grid, then golden-section around the best grid point.

    Since ``p0 <= 1`` we have ``C(T) >= (T + 1) d0``; with ``prune`` the grid
    walk stops once that bound reaches the best value seen, because no larger
    T can win. Refinement works in ``log T`` and stops when the bracket is
    narrower than ``rel_tol`` of the current best T, or the propagation
    budget is spent.
    """
    t_max = default_t_max(inst.n) if t_max is None else t_max
    if not 0 < t_min < t_max:
        raise ValidationError(f"need 0 < t_min < t_max, got [{t_min}, {t_max}]")
    if budget < 8:
        raise ValidationError("budget must allow at least 8 propagations")
    if grid_points < 3:
        raise ValidationError("grid_points must be >= 3")
    table = enumerate_residues(inst) if table is None else table
    d0 = costs.d0
    if d0 < 1:
        raise ValidationError("empty ground level (d0=0): no bitstring to find; raise K")
    seen: dict[float, tuple[float, float]] = {}

    def evaluate(T: float) -> float:
        if T not in seen:
            p0 = propagate(inst, costs, params, sched, T, cfg, table).p0
            seen[T] = (p0, complexity(T, p0, d0))
        return seen[T][1]

    grid = np.geomspace(t_min, t_max, grid_points)
    pruned = []
    best = math.inf
    for T in grid:
        T = float(T)
        if prune and (T + 1.0) * d0 >= best:
            pruned.append(T)
            continue
        if len(seen) >= budget:
            pruned.append(T)
            continue
        best = min(best, evaluate(T))

    evaluated = [float(T) for T in grid if float(T) in seen]
    i_best = min(range(len(evaluated)), key=lambda i: seen[evaluated[i]][1])
    T_best = evaluated[i_best]
    j = int(np.flatnonzero(grid == T_best)[0])
    bracketed = 0 < j < grid.size - 1
    lo, hi = math.log(grid[max(j - 1, 0)]), math.log(grid[min(j + 1, grid.size - 1)])

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    while len(seen) + 2 <= budget:
        T_cur = min(seen, key=lambda T: seen[T][1])
        if math.exp(hi) - math.exp(lo) < rel_tol * T_cur:
            break
        if evaluate(math.exp(x1)) <= evaluate(math.exp(x2)):
            hi, x2 = x2, x1
            x1 = hi - GOLDEN * (hi - lo)
        else:
            lo, x1 = x1, x2
            x2 = lo + GOLDEN * (hi - lo)

    if not bracketed:
        log.warning("unbracketed minimum at T=%g on [%g, %g]; widen the T range", T_best, t_min, t_max)
    points = sorted((T, p0, C) for T, (p0, C) in seen.items())
    T_star, p0_star, C_star = min(points, key=lambda p: p[2])
    return ComplexityCurve(d0, points, T_star, C_star, p0_star, bracketed, pruned)


def lower_median(values) -> float:
    """Order-statistics median; for an even count the lower of the two middle values."""
    v = sorted(values)
    if not v:
        return math.nan
    return v[(len(v) - 1) // 2]


def instance_seed(base: int, n: int, index: int) -> int:
    return int(np.random.SeedSequence([base, n, index]).generate_state(1, np.uint32)[0])


@dataclass
class ScalingReport:
    rows: list  # one dict per instance
    per_n: dict
    fit: dict
    failures: int
    config: dict

    def write_csv(self, path) -> None:
        cols = ["n", "instance_seed", "d0", "T_star", "p0_star", "C_star"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                if r.get("error") is None:
                    w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])

    def to_dict(self) -> dict:
        return {"config": self.config, "per_n": {str(k): v for k, v in self.per_n.items()},
                "fit": self.fit, "failures": self.failures}

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def _run_instance(task):
    n, index, seed, b, K, cfg, search = task
    row = {"n": n, "index": index, "instance_seed": seed}
    try:
        inst = generate_instance(n, b, seed)
        table = enumerate_residues(inst)
        costs = build_cost_spectrum(inst, table, K)
        curve = minimize_complexity(inst, costs, DriverParams.uniform(n), Schedule(), cfg, table=table, **search)
    except SppError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row.update(d0=curve.d0, T_star=curve.T_star, p0_star=curve.p0_star, C_star=curve.C_star,
               bracketed=curve.bracketed)
    return row


def fit_exponential(ns, medians) -> dict:
    """Least-squares line through ``(n, ln median)``."""
    x = np.asarray(ns, dtype=float)
    y = np.log(np.asarray(medians, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return {"n": [int(v) for v in ns], "slope": float(slope), "intercept": float(intercept),
            "residuals": [float(r) for r in resid], "base2_exponent": float(slope / math.log(2))}


def scaling_sweep(
    n_values,
    instances_per_n: int,
    b: int = 25,
    K: float = DEFAULT_K,
    seed: int = 0,
    cfg: IntegratorConfig | None = None,
    fit_range: tuple[int, int] = (11, 17),
    search: dict | None = None,
    jobs: int = 1,
) -> ScalingReport:
    """Optimal complexity for ``instances_per_n`` random instances at each n, and the
    exponential fit of the per-n medians over ``fit_range`` (inclusive)."""
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values:
        raise ValidationError("empty n range")
    if instances_per_n < 5:
        raise ValidationError("instances_per_n must be >= 5 for stable medians")
    search = dict(search or {})
    tasks = [(n, i, instance_seed(seed, n, i), b, K, cfg, search)
             for n in n_values for i in range(instances_per_n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_instance, tasks))
    else:
        rows = [_run_instance(t) for t in tasks]
    rows.sort(key=lambda r: (r["n"], r["index"]))

    failures = sum(1 for r in rows if "error" in r)
    if failures:
        log.warning("%d propagation(s) failed and are excluded from the medians", failures)
    per_n = {}
    for n in n_values:
        ok = [r for r in rows if r["n"] == n and "error" not in r]
        if not ok:
            continue
        per_n[n] = {
            "C_star": [r["C_star"] for r in ok],
            "median_C_star": lower_median([r["C_star"] for r in ok]),
            "mean_d0": float(np.mean([r["d0"] for r in ok])),
            "p0_star": [r["p0_star"] for r in ok],
            "unbracketed": sum(1 for r in ok if not r["bracketed"]),
        }
    fit_ns = [n for n in per_n if fit_range[0] <= n <= fit_range[1]]
    fit = fit_exponential(fit_ns, [per_n[n]["median_C_star"] for n in fit_ns]) if len(fit_ns) >= 2 else {}
    config = {"n_values": n_values, "instances_per_n": instances_per_n, "b": b, "K": K, "seed": seed,
              "fit_range": list(fit_range), "search": search,
              "integrator": asdict(cfg) if cfg else asdict(IntegratorConfig())}
    return ScalingReport(rows, per_n, fit, failures, config)
