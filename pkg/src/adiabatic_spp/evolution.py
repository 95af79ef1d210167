"""Time-dependent Schrodinger propagation from the symmetric state."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NumericalError, ValidationError
from .hamiltonian import DriverParams, Schedule, dense_hamiltonian, symmetric_state
from .spp_core import CostSpectrum, ResidueTable, SppInstance, enumerate_residues

DEFAULT_DT = 1e-2
STABILITY_LIMIT = 0.1
METHODS = ("split", "rk4")


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    ``dt=None`` means 1e-2, lowered when needed so that
    ``dt * max_energy <= 0.1``. An explicit ``dt`` that violates the guard is
    rejected. ``overlap_at`` lists s values at which the population of the
    instantaneous ground eigenspace is sampled (dense, n <= 12).
    """

    method: str = "split"
    dt: float | None = None
    renormalize: bool = False
    record_profile_at: tuple[float, ...] = ()
    overlap_at: tuple[float, ...] = ()

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")

    def resolve_dt(self, max_energy: float) -> float:
        if self.dt is None:
            return min(DEFAULT_DT, STABILITY_LIMIT / max_energy) if max_energy > 0 else DEFAULT_DT
        if self.dt * max_energy > STABILITY_LIMIT * (1 + 1e-12):
            raise ValidationError(
                f"dt={self.dt} violates the stability guard dt*max_energy <= {STABILITY_LIMIT} "
                f"(max_energy={max_energy:g})"
            )
        return self.dt


@dataclass
class EvolutionResult:
    T: float
    p0: float
    profile: np.ndarray
    norm_drift: float
    state: np.ndarray
    method: str
    dt: float
    steps: int
    snapshots: dict = field(default_factory=dict)
    overlaps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "p0": self.p0,
            "norm_drift": self.norm_drift,
            "method": self.method,
            "dt": self.dt,
            "steps": self.steps,
            "adiabatic_overlap": [{"s": s, "overlap": v} for s, v in self.overlaps],
            "snapshot_times": sorted(self.snapshots),
        }

    def write_json(self, path, extra: dict | None = None) -> None:
        data = self.to_dict()
        if extra:
            data.update(extra)
        with open(path, "w") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")


def max_energy(params: DriverParams, costs: CostSpectrum) -> float:
    return max(params.norm_bound, float(costs.L))


def ground_probability(psi: np.ndarray, costs: CostSpectrum) -> float:
    return float(np.sum(np.abs(psi[costs.ground_set]) ** 2))


def probability_profile(psi: np.ndarray, table: ResidueTable) -> np.ndarray:
    """``|psi_z|**2`` reordered by increasing ``|Omega_z|``; entry 0 is the best partition."""
    return np.abs(psi[table.sorted_order]) ** 2


def adiabatic_overlap(psi: np.ndarray, ground_eigvec: np.ndarray) -> float:
    """``|<Psi_0|psi>|**2``. A 2-D ``ground_eigvec`` is treated as an orthonormal
    basis (columns) of a degenerate ground eigenspace and the projected
    population is returned."""
    g = np.asarray(ground_eigvec)
    amp = g.conj().T @ psi
    return float(np.sum(np.abs(amp) ** 2))


def _check_inputs(inst, costs, params, T):
    if not T > 0:
        raise ValidationError(f"T must be positive, got {T}")
    if not inst.n == costs.n == params.n:
        raise ValidationError(
            f"size mismatch: instance n={inst.n}, costs n={costs.n}, driver n={params.n}"
        )


def _run_split(psi, costs, params, sched, k0, k1, nsteps, h, renormalize, walsh):
    s_mid = (np.arange(k0, k1) + 0.5) / nsteps
    a, b = sched.coefficients(s_mid)
    levels = np.arange(costs.L + 1, dtype=float) + sched.energy_shift
    walsh_idx, walsh_vals = walsh
    if not renormalize:
        _kernels.split_step(psi, costs.costs, levels, walsh_idx, walsh_vals,
                            np.ascontiguousarray(a), np.ascontiguousarray(b), h)
        return
    for i in range(k1 - k0):
        _kernels.split_step(psi, costs.costs, levels, walsh_idx, walsh_vals, a[i:i + 1], b[i:i + 1], h)
        psi /= np.linalg.norm(psi)


def _run_rk4(psi, costs, params, sched, k0, k1, nsteps, h, renormalize):
    s_nodes = np.arange(2 * k0, 2 * k1 + 1) / (2 * nsteps)
    a, b = sched.coefficients(s_nodes)
    a, b = np.ascontiguousarray(a), np.ascontiguousarray(b)
    diag = costs.costs + sched.energy_shift
    masks, weights = params.pairs()
    if not renormalize:
        _kernels.rk4(psi, diag, params.B, masks, weights, params.n, a, b, h)
        return
    for i in range(k1 - k0):
        _kernels.rk4(psi, diag, params.B, masks, weights, params.n, a[2 * i:2 * i + 3], b[2 * i:2 * i + 3], h)
        psi /= np.linalg.norm(psi)


def propagate(
    inst: SppInstance,
    costs: CostSpectrum,
    params: DriverParams,
    sched: Schedule,
    T: float,
    cfg: IntegratorConfig | None = None,
    table: ResidueTable | None = None,
) -> EvolutionResult:
    """Solve ``i dpsi/dt = H(t/T) psi`` on ``[0, T]`` from the symmetric state.

    The step count is ``ceil(T/dt)`` and the steps are uniform. ``split``
    uses second-order Strang splitting with the schedule at each step's
    midpoint; the driver factor is applied exactly after a Walsh-Hadamard
    transform, so the scheme is unitary to rounding. ``rk4`` is the classical
    explicit method, kept as an independent cross-check.
    """
    cfg = cfg or IntegratorConfig()
    _check_inputs(inst, costs, params, T)
    dt = cfg.resolve_dt(max_energy(params, costs))
    nsteps = max(1, math.ceil(T / dt - 1e-9))
    h = T / nsteps
    if table is None:
        table = enumerate_residues(inst)

    marks = {}
    for t in cfg.record_profile_at:
        if not 0 <= t <= T:
            raise ValidationError(f"snapshot time {t} outside [0, {T}]")
        marks.setdefault(int(round(t / h)), []).append(("profile", t))
    for s in cfg.overlap_at:
        if not 0 <= s <= 1:
            raise ValidationError(f"overlap sample s={s} outside [0, 1]")
        marks.setdefault(int(round(s * nsteps)), []).append(("overlap", s))

    walsh = None
    if cfg.method == "split":
        v = params.walsh_diagonal()
        vals, idx = np.unique(v, return_inverse=True)
        walsh = (idx.astype(np.int64), vals.astype(float))

    psi = symmetric_state(inst.n)
    result = EvolutionResult(T, 0.0, np.empty(0), 0.0, psi, cfg.method, h, nsteps)
    k = 0
    for stop in sorted(set(marks) | {nsteps}):
        if stop > k:
            if cfg.method == "split":
                _run_split(psi, costs, params, sched, k, stop, nsteps, h, cfg.renormalize, walsh)
            else:
                _run_rk4(psi, costs, params, sched, k, stop, nsteps, h, cfg.renormalize)
            if not np.all(np.isfinite(psi)):
                raise NumericalError(f"non-finite amplitudes after step {stop} of {nsteps} (t={stop * h:g})")
            k = stop
        for kind, val in marks.get(stop, ()):
            if kind == "profile":
                result.snapshots[float(val)] = probability_profile(psi, table)
            else:
                from .spectral import ground_eigenspace

                H = dense_hamiltonian(float(val), sched, params, costs)
                result.overlaps.append((float(val), adiabatic_overlap(psi, ground_eigenspace(H, costs.d0))))

    norm = float(np.sqrt(np.sum(np.abs(psi) ** 2)))
    result.norm_drift = abs(norm - 1.0)
    result.p0 = ground_probability(psi, costs)
    result.profile = probability_profile(psi, table)
    return result


def check_convergence(inst, costs, params, sched, T, cfg=None, tol=1e-4):
    """Rerun with half the step; returns ``(converged, p0_at_dt, p0_at_dt_half)``."""
    cfg = cfg or IntegratorConfig()
    dt = cfg.resolve_dt(max_energy(params, costs))
    coarse = propagate(inst, costs, params, sched, T, IntegratorConfig(cfg.method, dt))
    fine = propagate(inst, costs, params, sched, T, IntegratorConfig(cfg.method, dt / 2))
    return abs(coarse.p0 - fine.p0) < tol, coarse.p0, fine.p0


def write_profile_csv(path, profile: np.ndarray, table: ResidueTable, costs: CostSpectrum) -> None:
    omega = np.abs(table.omega)[table.sorted_order]
    levels = costs.costs[table.sorted_order]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sorted_index", "|Omega|", "cost_k", "probability"])
        for i, (om, k, p) in enumerate(zip(omega, levels, profile)):
            w.writerow([i, repr(float(om)), int(k), repr(float(p))])
