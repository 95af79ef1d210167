"""Stationary adiabatic spectrum of H(s): level curves, merging classification, minimum gap."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import linear_sum_assignment

from .errors import CapacityError, ValidationError
from .hamiltonian import MAX_DENSE_QUBITS, DriverParams, Schedule, dense_driver, dense_hamiltonian
from .spp_core import CostSpectrum, SppInstance

LATE_S = 0.9
AMBIGUITY_TOL = 1e-6


@dataclass
class SpectralResult:
    s_grid: np.ndarray
    eigenvalues: np.ndarray  # (len(s_grid), m), ascending per row
    eigenvectors: np.ndarray  # (len(s_grid), 2**n, m)
    merging: np.ndarray  # (len(s_grid), m) bool, level ends on the final ground level
    V0k: np.ndarray  # (len(s_grid), m), <Psi_0|V|Psi_k>
    warnings: list = field(default_factory=list)
    min_gap: float | None = None
    s_star: float | None = None

    @property
    def m(self) -> int:
        return self.eigenvalues.shape[1]

    def index_of(self, s: float) -> int:
        i = int(np.argmin(np.abs(self.s_grid - s)))
        if not math.isclose(self.s_grid[i], s, rel_tol=0, abs_tol=1e-12):
            raise ValidationError(f"s={s} is not on the computed grid")
        return i

    def gaps(self) -> np.ndarray:
        """Per-s distance from g_0 to the lowest non-merging level (inf if none tracked)."""
        out = np.full(self.s_grid.size, np.inf)
        for i in range(self.s_grid.size):
            cand = self.eigenvalues[i, 1:][~self.merging[i, 1:]]
            if cand.size:
                out[i] = cand.min() - self.eigenvalues[i, 0]
        return out


def ground_eigenspace(H: np.ndarray, max_dim: int = 1, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal columns spanning the lowest eigenvalue's eigenspace (up to ``max_dim``)."""
    N = H.shape[0]
    top = min(max(max_dim, 1), N - 1)
    w, U = eigh(H, subset_by_index=[0, top])
    keep = w - w[0] <= tol * max(1.0, abs(w[0]))
    return U[:, keep]


def _eigs(H: np.ndarray, m: int):
    if m >= H.shape[0]:
        return eigh(H)
    return eigh(H, subset_by_index=[0, m - 1])


def _solve_grid(s_values, sched, params, costs, m, Vd):
    vals, vecs, v0k = [], [], []
    for s in s_values:
        try:
            w, U = _eigs(dense_hamiltonian(float(s), sched, params, costs), m)
        except np.linalg.LinAlgError as exc:
            raise ValidationError(f"eigensolver failed at s={s}: {exc}") from exc
        vals.append(w)
        vecs.append(U)
        v0k.append(U[:, 0] @ Vd @ U)
    return np.array(vals), np.array(vecs), np.array(v0k)


def classify_levels(eigvecs, ground_set, s_grid, late_s: float = LATE_S):
    """Flag levels that end on the final ground level.

    Where ``s >= late_s`` (and always at the last grid point) a level merges
    iff its weight on the ground bitstrings exceeds 1/2. Earlier points inherit
    the flag of the level they overlap most at the next grid point; the
    matching is solved as an assignment problem so it is a permutation.

    Returns ``(flags, warnings)``.
    """
    eigvecs = np.asarray(eigvecs)
    ns, _, m = eigvecs.shape
    flags = np.zeros((ns, m), dtype=bool)
    notes = []
    for i in range(ns - 1, -1, -1):
        if s_grid[i] >= late_s or i == ns - 1:
            weight = np.sum(eigvecs[i][ground_set, :] ** 2, axis=0)
            flags[i] = weight > 0.5
            continue
        O = np.abs(eigvecs[i].T @ eigvecs[i + 1])
        rows, cols = linear_sum_assignment(-O)
        flags[i, rows] = flags[i + 1, cols]
        top2 = np.sort(O, axis=1)[:, -2:]
        amb = np.flatnonzero(top2[:, 1] - top2[:, 0] < AMBIGUITY_TOL)
        if amb.size:
            notes.append(f"ambiguous continuation at s={s_grid[i]:.6g} for levels {amb.tolist()}")
    return flags, notes


def minimum_gap(res: SpectralResult) -> tuple[float, float]:
    """``(dg_min, s_star)`` over the grid, ignoring levels that merge into the ground level."""
    gaps = res.gaps()
    if not np.isfinite(gaps).any():
        raise ValidationError(
            f"all {res.m} tracked levels merge into the ground level; increase the level count m"
        )
    i = int(np.argmin(gaps))
    return float(gaps[i]), float(res.s_grid[i])


def adiabatic_spectrum(
    inst: SppInstance,
    costs: CostSpectrum,
    params: DriverParams,
    sched: Schedule,
    s_grid=None,
    m: int | None = None,
    refine: int = 10,
    late_s: float = LATE_S,
) -> SpectralResult:
    """Lowest ``m`` adiabatic eigenpairs on ``s_grid`` (default 101 uniform points).

    With ``refine > 1`` the interval around the coarse gap minimum is
    resampled ``refine`` times more densely and classification is redone on
    the merged grid.
    """
    n = inst.n
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"spectral analysis needs a dense 2**n matrix; n={n} > {MAX_DENSE_QUBITS}")
    N = 1 << n
    if m is None:
        m = min(N, costs.d0 + 12)
    if not 1 <= m <= N:
        raise ValidationError(f"level count m must be in [1, {N}], got {m}")
    s_grid = np.linspace(0.0, 1.0, 101) if s_grid is None else np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size == 0 or np.any(np.diff(s_grid) <= 0):
        raise ValidationError("s_grid must be a non-empty increasing sequence")
    if s_grid[0] < 0 or s_grid[-1] > 1:
        raise ValidationError("s_grid must lie in [0, 1]")

    Vd = dense_driver(params)
    vals, vecs, v0k = _solve_grid(s_grid, sched, params, costs, m, Vd)
    flags, notes = classify_levels(vecs, costs.ground_set, s_grid, late_s)
    res = SpectralResult(s_grid, vals, vecs, flags, v0k, notes)

    if np.isfinite(res.gaps()).any() and refine > 1 and s_grid.size > 2:
        _, s_star = minimum_gap(res)
        i = res.index_of(s_star)
        lo, hi = s_grid[max(i - 1, 0)], s_grid[min(i + 1, s_grid.size - 1)]
        count = refine * (min(i + 1, s_grid.size - 1) - max(i - 1, 0)) + 1
        extra = np.setdiff1d(np.linspace(lo, hi, count), s_grid)
        if extra.size:
            e_vals, e_vecs, e_v0k = _solve_grid(extra, sched, params, costs, m, Vd)
            grid = np.concatenate([s_grid, extra])
            order = np.argsort(grid)
            grid = grid[order]
            vals = np.concatenate([vals, e_vals])[order]
            vecs = np.concatenate([vecs, e_vecs])[order]
            v0k = np.concatenate([v0k, e_v0k])[order]
            flags, notes = classify_levels(vecs, costs.ground_set, grid, late_s)
            res = SpectralResult(grid, vals, vecs, flags, v0k, notes)

    if np.isfinite(res.gaps()).any():
        res.min_gap, res.s_star = minimum_gap(res)
    return res


def nonadiabatic_sum(res: SpectralResult, t: float, T: float) -> tuple[float, float]:
    """Perturbative probability of having left the adiabatic ground state at time ``t``.

    For the linear schedule ``(ds/dt / s)**2 = 1/t**2``, giving
    ``t**-2 * sum_{k>=1} |V_0k|**2 / (g_k - g_0)**4`` over the computed levels.
    Levels degenerate with the ground level are skipped. Returns
    ``(estimate, last_term)``; a last term that is not small next to the
    estimate means the truncation at ``m`` levels matters.
    """
    if not t > 0:
        raise ValidationError("t must be positive; the 1/t**2 prefactor is singular at t=0")
    if not t <= T:
        raise ValidationError(f"t={t} exceeds T={T}")
    i = res.index_of(t / T)
    g = res.eigenvalues[i]
    d = g[1:] - g[0]
    keep = d > 1e-10 * max(1.0, abs(g[0]))
    terms = np.abs(res.V0k[i, 1:][keep]) ** 2 / d[keep] ** 4 / t**2
    if terms.size == 0:
        return 0.0, 0.0
    return float(terms.sum()), float(terms[-1])


def adiabaticity(res: SpectralResult, T: float) -> float:
    """``V / (T * dg_min**2)`` with V the largest ``|V_0k|`` (k >= 1) at the gap minimum."""
    if res.min_gap is None:
        raise ValidationError("no minimum gap available; increase the level count")
    i = res.index_of(res.s_star)
    v = float(np.abs(res.V0k[i, 1:]).max()) if res.m > 1 else 0.0
    return v / (T * res.min_gap**2)


def write_spectrum_csv(res: SpectralResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "k", "g_k", "merging"])
        for i, s in enumerate(res.s_grid):
            for k in range(res.m):
                w.writerow([repr(float(s)), k, repr(float(res.eigenvalues[i, k])), int(res.merging[i, k])])


def gap_report(res: SpectralResult, T: float | None = None) -> dict:
    out = {"min_gap": res.min_gap, "s_star": res.s_star, "levels": res.m,
           "warnings": len(res.warnings)}
    if T is not None:
        out["T"] = T
        out["eta"] = adiabaticity(res, T)
    return out
