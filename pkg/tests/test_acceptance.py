"""Acceptance suite. Each test records one PASS/FAIL line, printed at the end of the run."""

import math
from math import comb

import numpy as np
import pytest
from scipy.linalg import eigh

from adiabatic_spp import (
    DriverParams,
    IntegratorConfig,
    Schedule,
    build_cost_spectrum,
    coarse_grained_dos,
    complexity,
    dense_hamiltonian,
    enumerate_residues,
    generate_instance,
    minimize_complexity,
    propagate,
    scaling_sweep,
)
from adiabatic_spp.experiments import instance_seed

from .conftest import make_problem
from .oracles import dense_exponential_product

pytestmark = pytest.mark.filterwarnings("ignore:delta=")


def test_c01_oracle_equivalence(criterion):
    worst = 0.0
    for seed in range(5):
        inst, table, costs, p, sched = make_problem(6, 4, seed=seed)
        split = propagate(inst, costs, p, sched, 5.0, IntegratorConfig("split", 1e-3), table).state
        rk4 = propagate(inst, costs, p, sched, 5.0, IntegratorConfig("rk4", 1e-3), table).state
        dense = dense_exponential_product(costs, p, sched, 5.0, 1e-3)
        worst = max(worst, *(np.abs(x - y).max() for x, y in ((split, rk4), (split, dense), (rk4, dense))))
    ok = criterion(1, worst < 1e-5, f"oracle equivalence, max pairwise amplitude difference {worst:.2e} < 1e-5")
    assert ok


def test_c02_norm_conservation(criterion):
    inst, table, costs, p, sched = make_problem(12, 20, seed=0)
    split = propagate(inst, costs, p, sched, 100.0, IntegratorConfig("split"), table)
    rk4 = propagate(inst, costs, p, sched, 100.0, IntegratorConfig("rk4", 2.5e-3), table)
    ok = split.norm_drift < 1e-9 and rk4.norm_drift < 1e-7
    criterion(2, ok, f"norm drift split {split.norm_drift:.1e} < 1e-9, rk4 (dt=2.5e-3) {rk4.norm_drift:.1e} < 1e-7")
    assert ok


def test_c03_driver_spectrum(criterion):
    n = 8
    inst, table, costs, p, sched = make_problem(n, 20, seed=0)
    w = eigh(dense_hamiltonian(0.0, sched, p, costs), eigvals_only=True)
    expected = np.repeat([-n + 2 * m for m in range(n + 1)], [comb(n, m) for m in range(n + 1)])
    err = float(np.abs(w - expected).max())
    ok = criterion(3, err < 1e-10, f"driver spectrum at s=0, max eigenvalue error {err:.1e} < 1e-10")
    assert ok


def test_c04_initial_complexity(criterion):
    ratios = []
    for n in (6, 8, 10, 12):
        for seed in range(3):
            inst, table, costs, p, sched = make_problem(n, 20, seed=seed)
            if costs.d0 == 0:
                continue
            p0 = propagate(inst, costs, p, sched, 0.01, table=table).p0
            ratios.append(complexity(0.01, p0, costs.d0) / 2**n)
    ok = len(ratios) >= 10 and 0.9 <= min(ratios) and max(ratios) <= 1.2
    criterion(4, ok, f"C(0.01)/2^n in [{min(ratios):.4f}, {max(ratios):.4f}] over {len(ratios)} instances")
    assert ok


def test_c05_adiabatic_limit(criterion):
    inst, table, costs, p, sched = make_problem(8, 20, seed=0)
    p0 = [propagate(inst, costs, p, sched, T, table=table).p0 for T in (1, 10, 100, 1000, 10000)]
    ok = max(p0) > 0.9 and all(b > a for a, b in zip(p0, p0[1:]))
    criterion(5, ok, "p0 at T=1..1e4: " + ", ".join(f"{x:.8f}" for x in p0))
    assert ok


@pytest.mark.slow
def test_c06_scaling(criterion):
    rep = scaling_sweep(range(8, 14), 11, b=25, K=20, seed=0, fit_range=(10, 13))
    slope = rep.fit["slope"]
    ok = rep.failures == 0 and 0.35 <= slope <= 0.75
    medians = ", ".join(f"{n}:{v['median_C_star']:.0f}" for n, v in rep.per_n.items())
    criterion(6, ok, f"scaling slope {slope:.3f} in [0.35, 0.75] (median C*: {medians})")
    assert ok


def test_c07_probability_steps(criterion):
    n = 12
    inst, table, costs, p, sched = make_problem(n, 20, seed=instance_seed(0, n, 0))
    curve = minimize_complexity(inst, costs, p, sched, table=table)
    psi = propagate(inst, costs, p, sched, curve.T_star, table=table).state
    prob = np.abs(psi) ** 2
    means = [float(prob[costs.costs == k].mean()) for k in range(6)]
    ok = all(b <= a for a, b in zip(means, means[1:]))
    criterion(7, ok, f"band means at T*={curve.T_star:.2f}: " + ", ".join(f"{m:.2e}" for m in means))
    assert ok


def test_c08_gaussian_dos(criterion):
    errors = []
    for seed in range(3):
        inst = generate_instance(18, 25, seed)
        h = coarse_grained_dos(enumerate_residues(inst))
        mask = np.abs(h.bin_centers) <= math.sqrt(h.n * h.sigma2)
        g = h.gaussian()
        errors.append(float(np.mean(np.abs(h.rho_bar[mask] - g[mask]) / g[mask])))
    ok = max(errors) < 0.1
    criterion(8, ok, "Gaussian density, mean relative errors " + ", ".join(f"{e:.3f}" for e in errors) + " < 0.1")
    assert ok


def test_c09_bit_flip_symmetry(criterion):
    n = 10
    inst, table, costs, p, sched = make_problem(n, 20, seed=0)
    psi = propagate(inst, costs, p, sched, 50.0, table=table).state
    diff = float(np.abs(psi - psi[np.arange(2**n) ^ (2**n - 1)]).max())
    ok = criterion(9, diff < 1e-10, f"bit-flip symmetry, max |psi_z - psi_zbar| = {diff:.1e} < 1e-10")
    assert ok


def test_c10_nonadiabatic_exponent(criterion):
    inst, table, costs, p, sched = make_problem(8, 20, seed=0)
    Ts = np.geomspace(50, 500, 25)
    loss = [1 - propagate(inst, costs, p, sched, T, table=table).p0 for T in Ts]
    gamma = -np.polyfit(np.log(Ts), np.log(loss), 1)[0]
    ok = criterion(10, 1.5 <= gamma <= 2.5, f"1-p0 ~ T^-gamma on [50, 500], gamma = {gamma:.3f} in [1.5, 2.5]")
    assert ok


def test_c11_ground_degeneracy(criterion):
    d0 = []
    for seed in range(20):
        inst = generate_instance(14, 25, seed)
        d0.append(build_cost_spectrum(inst, enumerate_residues(inst), 20).d0)
    med = float(np.median(d0))
    ok = criterion(11, 10 <= med <= 40, f"median d0 at n=14 = {med:g} in [10, 40]")
    assert ok
