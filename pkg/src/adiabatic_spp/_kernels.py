"""Compiled inner loops for state-vector propagation.

Everything here works on flat complex128 arrays of length 2**n and takes
precomputed schedule samples, so no Python callables cross into numba.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def fwht(x):
    """Unnormalized in-place Walsh-Hadamard transform."""
    n = x.shape[0]
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                a = x[j]
                b = x[j + h]
                x[j] = a + b
                x[j + h] = a - b
        h *= 2


@njit(cache=True)
def split_step(psi, cost_idx, level_vals, walsh_idx, walsh_vals, alphas, betas, h):
    """Strang steps: half problem phase, driver phase in the Walsh basis, half problem phase.

    ``alphas[k]``, ``betas[k]`` are the schedule at the midpoint of step k.
    Diagonals are stored as (index, distinct values) so each step needs only
    ``len(level_vals) + len(walsh_vals)`` complex exponentials.
    """
    N = psi.shape[0]
    inv = 1.0 / N
    ptab = np.empty(level_vals.shape[0], np.complex128)
    vtab = np.empty(walsh_vals.shape[0], np.complex128)
    for k in range(alphas.shape[0]):
        a = alphas[k]
        b = betas[k]
        for m in range(level_vals.shape[0]):
            ptab[m] = np.exp(-0.5j * b * level_vals[m] * h)
        for m in range(walsh_vals.shape[0]):
            vtab[m] = np.exp(-1j * a * walsh_vals[m] * h) * inv
        for z in range(N):
            psi[z] *= ptab[cost_idx[z]]
        fwht(psi)
        for z in range(N):
            psi[z] *= vtab[walsh_idx[z]]
        fwht(psi)
        for z in range(N):
            psi[z] *= ptab[cost_idx[z]]


@njit(cache=True)
def _h_apply(psi, out, a, b, diag, fields, pair_masks, pair_weights, n):
    N = psi.shape[0]
    for z in range(N):
        out[z] = b * diag[z] * psi[z]
    for i in range(n):
        w = -a * fields[i]
        if w == 0.0:
            continue
        m = 1 << i
        for z in range(N):
            out[z] += w * psi[z ^ m]
    for p in range(pair_masks.shape[0]):
        w = -a * pair_weights[p]
        m = pair_masks[p]
        for z in range(N):
            out[z] += w * psi[z ^ m]


@njit(cache=True)
def rk4(psi, diag, fields, pair_masks, pair_weights, n, a_nodes, b_nodes, h):
    """Classical RK4 for i dpsi/dt = H(t) psi.

    Schedule values are given on half-step nodes: node 2k is the start of
    step k, 2k+1 its midpoint, 2k+2 its end.
    """
    N = psi.shape[0]
    k1 = np.empty(N, np.complex128)
    k2 = np.empty(N, np.complex128)
    k3 = np.empty(N, np.complex128)
    k4 = np.empty(N, np.complex128)
    tmp = np.empty(N, np.complex128)
    nsteps = (a_nodes.shape[0] - 1) // 2
    for k in range(nsteps):
        a0, am, a1 = a_nodes[2 * k], a_nodes[2 * k + 1], a_nodes[2 * k + 2]
        b0, bm, b1 = b_nodes[2 * k], b_nodes[2 * k + 1], b_nodes[2 * k + 2]
        _h_apply(psi, k1, a0, b0, diag, fields, pair_masks, pair_weights, n)
        for z in range(N):
            k1[z] *= -1j
            tmp[z] = psi[z] + 0.5 * h * k1[z]
        _h_apply(tmp, k2, am, bm, diag, fields, pair_masks, pair_weights, n)
        for z in range(N):
            k2[z] *= -1j
            tmp[z] = psi[z] + 0.5 * h * k2[z]
        _h_apply(tmp, k3, am, bm, diag, fields, pair_masks, pair_weights, n)
        for z in range(N):
            k3[z] *= -1j
            tmp[z] = psi[z] + h * k3[z]
        _h_apply(tmp, k4, a1, b1, diag, fields, pair_masks, pair_weights, n)
        for z in range(N):
            psi[z] += (h / 6.0) * (k1[z] + 2.0 * k2[z] + 2.0 * k3[z] - 1j * k4[z])
