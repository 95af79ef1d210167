"""Matrix-free driver, problem and interpolated Hamiltonians on 2**n amplitudes.

State vectors are plain complex128 arrays indexed by bitstring (bit ``j`` of
the index is ``z_j``). Units have hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CapacityError, ValidationError
from .spp_core import CostSpectrum

MAX_DENSE_QUBITS = 12


def linear_alpha(s):
    return 1.0 - s


def linear_beta(s):
    return s


@dataclass(frozen=True)
class Schedule:
    """``H(s) = alpha(s) V + beta(s) (H_P + energy_shift)`` with ``s = t/T``."""

    alpha: Callable = linear_alpha
    beta: Callable = linear_beta
    energy_shift: float = 0.0

    def coefficients(self, s):
        s = np.asarray(s, dtype=float)
        a = np.broadcast_to(np.asarray(self.alpha(s), dtype=float), s.shape)
        b = np.broadcast_to(np.asarray(self.beta(s), dtype=float), s.shape)
        return a, b


@dataclass(frozen=True, eq=False)
class DriverParams:
    """Local fields ``B_i`` and symmetric couplings ``J_ij`` of the sigma_x driver."""

    B: np.ndarray
    J: np.ndarray = field(default=None)

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float).ravel()
        n = B.size
        J = np.zeros((n, n)) if self.J is None else np.array(self.J, dtype=float)
        if J.shape != (n, n):
            raise ValidationError(f"J must be {n}x{n}, got {J.shape}")
        if not np.allclose(J, J.T, rtol=0, atol=0):
            raise ValidationError("J must be symmetric")
        np.fill_diagonal(J, 0.0)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "J", J)

    @classmethod
    def uniform(cls, n: int, field_strength: float = 1.0) -> "DriverParams":
        return cls(np.full(n, float(field_strength)))

    @property
    def n(self) -> int:
        return self.B.size

    def pairs(self):
        """Nonzero couplings as (two-bit flip masks, weights), each unordered pair once."""
        iu, ju = np.triu_indices(self.n, 1)
        w = self.J[iu, ju]
        keep = w != 0
        masks = (np.int64(1) << iu[keep]) | (np.int64(1) << ju[keep])
        return masks.astype(np.int64), w[keep].astype(float)

    @property
    def norm_bound(self) -> float:
        return float(self.n * np.abs(self.B).max(initial=0.0) + np.abs(np.triu(self.J, 1)).sum())

    def walsh_diagonal(self) -> np.ndarray:
        """Eigenvalues of V in the Hadamard-transformed basis.

        All terms of V are products of sigma_x, which the n-fold Hadamard maps to
        sigma_z; on Walsh index ``w`` each ``sigma_x^i`` becomes ``1 - 2 w_i``.
        """
        n = self.n
        w = np.arange(1 << n, dtype=np.int64)
        x = 1.0 - 2.0 * ((w[:, None] >> np.arange(n)) & 1)
        v = -(x @ self.B)
        iu, ju = np.triu_indices(n, 1)
        for i, j in zip(iu, ju):
            if self.J[i, j]:
                v -= self.J[i, j] * x[:, i] * x[:, j]
        return v


def _check_state(psi: np.ndarray, n: int) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.shape != (1 << n,):
        raise ValidationError(f"state of shape {psi.shape} does not match n={n}")
    return psi


def symmetric_state(n: int) -> np.ndarray:
    if n < 1:
        raise ValidationError("n must be >= 1")
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)


def apply_driver(p: DriverParams, psi: np.ndarray) -> np.ndarray:
    psi = _check_state(psi, p.n)
    idx = np.arange(psi.size)
    out = np.zeros(psi.shape, dtype=np.result_type(psi, float))
    for i, b in enumerate(p.B):
        if b:
            out -= b * psi[idx ^ (1 << i)]
    for m, w in zip(*p.pairs()):
        out -= w * psi[idx ^ m]
    return out


def apply_problem(costs: CostSpectrum, psi: np.ndarray, energy_shift: float = 0.0) -> np.ndarray:
    psi = _check_state(psi, costs.n)
    return (costs.costs + energy_shift) * psi


def apply_hamiltonian(s: float, sched: Schedule, p: DriverParams, costs: CostSpectrum, psi) -> np.ndarray:
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"s must lie in [0, 1], got {s}")
    a, b = (float(c) for c in sched.coefficients(s))
    out = np.zeros(np.shape(psi), dtype=np.result_type(psi, float))
    if a:
        out += a * apply_driver(p, psi)
    if b:
        out += b * apply_problem(costs, psi, sched.energy_shift)
    return out


def dense_driver(p: DriverParams) -> np.ndarray:
    n = p.n
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense matrices are limited to n <= {MAX_DENSE_QUBITS}, got n={n}")
    N = 1 << n
    z = np.arange(N)
    V = np.zeros((N, N))
    for i, b in enumerate(p.B):
        V[z ^ (1 << i), z] -= b
    for m, w in zip(*p.pairs()):
        V[z ^ m, z] -= w
    return V


def dense_hamiltonian(s: float, sched: Schedule, p: DriverParams, costs: CostSpectrum) -> np.ndarray:
    """Explicit real symmetric ``H(s)``; for oracles and the spectral module."""
    a, b = (float(c) for c in sched.coefficients(s))
    H = a * dense_driver(p)
    H[np.diag_indices_from(H)] += b * (costs.costs + sched.energy_shift)
    return H


def save_state(psi: np.ndarray, path) -> None:
    """Checkpoint as little-endian (re, im) float64 pairs."""
    np.asarray(psi, dtype="<c16").tofile(path)


def load_state(path) -> np.ndarray:
    return np.fromfile(path, dtype="<c16").astype(np.complex128)
