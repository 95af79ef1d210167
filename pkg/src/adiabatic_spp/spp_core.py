"""Set partition instances, exact residues and the logarithmic cost function.

Bitstrings are integer indices with bit ``j`` holding ``z_j``. A bit value
of 0 puts ``a_j`` on the positive side of the partition (``s_j = 1 - 2 z_j``).
Residues are kept as exact integers in units of ``2**-b``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CapacityError, ValidationError

MAX_ENUM_QUBITS = 26
DEFAULT_K = 20

# relative distance to a band edge below which the float estimate is re-checked exactly
_EDGE_RTOL = 1e-9


@dataclass(frozen=True)
class SppInstance:
    """``n`` positive integers ``alpha_j <= 2**b``; the numbers are ``a_j = alpha_j / 2**b``."""

    n: int
    b: int
    alphas: tuple[int, ...]
    seed: int | None = None

    def __post_init__(self):
        alphas = tuple(int(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        _check_sizes(self.n, self.b)
        if len(alphas) != self.n:
            raise ValidationError(f"expected {self.n} alphas, got {len(alphas)}")
        top = 1 << self.b
        if any(a < 1 or a > top for a in alphas):
            raise ValidationError(f"alphas must lie in [1, 2**{self.b}]")

    @property
    def a(self) -> np.ndarray:
        """The numbers in (0, 1] as float64 (exact for b <= 53)."""
        return np.array([math.ldexp(x, -self.b) for x in self.alphas])

    @property
    def total(self) -> int:
        """Sum of the alphas, i.e. the residue of the all-zeros bitstring."""
        return sum(self.alphas)

    @property
    def A(self) -> float:
        return math.ldexp(self.total, -self.b)

    def to_dict(self) -> dict:
        return {"n": self.n, "b": self.b, "alphas": list(self.alphas), "seed": self.seed}

    @classmethod
    def from_dict(cls, data: dict) -> "SppInstance":
        try:
            return cls(int(data["n"]), int(data["b"]), tuple(data["alphas"]), data.get("seed"))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed instance: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "SppInstance":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class ResidueTable:
    residues: np.ndarray  # int64, signed, units of 2**-b
    sorted_order: np.ndarray  # bitstrings by increasing |residue|, ties by index
    b: int

    @property
    def n(self) -> int:
        return int(self.residues.size).bit_length() - 1

    @property
    def omega(self) -> np.ndarray:
        """Signed residues as floats in the units of the ``a_j``."""
        return np.ldexp(self.residues.astype(np.float64), -self.b)


@dataclass(frozen=True, eq=False)
class CostSpectrum:
    n: int
    b: int
    K: float
    delta: float
    L: int
    A: float
    costs: np.ndarray  # int64 level per bitstring, in [0, L]
    degeneracies: np.ndarray  # d_k for k = 0..L
    ground_set: np.ndarray

    @property
    def d0(self) -> int:
        return int(self.ground_set.size)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "d_k"])
            for k, d in enumerate(self.degeneracies):
                w.writerow([k, int(d)])


def _check_sizes(n: int, b: int) -> None:
    if not 1 <= n <= 30:
        raise ValidationError(f"n must be in [1, 30], got {n}")
    if not 1 <= b <= 62:
        raise ValidationError(f"b must be in [1, 62], got {b}")
    if n << b >= 1 << 62:
        raise ValidationError(f"n * 2**b = {n} * 2**{b} overflows 64-bit residue sums")


def generate_instance(n: int, b: int, seed: int) -> SppInstance:
    """Draw ``n`` i.i.d. integers uniformly from ``[1, 2**b]``."""
    _check_sizes(n, b)
    rng = np.random.default_rng(seed)
    alphas = rng.integers(1, 1 << b, size=n, endpoint=True, dtype=np.int64)
    return SppInstance(n, b, tuple(int(x) for x in alphas), seed)


def _bits(inst: SppInstance, z) -> list[int]:
    if isinstance(z, (int, np.integer)):
        z = int(z)
        if not 0 <= z < 1 << inst.n:
            raise ValidationError(f"bitstring index {z} out of range for n={inst.n}")
        return [(z >> j) & 1 for j in range(inst.n)]
    bits = [int(x) for x in z]
    if len(bits) != inst.n or any(x not in (0, 1) for x in bits):
        raise ValidationError(f"expected {inst.n} bits, got {z!r}")
    return bits


def residue(inst: SppInstance, z: int | Sequence[int]) -> int:
    """Signed residue ``sum_j (1 - 2 z_j) alpha_j``.

    ``z`` is either an integer index (bit ``j`` is ``z_j``) or a sequence of
    bits ``z_0 .. z_{n-1}``.
    """
    return sum((1 - 2 * zj) * a for zj, a in zip(_bits(inst, z), inst.alphas))


def enumerate_residues(inst: SppInstance) -> ResidueTable:
    if inst.n > MAX_ENUM_QUBITS:
        raise CapacityError(f"n={inst.n} exceeds the enumeration limit of {MAX_ENUM_QUBITS}")
    r = np.array([inst.total], dtype=np.int64)
    # appending the block with bit j set keeps bit j of the index equal to z_j
    for a in inst.alphas:
        r = np.concatenate([r, r - 2 * a])
    order = np.argsort(np.abs(r), kind="stable")
    return ResidueTable(r, order, inst.b)


def _exact_band(x: int, d2: Fraction) -> int:
    """Cost level of an integer residue magnitude ``x`` given ``(delta * 2**b)**2``."""
    x2 = x * x
    if x2 < d2:
        return 0
    k = 1
    while x2 >= d2 * 4**k:
        k += 1
    return k


def _bands(mag: np.ndarray, d_units: float, d2: Fraction) -> np.ndarray:
    ratio = mag / d_units
    lg = np.log2(np.maximum(ratio, 0.5))
    k = np.where(ratio < 1.0, 0, np.floor(lg).astype(np.int64) + 1)
    near = (ratio > 0.5) & (np.abs(lg - np.round(lg)) < _EDGE_RTOL)
    for i in np.flatnonzero(near):
        k[i] = _exact_band(int(mag[i]), d2)
    return k.astype(np.int64)


def build_cost_spectrum(inst: SppInstance, table: ResidueTable, K: float = DEFAULT_K) -> CostSpectrum:
    """Logarithmic cost levels with seed ``delta = sqrt(n) 2**-n K``.

    Level 0 holds ``|Omega| < delta``; level ``k >= 1`` holds
    ``2**(k-1) <= |Omega|/delta < 2**k``. Band edges are decided exactly
    (integer arithmetic on squared magnitudes) so a residue sitting on an
    edge goes to the upper band.
    """
    if not K > 0:
        raise ValidationError(f"K must be positive, got {K}")
    n, b = inst.n, inst.b
    delta = math.sqrt(n) * K * 2.0**-n
    d_units = math.ldexp(delta, b)
    d2 = n * Fraction(K) ** 2 * Fraction(4) ** (b - n)

    costs = _bands(np.abs(table.residues), d_units, d2)
    L = _exact_band(inst.total, d2)
    degeneracies = np.bincount(costs, minlength=L + 1)
    ground = np.flatnonzero(costs == 0)
    if L == 0:
        warnings.warn(
            f"delta={delta:.4g} covers every residue (A={inst.A:.4g}); all costs are 0",
            RuntimeWarning,
            stacklevel=2,
        )
    elif ground.size == 0:
        warnings.warn(
            f"delta={delta:.4g} is below every residue; the ground level is empty (raise K)",
            RuntimeWarning,
            stacklevel=2,
        )
    return CostSpectrum(n, b, float(K), delta, L, inst.A, costs, degeneracies, ground)


def brute_force_min_residue(inst: SppInstance) -> tuple[int, list[int]]:
    """Exhaustive optimum: ``(min |residue|, all optimal bitstrings)``."""
    table = enumerate_residues(inst)
    mag = np.abs(table.residues)
    best = int(mag.min())
    return best, [int(z) for z in np.flatnonzero(mag == best)]
