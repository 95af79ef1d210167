"""Density of partition residues: coarse-grained histogram, Gaussian form, I(w), resonances."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import ValidationError
from .spp_core import ResidueTable, SppInstance

DEFAULT_WINDOW_FACTOR = 1000


@dataclass
class DosHistogram:
    n: int
    window: float
    bin_centers: np.ndarray
    counts: np.ndarray
    sigma2: float

    @property
    def rho_bar(self) -> np.ndarray:
        return self.counts / self.window

    def gaussian(self) -> np.ndarray:
        return gaussian_dos(self.bin_centers, self.n, self.sigma2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_center", "rho_bar", "gaussian_prediction"])
            for c, r, g in zip(self.bin_centers, self.rho_bar, self.gaussian()):
                w.writerow([repr(float(c)), repr(float(r)), repr(float(g))])


@dataclass
class ResonanceReport:
    q: float
    residues: np.ndarray  # distance of each a_j to the nearest multiple of q
    strength: float  # (pi**2 / 2) * sum r_j**2
    passes: bool

    def to_dict(self) -> dict:
        return {"q": self.q, "strength": self.strength, "passes": self.passes,
                "residues": [float(r) for r in self.residues]}


def default_window(n: int) -> float:
    """``sqrt(n) 2**-n * 1000``, capped at ``sqrt(n)/10`` for small n where the two cross."""
    return min(math.sqrt(n) * 2.0**-n * DEFAULT_WINDOW_FACTOR, math.sqrt(n) / 10)


def coarse_grained_dos(table: ResidueTable, window: float | None = None) -> DosHistogram:
    """Histogram of all ``2**n`` signed residues, divided by the bin width.

    Bins are centred on multiples of ``window``, so the zero bin is symmetric
    and the residue sign symmetry carries over to the histogram exactly.
    ``sigma2 = (1/n) sum_j a_j**2`` is recovered from the table itself: the
    mean of ``Omega_z**2`` over all bitstrings is ``sum_j a_j**2`` because the
    cross terms cancel.
    """
    n = table.n
    window = default_window(n) if window is None else float(window)
    lo, hi = 10 * math.sqrt(n) * 2.0**-n, math.sqrt(n) / 10
    if not lo <= window <= hi:
        raise ValidationError(f"window {window:g} outside the coarse-graining range [{lo:g}, {hi:g}]")
    omega = table.omega
    idx = np.floor(omega / window + 0.5).astype(np.int64)
    first = int(idx.min())
    counts = np.bincount(idx - first)
    centers = (np.arange(counts.size) + first) * window
    r = table.residues.astype(object)
    sigma2 = float(Fraction(int(np.sum(r * r)), (1 << n) * n * 4**table.b))
    return DosHistogram(n, window, centers, counts, sigma2)


def gaussian_dos(omega, n: int, sigma2: float):
    if not sigma2 > 0:
        raise ValidationError("sigma2 must be positive")
    var = n * sigma2
    return 2.0**n / np.sqrt(2 * np.pi * var) * np.exp(-np.square(omega) / (2 * var))


def characteristic_function(inst: SppInstance, w) -> float | np.ndarray:
    """``I(w) = prod_j cos(a_j w)``.

    The product is formed as ``sign * exp(fsum(log|cos|))`` so long products
    of values near 1 do not drift. The phase ``a_j w`` is computed as
    ``alpha_j * (w / 2**b)``, which costs one rounding.
    """
    scalar = np.ndim(w) == 0
    ws = np.atleast_1d(np.asarray(w, dtype=float))
    alphas = np.array(inst.alphas, dtype=float)
    out = np.empty(ws.shape)
    for i, x in enumerate(ws):
        c = np.cos(alphas * math.ldexp(x, -inst.b))
        if np.any(c == 0):
            out[i] = 0.0
            continue
        sign = -1.0 if np.count_nonzero(c < 0) % 2 else 1.0
        out[i] = sign * math.exp(math.fsum(np.log(np.abs(c))))
    return float(out[0]) if scalar else out


def approximate_gcd_scan(inst: SppInstance, q_candidates: Iterable[float]) -> list[ResonanceReport]:
    """Residues of every ``a_j`` against each candidate common divisor ``q``.

    Arithmetic is exact (``a_j`` and ``q`` as fractions), so an exact common
    divisor gives strength exactly 0. All ``n`` residues enter the strength.
    """
    a = [Fraction(x, 1 << inst.b) for x in inst.alphas]
    reports = []
    for q in q_candidates:
        fq = Fraction(q)
        if fq <= 0:
            raise ValidationError(f"q candidates must be positive, got {q}")
        r = [abs(x - round(x / fq) * fq) for x in a]
        strength = math.pi**2 / 2 * float(sum(x * x for x in r))
        reports.append(ResonanceReport(float(fq), np.array([float(x) for x in r]), strength, strength <= 1.0))
    return reports
