"""Exact Dirichlet spectrum of the fundamental tetrahedron, Weyl asymptotics and gap statistics."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import NamedTuple

import numpy as np


class HomogeneousIndex(NamedTuple):
    k0: int
    k1: int
    k2: int
    k3: int

    @property
    def norm2(self) -> int:
        return sum(k * k for k in self)

    @property
    def eigenvalue(self) -> float:
        return np.pi**2 * self.norm2 / 4


def is_lattice_member(k) -> bool:
    k = tuple(int(v) for v in k)
    return (
        len(k) == 4
        and sum(k) == 0
        and k[0] < k[1] < k[2] < k[3]
        and len({v % 4 for v in k}) == 1
    )


def enumerate_lambda0(norm_bound: float) -> list[HomogeneousIndex]:
    """All strictly increasing, zero-sum, mod-4 congruent integer 4-tuples with |k|^2 <= bound."""
    r = int(np.floor(np.sqrt(max(norm_bound, 0))))
    out = []
    for residue in range(4):
        values = np.arange(-r - ((r + residue) % 4) + residue - 4, r + 5)
        values = values[(values - residue) % 4 == 0]
        values = values[np.abs(values) <= r]
        a, b, c = np.meshgrid(values, values, values, indexing="ij")
        a, b, c = a.ravel(), b.ravel(), c.ravel()
        d = -(a + b + c)
        keep = (a < b) & (b < c) & (c < d) & ((d - residue) % 4 == 0)
        keep &= a * a + b * b + c * c + d * d <= norm_bound
        out += [HomogeneousIndex(*map(int, k)) for k in zip(a[keep], b[keep], c[keep], d[keep])]
    return sorted(out, key=lambda k: (k.norm2, tuple(k)))


def exact_spectrum_indices(n: int) -> list[HomogeneousIndex]:
    """The n lattice members with the smallest |k|^2."""
    bound = 100.0
    while True:
        members = enumerate_lambda0(bound)
        if len(members) >= n:
            return members[:n]
        bound *= 2


def exact_TF_spectrum(n: int) -> np.ndarray:
    """First n Dirichlet eigenvalues of the fundamental tetrahedron, one per lattice member."""
    return np.array([k.eigenvalue for k in exact_spectrum_indices(n)])


def to_homogeneous(x: np.ndarray) -> np.ndarray:
    """Homogeneous coordinates (s0, s1, s2, s3) of physical points, shape (n, 4)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
    s1, s2, s3 = (x2 + x3 - x1) / 2, (x3 + x1 - x2) / 2, (x1 + x2 - x3) / 2
    return np.column_stack([-(s1 + s2 + s3), s1, s2, s3])


def _inversions(p: tuple[int, ...]) -> int:
    return sum(p[i] > p[j] for i in range(4) for j in range(i + 1, 4))


_SIGNED_PERMUTATIONS = [(np.array(p), (-1) ** _inversions(p)) for p in permutations(range(4))]


def ts_eval(k, x: np.ndarray) -> np.ndarray:
    """Generalized sine function TS_k at physical points of the fundamental tetrahedron."""
    k = np.asarray(k, dtype=float)
    s = to_homogeneous(x)
    total = np.zeros(s.shape[0], dtype=complex)
    for perm, sign in _SIGNED_PERMUTATIONS:
        total += sign * np.exp(0.5j * np.pi * (s @ k[perm]))
    return total / 24


def weyl_prediction(k, volume: float, surface_area: float) -> np.ndarray:
    """Two-term Weyl asymptotic for the k-th Dirichlet eigenvalue."""
    k = np.asarray(k, dtype=float)
    lead = np.pi * (36 * np.pi) ** (1 / 3) * volume ** (-2 / 3) * k ** (2 / 3)
    boundary = np.pi / 2 * (3 * np.pi**2 / 4) ** (1 / 3) * surface_area / volume ** (4 / 3) * k ** (1 / 3)
    return lead + boundary


@dataclass(frozen=True)
class SpectrumStats:
    average_gaps: np.ndarray  # delta_ave(k), k = 1..n-1
    normalized_values: np.ndarray  # y_k, k = 1..n
    normalized_gaps: np.ndarray  # delta_norm(k), k = 1..n-1
    histogram: np.ndarray
    bin_edges: np.ndarray

    def fraction_below(self, s: float) -> float:
        return float(np.mean(self.normalized_gaps < s))


def gap_stats(eigenvalues, volume: float, bins: int = 50) -> SpectrumStats:
    mu = np.sort(np.asarray(eigenvalues, dtype=float))
    if mu.size < 2:
        raise ValueError("gap statistics need at least two eigenvalues")
    k = np.arange(1, mu.size)
    average = (mu[1:] - mu[0]) / k
    y = (mu * volume ** (2 / 3) / (np.pi * (36 * np.pi) ** (1 / 3))) ** 1.5
    gaps = np.diff(y)
    hist, edges = np.histogram(gaps, bins=bins, range=(0, max(gaps.max(), 1e-12)), density=True)
    return SpectrumStats(average, y, gaps, hist, edges)


def reliable_fraction(numerical, exact, threshold: float) -> float:
    """Fraction of eigenvalues whose relative error is at most ``threshold``."""
    numerical = np.asarray(numerical, dtype=float)
    exact = np.asarray(exact, dtype=float)[: numerical.size]
    return float(np.mean(np.abs(numerical - exact) / exact <= threshold))
