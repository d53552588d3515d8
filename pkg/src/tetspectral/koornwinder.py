"""Generalized Koornwinder polynomials on the reference tetrahedron.

Polynomials are indexed by a multi-index l = (l1, l2, l3) and a parameter
vector a = (a0, a1, a2, a3) with every a_j >= -1.  Besides evaluation this
module provides the exact finite expansions used everywhere else: raising a
single parameter, the six first-order derivatives, and multiplication by a
reference coordinate.  Each expansion is a list of ``ExpansionTerm`` whose
``index`` is the target multi-index.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy import sparse

from .jacobi import (
    demotion_coeffs,
    derivative_coeff,
    jacobi_homogeneous_table,
    jacobi_norm,
    promotion_coeffs,
    three_term_coeffs,
)

DROP_TOL = 1e-15


class MultiIndex(NamedTuple):
    l1: int
    l2: int
    l3: int

    @property
    def degree(self) -> int:
        return self.l1 + self.l2 + self.l3


class ParamVector(NamedTuple):
    a0: float
    a1: float
    a2: float
    a3: float

    def raised(self, *increments: int) -> "ParamVector":
        return ParamVector(*(a + d for a, d in zip(self, increments)))


class ExpansionTerm(NamedTuple):
    index: MultiIndex
    coeff: float


class VanishingDenominatorError(ArithmeticError):
    """A closed-form expansion coefficient would divide by zero."""


MINUS_ONE = ParamVector(-1.0, -1.0, -1.0, -1.0)
DUBINER = ParamVector(0.0, 0.0, 0.0, 0.0)

DERIVATIVES = ("d1", "d2", "d2-d1", "d3", "d1-d3", "d3-d2")
_DERIVATIVE_SHIFT = {
    "d1": (1, 1, 0, 0),
    "d2": (1, 0, 1, 0),
    "d2-d1": (0, 1, 1, 0),
    "d3": (1, 0, 0, 1),
    "d1-d3": (0, 1, 0, 1),
    "d3-d2": (0, 0, 1, 1),
}


def as_params(a: Sequence[float]) -> ParamVector:
    a = ParamVector(*(float(x) for x in a))
    if any(x < -1 for x in a):
        raise ValueError(f"parameters must be >= -1, got {tuple(a)}")
    return a


def chi(x: float) -> int:
    return max(math.floor(-x), 0)


# ---------------------------------------------------------------- indexing


def block_size(m: int) -> int:
    """Length r_m of the degree-m block."""
    return (m + 1) * (m + 2) // 2 if m >= 0 else 0


def dimension(M: int) -> int:
    """Number d_M of polynomials of total degree <= M."""
    return (M + 1) * (M + 2) * (M + 3) // 6


def degree_indices(m: int) -> list[MultiIndex]:
    """Degree-m indices ordered by l1, then l2 ascending (l3 descending)."""
    return [MultiIndex(k, j, m - k - j) for k in range(m + 1) for j in range(m - k + 1)]


@lru_cache(maxsize=None)
def all_indices(M: int) -> tuple[MultiIndex, ...]:
    return tuple(idx for m in range(M + 1) for idx in degree_indices(m))


@lru_cache(maxsize=None)
def index_map(M: int) -> dict[MultiIndex, int]:
    return {idx: n for n, idx in enumerate(all_indices(M))}


# ------------------------------------------------------- coordinate maps


def collapse(points: np.ndarray) -> np.ndarray:
    """Map reference points to (xi, eta, zeta) in the cube [-1, 1]^3."""
    p = np.asarray(points, dtype=float)
    x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
    v1, v2 = 1 - x2 - x3, 1 - x3
    if np.any(np.isclose(v1, 0.0, atol=1e-15)) or np.any(np.isclose(v2, 0.0, atol=1e-15)):
        raise ValueError("collapsed singularity: point lies on x2 + x3 = 1 or x3 = 1")
    return np.stack([2 * x1 / v1 - 1, 2 * x2 / v2 - 1, 2 * x3 - 1], axis=-1)


def expand(points: np.ndarray) -> np.ndarray:
    """Inverse of ``collapse``."""
    c = np.asarray(points, dtype=float)
    xi, eta, zeta = c[..., 0], c[..., 1], c[..., 2]
    x1 = (1 + xi) * (1 - eta) * (1 - zeta) / 8
    x2 = (1 + eta) * (1 - zeta) / 4
    x3 = (1 + zeta) / 2
    return np.stack([x1, x2, x3], axis=-1)


# -------------------------------------------------------------- evaluation


def _family_params(l1: int, l2: int, a: ParamVector) -> tuple[float, float]:
    """First parameters of the eta and zeta Jacobi factors."""
    s1 = a.a0 + a.a1
    return 2 * l1 + s1 + 1, 2 * (l1 + l2) + s1 + a.a2 + 2


def tabulate(indices: Iterable[Sequence[int]], a: Sequence[float], points: np.ndarray) -> np.ndarray:
    """Values of the listed polynomials, shape (len(indices), n_points).

    Uses the homogenized recurrences, so the singular lines of the collapsed
    map need no special treatment.
    """
    a = as_params(a)
    indices = [MultiIndex(*map(int, idx)) for idx in indices]
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x1, x2, x3 = p[:, 0], p[:, 1], p[:, 2]
    v1, v2 = 1 - x2 - x3, 1 - x3
    u1, u2, z = 2 * x1 - v1, 2 * x2 - v2, 2 * x3 - 1
    out = np.empty((len(indices), p.shape[0]))
    if not indices:
        return out
    first = jacobi_homogeneous_table(max(i.l1 for i in indices), a.a0, a.a1, u1, v1)
    second: dict[int, np.ndarray] = {}
    third: dict[tuple[int, int], np.ndarray] = {}
    top2: dict[int, int] = {}
    top3: dict[tuple[int, int], int] = {}
    for i in indices:
        top2[i.l1] = max(top2.get(i.l1, 0), i.l2)
        top3[i.l1, i.l2] = max(top3.get((i.l1, i.l2), 0), i.l3)
    for l1, n in top2.items():
        second[l1] = jacobi_homogeneous_table(n, _family_params(l1, 0, a)[0], a.a2, u2, v2)
    for (l1, l2), n in top3.items():
        third[l1, l2] = jacobi_homogeneous_table(n, _family_params(l1, l2, a)[1], a.a3, z)
    for row, i in enumerate(indices):
        out[row] = first[i.l1] * second[i.l1][i.l2] * third[i.l1, i.l2][i.l3]
    return out


def moments(indices: Iterable[Sequence[int]], a: Sequence[float], points: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Sums sum_p f(p) J_l(p) for each listed index without tabulating every row."""
    a = as_params(a)
    indices = [MultiIndex(*map(int, idx)) for idx in indices]
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x1, x2, x3 = p[:, 0], p[:, 1], p[:, 2]
    v1, v2 = 1 - x2 - x3, 1 - x3
    u1, u2, z = 2 * x1 - v1, 2 * x2 - v2, 2 * x3 - 1
    out = np.zeros(len(indices))
    if not indices:
        return out
    groups: dict[tuple[int, int], list[int]] = {}
    for row, i in enumerate(indices):
        groups.setdefault((i.l1, i.l2), []).append(row)
    first = jacobi_homogeneous_table(max(i.l1 for i in indices), a.a0, a.a1, u1, v1)
    second: dict[int, np.ndarray] = {}
    for (l1, l2), rows in groups.items():
        if l1 not in second:
            n2 = max(j for (k, j) in groups if k == l1)
            second[l1] = jacobi_homogeneous_table(n2, _family_params(l1, 0, a)[0], a.a2, u2, v2)
        n3 = max(indices[r].l3 for r in rows)
        third = jacobi_homogeneous_table(n3, _family_params(l1, l2, a)[1], a.a3, z)
        sums = third @ (f * first[l1] * second[l1][l2])
        out[rows] = sums[[indices[r].l3 for r in rows]]
    return out


def koornwinder_eval(l: Sequence[int], a: Sequence[float], points: np.ndarray):
    """Value of one polynomial at one point or an array of points."""
    if min(l) < 0:
        raise ValueError(f"multi-index must be non-negative, got {tuple(l)}")
    p = np.asarray(points, dtype=float)
    values = tabulate([l], a, p.reshape(-1, 3))[0]
    return float(values[0]) if p.ndim == 1 else values.reshape(p.shape[:-1])


def _homogeneous_with_gradient(n, alpha, beta, u, v, du, dv):
    """Values and gradients of v^k J_k(u/v) for affine u, v."""
    vals = np.zeros((n + 1,) + u.shape)
    grads = np.zeros((n + 1,) + u.shape + (3,))
    vals[0] = 1.0
    for k in range(n):
        a1, a2, a3 = three_term_coeffs(k, alpha, beta)
        w = u - a2 * v
        dw = du - a2 * dv
        prev = vals[k - 1] if k > 0 else np.zeros_like(u)
        dprev = grads[k - 1] if k > 0 else np.zeros_like(grads[0])
        vals[k + 1] = (w * vals[k] - a3 * v * v * prev) / a1
        grads[k + 1] = (
            dw * vals[k][..., None]
            + w[..., None] * grads[k]
            - a3 * (2 * v[..., None] * dv * prev[..., None] + (v * v)[..., None] * dprev)
        ) / a1
    return vals, grads


def tabulate_gradient(indices: Iterable[Sequence[int]], a: Sequence[float], points: np.ndarray) -> np.ndarray:
    """Gradients of the listed polynomials, shape (len(indices), n_points, 3).

    Forward-mode differentiation of the homogenized recurrences; independent
    of the closed-form derivative expansions.
    """
    a = as_params(a)
    indices = [MultiIndex(*map(int, idx)) for idx in indices]
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x1, x2, x3 = p[:, 0], p[:, 1], p[:, 2]
    v1, v2 = 1 - x2 - x3, 1 - x3
    u1, u2, z = 2 * x1 - v1, 2 * x2 - v2, 2 * x3 - 1
    one = np.ones_like(x1)
    dv1, du1 = np.array([0.0, -1, -1]), np.array([2.0, 1, 1])
    dv2, du2 = np.array([0.0, 0, -1]), np.array([0.0, 2, 1])
    dz, dzero = np.array([0.0, 0, 2]), np.zeros(3)
    out = np.empty((len(indices), p.shape[0], 3))
    n1 = max((i.l1 for i in indices), default=0)
    f1, g1 = _homogeneous_with_gradient(n1, a.a0, a.a1, u1, v1, du1, dv1)
    cache2, cache3 = {}, {}
    for row, i in enumerate(indices):
        if i.l1 not in cache2:
            n2 = max(j.l2 for j in indices if j.l1 == i.l1)
            cache2[i.l1] = _homogeneous_with_gradient(
                n2, _family_params(i.l1, 0, a)[0], a.a2, u2, v2, du2, dv2
            )
        key = (i.l1, i.l2)
        if key not in cache3:
            n3 = max(j.l3 for j in indices if (j.l1, j.l2) == key)
            cache3[key] = _homogeneous_with_gradient(
                n3, _family_params(i.l1, i.l2, a)[1], a.a3, z, one, dz, dzero
            )
        f2, g2 = cache2[i.l1]
        f3, g3 = cache3[key]
        A, B, C = f1[i.l1], f2[i.l2], f3[i.l3]
        out[row] = (
            g1[i.l1] * (B * C)[:, None]
            + g2[i.l2] * (A * C)[:, None]
            + g3[i.l3] * (A * B)[:, None]
        )
    return out


def weight(a: Sequence[float], points: np.ndarray) -> np.ndarray:
    """The tetrahedral Jacobi weight (1-x1-x2-x3)^a0 x1^a1 x2^a2 x3^a3."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x0 = 1 - p.sum(axis=1)
    return x0 ** a[0] * p[:, 0] ** a[1] * p[:, 1] ** a[2] * p[:, 2] ** a[3]


def ortho_norm(l: Sequence[int], a: Sequence[float]) -> float:
    """Weighted square norm gamma_l^a of one polynomial."""
    l = MultiIndex(*l)
    a = as_params(a)
    if l.l1 < chi(a.a0) + chi(a.a1) or l.l2 < chi(a.a2) or l.l3 < chi(a.a3):
        raise ValueError(f"index {tuple(l)} lies outside the orthogonality window for {tuple(a)}")
    p1, p2 = _family_params(l.l1, l.l2, a)
    return (
        jacobi_norm(l.l1, a.a0, a.a1)
        * jacobi_norm(l.l2, p1, a.a2)
        * jacobi_norm(l.l3, p2, a.a3)
    )


# ---------------------------------------------------------------- expansions


def _b(k, x, y):
    return promotion_coeffs(k, x, y)[:2]


def _c(k, x, y):
    return promotion_coeffs(k, x, y)[2:]


def _e(k, x, y):
    return demotion_coeffs(k, x, y)[:2]


def _g(k, x, y):
    return demotion_coeffs(k, x, y)[2:]


def _collect(raw: Iterable[tuple[tuple[int, int, int], Callable[[], float]]]) -> list[ExpansionTerm]:
    """Evaluate lazily supplied coefficients for valid targets and merge."""
    merged: dict[MultiIndex, float] = {}
    for target, coeff in raw:
        if min(target) < 0:
            continue
        target = MultiIndex(*target)
        merged[target] = merged.get(target, 0.0) + coeff()
    return [ExpansionTerm(i, c) for i, c in merged.items() if abs(c) >= DROP_TOL]


def _divide(num: float, den: float, what: str) -> float:
    if den == 0:
        raise VanishingDenominatorError(f"coefficient denominator vanishes ({what})")
    return num / den


def promote_param(l: Sequence[int], a: Sequence[float], which: int) -> list[ExpansionTerm]:
    """Expand J_l^a in the family whose parameter ``which`` is one larger."""
    l1, l2, l3 = l
    a0, a1, a2, a3 = a
    p1, p2 = _family_params(l1, l2, ParamVector(*a))

    def zeta_part(q, r):
        if q == 0:
            return _b(l3, p2, a3)[r]
        return _e(l3, p2 - 1, a3)[1 - r]

    def eta_part(p, q):
        if p == 0:
            return _b(l2, p1, a2)[q]
        return _e(l2, p1 - 1, a2)[1 - q]

    raw = []
    if which in (0, 1):
        if which == 0:
            xi = _b(l1, a0, a1)
        else:
            b1, _ = _b(l1, a0, a1)
            xi = (b1, -_b(l1, a1, a0)[1])
        for p in (0, 1):
            for q in (0, 1):
                for r in (0, 1):
                    raw.append(
                        ((l1 - p, l2 - q + p, l3 - r + q),
                         lambda p=p, q=q, r=r: xi[p] * eta_part(p, q) * zeta_part(q, r))
                    )
    elif which == 2:
        eta = (_b(l2, p1, a2)[0], -_b(l2, a2, p1)[1])
        for q in (0, 1):
            for r in (0, 1):
                raw.append(((l1, l2 - q, l3 - r + q), lambda q=q, r=r: eta[q] * zeta_part(q, r)))
    elif which == 3:
        zeta = (_b(l3, p2, a3)[0], -_b(l3, a3, p2)[1])
        for r in (0, 1):
            raw.append(((l1, l2, l3 - r), lambda r=r: zeta[r]))
    else:
        raise ValueError(f"parameter slot must be 0..3, got {which}")
    return _collect(raw)


def derivative_expansion(
    l: Sequence[int], a: Sequence[float], which: str
) -> tuple[ParamVector, list[ExpansionTerm]]:
    """Expand a first derivative of J_l^a; returns (target family, terms).

    ``which`` is one of "d1", "d2", "d2-d1", "d3", "d1-d3", "d3-d2".
    """
    if which not in _DERIVATIVE_SHIFT:
        raise ValueError(f"unknown derivative {which!r}")
    l1, l2, l3 = l
    a = ParamVector(*a)
    a0, a1, a2, a3 = a
    target = a.raised(*_DERIVATIVE_SHIFT[which])
    p1, p2 = _family_params(l1, l2, a)
    d = derivative_coeff

    def rho():
        return 2 * d(l1, a0, a1) * _e(l1 - 1, a1, a0 + 1)[0] - l1 * _b(l1, a0, a1)[1]

    def kappa():
        return l1 * _b(l1, a1, a0)[1] - 2 * d(l1, a0, a1) * _e(l1 - 1, a0, a1 + 1)[0]

    def theta():
        return 2 * d(l2, p1, a2) * _e(l2 - 1, a2, p1 + 1)[0] - l2 * _b(l2, p1, a2)[1]

    def eta_d0():
        return 2 * d(l2, p1, a2) * _b(l1, a0, a1)[0]

    def eta_d1(lead, b2_l1):
        num = lead * _b(l2, p1, a2)[0] + 2 * d(l2, p1, a2) * b2_l1 * _e(l2 - 1, p1, a2 + 1)[1]
        return _divide(num, _b(l2, p1 - 1, a2 + 1)[0], f"{which} at {tuple(l)}")

    def zeta_00():
        return 2 * d(l3, p2, a3) * _b(l1, a0, a1)[0] * _b(l2, p1, a2)[0]

    def zeta_01():
        b1_l1 = _b(l1, a0, a1)[0]
        num = b1_l1 * theta() * _b(l3, p2, a3)[0] + 2 * d(l3, p2, a3) * b1_l1 * _b(
            l2, p1, a2
        )[1] * _e(l3 - 1, p2, a3 + 1)[1]
        return _divide(num, _b(l3, p2 - 1, a3 + 1)[0], f"{which} at {tuple(l)}")

    def zeta_11(lead, b2_l1):
        num = (lead + b2_l1 * _e(l2 - 1, p1, a2)[1] * theta()) * _b(l3, p2, a3)[0] + 2 * _b(
            l2, p1 - 1, a2
        )[0] * d(l3, p2, a3) * b2_l1 * _e(l2, p1 - 1, a2)[0] * _e(l3 - 1, p2, a3 + 1)[1]
        den = _b(l2, p1 - 1, a2)[0] * _b(l3, p2 - 1, a3 + 1)[0]
        return _divide(num, den, f"{which} at {tuple(l)}")

    if which == "d1":
        raw = [((l1 - 1, l2, l3), lambda: 2 * d(l1, a0, a1))]
    elif which == "d2":
        raw = [
            ((l1, l2 - 1, l3), eta_d0),
            ((l1 - 1, l2, l3), lambda: eta_d1(rho(), _b(l1, a0, a1)[1])),
        ]
    elif which == "d2-d1":
        raw = [
            ((l1, l2 - 1, l3), eta_d0),
            ((l1 - 1, l2, l3), lambda: eta_d1(kappa(), -_b(l1, a1, a0)[1])),
        ]
    elif which == "d3":
        b2_l1 = _b(l1, a0, a1)[1]
        raw = [
            ((l1, l2, l3 - 1), zeta_00),
            ((l1, l2 - 1, l3), zeta_01),
            ((l1 - 1, l2 + 1, l3 - 1),
             lambda: 2 * d(l3, p2, a3) * b2_l1 * _e(l2, p1 - 1, a2)[1]),
            ((l1 - 1, l2, l3), lambda: zeta_11(rho(), b2_l1)),
        ]
    elif which == "d1-d3":
        b2_l1 = _b(l1, a1, a0)[1]
        raw = [
            ((l1, l2, l3 - 1), lambda: -zeta_00()),
            ((l1, l2 - 1, l3), lambda: -zeta_01()),
            ((l1 - 1, l2 + 1, l3 - 1),
             lambda: 2 * d(l3, p2, a3) * b2_l1 * _e(l2, p1 - 1, a2)[1]),
            ((l1 - 1, l2, l3), lambda: zeta_11(-kappa(), b2_l1)),
        ]
    else:
        def d32_1():
            b2_swap = _b(l2, a2, p1)[1]
            num = (
                l2 * b2_swap - 2 * d(l2, p1, a2) * _e(l2 - 1, p1, a2 + 1)[0]
            ) * _b(l3, p2, a3)[0] - 2 * d(l3, p2, a3) * b2_swap * _e(l3 - 1, p2, a3 + 1)[1]
            return _divide(num, _b(l3, p2 - 1, a3 + 1)[0], f"{which} at {tuple(l)}")

        raw = [
            ((l1, l2, l3 - 1), lambda: 2 * d(l3, p2, a3) * _b(l2, p1, a2)[0]),
            ((l1, l2 - 1, l3), d32_1),
        ]
    return target, _collect(raw)


def three_term_scalar(l: Sequence[int], a: Sequence[float], direction: int) -> list[ExpansionTerm]:
    """Expand x_direction * J_l^a in the same family (degrees |l|-1..|l|+1)."""
    l1, l2, l3 = l
    a = ParamVector(*a)
    a0, a1, a2, a3 = a
    p1, p2 = _family_params(l1, l2, a)

    def tau(q, r):
        # zeta factor after the eta stage changed the power by q
        if q == -1:
            return _c(l3, p2, a3)[r + 1] / 2
        if q == 0:
            s1, s2, s3 = three_term_coeffs(l3, p2, a3)
            return (-s1 / 2, (1 - s2) / 2, -s3 / 2)[r + 1]
        return _g(l3, p2 - 2, a3)[r + 1] / 2

    raw = []
    if direction == 3:
        s1, s2, s3 = three_term_coeffs(l3, p2, a3)
        for r, c in zip((-1, 0, 1), (s1 / 2, (1 + s2) / 2, s3 / 2)):
            raw.append(((l1, l2, l3 + r * -1), lambda c=c: c))
    elif direction == 2:
        t1, t2, t3 = three_term_coeffs(l2, p1, a2)
        eta = {-1: t1, 0: (1 + t2) / 2, 1: t3}
        for q in (-1, 0, 1):
            for r in (-1, 0, 1):
                raw.append(((l1, l2 - q, l3 - r + q), lambda q=q, r=r: eta[q] * tau(q, r)))
    elif direction == 1:
        s1, s2, s3 = three_term_coeffs(l1, a0, a1)

        def eta(p, q):
            half = 0.5 if q == 0 else 1.0
            if p == -1:
                return s1 * _c(l2, p1, a2)[q + 1] * half
            if p == 1:
                return s3 * _g(l2, p1 - 2, a2)[q + 1] * half
            t1, t2, t3 = three_term_coeffs(l2, p1, a2)
            return (1 + s2) * (-t1 / 2, (1 - t2) / 4, -t3 / 2)[q + 1]

        for p in (-1, 0, 1):
            for q in (-1, 0, 1):
                for r in (-1, 0, 1):
                    raw.append(
                        ((l1 - p, l2 - q + p, l3 - r + q), lambda p=p, q=q, r=r: eta(p, q) * tau(q, r))
                    )
    else:
        raise ValueError(f"direction must be 1, 2 or 3, got {direction}")
    return _collect(raw)


# --------------------------------------------------- expansion composition

Expansion = dict  # MultiIndex -> coefficient


def promote_expansion(expansion: Expansion, a: Sequence[float], which: int) -> Expansion:
    out: Expansion = {}
    for idx, coeff in expansion.items():
        for term in promote_param(idx, a, which):
            out[term.index] = out.get(term.index, 0.0) + coeff * term.coeff
    return {i: c for i, c in out.items() if abs(c) >= DROP_TOL}


def to_dubiner(expansion: Expansion, a: Sequence[float]) -> Expansion:
    """Raise every parameter equal to -1 up to zero."""
    a = ParamVector(*a)
    for slot in range(4):
        if a[slot] == -1:
            expansion = promote_expansion(expansion, a, slot)
            a = a.raised(*(1 if j == slot else 0 for j in range(4)))
        elif a[slot] != 0:
            raise ValueError(f"cannot raise parameter {a[slot]} to zero")
    return expansion


def raise_all_params(l: Sequence[int]) -> Expansion:
    """Expansion of J_l^{-1,-1,-1,-1} in the L2-orthogonal family."""
    return to_dubiner({MultiIndex(*l): 1.0}, MINUS_ONE)


# ------------------------------------------------------- sparse operators


def _operator_matrix(M: int, terms_of: Callable[[MultiIndex], list[ExpansionTerm]]) -> sparse.csr_matrix:
    lookup = index_map(M)
    rows, cols, vals = [], [], []
    for col, idx in enumerate(all_indices(M)):
        for term in terms_of(idx):
            rows.append(lookup[term.index])
            cols.append(col)
            vals.append(term.coeff)
    n = dimension(M)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


@lru_cache(maxsize=None)
def promotion_matrix(M: int, a: ParamVector, which: int) -> sparse.csr_matrix:
    """Coefficient map from family a to a + e_which, all degrees <= M."""
    return _operator_matrix(M, lambda idx: promote_param(idx, a, which))


@lru_cache(maxsize=None)
def dubiner_matrix(M: int, a: ParamVector) -> sparse.csr_matrix:
    """Coefficient map from family a (entries -1 or 0) to the Dubiner family."""
    out = sparse.identity(dimension(M), format="csr")
    for slot in range(4):
        if a[slot] == -1:
            out = promotion_matrix(M, a, slot) @ out
            a = a.raised(*(1 if j == slot else 0 for j in range(4)))
    return out.tocsr()


@lru_cache(maxsize=None)
def derivative_matrix(M: int, a: ParamVector, which: str) -> tuple[ParamVector, sparse.csr_matrix]:
    target = a.raised(*_DERIVATIVE_SHIFT[which])
    return target, _operator_matrix(M, lambda idx: derivative_expansion(idx, a, which)[1])
