"""Block three-term recurrence, its sparse left inverse, and Clenshaw.

For a degree block P^m the recurrence reads

    x_i P^m = A^i_m P^{m+1} + B^i_m P^m + C^i_m P^{m-1},   i = 1, 2, 3,

stacked over i.  Two layouts are supported: "full" (every index of degree m)
and "interior" (indices with l1 >= 2, l2 >= 1, l3 >= 1, which the
(-1,-1,-1,-1) family maps onto themselves under multiplication by x_i).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import sparse

from .koornwinder import MultiIndex, ParamVector, as_params, dimension, three_term_scalar

PIVOT_TOL = 1e-14


class SingularPivotError(ArithmeticError):
    """A pivot needed by the generalized inverse is (numerically) zero."""


def layout_indices(m: int, layout: str = "full") -> list[MultiIndex]:
    if m < 0:
        return []
    if layout == "full":
        return [MultiIndex(k, j, m - k - j) for k in range(m + 1) for j in range(m - k + 1)]
    if layout == "interior":
        return [MultiIndex(k, j, m - k - j) for k in range(2, m - 1) for j in range(1, m - k)]
    raise ValueError(f"unknown layout {layout!r}")


def layout_blocks(m: int, layout: str = "full") -> list[tuple[int, int]]:
    """(offset, size) of each l1-block of the degree-m vector."""
    blocks, offset, current = [], 0, None
    for idx in layout_indices(m, layout):
        if idx.l1 != current:
            blocks.append([offset, 0])
            current = idx.l1
        blocks[-1][1] += 1
        offset += 1
    return [tuple(b) for b in blocks]


@dataclass(frozen=True)
class RecurrenceMatrices:
    m: int
    alpha: ParamVector
    layout: str
    A: sparse.csr_matrix  # 3 r_m x r_{m+1}
    B: sparse.csr_matrix  # 3 r_m x r_m, the x-independent part
    C: sparse.csr_matrix  # 3 r_m x r_{m-1}

    @property
    def size(self) -> int:
        return self.B.shape[1]


@lru_cache(maxsize=None)
def build_recurrence(m: int, a: Sequence[float], layout: str = "full") -> RecurrenceMatrices:
    """Assemble A_m, B_m (x-free part) and C_m from the scalar coefficients."""
    if m < 0:
        raise ValueError("degree must be non-negative")
    a = as_params(a)
    rows = layout_indices(m, layout)
    n = len(rows)
    position = {
        d: {idx: j for j, idx in enumerate(layout_indices(m + d, layout))} for d in (-1, 0, 1)
    }
    entries = {d: ([], [], []) for d in (-1, 0, 1)}
    for i in range(3):
        for r, idx in enumerate(rows):
            for term in three_term_scalar(idx, a, i + 1):
                d = term.index.degree - m
                col = position[d].get(term.index)
                if col is None:
                    if abs(term.coeff) > 1e-13:
                        raise ValueError(f"x{i + 1}*J{tuple(idx)} leaves the {layout} layout")
                    continue
                rr, cc, vv = entries[d]
                rr.append(i * n + r)
                cc.append(col)
                vv.append(term.coeff)

    def assemble(d):
        rr, cc, vv = entries[d]
        return sparse.csr_matrix((vv, (rr, cc)), shape=(3 * n, len(position[d])))

    return RecurrenceMatrices(m, a, layout, assemble(1), assemble(0), assemble(-1))


def _pivot(value: float, block: int, what: str) -> float:
    if abs(value) < PIVOT_TOL:
        raise SingularPivotError(f"singular pivot in D_m construction (block {block}, {what})")
    return value


@lru_cache(maxsize=None)
def build_generalized_inverse(m: int, a: Sequence[float], layout: str = "full") -> sparse.csr_matrix:
    """Sparse D_m with D_m A_m = I, following the block-explicit construction.

    Rows of block k (but its last) come from the x3 equations, the last row of
    each block from the last x2 equation, and the final single-column block
    from the x1 equation of the last row block, corrected by x2/x3 rows of
    the two last row blocks.
    """
    rec = build_recurrence(m, as_params(a), layout)
    A = rec.A.toarray()
    n, n_next = rec.size, A.shape[1]
    row_blocks = layout_blocks(m, layout)
    col_blocks = layout_blocks(m + 1, layout)
    if len(col_blocks) != len(row_blocks) + 1:
        raise ValueError("inconsistent block layout")
    s1, s2, s3 = 0, n, 2 * n  # row offsets of the x1, x2, x3 stacks
    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    for k, ((ro, rs), (co, cs)) in enumerate(zip(row_blocks, col_blocks)):
        if cs != rs + 1:
            raise ValueError("inconsistent block sizes")
        diag = [_pivot(A[s3 + ro + t, co + t], k, "E3 diagonal") for t in range(rs)]
        for t in range(rs):
            put(co + t, s3 + ro + t, 1 / diag[t])
        last = s2 + ro + rs - 1
        beta = 1 / _pivot(A[last, co + rs], k, "E2 corner")
        put(co + rs, last, beta)
        for t in (rs - 2, rs - 1):
            if t >= 0 and A[last, co + t] != 0:
                put(co + rs, s3 + ro + t, -beta * A[last, co + t] / diag[t])

    # final single-column block
    k = len(row_blocks) - 1
    ro, rs = row_blocks[-1]
    co, _ = col_blocks[-2]
    cf = col_blocks[-1][0]
    r1, r2, r3 = s1 + ro, s2 + ro, s3 + ro
    F = _pivot(A[r1, cf], k, "F1")
    E1 = A[r1, co:co + 2]
    E2 = A[r2, co:co + 2]
    E3 = A[r3, co:co + 2]
    _pivot(E2[1], k, "E2 last")
    _pivot(E3[0], k, "E3 first")
    v1 = 1 / F
    v2 = -E1[1] / (F * E2[1])
    v3 = (E1[1] * E2[0] - E1[0] * E2[1]) / (F * E3[0] * E2[1])
    put(cf, r1, v1)
    if v2 != 0:
        put(cf, r2, v2)
    if v3 != 0:
        put(cf, r3, v3)
    if len(row_blocks) >= 2:
        ro2, _ = row_blocks[-2]
        co2, _ = col_blocks[-3]
        G = A[r1, co2:co2 + 3]
        E2b = A[s2 + ro2 + 1, co2:co2 + 3]
        E3b = [A[s3 + ro2, co2], A[s3 + ro2 + 1, co2 + 1]]
        _pivot(E2b[2], k - 1, "E2 corner")
        w2 = -G[2] / (F * E2b[2])
        w3 = [(G[2] * E2b[t] - G[t] * E2b[2]) / (F * E3b[t] * E2b[2]) for t in (0, 1)]
        if w2 != 0:
            put(cf, s2 + ro2 + 1, w2)
        for t in (0, 1):
            if w3[t] != 0:
                put(cf, s3 + ro2 + t, w3[t])

    D = sparse.coo_matrix((vals, (rows, cols)), shape=(n_next, 3 * n)).tocsr()
    D.sum_duplicates()
    return D


class OpCounter:
    """Accumulates multiply-add counts of sparse/dense products."""

    def __init__(self):
        self.count = 0

    def add(self, n: int) -> None:
        self.count += int(n)


def clenshaw_eval(
    coeffs: np.ndarray,
    a: Sequence[float],
    points: np.ndarray,
    counter: OpCounter | None = None,
) -> np.ndarray:
    """Evaluate sum_l coeffs[l] J_l^a at reference points by a backward sweep.

    ``coeffs`` is ordered by degree and then by the block order of each
    degree; its length must be d_M for some M.
    """
    a = as_params(a)
    coeffs = np.asarray(coeffs, dtype=float)
    M = 0
    while dimension(M) < coeffs.size:
        M += 1
    if dimension(M) != coeffs.size:
        raise ValueError(f"coefficient length {coeffs.size} is not a tetrahedral number")
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x = p.T  # (3, n_points)
    npts = p.shape[0]
    offsets = [dimension(m - 1) if m > 0 else 0 for m in range(M + 1)]
    F = [coeffs[offsets[m]:offsets[m] + (m + 1) * (m + 2) // 2, None] for m in range(M + 1)]
    b_next = np.zeros((0, npts))
    w_next = None  # D_{m+1}^T b^{m+2}
    for m in range(M, -1, -1):
        b = np.repeat(F[m], npts, axis=1)
        if m < M:
            rec = build_recurrence(m, a)
            D = build_generalized_inverse(m, a)
            w = D.T @ b_next
            r = rec.size
            b -= rec.B.T @ w - (x[0] * w[:r] + x[1] * w[r:2 * r] + x[2] * w[2 * r:])
            if counter is not None:
                counter.add((D.nnz + rec.B.nnz + 3 * r) * npts)
            if w_next is not None:
                C_next = build_recurrence(m + 1, a).C
                b -= C_next.T @ w_next
                if counter is not None:
                    counter.add(C_next.nnz * npts)
            w_next = w
        b_next = b
    return b_next[0]
