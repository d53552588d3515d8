"""Modal shape functions on the reference tetrahedron.

Every mode is a short combination of J_l := J_l^{-1,-1,-1,-1}.  A mode is
labelled by its class, its location (face, edge or vertex name) and the
multi-index under which the hierarchical basis lists it.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy import sparse

from .koornwinder import (
    DUBINER,
    MINUS_ONE,
    MultiIndex,
    derivative_expansion,
    derivative_matrix,
    dimension,
    dubiner_matrix,
    index_map,
    tabulate,
    to_dubiner,
)

EDGES = ("01", "02", "03", "13", "12", "23")


class ModeId(NamedTuple):
    kind: str  # "interior", "face", "edge" or "vertex"
    where: str  # face/vertex number or edge name; "" for interior
    index: MultiIndex

    @property
    def degree(self) -> int:
        return self.index.degree


def interior_modes(M: int) -> list[ModeId]:
    """Interior modes ordered by l1, then l2, then l3."""
    return [
        ModeId("interior", "", MultiIndex(l1, l2, l3))
        for l1 in range(2, M - 1)
        for l2 in range(1, M - l1)
        for l3 in range(1, M - l1 - l2 + 1)
    ]


def graded_interior_modes(M: int) -> list[ModeId]:
    """Interior modes ordered by total degree, then l1, then l2."""
    return [
        ModeId("interior", "", MultiIndex(k, j, m - k - j))
        for m in range(4, M + 1)
        for k in range(2, m - 1)
        for j in range(1, m - k)
    ]


def _face_modes(M: int) -> list[ModeId]:
    out = []
    pairs = [(a, b) for a in range(1, M) for b in range(1, M - a + 1)]
    out += [ModeId("face", "0", MultiIndex(1, a, b)) for a, b in pairs if 1 + a + b <= M]
    out += [ModeId("face", "1", MultiIndex(0, a + 1, b)) for a, b in pairs if 1 + a + b <= M]
    out += [ModeId("face", "2", MultiIndex(a + 1, 0, b)) for a, b in pairs if 1 + a + b <= M]
    out += [ModeId("face", "3", MultiIndex(a + 1, b, 0)) for a, b in pairs if 1 + a + b <= M]
    return out


def _edge_modes(M: int) -> list[ModeId]:
    labels = {
        "01": lambda n: (n, 0, 0),
        "02": lambda n: (0, n, 0),
        "03": lambda n: (0, 0, n),
        "13": lambda n: (1, 0, n - 1),
        "12": lambda n: (1, n - 1, 0),
        "23": lambda n: (0, 1, n - 1),
    }
    return [ModeId("edge", e, MultiIndex(*labels[e](n))) for e in EDGES for n in range(2, M + 1)]


VERTEX_MODES = [
    ModeId("vertex", "0", MultiIndex(0, 0, 0)),
    ModeId("vertex", "1", MultiIndex(1, 0, 0)),
    ModeId("vertex", "2", MultiIndex(0, 1, 0)),
    ModeId("vertex", "3", MultiIndex(0, 0, 1)),
]


def boundary_modes(M: int) -> list[ModeId]:
    return _face_modes(M) + _edge_modes(M) + (VERTEX_MODES if M >= 1 else VERTEX_MODES[:1])


def enumerate_modes(M: int) -> list[ModeId]:
    """All d_M modes: interior, faces 0..3, edges, vertices 0..3."""
    if M < 1:
        raise ValueError("degree must be at least 1")
    return interior_modes(M) + boundary_modes(M)


@lru_cache(maxsize=None)
def shape_expansion(mode: ModeId) -> dict[MultiIndex, float]:
    """Coefficients of the mode in the (-1,-1,-1,-1) family."""
    l1, l2, l3 = mode.index
    J = MultiIndex
    if mode.kind == "interior":
        return {mode.index: 1.0}
    if mode.kind == "face":
        if mode.where in "01":
            n = l2 + 1 if mode.where == "0" else l2
            sign = -1.0 if mode.where == "0" else 1.0
            return {J(0, n, l3): 1.0, J(1, n - 1, l3): sign * (n - 1) / n}
        return {mode.index: 1.0}
    if mode.kind == "edge":
        e = mode.where
        if e == "01":
            return {mode.index: 1.0}
        if e in ("02", "12"):
            n = l2 + l1
            sign = 1.0 if e == "02" else -1.0
            return {J(0, n, 0): 1.0, J(1, n - 1, 0): sign * (n - 1) / n}
        n = mode.degree
        if e in ("03", "13"):
            sign = 1.0 if e == "03" else -1.0
            return {
                J(0, 0, n): 0.5,
                J(0, 1, n - 1): (n - 1) / (2 * n),
                J(1, 0, n - 1): sign * (n - 1) / n,
            }
        return {J(0, 0, n): 1.0, J(0, 1, n - 1): -(n - 1) / n}
    if mode.kind == "vertex":
        j = int(mode.where)
        table = [
            (1 / 8, -1 / 2, -1 / 4, -1 / 8),
            (1 / 8, 1 / 2, -1 / 4, -1 / 8),
            (1 / 4, 0.0, 1 / 2, -1 / 4),
            (1 / 2, 0.0, 0.0, 1 / 2),
        ][j]
        keys = (J(0, 0, 0), J(1, 0, 0), J(0, 1, 0), J(0, 0, 1))
        return {k: c for k, c in zip(keys, table) if c != 0}
    raise ValueError(f"unknown mode kind {mode.kind!r}")


def dubiner_expansion(mode: ModeId) -> dict[MultiIndex, float]:
    """The mode expanded in the L2-orthogonal (0,0,0,0) family."""
    return to_dubiner(dict(shape_expansion(mode)), MINUS_ONE)


def gradient_dubiner(mode: ModeId, which: str) -> dict[MultiIndex, float]:
    """A first derivative of the mode in the (0,0,0,0) family."""
    out: dict[MultiIndex, float] = {}
    family = None
    for idx, coeff in shape_expansion(mode).items():
        family, terms = derivative_expansion(idx, MINUS_ONE, which)
        for t in terms:
            out[t.index] = out.get(t.index, 0.0) + coeff * t.coeff
    if family is None:
        return {}
    return to_dubiner(out, family)


def shape_matrix(modes: Sequence[ModeId], M: int) -> sparse.csr_matrix:
    """Columns are mode coefficients in the -1 family (all degrees <= M)."""
    lookup = index_map(M)
    rows, cols, vals = [], [], []
    for col, mode in enumerate(modes):
        for idx, c in shape_expansion(mode).items():
            rows.append(lookup[idx])
            cols.append(col)
            vals.append(c)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(dimension(M), len(modes)))


def dubiner_shape_matrix(modes: Sequence[ModeId], M: int) -> sparse.csr_matrix:
    return (dubiner_matrix(M, MINUS_ONE) @ shape_matrix(modes, M)).tocsr()


def gradient_matrix(modes: Sequence[ModeId], M: int, which: str) -> sparse.csr_matrix:
    """Columns are Dubiner coefficients of one derivative of each mode."""
    family, D = derivative_matrix(M, MINUS_ONE, which)
    return (dubiner_matrix(M, family) @ D @ shape_matrix(modes, M)).tocsr()


def evaluate_modes(modes: Sequence[ModeId], points: np.ndarray) -> np.ndarray:
    """Mode values at reference points, shape (len(modes), n_points)."""
    if not modes:
        return np.zeros((0, np.atleast_2d(points).shape[0]))
    needed = {i for m in modes for i in shape_expansion(m)}
    lookup = index_map(max(i.degree for i in needed))
    needed = sorted(needed, key=lookup.get)
    values = dict(zip(needed, tabulate(needed, MINUS_ONE, points)))
    return np.array([sum(c * values[i] for i, c in shape_expansion(m).items()) for m in modes])
