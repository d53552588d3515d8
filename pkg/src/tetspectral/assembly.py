"""Stiffness, mass and load assembly for the modal basis on one tetrahedron.

Exact paths pair Dubiner expansions through the orthogonality norms; the
variable-coefficient mass matrix uses the block recursion driven by the
three-term recurrence of the interior modes, seeded by quadrature.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, sparse

from .geometry import Tetrahedron
from .koornwinder import DUBINER, MINUS_ONE, MultiIndex, all_indices, moments, ortho_norm, tabulate
from .modes import (
    ModeId,
    boundary_modes,
    dubiner_shape_matrix,
    evaluate_modes,
    gradient_matrix,
    graded_interior_modes,
    interior_modes,
)
from .quadrature import tet_rule, triangle_rule
from .recurrence import OpCounter, build_generalized_inverse, build_recurrence, layout_indices

DROP_TOL = 1e-15
Field = Callable[[np.ndarray], np.ndarray]

_REF_VERTICES = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])


@lru_cache(maxsize=None)
def dubiner_norms(M: int) -> np.ndarray:
    return np.array([ortho_norm(idx, DUBINER) for idx in all_indices(M)])


def _clean(A: sparse.spmatrix) -> sparse.csr_matrix:
    """Exactly symmetric CSR copy with negligible entries removed."""
    A = sparse.csr_matrix(A)
    A = ((A + A.T) * 0.5).tocsr()
    if A.nnz:
        scale = np.abs(A.data).max()
        A.data[np.abs(A.data) <= DROP_TOL * scale] = 0.0
        A.eliminate_zeros()
    return A


def _pairing(E: sparse.csr_matrix, norms: np.ndarray) -> sparse.csr_matrix:
    return (E.T @ sparse.diags(norms) @ E).tocsr()


def assemble_stiffness(tet: Tetrahedron, M: int, modes: Sequence[ModeId] | None = None) -> sparse.csr_matrix:
    """Exact stiffness matrix (grad u, grad v) over ``tet``.

    Defaults to the interior modes in l1-major order.
    """
    modes = interior_modes(M) if modes is None else list(modes)
    norms = dubiner_norms(M)
    diag, cross = tet.stiffness_weights()
    S = sparse.csr_matrix((len(modes), len(modes)))
    for j, which in enumerate(("d1", "d2", "d3")):
        S = S + diag[j] * _pairing(gradient_matrix(modes, M, which), norms)
    for (j, k), which in zip(((0, 1), (0, 2), (1, 2)), ("d2-d1", "d1-d3", "d3-d2")):
        S = S + cross[j, k] * _pairing(gradient_matrix(modes, M, which), norms)
    return _clean(S)


def assemble_mass_const(
    tet: Tetrahedron, M: int, gamma: float = 1.0, modes: Sequence[ModeId] | None = None
) -> sparse.csr_matrix:
    """Exact mass matrix (gamma u, v) for a constant coefficient."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    modes = interior_modes(M) if modes is None else list(modes)
    if gamma == 0:
        return sparse.csr_matrix((len(modes), len(modes)))
    E = dubiner_shape_matrix(modes, M)
    return _clean(6 * tet.volume * gamma * _pairing(E, dubiner_norms(M)))


def assemble_mass_quadrature(
    tet: Tetrahedron,
    M: int,
    gamma: Field,
    Q: int | None = None,
    modes: Sequence[ModeId] | None = None,
) -> sparse.csr_matrix:
    """Mass matrix (gamma u, v) by tensor Gauss-Jacobi quadrature."""
    modes = interior_modes(M) if modes is None else list(modes)
    rule = tet_rule(Q or M + 4)
    V = evaluate_modes(modes, rule.nodes)
    w = 6 * tet.volume * rule.weights * np.asarray(gamma(tet.affine_map(rule.nodes)))
    return _clean(sparse.csr_matrix((V * w) @ V.T))


def assemble_load(
    tet: Tetrahedron, M: int, f: Field, Q: int | None = None, modes: Sequence[ModeId] | None = None
) -> np.ndarray:
    """Load vector (f, phi) for each mode."""
    modes = interior_modes(M) if modes is None else list(modes)
    rule = tet_rule(Q or M + 2)
    V = evaluate_modes(modes, rule.nodes)
    return V @ (6 * tet.volume * rule.weights * np.asarray(f(tet.affine_map(rule.nodes))))


def boundary_rule(tet: Tetrahedron, Q: int) -> tuple[np.ndarray, np.ndarray]:
    """Reference points and physical surface weights covering all four faces."""
    st, w = triangle_rule(Q)
    points, weights = [], []
    for j in range(4):
        a, b, c = [v for v in range(4) if v != j]
        R = _REF_VERTICES
        points.append(R[a] + st[:, :1] * (R[b] - R[a]) + st[:, 1:] * (R[c] - R[a]))
        weights.append(2 * tet.face_areas[j] * w)
    return np.vstack(points), np.concatenate(weights)


def assemble_boundary(tet: Tetrahedron, M: int, g: Field, Q: int | None = None) -> np.ndarray:
    """Coefficients of the L2(boundary) projection of g onto the boundary modes."""
    modes = boundary_modes(M)
    points, weights = boundary_rule(tet, Q or M + 2)
    V = evaluate_modes(modes, points)
    gram = (V * weights) @ V.T
    rhs = V @ (weights * np.asarray(g(tet.affine_map(points))))
    return linalg.solve(gram, rhs, assume_a="pos")


# ----------------------------------------------------- variable coefficients


def _graded_to_lex(M: int) -> np.ndarray:
    """Permutation p with lex_matrix = graded_matrix[p][:, p]."""
    graded = {m.index: n for n, m in enumerate(graded_interior_modes(M))}
    return np.array([graded[m.index] for m in interior_modes(M)], dtype=int)


def _step_cost(R, D, Rk) -> int:
    """Multiply-adds for one block H_{m+1,k} given the operators of degrees m and k."""
    return R.size * (Rk.C.nnz + Rk.B.nnz + Rk.A.nnz) + Rk.size * (R.B.nnz + R.C.nnz + D.nnz)


def recursion_cost(M: int) -> int:
    """Multiply-adds of the H-block recursion, computed without running it."""
    total = 0
    for m in range(4, M):
        R = build_recurrence(m, MINUS_ONE, "interior")
        D = build_generalized_inverse(m, MINUS_ONE, "interior")
        for k in range(m + 1, 2 * M - m):
            total += _step_cost(R, D, build_recurrence(k, MINUS_ONE, "interior"))
    return total


def h_block_table(
    M: int, gamma_ref: Field, Q: int | None = None, counter: OpCounter | None = None
) -> dict[tuple[int, int], np.ndarray]:
    """Blocks H_{m,k} = int gamma phi_m phi_k^T over the reference element, 4 <= m <= k <= M.

    Only the two most recent block rows are kept while sweeping m upward.
    ``counter`` receives the multiply-adds spent in the recursion itself.
    """
    if M < 4:
        return {}
    top = 2 * M - 4
    rule = tet_rule(Q or M + 4)
    wg = rule.weights * np.asarray(gamma_ref(rule.nodes))
    seed = tabulate([MultiIndex(2, 1, 1)], MINUS_ONE, rule.nodes)[0] * wg
    layouts = {k: layout_indices(k, "interior") for k in range(4, top + 1)}
    flat = moments([i for k in layouts for i in layouts[k]], MINUS_ONE, rule.nodes, seed)
    current, start = {}, 0
    for k, idx in layouts.items():
        current[k] = flat[start:start + len(idx)][None, :]
        start += len(idx)
    previous: dict[int, np.ndarray] = {}
    out = {(4, k): current[k] for k in range(4, M + 1)}
    rec = {k: build_recurrence(k, MINUS_ONE, "interior") for k in range(4, top + 1)}
    for m in range(4, M):
        D = build_generalized_inverse(m, MINUS_ONE, "interior")
        R = rec[m]
        new = {}
        for k in range(m + 1, 2 * M - m):
            Rk = rec[k]
            right = current[k - 1] @ Rk.C.T + current[k] @ Rk.B.T + current[k + 1] @ Rk.A.T
            rhs = np.vstack([right[:, i * Rk.size:(i + 1) * Rk.size] for i in range(3)])
            rhs -= R.B @ current[k]
            if k in previous:
                rhs -= R.C @ previous[k]
            new[k] = D @ rhs
            if counter is not None:
                counter.add(_step_cost(R, D, Rk))
        previous, current = current, new
        for k in range(m + 1, M + 1):
            out[m + 1, k] = current[k]
    return out


def assemble_mass_variable(
    tet: Tetrahedron,
    M: int,
    gamma: Field,
    Q: int | None = None,
    counter: OpCounter | None = None,
) -> sparse.csr_matrix:
    """Mass matrix (gamma u, v) for a variable coefficient via the H-block recursion.

    Returned in the same l1-major interior ordering as the other assemblers.
    """
    blocks = h_block_table(M, lambda p: gamma(tet.affine_map(p)), Q, counter)
    sizes = [len(layout_indices(m, "interior")) for m in range(4, M + 1)]
    starts = np.concatenate([[0], np.cumsum(sizes)])
    n = int(starts[-1])
    H = np.zeros((n, n))
    for (m, k), block in blocks.items():
        rs = slice(starts[m - 4], starts[m - 3])
        cs = slice(starts[k - 4], starts[k - 3])
        H[rs, cs] = block
        H[cs, rs] = block.T
    perm = _graded_to_lex(M)
    return _clean(sparse.csr_matrix(6 * tet.volume * H[np.ix_(perm, perm)]))


# ------------------------------------------------------------ sparsity bands

STIFFNESS_BLOCK_OFFSETS = (-2, -1, 0, 1, 2)
MASS_BLOCK_OFFSETS = (-2, 0, 2)
SUBBLOCK_HALF_WIDTH = 3


def band_violations(
    A: sparse.spmatrix,
    M: int,
    block_offsets: Sequence[int],
    half_width: int = SUBBLOCK_HALF_WIDTH,
) -> int:
    """Count nonzeros of an interior matrix outside the allowed band pattern.

    Blocks are the l1 groups of the l1-major ordering; a nonzero at (i, j) is
    allowed when l1(j) - l1(i) is in ``block_offsets`` and the l2 sub-blocks
    differ by at most ``half_width`` in l1 + l2.
    """
    idx = np.array([m.index for m in interior_modes(M)], dtype=int).reshape(-1, 3)
    coo = sparse.coo_matrix(A)
    rows, cols = idx[coo.row], idx[coo.col]
    d1 = cols[:, 0] - rows[:, 0]
    d12 = cols[:, 0] + cols[:, 1] - rows[:, 0] - rows[:, 1]
    bad = ~np.isin(d1, block_offsets) | (np.abs(d12) > half_width)
    return int(np.count_nonzero(bad & (coo.data != 0)))
