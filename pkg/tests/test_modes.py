from math import comb

import numpy as np
import pytest

from oracles import central_gradient, random_interior_points
from tetspectral.koornwinder import DERIVATIVES, DUBINER, MINUS_ONE, MultiIndex, dimension, tabulate
from tetspectral.modes import (
    VERTEX_MODES,
    ModeId,
    boundary_modes,
    dubiner_expansion,
    enumerate_modes,
    evaluate_modes,
    gradient_dubiner,
    graded_interior_modes,
    interior_modes,
    shape_expansion,
)
from tetspectral.quadrature import tet_rule

REF = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
FACES = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))
COMBOS = {
    "d1": (1, 0, 0), "d2": (0, 1, 0), "d2-d1": (-1, 1, 0),
    "d3": (0, 0, 1), "d1-d3": (1, 0, -1), "d3-d2": (0, -1, 1),
}


def face_points(rng, j, n):
    bary = rng.dirichlet(np.ones(3), size=n)
    return bary @ REF[list(FACES[j])]


def counts(M):
    modes = enumerate_modes(M)
    return {kind: sum(m.kind == kind for m in modes) for kind in ("interior", "face", "edge", "vertex")}


@pytest.mark.parametrize(
    "M, expected",
    [(2, {"interior": 0, "face": 0, "edge": 6, "vertex": 4}), (3, {"interior": 0, "face": 4, "edge": 12, "vertex": 4})],
)
def test_mode_count_examples(M, expected):
    assert counts(M) == expected
    assert len(enumerate_modes(M)) == dimension(M)


@pytest.mark.parametrize("M", range(1, 12))
def test_mode_counts(M):
    c = counts(M)
    assert c["interior"] == comb(M - 1, 3)
    assert c["face"] == 4 * comb(M - 1, 2)
    assert c["edge"] == 6 * (M - 1)
    assert c["vertex"] == 4
    assert len(set(enumerate_modes(M))) == comb(M + 3, 3)


def test_interior_index_window_and_order():
    modes = interior_modes(8)
    assert len(modes) == 35
    assert all(m.index.l1 >= 2 and m.index.l2 >= 1 and m.index.l3 >= 1 for m in modes)
    assert [m.index for m in modes] == sorted(m.index for m in modes)
    assert sorted(graded_interior_modes(8)) == sorted(modes)


def test_expansion_examples():
    assert shape_expansion(VERTEX_MODES[3]) == {(0, 0, 0): 0.5, (0, 0, 1): 0.5}
    assert shape_expansion(ModeId("interior", "", MultiIndex(2, 1, 1))) == {(2, 1, 1): 1.0}


def test_dubiner_expansion_matches_direct_evaluation(rng):
    p = random_interior_points(rng, 50)
    modes = enumerate_modes(6)
    direct = evaluate_modes(modes, p)
    for mode, values in zip(modes, direct):
        exp = dubiner_expansion(mode)
        via = np.array(list(exp.values())) @ tabulate(list(exp), DUBINER, p)
        assert np.abs(via - values).max() <= 1e-12 * max(1.0, np.abs(values).max())


def test_vertex_modes_are_nodal():
    values = evaluate_modes(VERTEX_MODES, REF)
    assert np.abs(values - np.eye(4)).max() < 1e-12


def test_boundary_traces(rng):
    M = 7
    samples = [face_points(rng, j, 50) for j in range(4)]
    for mode in boundary_modes(M):
        for j in range(4):
            if mode.kind == "face":
                vanishes = j != int(mode.where)
            elif mode.kind == "edge":
                vanishes = str(j) in mode.where
            else:
                vanishes = j == int(mode.where)
            if vanishes:
                assert np.abs(evaluate_modes([mode], samples[j])).max() < 1e-12, (mode, j)


def test_face_modes_live_on_their_face(rng):
    for mode in boundary_modes(5):
        if mode.kind == "face":
            values = evaluate_modes([mode], face_points(rng, int(mode.where), 30))
            assert np.abs(values).max() > 1e-3


def test_interior_modes_vanish_on_boundary(rng):
    samples = np.vstack([face_points(rng, j, 50) for j in range(4)])
    values = evaluate_modes(interior_modes(8), samples)
    assert np.abs(values).max() <= 1e-12


@pytest.mark.parametrize("M", range(1, 7))
def test_modes_are_linearly_independent(M):
    rule = tet_rule(M + 2)
    V = evaluate_modes(enumerate_modes(M), rule.nodes)
    G = (V * rule.weights) @ V.T
    assert np.linalg.eigvalsh(G).min() > 1e-12


def test_vertex_gradient_example():
    mode = VERTEX_MODES[3]
    exp = gradient_dubiner(mode, "d3")
    assert exp == pytest.approx({(0, 0, 0): 1.0})


@pytest.mark.parametrize("which", DERIVATIVES)
def test_mode_gradients_against_finite_differences(which, rng):
    p = random_interior_points(rng, 30)
    modes = enumerate_modes(6)
    fd = central_gradient(lambda x: evaluate_modes(modes, x), p) @ np.array(COMBOS[which], dtype=float)
    for mode, ref in zip(modes, fd):
        exp = gradient_dubiner(mode, which)
        values = np.array(list(exp.values())) @ tabulate(list(exp), DUBINER, p) if exp else np.zeros(len(p))
        assert np.abs(values - ref).max() <= 1e-6 * max(1.0, np.abs(ref).max())
