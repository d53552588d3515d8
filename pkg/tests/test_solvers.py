import numpy as np
import pytest

from oracles import (
    bubble_polynomial,
    quadrature_mass,
    quadrature_stiffness,
    random_interior_points,
    random_tetrahedron,
)
from tetspectral.assembly import assemble_mass_const, assemble_stiffness
from tetspectral.geometry import Tetrahedron
from tetspectral.modes import evaluate_modes, interior_modes
from tetspectral.problems import EXAMPLES, get_example
from tetspectral.quadrature import tet_rule
from tetspectral.reference import exact_TF_spectrum
from tetspectral.solvers import (
    FactorizationError,
    TimeGrid,
    _cholesky,
    crank_nicolson,
    error_norms,
    solve_eigen,
    solve_source,
)

REFERENCE = Tetrahedron.preset("reference")


def fd_laplacian(u, x, h=1e-4):
    total = np.zeros(len(x))
    for e in np.eye(3):
        total += (u(x + h * e) - 2 * u(x) + u(x - h * e)) / h**2
    return total


@pytest.mark.parametrize("name", ["example1", "example2", "example3"])
def test_manufactured_laplacians(name, rng):
    problem = get_example(name)
    x = random_interior_points(rng, 20)
    exact = problem.laplacian(x)
    assert np.abs(fd_laplacian(problem.exact, x) - exact).max() < 1e-5 * np.abs(exact).max()


def test_heat_problem_source(rng):
    problem = get_example("example4")
    x = random_interior_points(rng, 20)
    t, h = 0.3, 1e-5
    u_t = (problem.exact(x, t + h) - problem.exact(x, t - h)) / (2 * h)
    lap = fd_laplacian(lambda y: problem.exact(y, t), x)
    assert np.abs(u_t - lap - problem.source(x, t)).max() < 1e-5 * np.abs(problem.source(x, t)).max()


def test_unknown_example():
    with pytest.raises(ValueError):
        get_example("example9")
    assert sorted(EXAMPLES) == ["example1", "example2", "example3", "example4"]


@pytest.mark.parametrize("gamma", [0.0, 2.0, "field"])
def test_polynomial_reproduction(gamma, rng):
    tet = Tetrahedron(random_tetrahedron(rng))
    u, lap = bubble_polynomial(tet, [0.3, -0.2, 0.5])
    coefficient = (lambda x: 1 + x[:, 0] ** 2) if gamma == "field" else gamma
    gamma_at = coefficient if callable(coefficient) else (lambda x: np.full(len(x), coefficient))
    result = solve_source(tet, 6, lambda x: -lap(x) + gamma_at(x) * u(x), coefficient, mass_method="quadrature")
    points = tet.affine_map(random_interior_points(rng, 200))
    err = np.abs(result.evaluate(points) - u(points)).max()
    # the Laplacian of the bubble is exact, so only the quadrature of gamma u limits the error
    assert err <= (1e-11 if gamma != "field" else 1e-9) * np.abs(u(points)).max()


def test_polynomial_reproduction_recursive_mass(rng):
    tet = Tetrahedron(random_tetrahedron(rng))
    u, lap = bubble_polynomial(tet, [0.1, 0.4, -0.3])
    gamma = lambda x: np.exp(0.2 * x[:, 2])
    result = solve_source(tet, 7, lambda x: -lap(x) + gamma(x) * u(x), gamma)
    points = tet.affine_map(random_interior_points(rng, 200))
    assert np.abs(result.evaluate(points) - u(points)).max() < 1e-9 * np.abs(u(points)).max()


def test_galerkin_orthogonality_against_quadrature_forms():
    tet = Tetrahedron(random_tetrahedron(np.random.default_rng(4)))
    M = 7
    f = lambda x: np.cos(x.sum(axis=1))
    result = solve_source(tet, M, f, 1.5)
    modes = interior_modes(M)
    A = quadrature_stiffness(tet, M, modes) + 1.5 * quadrature_mass(tet, M, modes)
    rule = tet_rule(M + 4)
    load = evaluate_modes(modes, rule.nodes) @ (6 * tet.volume * rule.weights * f(tet.affine_map(rule.nodes)))
    residual = load - A @ result.interior
    assert np.abs(residual).max() <= 1e-10 * np.abs(load).max()
    assert result.residual < 1e-12


def test_example1_reaches_tolerance():
    problem = get_example("example1")
    result = solve_source(REFERENCE, 20, problem.source, problem.gamma)
    err_max, err_l2 = error_norms(result, problem.exact)
    assert err_max < 1e-8 and err_l2 < 1e-8


def test_example2_lifted_errors_decay():
    problem = get_example("example2")
    errors = [error_norms(solve_source(REFERENCE, M, problem.source, 0.0, problem.boundary), problem.exact)[1] for M in (4, 6, 8, 10)]
    assert all(b < a / 5 for a, b in zip(errors, errors[1:]))


def test_nonhomogeneous_solution_matches_boundary_data(rng):
    problem = get_example("example2")
    result = solve_source(REFERENCE, 10, problem.source, 0.0, problem.boundary)
    face = rng.dirichlet(np.ones(3), size=50) @ np.eye(3)  # the face x1 + x2 + x3 = 1
    assert np.abs(result.evaluate(face) - problem.exact(face)).max() < 1e-6


def test_solve_source_requires_interior():
    with pytest.raises(ValueError):
        solve_source(REFERENCE, 3, lambda x: np.ones(len(x)))


def test_factorization_error_reports_diagnostics():
    with pytest.raises(FactorizationError, match="not positive definite"):
        _cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]), "test matrix")


def test_eigen_first_value_on_fundamental():
    result = solve_eigen(Tetrahedron.preset("fundamental"), 20, count=5)
    assert result.returned == 5 and result.requested == 5
    assert result.values[0] > 0
    assert result.values[0] == pytest.approx(exact_TF_spectrum(1)[0], rel=1e-6)


def test_eigenpairs_rayleigh_and_residual():
    tet = Tetrahedron(random_tetrahedron(np.random.default_rng(8)))
    result = solve_eigen(tet, 10)
    S = assemble_stiffness(tet, 10).toarray()
    B = assemble_mass_const(tet, 10).toarray()
    v = result.vectors
    rayleigh = np.einsum("ij,ij->j", v, S @ v) / np.einsum("ij,ij->j", v, B @ v)
    assert np.allclose(rayleigh, result.values, rtol=1e-10)
    assert np.all(result.residuals <= 1e-8 * np.abs(result.values).max())
    assert np.all(np.diff(result.values) >= 0)
    assert result.returned == len(interior_modes(10))


def test_eigenvalues_decrease_with_degree():
    tet = Tetrahedron.preset("regular")
    values = [solve_eigen(tet, M, count=5).values for M in (8, 10, 12, 14)]
    for coarse, fine in zip(values, values[1:]):
        assert np.all(fine <= coarse + 1e-8)


def test_time_grid():
    grid = TimeGrid.up_to(0.25, 1.0)
    assert grid.steps == 4 and grid.final_time == 1.0
    assert np.allclose(grid.times, [0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        TimeGrid.up_to(0.3, 1.0)
    with pytest.raises(ValueError):
        TimeGrid(-0.1, 3)


def test_crank_nicolson_zero_data():
    zero = lambda x, t=0.0: np.zeros(len(x))
    traj = crank_nicolson(REFERENCE, 6, zero, zero, TimeGrid(0.1, 5))
    assert np.all(traj.coefficients == 0)
    with pytest.raises(ValueError):
        traj.at_time(0.05)


def test_crank_nicolson_tracks_exact_solution():
    problem = get_example("example4")
    traj = crank_nicolson(REFERENCE, 10, problem.source, lambda x: problem.exact(x, 0.0), TimeGrid.up_to(2**-8, 0.5))
    _, err = error_norms(traj.at_time(0.5), lambda x: problem.exact(x, 0.5))
    scale = np.sqrt(6 * REFERENCE.volume * (tet_rule(12).weights @ problem.exact(tet_rule(12).nodes, 0.5) ** 2))
    assert err < 1e-3 * scale


def test_error_norms_zero_for_exact_polynomial():
    result = solve_source(REFERENCE, 6, lambda x: np.zeros(len(x)), 0.0, lambda x: 1 + x[:, 0] - x[:, 2])
    err_max, err_l2 = error_norms(result, lambda x: 1 + x[:, 0] - x[:, 2])
    assert err_max < 1e-11 and err_l2 < 1e-11
