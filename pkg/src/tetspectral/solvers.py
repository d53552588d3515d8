"""Source, eigenvalue and heat-equation solvers on one tetrahedron."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import linalg, sparse

from .assembly import (
    assemble_boundary,
    assemble_load,
    assemble_mass_const,
    assemble_mass_quadrature,
    assemble_mass_variable,
    assemble_stiffness,
)
from .geometry import Tetrahedron
from .koornwinder import MINUS_ONE
from .modes import boundary_modes, evaluate_modes, interior_modes, shape_matrix
from .quadrature import sample_grid, tet_rule
from .recurrence import clenshaw_eval

Field = Callable[[np.ndarray], np.ndarray]
Coefficient = float | Field
MassMethod = Literal["recursion", "quadrature"]


class FactorizationError(np.linalg.LinAlgError):
    """A system matrix expected to be SPD failed Cholesky factorization."""


def _cholesky(A: np.ndarray, what: str):
    try:
        return linalg.cho_factor(A)
    except linalg.LinAlgError as exc:
        d = np.diag(A)
        raise FactorizationError(
            f"{what} is not positive definite (size {A.shape[0]}, "
            f"min diagonal {d.min():.3e}, max diagonal {d.max():.3e})"
        ) from exc


@dataclass(frozen=True)
class SolveResult:
    """Discrete solution u_M = sum interior + sum boundary, as mode coefficients."""

    tet: Tetrahedron
    M: int
    interior: np.ndarray
    boundary: np.ndarray | None = None
    residual: float = 0.0

    def coefficients(self) -> np.ndarray:
        """Coefficients in the (-1,-1,-1,-1) family, all degrees <= M."""
        c = shape_matrix(interior_modes(self.M), self.M) @ self.interior
        if self.boundary is not None:
            c = c + shape_matrix(boundary_modes(self.M), self.M) @ self.boundary
        return c

    def evaluate_reference(self, points: np.ndarray) -> np.ndarray:
        return clenshaw_eval(self.coefficients(), MINUS_ONE, points)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at physical points."""
        return self.evaluate_reference(self.tet.inverse_map(points))


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray
    requested: int | None
    residuals: np.ndarray = field(repr=False)

    @property
    def returned(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    steps: int

    def __post_init__(self):
        if self.dt <= 0 or self.steps < 0:
            raise ValueError("time step must be positive and step count non-negative")

    @classmethod
    def up_to(cls, dt: float, final_time: float) -> "TimeGrid":
        steps = int(round(final_time / dt))
        if not np.isclose(steps * dt, final_time, rtol=1e-12, atol=0):
            raise ValueError("final time must be a multiple of the time step")
        return cls(dt, steps)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)

    @property
    def final_time(self) -> float:
        return self.dt * self.steps


def mass_matrix(
    tet: Tetrahedron, M: int, gamma: Coefficient, method: MassMethod = "recursion"
) -> sparse.csr_matrix:
    if not callable(gamma):
        return assemble_mass_const(tet, M, float(gamma))
    if method == "recursion":
        return assemble_mass_variable(tet, M, gamma)
    return assemble_mass_quadrature(tet, M, gamma)


def solve_source(
    tet: Tetrahedron,
    M: int,
    f: Field,
    gamma: Coefficient = 0.0,
    g: Field | None = None,
    mass_method: MassMethod = "recursion",
) -> SolveResult:
    """Galerkin solution of -Laplace(u) + gamma u = f with u = g (or 0) on the boundary."""
    if M < 4 and g is None:
        raise ValueError("homogeneous problems need M >= 4")
    interior = interior_modes(M)
    A = (assemble_stiffness(tet, M) + mass_matrix(tet, M, gamma, mass_method)).toarray()
    rhs = assemble_load(tet, M, f, Q=M + 4)
    ub = None
    if g is not None:
        ub = assemble_boundary(tet, M, g, Q=M + 4)
        modes = interior + boundary_modes(M)
        n = len(interior)
        coupling = assemble_stiffness(tet, M, modes)
        if callable(gamma):
            coupling = coupling + assemble_mass_quadrature(tet, M, gamma, Q=M + 4, modes=modes)
        else:
            coupling = coupling + assemble_mass_const(tet, M, float(gamma), modes=modes)
        rhs = rhs - coupling.tocsr()[:n, n:] @ ub
    if not interior:
        return SolveResult(tet, M, np.zeros(0), ub)
    u = linalg.cho_solve(_cholesky(A, "S + M_gamma"), rhs)
    residual = float(np.linalg.norm(A @ u - rhs) / max(np.linalg.norm(rhs), 1e-300))
    return SolveResult(tet, M, u, ub, residual)


def solve_eigen(tet: Tetrahedron, M: int, count: int | None = None) -> EigenResult:
    """Smallest ``count`` (default all) Dirichlet Laplacian eigenpairs of the pencil (S, M)."""
    if M < 4:
        raise ValueError("eigenproblems need M >= 4")
    S = assemble_stiffness(tet, M).toarray()
    B = assemble_mass_const(tet, M).toarray()
    _cholesky(B, "mass matrix")
    subset = None if count is None else (0, min(count, S.shape[0]) - 1)
    values, vectors = linalg.eigh(S, B, subset_by_index=subset)
    scale = np.linalg.norm(vectors, axis=0)
    residuals = np.linalg.norm(S @ vectors - (B @ vectors) * values, axis=0) / scale
    return EigenResult(values, vectors, count, residuals)


@dataclass(frozen=True)
class Trajectory:
    tet: Tetrahedron
    M: int
    grid: TimeGrid
    coefficients: np.ndarray  # (steps + 1, n_interior)

    def at_step(self, n: int) -> SolveResult:
        return SolveResult(self.tet, self.M, self.coefficients[n])

    def at_time(self, t: float) -> SolveResult:
        n = int(round(t / self.grid.dt))
        if not 0 <= n <= self.grid.steps or not np.isclose(n * self.grid.dt, t, rtol=1e-12, atol=1e-15):
            raise ValueError(f"time {t} is not on the grid")
        return self.at_step(n)


def crank_nicolson(
    tet: Tetrahedron,
    M: int,
    f: Callable[[np.ndarray, float], np.ndarray],
    u0: Field,
    grid: TimeGrid,
) -> Trajectory:
    """Crank-Nicolson for u_t - Laplace(u) = f with homogeneous Dirichlet data."""
    modes = interior_modes(M)
    S = assemble_stiffness(tet, M).toarray()
    B = assemble_mass_const(tet, M).toarray()
    rule = tet_rule(M + 4)

    V = evaluate_modes(modes, rule.nodes)
    points = tet.affine_map(rule.nodes)
    w = 6 * tet.volume * rule.weights

    def load(t: float) -> np.ndarray:
        return V @ (w * f(points, t))

    out = np.empty((grid.steps + 1, len(modes)))
    out[0] = linalg.cho_solve(_cholesky(B, "mass matrix"), V @ (w * u0(points)))
    left = _cholesky(B / grid.dt + S / 2, "Crank-Nicolson matrix")
    right = B / grid.dt - S / 2
    previous = load(0.0)
    for n in range(grid.steps):
        current = load((n + 1) * grid.dt)
        out[n + 1] = linalg.cho_solve(left, right @ out[n] + (current + previous) / 2)
        previous = current
    return Trajectory(tet, M, grid, out)


def error_norms(result: SolveResult, exact: Field, Q: int | None = None, grid: int = 20) -> tuple[float, float]:
    """(max pointwise error on the sample grid, L2 error by quadrature)."""
    tet = result.tet
    samples = sample_grid(grid)
    err_max = float(np.abs(result.evaluate_reference(samples) - exact(tet.affine_map(samples))).max())
    rule = tet_rule(Q or result.M + 6)
    diff = result.evaluate_reference(rule.nodes) - exact(tet.affine_map(rule.nodes))
    err_l2 = float(np.sqrt(6 * tet.volume * np.sum(rule.weights * diff**2)))
    return err_max, err_l2
