"""scikit-learn style wrappers: a modal feature map, a source-problem solver and an eigensolver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .geometry import Tetrahedron
from .koornwinder import DUBINER, all_indices, tabulate
from .modes import enumerate_modes, evaluate_modes, interior_modes
from .solvers import solve_eigen, solve_source


def resolve_tetrahedron(tetrahedron) -> Tetrahedron:
    """Accept a preset name, a Tetrahedron, or a 4x3 vertex array."""
    if isinstance(tetrahedron, Tetrahedron):
        return tetrahedron
    if isinstance(tetrahedron, str):
        return Tetrahedron.preset(tetrahedron)
    return Tetrahedron(np.asarray(tetrahedron, dtype=float))


def check_points(X) -> np.ndarray:
    return check_array(X, ensure_min_samples=1, dtype=float, ensure_all_finite=True)


def _check_degree(degree, minimum: int) -> int:
    if not isinstance(degree, (int, np.integer)) or degree < minimum:
        raise ValueError(f"degree must be an integer >= {minimum}, got {degree!r}")
    return int(degree)


class ModalFeatures(TransformerMixin, BaseEstimator):
    """Map physical points to basis values.

    basis="modal" gives all hierarchical modes, "interior" only the interior
    ones, "dubiner" the L2-orthogonal polynomials.
    """

    def __init__(self, degree: int = 6, tetrahedron="reference", basis: str = "modal"):
        self.degree = degree
        self.tetrahedron = tetrahedron
        self.basis = basis

    def fit(self, X=None, y=None):
        degree = _check_degree(self.degree, 4 if self.basis == "interior" else 1)
        if self.basis not in ("modal", "interior", "dubiner"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if X is not None:
            X = check_points(X)
            if X.shape[1] != 3:
                raise ValueError("points must have three coordinates")
        self.tet_ = resolve_tetrahedron(self.tetrahedron)
        if self.basis == "dubiner":
            self.indices_ = list(all_indices(degree))
        else:
            self.modes_ = interior_modes(degree) if self.basis == "interior" else enumerate_modes(degree)
        self.n_features_in_ = 3
        self.n_features_out_ = len(self.indices_) if self.basis == "dubiner" else len(self.modes_)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "tet_")
        X = check_points(X)
        if X.shape[1] != 3:
            raise ValueError("points must have three coordinates")
        ref = self.tet_.inverse_map(X)
        if self.basis == "dubiner":
            return tabulate(self.indices_, DUBINER, ref).T
        return evaluate_modes(self.modes_, ref).T


class GalerkinSolver(RegressorMixin, BaseEstimator):
    """Solve -Laplace(u) + gamma u = source on a tetrahedron; ``predict`` evaluates u_M."""

    def __init__(
        self,
        degree: int = 12,
        tetrahedron="reference",
        source=None,
        gamma=0.0,
        boundary=None,
        mass_method: str = "recursion",
    ):
        self.degree = degree
        self.tetrahedron = tetrahedron
        self.source = source
        self.gamma = gamma
        self.boundary = boundary
        self.mass_method = mass_method

    def fit(self, X=None, y=None):
        degree = _check_degree(self.degree, 4)
        if not callable(self.source):
            raise ValueError("source must be a callable on (n, 3) physical points")
        if not callable(self.gamma) and float(self.gamma) < 0:
            raise ValueError("gamma must be non-negative")
        self.tet_ = resolve_tetrahedron(self.tetrahedron)
        self.result_ = solve_source(
            self.tet_, degree, self.source, self.gamma, self.boundary, self.mass_method
        )
        self.coef_ = self.result_.interior
        self.boundary_coef_ = self.result_.boundary
        self.n_features_in_ = 3
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "result_")
        X = check_points(X)
        return self.result_.evaluate(X)


class DirichletEigensolver(BaseEstimator):
    """Dirichlet Laplacian eigenpairs of a tetrahedron; ``transform`` evaluates eigenfunctions."""

    def __init__(self, degree: int = 12, tetrahedron="reference", n_eigenvalues: int | None = None):
        self.degree = degree
        self.tetrahedron = tetrahedron
        self.n_eigenvalues = n_eigenvalues

    def fit(self, X=None, y=None):
        degree = _check_degree(self.degree, 4)
        if self.n_eigenvalues is not None and self.n_eigenvalues < 1:
            raise ValueError("n_eigenvalues must be positive")
        self.tet_ = resolve_tetrahedron(self.tetrahedron)
        result = solve_eigen(self.tet_, degree, self.n_eigenvalues)
        self.eigenvalues_ = result.values
        self.eigenvectors_ = result.vectors
        self.residuals_ = result.residuals
        self.modes_ = interior_modes(degree)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "eigenvalues_")
        X = check_points(X)
        return evaluate_modes(self.modes_, self.tet_.inverse_map(X)).T @ self.eigenvectors_
