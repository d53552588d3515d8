"""Sparse spectral-Galerkin discretizations on arbitrary tetrahedra."""

from .assembly import (
    assemble_boundary,
    assemble_load,
    assemble_mass_const,
    assemble_mass_quadrature,
    assemble_mass_variable,
    assemble_stiffness,
)
from .estimators import DirichletEigensolver, GalerkinSolver, ModalFeatures
from .geometry import Tetrahedron
from .solvers import TimeGrid, crank_nicolson, solve_eigen, solve_source

__all__ = [
    "DirichletEigensolver",
    "GalerkinSolver",
    "ModalFeatures",
    "Tetrahedron",
    "TimeGrid",
    "assemble_boundary",
    "assemble_load",
    "assemble_mass_const",
    "assemble_mass_quadrature",
    "assemble_mass_variable",
    "assemble_stiffness",
    "crank_nicolson",
    "solve_eigen",
    "solve_source",
]
