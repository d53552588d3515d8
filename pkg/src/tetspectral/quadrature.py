"""Collapsed-coordinate Gauss-Jacobi rules on the reference tetrahedron."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from .koornwinder import expand


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(self.weights @ np.asarray(f(self.nodes)))


@lru_cache(maxsize=None)
def gauss_jacobi(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for weight (1-z)^alpha (1+z)^beta on [-1, 1]."""
    if n < 1:
        raise ValueError("rule needs at least one node")
    z, w = roots_jacobi(n, alpha, beta)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


@lru_cache(maxsize=None)
def tet_rule(Q: int) -> QuadratureRule:
    """Tensor rule with Q points per collapsed direction, exact to degree 2Q-1."""
    z0, w0 = gauss_jacobi(Q, 0.0, 0.0)
    z1, w1 = gauss_jacobi(Q, 1.0, 0.0)
    z2, w2 = gauss_jacobi(Q, 2.0, 0.0)
    xi, eta, zeta = np.meshgrid(z0, z1, z2, indexing="ij")
    nodes = expand(np.stack([xi.ravel(), eta.ravel(), zeta.ravel()], axis=-1))
    weights = np.einsum("i,j,k->ijk", w0, w1, w2).ravel() / 64
    return QuadratureRule(nodes, weights, Q)


@lru_cache(maxsize=None)
def triangle_rule(Q: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed rule on the unit triangle {s, t >= 0, s + t <= 1}."""
    z0, w0 = gauss_jacobi(Q, 0.0, 0.0)
    z1, w1 = gauss_jacobi(Q, 1.0, 0.0)
    xi, eta = np.meshgrid(z0, z1, indexing="ij")
    s = (1 + xi) * (1 - eta) / 4
    t = (1 + eta) / 2
    weights = np.outer(w0, w1).ravel() / 8
    return np.stack([s.ravel(), t.ravel()], axis=-1), weights


def integrate(rule: QuadratureRule, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Integral of f over the reference tetrahedron."""
    return rule.integrate(f)


def integrate_physical(rule: QuadratureRule, tet, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Integral of f (a function of physical points) over ``tet``."""
    return 6 * tet.volume * float(rule.weights @ np.asarray(f(tet.affine_map(rule.nodes))))


def sample_grid(n: int = 20) -> np.ndarray:
    """Tensor grid of n^3 collapsed midpoints mapped into the reference element."""
    c = -1 + (2 * np.arange(n) + 1) / n
    xi, eta, zeta = np.meshgrid(c, c, c, indexing="ij")
    return expand(np.stack([xi.ravel(), eta.ravel(), zeta.ravel()], axis=-1))
