"""Manufactured solutions on the reference tetrahedron with their data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Field = Callable[[np.ndarray], np.ndarray]


def _barycentric(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    return np.column_stack([x[:, 0], x[:, 1], x[:, 2], 1 - x.sum(axis=1)])


def sine_product(omega: float) -> tuple[Field, Field]:
    """u = prod_i sin(omega lambda_i) over the four barycentric coordinates, and its Laplacian."""

    def u(x):
        return np.prod(np.sin(omega * _barycentric(x)), axis=1)

    def laplacian(x):
        lam = _barycentric(x)
        s, c = np.sin(omega * lam), np.cos(omega * lam)
        cross = sum(c[:, i] * c[:, 3] * np.prod(s[:, [k for k in range(3) if k != i]], axis=1) for i in range(3))
        return -6 * omega**2 * u(x) - 2 * omega**2 * cross

    return u, laplacian


def _shifted_exponential(x):
    x = np.atleast_2d(x)
    return np.prod(x + 1, axis=1) * np.exp(1 - x.sum(axis=1))


def _shifted_exponential_laplacian(x):
    x = np.atleast_2d(x)
    e = np.exp(1 - x.sum(axis=1))
    total = sum((x[:, i] - 1) * np.prod(x[:, [j for j in range(3) if j != i]] + 1, axis=1) for i in range(3))
    return e * total


def _exp_coefficient(x):
    return np.exp(np.atleast_2d(x).sum(axis=1) + 1)


@dataclass(frozen=True)
class SourceProblem:
    """-Laplace(u) + gamma u = f with Dirichlet data g = u on the boundary."""

    name: str
    exact: Field
    laplacian: Field
    gamma: float | Field
    homogeneous: bool

    def gamma_at(self, x: np.ndarray) -> np.ndarray:
        if callable(self.gamma):
            return self.gamma(x)
        return np.full(np.atleast_2d(x).shape[0], float(self.gamma))

    def source(self, x: np.ndarray) -> np.ndarray:
        return -self.laplacian(x) + self.gamma_at(x) * self.exact(x)

    @property
    def boundary(self) -> Field | None:
        return None if self.homogeneous else self.exact


@dataclass(frozen=True)
class HeatProblem:
    """u_t - Laplace(u) = f with u = e^{-t} w(x) and homogeneous boundary values."""

    name: str
    spatial: Field
    spatial_laplacian: Field
    final_time: float = 1.0

    def exact(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.exp(-t) * self.spatial(x)

    def source(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.exp(-t) * (-self.spatial(x) - self.spatial_laplacian(x))


_half_sine, _half_sine_laplacian = sine_product(np.pi / 2)
_full_sine, _full_sine_laplacian = sine_product(np.pi)

EXAMPLES: dict[str, SourceProblem | HeatProblem] = {
    "example1": SourceProblem("example1", _half_sine, _half_sine_laplacian, 1.0, True),
    "example2": SourceProblem(
        "example2", _shifted_exponential, _shifted_exponential_laplacian, 0.0, False
    ),
    "example3": SourceProblem("example3", _half_sine, _half_sine_laplacian, _exp_coefficient, True),
    "example4": HeatProblem("example4", _full_sine, _full_sine_laplacian),
}


def get_example(name: str) -> SourceProblem | HeatProblem:
    try:
        return EXAMPLES[name]
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None
