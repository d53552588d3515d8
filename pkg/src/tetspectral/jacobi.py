"""Generalized Jacobi polynomials J_k^{a,b} for parameters a, b >= -1.

The a = b = -1 family uses the modified convention J_1^{-1,-1}(z) = z, so
several coefficient tables carry isolated special branches at small k.
Coefficient functions accept formal parameters below -1 because the
tetrahedral identities evaluate them there (always multiplying vanishing
terms); only evaluation and norms enforce the admissible domain.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import special


class JacobiParams(NamedTuple):
    alpha: float
    beta: float


class ThreeTermCoeffs(NamedTuple):
    a1: float
    a2: float
    a3: float


class PromotionCoeffs(NamedTuple):
    b1: float
    b2: float
    c1: float
    c2: float
    c3: float


class DemotionCoeffs(NamedTuple):
    e1: float
    e2: float
    g1: float
    g2: float
    g3: float


def _check_params(alpha: float, beta: float) -> None:
    if alpha < -1 or beta < -1:
        raise ValueError(f"Jacobi parameters must be >= -1, got ({alpha}, {beta})")


def _is_minus_one_pair(alpha: float, beta: float) -> bool:
    return alpha == -1 and beta == -1


@lru_cache(maxsize=None)
def three_term_coeffs(k: int, alpha: float, beta: float) -> ThreeTermCoeffs:
    """Coefficients with z J_k = a1 J_{k+1} + a2 J_k + a3 J_{k-1}."""
    if k < 0:
        return ThreeTermCoeffs(0.0, 0.0, 0.0)
    pair = _is_minus_one_pair(alpha, beta)
    if k == 0:
        if pair:
            return ThreeTermCoeffs(1.0, 0.0, 0.0)
        s = alpha + beta + 2
        return ThreeTermCoeffs(2 / s, (beta - alpha) / s, 0.0)
    if pair and k == 1:
        return ThreeTermCoeffs(4.0, 0.0, 1.0)
    if pair and k == 2:
        return ThreeTermCoeffs(0.5, 0.0, 0.0)
    s = 2 * k + alpha + beta
    a1 = 2 * (k + 1) * (k + alpha + beta + 1) / ((s + 1) * (s + 2))
    a2 = (beta**2 - alpha**2) / (s * (s + 2))
    a3 = 2 * (k + alpha) * (k + beta) / (s * (s + 1))
    return ThreeTermCoeffs(float(a1), float(a2), float(a3))


def _b_pair(k: int, alpha: float, beta: float) -> tuple[float, float]:
    if k < 0:
        return 0.0, 0.0
    if k == 0:
        return 1.0, 0.0
    if k == 1 and _is_minus_one_pair(alpha, beta):
        return 2.0, -1.0
    s = 2 * k + alpha + beta + 1
    return (k + alpha + beta + 1) / s, -(k + beta) / s


@lru_cache(maxsize=None)
def promotion_coeffs(k: int, alpha: float, beta: float) -> PromotionCoeffs:
    """Coefficients for raising the first parameter by one and by two.

    J_k^{a,b} = b1 J_k^{a+1,b} + b2 J_{k-1}^{a+1,b}
              = c1 J_k^{a+2,b} + c2 J_{k-1}^{a+2,b} + c3 J_{k-2}^{a+2,b}
    """
    b1, b2 = _b_pair(k, alpha, beta)
    u1, u2 = _b_pair(k, alpha + 1, beta)
    w1, w2 = _b_pair(k - 1, alpha + 1, beta)
    return PromotionCoeffs(
        float(b1), float(b2), float(b1 * u1), float(b1 * u2 + b2 * w1), float(b2 * w2)
    )


def _e_pair(k: int, alpha: float, beta: float) -> tuple[float, float]:
    if k < 0:
        return 0.0, 0.0
    if _is_minus_one_pair(alpha, beta):
        if k == 0:
            return 0.5, -0.5
        if k == 1:
            return 0.0, -1.0
    s = 2 * k + alpha + beta + 2
    return (k + alpha + 1) / s, -(k + 1) / s


@lru_cache(maxsize=None)
def demotion_coeffs(k: int, alpha: float, beta: float) -> DemotionCoeffs:
    """Coefficients for multiplying by (1-z)/2 and its square.

    (1-z)/2 J_k^{a+1,b} = e1 J_k^{a,b} + e2 J_{k+1}^{a,b}
    ((1-z)/2)^2 J_k^{a+2,b} = g1 J_{k+2}^{a,b} + g2 J_{k+1}^{a,b} + g3 J_k^{a,b}
    """
    e1, e2 = _e_pair(k, alpha, beta)
    u1, u2 = _e_pair(k, alpha + 1, beta)
    w1, w2 = _e_pair(k + 1, alpha, beta)
    if k < 0:
        u1 = u2 = 0.0
    return DemotionCoeffs(
        float(e1), float(e2), float(u2 * w2), float(u1 * e2 + u2 * w1), float(u1 * e1)
    )


@lru_cache(maxsize=None)
def derivative_coeff(k: int, alpha: float, beta: float) -> float:
    """d with dJ_k^{a,b}/dz = d J_{k-1}^{a+1,b+1}."""
    if k <= 0:
        return 0.0
    if k == 1 and _is_minus_one_pair(alpha, beta):
        return 1.0
    return (k + alpha + beta + 1) / 2


def jacobi_norm(k: int, alpha: float, beta: float) -> float:
    """h_k^{a,b}; the weighted square norm is 2^{a+b+1} h_k."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    _check_params(alpha, beta)
    args = np.array([k + alpha + 1, k + beta + 1, k + 1, k + alpha + beta + 1])
    if np.any((args <= 0) & (args == np.round(args))) or 2 * k + alpha + beta + 1 == 0:
        raise ValueError(f"norm undefined for k={k}, alpha={alpha}, beta={beta}")
    logs = special.gammaln(args)
    signs = special.gammasgn(args)
    value = np.exp(logs[0] + logs[1] - logs[2] - logs[3]) / (2 * k + alpha + beta + 1)
    return float(value * signs[0] * signs[1] * signs[2] * signs[3])


def jacobi_homogeneous_table(
    n: int, alpha: float, beta: float, u: np.ndarray, v: np.ndarray | float = 1.0
) -> np.ndarray:
    """Values v^k J_k(u/v) for k = 0..n, stacked along the first axis.

    The homogenized recurrence never divides by v, so v may vanish.
    """
    u = np.asarray(u, dtype=float)
    v = np.broadcast_to(np.asarray(v, dtype=float), u.shape)
    out = np.empty((n + 1,) + u.shape)
    out[0] = 1.0
    if n == 0:
        return out
    prev = np.zeros_like(u)
    for k in range(n):
        a1, a2, a3 = three_term_coeffs(k, alpha, beta)
        prev, out[k + 1] = out[k], ((u - a2 * v) * out[k] - a3 * v * v * prev) / a1
    return out


def jacobi_table(n: int, alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    """J_k^{a,b}(z) for k = 0..n via the three-term recurrence."""
    _check_params(alpha, beta)
    return jacobi_homogeneous_table(n, alpha, beta, z)


def jacobi_eval(k: int, alpha: float, beta: float, z):
    """J_k^{a,b}(z) for scalar or array z."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    values = jacobi_table(k, alpha, beta, np.asarray(z, dtype=float))[k]
    return float(values) if values.ndim == 0 else values
