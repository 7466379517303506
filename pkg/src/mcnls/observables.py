"""Physical observables of a field: mass, energy, momentum, variance.

Conventions for i u_t + Delta u = mu |u|^{4/d} u:
    mass      M = integral |u|^2
    energy    E = 1/2 integral |grad u|^2 + mu d/(2(d+2)) integral |u|^{2(d+2)/d}
    momentum  P_j = Im integral conj(u) d_j u
    variance  V = integral |x|^2 |u|^2
"""

from __future__ import annotations

import numpy as np

from .grid import Field, gradient_norm_sq, spectral_derivative


def quad_weight(f: Field) -> float:
    return f.grid.h ** f.grid.d


def mass(f: Field) -> float:
    return float(quad_weight(f) * np.sum(np.abs(f.values) ** 2))


def kinetic(f: Field) -> float:
    """integral |grad u|^2 (without the 1/2)."""
    return gradient_norm_sq(f)


def potential(f: Field) -> float:
    """integral |u|^{2(d+2)/d}."""
    d = f.grid.d
    q = 2.0 * (d + 2) / d
    return float(quad_weight(f) * np.sum(np.abs(f.values) ** q))


def energy(f: Field, mu: int) -> float:
    d = f.grid.d
    return 0.5 * kinetic(f) + mu * d / (2.0 * (d + 2)) * potential(f)


def momentum_density(f: Field) -> list:
    """p_j = Im[conj(u) d_j u], one array per axis."""
    ub = np.conj(f.values)
    return [np.imag(ub * spectral_derivative(f, j).values) for j in range(f.grid.d)]


def momentum(f: Field) -> np.ndarray:
    w = quad_weight(f)
    return np.array([w * np.sum(p) for p in momentum_density(f)])


def variance(f: Field) -> float:
    xm = f.grid.x_mesh()
    r2 = sum(x * x for x in xm)
    return float(quad_weight(f) * np.sum(r2 * np.abs(f.values) ** 2))


def variance_rate(f: Field) -> float:
    """d/dt of the variance along the flow: 4 integral x . p dx."""
    xm = f.grid.x_mesh()
    w = quad_weight(f)
    p = momentum_density(f)
    return float(4.0 * w * sum(np.sum(x * pj) for x, pj in zip(xm, p)))
