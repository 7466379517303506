"""Littlewood-Paley smooth frequency truncations and the nonlinearity commutator.

The multiplier profile is 1 on [0, 1], 0 on [2, inf) and glues the two
plateaus with the C^1 smooth step exp(1 - 1/(1 - (r-1)^2)) on (1, 2).
Projections act on the Fourier side as radial multipliers phi(|k|/N).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, lp_norm


def _bump_raw(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    out = np.ones_like(r)
    out[r > 2.0] = 0.0
    mid = (r > 1.0) & (r <= 2.0)
    s = r[mid] - 1.0
    # exp(1 - 1/(1 - s^2)); vanishing-denominator guard at s -> 1
    den = 1.0 - s * s
    with np.errstate(divide="ignore", over="ignore"):
        val = np.exp(1.0 - 1.0 / den)
    val[den <= 0.0] = 0.0
    out[mid] = val
    out[r < 0.0] = 1.0  # radial profile, callers pass |.|
    return out


def _bump_raw_derivative(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    mid = (r > 1.0) & (r < 2.0)
    s = r[mid] - 1.0
    den = 1.0 - s * s
    with np.errstate(divide="ignore", over="ignore"):
        val = np.exp(1.0 - 1.0 / den) * (-2.0 * s / (den * den))
    val[den <= 0.0] = 0.0
    out[mid] = val
    return out


@dataclass(frozen=True)
class BumpProfile:
    """Radial multiplier profile: 1 on [0,1], smooth decrease on (1,2), 0 beyond."""

    def __call__(self, r) -> np.ndarray:
        return _bump_raw(np.abs(np.asarray(r, dtype=float)))

    def derivative(self, r) -> np.ndarray:
        return _bump_raw_derivative(np.abs(np.asarray(r, dtype=float)))


BUMP = BumpProfile()


def _apply_multiplier(f: Field, mult: np.ndarray) -> Field:
    vals = np.fft.ifftn(mult * np.fft.fftn(f.values))
    return Field(f.grid, vals)


def low_multiplier(f_or_grid, N: float) -> np.ndarray:
    grid = getattr(f_or_grid, "grid", f_or_grid)
    if not N > 0:
        raise ValueError(f"frequency scale N must be positive, got {N}")
    kabs = np.sqrt(grid.k2_mesh())
    return BUMP(kabs / N)


def project_low(f: Field, N: float) -> Field:
    """P_{<=N}: multiply modes by phi(|k|/N)."""
    return _apply_multiplier(f, low_multiplier(f, N))


def project_high(f: Field, N: float) -> Field:
    """P_{>N} = Id - P_{<=N}."""
    return _apply_multiplier(f, 1.0 - low_multiplier(f, N))


def project_band(f: Field, N: float) -> Field:
    """P_N = P_{<=2N} - P_{<=N}."""
    mult = low_multiplier(f, 2.0 * N) - low_multiplier(f, N)
    return _apply_multiplier(f, mult)


def nonlinearity(f: Field, mu: int, dealias: bool = True) -> Field:
    """F(u) = mu |u|^{4/d} u evaluated pointwise.

    With dealias=True the product is formed on a grid zero-padded by a
    factor of two and truncated back, which bounds the aliasing error of
    the quintic (d=1) / cubic (d=2) product.
    """
    g = f.grid
    power = 4 // g.d  # 4 for d=1, 2 for d=2; always an integer here
    if not dealias:
        vals = mu * np.abs(f.values) ** power * f.values
        return Field(g, vals)
    n, d = g.n, g.d
    spec = np.fft.fftn(f.values)
    big = _pad_spectrum(spec, n, d)
    ubig = np.fft.ifftn(big) * (2 ** d)
    fbig = mu * np.abs(ubig) ** power * ubig
    small = _truncate_spectrum(np.fft.fftn(fbig), n, d) / (2 ** d)
    return Field(g, np.fft.ifftn(small))


def _pad_spectrum(spec: np.ndarray, n: int, d: int) -> np.ndarray:
    """Embed FFT-ordered modes of an n-grid into a zero-padded 2n-grid."""
    half = n // 2
    idx = np.r_[0:half, 2 * n - half:2 * n]
    big = np.zeros((2 * n,) * d, dtype=np.complex128)
    if d == 1:
        big[idx] = spec
    else:
        big[np.ix_(idx, idx)] = spec
    return big


def _truncate_spectrum(spec_big: np.ndarray, n: int, d: int) -> np.ndarray:
    """Keep the n-grid modes of a 2n-grid spectrum (inverse of _pad_spectrum)."""
    half = n // 2
    nbig = spec_big.shape[0]
    idx = np.r_[0:half, nbig - half:nbig]
    if d == 1:
        return spec_big[idx].copy()
    return spec_big[np.ix_(idx, idx)].copy()


def commutator_error(f: Field, N: float, mu: int) -> float:
    """|| P_{<=N} F(f) - F(P_{<=N} f) ||_{L^2} with dealiased F."""
    if not N > 0:
        raise ValueError(f"frequency scale N must be positive, got {N}")
    a = project_low(nonlinearity(f, mu), N)
    b = nonlinearity(project_low(f, N), mu)
    return lp_norm(Field(f.grid, a.values - b.values), 2)
