"""Symmetry group of the flow: scaling, translation, Galilean boost,
pseudoconformal sampling, plus a three-point PDE residual checker.

Shifts and boosts act spectrally (exact phase ramps), which restricts
boost frequencies to the lattice (pi/L)Z so the modulation stays
periodic.  Rescaling is exact for dyadic factors via zero padding /
subsampling of the trigonometric interpolant.
"""

from __future__ import annotations

import numpy as np

from .grid import Field, GridSpec
from .ground_state import GroundState


def _dyadic_log(lam: float) -> int:
    k = np.log2(lam)
    kr = round(k)
    if abs(k - kr) > 1e-12:
        raise ValueError(
            f"scale factor {lam} is not a power of two; only dyadic factors are "
            "exactly representable on the grid"
        )
    return int(kr)


def _zoom_out_once(vals: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Samples of f(2x) on the same grid, treating f as zero outside the box.

    Only |x| < L/2 maps into the box; the exact index map is restricted
    there so no periodic image is wrapped to the edges.
    """
    n = grid.n
    j = np.arange(n)
    m = 2 * j - n // 2
    inside = (m >= 0) & (m < n)
    out = np.zeros_like(vals)
    sel = np.where(inside, m, 0)
    gathered = vals.take(sel, axis=0)
    gathered[~inside] = 0.0
    out = gathered
    if grid.d == 2:
        gathered = out.take(sel, axis=1)
        gathered[:, ~inside] = 0.0
        out = gathered
    return out


def _zoom_in_once(vals: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Samples of f(x/2) on the same grid via spectral upsampling (exact)."""
    n, d = grid.n, grid.d
    spec = np.fft.fftn(vals)
    half = n // 2
    idx = np.r_[0:half, 2 * n - half:2 * n]
    big = np.zeros((2 * n,) * d, dtype=np.complex128)
    if d == 1:
        big[idx] = spec
    else:
        big[np.ix_(idx, idx)] = spec
    fine = np.fft.ifftn(big) * (2 ** d)
    sl = slice(half, half + n)
    return fine[sl] if d == 1 else fine[sl, sl]


def _central_half_mass_deficit(vals: np.ndarray, grid: GridSpec) -> float:
    """Mass fraction outside |x_i| < L/2 (lost or wrapped by a zoom step)."""
    dens = np.abs(vals) ** 2
    total = dens.sum()
    if total == 0:
        return 0.0
    n = grid.n
    inner = slice(n // 4, 3 * n // 4)
    core = dens[inner] if grid.d == 1 else dens[inner, inner]
    return float(1.0 - core.sum() / total)


def rescale(f: Field, lam: float) -> Field:
    """lambda^{d/2} f(lambda x); mass preserving, dyadic lambda only.

    Guards: zooming out (lam > 1) stretches the spectrum, so significant
    spectral mass beyond k_max/lam aliases and is rejected; either
    direction requires the field to live in the central half box so no
    mass is wrapped or truncated.
    """
    if not lam > 0:
        raise ValueError("scale factor must be positive")
    k = _dyadic_log(lam)
    g = f.grid
    vals = f.values
    if k > 0:
        spec = np.abs(np.fft.fftn(vals)) ** 2
        kabs = np.sqrt(g.k2_mesh())
        kcut = np.pi * g.n / (2.0 * g.L) / lam
        tail = spec[kabs > kcut].sum() / spec.sum()
        if tail > 1e-10:
            raise ValueError(
                f"rescale by {lam} would alias: fraction {tail:.2e} of the "
                f"spectrum lies beyond the shrunken Nyquist range"
            )
    for _ in range(abs(k)):
        deficit = _central_half_mass_deficit(vals, g)
        if deficit > 1e-10:
            raise ValueError(
                f"rescale by {lam} needs the field inside the central half "
                f"box; mass fraction {deficit:.2e} lies outside"
            )
        vals = _zoom_out_once(vals, g) if k > 0 else _zoom_in_once(vals, g)
    return Field(g, lam ** (g.d / 2.0) * vals)


def _as_lattice_xi(grid: GridSpec, xi0) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi0, dtype=float))
    if xi.size != grid.d:
        raise ValueError(f"boost frequency needs {grid.d} components")
    dk = grid.dk
    ratio = xi / dk
    if np.max(np.abs(ratio - np.round(ratio))) > 1e-9:
        nearest = np.round(ratio) * dk
        raise ValueError(
            f"boost frequency {xi.tolist()} is off the lattice (pi/L)Z; "
            f"nearest lattice point is {nearest.tolist()}"
        )
    return np.round(ratio) * dk


def translate(f: Field, shift) -> Field:
    """f(x - shift) via the spectral phase ramp."""
    g = f.grid
    sh = np.atleast_1d(np.asarray(shift, dtype=float))
    km = g.k_mesh()
    phase = np.exp(-1j * sum(k * s for k, s in zip(km, sh)))
    return Field(g, np.fft.ifftn(phase * np.fft.fftn(f.values)))


def galilean_boost(f: Field, xi0, t: float = 0.0) -> Field:
    """e^{-it|xi0|^2} e^{ix.xi0} f(x - 2 xi0 t), xi0 on the frequency lattice."""
    g = f.grid
    xi = _as_lattice_xi(g, xi0)
    out = f
    if t != 0.0:
        out = translate(out, 2.0 * xi * t)
    xm = g.x_mesh()
    phase = np.exp(1j * sum(x * c for x, c in zip(xm, xi)))
    vals = np.exp(-1j * t * float(np.dot(xi, xi))) * phase * out.values
    return Field(g, vals)


def pseudoconformal_sample(t: float, grid: GridSpec, q: GroundState) -> Field:
    """|t|^{-d/2} e^{i(|x|^2 - 4)/(4t)} Q(x/t): the threshold-mass blowup solution."""
    if t == 0.0:
        raise ValueError("the sample is singular at t = 0")
    if q.profile is None:
        raise ValueError("ground state carries no radial profile to resample")
    d = grid.d
    xm = grid.x_mesh()
    r = np.sqrt(sum(x * x for x in xm))
    amp = np.abs(t) ** (-d / 2.0) * q.profile(r / t)
    r2 = sum(x * x for x in xm)
    vals = amp * np.exp(1j * (r2 - 4.0) / (4.0 * t))
    return Field(grid, vals)


def equation_residual(f_minus: Field, f0: Field, f_plus: Field, dt: float, mu: int) -> float:
    """|| i (f+ - f-)/(2 dt) + Lap f0 - mu |f0|^{4/d} f0 ||_2 / ||f0||_2."""
    g = f0.grid
    p = 4 // g.d
    lap = np.fft.ifftn(-g.k2_mesh() * np.fft.fftn(f0.values))
    res = (
        1j * (f_plus.values - f_minus.values) / (2.0 * dt)
        + lap
        - mu * np.abs(f0.values) ** p * f0.values
    )
    w = g.h ** g.d
    num = np.sqrt(w * np.sum(np.abs(res) ** 2))
    den = np.sqrt(w * np.sum(np.abs(f0.values) ** 2))
    return float(num / den)
