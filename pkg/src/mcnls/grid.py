"""Periodic spectral grid standing in for R^d (d = 1 or 2).

The box is [-L, L)^d sampled at n points per axis (n a power of two),
h = 2L/n.  The forward transform is normalized to approximate the
continuum Fourier transform

    uhat(k) ~ integral of u(x) exp(-i k.x) dx,

so Fourier-side sums with weight (2L)^{-d} approximate (2pi)^{-d}
integrals in k.  All fields carry their grid; transforms are pure
functions of immutable inputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

SNAPSHOT_MAGIC = b"MCNLS1"
SNAPSHOT_VERSION = 1


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the periodic box: dimension, points per axis, half-width."""

    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or not _is_power_of_two(int(self.n)):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"half-width L must be positive, got {self.L}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def npoints(self) -> int:
        return self.n ** self.d

    @property
    def axis_x(self) -> np.ndarray:
        """Physical coordinates along one axis: -L + i*h."""
        return -self.L + self.h * np.arange(self.n)

    @property
    def axis_k(self) -> np.ndarray:
        """Wavenumbers along one axis in FFT order, lattice (pi/L)*Z."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.h)

    @property
    def dk(self) -> float:
        return np.pi / self.L

    def x_mesh(self) -> tuple:
        """Tuple of d coordinate arrays with shape (n,)*d."""
        ax = self.axis_x
        if self.d == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))

    def k_mesh(self) -> tuple:
        ak = self.axis_k
        if self.d == 1:
            return (ak,)
        return tuple(np.meshgrid(ak, ak, indexing="ij"))

    def k2_mesh(self) -> np.ndarray:
        """|k|^2 on the frequency lattice, FFT order."""
        km = self.k_mesh()
        return sum(k * k for k in km)

    def _phase(self) -> np.ndarray:
        # e^{i k L} per axis reduces to (-1)^index for the box [-L, L).
        p = np.where(np.arange(self.n) % 2 == 0, 1.0, -1.0)
        if self.d == 1:
            return p
        return np.outer(p, p)


def make_grid(d: int, n: int, L: float) -> GridSpec:
    """Build the periodic spectral grid for the box [-L, L)^d."""
    return GridSpec(d, n, L)


@dataclass(frozen=True)
class Field:
    """Complex samples u(x) on a GridSpec, row-major, shape (n,)*d."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            if v.size == self.grid.npoints:
                v = v.reshape(self.grid.shape)
            else:
                raise ValueError(
                    f"values size {v.size} does not match grid {self.grid.shape}"
                )
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValueError("field samples must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SpectralField:
    """Fourier modes with the continuum normalization (includes h^d)."""

    grid: GridSpec
    modes: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.modes, dtype=np.complex128)
        if m.shape != self.grid.shape:
            raise ValueError("modes shape does not match grid")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "modes", m)


def to_spectral(f: Field) -> SpectralField:
    """Forward transform approximating uhat(k) = integral u e^{-ikx} dx."""
    g = f.grid
    modes = (g.h ** g.d) * g._phase() * np.fft.fftn(f.values)
    return SpectralField(g, modes)


def to_physical(sf: SpectralField) -> Field:
    """Inverse of to_spectral."""
    g = sf.grid
    vals = np.fft.ifftn(sf.modes * g._phase()) / (g.h ** g.d)
    return Field(g, vals)


def lp_norm(f: Field, p: float) -> float:
    """Rectangle-rule L^p norm, (h^d sum |f|^p)^{1/p}; p = inf gives max modulus."""
    if p != np.inf and p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    if p == np.inf:
        return float(a.max())
    g = f.grid
    return float((g.h ** g.d * np.sum(a ** p)) ** (1.0 / p))


def spectral_l2_sq(sf: SpectralField) -> float:
    """(2pi)^{-d} integral |uhat|^2 dk by the frequency rectangle rule."""
    g = sf.grid
    w = (2.0 * g.L) ** (-g.d)
    return float(w * np.sum(np.abs(sf.modes) ** 2))


def gradient_norm_sq(f: Field) -> float:
    """integral |grad f|^2 dx evaluated spectrally; exact for band-limited f."""
    g = f.grid
    sf = to_spectral(f)
    w = (2.0 * g.L) ** (-g.d)
    return float(w * np.sum(g.k2_mesh() * np.abs(sf.modes) ** 2))


def spectral_derivative(f: Field, axis: int) -> Field:
    """Spectral partial derivative; the odd Nyquist mode is zeroed."""
    g = f.grid
    k = g.k_mesh()[axis]
    mult = 1j * k
    # zero the unpaired Nyquist mode along this axis
    nyq = np.abs(np.abs(k) - np.pi * g.n / (2.0 * g.L)) < 1e-12
    mult = np.where(nyq, 0.0, mult)
    vals = np.fft.ifftn(mult * np.fft.fftn(f.values))
    return Field(g, vals)


def laplacian(f: Field) -> Field:
    g = f.grid
    vals = np.fft.ifftn(-g.k2_mesh() * np.fft.fftn(f.values))
    return Field(g, vals)


def boundary_mass_fraction(f: Field, frac: float = 0.05) -> float:
    """Fraction of the mass in the outermost `frac` annulus of the box."""
    g = f.grid
    cut = g.L * (1.0 - frac)
    xm = g.x_mesh()
    outer = np.zeros(g.shape, dtype=bool)
    for x in xm:
        outer |= np.abs(x) >= cut
    dens = np.abs(f.values) ** 2
    total = dens.sum()
    if total == 0.0:
        return 0.0
    return float(dens[outer].sum() / total)


BOUNDARY_MASS_BUDGET = 1e-10
BOUNDARY_MASS_WARN = 1e-8


def write_snapshot(f: Field, path) -> None:
    """Write the bit-exact MCNLS1 binary snapshot."""
    g = f.grid
    flat = np.ascontiguousarray(f.values).reshape(-1)
    inter = np.empty(2 * flat.size, dtype="<f8")
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<B", SNAPSHOT_VERSION))
        fh.write(struct.pack("<B", g.d))
        fh.write(struct.pack("<I", g.n))
        fh.write(struct.pack("<d", g.L))
        fh.write(inter.tobytes())


def read_snapshot(path) -> Field:
    with open(path, "rb") as fh:
        magic = fh.read(6)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"bad snapshot magic {magic!r}")
        (version,) = struct.unpack("<B", fh.read(1))
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        (d,) = struct.unpack("<B", fh.read(1))
        (n,) = struct.unpack("<I", fh.read(4))
        (L,) = struct.unpack("<d", fh.read(8))
        grid = make_grid(d, n, L)
        raw = np.frombuffer(fh.read(16 * grid.npoints), dtype="<f8")
        if raw.size != 2 * grid.npoints:
            raise ValueError("snapshot truncated")
        vals = raw[0::2] + 1j * raw[1::2]
        return Field(grid, vals.reshape(grid.shape))
