"""Sampling grids on the periodic box [-L, L)^d and spectral transforms.

The box is sampled at n points per axis, x_j = -L + j*dx with dx = 2L/n.
The dual lattice carries frequencies xi_m = m*dxi with dxi = pi/L and
m in [-n/2, n/2).  Spectral coefficients approximate the continuum Fourier
integral

    fhat(xi) = integral f(x) exp(-i x.xi) dx,

i.e. the physical quadrature weight dx^d is folded into the forward
transform.  Because dxi * L = pi, shifting the DFT origin from 0 to -L is
exactly a parity factor (-1)^m per axis, so the convention is implemented
to rounding error, not to quadrature error.  Parseval then reads

    sum |f(x_j)|^2 dx^d = sum |fhat(xi_m)|^2 (dxi / 2 pi)^d

with equality to machine precision.  Coefficient arrays are stored in
monotone frequency order (most negative first), matching the axis returned
by :meth:`GridSpec.xi_axis`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "AliasingError",
    "Explicit",
    "Field",
    "FieldSpec",
    "FourierBump",
    "Gaussian",
    "GridSpec",
    "PlaneWave",
    "SpectralField",
    "SumOfBumps",
    "make_grid",
    "sample",
    "to_physical",
    "to_spectral",
]


class AliasingError(ValueError):
    """Spectral content was requested outside the open band (-xi_max, xi_max)^d."""


def _as_point(value: Union[float, Sequence[float]], d: int, name: str) -> np.ndarray:
    out = np.atleast_1d(np.asarray(value, dtype=float))
    if out.shape == (1,) and d > 1:
        out = np.repeat(out, d)
    if out.shape != (d,):
        raise ValueError(f"{name} must be a scalar or a length-{d} sequence, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} must be finite, got {out}")
    return out


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the sampling grid: dimension, points per axis, half-period."""

    d: int
    n: int
    L: float

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n < 16 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"L must be a positive finite number, got {self.L}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def xi_max(self) -> float:
        return self.n * self.dxi / 2.0

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @cached_property
    def x_axis(self) -> np.ndarray:
        """Physical sample positions along one axis, -L + j*dx."""
        return -self.L + self.dx * np.arange(self.n)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        """Frequency lattice along one axis in monotone order, m*dxi for m in [-n/2, n/2)."""
        return self.dxi * (np.arange(self.n) - self.n // 2)

    def x_mesh(self) -> tuple:
        """Broadcastable physical coordinates, one array per axis."""
        return tuple(np.meshgrid(*([self.x_axis] * self.d), indexing="ij", sparse=True))

    def xi_mesh(self) -> tuple:
        """Broadcastable frequency coordinates in the monotone layout."""
        return tuple(np.meshgrid(*([self.xi_axis] * self.d), indexing="ij", sparse=True))

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """|xi|^2 on the frequency lattice, monotone layout, shape (n,)*d."""
        out = np.zeros(self.shape)
        for axis_vals in self.xi_mesh():
            out = out + axis_vals**2
        return out

    @cached_property
    def _parity(self) -> np.ndarray:
        m = np.arange(self.n) - self.n // 2
        p = np.where(m % 2 == 0, 1.0, -1.0)
        out = p
        for _ in range(self.d - 1):
            out = np.multiply.outer(out, p)
        return out

    def __repr__(self) -> str:  # the default dataclass repr prints L unrounded
        return f"GridSpec(d={self.d}, n={self.n}, L={self.L:g})"


def make_grid(d: int, n: int, L: float) -> GridSpec:
    """Validate and build a :class:`GridSpec`."""
    return GridSpec(d=int(d), n=int(n), L=float(L))


@dataclass(frozen=True)
class Field:
    """Complex samples of a function on the physical grid (row-major, shape (n,)*d)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values.view(np.float64))):
            raise ValueError("field contains non-finite entries")
        object.__setattr__(self, "values", values)

    def l2(self) -> float:
        """Quadrature L2 norm, (sum |u|^2 dx^d)^(1/2)."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx**self.grid.d))

    def linf(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients on the frequency lattice, monotone layout."""

    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coefficients, dtype=np.complex128)
        if coeffs.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {coeffs.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(coeffs.view(np.float64))):
            raise ValueError("spectral field contains non-finite entries")
        object.__setattr__(self, "coefficients", coeffs)

    def l2(self) -> float:
        """Spectral L2 norm, (sum |fhat|^2 (dxi/2pi)^d)^(1/2); equals Field.l2 by Parseval."""
        w = (self.grid.dxi / (2.0 * np.pi)) ** self.grid.d
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2) * w))


def _fft_raw(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """Forward transform on a bare array (no validation); see module docstring."""
    return (grid.dx**grid.d) * grid._parity * np.fft.fftshift(np.fft.fftn(values))


def _ifft_raw(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(np.fft.ifftshift(coeffs * grid._parity)) / grid.dx**grid.d


def to_spectral(field: Field) -> SpectralField:
    """Forward transform; approximates the continuum integral against exp(-i x.xi)."""
    return SpectralField(field.grid, _fft_raw(field.grid, field.values))


def to_physical(spectral: SpectralField) -> Field:
    """Inverse transform; exact round-trip partner of :func:`to_spectral`."""
    return Field(spectral.grid, _ifft_raw(spectral.grid, spectral.coefficients))


@dataclass(frozen=True)
class Gaussian:
    """exp(-|x - center|^2 / (2 width^2)) * exp(i x.modulation)."""

    center: Union[float, Sequence[float]] = 0.0
    width: float = 1.0
    modulation: Union[float, Sequence[float]] = 0.0


@dataclass(frozen=True)
class FourierBump:
    """Smooth radial bump in frequency: fhat(xi) = amplitude * phi(|xi - center|/width).

    phi is the explicit glue bump (plateau radius 1, support radius 2), so the
    spectral support is the closed ball of radius 2*width about the center.
    """

    center: Union[float, Sequence[float]] = 0.0
    width: float = 1.0
    amplitude: complex = 1.0


@dataclass(frozen=True)
class SumOfBumps:
    bumps: tuple

    def __init__(self, bumps: Sequence[FourierBump]) -> None:
        object.__setattr__(self, "bumps", tuple(bumps))


@dataclass(frozen=True)
class PlaneWave:
    """exp(i x.frequency); PlaneWave(0) is the constant field 1."""

    frequency: Union[float, Sequence[float]] = 0.0


@dataclass(frozen=True)
class Explicit:
    """Sample a callable; it receives one broadcastable coordinate array per axis."""

    fn: Callable


FieldSpec = Union[Gaussian, FourierBump, SumOfBumps, PlaneWave, Explicit]


def _check_in_band(grid: GridSpec, point: np.ndarray, margin: float, what: str) -> None:
    limit = grid.xi_max
    if np.any(np.abs(point) + margin > limit * (1.0 + 1e-12)):
        raise AliasingError(
            f"{what} at {point} with spectral radius {margin:g} exceeds the band "
            f"(-{limit:g}, {limit:g})^{grid.d}"
        )


def _bump_coefficients(grid: GridSpec, bump: FourierBump) -> np.ndarray:
    from .decomp import make_bump  # local import; decomp depends on grid for types

    if not (bump.width > 0):
        raise ValueError(f"bump width must be positive, got {bump.width}")
    center = _as_point(bump.center, grid.d, "bump center")
    _check_in_band(grid, center, 2.0 * bump.width, "FourierBump")
    phi = make_bump()
    rho2 = np.zeros(grid.shape)
    for axis, axis_vals in enumerate(grid.xi_mesh()):
        rho2 = rho2 + (axis_vals - center[axis]) ** 2
    return bump.amplitude * phi.radial(np.sqrt(rho2) / bump.width)


def sample(grid: GridSpec, spec: FieldSpec) -> Field:
    """Realize a field specification on the grid.

    Spectral specs (FourierBump, SumOfBumps) are built on the frequency
    lattice and inverse-transformed; physical specs are sampled pointwise.
    Content outside the open band raises :class:`AliasingError`.
    """
    if isinstance(spec, Gaussian):
        if not (spec.width > 0):
            raise ValueError(f"Gaussian width must be positive, got {spec.width}")
        center = _as_point(spec.center, grid.d, "Gaussian center")
        modulation = _as_point(spec.modulation, grid.d, "Gaussian modulation")
        _check_in_band(grid, modulation, 0.0, "Gaussian modulation")
        mesh = grid.x_mesh()
        arg = np.zeros(grid.shape)
        phase = np.zeros(grid.shape)
        for axis in range(grid.d):
            arg = arg + (mesh[axis] - center[axis]) ** 2
            phase = phase + mesh[axis] * modulation[axis]
        return Field(grid, np.exp(-arg / (2.0 * spec.width**2)) * np.exp(1j * phase))
    if isinstance(spec, FourierBump):
        return to_physical(SpectralField(grid, _bump_coefficients(grid, spec)))
    if isinstance(spec, SumOfBumps):
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        for bump in spec.bumps:
            coeffs += _bump_coefficients(grid, bump)
        return to_physical(SpectralField(grid, coeffs))
    if isinstance(spec, PlaneWave):
        freq = _as_point(spec.frequency, grid.d, "plane wave frequency")
        _check_in_band(grid, freq, 0.0, "PlaneWave")
        mesh = grid.x_mesh()
        phase = np.zeros(grid.shape)
        for axis in range(grid.d):
            phase = phase + mesh[axis] * freq[axis]
        return Field(grid, np.exp(1j * phase))
    if isinstance(spec, Explicit):
        values = np.asarray(spec.fn(*grid.x_mesh()), dtype=np.complex128)
        values = np.broadcast_to(values, grid.shape).copy()
        return Field(grid, values)
    raise TypeError(f"unknown field spec {type(spec).__name__}")
