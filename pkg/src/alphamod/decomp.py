"""Smooth frequency decompositions: dyadic shells and alpha-indexed pieces.

Everything is built from one explicit glue bump.  With

    g(t) = exp(-1/t) for t > 0, 0 otherwise,
    psi(t) = g(1-t) / (g(1-t) + g(t))   (1 for t <= 0, 0 for t >= 1),

the radial profile is phi(xi) = psi(|xi| - 1): identically 1 on |xi| <= 1,
supported in |xi| < 2, smooth in between.

The alpha family places a piece at every integer index k with center
c_k = <k>^(alpha/(1-alpha)) * k and radius r_k = C * <k>^(alpha/(1-alpha)),
where <k> = (1 + |k|^2)^(1/2).  Normalizing by the pointwise sum gives a
partition of unity eta_k on the covered band.  alpha = 0 reproduces the
uniform (translation-invariant) decomposition; alpha -> 1 approaches the
dyadic one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .grid import Field, GridSpec, SpectralField

__all__ = [
    "AlphaIndex",
    "BumpProfile",
    "CoverageError",
    "DecompositionSymbols",
    "alpha_center",
    "alpha_radius",
    "alpha_symbols",
    "apply_projector",
    "calibrate_constant",
    "dyadic_symbols",
    "eta_alpha",
    "make_bump",
    "partition_residual",
    "phi_alpha",
]

AlphaIndex = Tuple[int, ...]

#: candidate overlap constants tried in order during calibration
_CALIBRATION_LADDER = tuple(1.0 + 0.25 * j for j in range(29))
_COVERAGE_TARGET = 0.5


class CoverageError(ValueError):
    """The alpha family fails to cover part of the band."""

    def __init__(self, message: str, uncovered: Optional[np.ndarray] = None,
                 suggested_constant: Optional[float] = None) -> None:
        super().__init__(message)
        self.uncovered = uncovered
        self.suggested_constant = suggested_constant


def _glue(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    # exp(-1/t) underflows harmlessly to 0 for tiny positive t
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


@dataclass(frozen=True)
class BumpProfile:
    """The explicit radial bump and its one-sided glue function."""

    plateau: float = 1.0
    support: float = 2.0

    def psi(self, t) -> np.ndarray:
        """Smooth transition: 1 for t <= 0, 0 for t >= 1."""
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        out[t <= 0.0] = 1.0
        out[t >= 1.0] = 0.0
        mid = (t > 0.0) & (t < 1.0)
        up = _glue(1.0 - t[mid])
        down = _glue(t[mid])
        out[mid] = up / (up + down)
        return out

    def radial(self, rho) -> np.ndarray:
        """phi as a function of |xi|: 1 on [0,1], 0 from 2 on."""
        return self.psi(np.asarray(rho, dtype=float) - 1.0)

    def at(self, points) -> np.ndarray:
        """phi evaluated at d-dimensional points (last axis = component)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            return self.radial(np.abs(pts))
        return self.radial(np.sqrt(np.sum(pts**2, axis=-1)))


def make_bump() -> BumpProfile:
    return BumpProfile()


_PROFILE = BumpProfile()


def _index_weight(k: Sequence[int]) -> float:
    """<k> = (1 + |k|^2)^(1/2)."""
    return math.sqrt(1.0 + sum(float(c) ** 2 for c in k))


def _scale_exponent(alpha: float) -> float:
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return alpha / (1.0 - alpha)


def alpha_center(alpha: float, k: Sequence[int]) -> np.ndarray:
    """Piece center <k>^(alpha/(1-alpha)) * k."""
    h = _index_weight(k) ** _scale_exponent(alpha)
    return h * np.asarray(k, dtype=float)


def alpha_radius(alpha: float, C: float, k: Sequence[int]) -> float:
    """Piece radius C * <k>^(alpha/(1-alpha)); spectral support is twice this."""
    return C * _index_weight(k) ** _scale_exponent(alpha)


def phi_alpha(alpha: float, C: float, k: Sequence[int], points) -> np.ndarray:
    """Unnormalized piece symbol phi((xi - c_k) / r_k) at arbitrary points."""
    pts = np.asarray(points, dtype=float)
    center = alpha_center(alpha, k)
    radius = alpha_radius(alpha, C, k)
    if pts.ndim <= 1 and len(k) == 1:
        return _PROFILE.radial(np.abs(pts - center[0]) / radius)
    return _PROFILE.radial(np.sqrt(np.sum((pts - center) ** 2, axis=-1)) / radius)


def _max_axis_index(alpha: float, C: float, bound: float, reach_factor: float) -> int:
    """Smallest m with h_k (|k|_inf - reach_factor*C) > bound for every |k|_inf = m."""
    p = _scale_exponent(alpha)
    m = 0
    while True:
        m += 1
        reach = (1.0 + m * m) ** (p / 2.0) * (m - reach_factor * C)
        if reach > bound:
            return m
        if m > 10_000_000:
            raise RuntimeError("alpha index enumeration did not terminate")


def _indices_reaching(alpha: float, C: float, bound: float, d: int,
                      reach_factor: float = 2.0) -> list:
    """Integer indices k with |c_k|_inf <= bound + reach_factor * C * h_k.

    reach_factor 2 captures every piece whose (smooth) support can intersect
    the box |xi|_inf <= bound; callers interested in the sharp boxes of half
    width C pass reach_factor 1.
    """
    p = _scale_exponent(alpha)
    m = _max_axis_index(alpha, C, bound, reach_factor)
    rng = np.arange(-m, m + 1)
    mesh = np.meshgrid(*([rng] * d), indexing="ij")
    lattice = np.stack([g.ravel() for g in mesh], axis=-1)
    h = (1.0 + np.sum(lattice.astype(float) ** 2, axis=1)) ** (p / 2.0)
    keep = np.all(np.abs(h[:, None] * lattice) <= bound + reach_factor * C * h[:, None], axis=1)
    return [tuple(int(c) for c in row) for row in lattice[keep]]


def _indices_near_axis(alpha: float, C: float, bound: float, d: int) -> list:
    """Indices whose support can reach the first-axis segment |xi_1| <= bound."""
    p = _scale_exponent(alpha)
    m = _max_axis_index(alpha, C, bound, 2.0)
    cross = int(math.floor(2.0 * C))
    axes = [np.arange(-m, m + 1)] + [np.arange(-cross, cross + 1)] * (d - 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    lattice = np.stack([g.ravel() for g in mesh], axis=-1)
    h = (1.0 + np.sum(lattice.astype(float) ** 2, axis=1)) ** (p / 2.0)
    reach = 2.0 * C * h
    keep = np.abs(h * lattice[:, 0]) <= bound + reach
    for i in range(1, d):
        keep &= np.abs(h * lattice[:, i]) <= reach
    return [tuple(int(c) for c in row) for row in lattice[keep]]


def eta_alpha(alpha: float, C: float, k: Sequence[int], points) -> np.ndarray:
    """Normalized partition symbol phi_k / sum_l phi_l at arbitrary points.

    Works off-lattice; the normalizing sum runs over every piece whose
    support can reach the evaluation points.
    """
    pts = np.asarray(points, dtype=float)
    d = len(k)
    flat = pts.reshape(-1) if d == 1 and pts.ndim <= 1 else pts.reshape(-1, d)
    bound = float(np.max(np.abs(flat))) if flat.size else 0.0
    total = np.zeros(flat.shape[0] if flat.ndim else 1)
    for l in _indices_reaching(alpha, C, bound, d):
        total += phi_alpha(alpha, C, l, flat)
    if np.any(total <= 0.0):
        bad = flat[np.argmin(total)]
        raise CoverageError(f"no piece covers xi = {bad}", uncovered=np.atleast_1d(bad),
                            suggested_constant=C + 0.25)
    values = phi_alpha(alpha, C, k, flat) / total
    return values.reshape(pts.shape if d == 1 else pts.shape[:-1])


def calibrate_constant(alpha: float, d: int) -> float:
    """Smallest C in {1, 1.25, 1.5, ...} whose coverage floor reaches 0.5.

    The floor is measured on a dense scan of 1e4 points along the first
    frequency axis of the band |xi| <= 64; pieces are radial and centered on
    the rescaled integer lattice, so the on-axis floor is the binding one.
    Results are cached per (alpha, d).
    """
    key = (round(float(alpha), 12), int(d))
    if key in _CALIBRATION_CACHE:
        return _CALIBRATION_CACHE[key]
    scan = np.linspace(-64.0, 64.0, 10_000)
    points = np.zeros((scan.size, d))
    points[:, 0] = scan
    pts = scan if d == 1 else points
    for C in _CALIBRATION_LADDER:
        total = np.zeros(scan.size)
        for l in _indices_near_axis(alpha, C, 64.0, d):
            total += phi_alpha(alpha, C, l, pts)
        if float(total.min()) >= _COVERAGE_TARGET:
            _CALIBRATION_CACHE[key] = C
            return C
    raise CoverageError(
        f"no constant up to {_CALIBRATION_LADDER[-1]} covers the band for alpha={alpha}",
        suggested_constant=_CALIBRATION_LADDER[-1] + 0.25,
    )


_CALIBRATION_CACHE: dict = {}


@dataclass(frozen=True)
class DecompositionSymbols:
    """A family of frequency multipliers living on one grid's lattice.

    Multipliers are stored as (slices, block) pairs covering each piece's
    bounding box; :meth:`multiplier` assembles a dense array on demand.
    For the alpha family the stored blocks are the normalized eta symbols.
    """

    kind: str
    grid: GridSpec
    indices: tuple
    slices: tuple = field(repr=False)
    blocks: tuple = field(repr=False)
    alpha: Optional[float] = None
    C: Optional[float] = None
    coverage_floor: Optional[float] = None
    levels: Optional[int] = None

    def __len__(self) -> int:
        return len(self.indices)

    def index_position(self, index) -> int:
        try:
            return self.indices.index(index)
        except ValueError:
            raise KeyError(f"index {index} is not part of this {self.kind} family") from None

    def multiplier(self, index) -> np.ndarray:
        pos = self.index_position(index)
        out = np.zeros(self.grid.shape)
        out[self.slices[pos]] = self.blocks[pos]
        return out

    def partition_sum(self) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        for sl, block in zip(self.slices, self.blocks):
            out[sl] += block
        return out

    def piece_mass(self, spectral: SpectralField, index) -> float:
        """L2 norm of the multiplier applied to a spectral field."""
        pos = self.index_position(index)
        sl = self.slices[pos]
        w = (self.grid.dxi / (2.0 * np.pi)) ** self.grid.d
        chunk = self.blocks[pos] * spectral.coefficients[sl]
        return float(np.sqrt(np.sum(np.abs(chunk) ** 2) * w))

    def center(self, index) -> np.ndarray:
        if self.kind != "alpha":
            raise ValueError("centers are defined for the alpha family only")
        return alpha_center(self.alpha, index)

    def radius(self, index) -> float:
        if self.kind != "alpha":
            raise ValueError("radii are defined for the alpha family only")
        return alpha_radius(self.alpha, self.C, index)


def dyadic_symbols(grid: GridSpec) -> DecompositionSymbols:
    """Dyadic shell multipliers phi_0, phi_1, ..., phi_J on the lattice.

    phi_0 = phi, phi_j = phi(2^-j xi) - phi(2^-j+1 xi); the sum telescopes to
    phi(2^-J xi), so J is the smallest level whose plateau 2^J reaches the
    largest lattice |xi|_2 (the box corner, sqrt(d) * xi_max).
    """
    rho = np.sqrt(grid.xi_squared)
    target = float(rho.max())
    J = 0
    while 2.0**J < target * (1.0 - 1e-15):
        J += 1
    full = (slice(None),) * grid.d
    slices = []
    blocks = []
    prev = _PROFILE.radial(rho)  # phi(xi) at level 0
    slices.append(full)
    blocks.append(prev)
    for j in range(1, J + 1):
        cur = _PROFILE.radial(rho / 2.0**j)
        slices.append(full)
        blocks.append(cur - prev)
        prev = cur
    return DecompositionSymbols(
        kind="dyadic", grid=grid, indices=tuple(range(J + 1)),
        slices=tuple(slices), blocks=tuple(blocks), levels=J,
    )


def _axis_window(axis: np.ndarray, lo: float, hi: float) -> slice:
    start = int(np.searchsorted(axis, lo, side="left"))
    stop = int(np.searchsorted(axis, hi, side="right"))
    return slice(start, stop)


def alpha_symbols(grid: GridSpec, alpha: float, C: Optional[float] = None) -> DecompositionSymbols:
    """Normalized alpha partition of unity on the grid's frequency lattice.

    Includes every index whose center satisfies |c_k|_inf <= xi_max + 2 r_k.
    C defaults to the calibrated overlap constant for (alpha, d).  Raises
    :class:`CoverageError` if some lattice point is left uncovered.
    """
    if C is None:
        C = calibrate_constant(alpha, grid.d)
    indices = _indices_reaching(alpha, float(C), grid.xi_max, grid.d)
    indices.sort()
    axis = grid.xi_axis
    slices = []
    raw_blocks = []
    for k in indices:
        center = alpha_center(alpha, k)
        reach = 2.0 * alpha_radius(alpha, C, k)
        sl = tuple(_axis_window(axis, center[i] - reach, center[i] + reach) for i in range(grid.d))
        mesh = np.meshgrid(*(axis[sl[i]] for i in range(grid.d)), indexing="ij", sparse=True)
        rho2 = np.zeros(tuple(s.stop - s.start for s in sl))
        for i in range(grid.d):
            rho2 = rho2 + (mesh[i] - center[i]) ** 2
        block = _PROFILE.radial(np.sqrt(rho2) / alpha_radius(alpha, C, k))
        slices.append(sl)
        raw_blocks.append(block)
    total = np.zeros(grid.shape)
    for sl, block in zip(slices, raw_blocks):
        total[sl] += block
    floor = float(total.min())
    if floor < 1e-6:
        flat = int(np.argmin(total))
        point = np.array([grid.xi_axis[i] for i in np.unravel_index(flat, grid.shape)])
        raise CoverageError(
            f"alpha={alpha}, C={C} leaves xi = {point} uncovered; try C >= {C + 0.25}",
            uncovered=point, suggested_constant=C + 0.25,
        )
    blocks = tuple(block / total[sl] for sl, block in zip(slices, raw_blocks))
    return DecompositionSymbols(
        kind="alpha", grid=grid, indices=tuple(indices), slices=tuple(slices),
        blocks=blocks, alpha=float(alpha), C=float(C), coverage_floor=floor,
    )


def apply_projector(target: Union[Field, SpectralField], symbols: DecompositionSymbols,
                    index) -> Union[Field, SpectralField]:
    """Multiply by one family symbol; physical fields make a spectral round trip.

    The smooth projectors are not idempotent (eta_k^2 < eta_k on overlaps),
    which callers relying on true projections must account for.
    """
    from .grid import to_physical, to_spectral

    pos = symbols.index_position(index)
    sl = symbols.slices[pos]
    spectral = to_spectral(target) if isinstance(target, Field) else target
    if spectral.grid != symbols.grid:
        raise ValueError("field grid does not match the symbol family's grid")
    out = np.zeros_like(spectral.coefficients)
    out[sl] = symbols.blocks[pos] * spectral.coefficients[sl]
    projected = SpectralField(spectral.grid, out)
    return to_physical(projected) if isinstance(target, Field) else projected


def partition_residual(symbols: DecompositionSymbols) -> float:
    """max over the lattice of |sum of multipliers - 1| (dyadic: on the whole
    lattice; alpha: on the covered band, which the constructor guarantees is
    the whole lattice)."""
    return float(np.max(np.abs(symbols.partition_sum() - 1.0)))
