"""Frequency-space norms: alpha-modulation, Besov, Sobolev, Lebesgue, p-variation.

The alpha-modulation norm is the weighted l1 of per-box L2 masses,

    ||f|| = sum_k <k>^(s/(1-alpha)) * ||fhat||_{L2(Q_k)},
    Q_k = <k>^(alpha/(1-alpha)) (k + [-C, C]^d),

with closed boxes: a lattice point lying in several boxes contributes to each
of them (the overlap convention is part of the definition, not an artifact).
The smooth variant replaces the box indicator with the normalized partition
symbol eta_k.  All spectral masses carry the (dxi/2pi)^d Plancherel weight,
so modulation-type norms with s = 0 dominate the plain L2 norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .decomp import DecompositionSymbols, _index_weight, _indices_reaching, alpha_symbols
from .grid import Field, GridSpec, SpectralField, to_spectral
from .report import ExperimentReport

__all__ = [
    "NormReport",
    "ZeroModeError",
    "besov_norm",
    "dyadic_shell_masses",
    "embedding_report",
    "lp_norm",
    "modulation_norm",
    "norm_report",
    "p_variation",
    "p_variation_reference",
    "sobolev_norm",
]


class ZeroModeError(ValueError):
    """Negative-order homogeneous norm requested for a field with a zero mode."""


FieldLike = Union[Field, SpectralField]


def _ensure_spectral(f: FieldLike) -> SpectralField:
    if isinstance(f, Field):
        return to_spectral(f)
    if isinstance(f, SpectralField):
        return f
    raise TypeError(f"expected Field or SpectralField, got {type(f).__name__}")


def _plancherel_weight(grid: GridSpec) -> float:
    return (grid.dxi / (2.0 * np.pi)) ** grid.d


def _box_slices(grid: GridSpec, alpha: float, C: float, k) -> tuple:
    h = _index_weight(k) ** (alpha / (1.0 - alpha))
    axis = grid.xi_axis
    out = []
    for i in range(grid.d):
        lo = h * (k[i] - C)
        hi = h * (k[i] + C)
        out.append(slice(int(np.searchsorted(axis, lo, side="left")),
                         int(np.searchsorted(axis, hi, side="right"))))
    return tuple(out)


def _modulation_series(spectral: SpectralField, s: float, alpha: float, variant: str,
                       C: Optional[float], symbols: Optional[DecompositionSymbols]):
    """Per-index (k, weight, mass) triples, ordered by (<k>, k)."""
    grid = spectral.grid
    if variant not in ("sharp", "smooth"):
        raise ValueError(f"variant must be 'sharp' or 'smooth', got {variant!r}")
    if variant == "smooth":
        if symbols is None:
            symbols = alpha_symbols(grid, alpha, C)
        elif symbols.kind != "alpha" or symbols.grid != grid or symbols.alpha != alpha:
            raise ValueError("symbol family does not match the requested norm")
        indices = list(symbols.indices)
    else:
        if symbols is not None and symbols.kind == "alpha" and symbols.alpha == alpha:
            C = symbols.C
        if C is None:
            from .decomp import calibrate_constant

            C = calibrate_constant(alpha, grid.d)
        indices = _indices_reaching(alpha, float(C), grid.xi_max, grid.d, reach_factor=1.0)
    indices.sort(key=lambda k: (_index_weight(k), k))
    weight = _plancherel_weight(grid)
    coeffs_sq = np.abs(spectral.coefficients) ** 2
    series = []
    for k in indices:
        if variant == "smooth":
            pos = symbols.index_position(k)
            sl = symbols.slices[pos]
            mass_sq = float(np.sum(symbols.blocks[pos] ** 2 * coeffs_sq[sl])) * weight
        else:
            sl = _box_slices(grid, alpha, float(C), k)
            mass_sq = float(np.sum(coeffs_sq[sl])) * weight
        series.append((k, _index_weight(k) ** (s / (1.0 - alpha)), math.sqrt(mass_sq)))
    return series, float(C if variant == "sharp" else symbols.C)


def modulation_norm(f: FieldLike, s: float, alpha: float, variant: str = "sharp",
                    C: Optional[float] = None,
                    symbols: Optional[DecompositionSymbols] = None) -> float:
    """Weighted l1 over alpha boxes of spectral L2 masses (see module docstring)."""
    spectral = _ensure_spectral(f)
    series, _ = _modulation_series(spectral, s, alpha, variant, C, symbols)
    return float(sum(w * m for _, w, m in series))


def dyadic_shell_masses(f: FieldLike) -> List[Tuple[int, float]]:
    """L2 mass per dyadic annulus: R_0 = {|xi| <= 1}, R_j = {2^(j-1) <= |xi| < 2^j}."""
    spectral = _ensure_spectral(f)
    grid = spectral.grid
    rho = np.sqrt(grid.xi_squared)
    weight = _plancherel_weight(grid)
    coeffs_sq = np.abs(spectral.coefficients) ** 2
    top = float(rho.max())
    levels = 0
    while 2.0**levels < top * (1.0 + 1e-15):
        levels += 1
    out = []
    for j in range(levels + 1):
        mask = rho <= 1.0 if j == 0 else (rho >= 2.0 ** (j - 1)) & (rho < 2.0**j)
        mass = math.sqrt(float(np.sum(coeffs_sq[mask])) * weight)
        out.append((j, mass))
    return out


def besov_norm(f: FieldLike, s: float, q: float = 1.0) -> float:
    """Dyadic-annulus norm: lq over j of 2^(js) ||fhat||_{L2(R_j)}."""
    arr = np.asarray([2.0 ** (j * s) * mass for j, mass in dyadic_shell_masses(f)])
    if q == 1.0:
        return float(arr.sum())
    if np.isinf(q):
        return float(arr.max())
    return float(np.sum(arr**q) ** (1.0 / q))


def sobolev_norm(f: FieldLike, s: float, homogeneous: bool = False) -> float:
    """H^s (or homogeneous) norm by spectral quadrature."""
    spectral = _ensure_spectral(f)
    grid = spectral.grid
    coeffs_sq = np.abs(spectral.coefficients) ** 2
    weight = _plancherel_weight(grid)
    if not homogeneous:
        sym = (1.0 + grid.xi_squared) ** s
        return float(math.sqrt(np.sum(sym * coeffs_sq) * weight))
    rho_sq = grid.xi_squared
    zero = rho_sq == 0.0
    if s < 0 and np.any(zero):
        c0 = math.sqrt(float(np.sum(coeffs_sq[zero])))
        scale = math.sqrt(float(coeffs_sq.max()))
        if c0 > 1e-12 * max(scale, 1e-300):
            raise ZeroModeError(
                f"homogeneous norm of order {s} is infinite: zero mode has amplitude {c0:.3e}"
            )
    sym = np.zeros_like(rho_sq)
    nz = ~zero
    sym[nz] = rho_sq[nz] ** s
    if s == 0:
        sym[zero] = 1.0
    return float(math.sqrt(np.sum(sym * coeffs_sq) * weight))


def lp_norm(f: FieldLike, p: float) -> float:
    """Physical-space L^p quadrature norm; p = inf is the grid max."""
    if isinstance(f, SpectralField):
        from .grid import to_physical

        f = to_physical(f)
    if p == np.inf:
        return f.linf()
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    g = f.grid
    return float((np.sum(np.abs(f.values) ** p) * g.dx**g.d) ** (1.0 / p))


def _default_distance(a, b) -> float:
    if isinstance(a, Field) and isinstance(b, Field):
        return float(np.sqrt(np.sum(np.abs(a.values - b.values) ** 2) * a.grid.dx**a.grid.d))
    if isinstance(a, SpectralField) and isinstance(b, SpectralField):
        w = _plancherel_weight(a.grid)
        return float(np.sqrt(np.sum(np.abs(a.coefficients - b.coefficients) ** 2) * w))
    a_arr = np.asarray(a, dtype=complex)
    b_arr = np.asarray(b, dtype=complex)
    return float(np.linalg.norm((a_arr - b_arr).ravel()))


def p_variation(samples: Sequence, p: float,
                distance: Optional[Callable] = None) -> float:
    """Exact p-variation of a sampled path: (sup over increasing subsets of
    sum d(x_i, x_j)^p)^(1/p), by the O(n^2) dynamic program."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    samples = list(samples)
    n = len(samples)
    if n < 2:
        raise ValueError(f"p-variation needs at least 2 snapshots, got {n}")
    dist = distance or _default_distance
    dmat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dmat[i, j] = dist(samples[i], samples[j])
    best = np.zeros(n)
    for j in range(1, n):
        best[j] = max(best[i] + dmat[i, j] ** p for i in range(j))
    return float(np.max(best) ** (1.0 / p))


def p_variation_reference(samples: Sequence, p: float,
                          distance: Optional[Callable] = None) -> float:
    """Brute-force enumeration of every increasing subset; obviously correct,
    exponential cost, kept for validating the dynamic program on short paths."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    samples = list(samples)
    n = len(samples)
    if n < 2:
        raise ValueError(f"p-variation needs at least 2 snapshots, got {n}")
    dist = distance or _default_distance
    best = 0.0
    for size in range(2, n + 1):
        for subset in combinations(range(n), size):
            total = sum(
                dist(samples[subset[i]], samples[subset[i + 1]]) ** p
                for i in range(size - 1)
            )
            best = max(best, total)
    return float(best ** (1.0 / p))


@dataclass
class NormReport:
    """Every implemented norm of one field, with truncation diagnostics.

    partial_sums holds the running modulation (sharp) sum in the canonical
    (<k>, k) order, so the tail behavior of the series is visible; the
    sharp/smooth ratio is recorded as a cross-check, not asserted.
    """

    grid: GridSpec
    s: float
    alpha: float
    C: float
    l2: float
    linf: float
    modulation_sharp: float
    modulation_smooth: float
    besov: float
    sobolev: float
    sobolev_homogeneous: Optional[float]
    zero_mode_note: str
    sharp_smooth_ratio: float
    max_box_index: int
    max_dyadic_level: int
    series: List[dict] = field(default_factory=list)
    partial_sums: List[float] = field(default_factory=list)

    @property
    def ratio_in_expected_band(self) -> bool:
        return 0.1 <= self.sharp_smooth_ratio <= 10.0


def norm_report(f: FieldLike, s: float, alpha: float, C: Optional[float] = None,
                symbols: Optional[DecompositionSymbols] = None) -> NormReport:
    """Compute the full battery of norms for one field."""
    spectral = _ensure_spectral(f)
    grid = spectral.grid
    sharp_series, C_used = _modulation_series(spectral, s, alpha, "sharp", C, symbols)
    smooth_series, _ = _modulation_series(spectral, s, alpha, "smooth", C_used, symbols)
    smooth_by_index = {k: w * m for k, w, m in smooth_series}
    series = []
    partial = []
    running = 0.0
    for k, w, m in sharp_series:
        running += w * m
        partial.append(running)
        series.append({
            "index": k,
            "weight": w,
            "sharp_mass": m,
            "sharp_term": w * m,
            "smooth_term": smooth_by_index.get(k, 0.0),
            "partial_sum": running,
        })
    sharp_total = running
    smooth_total = sum(term for term in smooth_by_index.values())
    try:
        homogeneous = sobolev_norm(spectral, s, homogeneous=True)
        note = ""
    except ZeroModeError as err:
        homogeneous = None
        note = str(err)
    rho = np.sqrt(grid.xi_squared)
    top = float(rho.max())
    levels = 0
    while 2.0**levels < top * (1.0 + 1e-15):
        levels += 1
    ratio = sharp_total / smooth_total if smooth_total > 0 else np.inf
    return NormReport(
        grid=grid, s=s, alpha=alpha, C=C_used,
        l2=spectral.l2(),
        linf=lp_norm(spectral, np.inf),
        modulation_sharp=sharp_total,
        modulation_smooth=smooth_total,
        besov=besov_norm(spectral, s),
        sobolev=sobolev_norm(spectral, s),
        sobolev_homogeneous=homogeneous,
        zero_mode_note=note,
        sharp_smooth_ratio=float(ratio),
        max_box_index=max((max(abs(c) for c in k) for k, _, _ in sharp_series), default=0),
        max_dyadic_level=levels,
        series=series,
        partial_sums=partial,
    )


def _embedding_corpus(grid: GridSpec, count: int, rng: np.random.Generator) -> List[SpectralField]:
    """Deterministic mix of band-limited noise, bumps, and shell fields."""
    from .grid import FourierBump, sample

    fields = []
    rho = np.sqrt(grid.xi_squared)
    for i in range(count):
        style = i % 3
        if style == 0:
            coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            decay = (1.0 + grid.xi_squared) ** (-1.0 - 0.5 * rng.random())
            fields.append(SpectralField(grid, coeffs * decay))
        elif style == 1:
            width = 0.3 + 2.0 * rng.random()
            center = rng.uniform(-0.5, 0.5, size=grid.d) * grid.xi_max / 2.0
            bump = FourierBump(center=tuple(center), width=width, amplitude=1.0)
            fields.append(to_spectral(sample(grid, bump)))
        else:
            j = int(rng.integers(0, max(1, int(math.log2(grid.xi_max)))))
            mask = (rho >= 2.0**j) & (rho < 2.0 ** (j + 1)) if j > 0 else rho < 2.0
            coeffs = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * mask
            if not np.any(mask):
                coeffs[(grid.n // 2,) * grid.d] = 1.0
            fields.append(SpectralField(grid, coeffs))
    return fields


def embedding_report(grid: GridSpec, direction: str, s1: float, s2: float, alpha: float,
                     count: int = 50, seed: int = 0,
                     C: Optional[float] = None) -> ExperimentReport:
    """Measure embedding ratios over a deterministic corpus of fields.

    direction 'modulation_into_besov' requires s1 >= s2 and records
    besov(s2) / modulation(s1); 'besov_into_modulation' requires
    s1 >= s2 + d(1-alpha)/2 and records modulation(s2) / besov(s1).
    The claim under test is boundedness, so the checks assert finiteness
    and record the observed maximum.
    """
    if direction == "modulation_into_besov":
        if s1 < s2:
            raise ValueError(f"hypothesis s1 >= s2 violated: s1={s1}, s2={s2}")
    elif direction == "besov_into_modulation":
        gap = grid.d * (1.0 - alpha) / 2.0
        if s1 < s2 + gap:
            raise ValueError(
                f"hypothesis s1 >= s2 + d(1-alpha)/2 violated: s1={s1}, s2+gap={s2 + gap}"
            )
    else:
        raise ValueError(f"unknown direction {direction!r}")
    symbols = alpha_symbols(grid, alpha, C)
    rng = np.random.default_rng(seed)
    report = ExperimentReport(
        name="embedding",
        parameters={"direction": direction, "s1": s1, "s2": s2, "alpha": alpha,
                    "count": count, "seed": seed, "C": symbols.C},
        row_fields=["field_index", "numerator", "denominator", "ratio"],
    )
    ratios = []
    for i, f in enumerate(_embedding_corpus(grid, count, rng)):
        if direction == "modulation_into_besov":
            num = besov_norm(f, s2)
            den = modulation_norm(f, s1, alpha, "sharp", symbols=symbols)
        else:
            num = modulation_norm(f, s2, alpha, "sharp", symbols=symbols)
            den = besov_norm(f, s1)
        ratio = num / den if den > 0 else 0.0
        ratios.append(ratio)
        report.rows.append({"field_index": i, "numerator": num, "denominator": den,
                            "ratio": ratio})
    arr = np.asarray(ratios)
    report.metrics = {"max_ratio": float(arr.max()), "mean_ratio": float(arr.mean()),
                      "count": count}
    report.add_check("embedding_ratio_bounded", float(arr.max()),
                     passed=bool(np.all(np.isfinite(arr))),
                     detail="boundedness only; the constant is not asserted")
    return report
