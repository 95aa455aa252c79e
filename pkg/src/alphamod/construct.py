"""Lacunary and two-bump initial data with their norm-law experiments.

Lacunary data.  A ladder of frequency pieces k_j is chosen so the stretched
index (1 + k^2)^(alpha/(2(1-alpha))) k lands in the dyadic window
[2^(j+1/4), 2^(j+1/2)); the data is a sum of Fourier-side bumps at those
piece centers with amplitudes eps * ln^(-2)(k) * <k>^(-(s+d alpha/2)/(1-alpha)).
The weights are tuned so the alpha-modulation norm stays O(eps) while every
coarser scale blows up: the B^{s'}_{2,inf} shell values grow like
<k>^((s'-s)/(1-alpha)) / ln^2 k, and for alpha > 0 the value at x = 0 is a
divergent positive series.  Infinite statements become growth-rate fits over
truncations (more pieces, wider bands) with explicit target exponents.

Two-bump data.  Bumps at +-<k>^(alpha/(1-alpha)) k with k = (N,...,N) drive
the degree-(2 kappa + 1) response coefficient

    A(t) = int_0^t S(t - tau) |S(tau) v0|^(2 kappa) S(tau) v0 dtau,

whose alpha-modulation norm grows in N like
<k>^((2 kappa (d alpha/2 - s) - 2 alpha)/(1 - alpha)) at t = <k>^(-2 alpha/(1-alpha))
when s is below the critical index d alpha/2 - alpha/kappa, and decays above
it.  Combinatorial prefactors ((2 kappa + 1)!, the unit i*lambda, and the
time constant) are set to 1 throughout; only exponents are asserted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._parallel import map_jobs
from .decomp import _index_weight, _scale_exponent, calibrate_constant
from .fitting import fit_loglog
from .grid import (AliasingError, Field, FourierBump, GridSpec, SpectralField, SumOfBumps,
                   make_grid, sample, to_spectral)
from .norms import dyadic_shell_masses, modulation_norm
from .report import ExperimentReport

__all__ = [
    "IllposedDataSpec",
    "PieceInfo",
    "SupercriticalDataSpec",
    "WindowEmpty",
    "build_illposed_v0",
    "build_supercritical_u0",
    "choose_kj",
    "discontinuity_demo",
    "inflation_sweep",
    "norm_claim_report",
    "scaled_data",
    "supercritical_pieces",
    "taylor_coefficient",
]


class WindowEmpty(ValueError):
    """No integer index lands in the requested dyadic window."""


def critical_index(kappa: int, d: int) -> float:
    """Scaling-critical regularity d/2 - 1/kappa."""
    return d / 2.0 - 1.0 / kappa


def threshold_index(alpha: float, kappa: int, d: int) -> float:
    """Well/ill-posedness threshold d*alpha/2 - alpha/kappa."""
    return d * alpha / 2.0 - alpha / kappa


@dataclass(frozen=True)
class SupercriticalDataSpec:
    """Parameters of the lacunary data family.

    The regularity s must sit strictly between the threshold index
    d*alpha/2 - alpha/kappa and the critical index d/2 - 1/kappa, which is a
    nonempty window exactly when kappa > 2/d.
    """

    eps: float
    alpha: float
    kappa: int
    d: int
    s: float
    J: int = 1
    n_pieces: int = 4
    c: float = 0.125

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if not (isinstance(self.kappa, int) and self.kappa >= 1):
            raise ValueError(f"kappa must be a positive integer, got {self.kappa!r}")
        if self.d < 1:
            raise ValueError(f"d must be at least 1, got {self.d}")
        if self.kappa * self.d <= 2:
            raise ValueError(
                f"kappa={self.kappa} is not mass-supercritical in d={self.d} "
                "(needs kappa > 2/d)")
        lo = threshold_index(self.alpha, self.kappa, self.d)
        hi = critical_index(self.kappa, self.d)
        if not (lo < self.s < hi):
            raise ValueError(
                f"s={self.s} outside the open window ({lo:g}, {hi:g})")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not (isinstance(self.J, int) and self.J >= 1):
            raise ValueError(f"J must be a positive integer, got {self.J!r}")
        if self.n_pieces < 0:
            raise ValueError(f"n_pieces must be nonnegative, got {self.n_pieces}")
        if not (0.0 < self.c <= 0.5):
            raise ValueError(f"piece width fraction c must be in (0, 1/2], got {self.c}")


@dataclass(frozen=True)
class IllposedDataSpec:
    """Two-bump data at frequency +-<k>^(alpha/(1-alpha)) k, k = (N,...,N)."""

    N: int
    s: float
    alpha: float
    kappa: int
    delta: float
    d: int = 1

    def __post_init__(self) -> None:
        if not (isinstance(self.N, int) and self.N >= 8):
            raise ValueError(f"N must be an integer >= 8, got {self.N!r}")
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if not (isinstance(self.kappa, int) and self.kappa >= 1):
            raise ValueError(f"kappa must be a positive integer, got {self.kappa!r}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.d < 1:
            raise ValueError(f"d must be at least 1, got {self.d}")

    @property
    def index_weight(self) -> float:
        return math.sqrt(1.0 + self.d * float(self.N) ** 2)

    @property
    def amplitude(self) -> float:
        expo = -(self.s + self.d * self.alpha / 2.0) / (1.0 - self.alpha)
        return self.index_weight**expo


def _stretched_index(alpha: float, k: int) -> float:
    return _index_weight((k,)) ** _scale_exponent(alpha) * float(k)


def choose_kj(alpha: float, j: int) -> int:
    """Smallest integer k whose stretched index lands in the j-th window.

    The map k -> (1+k^2)^(alpha/(2(1-alpha))) k is strictly increasing, so
    the smallest k at or above the window floor is found by bisection; if it
    overshoots the ceiling the window contains no integer.
    """
    if j < 1:
        raise ValueError(f"window index must be at least 1, got {j}")
    lo = 2.0 ** (j + 0.25)
    hi = 2.0 ** (j + 0.5)
    upper = 1
    while _stretched_index(alpha, upper) < lo:
        upper *= 2
    lower = upper // 2 if upper > 1 else 0
    while upper - lower > 1:
        mid = (upper + lower) // 2
        if _stretched_index(alpha, mid) >= lo:
            upper = mid
        else:
            lower = mid
    k = upper
    value = _stretched_index(alpha, k)
    if not (lo <= value < hi):
        raise WindowEmpty(
            f"no integer index in window j={j} for alpha={alpha} "
            f"(smallest candidate k={k} has stretched index {value:g}, "
            f"window [{lo:g}, {hi:g}))")
    return k


@dataclass(frozen=True)
class PieceInfo:
    """One lacunary piece: window index, lattice index, and its bump."""

    j: int
    k: int
    center: float
    width: float
    amplitude: float

    @property
    def weight(self) -> float:
        return math.sqrt(1.0 + float(self.k) ** 2)


def supercritical_pieces(spec: SupercriticalDataSpec,
                         grid: GridSpec) -> Tuple[List[PieceInfo], int]:
    """Piece ladder for the given spec truncated to the grid band.

    Returns the pieces and the count of window indices skipped because the
    window held no integer.  Iteration stops at the first piece whose center
    leaves the band; a piece whose center fits but whose support leaks past
    the band edge raises, since sampling it would fold the tail.
    """
    pieces: List[PieceInfo] = []
    skipped = 0
    j = spec.J
    expo = -(spec.s + spec.d * spec.alpha / 2.0) / (1.0 - spec.alpha)
    while len(pieces) < spec.n_pieces:
        if 2.0 ** (j + 0.25) > grid.xi_max:
            break
        try:
            k = choose_kj(spec.alpha, j)
        except WindowEmpty:
            skipped += 1
            j += spec.J
            continue
        if k < 3:
            raise ValueError(
                f"piece index k={k} is below the ln^2 guard (needs k >= 3)")
        weight = math.sqrt(1.0 + float(k) ** 2)
        h = weight ** _scale_exponent(spec.alpha)
        center = h * float(k)
        width = spec.c * h
        if center > grid.xi_max:
            break
        if center + 2.0 * width + 2.0 * grid.dxi > grid.xi_max:
            raise AliasingError(
                f"piece j={j} (k={k}) fits its center at {center:g} but its "
                f"support leaks past xi_max={grid.xi_max:g}")
        amplitude = spec.eps / math.log(k) ** 2 * weight**expo
        pieces.append(PieceInfo(j=j, k=k, center=center, width=width,
                                amplitude=amplitude))
        j += spec.J
    return pieces, skipped


def build_supercritical_u0(spec: SupercriticalDataSpec, grid: GridSpec) -> Field:
    """Sample the lacunary data on the grid (zero field if no piece fits)."""
    pieces, _ = supercritical_pieces(spec, grid)
    if not pieces:
        return Field(grid, np.zeros(grid.shape, dtype=complex))
    bumps = [FourierBump(center=(p.center,) + (0.0,) * (spec.d - 1),
                         width=p.width, amplitude=p.amplitude)
             for p in pieces]
    return sample(grid, SumOfBumps(tuple(bumps)))


def scaled_data(spec: SupercriticalDataSpec, sigma: float, grid: GridSpec) -> Field:
    """sigma^(1/kappa) u0(sigma x) with the piece lattice re-derived per sigma.

    sigma must be a power of two; the lattice spacing J becomes log2(sigma)
    (the data family couples the two), except sigma = 1 which returns the
    spec's own data unchanged.
    """
    from .evolve import scaling_transform

    m = int(round(math.log2(sigma)))
    if 2.0**m != sigma or m < 0:
        raise ValueError(f"sigma must be a power of two >= 1, got {sigma}")
    build_spec = spec if m == 0 else replace(spec, J=m)
    u0 = build_supercritical_u0(build_spec, grid)
    if m == 0:
        return u0
    return scaling_transform(u0, sigma, spec.kappa, mode="relabel")


def _center_value(f: Field) -> float:
    idx = (f.grid.n // 2,) * f.grid.d
    return float(np.abs(f.values[idx]))


def _shell_level(center: float) -> int:
    if center <= 1.0:
        return 0
    return int(math.floor(math.log2(center))) + 1


def norm_claim_report(field: Field, spec: SupercriticalDataSpec, *,
                      sigmas: Sequence[float] = (16.0, 32.0, 64.0, 128.0, 256.0),
                      refine_base_n: int = 8192, refine_levels: int = 5,
                      C: Optional[float] = None) -> ExperimentReport:
    """Norm laws of the lacunary family rendered as growth-rate checks.

    Four stages, all recorded as rows tagged by a stage column:

    - sigma: rescaled data with the per-sigma piece lattice; the L2 ratio
      must match sigma^(1/kappa - d/2) exactly and the alpha-modulation norm
      must grow at least like sigma^((1-alpha)/kappa) up to fit tolerance.
    - refine: the same spec rebuilt on grids with doubling bandwidth; the
      grid maximum (attained at x = 0, where every piece is positive)
      increases strictly (alpha > 0, each refinement admits more pieces) or
      settles (alpha = 0).
    - piece: dyadic-shell values of the passed field against the piece
      ladder; after multiplying out the ln^2 k amplitude factor the fitted
      exponent must match (s_crit - s)/(1 - alpha).

    Fits whose swept variable moves the leading piece index compensate the
    ln^2 k amplitude factor, as in the piece-contribution law.  At alpha = 0
    this applies to the sigma slope itself (the first window index grows
    with sigma, so over a desk-scale sigma range the raw norms are dominated
    by the ln^2 drag) and to the x = 0 trend against the mass scale
    eps * sigma^((1-alpha)/kappa), which is fitted on matched single-piece
    truncations so every sigma contributes the same number of pieces.  For
    alpha > 0 the raw slope is checked directly.

    The sigma stage relabels the field's own grid, so its lattice spacing
    grows by sigma; a warning is emitted when it stops resolving the
    covering boxes of the norm (choose a larger L to avoid this).
    """
    g = field.grid
    kappa = spec.kappa
    alpha = spec.alpha
    report = ExperimentReport(
        name="norm_claims",
        parameters={"eps": spec.eps, "alpha": alpha, "kappa": kappa, "d": spec.d,
                    "s": spec.s, "J": spec.J, "n_pieces": spec.n_pieces, "c": spec.c,
                    "grid_n": g.n, "grid_L": g.L, "sigmas": list(sigmas),
                    "refine_base_n": refine_base_n, "refine_levels": refine_levels},
        row_fields=["stage", "sigma", "J_eff", "pieces", "n", "k", "weight",
                    "l2_base", "l2_scaled", "l2_exponent_err", "modulation",
                    "modulation_compensated", "center_value", "increment",
                    "shell", "besov_value", "besov_compensated"],
    )

    # Stage 1: the sigma sweep.
    l2_target = 1.0 / kappa - spec.d / 2.0
    l2_err_max = 0.0
    sig_points: List[Tuple[float, float, float, float]] = []
    C_box = calibrate_constant(alpha, spec.d) if C is None else C
    for sigma in sigmas:
        m = int(round(math.log2(sigma)))
        build_spec = spec if m == 0 else replace(spec, J=m)
        pieces, _ = supercritical_pieces(build_spec, g)
        if not pieces:
            report.rows.append({"stage": "sigma", "sigma": sigma, "J_eff": m,
                                "pieces": 0})
            continue
        box_width = 2.0 * C_box * (1.0 + (sigma * pieces[0].center) ** 2) ** (alpha / 2.0)
        if sigma * g.dxi > box_width:
            warnings.warn(
                f"relabeled lattice spacing {sigma * g.dxi:g} exceeds the box "
                f"width {box_width:g} at sigma={sigma:g}; the norm is "
                "under-resolved, increase L", stacklevel=2)
        u_base = build_supercritical_u0(build_spec, g)
        v = scaled_data(spec, sigma, g)
        l2_base = u_base.l2()
        l2_scaled = v.l2()
        ratio = l2_scaled / l2_base
        err = abs(ratio / sigma**l2_target - 1.0)
        l2_err_max = max(l2_err_max, err)
        mod = modulation_norm(v, spec.s, alpha, C=C)
        comp = mod * math.log(pieces[0].k) ** 2
        lead = build_supercritical_u0(replace(build_spec, n_pieces=1), g)
        lead_center = sigma ** (1.0 / kappa) * _center_value(lead)
        sig_points.append((sigma, mod, comp,
                           lead_center * math.log(pieces[0].k) ** 2))
        report.rows.append({
            "stage": "sigma", "sigma": sigma, "J_eff": m, "pieces": len(pieces),
            "l2_base": l2_base, "l2_scaled": l2_scaled, "l2_exponent_err": err,
            "modulation": mod, "modulation_compensated": comp,
            "center_value": _center_value(v),
        })
    if len(sig_points) < 4:
        raise ValueError(
            f"only {len(sig_points)} usable sigma points (need at least 4); "
            "the per-sigma lattices are too sparse for this grid")
    report.add_check("l2_scaling_exact", l2_err_max, passed=l2_err_max <= 1e-10,
                     detail=f"max deviation from exponent {l2_target:g}")
    sig_fit = fit_loglog([p[0] for p in sig_points], [p[1] for p in sig_points])
    comp_fit = fit_loglog([p[0] for p in sig_points], [p[2] for p in sig_points])
    floor = (1.0 - alpha) / kappa - 0.1
    slope_used = sig_fit.slope if alpha > 0.0 else comp_fit.slope
    report.add_check("modulation_sigma_slope", slope_used,
                     passed=slope_used >= floor,
                     detail=f"must stay above {floor:g} "
                            f"(per-piece law {1.0 / kappa + spec.s - spec.d * alpha / 2.0:g}"
                            + (", ln^2-compensated" if alpha == 0.0 else "") + ")")
    if alpha == 0.0:
        m_values = [spec.eps * p[0] ** ((1.0 - alpha) / kappa) for p in sig_points]
        trend = fit_loglog(m_values, [p[3] for p in sig_points])
        trend_floor = 1.0 - 1.0 / kappa - 0.1
        report.add_check("center_amplitude_trend", trend.slope,
                         passed=trend.slope >= trend_floor,
                         detail=f"ln^2-compensated single-piece x=0 value vs "
                                f"the mass scale, floor {trend_floor:g}")

    # Stage 2: band refinement at fixed spec.
    centers: List[float] = []
    counts: List[int] = []
    for level in range(refine_levels):
        gl = make_grid(spec.d, refine_base_n * 2**level, g.L)
        pieces, _ = supercritical_pieces(spec, gl)
        u = build_supercritical_u0(spec, gl)
        value = float(np.abs(u.values).max())
        inc = value - centers[-1] if centers else 0.0
        centers.append(value)
        counts.append(len(pieces))
        report.rows.append({"stage": "refine", "n": gl.n, "pieces": len(pieces),
                            "center_value": value, "increment": inc})
    increments = [b - a for a, b in zip(centers, centers[1:])]
    if alpha > 0.0:
        monotone = all(inc > 0.0 for inc in increments) and len(increments) >= 4
        report.add_check("center_divergence_monotone", centers[-1], passed=monotone,
                         detail=f"{len(increments)} refinements, piece counts {counts}")
    else:
        settled = (all(b < a for a, b in zip(increments, increments[1:]))
                   and increments[-1] <= 0.05 * centers[-1])
        report.add_check("center_convergent", increments[-1] / centers[-1],
                         passed=settled,
                         detail="increments shrink and the last is under 5%")

    # Stage 3: per-piece dyadic shell growth on the passed field.
    pieces, _ = supercritical_pieces(spec, g)
    if len(pieces) < 4:
        raise ValueError(
            f"field grid holds only {len(pieces)} pieces (need at least 4 for "
            "the shell fit)")
    shells = dict(dyadic_shell_masses(field))
    s_crit = critical_index(kappa, spec.d)
    weights = []
    comp_values = []
    for p in pieces:
        level = _shell_level(p.center)
        mass = shells.get(level, 0.0)
        value = 2.0 ** (level * s_crit) * mass
        comp = value * math.log(p.k) ** 2
        weights.append(p.weight)
        comp_values.append(comp)
        report.rows.append({"stage": "piece", "k": p.k, "weight": p.weight,
                            "shell": level, "besov_value": value,
                            "besov_compensated": comp})
    besov_fit = fit_loglog(weights, comp_values)
    target = (s_crit - spec.s) / (1.0 - alpha)
    report.add_check("shell_growth_exponent", besov_fit.slope, target=target,
                     tolerance=0.1)
    report.metrics = {
        "l2_scaling_target": l2_target, "l2_max_deviation": l2_err_max,
        "modulation_sigma_slope_raw": sig_fit.slope,
        "modulation_sigma_slope_compensated": comp_fit.slope,
        "modulation_slope_floor": floor,
        "shell_growth_slope": besov_fit.slope, "shell_growth_target": target,
        "refine_final_center": centers[-1],
        "refine_final_increment": increments[-1] if increments else 0.0,
    }
    return report


def build_illposed_v0(spec: IllposedDataSpec, grid: GridSpec,
                      C: Optional[float] = None) -> Field:
    """Two symmetric partition bumps at +-<k>^(alpha/(1-alpha)) k.

    The spectrum is even and real, so the physical field is real up to
    roundoff; the returned values keep the complex dtype of the transform.
    The amplitude normalization <k>^(-(s+d alpha/2)/(1-alpha)) makes the
    alpha-modulation norm of delta * v0 comparable to delta uniformly in N.
    """
    if C is None:
        C = calibrate_constant(spec.alpha, spec.d)
    h = spec.index_weight ** _scale_exponent(spec.alpha)
    center = tuple(h * spec.N for _ in range(spec.d))
    mirror = tuple(-c for c in center)
    width = C * h
    amp = spec.amplitude
    return sample(grid, SumOfBumps((
        FourierBump(center=center, width=width, amplitude=amp),
        FourierBump(center=mirror, width=width, amplitude=amp),
    )))


def taylor_coefficient(v0: Field, t: float, kappa: int, *,
                       band_radius: Optional[float] = None, tol: float = 1e-8,
                       start_nodes: int = 64, max_nodes: int = 2048) -> Field:
    """Leading nonlinear response int_0^t S(t-tau)|S(tau)v0|^(2 kappa) S(tau)v0 dtau.

    The forcing is projected onto the ball |xi| <= band_radius (default 1.5x
    the data's support radius) before quadrature.  Projection commutes with
    the propagator and the integral, so the result equals the same projection
    of the exact coefficient; what is dropped is the far band, whose true
    mass is suppressed by the inverse of the large phase mismatch, but whose
    untreated oscillation would otherwise dominate the quadrature error
    budget.  Frequencies that the degree-(2 kappa + 1) product would fold
    back into the kept ball raise instead of aliasing.
    """
    spectral = to_spectral(v0)
    g = spectral.grid
    rho = np.sqrt(g.xi_squared)
    peak = float(np.abs(spectral.coefficients).max())
    occupied = np.abs(spectral.coefficients) > 1e-13 * peak
    radius = float(rho[occupied].max()) if peak > 0 else 0.0
    cut = 1.5 * radius if band_radius is None else band_radius
    top = (2 * kappa + 1) * radius
    if top > g.xi_max and 2.0 * g.xi_max - top < cut:
        raise AliasingError(
            f"degree-{2 * kappa + 1} products reach {top:g}, folding into the "
            f"kept ball of radius {cut:g} (xi_max {g.xi_max:g})")
    mask = rho <= cut
    coeffs = spectral.coefficients

    from .evolve import duhamel
    from .grid import _fft_raw, _ifft_raw

    def forcing(tau: float) -> SpectralField:
        w = _ifft_raw(g, np.exp(-1j * tau * g.xi_squared) * coeffs)
        fhat = _fft_raw(g, np.abs(w) ** (2 * kappa) * w)
        return SpectralField(g, fhat * mask)

    return duhamel(g, forcing, t, tol=tol, start_nodes=start_nodes,
                   max_nodes=max_nodes)


def _inflation_point(args: tuple) -> dict:
    """Evaluate the response coefficient's norm at one ladder frequency."""
    N, s, alpha, kappa, d, grid, C, time_constant = args
    spec = IllposedDataSpec(N=int(N), s=s, alpha=alpha, kappa=kappa,
                            delta=1.0, d=d)
    v0 = build_illposed_v0(spec, grid, C=C)
    t = time_constant * spec.index_weight ** (-2.0 * alpha / (1.0 - alpha))
    coeff = taylor_coefficient(v0, t, kappa)
    value = modulation_norm(coeff, s, alpha, C=C)
    return {"N": int(N), "weight": spec.index_weight, "t": t,
            "value": value, "l2": coeff.l2()}


def inflation_sweep(s: float, alpha: float, kappa: int, d: int,
                    N_values: Sequence[int], grid: GridSpec, *,
                    C: Optional[float] = None, time_constant: float = 1.0,
                    tolerance: float = 0.15, jobs: int = 1,
                    expect: Optional[str] = None) -> ExperimentReport:
    """Growth of the response coefficient's norm along a frequency ladder.

    For each N the two-bump data is built, the response coefficient is
    evaluated at t = time_constant * <k>^(-2 alpha/(1-alpha)), and its
    M^{s,alpha} norm is fitted against <k>.  Below the threshold index the
    slope must match (2 kappa (d alpha/2 - s) - 2 alpha)/(1 - alpha); above
    it (a control run) the slope must be non-positive.
    """
    if len(N_values) < 4:
        raise ValueError(f"need at least 4 frequency points, got {len(N_values)}")
    if expect is None:
        expect = "growth" if s < threshold_index(alpha, kappa, d) else "control"
    if expect not in ("growth", "control"):
        raise ValueError(f"expect must be 'growth' or 'control', got {expect!r}")
    target = (2 * kappa * (d * alpha / 2.0 - s) - 2.0 * alpha) / (1.0 - alpha)
    report = ExperimentReport(
        name="inflation",
        parameters={"s": s, "alpha": alpha, "kappa": kappa, "d": d,
                    "N_values": list(N_values), "time_constant": time_constant,
                    "grid_n": grid.n, "grid_L": grid.L, "expect": expect},
        row_fields=["N", "weight", "t", "value", "l2"],
    )
    points = [(int(N), s, alpha, kappa, d, grid, C, time_constant)
              for N in N_values]
    report.rows = map_jobs(_inflation_point, points, jobs)
    weights = [row["weight"] for row in report.rows]
    values = [row["value"] for row in report.rows]
    fit = fit_loglog(weights, values)
    report.metrics = {"slope": fit.slope, "intercept": fit.intercept,
                      "r_squared": fit.r_squared, "target_slope": target,
                      "threshold_index": threshold_index(alpha, kappa, d)}
    if expect == "growth":
        report.add_check("inflation_slope", fit.slope, target=target,
                         tolerance=tolerance)
    else:
        report.add_check("control_slope_nonpositive", fit.slope,
                         passed=fit.slope <= 0.0,
                         detail=f"s={s:g} above the threshold index")
    return report


def discontinuity_demo(s: float, alpha: float, kappa: int, d: int, N: int,
                       delta: float, grid: GridSpec, dt: float, *,
                       C: Optional[float] = None, time_constant: float = 1.0,
                       threshold: float = 10.0) -> ExperimentReport:
    """Full-solver rendering of the zero-data discontinuity.

    With s below the threshold index, the solution from data delta * v0 is
    evolved to t = time_constant * <k>^(-2 alpha/(1-alpha)) and its
    M^{s,alpha} norm compared against the free evolution of the same data.
    The data norm stays fixed while the solution norm must exceed the free
    baseline by the artifact threshold (default 10x).

    The gain tracks the leading response scale <N>^(-2 kappa s) delta^(2 kappa)
    while the data norm stays near delta, but the two packets separate at
    group speed 2N, so only brief overlap windows feed the cascade and the
    measured gain sits far below the perturbative scale.  Shallow regularity
    cannot reach the threshold at desk-scale N (s = -0.1 saturates near 1.5
    even at delta = 4 on a 1024-wide band); deeper regularity raises the
    frequency leverage instead.  At s = -1, alpha = 0, kappa = 1 the gain
    clears 10x with N = 192, delta = 0.3, time_constant = 2.0 on
    make_grid(1, 16384, 8 pi) at dt = 1e-4 (measured 14.9, and 9.9 at
    delta = 0.25).
    """
    from .evolve import BlowupDetected, EvolutionConfig, evolve, free_propagate

    spec = IllposedDataSpec(N=int(N), s=s, alpha=alpha, kappa=kappa,
                            delta=delta, d=d)
    v0 = build_illposed_v0(spec, grid, C=C)
    data = Field(grid, delta * v0.values)
    t = time_constant * spec.index_weight ** (-2.0 * alpha / (1.0 - alpha))
    steps = max(1, int(math.ceil(t / dt)))
    config = EvolutionConfig(lam=1.0, kappa=kappa, dt=t / steps, t_end=t,
                             dealias=True, snapshot_stride=max(1, steps // 8))
    report = ExperimentReport(
        name="discontinuity",
        parameters={"s": s, "alpha": alpha, "kappa": kappa, "d": d, "N": int(N),
                    "delta": delta, "t": t, "dt": t / steps,
                    "grid_n": grid.n, "grid_L": grid.L, "threshold": threshold},
        row_fields=["quantity", "value"],
    )
    data_norm = modulation_norm(data, s, alpha, C=C)
    baseline = modulation_norm(free_propagate(data, t), s, alpha, C=C)
    stopped_early = False
    try:
        solution = evolve(data, config).final
    except BlowupDetected as stop:
        solution = stop.trajectory.final
        stopped_early = True
    solution_norm = modulation_norm(solution, s, alpha, C=C)
    gain = solution_norm / baseline
    predicted = spec.index_weight ** (-2 * kappa * s) * delta ** (2 * kappa)
    for name, value in [("data_norm", data_norm), ("free_baseline", baseline),
                        ("solution_norm", solution_norm), ("gain", gain),
                        ("predicted_gain_scale", predicted),
                        ("stopped_early", float(stopped_early))]:
        report.rows.append({"quantity": name, "value": value})
    report.metrics = {"data_norm": data_norm, "free_baseline": baseline,
                      "solution_norm": solution_norm, "gain": gain,
                      "predicted_gain_scale": predicted}
    report.add_check("norm_inflation_gain", gain, passed=gain >= threshold,
                     detail=f"solution vs free baseline at t={t:g}")
    return report
