"""Space-time norms of free waves: dispersive sweep and bilinear experiments.

Strichartz sweep.  For a frequency piece at index k the projected bump is
translated to the frequency origin before evolving (a Galilean boost, under
which L^q_t L^r_x norms of free waves are invariant).  This removes the bulk
group translation 2 c_k t, which no finite box could accommodate at large k,
and leaves the piece's intrinsic dispersion; the time window T_k = T0 / w_k^2
and the box L_k ~ 1/w_k are then scale-covariant, so a single grid size
serves every k.  What varies with k is the bump width w_k = fraction * r_k,
and the measured norm scales like w^(d(1/2 - 1/r) - 2/q) per unit L2 mass,
i.e. like <k> to the power d alpha/(1-alpha) * (1/2 - 1/r - 2/(dq)).

Bilinear experiments.  Two free waves with frequency supports separated by
lambda along one axis decorrelate like lambda^(-1/2) in L^2_{t,x}.  In one
dimension the squared norm has the exact quadrature form

    ||u v||^2 = (2 pi)^(-2) int int |f1(xi1)|^2 |f2(xi2)|^2
                               / (2 |xi1 - xi2|) dxi1 dxi2

for disjoint supports, which is the oracle the grid measurement is checked
against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ._parallel import map_jobs
from .decomp import eta_alpha, make_bump
from .fitting import fit_loglog
from .grid import Field, FourierBump, GridSpec, SpectralField, _ifft_raw, make_grid, to_spectral
from .report import ExperimentReport

__all__ = [
    "AdmissiblePair",
    "BilinearExperiment",
    "BilinearMeasurement",
    "bilinear_measure",
    "bilinear_oracle_1d",
    "bilinear_sweep",
    "check_admissible",
    "free_wave",
    "space_time_norm",
    "strichartz_sweep",
]


@dataclass(frozen=True)
class AdmissiblePair:
    """Exponent pair (q, r) for L^q_t L^r_x; infinities are allowed."""

    q: float
    r: float

    def gap(self, d: int) -> float:
        """1/2 - 1/r - 2/(dq); zero for sharp pairs."""
        inv_r = 0.0 if np.isinf(self.r) else 1.0 / self.r
        inv_q = 0.0 if np.isinf(self.q) else 1.0 / self.q
        return 0.5 - inv_r - 2.0 * inv_q / d

    def is_admissible(self, d: int) -> bool:
        if self.q < 2 or self.r < 2:
            return False
        if self.q == 2 and np.isinf(self.r) and d == 2:
            return False
        return self.gap(d) >= -1e-12

    def is_sharp(self, d: int) -> bool:
        return self.is_admissible(d) and abs(self.gap(d)) <= 1e-12


def check_admissible(q: float, r: float, d: int) -> bool:
    return AdmissiblePair(q, r).is_admissible(d)


def free_wave(initial: Union[Field, SpectralField]) -> Callable[[float], Field]:
    """Closure evaluating the free flow of the given data at arbitrary times."""
    spectral = to_spectral(initial) if isinstance(initial, Field) else initial
    g = spectral.grid
    coeffs = spectral.coefficients

    def at(t: float) -> Field:
        return Field(g, _ifft_raw(g, np.exp(-1j * t * g.xi_squared) * coeffs))

    return at


def _lr_norm(f: Field, r: float) -> float:
    if np.isinf(r):
        return f.linf()
    g = f.grid
    return float((np.sum(np.abs(f.values) ** r) * g.dx**g.d) ** (1.0 / r))


def _simpson(values: np.ndarray, step: float) -> float:
    n = values.size - 1
    if n % 2 != 0:
        raise ValueError("Simpson rule needs an even interval count")
    return float(step / 3.0 * (values[0] + values[-1]
                               + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-2:2].sum()))


def space_time_norm(u, q: float, r: float, T: float, *, t_start: Optional[float] = None,
                    rtol: float = 5e-3, max_doublings: int = 6,
                    start_intervals: int = 32, return_info: bool = False):
    """(integral over the window of ||u(t)||_r^q dt)^(1/q), q = inf as sup.

    `u` is a Trajectory (its own snapshots are used, trapezoid in time) or a
    callable t -> Field; callables are sampled on [t_start, T] (default
    [-T, T]) with composite Simpson, doubling the sample count until the
    value changes by less than rtol, at most max_doublings times.
    """
    from .evolve import Trajectory

    if isinstance(u, Trajectory):
        times = np.asarray([row["t"] for row in u.conservation])
        norms = np.asarray([_lr_norm(f, r) for f in u.snapshots])
        if np.isinf(q):
            value = float(norms.max())
        else:
            value = float(np.trapezoid(norms**q, times) ** (1.0 / q))
        return (value, {"samples": times.size, "doublings": 0, "converged": True}) \
            if return_info else value

    lo = -T if t_start is None else t_start
    if not (T > lo):
        raise ValueError(f"empty time window [{lo}, {T}]")

    def level(m: int) -> float:
        ts = np.linspace(lo, T, m + 1)
        norms = np.asarray([_lr_norm(u(float(t)), r) for t in ts])
        if np.isinf(q):
            return float(norms.max())
        return _simpson(norms**q, ts[1] - ts[0]) ** (1.0 / q)

    m = start_intervals
    prev = level(m)
    converged = False
    doublings = 0
    for doublings in range(1, max_doublings + 1):
        m *= 2
        cur = level(m)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            converged = True
            prev = cur
            break
        prev = cur
    if not converged:
        warnings.warn(
            f"space-time norm did not settle below {rtol:g} after {max_doublings} doublings",
            stacklevel=2,
        )
    info = {"samples": m + 1, "doublings": doublings, "converged": converged}
    return (prev, info) if return_info else prev


def _support_radius(bump: FourierBump) -> float:
    return 2.0 * bump.width


def _strichartz_point(args: tuple) -> dict:
    """One ladder rung: project, recenter, evolve, and measure a single k."""
    k, alpha, C, width_fraction, T0, n, safety, rtol, q, r = args
    kk = (int(k),)
    h = math.sqrt(1.0 + float(k) ** 2) ** (alpha / (1.0 - alpha))
    c = h * float(k)
    w = width_fraction * C * h
    T = T0 / w**2
    L = (2.0 * _support_radius(FourierBump(0.0, w)) * T + 32.0 / w) / safety
    grid = make_grid(1, n, L)
    if grid.xi_max < 2.5 * w:
        raise ValueError(f"grid too coarse for k={k}: xi_max={grid.xi_max}, width={w}")
    xi = grid.xi_axis
    profile = make_bump()
    bare = profile.radial(np.abs(xi) / w)
    data = bare * eta_alpha(alpha, float(C), kk, xi + c)
    bare_l2 = float(np.sqrt(np.sum(bare**2) * grid.dxi / (2 * np.pi)))
    spectral = SpectralField(grid, data.astype(complex))
    data_l2 = spectral.l2()
    value = space_time_norm(free_wave(spectral), q, r, T, rtol=rtol)
    return {"k": int(k), "weight": math.sqrt(1.0 + float(k) ** 2), "width": w,
            "T": T, "L_box": L, "mass_retention": data_l2 / bare_l2,
            "data_l2": data_l2, "norm": value, "ratio": value / data_l2}


def strichartz_sweep(alpha: float, pair: AdmissiblePair, k_values: Sequence[int],
                     d: int = 1, C: Optional[float] = None,
                     width_fraction: float = 0.25, T0: float = 64.0, n: int = 2048,
                     safety: float = 0.45, rtol: float = 5e-3,
                     seed_tolerance: float = 0.15, jobs: int = 1) -> ExperimentReport:
    """Dispersive-norm growth of projected frequency pieces along a k ladder.

    Each piece is measured in its own Galilean frame (see module docstring):
    the data is the true partition projector eta_k applied to a bump of width
    width_fraction * r_k, recentered to the frequency origin, and the window
    is T_k = T0 / w_k^2.  Reported per k: the ratio of the space-time norm to
    the data's L2 norm.  The fitted log-log slope against <k> is compared to
    d alpha/(1-alpha) * (1/2 - 1/r - 2/(dq)).
    """
    if d != 1:
        raise NotImplementedError("the dispersive sweep is implemented for d = 1")
    if len(k_values) < 5:
        raise ValueError(f"need at least 5 sweep points for a fit, got {len(k_values)}")
    if not pair.is_admissible(d):
        raise ValueError(f"(q, r) = ({pair.q}, {pair.r}) is not admissible in d = {d}")
    if C is None:
        from .decomp import calibrate_constant

        C = calibrate_constant(alpha, d)
    target = d * alpha / (1.0 - alpha) * pair.gap(d)
    report = ExperimentReport(
        name="strichartz",
        parameters={"alpha": alpha, "q": pair.q, "r": pair.r, "d": d, "C": C,
                    "width_fraction": width_fraction, "T0": T0, "n": n,
                    "k_values": list(k_values)},
        row_fields=["k", "weight", "width", "T", "L_box", "mass_retention",
                    "data_l2", "norm", "ratio"],
    )
    points = [(int(k), alpha, C, width_fraction, T0, n, safety, rtol,
               pair.q, pair.r) for k in k_values]
    report.rows = map_jobs(_strichartz_point, points, jobs)
    weights = [row["weight"] for row in report.rows]
    ratios = [row["ratio"] for row in report.rows]
    fit = fit_loglog(weights, ratios)
    report.metrics = {"slope": fit.slope, "intercept": fit.intercept,
                      "r_squared": fit.r_squared, "target_slope": target,
                      "max_over_min_ratio": float(max(ratios) / min(ratios))}
    report.add_check("dispersive_slope", fit.slope, target=target,
                     tolerance=seed_tolerance)
    if abs(target) < 1e-12:
        report.add_check("flat_ratio_band", report.metrics["max_over_min_ratio"],
                         passed=report.metrics["max_over_min_ratio"] <= 2.0,
                         detail="saturating pieces stay within a factor 2")
    return report


@dataclass(frozen=True)
class BilinearExperiment:
    """Two free waves multiplied pointwise, with optional conjugations."""

    grid: GridSpec
    bump1: FourierBump
    bump2: FourierBump
    conj1: bool = False
    conj2: bool = False
    separation_axis: int = 0
    T_init: Optional[float] = None
    tail_target: float = 0.01
    max_T_doublings: int = 4
    rtol_time: float = 5e-3


@dataclass
class BilinearMeasurement:
    value: float
    T: float
    doublings: int
    tail_fraction: float
    converged: bool
    wrap_limited: bool
    separation: float
    transverse_measure: float
    predicted_scale: float

    @property
    def ratio_to_scale(self) -> float:
        return self.value / self.predicted_scale if self.predicted_scale > 0 else math.inf


def _axis_component(value, axis: int, d: int) -> float:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1 and d > 1:
        arr = np.repeat(arr, d)
    return float(arr[axis])


def _pair_separation(exp: BilinearExperiment) -> float:
    d = exp.grid.d
    c1 = _axis_component(exp.bump1.center, exp.separation_axis, d)
    c2 = _axis_component(exp.bump2.center, exp.separation_axis, d)
    return abs(c1 - c2) - _support_radius(exp.bump1) - _support_radius(exp.bump2)


def _transverse_measure(grid: GridSpec, spectral: SpectralField, axis: int) -> float:
    """Lebesgue measure of the support projection orthogonal to the axis."""
    if grid.d == 1:
        return 1.0
    mask = np.abs(spectral.coefficients) > 0
    proj = np.any(mask, axis=axis)
    return float(np.count_nonzero(proj)) * grid.dxi ** (grid.d - 1)


def _demodulated(grid: GridSpec, bump: FourierBump, coarse: GridSpec):
    """Bump coefficients shifted by the nearest lattice point to the center.

    The coarse lattice shares the fine grid's frequency spacing, so the
    shifted coefficients are exactly the fine-grid ones; the returned phase
    table carries the original (unshifted) frequencies, keeping the evolution
    exact while the envelope lives on the small grid.
    """
    profile = make_bump()
    c = np.atleast_1d(np.asarray(bump.center, dtype=float))
    if c.size == 1 and grid.d > 1:
        c = np.repeat(c, grid.d)
    shift = np.round(c / grid.dxi) * grid.dxi
    residue = float(np.max(np.abs(c - shift)))
    if residue + 2.0 * bump.width + 2.0 * coarse.dxi > coarse.xi_max:
        raise ValueError("envelope grid too small for the demodulated bump")
    mesh = coarse.xi_mesh()
    rho2 = sum((mesh[i] + shift[i] - c[i]) ** 2 for i in range(grid.d))
    coeffs = bump.amplitude * profile.radial(np.sqrt(rho2) / bump.width)
    xi_sq = sum((mesh[i] + shift[i]) ** 2 for i in range(grid.d))
    return coeffs.astype(complex), np.asarray(xi_sq, dtype=float)


def bilinear_measure(exp: BilinearExperiment) -> BilinearMeasurement:
    """L^2_{t,x} norm of the (possibly conjugated) product of two free waves.

    The time window doubles from T_init until the last doubling contributes
    less than tail_target of the total, at most max_T_doublings times and
    never beyond the wrap-around time of the relative group motion.

    Each bump is demodulated by the lattice point nearest its center before
    transforming (the evolution keeps the original frequencies in its phase),
    which leaves the product modulus pointwise unchanged but lets the spatial
    integral run on a grid sized for the envelopes rather than the carriers.
    """
    g = exp.grid
    for bump in (exp.bump1, exp.bump2):
        c = np.max(np.abs(np.atleast_1d(np.asarray(bump.center, dtype=float))))
        if c + 2.0 * bump.width + 2.0 * g.dxi > g.xi_max:
            raise ValueError(
                f"bump at |center| {c:g}, width {bump.width:g} leaves the band "
                f"(xi_max {g.xi_max:g})")
    w_max = max(exp.bump1.width, exp.bump2.width)
    n_env = 32
    while n_env * np.pi / (2.0 * g.L) < 5.0 * w_max + 4.0 * g.dxi:
        n_env *= 2
    env = GridSpec(g.d, min(n_env, g.n), g.L)
    cu, xi_sq_u = _demodulated(g, exp.bump1, env)
    cv, xi_sq_v = _demodulated(g, exp.bump2, env)
    u_spec = SpectralField(env, cu)
    v_spec = SpectralField(env, cv)
    sep = _pair_separation(exp)
    if sep <= 0:
        raise ValueError(f"bump supports are not separated (gap {sep:g})")
    d_axis = abs(
        _axis_component(exp.bump1.center, exp.separation_axis, g.d)
        - _axis_component(exp.bump2.center, exp.separation_axis, g.d)
    )
    v_rel = 2.0 * d_axis
    w_min = min(exp.bump1.width, exp.bump2.width)
    T = exp.T_init if exp.T_init is not None else 16.0 / (w_min * v_rel)
    T_wrap = 0.85 * 2.0 * g.L / v_rel

    def g_of_t(t: float) -> float:
        uu = _ifft_raw(env, np.exp(-1j * t * xi_sq_u) * cu)
        vv = _ifft_raw(env, np.exp(-1j * t * xi_sq_v) * cv)
        w = (np.conj(uu) if exp.conj1 else uu) * (np.conj(vv) if exp.conj2 else vv)
        return float(np.sum(np.abs(w) ** 2) * env.dx**env.d)

    def window_integral(T_win: float) -> float:
        m = 64
        prev = None
        for _ in range(exp.max_T_doublings + 4):
            ts = np.linspace(-T_win, T_win, m + 1)
            vals = np.asarray([g_of_t(float(t)) for t in ts])
            cur = _simpson(vals, ts[1] - ts[0])
            if prev is not None and abs(cur - prev) <= exp.rtol_time * max(cur, 1e-300):
                return cur
            prev = cur
            m *= 2
        return prev

    total = window_integral(T)
    doublings = 0
    tail = math.inf
    wrap_limited = False
    while doublings < exp.max_T_doublings:
        if 2.0 * T > T_wrap:
            wrap_limited = True
            break
        bigger = window_integral(2.0 * T)
        tail = (bigger - total) / max(bigger, 1e-300)
        T *= 2.0
        doublings += 1
        total = bigger
        if tail < exp.tail_target:
            break
    converged = tail < exp.tail_target or (doublings == 0 and not wrap_limited)
    if wrap_limited and not converged:
        warnings.warn(
            f"bilinear window reached the wrap limit T={T_wrap:.3g} before the tail "
            f"criterion ({tail:.3g} >= {exp.tail_target})",
            stacklevel=2,
        )
    lam = sep
    trans = min(_transverse_measure(env, u_spec, exp.separation_axis),
                _transverse_measure(env, v_spec, exp.separation_axis))
    predicted = (u_spec.l2() * v_spec.l2() * math.sqrt(trans) / math.sqrt(lam)
                 if lam > 0 else math.inf)
    return BilinearMeasurement(
        value=math.sqrt(total), T=T, doublings=doublings,
        tail_fraction=tail if math.isfinite(tail) else 0.0,
        converged=converged, wrap_limited=wrap_limited, separation=lam,
        transverse_measure=trans, predicted_scale=predicted,
    )


def bilinear_oracle_1d(bump1: FourierBump, bump2: FourierBump,
                       rtol: float = 1e-8, start_nodes: int = 64,
                       max_nodes: int = 2048) -> float:
    """Exact-form quadrature of the 1D product norm (see module docstring).

    Gauss-Legendre tensor quadrature over the two supports, node counts
    doubling until the value settles.  Raises for overlapping supports,
    where the change of variables (and the formula) degenerates.
    """
    c1 = float(np.atleast_1d(bump1.center)[0])
    c2 = float(np.atleast_1d(bump2.center)[0])
    gap = abs(c1 - c2) - _support_radius(bump1) - _support_radius(bump2)
    if gap <= 0:
        raise ValueError(
            f"oracle requires separated supports; these overlap by {-gap:g}")
    profile = make_bump()

    def level(nodes: int) -> float:
        x, w = np.polynomial.legendre.leggauss(nodes)
        xi1 = c1 + 2.0 * bump1.width * x
        w1 = 2.0 * bump1.width * w
        xi2 = c2 + 2.0 * bump2.width * x
        w2 = 2.0 * bump2.width * w
        f1 = np.abs(bump1.amplitude * profile.radial(np.abs(xi1 - c1) / bump1.width)) ** 2
        f2 = np.abs(bump2.amplitude * profile.radial(np.abs(xi2 - c2) / bump2.width)) ** 2
        denom = 2.0 * np.abs(xi1[:, None] - xi2[None, :])
        integrand = (f1 * w1)[:, None] * (f2 * w2)[None, :] / denom
        return float(integrand.sum()) / (2.0 * np.pi) ** 2

    nodes = start_nodes
    prev = level(nodes)
    while nodes < max_nodes:
        nodes *= 2
        cur = level(nodes)
        if abs(cur - prev) <= rtol * max(cur, 1e-300):
            return math.sqrt(cur)
        prev = cur
    warnings.warn(f"oracle quadrature not settled below {rtol:g} at {max_nodes} nodes",
                  stacklevel=2)
    return math.sqrt(prev)


def _bilinear_point(args: tuple) -> dict:
    """Measure one separation of the two-bump interaction sweep."""
    lam, grid, width, d, conj1, conj2, compare_oracle = args
    offset = lam / 2.0 + 2.0 * width
    center1 = (-offset,) + (0.0,) * (d - 1)
    center2 = (+offset,) + (0.0,) * (d - 1)
    exp = BilinearExperiment(
        grid=grid,
        bump1=FourierBump(center=center1, width=width),
        bump2=FourierBump(center=center2, width=width),
        conj1=conj1, conj2=conj2,
    )
    got = bilinear_measure(exp)
    oracle = math.nan
    relerr = math.nan
    if compare_oracle and d == 1 and not (conj1 or conj2):
        oracle = bilinear_oracle_1d(exp.bump1, exp.bump2)
        relerr = abs(got.value - oracle) / oracle
    return {"separation": lam, "value": got.value, "oracle": oracle,
            "oracle_relerr": relerr, "T": got.T, "tail_fraction": got.tail_fraction,
            "predicted_scale": got.predicted_scale,
            "ratio_to_scale": got.ratio_to_scale}


def bilinear_sweep(separations: Sequence[float], width: float = 0.5, d: int = 1,
                   n: Optional[int] = None, conj1: bool = False, conj2: bool = False,
                   tolerance: float = 0.1, compare_oracle: bool = True,
                   jobs: int = 1) -> ExperimentReport:
    """Decay of the bilinear interaction as the frequency separation doubles.

    Bumps of equal width sit at +-(lambda/2 + 2 width) along the first axis so
    their support gap is exactly lambda.  The box is sized off the (fixed)
    width, so the wrap-around margin is separation-independent.  The fitted
    slope of value against lambda is compared to -1/2.

    The effective frequency distance between the pieces is lambda + O(width),
    so the measured slope only approaches -1/2 once the smallest separation
    dominates the widths; a warning flags sweeps that start too close.
    """
    if len(separations) < 5:
        raise ValueError(f"need at least 5 sweep points for a fit, got {len(separations)}")
    if min(separations) < 8.0 * width:
        warnings.warn(
            f"smallest separation {min(separations):g} is under 8x the width; "
            "the fitted slope will sit above -1/2 by a width correction",
            stacklevel=2,
        )
    lam_max = max(separations)
    L = 96.0 / width if d == 1 else 48.0 / width
    xi_needed = 1.3 * (lam_max / 2.0 + 4.0 * width)
    n_min = 2.0 * xi_needed * L / np.pi
    if n is None:
        n = 16
        while n < n_min:
            n *= 2
    elif n < n_min:
        raise ValueError(f"n={n} cannot hold separation {lam_max} (needs >= {n_min:.0f})")
    grid = make_grid(d, n, L)
    report = ExperimentReport(
        name="bilinear",
        parameters={"separations": list(separations), "width": width, "d": d,
                    "n": n, "L": L, "conj1": conj1, "conj2": conj2},
        row_fields=["separation", "value", "oracle", "oracle_relerr", "T", "tail_fraction",
                    "predicted_scale", "ratio_to_scale"],
    )
    points = [(float(lam), grid, width, d, conj1, conj2, compare_oracle)
              for lam in separations]
    report.rows = map_jobs(_bilinear_point, points, jobs)
    values = [row["value"] for row in report.rows]
    fit = fit_loglog(separations, values)
    report.metrics = {"slope": fit.slope, "intercept": fit.intercept,
                      "r_squared": fit.r_squared, "target_slope": -0.5}
    report.add_check("bilinear_decay_slope", fit.slope, target=-0.5, tolerance=tolerance)
    if compare_oracle and d == 1 and not (conj1 or conj2):
        worst = max(row["oracle_relerr"] for row in report.rows)
        report.add_check("oracle_agreement", worst, passed=worst <= 0.05,
                         detail="max relative error vs exact-form quadrature")
    return report
