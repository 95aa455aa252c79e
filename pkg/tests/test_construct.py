import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from alphamod.construct import (
    IllposedDataSpec,
    SupercriticalDataSpec,
    WindowEmpty,
    build_illposed_v0,
    build_supercritical_u0,
    choose_kj,
    critical_index,
    discontinuity_demo,
    inflation_sweep,
    norm_claim_report,
    scaled_data,
    supercritical_pieces,
    taylor_coefficient,
    threshold_index,
)
from alphamod.evolve import EvolutionConfig, evolve, free_propagate
from alphamod.grid import AliasingError, Field, make_grid, to_spectral
from alphamod.norms import modulation_norm


@pytest.fixture(scope="module")
def default_spec():
    return SupercriticalDataSpec(eps=0.5, alpha=0.5, kappa=3, d=1, s=0.12,
                                 J=1, n_pieces=8, c=0.125)


@pytest.fixture(scope="module")
def default_grid():
    return make_grid(1, 131072, 16 * math.pi)


@pytest.fixture(scope="module")
def default_report(default_spec, default_grid):
    field = build_supercritical_u0(default_spec, default_grid)
    return norm_claim_report(field, default_spec)


@pytest.fixture(scope="module")
def g8192():
    return make_grid(1, 8192, 8 * math.pi)


@pytest.fixture(scope="module")
def v0_32(g8192):
    spec = IllposedDataSpec(N=32, s=-0.1, alpha=0.0, kappa=1, delta=1.0, d=1)
    return build_illposed_v0(spec, g8192)


class TestIndices:
    def test_critical_values(self):
        assert critical_index(1, 1) == pytest.approx(-0.5)
        assert critical_index(3, 1) == pytest.approx(1.0 / 6.0)
        assert critical_index(2, 2) == pytest.approx(0.5)

    def test_threshold_is_alpha_times_critical(self):
        for alpha in (0.0, 0.3, 0.5, 0.8):
            for kappa, d in ((1, 1), (3, 1), (2, 2)):
                got = threshold_index(alpha, kappa, d)
                assert got == pytest.approx(alpha * critical_index(kappa, d),
                                            abs=1e-15)

    def test_window_nonempty_when_mass_supercritical(self):
        for alpha in (0.0, 0.5, 0.9):
            assert threshold_index(alpha, 3, 1) < critical_index(3, 1)


class TestWindows:
    ALPHA0_LADDER = {2: 5, 3: 10, 4: 20, 5: 39, 6: 77, 7: 153, 8: 305,
                     9: 609, 10: 1218, 11: 2436, 12: 4871}
    ALPHA_HALF_LADDER = {6: 9, 7: 13, 8: 18, 9: 25, 10: 35, 11: 50, 12: 70}

    def test_unwindowed_ladder(self):
        for j, k in self.ALPHA0_LADDER.items():
            assert choose_kj(0.0, j) == k

    def test_stretched_ladder(self):
        for j, k in self.ALPHA_HALF_LADDER.items():
            assert choose_kj(0.5, j) == k

    def test_empty_windows(self):
        with pytest.raises(WindowEmpty):
            choose_kj(0.0, 1)
        for j in range(2, 6):
            with pytest.raises(WindowEmpty, match="no integer index"):
                choose_kj(0.5, j)

    def test_bad_window_index(self):
        with pytest.raises(ValueError, match="at least 1"):
            choose_kj(0.0, 0)

    @given(alpha=st.sampled_from([0.0, 0.3, 0.5, 0.8]),
           j=st.integers(min_value=2, max_value=12))
    def test_result_lands_in_window_and_is_minimal(self, alpha, j):
        def stretched(k):
            return (1.0 + k * k) ** (alpha / (2.0 * (1.0 - alpha))) * k

        try:
            k = choose_kj(alpha, j)
        except WindowEmpty:
            return
        lo, hi = 2.0 ** (j + 0.25), 2.0 ** (j + 0.5)
        assert lo <= stretched(k) < hi
        assert stretched(k - 1) < lo


class TestSpecValidation:
    def test_alpha_range(self):
        with pytest.raises(ValueError, match=r"alpha must be in \[0, 1\)"):
            SupercriticalDataSpec(eps=0.5, alpha=1.0, kappa=3, d=1, s=0.12)

    def test_kappa_positive_integer(self):
        with pytest.raises(ValueError, match="positive integer"):
            SupercriticalDataSpec(eps=0.5, alpha=0.5, kappa=0, d=1, s=0.12)

    def test_mass_supercritical_guard(self):
        with pytest.raises(ValueError, match="not mass-supercritical"):
            SupercriticalDataSpec(eps=0.5, alpha=0.0, kappa=1, d=1, s=-0.1)

    def test_regularity_window(self):
        # the window is open: its endpoints are excluded
        with pytest.raises(ValueError, match="outside the open window"):
            SupercriticalDataSpec(eps=0.5, alpha=0.0, kappa=3, d=1, s=0.0)
        with pytest.raises(ValueError, match="outside the open window"):
            SupercriticalDataSpec(eps=0.5, alpha=0.0, kappa=3, d=1, s=0.17)

    def test_positive_eps_and_piece_width(self):
        with pytest.raises(ValueError, match="eps must be positive"):
            SupercriticalDataSpec(eps=0.0, alpha=0.5, kappa=3, d=1, s=0.12)
        with pytest.raises(ValueError, match="width fraction"):
            SupercriticalDataSpec(eps=0.5, alpha=0.5, kappa=3, d=1, s=0.12,
                                  c=0.6)

    def test_illposed_frequency_floor(self):
        with pytest.raises(ValueError, match="N must be an integer >= 8"):
            IllposedDataSpec(N=4, s=-0.1, alpha=0.0, kappa=1, delta=1.0, d=1)

    def test_illposed_amplitude_formula(self):
        spec = IllposedDataSpec(N=16, s=-0.1, alpha=0.5, kappa=1, delta=1.0,
                                d=2)
        weight = math.sqrt(1.0 + 2 * 16.0**2)
        assert spec.index_weight == pytest.approx(weight, rel=1e-15)
        expo = -(spec.s + spec.d * spec.alpha / 2.0) / (1.0 - spec.alpha)
        assert spec.amplitude == pytest.approx(weight**expo, rel=1e-15)


class TestPieces:
    def test_placement_laws(self, default_spec, default_grid):
        pieces, skipped = supercritical_pieces(default_spec, default_grid)
        assert len(pieces) >= 4
        assert skipped == 5
        assert pieces[0].j == 6 and pieces[0].k == 9
        alpha, expo = default_spec.alpha, None
        expo = -(default_spec.s + default_spec.d * alpha / 2.0) / (1.0 - alpha)
        for p in pieces:
            weight = math.sqrt(1.0 + p.k**2)
            h = weight ** (alpha / (1.0 - alpha))
            assert p.weight == pytest.approx(weight, rel=1e-15)
            assert p.center == pytest.approx(h * p.k, rel=1e-15)
            assert p.width == pytest.approx(default_spec.c * h, rel=1e-15)
            amp = default_spec.eps / math.log(p.k) ** 2 * weight**expo
            assert p.amplitude == pytest.approx(amp, rel=1e-14)
        assert [b.j - a.j for a, b in zip(pieces, pieces[1:])] == \
            [default_spec.J] * (len(pieces) - 1)

    def test_data_linear_in_eps(self, default_spec, default_grid):
        one = build_supercritical_u0(default_spec, default_grid)
        two = build_supercritical_u0(replace(default_spec, eps=1.0),
                                     default_grid)
        assert np.array_equal(two.values, 2.0 * one.values)

    def test_tight_band_raises_before_folding(self):
        spec = SupercriticalDataSpec(eps=0.5, alpha=0.0, kappa=3, d=1, s=0.12)
        g = make_grid(1, 32, 16 * math.pi / 5.1)
        with pytest.raises(AliasingError, match="leaks past"):
            supercritical_pieces(spec, g)

    def test_empty_band_gives_zero_field(self):
        spec = SupercriticalDataSpec(eps=0.5, alpha=0.0, kappa=3, d=1, s=0.12)
        g = make_grid(1, 16, 8 * math.pi)
        u0 = build_supercritical_u0(spec, g)
        assert u0.l2() == 0.0


class TestScaledData:
    def test_sigma_one_is_identity(self, default_spec, default_grid):
        base = build_supercritical_u0(default_spec, default_grid)
        same = scaled_data(default_spec, 1.0, default_grid)
        assert np.array_equal(same.values, base.values)
        assert same.grid.L == default_grid.L

    def test_sigma_must_be_power_of_two(self, default_spec, default_grid):
        with pytest.raises(ValueError, match="power of two"):
            scaled_data(default_spec, 3.0, default_grid)

    def test_l2_scaling_exponent_exact(self, default_spec, default_grid):
        sigma = 4.0
        base = build_supercritical_u0(replace(default_spec, J=2), default_grid)
        scaled = scaled_data(default_spec, sigma, default_grid)
        target = sigma ** (1.0 / default_spec.kappa - default_spec.d / 2.0)
        assert scaled.l2() / base.l2() == pytest.approx(target, rel=1e-12)


class TestIllposedData:
    def test_field_is_real_and_even(self, g8192):
        spec = IllposedDataSpec(N=32, s=-0.1, alpha=0.0, kappa=1, delta=1.0,
                                d=1)
        v0 = build_illposed_v0(spec, g8192)
        peak = float(np.abs(v0.values).max())
        assert float(np.abs(v0.values.imag).max()) <= 1e-14 * peak
        body = v0.values.real[1:]
        assert_allclose(body, body[::-1], atol=1e-14 * peak)

    def test_spectral_peak_sits_on_the_bump_plateau(self, g8192):
        spec = IllposedDataSpec(N=32, s=-0.1, alpha=0.0, kappa=1, delta=1.0,
                                d=1)
        coeffs = to_spectral(build_illposed_v0(spec, g8192)).coefficients
        xi = g8192.xi_mesh()[0]
        peak = float(np.abs(xi[int(np.argmax(np.abs(coeffs)))]))
        assert 31.0 <= peak <= 33.0

    def test_norm_exactly_frequency_independent_at_zero_index(self, g8192):
        values = []
        for N in (8, 16, 64, 256):
            spec = IllposedDataSpec(N=N, s=0.0, alpha=0.0, kappa=1, delta=1.0,
                                    d=1)
            values.append(modulation_norm(build_illposed_v0(spec, g8192), 0.0, 0.0))
        assert max(values) / min(values) == pytest.approx(1.0, rel=1e-12)

    def test_norm_stays_flat_at_spec_index(self, g8192):
        values = []
        for N in (8, 16, 64, 256):
            spec = IllposedDataSpec(N=N, s=-0.1, alpha=0.0, kappa=1, delta=1.0,
                                    d=1)
            values.append(modulation_norm(build_illposed_v0(spec, g8192),
                                          spec.s, spec.alpha))
        assert max(values) / min(values) <= 1.01


class TestTaylor:
    def test_zero_data_gives_zero(self):
        g = make_grid(1, 256, 4 * math.pi)
        z = Field(g, np.zeros(g.shape, dtype=complex))
        assert taylor_coefficient(z, 0.5, 1).l2() == 0.0

    def test_amplitude_homogeneity(self, v0_32):
        # the response is a degree-(2 kappa + 1) monomial in the data
        full = taylor_coefficient(v0_32, 0.3, 1)
        half = taylor_coefficient(Field(v0_32.grid, 0.5 * v0_32.values), 0.3, 1)
        assert half.l2() / full.l2() == pytest.approx(0.125, rel=1e-12)

    def test_short_time_linearity(self, v0_32):
        a = taylor_coefficient(v0_32, 1e-3, 1).l2()
        b = taylor_coefficient(v0_32, 2e-3, 1).l2()
        assert b / a == pytest.approx(2.0, rel=0.02)

    def test_matches_full_solver_at_small_amplitude(self):
        g = make_grid(1, 512, 2 * math.pi)
        spec = IllposedDataSpec(N=8, s=-0.1, alpha=0.0, kappa=1, delta=1.0,
                                d=1)
        v0 = build_illposed_v0(spec, g)
        t, delta, lam = 0.5, 1e-2, 1.0
        coeff = taylor_coefficient(v0, t, 1)
        u0 = Field(g, delta * v0.values)
        traj = evolve(u0, EvolutionConfig(lam=lam, kappa=1, dt=2.5e-4,
                                          t_end=t, snapshot_stride=2000))
        response = traj.final.values - free_propagate(u0, t).values
        predicted = 1j * lam * delta**3 * coeff.values
        rel = (Field(g, response - predicted).l2()
               / Field(g, predicted).l2())
        assert rel <= 0.01


class TestNormClaims:
    def test_all_checks_pass(self, default_report):
        assert default_report.passed
        names = [c.name for c in default_report.checks]
        assert names == ["l2_scaling_exact", "modulation_sigma_slope",
                         "center_divergence_monotone", "shell_growth_exponent"]
        assert all(c.passed for c in default_report.checks)

    def test_metric_values(self, default_report):
        m = default_report.metrics
        assert m["l2_max_deviation"] <= 1e-10
        assert m["modulation_sigma_slope_raw"] == pytest.approx(0.274969,
                                                                abs=1e-4)
        assert m["shell_growth_slope"] == pytest.approx(m["shell_growth_target"],
                                                        abs=0.1)
        assert m["shell_growth_target"] == pytest.approx(
            (critical_index(3, 1) - 0.12) / 0.5, rel=1e-12)

    def test_rows_cover_all_stages(self, default_report):
        stages = {row["stage"] for row in default_report.rows}
        assert stages == {"sigma", "refine", "piece"}

    def test_refinement_admits_more_pieces(self, default_report):
        counts = [row["pieces"] for row in default_report.rows
                  if row["stage"] == "refine"]
        assert counts == sorted(counts) and counts[-1] > counts[0]

    def test_needs_enough_sigma_points(self, default_spec, default_grid):
        field = build_supercritical_u0(default_spec, default_grid)
        with pytest.raises(ValueError, match="usable sigma points"):
            norm_claim_report(field, default_spec, sigmas=(16.0, 32.0))


class TestInflation:
    def test_growth_slope_below_threshold_index(self, g8192):
        rep = inflation_sweep(-0.1, 0.0, 1, 1, [8, 16, 32, 64, 128], g8192)
        assert rep.passed
        assert rep.metrics["slope"] == pytest.approx(0.2056, abs=1e-3)
        assert rep.metrics["target_slope"] == pytest.approx(0.2, rel=1e-12)

    def test_control_above_threshold_is_nonincreasing(self, g8192):
        rep = inflation_sweep(0.1, 0.0, 1, 1, [8, 16, 32, 64, 128], g8192)
        assert rep.passed
        assert rep.metrics["slope"] <= 0.0

    def test_jobs_do_not_change_rows(self, g8192):
        serial = inflation_sweep(-0.1, 0.0, 1, 1, [8, 16, 32, 64], g8192)
        parallel = inflation_sweep(-0.1, 0.0, 1, 1, [8, 16, 32, 64], g8192, jobs=2)
        assert serial.rows == parallel.rows

    def test_needs_four_points(self, g8192):
        with pytest.raises(ValueError, match="at least 4 frequency points"):
            inflation_sweep(-0.1, 0.0, 1, 1, [8, 16, 32], g8192)

    def test_rejects_unknown_expectation(self, g8192):
        with pytest.raises(ValueError, match="expect must be"):
            inflation_sweep(-0.1, 0.0, 1, 1, [8, 16, 32, 64], g8192,
                            expect="diverge")


class TestDiscontinuityDemo:
    def test_solution_norm_jumps_past_free_baseline(self):
        g = make_grid(1, 16384, 8 * math.pi)
        rep = discontinuity_demo(-1.0, 0.0, 1, 1, 192, 0.3, g, 1e-4,
                                 time_constant=2.0)
        assert rep.passed
        assert rep.metrics["gain"] >= 10.0
        assert rep.metrics["data_norm"] > 0.0
        # the free flow leaves the norm untouched: same spectral modulus
        assert rep.metrics["free_baseline"] == pytest.approx(
            rep.metrics["data_norm"], rel=1e-9)
