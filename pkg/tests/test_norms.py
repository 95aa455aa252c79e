import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from alphamod.grid import Field, FourierBump, SpectralField, make_grid, sample, to_physical, to_spectral
from alphamod.norms import (
    ZeroModeError,
    besov_norm,
    dyadic_shell_masses,
    embedding_report,
    lp_norm,
    modulation_norm,
    norm_report,
    p_variation,
    p_variation_reference,
    sobolev_norm,
)
from conftest import random_field


def lattice_mode(grid, k: float):
    coeffs = np.zeros(grid.shape, dtype=complex)
    coeffs[int(np.argmin(np.abs(grid.xi_axis - k)))] = 1.0
    return to_physical(SpectralField(grid, coeffs))


@pytest.fixture(scope="module")
def g16():
    return make_grid(1, 1024, 16 * math.pi)


class TestModulationNorm:
    def test_single_mode_sharp_counts_overlapping_boxes(self, g16):
        # a lattice mode at xi=7 sits in the closed unit boxes 6, 7, and 8
        s = 0.6
        f = lattice_mode(g16, 7.0)
        amp = math.sqrt(g16.dxi / (2 * math.pi))
        expected = sum((1 + k * k) ** (s / 2) for k in (6, 7, 8)) * amp
        assert modulation_norm(f, s, 0.0) == pytest.approx(expected, rel=1e-12)

    def test_single_mode_smooth_weights_sum_to_one(self, g16):
        # eta partitions unity, so the smooth variant sees the mode once with
        # a weight between the neighboring box weights
        s = 0.6
        f = lattice_mode(g16, 7.0)
        amp = math.sqrt(g16.dxi / (2 * math.pi))
        got = modulation_norm(f, s, 0.0, variant="smooth")
        lo = (1 + 36) ** (s / 2) * amp
        hi = (1 + 64) ** (s / 2) * amp
        assert lo <= got <= hi

    @given(c=st.floats(0.1, 4.0))
    def test_homogeneity(self, c):
        g = make_grid(1, 256, 4 * math.pi)
        f = sample(g, FourierBump(center=3.0, width=0.5))
        base = modulation_norm(f, 0.3, 0.5)
        scaled = modulation_norm(Field(g, c * f.values), 0.3, 0.5)
        assert scaled == pytest.approx(c * base, rel=1e-12)

    def test_translation_invariance(self, g16, rng):
        f = random_field(g16, rng)
        shift = np.exp(1j * g16.xi_axis * 2.7)
        g_shifted = to_physical(SpectralField(g16, to_spectral(f).coefficients * shift))
        for variant in ("sharp", "smooth"):
            assert modulation_norm(g_shifted, 0.4, 0.5, variant=variant) == pytest.approx(
                modulation_norm(f, 0.4, 0.5, variant=variant), rel=1e-11)

    def test_monotone_in_s(self, g16, rng):
        f = random_field(g16, rng)
        values = [modulation_norm(f, s, 0.5) for s in (-0.5, 0.0, 0.5, 1.0)]
        assert values == sorted(values)

    def test_dominates_l2_at_s_zero(self, g16, rng):
        f = random_field(g16, rng)
        assert modulation_norm(f, 0.0, 0.3) >= f.l2() * (1 - 1e-12)

    def test_triangle_inequality(self, g16, rng):
        f1 = random_field(g16, rng)
        f2 = random_field(g16, rng)
        both = Field(g16, f1.values + f2.values)
        lhs = modulation_norm(both, 0.3, 0.5)
        rhs = modulation_norm(f1, 0.3, 0.5) + modulation_norm(f2, 0.3, 0.5)
        assert lhs <= rhs * (1 + 1e-12)

    def test_rejects_alpha_one(self, g16):
        f = lattice_mode(g16, 3.0)
        with pytest.raises(ValueError):
            modulation_norm(f, 0.0, 1.0)


class TestBesovAndSobolev:
    def test_shell_convention(self, g16):
        # level m holds 2^{m-1} < |xi| <= 2^m; a mode at 7 lands in shell 3
        f = lattice_mode(g16, 7.0)
        masses = dict(dyadic_shell_masses(f))
        amp = math.sqrt(g16.dxi / (2 * math.pi))
        assert masses[3] == pytest.approx(amp, rel=1e-12)
        assert sum(v for m, v in masses.items() if m != 3) <= 1e-14

    def test_besov_q1_is_weighted_shell_sum(self, g16, rng):
        f = random_field(g16, rng)
        s = 0.35
        direct = sum(2.0 ** (m * s) * mass for m, mass in dyadic_shell_masses(f))
        assert besov_norm(f, s, q=1.0) == pytest.approx(direct, rel=1e-12)

    def test_besov_qinf_is_weighted_shell_sup(self, g16, rng):
        f = random_field(g16, rng)
        s = 0.35
        direct = max(2.0 ** (m * s) * mass for m, mass in dyadic_shell_masses(f))
        assert besov_norm(f, s, q=math.inf) == pytest.approx(direct, rel=1e-12)

    def test_sobolev_matches_direct_sum(self, g16, rng):
        f = random_field(g16, rng)
        s = 0.8
        coeffs = to_spectral(f).coefficients
        xi = g16.xi_axis
        direct = math.sqrt(float(np.sum((1 + xi**2) ** s * np.abs(coeffs) ** 2))
                           * g16.dxi / (2 * math.pi))
        assert sobolev_norm(f, s) == pytest.approx(direct, rel=1e-12)

    def test_sobolev_zero_order_is_l2(self, g16, rng):
        f = random_field(g16, rng)
        assert sobolev_norm(f, 0.0) == pytest.approx(f.l2(), rel=1e-12)

    def test_homogeneous_negative_order_rejects_zero_mode(self, g16):
        f = Field(g16, np.full(g16.shape, 0.5 + 0j))
        with pytest.raises(ZeroModeError, match="zero mode"):
            sobolev_norm(f, -0.5, homogeneous=True)

    def test_homogeneous_fine_without_zero_mode(self, g16):
        f = lattice_mode(g16, 5.0)
        amp = math.sqrt(g16.dxi / (2 * math.pi))
        assert sobolev_norm(f, -0.5, homogeneous=True) == pytest.approx(
            5.0 ** (-0.5) * amp, rel=1e-12)

    def test_lp_norm_matches_numpy(self, g16, rng):
        f = random_field(g16, rng)
        direct = (float(np.sum(np.abs(f.values) ** 4)) * g16.dx) ** 0.25
        assert lp_norm(f, 4.0) == pytest.approx(direct, rel=1e-12)
        assert lp_norm(f, math.inf) == pytest.approx(float(np.abs(f.values).max()))


class TestPVariation:
    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=10),
           st.floats(1.0, 4.0))
    def test_dp_equals_exhaustive(self, xs, p):
        assert p_variation(xs, p) == p_variation_reference(xs, p)

    def test_monotone_series_reduces_to_range(self):
        xs = [0.0, 0.3, 1.1, 2.0, 4.5]
        assert p_variation(xs, 2.0) == pytest.approx(4.5)
        assert p_variation(xs, 3.0) == pytest.approx(4.5)

    def test_p1_is_total_variation(self):
        xs = [0.0, 1.0, -1.0, 0.5]
        assert p_variation(xs, 1.0) == pytest.approx(1 + 2 + 1.5)

    def test_oscillation_beats_endpoints(self):
        # turning points contribute: (0,1,0,2) at p=2 gives 1+1+4, not 4
        assert p_variation([0.0, 1.0, 0.0, 2.0], 2.0) == pytest.approx(math.sqrt(6))


class TestNormReport:
    def test_partial_sums_monotone_and_complete(self, g16, rng):
        f = random_field(g16, rng)
        rep = norm_report(f, 0.3, 0.5)
        sums = rep.partial_sums
        assert all(b >= a - 1e-15 for a, b in zip(sums, sums[1:]))
        assert sums[-1] == pytest.approx(rep.modulation_sharp, rel=1e-9)

    def test_zero_field_reports_zeros(self, g16):
        rep = norm_report(Field(g16, np.zeros(g16.shape, dtype=complex)), 0.2, 0.5)
        assert rep.l2 == 0.0
        assert rep.modulation_sharp == 0.0
        assert rep.besov == 0.0

    def test_ratio_sits_in_expected_band(self, g16, rng):
        f = random_field(g16, rng)
        rep = norm_report(f, 0.3, 0.5)
        assert rep.ratio_in_expected_band

    def test_series_rows_carry_box_indices(self, g16, rng):
        f = random_field(g16, rng)
        rep = norm_report(f, 0.3, 0.5)
        assert all(isinstance(entry["index"], tuple) for entry in rep.series)
        assert rep.max_box_index >= 1


class TestEmbeddings:
    def test_modulation_into_besov(self, g16):
        rep = embedding_report(g16, "modulation_into_besov", 0.5, 0.25, 0.5,
                               count=20, seed=3)
        assert rep.passed

    def test_besov_into_modulation(self, g16):
        rep = embedding_report(g16, "besov_into_modulation", 0.5, 0.25, 0.5,
                               count=20, seed=3)
        assert rep.passed

    def test_unknown_direction(self, g16):
        with pytest.raises(ValueError, match="unknown direction"):
            embedding_report(g16, "sideways", 0.5, 0.25, 0.5)
