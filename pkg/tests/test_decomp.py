import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from alphamod.decomp import (
    CoverageError,
    alpha_center,
    alpha_radius,
    alpha_symbols,
    apply_projector,
    calibrate_constant,
    dyadic_symbols,
    eta_alpha,
    make_bump,
    partition_residual,
    phi_alpha,
)
from alphamod.grid import make_grid, to_spectral
from conftest import random_field


class TestBumpProfile:
    def test_plateau_and_support(self):
        phi = make_bump()
        r = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0])
        vals = phi.radial(r)
        assert_allclose(vals[:4], 1.0, rtol=0, atol=0)
        assert vals[4] == pytest.approx(0.5, abs=1e-15)
        assert vals[5] == 0.0
        assert vals[6] == 0.0

    def test_glue_midpoint_symmetry(self):
        # the transition satisfies phi(1 + t) + phi(2 - t) = 1
        phi = make_bump()
        t = np.linspace(0.0, 1.0, 101)
        assert_allclose(phi.radial(1.0 + t) + phi.radial(2.0 - t), 1.0, atol=1e-14)

    def test_profile_is_smooth_at_the_seams(self):
        phi = make_bump()
        h = 1e-5
        for edge in (1.0, 2.0):
            left = (phi.radial(np.array([edge])) - phi.radial(np.array([edge - h]))) / h
            right = (phi.radial(np.array([edge + h])) - phi.radial(np.array([edge]))) / h
            assert abs(left.item() - right.item()) < 1e-3

    def test_monotone_decreasing_on_transition(self):
        phi = make_bump()
        r = np.linspace(1.0, 2.0, 200)
        vals = phi.radial(r)
        assert np.all(np.diff(vals) <= 1e-15)


class TestBoxGeometry:
    @given(alpha=st.floats(0.0, 0.8), k=st.integers(-40, 40))
    def test_center_law(self, alpha, k):
        c = alpha_center(alpha, (k,))
        expected = (1.0 + k * k) ** (alpha / (2.0 * (1.0 - alpha))) * k
        assert c[0] == pytest.approx(expected, rel=1e-12)

    @given(alpha=st.floats(0.0, 0.8), k=st.integers(-40, 40))
    def test_radius_law(self, alpha, k):
        r = alpha_radius(alpha, 1.0, (k,))
        expected = (1.0 + k * k) ** (alpha / (2.0 * (1.0 - alpha)))
        assert r == pytest.approx(expected, rel=1e-12)

    def test_alpha_zero_is_the_unit_lattice(self):
        for k in (-3, 0, 7):
            assert alpha_center(0.0, (k,))[0] == float(k)
            assert alpha_radius(0.0, 1.0, (k,)) == 1.0

    def test_calibration_constant(self):
        # unit boxes tile the moderate-alpha lattices exactly; near alpha=1
        # the center spacing outruns the radius and the constant steps up
        for alpha in (0.0, 0.3, 0.5):
            assert calibrate_constant(alpha, 1) == pytest.approx(1.0, abs=1e-12)
        assert calibrate_constant(0.8, 1) == pytest.approx(1.25, abs=1e-12)
        for alpha in (0.0, 0.5, 0.8):
            assert calibrate_constant(alpha, 2) >= 1.0 - 1e-12

    def test_symbol_plateau_and_support(self):
        # phi is 1 inside the box core and 0 beyond twice the radius
        alpha, C, k = 0.5, 1.0, (4,)
        c = alpha_center(alpha, k)[0]
        r = alpha_radius(alpha, C, k)
        pts = np.array([c, c + 0.99 * r, c + 2.01 * r])
        vals = phi_alpha(alpha, C, k, pts)
        assert vals[0] == 1.0
        assert vals[1] == 1.0
        assert vals[2] == 0.0


class TestPartitions:
    @pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5, 0.8])
    def test_alpha_partition_residual(self, g256, alpha):
        syms = alpha_symbols(g256, alpha)
        assert partition_residual(syms) <= 1e-12

    def test_dyadic_partition_residual(self, g256):
        assert partition_residual(dyadic_symbols(g256)) <= 1e-14

    def test_dyadic_partition_residual_2d(self, g2d):
        assert partition_residual(dyadic_symbols(g2d)) <= 1e-14

    def test_alpha_partition_residual_2d(self, g2d):
        assert partition_residual(alpha_symbols(g2d, 0.5)) <= 1e-12

    def test_projectors_reconstruct_the_field(self, g256, rng):
        f = random_field(g256, rng)
        syms = alpha_symbols(g256, 0.5)
        total = np.zeros(g256.shape, dtype=complex)
        for idx in syms.indices:
            total += apply_projector(f, syms, idx).values
        assert_allclose(total, f.values, rtol=0, atol=1e-12 * f.l2())

    def test_dyadic_projectors_reconstruct(self, g256, rng):
        f = random_field(g256, rng)
        syms = dyadic_symbols(g256)
        total = np.zeros(g256.shape, dtype=complex)
        for idx in syms.indices:
            total += apply_projector(f, syms, idx).values
        assert_allclose(total, f.values, rtol=0, atol=1e-12 * f.l2())

    def test_projected_spectrum_stays_in_its_box(self, g256, rng):
        f = random_field(g256, rng)
        syms = alpha_symbols(g256, 0.5)
        idx = syms.indices[len(syms.indices) // 3]
        c = syms.center(idx)[0]
        r = syms.radius(idx)
        piece = to_spectral(apply_projector(f, syms, idx))
        xi = g256.xi_axis
        outside = np.abs(xi - c) > 2.0 * r + g256.dxi
        assert np.abs(piece.coefficients[outside]).max() <= 1e-14

    def test_eta_sums_to_one_on_band(self):
        # the normalized symbols eta_k = phi_k / sum_j phi_j partition unity
        g = make_grid(1, 512, 8 * math.pi)
        syms = alpha_symbols(g, 0.3)
        xi = g.xi_axis
        total = np.zeros_like(xi)
        for idx in syms.indices:
            total += eta_alpha(0.3, syms.C, idx, xi)
        keep = np.abs(xi) <= 0.5 * g.xi_max
        assert_allclose(total[keep], 1.0, atol=1e-12)

    def test_coverage_error_when_overlap_constant_too_small(self):
        # alpha=0.8 needs C=1.25; forcing C=0.5 leaves gaps between boxes
        g = make_grid(1, 256, 4 * math.pi)
        with pytest.raises(CoverageError, match="uncovered"):
            alpha_symbols(g, 0.8, C=0.5)

    def test_coverage_error_carries_a_suggestion(self):
        g = make_grid(1, 256, 4 * math.pi)
        with pytest.raises(CoverageError) as info:
            alpha_symbols(g, 0.8, C=0.5)
        assert info.value.suggested_constant >= 0.5
