import math

import numpy as np
import pytest

import tiletool as tt
from tiletool.core import GridFunction, SeqWindow
from tiletool.fixed_point import INTERVAL, ContractionError, default_grid_size
from tiletool.staircase import staircase_ft

from oracles import second_derivative


# ----------------------------------------------------------------------
# the remainder operator


def test_remainder_of_zero_is_zero():
    alpha = SeqWindow(4, np.zeros(9))
    out = tt.transform_remainder(alpha)
    assert np.all(out.samples == 0)
    assert out.interval == INTERVAL


def test_remainder_single_term_closed_form():
    r = 0.07
    alpha = SeqWindow(0, [r])
    out = tt.transform_remainder(alpha, grid=257)
    want = r * (staircase_ft(1, -r * out.grid) - 1.0)
    assert np.max(np.abs(out.samples - want)) < 1e-13


def test_remainder_is_hermitian():
    rng = np.random.default_rng(3)
    alpha = SeqWindow(6, rng.uniform(-0.1, 0.1, 13))
    out = tt.transform_remainder(alpha)
    assert out.hermitian_defect() < 1e-15


def test_remainder_quadratic_bound():
    # ||R alpha|| <= C ||alpha||^2 with one measured constant
    rng = np.random.default_rng(7)
    ratios = []
    for _ in range(20):
        vals = rng.uniform(-0.1, 0.1, 13)
        alpha = SeqWindow(6, vals)
        if alpha.sup_norm == 0:
            continue
        out = tt.transform_remainder(alpha, grid=257)
        ratios.append(np.max(np.abs(out.samples)) / alpha.sup_norm**2)
    measured = max(ratios)
    assert measured < 25.0
    assert min(ratios) > 0.0


# ----------------------------------------------------------------------
# the coefficient map


def _grid(m=1025):
    return np.linspace(INTERVAL[0], INTERVAL[1], m)


def test_coefficients_of_constant():
    psi = GridFunction(INTERVAL, np.full(1025, 2.5, dtype=complex))
    c = tt.fourier_coefficients(psi, 8)
    assert c.value(0) == pytest.approx(2.5, abs=1e-12)
    others = [c.value(n) for n in range(-8, 9) if n != 0]
    assert max(abs(v) for v in others) < 1e-12


def test_coefficients_of_pure_harmonics():
    t = _grid()
    psi = GridFunction(INTERVAL, np.exp(2j * np.pi * t) + np.exp(-2j * np.pi * t))
    c = tt.fourier_coefficients(psi, 4)
    assert c.value(1) == pytest.approx(1.0, abs=1e-12)
    assert c.value(-1) == pytest.approx(1.0, abs=1e-12)
    assert abs(c.value(0)) < 1e-12 and abs(c.value(2)) < 1e-12


def test_coefficients_grid_refinement():
    # smooth 1-periodic Hermitian sample function: trapezoid coefficients
    # are spectrally accurate, so refinement changes almost nothing
    def sample(m):
        t = _grid(m)
        return GridFunction(INTERVAL, np.exp(1j * np.sin(2 * np.pi * t)))

    coarse = tt.fourier_coefficients(sample(1025), 10)
    fine = tt.fourier_coefficients(sample(10251), 10)
    assert np.max(np.abs(coarse.values - fine.values)) < 1e-9


def test_coefficients_symmetry_violation():
    t = _grid()
    psi = GridFunction(INTERVAL, t + 1j)
    with pytest.raises(ValueError, match="symmetry"):
        tt.fourier_coefficients(psi, 4)


def test_coefficients_grid_too_coarse():
    psi = GridFunction(INTERVAL, np.ones(64, dtype=complex))
    with pytest.raises(ValueError, match="8"):
        tt.fourier_coefficients(psi, 16)


def test_coefficients_imaginary_leak_detected():
    # a tiny even imaginary part passes the symmetry gate but leaves a
    # complex zeroth coefficient
    t = _grid()
    psi = GridFunction(INTERVAL, 1.0 + 1e-9j * np.cos(2 * np.pi * t) ** 0)
    with pytest.raises(ValueError, match="not real"):
        tt.fourier_coefficients(psi, 2)


# ----------------------------------------------------------------------
# the solve


def test_solve_zero_target():
    rep = tt.solve_displacements(0.0, 4)
    assert rep.iterations == 1
    assert rep.final_residual == 0.0
    assert np.all(rep.alpha.values == 0)


def test_solve_small_r_band():
    rep = tt.solve_displacements(0.01, 32, tol=1e-12)
    mags = np.abs(rep.alpha.values)
    assert np.all(mags >= 0.5 * 0.01) and np.all(mags <= 1.5 * 0.01)
    assert rep.final_residual < 1e-12
    assert all(rho < 1 for rho in rep.contraction_ratios)
    # ball property: the solution stays within eps * ||beta|| of beta
    beta = ((-1.0) ** rep.alpha.indices) * 0.01
    assert np.max(np.abs(rep.alpha.values - beta)) <= 0.5 * 0.01


def test_solve_residual_recomputed_independently():
    rep = tt.solve_displacements(0.05, 8)
    beta = ((-1.0) ** rep.alpha.indices) * 0.05
    co = tt.fourier_coefficients(tt.transform_remainder(rep.alpha), 8)
    res = np.max(np.abs(rep.alpha.values + co.values - beta))
    assert res < 1e-12
    assert res == pytest.approx(rep.final_residual, abs=1e-15)


def test_contraction_ratio_scales_linearly_in_r():
    rates = []
    for r in (0.1, 0.05, 0.025, 0.0125):
        rep = tt.solve_displacements(r, 8)
        rates.append(np.median(rep.contraction_ratios) / r)
    assert max(rates) / min(rates) < 1.5


def test_non_contraction_raises():
    with pytest.raises(ContractionError):
        tt.solve_displacements(2.0, 6, max_iter=30)


def test_auto_solve_returns_admissible_r(auto_report_32):
    rep = auto_report_32
    assert rep.r > 0
    assert all(rho < 1 for rho in rep.contraction_ratios)
    assert rep.final_residual < 1e-12


def test_solve_report_json_fields(tmp_path):
    rep = tt.solve_displacements(0.05, 3)
    d = rep.to_json()
    assert set(d) >= {"alpha", "iterations", "finalResidual", "contractionRatios", "r"}
    assert len(d["alpha"]) == 7


# ----------------------------------------------------------------------
# the scattered translation set


def test_cluster_at_zero():
    lam = tt.build_translation_set(SeqWindow(0, [0.05]))
    assert np.allclose(lam.points, [0.05], atol=1e-16)


def test_cluster_at_one():
    alpha = SeqWindow(1, [0.06, 0.05, 0.06])
    lam = tt.build_translation_set(alpha)
    # cluster at n=1 holds 2 points 2 j 0.06 / 6, j = 1, 2
    right = lam.points[lam.points > 0.5]
    assert right.size == 2
    assert np.max(np.abs(right - np.array([1.02, 1.04]))) < 1e-15


def test_cluster_counts_and_spread():
    rep = tt.solve_displacements(0.05, 6)
    lam = tt.build_translation_set(rep.alpha)
    eps = 1.5 * 0.05
    for n in range(-6, 7):
        count = lam.count_in(n - 0.5, n + 0.5)
        assert count == n * n + 1
        cluster = lam.points[(lam.points > n - 0.5) & (lam.points < n + 0.5)]
        assert np.all(np.abs(cluster - n) < eps)
    assert lam.window == (-7.0, 7.0)


def test_degenerate_cluster_rejected():
    with pytest.raises(ValueError, match="alpha_n = 0"):
        tt.build_translation_set(SeqWindow(1, [0.1, 0.0, 0.1]))


def test_growth_exponent_of_scattered_set(kargaev_sets):
    _, lam = kargaev_sets[32]
    gamma = tt.growth_exponent(lam.points)
    assert abs(gamma - 3.0) <= 0.2


# ----------------------------------------------------------------------
# the tiler


def test_tiler_zero_integral(unit_tiler):
    assert abs(unit_tiler.ft_value(0.0)) <= 1e-16
    assert unit_tiler.deriv_order == 2
    assert unit_tiler.factor == 0.5


def test_tiler_normalizer_arithmetic():
    c2 = -1.0 / (4 * math.pi**2)
    norm = c2 * math.factorial(2) * (-2j * math.pi) ** 2
    assert norm == pytest.approx(2.0, abs=1e-15)
    assert abs(1.0 / norm - tt.build_schwartz_tiler(1.0, 0.4).factor) < 1e-15


def test_tiler_transform_shape(unit_tiler):
    # represented transform is -2 pi^2 t^2 * profile(t)
    t = np.array([0.05, 0.21, -0.33])
    want = -2 * math.pi**2 * t**2 * tt.bump(t / 0.4, flatness=3)
    assert np.max(np.abs(unit_tiler.ft_value(t) - want)) < 1e-12


@pytest.mark.parametrize("w", [1.0, -2.5, 0.3])
def test_tiler_product_identity(w):
    # pairing f's transform against delta_0 - delta_0''/(4 pi^2) returns w:
    # the only survivor is -f''(0)/(4 pi^2), so the second derivative of
    # the transform at 0 must equal -4 pi^2 w
    f = tt.build_schwartz_tiler(w, 0.4)
    d2 = second_derivative(lambda t: f.ft_value(t).real, 0.0, h=1e-3)
    assert d2 / (-4 * math.pi**2) == pytest.approx(w, rel=1e-4)


def test_tiler_band_radius_validation():
    for bad in (0.0, 0.5, 0.7, -0.1):
        with pytest.raises(ValueError):
            tt.build_schwartz_tiler(1.0, bad)


def test_default_grid_size():
    assert default_grid_size(32) == 1025
    assert default_grid_size(200) == 1601
