import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import tiletool as tt
from tiletool.core import SeqWindow
from tiletool.staircase import (
    breakpoints,
    levels,
    staircase,
    staircase_ft,
    staircase_ft_minus_one,
    staircase_moment,
    support_width,
)

from oracles import simpson_transform


# ----------------------------------------------------------------------
# the step function itself


def test_order_one_is_unit_indicator():
    assert staircase(1, 0.0) == 1.0
    assert staircase(1, 0.999) == 1.0
    assert staircase(1, 1.0) == 0.0
    assert staircase(1, -0.001) == 0.0


def test_order_two_pieces():
    # pieces [0, 1/3) and [1/3, 2/3) with values 2 and 1
    assert staircase(2, 0.2) == 2.0
    assert staircase(2, 0.5) == 1.0
    assert staircase(2, 2.0 / 3.0) == 0.0
    # piecewise integral 2/3 + 1/3
    assert staircase_moment(2, 0) == pytest.approx(1.0, abs=1e-15)


def test_outside_support():
    assert staircase(5, -0.1) == 0.0
    assert staircase(5, support_width(5)) == 0.0
    assert staircase(5, 2.0 / 6.0) == 0.0  # the user-computable right endpoint


def test_order_validation():
    with pytest.raises(ValueError):
        staircase(0, 0.1)
    with pytest.raises(ValueError):
        staircase_ft(-3, 0.1)


@given(st.integers(min_value=1, max_value=60), st.floats(-1, 1, allow_nan=False))
def test_values_are_admissible_levels(k, x):
    v = staircase(k, x)
    assert v == int(v)
    assert 0 <= v <= k
    if not 0 <= x < support_width(k):
        assert v == 0


def test_unit_mass_up_to_200():
    for k in range(1, 201):
        assert abs(staircase_moment(k, 0) - 1.0) < 1e-12


def test_first_moment_closed_form_and_bound():
    # hand computation: integral of x * staircase = (2k+1) / (3k(k+1)),
    # so k times it stays below 2/3 + epsilon for every k
    for k in (1, 2, 3, 7, 20, 100, 200):
        m1 = staircase_moment(k, 1)
        assert m1 == pytest.approx((2 * k + 1) / (3.0 * k * (k + 1)), rel=1e-12)
        assert k * m1 <= 2.0 / 3.0 + 1e-12


# ----------------------------------------------------------------------
# the transform


def test_ft_at_zero_is_one():
    for k in (1, 2, 5, 31, 200):
        assert staircase_ft(k, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_ft_order_one_closed_form():
    xs = np.linspace(-3, 3, 61)
    xs = xs[np.abs(xs) > 1e-9]
    got = staircase_ft(1, xs)
    want = (1 - np.exp(-2j * np.pi * xs)) / (2j * np.pi * xs)
    assert np.max(np.abs(got - want)) < 1e-14


def test_ft_order_one_against_quadrature_oracle():
    # order 1 is the unit-interval indicator: one smooth piece
    for xi in (-2.7, -0.4, 0.31, 1.0, 3.0):
        want = simpson_transform(lambda x: np.ones_like(x), 0.0, 1.0, xi)
        assert abs(staircase_ft(1, xi) - want) < 1e-10


def test_ft_against_piecewise_quadrature_oracle():
    # higher orders jump between pieces, so the oracle integrates each
    # piece separately (Simpson is only accurate on smooth integrands)
    for k in (2, 7):
        bp = breakpoints(k)
        lvl = levels(k)
        for xi in (-2.7, -0.4, 0.31, 1.0, 3.0):
            want = sum(
                lvl[j] * simpson_transform(np.ones_like, bp[j], bp[j + 1], xi, n=1025)
                for j in range(k)
            )
            assert abs(staircase_ft(k, xi) - want) < 1e-10


@given(st.integers(min_value=1, max_value=50), st.floats(-8, 8, allow_nan=False))
def test_ft_hermitian_symmetry(k, xi):
    assert staircase_ft(k, -xi) == pytest.approx(np.conj(staircase_ft(k, xi)), abs=1e-13)


def _taylor_branch(k, xi):
    bp = breakpoints(k)
    lvl = levels(k)
    total = 0.0 + 0.0j
    for j in range(k):
        a, b = bp[j], bp[j + 1]
        piece = 0.0 + 0.0j
        for p in range(4):
            piece += (
                (-2j * np.pi * xi) ** p
                * (b ** (p + 1) - a ** (p + 1))
                / (math.factorial(p) * (p + 1))
            )
        total += lvl[j] * piece
    return total


def _exp_branch(k, xi):
    bp = breakpoints(k)
    lvl = levels(k)
    ib = np.exp(-2j * np.pi * xi * bp)
    return complex(np.dot(lvl, (ib[1:] - ib[:-1]) / (-2j * np.pi * xi)))


def test_branch_agreement_near_switch():
    for k in (1, 4, 12):
        xi_star = 1e-3 / support_width(k)
        for xi in np.linspace(0.2 * xi_star, xi_star, 11):
            assert abs(_taylor_branch(k, xi) - _exp_branch(k, xi)) < 1e-10
            # and the public function agrees with both around the threshold
            assert abs(staircase_ft(k, xi) - _exp_branch(k, xi)) < 1e-10


def test_minus_one_form_matches_ft():
    rng = np.random.default_rng(5)
    for k in (1, 2, 17, 101, 1025):
        xi = rng.uniform(-0.2, 0.2, 40)
        direct = staircase_ft(k, xi) - 1.0
        stable = staircase_ft_minus_one(k, xi)
        # 1e-11 headroom: near the switch the public form truncates its
        # Taylor expansion at 4 terms while the series form is adaptive
        assert np.max(np.abs(direct - stable)) < 1e-11
    # large arguments fall back to the closed form
    assert staircase_ft_minus_one(3, 7.0) == staircase_ft(3, 7.0) - 1.0


def test_linear_deviation_constant_is_absolute():
    # |ft(k, -xi) - 1| <= C |xi| / k with one finite constant across k
    xi = np.linspace(-10, 10, 801)
    xi = xi[np.abs(xi) > 1e-12]
    consts = []
    for k in (1, 2, 3, 5, 10, 20, 50, 100, 200):
        dev = np.abs(staircase_ft(k, -xi) - 1.0)
        consts.append(np.max(dev * k / np.abs(xi)))
    measured = max(consts)
    assert measured < 4.3  # 4 pi / 3 plus slack; the value is measured, not asserted
    assert min(consts) > 0.1


def test_two_point_lipschitz_bound():
    # measure the constant on a coarse sample, then check the bound with a
    # 5% margin on a finer, offset sample
    def ratios(us, vs, k):
        du = us * (staircase_ft(k, -us) - 1.0)
        dv = vs * (staircase_ft(k, -vs) - 1.0)
        denom = np.abs(vs - us) * np.maximum(np.abs(us), np.abs(vs))
        keep = denom > 1e-12
        return np.abs(dv - du)[keep] * k / denom[keep]

    rng = np.random.default_rng(11)
    ks = (1, 2, 5, 10, 25, 50)
    coarse = max(
        float(np.max(ratios(rng.uniform(-5, 5, 400), rng.uniform(-5, 5, 400), k)))
        for k in ks
    )
    fine = max(
        float(np.max(ratios(rng.uniform(-5, 5, 2000), rng.uniform(-5, 5, 2000), k)))
        for k in ks
    )
    assert fine <= 1.05 * coarse
    assert coarse < 30.0


# ----------------------------------------------------------------------
# the perturbation profile


def test_perturbation_all_zero():
    alpha = SeqWindow(3, np.zeros(7))
    for x in (-2.0, 0.0, 0.35, 2.9):
        assert tt.perturbation(alpha, x) == 0.0


def test_perturbation_single_positive():
    alpha = SeqWindow(0, [0.1])
    assert tt.perturbation(alpha, 0.0) == 1.0
    assert tt.perturbation(alpha, 0.0999) == 1.0
    assert tt.perturbation(alpha, 0.1) == 0.0
    assert tt.perturbation(alpha, -1e-9) == 0.0


def test_perturbation_single_negative():
    alpha = SeqWindow(0, [-0.1])
    assert tt.perturbation(alpha, 0.0) == -1.0
    assert tt.perturbation(alpha, -0.0999) == -1.0
    assert tt.perturbation(alpha, -0.1) == 0.0
    assert tt.perturbation(alpha, 1e-9) == 0.0


@given(
    st.integers(min_value=0, max_value=4),
    st.floats(-6, 6, allow_nan=False),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_perturbation_matches_full_summation(half, x, seed):
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-0.4, 0.4, 2 * half + 1)
    vals[np.abs(vals) < 1e-3] = 0.0
    alpha = SeqWindow(half, vals)
    brute = 0.0
    for n in range(-half, half + 1):
        a = alpha.value(n)
        if a == 0.0:
            continue
        brute += np.sign(a) * staircase(n * n + 1, (x - n) / a)
    assert tt.perturbation(alpha, x) == pytest.approx(brute, abs=1e-12)
