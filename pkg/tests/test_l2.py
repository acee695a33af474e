"""L2 determinants of Gamma-trace models and equivariant determinants."""

from __future__ import annotations

import cmath
import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import alternating_zeta2, sinh_char
from specdet.errors import CutError, InputError, PreconditionError
from specdet.l2 import (
    circle_product_formula,
    equivariant_det,
    equivariant_det_limit,
    equivariant_l2_det,
    equivariant_l2_log_det,
    equivariant_l2_trace,
    equivariant_spectrum,
    equivariant_zeta,
    flat_model,
    gns_estimate,
    l2_det,
    l2_det_path_check,
    l2_log_det,
    l2_zeta_closed_form,
    l2_zeta_eval,
    line_model,
    rotation_spectrum,
)
from specdet.spectrum import circle_spectrum
from specdet.zeta import ZetaEvaluator, zeta_eval

TWO_PI = 2 * math.pi


# -- line and flat models ------------------------------------------------------------

@pytest.mark.parametrize("L", [1.0, TWO_PI])
@pytest.mark.parametrize("lam", [0.3, 1.0, 9.0])
def test_line_det_is_exponential(L, lam):
    assert l2_det(line_model(L), lam) == pytest.approx(math.exp(L * math.sqrt(lam)), rel=1e-10)


def test_line_det_off_axis_matches_principal_sqrt():
    lam = -1 + 2j
    assert l2_det(line_model(2.0), lam) == pytest.approx(cmath.exp(2.0 * cmath.sqrt(lam)), rel=1e-10)
    with pytest.raises(CutError):
        l2_det(line_model(2.0), -1.0)


@settings(max_examples=10, deadline=None)
@given(lam=st.floats(0.2, 8.0), s=st.floats(0.55, 2.5))
def test_numeric_mellin_matches_closed_form(lam, s):
    m = line_model(3.0)
    assert l2_zeta_eval(m, lam, s) == pytest.approx(l2_zeta_closed_form(m, lam, s), rel=1e-9)


def test_flat_torus_closed_form():
    m = flat_model([1.0, 2.0])
    lam = 1.5
    # C t^-1 with C = area / (4 pi): log det = -C lam (1 - log lam)
    C = 2.0 / (4 * math.pi)
    want = C * lam * (1 - math.log(lam))
    assert l2_log_det(m, lam).value.real == pytest.approx(want, rel=1e-10)


def test_flat_det_tends_to_one_from_the_right():
    m = flat_model([1.0, 1.0])
    vals = [abs(l2_log_det(m, lam).value) for lam in (1e-2, 1e-3, 1e-4)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-4


def test_line_at_zero_is_one():
    assert l2_det(line_model(TWO_PI), 0.0) == pytest.approx(1.0, abs=1e-12)


def test_path_check_line():
    direct, integrated = l2_det_path_check(line_model(TWO_PI), 2 + 3j)
    assert direct == pytest.approx(integrated, rel=1e-9)
    with pytest.raises(PreconditionError):
        l2_det_path_check(flat_model([1.0, 1.0]), 2.0)


def test_gns_estimates():
    assert gns_estimate(line_model(1.0)) == pytest.approx(1.0, abs=1e-2)
    assert gns_estimate(flat_model([1.0, 1.0, 1.0])) == pytest.approx(3.0, abs=1e-2)


# -- equivariant determinants of compact spectra ---------------------------------------

def test_identity_rotation_is_plain_zeta():
    plain = ZetaEvaluator(circle_spectrum(TWO_PI))
    for s in (0.75, 2.0, -0.5):
        assert equivariant_zeta(rotation_spectrum(TWO_PI, 1), s) == pytest.approx(zeta_eval(plain, s))


def test_half_turn_is_alternating_zeta():
    seq = rotation_spectrum(TWO_PI, 2)
    for s in (0.75, 1.0, 2.0):
        eta = (1 - 2 ** (1 - 2 * s)) * float(mp.zeta(2 * s))
        assert equivariant_zeta(seq, s).real == pytest.approx(-2 * eta, rel=1e-10)


def test_rotation_order_three_against_direct_sum():
    assert equivariant_zeta(rotation_spectrum(TWO_PI, 3), 1.0).real == pytest.approx(alternating_zeta2(3),
                                                                                         rel=1e-8)


def test_equivariant_det_limit():
    full = rotation_spectrum(TWO_PI, 2, include_zero=True)
    reduced = rotation_spectrum(TWO_PI, 2)
    target = equivariant_det(reduced).real
    vals = equivariant_det_limit(full, 1.0, [1e-2, 1e-4, 1e-6])
    errs = [abs(v - target) for v in vals]
    assert errs[0] > errs[1] > errs[2]
    # first-order approach in lam
    assert errs[1] / errs[2] == pytest.approx(100.0, rel=0.05)
    assert target == pytest.approx(math.pi**2 / 4, rel=1e-12)
    # oracle: -zeta'(0) of -2 (1 - 2^(1-2s)) zeta(2s)
    d = mp.diff(lambda s: -2 * (1 - mp.power(2, 1 - 2 * s)) * mp.zeta(2 * s), 0)
    assert target == pytest.approx(float(mp.exp(-d)), rel=1e-10)


def test_finite_equivariant_spectrum():
    pairs = [(1.0, 1.0), (2.0, -1.0), (3.0, 2.0)]
    assert equivariant_det(pairs) == pytest.approx(1.0 * 0.5 * 9.0, rel=1e-14)
    with pytest.raises(InputError):
        equivariant_spectrum([])


# -- equivariant L2 (line) and the circle product formula ---------------------------------

def test_equivariant_trace_poisson_term():
    L, n, t = 2.0, 3, 0.7
    want = L / math.sqrt(4 * math.pi * t) * math.exp(-(n * L) ** 2 / (4 * t))
    assert equivariant_l2_trace(L, n, t) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("n", [1, -2, 4])
def test_equivariant_l2_routes_agree(n):
    a = equivariant_l2_log_det(TWO_PI, n, 0.8)
    b = equivariant_l2_log_det(TWO_PI, n, 0.8, method="closed")
    assert a == pytest.approx(b, abs=1e-14)
    assert equivariant_l2_det(TWO_PI, n, 0.8) == pytest.approx(cmath.exp(b), rel=1e-13)


@pytest.mark.parametrize("lam", [0.25, 2.0, 1 + 1j])
def test_product_formula(lam):
    assert circle_product_formula(TWO_PI, lam) == pytest.approx(sinh_char(TWO_PI, lam), rel=1e-10)
    assert circle_product_formula(3.0, lam, method="closed") == pytest.approx(sinh_char(3.0, lam), rel=1e-12)
