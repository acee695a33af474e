"""Zeta continuation, regularized and characteristic determinants, Fredholm determinants."""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    log_det_integers_shifted,
    riemann_zeta,
    riemann_zeta_euler_maclaurin,
    sinh_char,
    sphere_log_det,
)
from specdet.determinants import (
    AsymptoticSeries,
    CharFn,
    c0_constant,
    char_fn_asymptotic,
    char_fn_eval,
    char_fn_full,
    fredholm_det,
    fredholm_det_inverse,
    reg_det,
    reg_det_full,
)
from specdet.errors import CutError, InputError, PoleError, PreconditionError
from specdet.expansion import integer_expansion
from specdet.spectrum import circle_spectrum, finite_spectrum, integer_spectrum, power, scale, union
from specdet.surface import sphere_operator_spectrum
from specdet.zeta import (
    EULER_GAMMA,
    ZetaEvaluator,
    residue_at,
    zeta_deriv_at_zero,
    zeta_eval,
    zeta_eval_with_error,
    zeta_value_at_zero,
)

TWO_PI = 2 * math.pi
INTS = ZetaEvaluator(integer_spectrum())


# -- zeta continuation ------------------------------------------------------------

@pytest.mark.parametrize("s", [2.0, 1.5, 0.5, -0.5, -1.0, -2.5, 0.3 + 4j])
def test_riemann_zeta_continuation(s):
    assert zeta_eval(INTS, s) == pytest.approx(riemann_zeta(s), rel=1e-10, abs=1e-12)


def test_independent_euler_maclaurin_oracle():
    for s in (0.5, -1.5, 3.0):
        assert zeta_eval(INTS, s).real == pytest.approx(riemann_zeta_euler_maclaurin(s), rel=1e-10)


def test_zeta_values_at_zero():
    assert zeta_value_at_zero(INTS) == -0.5
    assert zeta_deriv_at_zero(INTS).real == pytest.approx(-0.5 * math.log(TWO_PI), rel=1e-12)


def test_error_estimate_is_honest():
    r = zeta_eval_with_error(INTS, -0.5)
    assert abs(r.value - riemann_zeta(-0.5)) <= max(r.error, 1e-15)
    assert r.error < 1e-10


def test_circle_zeta_is_scaled_riemann():
    ev = ZetaEvaluator(circle_spectrum(3.0))
    for s in (0.75, -0.25, 2.0):
        want = 2 * (3.0 / TWO_PI) ** (2 * s) * riemann_zeta(2 * s)
        assert zeta_eval(ev, s) == pytest.approx(want, rel=1e-10)


def test_pole_is_refused():
    with pytest.raises(PoleError):
        zeta_eval(INTS, 1.0)


def test_residues():
    assert residue_at(INTS, -1.0) == pytest.approx(1.0)
    with pytest.raises(PoleError):
        residue_at(INTS, 1.0)  # 1/Gamma(-1) = 0: no pole at s = -1
    ev = ZetaEvaluator(circle_spectrum(TWO_PI))
    # 2 zeta(2s) has residue 1 at s = 1/2
    assert residue_at(ev, -0.5) == pytest.approx(1.0)


def test_finite_zeta_is_plain_sum():
    ev = ZetaEvaluator(finite_spectrum([1.0, 2.0, 3.0 + 1j], [1.0, 2.0, 1.0]))
    s = 0.7 - 0.2j
    want = 1 + 2 * 2 ** (-s) + (3 + 1j) ** (-s)
    assert zeta_eval(ev, s) == pytest.approx(want, rel=1e-14)
    assert zeta_value_at_zero(ev) == 4


def test_missing_expansion_rejected():
    seq = integer_spectrum().with_expansion(None)
    with pytest.raises(InputError):
        ZetaEvaluator(seq)


# -- regularized determinants ------------------------------------------------------

def test_finite_reg_det_is_product():
    seq = finite_spectrum([1.0, 2.0, 5.0], [1.0, 2.0, 1.0])
    assert reg_det(seq) == pytest.approx(20.0, rel=1e-14)


def test_sphere_operator_det():
    d = reg_det_full(sphere_operator_spectrum())
    assert d.log.real == pytest.approx(sphere_log_det(0.0), abs=1e-11)


@settings(max_examples=10, deadline=None)
@given(c=st.floats(0.3, 6.0))
def test_scaling_rule_property(c):
    seq = circle_spectrum(TWO_PI)
    z0 = zeta_value_at_zero(ZetaEvaluator(seq)).real
    assert reg_det_full(scale(seq, c)).log.real == pytest.approx(z0 * math.log(c) + math.log(TWO_PI**2),
                                                                 abs=1e-11)


def test_power_rule_integers():
    d = reg_det(integer_spectrum()).real
    assert reg_det(power(integer_spectrum(), 3.0)).real == pytest.approx(d**3, rel=1e-10)


# -- characteristic function --------------------------------------------------------

CIRCLE_CF = CharFn(circle_spectrum(TWO_PI, include_zero=True))
INT_CF = CharFn(integer_spectrum())


@pytest.mark.parametrize("lam", [0.5, 3.0, 1j, -0.5 + 2j, 30.0])
def test_circle_char_fn_sinh(lam):
    assert char_fn_eval(CIRCLE_CF, lam) == pytest.approx(sinh_char(TWO_PI, lam), rel=1e-9)


@pytest.mark.parametrize("lam", [0.5, 7.0, 2 - 3j, -2.5 + 0.1j])
def test_integer_char_fn_gamma(lam):
    assert char_fn_full(INT_CF, lam).log == pytest.approx(log_det_integers_shifted(lam), abs=1e-9)


def test_cut_policy():
    with pytest.raises(CutError):
        char_fn_eval(INT_CF, -2.5)
    v = char_fn_full(INT_CF, -2.5, allow_cut=True)
    assert v.log.real == pytest.approx(log_det_integers_shifted(-2.5).real, abs=1e-9)
    zero = char_fn_full(INT_CF, -3.0, allow_cut=True)
    assert zero.value == 0 and zero.zero_order == 1


@settings(max_examples=8, deadline=None)
@given(x=st.floats(0.1, 5.0), y=st.floats(0.1, 5.0))
def test_conjugate_symmetry(x, y):
    a = char_fn_eval(CIRCLE_CF, complex(x, y))
    b = char_fn_eval(CIRCLE_CF, complex(x, -y))
    assert a == pytest.approx(b.conjugate(), rel=1e-9)


def test_asymptotic_variants_agree_with_exact():
    series = AsymptoticSeries.from_expansion(integer_expansion(), alpha_keep=2.0)
    lam = 60.0
    for sign in (+1, -1):
        approx, nxt = char_fn_asymptotic(series, lam, sign=sign)
        exact = -log_det_integers_shifted(1j * sign * lam)
        assert abs(approx - exact) < 3 * nxt + 1e-12


def test_c0_regularized_is_euler_gamma():
    assert c0_constant() == pytest.approx(EULER_GAMMA, abs=1e-13)


def test_extra_alpha0_flag_double_counts():
    series = AsymptoticSeries.from_expansion(integer_expansion(), alpha_keep=0.0)
    lam = 80.0
    exact = -log_det_integers_shifted(1j * lam)
    plain, nxt = char_fn_asymptotic(series, lam, sign=1)
    extra, _ = char_fn_asymptotic(series, lam, sign=1, extra_alpha0_term=True)
    assert abs(plain - exact) < 3 * nxt
    # the extra term is c0 (C0 + gamma + i pi/2 + log lam): far outside the error budget
    assert abs(extra - exact) > 100 * nxt


# -- Fredholm -----------------------------------------------------------------------

def test_fredholm_finite_methods_agree():
    eigs = [0.3, -0.2 + 0.1j, 0.05]
    a = fredholm_det(eigs, method="product")
    b = fredholm_det(eigs, method="exp_series")
    assert a == pytest.approx(np.prod(1 + np.array(eigs)), rel=1e-15)
    assert b == pytest.approx(a, rel=1e-13)


def test_fredholm_preconditions():
    with pytest.raises(PreconditionError):
        fredholm_det([1.5], method="exp_series")
    with pytest.raises(PreconditionError):
        fredholm_det_inverse(integer_spectrum())  # sum 1/n diverges
    with pytest.raises(PreconditionError):
        fredholm_det_inverse(circle_spectrum(TWO_PI), "exp_series")  # smallest eigenvalue 1
    with pytest.raises(InputError):
        fredholm_det([0.1], method="bogus")


def test_fredholm_inverse_circle_sinh():
    # det_Fr(1 + A^-1) for eigenvalues k^2 (twice) is (sinh(pi)/pi)^2
    got = fredholm_det_inverse(circle_spectrum(TWO_PI))
    assert got == pytest.approx((math.sinh(math.pi) / math.pi) ** 2, rel=1e-12)


def test_direct_sum_rule():
    fin = finite_spectrum([0.5, 3.0], [1.0, 2.0])
    both = union(fin, circle_spectrum(TWO_PI))
    assert reg_det(both) == pytest.approx(reg_det(fin) * reg_det(circle_spectrum(TWO_PI)), rel=1e-10)


@pytest.mark.parametrize("sigma", [2.0, 0.5])
def test_power_rule_circle(sigma):
    d = reg_det(circle_spectrum(TWO_PI)).real
    assert reg_det(power(circle_spectrum(TWO_PI), sigma)).real == pytest.approx(d**sigma, rel=1e-10)


@pytest.mark.parametrize("direction", [1, -1, 1j, -1j])
def test_zero_order_is_multiplicity(direction):
    # circle eigenvalue 1 has multiplicity 2: |det(A + lam)| / |delta|^2 tends to a constant
    ratios = []
    for delta in (1e-3, 1e-4, 1e-5):
        lam = -1.0 + direction * delta
        ratios.append(abs(char_fn_eval(CIRCLE_CF, lam, allow_cut=True)) / delta**2)
    assert ratios[-1] > 0
    assert ratios[-1] == pytest.approx(ratios[-2], rel=1e-3)
