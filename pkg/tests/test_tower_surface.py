"""Covering towers and the hyperbolic surface determinant."""

from __future__ import annotations

import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import circle_theta_poisson, sphere_log_det
from specdet.errors import CutError, InputError
from specdet.surface import (
    ConjClassTerm,
    LengthSpectrum,
    conj_class_factor,
    geodesic_log_product,
    geodesic_product,
    geodesic_product_via_classes,
    identity_term,
    load_length_spectrum,
    spectral_parameter,
    surface_det,
)
from specdet.tower import (
    circle_tower,
    counting_function,
    det_convergence,
    gaps_nonincreasing,
    growth_estimate_check,
    heat_trace_convergence,
    heat_trace_limit,
    kazhdan_check,
    level_heat_gap_closed,
    level_heat_trace,
    spectral_gap_probe,
    torus_tower,
)

TWO_PI = 2 * math.pi


# -- towers -------------------------------------------------------------------------

def test_level_heat_trace_is_circle_theta():
    tower = circle_tower(TWO_PI, (1, 3))
    assert level_heat_trace(tower, 3, 0.4) == pytest.approx(circle_theta_poisson(3 * TWO_PI, 0.4), rel=1e-12)


def test_heat_trace_limit_and_gap():
    tower = circle_tower(TWO_PI, (1, 2, 4))
    t = 0.5
    assert heat_trace_limit(tower, t) == pytest.approx(TWO_PI / math.sqrt(4 * math.pi * t))
    rows = heat_trace_convergence(tower, t)
    for r in rows:
        assert abs(r.gap - abs(level_heat_gap_closed(tower, r.j, t))) <= r.error


def test_det_convergence_limit_is_l2_det():
    rows = det_convergence(circle_tower(TWO_PI, (1, 2, 4, 8)), 1.0)
    assert rows[-1].limit == pytest.approx(math.exp(TWO_PI), rel=1e-10)
    # level j: det^(1/j) = (4 sinh^2(j pi))^(1/j)
    for r in rows:
        want = (4 * math.sinh(r.j * math.pi) ** 2) ** (1 / r.j)
        assert r.value == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("lam", [1.0, 4.0])
def test_det_gaps_eventually_nonincreasing(lam):
    rows = det_convergence(circle_tower(TWO_PI, (1, 2, 4, 8, 16)), lam)
    assert gaps_nonincreasing(rows, start=1)
    assert rows[-1].gap < 1e-9 * abs(rows[-1].limit)


def test_torus_tower_counting_and_kazhdan():
    tower = torus_tower([1.0, 1.0], (1, 2, 4))
    assert tower.dimension == 2 and tower.index(4) == 16
    N = counting_function(tower, 1, (2 * math.pi) ** 2)
    # eigenvalues (2 pi)^2 (m^2 + n^2) <= (2 pi)^2: 5 lattice points
    assert N((2 * math.pi) ** 2) == 5
    rep = kazhdan_check(tower)
    assert rep.ratios == (1.0, 0.25, 0.0625)
    assert rep.limsup_estimate == 0.0


def test_spectral_gap_probe_verdicts():
    # below the first nonzero eigenvalue of level 1 but above it for high levels
    probe = spectral_gap_probe(circle_tower(TWO_PI, (1, 2, 4, 8, 16)), 0.5)
    assert probe.verdict == "inconsistent with a spectral gap"
    assert spectral_gap_probe(circle_tower(TWO_PI, (1,)), 0.5).verdict == "consistent with a spectral gap"
    with pytest.raises(InputError):
        spectral_gap_probe(circle_tower(TWO_PI, (1,)), -1.0)


def test_growth_estimate():
    ok = growth_estimate_check(circle_tower(TWO_PI, (1, 2, 4)), 0.5, 0.5, 2.0)
    assert all(ok.values())
    bad = growth_estimate_check(circle_tower(TWO_PI, (1, 2, 4)), 0.5, 0.5, 0.01)
    assert not any(bad.values())


def test_tower_rejects_bad_levels():
    with pytest.raises(InputError):
        circle_tower(TWO_PI, (0, 1))
    with pytest.raises(InputError):
        level_heat_trace(circle_tower(TWO_PI, (1, 2)), 3, 1.0)


# -- surface ------------------------------------------------------------------------

SPEC = LengthSpectrum(2, ((3.0, 2), (3.5, 2)))


def test_spectral_parameter_and_cut():
    assert spectral_parameter(0.0) == pytest.approx(0.5)
    with pytest.raises(CutError):
        spectral_parameter(-0.25)
    with pytest.raises(CutError):
        geodesic_product(SPEC, -1.0)


def test_conj_class_factor_closed_form():
    # l0 = 2, m = 1, lam = 3/4 (s = 1): exp(-e^-2 / (1 - e^-2)) = 0.855116...
    want = math.exp(-math.exp(-2) / (1 - math.exp(-2)))
    assert conj_class_factor(ConjClassTerm(2.0, 1), 0.75) == pytest.approx(want, rel=1e-15)
    assert want == pytest.approx(0.855116, abs=5e-7)
    # class gamma_0^2 of l0 = 1: same length, multiplicity 2 divides the log
    assert conj_class_factor(ConjClassTerm(1.0, 2), 0.75) == pytest.approx(math.sqrt(want), rel=1e-15)


def test_single_primitive_product():
    # prod_N (1 - e^(-2(1 + N))) for l = 2, lam = 3/4 is 0.846395...
    v = geodesic_product(LengthSpectrum(2, ((2.0, 1),)), 0.75)
    assert v == pytest.approx(0.846395, abs=5e-7)


def test_geodesic_product_direct_formula():
    lam = 1.0
    s = math.sqrt(lam + 0.25)
    want = 1.0
    for length, count in SPEC.primitives:
        for N in range(200):
            want *= (1 - math.exp(-(s + N) * length)) ** count
    assert geodesic_product(SPEC, lam) == pytest.approx(want, rel=1e-14)


@settings(max_examples=15, deadline=None)
@given(x=st.floats(-0.2, 6.0), y=st.floats(-3.0, 3.0))
def test_dual_routes_property(x, y):
    lam = complex(x, y)
    a = geodesic_log_product(SPEC, lam)
    b = geodesic_product_via_classes(SPEC, lam)
    assert abs(a.log - b.log) <= a.tail_bound + b.tail_bound + 1e-14


def test_empty_spectrum_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        v = geodesic_product(LengthSpectrum(2, ()), 1.0)
    assert v == 1.0 and caught


def test_identity_term_against_hurwitz_oracle():
    for lam in (0.0, 0.5, 2.0):
        s = math.sqrt(lam + 0.25)
        want = math.exp(-2 * (-(lam + 0.25) + sphere_log_det(s)))
        assert identity_term(2, lam) == pytest.approx(want, rel=1e-10)


def test_identity_term_increases_in_lambda():
    vals = [identity_term(2, lam) for lam in (0.0, 0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_identity_term_genus_one_and_prefactor():
    assert identity_term(1, 0.7) == 1.0
    assert identity_term(2, 0.7, prefactor=2.0) == pytest.approx(identity_term(2, 0.7) / 4, rel=1e-13)
    with pytest.raises(InputError):
        identity_term(0, 1.0)


def test_surface_det_assembles():
    d = surface_det(2, SPEC, 1.0)
    assert d.det == pytest.approx(d.identity * d.geodesic, rel=1e-15)


def test_length_spectrum_validation(tmp_path):
    with pytest.raises(InputError):
        LengthSpectrum(2, ((-1.0, 1),))
    with pytest.raises(InputError):
        LengthSpectrum(0, ())
    p = tmp_path / "ls.json"
    p.write_text('{"genus": 2, "primitives": [{"length": 3.5, "count": 2}, {"length": 3.0}]}')
    ls = load_length_spectrum(p)
    assert ls.primitives == ((3.0, 1), (3.5, 2))
