import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoperi.calibration import (
    PolynomialOneForm,
    Region,
    exterior_derivative,
    midpoint_line_integral,
    verify_certificate,
)
from isoperi.curves import DiscreteCurve, circle, sample_fourier, star_curve
from isoperi.errors import InputError
from isoperi.forms import ConstantTwoForm
from isoperi.functionals import multi_volume
from oracles import ENLARGED_BOX_MARGIN, polygon_tangency_defect

# x0 dx1 - x1 dx0; |omega(x)| = |x| and omega(T) = 1 on the unit circle
ROT = PolynomialOneForm.canonical_primitive(2, 0, 1, scale=1.0)


def test_canonical_primitive_derivative():
    d = exterior_derivative(PolynomialOneForm.canonical_primitive(2, 0, 1))
    assert d.is_constant
    assert d.constant_form() == ConstantTwoForm(2, {(0, 1): 1.0})


def test_nonconstant_derivative():
    om = PolynomialOneForm(2, [(1, (2, 0), 1.0)])  # x0^2 dx1
    d = exterior_derivative(om)
    assert not d.is_constant
    assert d.components[(0, 1)] == {(1, 0): 2.0}
    with pytest.raises(InputError):
        d.constant_form()


def test_closed_form_derivative_vanishes():
    d = exterior_derivative(PolynomialOneForm(2, [(0, (0, 0), 1.0)]))
    assert d.components == {}
    assert d.is_constant


def test_from_constant_form_primitive():
    om = ConstantTwoForm(4, {(0, 1): 0.3, (1, 3): -1.2, (2, 3): 2.0})
    assert exterior_derivative(PolynomialOneForm.from_constant_form(om)).constant_form() == om


@st.composite
def polynomials(draw, n=3):
    k = draw(st.integers(1, 6))
    out = {}
    for _ in range(k):
        e = tuple(draw(st.lists(st.integers(0, 3), min_size=n, max_size=n)))
        if sum(e) <= 5:
            out[e] = draw(st.floats(-3, 3, allow_nan=False))
    return out


@settings(max_examples=60, deadline=None)
@given(polynomials())
def test_gradient_forms_are_closed(f):
    # df for deg f <= 5 has components of degree <= 4
    mons = []
    for e, c in f.items():
        for i in range(3):
            if e[i]:
                de = list(e)
                de[i] -= 1
                mons.append((i, tuple(de), c * e[i]))
    d = exterior_derivative(PolynomialOneForm(3, mons))
    assert all(abs(v) < 1e-12 for p in d.components.values() for v in p.values())


def test_degree_bound_and_finiteness():
    with pytest.raises(InputError):
        PolynomialOneForm(2, [(0, (3, 2), 1.0)])
    with pytest.raises(InputError):
        PolynomialOneForm(2, [(0, (1, 0), np.nan)])
    with pytest.raises(InputError):
        PolynomialOneForm(2, [(2, (1, 0), 1.0)])
    PolynomialOneForm(2, [(0, (2, 2), 1.0)])


def test_form_round_trip():
    om = PolynomialOneForm(3, [(0, (1, 2, 0), 0.25), (2, (0, 0, 4), -1 / 3), (1, (0, 0, 0), 1.0)])
    back = PolynomialOneForm.from_list(3, json.loads(json.dumps(om.to_list())))
    assert back == om
    with pytest.raises(InputError):
        PolynomialOneForm.from_list(3, [{"component": 0}])


def test_region_round_trip():
    r = Region.disc(1.5, 3)
    assert Region.from_dict(json.loads(json.dumps(r.to_dict()))) == r
    with pytest.raises(InputError):
        Region((1.0, 0.0), (0.0, 1.0))


def test_midpoint_integral_is_shoelace(rng):
    # the primitive is affine, so the midpoint rule is exact on every edge
    c = DiscreteCurve(rng.normal(size=(37, 4)))
    mv = multi_volume(c)
    for (i, j), v in mv.values.items():
        assert midpoint_line_integral(PolynomialOneForm.canonical_primitive(4, i, j), c) == pytest.approx(v, abs=1e-12)


def test_unit_circle_validates_on_disc():
    cert = verify_certificate(ROT, Region.disc(1.0), circle(), samples=101)
    assert cert.valid
    assert cert.comass_margin >= -1e-12
    assert cert.tangency_defect <= 1e-12
    assert cert.d_omega_constant
    d = cert.to_dict()
    assert d["label"] == "sampled certificate"
    assert d["grid_resolution"] == 101
    assert "proof" not in d["label"]


def test_polygon_route_defect_is_chord_error():
    N = 512
    cert = verify_certificate(ROT, Region.disc(1.0), sample_fourier(circle(), N))
    assert cert.tangency_defect == pytest.approx(polygon_tangency_defect(N), rel=1e-9)
    assert not cert.valid  # 1.9e-5 exceeds the default 1e-6
    assert verify_certificate(ROT, Region.disc(1.0), sample_fourier(circle(), N), tol=1e-4).valid


def test_enlarged_box_invalidates():
    cert = verify_certificate(ROT, Region.box(2.0), circle())
    assert cert.comass_margin == pytest.approx(ENLARGED_BOX_MARGIN, abs=1e-12)
    assert not cert.valid


def test_exact_form_cannot_calibrate():
    cert = verify_certificate(PolynomialOneForm(2, [(0, (0, 0), 1.0)]), Region.box(1.0), sample_fourier(circle(), 64))
    assert cert.tangency_defect >= 1.0
    assert not cert.valid


def test_margin_monotone_in_region(rng):
    om = PolynomialOneForm(2, [(0, (1, 1), 0.7), (1, (0, 2), -0.4), (1, (3, 0), 0.2)])
    c = sample_fourier(circle(0.5), 64)
    margins = [verify_certificate(om, Region.box(w), c, samples=41).comass_margin for w in (2.0, 1.5, 1.0, 0.6)]
    assert all(b >= a for a, b in zip(margins, margins[1:]))


def test_curve_outside_region():
    with pytest.raises(InputError):
        verify_certificate(ROT, Region.box(0.5), circle())
    with pytest.raises(InputError):
        verify_certificate(ROT, Region.box(1.0, 3), circle())


def test_scaled_star_curve_margin():
    c = star_curve(64, np.random.default_rng(1), 0.5, 0.9)
    cert = verify_certificate(ROT, Region.disc(1.0), c, samples=51)
    # |omega| peaks at the disc boundary
    assert cert.comass_margin == pytest.approx(0.0, abs=1e-12)
