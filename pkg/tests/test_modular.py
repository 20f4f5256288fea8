import pytest

from jacobibv import examples as ex
from jacobibv import jacobi as jc
from jacobibv import modular as md
from jacobibv.jacobi import JetSection, WeightedForm, WeightedMultivector
from jacobibv.sampling import Sampler
from jacobibv.symalg import Chart, ExpPoly
from jacobibv.tensor import DiffForm, Multivector, apply_vector, ext_d, interior


def test_volume_validation(contact1):
    ch = contact1.chart
    with pytest.raises(md.VolumeError):
        md.as_volume(DiffForm.basis(ch, 0, 1))
    with pytest.raises(md.VolumeError):
        md.as_volume(DiffForm.zero(ch, 3))
    vol = md.as_volume(contact1.Phi)
    assert vol.ratio(contact1.Phi * 3) == ch.const(3)


def test_constant_symplectic_is_unimodular(plane_poisson):
    data = md.modular_data(plane_poisson, ex.standard_volume(plane_poisson.chart))
    assert data.V.is_zero() and data.divE.is_zero() and data.V_class.is_zero()


def test_modular_vector_definition(contact2):
    J, Phi = contact2.J, contact2.Phi
    data = md.modular_data(J, Phi)
    sm = Sampler(contact2.chart, seed=3, max_degree=2)
    for _ in range(5):
        f = sm.exppoly()
        assert md.modular_identity_residual(J, Phi, f, data).is_zero()
    assert md.modular_field_P_oracle(J, Phi) == data.V_class


@pytest.mark.parametrize("which, r", [("contact1", [1, 0, 2]), ("gcs1", [2, -1])])
def test_modular_class_rescaling(which, r, request):
    obj = request.getfixturevalue(which)
    shift, cob = md.rescaling_shift(obj.J, obj.Phi, r)
    # the shift is a coboundary, so the class is unchanged
    assert shift == -cob


def test_elw_examples(contact1, plane_poisson):
    c2 = plane_poisson.chart
    Phi2 = ex.standard_volume(c2)
    assert md.elw_expression(plane_poisson, Phi2, c2.coord(0)).is_zero()
    ch = contact1.chart
    assert md.elw_expression(contact1.J, contact1.Phi, ExpPoly.zero(ch)).is_zero()
    z = ch.coord(2)
    # 2 Vz + 2 z div E - (m - 1) Ez = 2 - 2
    assert md.elw_expression(contact1.J, contact1.Phi, z).is_zero()
    assert md.elw_closed_form_printed(contact1.J, contact1.Phi, z) == ch.const(1)


@pytest.mark.parametrize("which", ["contact1", "contact2", "gcs1"])
def test_elw_routes(which, request):
    obj = request.getfixturevalue(which)
    J, Phi = obj.J, obj.Phi
    sm = Sampler(J.chart, seed=5, max_degree=2)
    for _ in range(8):
        f = sm.exppoly()
        e = md.elw_expression(J, Phi, f)
        assert e == md.elw_expression_oracle(J, Phi, f)
        assert e == md.elw_closed_form(J, Phi, f)


def test_elw_printed_form_needs_dimension_two():
    J = ex.constant_poisson([[0, 1], [-1, 0]])
    chart = J.chart
    E = Multivector.basis(chart, 0) * chart.coord(0) - Multivector.basis(chart, 1) * chart.coord(1)
    # with m = 2 the (m - 1) coefficient is 1 and both forms agree whatever E is
    J2 = jc.JacobiStructure(J.L, E)
    Phi = ex.standard_volume(chart)
    sm = Sampler(chart, seed=6)
    for _ in range(5):
        f = sm.exppoly()
        assert md.elw_closed_form(J2, Phi, f) == md.elw_closed_form_printed(J2, Phi, f)


def test_elw_section(contact1):
    data = md.modular_data(contact1.J, contact1.Phi)
    A = data.A_candidates["elw"]
    m = contact1.chart.dim
    assert A == data.V_class * 2 + WeightedMultivector(1, contact1.J.E * (m + 1), Multivector.zero(contact1.chart, 0))
    f = contact1.chart.coord(0) * contact1.chart.coord(2)
    paired = jc.evaluate_cochain(A, [JetSection.jet(f)])
    assert paired == md.elw_expression(contact1.J, contact1.Phi, f)


def test_jet_connection_examples(contact1, plane_poisson):
    ch = contact1.chart
    theta = JetSection(DiffForm.zero(ch, 1), ch.const(1))
    assert md.jet_connection(contact1.J, contact1.Phi, theta) == ext_d(interior(contact1.J.E, contact1.Phi))
    c3 = Chart(("x1", "x2", "x3"))
    J0 = jc.JacobiStructure(Multivector.zero(c3, 2), Multivector.zero(c3, 1))
    s = JetSection(DiffForm.basis(c3, 0) * c3.coord(1), ExpPoly.zero(c3))
    assert md.jet_connection(J0, ex.standard_volume(c3), s).is_zero()


@pytest.mark.parametrize("which", ["contact1", "gcs1"])
def test_connection_is_flat(which, request):
    obj = request.getfixturevalue(which)
    sm = Sampler(obj.chart, seed=7, max_degree=1)
    for _ in range(5):
        s1, s2, th = sm.jet_section(), sm.jet_section(), sm.jet_section()
        assert md.curvature(obj.J, obj.Phi, s1, s2).is_zero()
        assert md.jet_connection(obj.J, obj.Phi, th) == md.jet_connection_oracle(obj.J, obj.Phi, th)


def test_printed_connection_differs(contact1):
    sm = Sampler(contact1.chart, seed=8, max_degree=1)
    diffs = [
        md.jet_connection(contact1.J, contact1.Phi, th) != md.jet_connection_printed(contact1.J, contact1.Phi, th)
        for th in (sm.jet_section() for _ in range(10))
    ]
    assert any(diffs)


def test_star_examples(plane_poisson):
    c2 = plane_poisson.chart
    Phi = ex.standard_volume(c2)
    one = WeightedMultivector(0, Multivector.scalar(c2.const(1)))
    assert md.star(one, Phi) == WeightedForm(3, DiffForm.zero(c2, 3), Phi)
    C = WeightedMultivector(2, Multivector.basis(c2, 0, 1), Multivector.zero(c2, 1))
    assert md.star(C, Phi) == WeightedForm(1, DiffForm.zero(c2, 1), DiffForm.scalar(c2.const(1)))
    assert [md.star_sign(k) for k in range(4)] == [1, -1, 1, -1]


def test_d0_is_bv_delta_when_unimodular(plane_poisson):
    Phi = ex.standard_volume(plane_poisson.chart)
    sm = Sampler(plane_poisson.chart, seed=9)
    for k in range(4):
        lam = sm.weighted_form(k)
        assert md.d0(plane_poisson, Phi, lam) == jc.bv_delta(plane_poisson, lam)


def test_d0_squares_to_zero(contact1):
    sm = Sampler(contact1.chart, seed=10)
    for k in range(2, 5):
        lam = sm.weighted_form(k)
        out = md.d0(contact1.J, contact1.Phi, md.d0(contact1.J, contact1.Phi, lam))
        assert out.is_zero()


def test_twisted_coboundary_oracle(contact1):
    sm = Sampler(contact1.chart, seed=11, max_degree=1)
    for k in range(3):
        C = sm.weighted_multivector(k)
        assert md.twisted_coboundary(contact1.J, contact1.Phi, C) == md.twisted_coboundary_oracle(contact1.J, contact1.Phi, C)


def test_interior_weighted_oracle(contact1):
    sm = Sampler(contact1.chart, seed=12)
    for k in range(3):
        W = sm.weighted_multivector(1)
        lam = sm.weighted_form(k + 1)
        assert md.interior_weighted(W, lam) == md.interior_weighted_oracle(W, lam)
