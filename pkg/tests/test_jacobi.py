import pytest

from jacobibv import examples as ex
from jacobibv import jacobi as jc
from jacobibv.jacobi import JacobiStructure, JetSection, WeightedForm, WeightedMultivector
from jacobibv.report import InvalidStructureWarning
from jacobibv.sampling import Sampler
from jacobibv.symalg import Chart, ExpPoly
from jacobibv.tensor import (
    DiffForm,
    Multivector,
    apply_vector,
    bivector_eval,
    d_function,
    ext_d,
    interior,
    lie_derivative,
    pairing,
    sharp,
    wedge,
)


def zero_fn(chart):
    return ExpPoly.zero(chart)


def jet_bracket_written(J, s1, s2):
    """The bracket on ``J^1 M`` written out in terms of Lie derivatives."""
    L, E = J.L, J.E
    a, f, b, g = s1.alpha, s1.f, s2.alpha, s2.f
    first = (
        lie_derivative(sharp(L, a), b)
        - lie_derivative(sharp(L, b), a)
        - d_function(bivector_eval(L, a, b))
        + lie_derivative(E, b) * f
        - lie_derivative(E, a) * g
        - b * pairing(E, a)
        + a * pairing(E, b)
    )
    second = jc.fn_bracket(J, f, g) - bivector_eval(L, d_function(f) - a, d_function(g) - b)
    return JetSection(first, second)


# -- structures ---------------------------------------------------------------------
def test_check_jacobi_examples(contact1, chart3):
    assert jc.check_jacobi(contact1.J).passed
    zero = JacobiStructure(Multivector.zero(chart3, 2), Multivector.zero(chart3, 1))
    assert jc.check_jacobi(zero).passed
    bad = JacobiStructure(Multivector.basis(chart3, 0, 1), Multivector.basis(chart3, 2))
    rep = jc.check_jacobi(bad)
    assert not rep.passed
    # residual is [L,L] - 2 E^L with [L,L] = 0
    assert rep.residuals["[L,L]-2E^L"] == Multivector.basis(chart3, 0, 1, 2) * -2
    assert rep.residuals["[L,E]"].is_zero()


def test_invalid_structure_warns(chart3):
    bad = JacobiStructure(Multivector.basis(chart3, 0, 1), Multivector.basis(chart3, 2))
    x = chart3.coord(0)
    with pytest.warns(InvalidStructureWarning):
        jc.fn_bracket(bad, x, x)


def test_fn_bracket_examples(contact1):
    J, ch = contact1.J, contact1.chart
    q, p, z = (ch.coord(i) for i in range(3))
    assert jc.fn_bracket(J, q, p) == ch.const(1)
    assert jc.fn_bracket(J, ch.const(1), z) == ch.const(1)
    assert jc.fn_bracket(J, q * z, q * z).is_zero()


def test_fn_bracket_jacobi_identity(contact1):
    sm = Sampler(contact1.chart, seed=11)
    J = contact1.J
    for _ in range(10):
        f, g, h = sm.exppoly(), sm.exppoly(), sm.exppoly()
        br = lambda a, b: jc.fn_bracket(J, a, b)
        assert (br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g))).is_zero()


# -- the 1-jet algebroid --------------------------------------------------------------
def test_jet_bracket_examples(contact1, plane_poisson):
    J, ch = contact1.J, contact1.chart
    q, p = ch.coord(0), ch.coord(1)
    assert jc.jet_bracket(J, JetSection.jet(q), JetSection.jet(p)) == JetSection(DiffForm.zero(ch, 1), ch.const(1))
    s = JetSection(DiffForm.basis(ch, 0) * p, q)
    assert jc.jet_bracket(J, s, s).is_zero()
    c2 = plane_poisson.chart
    s1 = JetSection(DiffForm.basis(c2, 0), zero_fn(c2))
    s2 = JetSection(DiffForm.basis(c2, 1), zero_fn(c2))
    assert jc.jet_bracket(plane_poisson, s1, s2) == JetSection(DiffForm.zero(c2, 1), c2.const(-1))


@pytest.mark.parametrize("which", ["contact1", "gcs1", "plane_poisson"])
def test_jet_bracket_written_form(which, request):
    obj = request.getfixturevalue(which)
    J = obj if isinstance(obj, JacobiStructure) else obj.J
    sm = Sampler(J.chart, seed=21, max_degree=2)
    for _ in range(15):
        s1, s2 = sm.jet_section(), sm.jet_section()
        assert jc.jet_bracket(J, s1, s2) == jet_bracket_written(J, s1, s2)


def test_jet_anchor_examples(contact1, plane_poisson):
    c2 = plane_poisson.chart
    assert jc.jet_anchor(plane_poisson, JetSection(DiffForm.basis(c2, 0), zero_fn(c2))) == Multivector.basis(c2, 1)
    ch = contact1.chart
    assert jc.jet_anchor(contact1.J, JetSection(DiffForm.zero(ch, 1), ch.const(1))) == contact1.J.E
    assert jc.jet_anchor(contact1.J, JetSection.zero(ch)).is_zero()


# -- BV generator --------------------------------------------------------------------------
def test_bv_delta_weight_one(contact1):
    J, ch = contact1.J, contact1.chart
    p = ch.coord(1)
    lam = WeightedForm(1, DiffForm.basis(ch, 0) * p, DiffForm.scalar(zero_fn(ch)))
    out = jc.bv_delta(J, lam)
    assert out.weight == 0
    assert out.first == DiffForm.scalar(ch.const(-1))
    sm = Sampler(ch, seed=31)
    for _ in range(20):
        a, f = sm.form(1), sm.exppoly()
        out = jc.bv_delta(J, WeightedForm(1, a, DiffForm.scalar(f)))
        expected = interior(J.L, ext_d(a)).scalar_value() + pairing(J.E, a) - apply_vector(J.E, f)
        assert out.first.scalar_value() == expected


def test_bv_delta_weight_zero_and_top(contact1):
    J, ch = contact1.J, contact1.chart
    assert jc.bv_delta(J, WeightedForm(0, DiffForm.scalar(ch.coord(0)))).is_zero()
    top = WeightedForm(3, contact1.Phi, DiffForm.zero(ch, 2))
    assert jc.bv_delta(J, top) == jc.bv_delta_oracle(J, top)
    assert jc.bv_delta_oracle(J, WeightedForm(0, DiffForm.scalar(ch.coord(2)))).is_zero()


def test_gerstenhaber_examples(contact1):
    J, ch = contact1.J, contact1.chart
    z0 = DiffForm.scalar(zero_fn(ch))
    a = WeightedForm(1, DiffForm.basis(ch, 0), z0)
    b = WeightedForm(1, DiffForm.basis(ch, 1), z0)
    assert jc.gerstenhaber_bracket(J, a, a).is_zero()
    br = jc.gerstenhaber_bracket(J, a, b)
    assert JetSection.from_weighted(br) == jc.jet_bracket(J, JetSection.from_weighted(a), JetSection.from_weighted(b))


def test_bar_d_examples(chart3):
    x1, x3 = chart3.coord(0), chart3.coord(2)
    assert jc.bar_d(WeightedForm(0, DiffForm.scalar(x1))) == WeightedForm(1, DiffForm.basis(chart3, 0), DiffForm.scalar(zero_fn(chart3)))
    lam = WeightedForm(1, DiffForm.basis(chart3, 1) * x1, DiffForm.scalar(x3))
    assert jc.bar_d(lam) == WeightedForm(2, DiffForm.basis(chart3, 0, 1), DiffForm.basis(chart3, 2))
    sm = Sampler(chart3, seed=41)
    for k in range(4):
        assert jc.bar_d(jc.bar_d(sm.weighted_form(k))).is_zero()


def test_anticommutator_poisson_case():
    J = ex.constant_poisson([[0, 1, 0], [-1, 0, 2], [0, -2, 0]])
    sm = Sampler(J.chart, seed=51)
    for k in range(1, 4):
        l1 = sm.form(k)
        out = jc.anticommutator(J, WeightedForm(k, l1, DiffForm.zero(J.chart, k - 1)))
        assert out.first.is_zero()
        assert out.second == -jc.delta_L(J.L, l1) * (-1) ** k


def test_anticommutator_weight_zero(contact1):
    sm = Sampler(contact1.chart, seed=52)
    for _ in range(10):
        lam = sm.weighted_form(0)
        assert jc.anticommutator(contact1.J, lam) == jc.anticommutator_closed_form(contact1.J, lam)


# -- the coboundary sigma ---------------------------------------------------------------------
def test_sigma_function(contact1):
    J, ch = contact1.J, contact1.chart
    q, p, z = (ch.coord(i) for i in range(3))
    out = jc.sigma(J, WeightedMultivector(0, Multivector.scalar(q * z)))
    assert out == WeightedMultivector(1, Multivector.basis(ch, 1) * (z + q * p), Multivector.scalar(-q))


def test_sigma_matches_conformal_symplectic_display(gcs1):
    J = gcs1.J
    sm = Sampler(gcs1.chart, seed=61, freqs=[[1, 0], [-1, 0]])
    for _ in range(20):
        f = sm.exppoly()
        out = jc.sigma(J, WeightedMultivector(0, Multivector.scalar(f)))
        assert out.first == sharp(J.L, d_function(f))
        assert out.second.scalar_value() == -apply_vector(J.E, f)


def test_structure_cocycle(contact1, gcs1):
    for J in (contact1.J, gcs1.J):
        C = WeightedMultivector(2, J.L, Multivector.zero(J.chart, 1))
        assert jc.sigma(J, C).is_zero()
    J = contact1.J
    assert not jc.sigma(J, WeightedMultivector(2, J.L, -J.E)).is_zero()


def test_sigma_oracle_small_cases(contact1):
    J, ch = contact1.J, contact1.chart
    f = WeightedMultivector(0, Multivector.scalar(ch.coord(0) * ch.coord(2)))
    assert jc.sigma(J, f) == jc.sigma_oracle(J, f)
    zero = WeightedMultivector.zero(ch, 2)
    assert jc.sigma_oracle(J, zero).is_zero()


def test_sigma_is_minus_algebroid_coboundary(contact1):
    sm = Sampler(contact1.chart, seed=62, max_degree=1)
    for k in range(3):
        C = sm.weighted_multivector(k)
        assert jc.sigma(contact1.J, C) == -jc.algebroid_coboundary(contact1.J, C)


def test_rho_sharp_examples(contact1, plane_poisson):
    J, ch = contact1.J, contact1.chart
    q = ch.coord(0)
    assert jc.rho_sharp(J, DiffForm.scalar(q)) == WeightedMultivector(0, Multivector.scalar(q))
    assert jc.sigma(J, jc.rho_sharp(J, DiffForm.basis(ch, 0))).is_zero()
    c2 = plane_poisson.chart
    out = jc.rho_sharp(plane_poisson, DiffForm.basis(c2, 0))
    assert out == WeightedMultivector(1, Multivector.basis(c2, 1), Multivector.zero(c2, 0))
    # value on basis sections
    s = JetSection(DiffForm.basis(c2, 1), zero_fn(c2))
    assert jc.evaluate_cochain(out, [s]) == c2.const(1)


def test_hamiltonian_examples(contact1, plane_poisson):
    c2 = plane_poisson.chart
    X, ft = jc.hamiltonian_P(plane_poisson, c2.coord(0))
    assert X == Multivector.basis(c2, 1) and ft.is_zero()
    J, ch = contact1.J, contact1.chart
    X, ft = jc.hamiltonian_P(J, ch.const(3), ch.const(2))
    assert X == J.E * 2 and ft.is_zero()
    X, ft = jc.hamiltonian_P(J, ch.coord(2))
    assert X == sharp(J.L, DiffForm.basis(ch, 2)) and ft == ch.const(-1)
    sm = Sampler(ch, seed=71)
    for _ in range(10):
        f, sl = sm.exppoly(), sm.exppoly()
        assert jc.hamiltonian_P(J, f, sl) == jc.hamiltonian_P_oracle(J, f, sl)


def test_nonstrong_witness(contact1):
    a, b, defect = jc.find_nonstrong_witness(contact1.J)
    assert not defect.is_zero()
    assert defect == jc.strongness_defect(contact1.J, a, b)


def test_weighted_lift_roundtrip(contact1):
    sm = Sampler(contact1.chart, seed=81)
    for k in range(4):
        lam = sm.weighted_form(k)
        assert WeightedForm.project(lam.lift(), contact1.chart, k) == lam
        C = sm.weighted_multivector(k)
        assert WeightedMultivector.project(C.lift(), contact1.chart, k) == C
