import pytest

from jacobibv import examples as ex
from jacobibv import jacobi as jc
from jacobibv.homology import (
    TruncatedSpace,
    UnsupportedTruncation,
    betti,
    coboundary_feasibility,
    monomials,
    truncated_complex,
)
from jacobibv.symalg import Chart
from jacobibv.tensor import Multivector


@pytest.fixture(scope="module")
def plane():
    return ex.constant_poisson([[0, 1], [-1, 0]])


def test_monomials_count():
    c = Chart(("x", "y", "z"))
    assert len(monomials(c, 2)) == 10
    assert monomials(c, 0) == [(0, 0, 0)]


def test_space_dimensions(plane):
    space = TruncatedSpace(plane.chart, "form", 1)
    # weight k: k-forms plus (k-1)-forms, three monomials each
    assert [space.dim(k) for k in range(4)] == [3, 9, 9, 3]


@pytest.mark.parametrize("op", ["bv_delta", "d0", "bar_d", "sigma", "twisted"])
@pytest.mark.parametrize("N", [0, 2])
def test_complexes_square_to_zero(plane, op, N):
    cx = truncated_complex(op, plane, N, ex.standard_volume(plane.chart))
    assert cx.is_complex()


def test_rank_nullity(plane):
    cx = truncated_complex("bv_delta", plane, 2)
    b = betti(cx)
    for k in cx.degrees:
        kernel = cx.space.dim(k) - cx.rank(k)
        image = cx.rank(k + 1) if k + 1 in cx.maps else 0
        assert b[k] == kernel - image >= 0


@pytest.mark.parametrize("op", ["bv_delta", "sigma"])
def test_euler_characteristic(plane, op):
    for N in range(3):
        cx = truncated_complex(op, plane, N)
        b = betti(cx)
        assert sum((-1) ** k * b[k] for k in cx.degrees) == sum((-1) ** k * cx.space.dim(k) for k in cx.degrees)


def test_duality_small(plane):
    Phi = ex.standard_volume(plane.chart)
    hom = betti(truncated_complex("d0", plane, 1, Phi))
    coh = betti(truncated_complex("sigma", plane, 1, Phi))
    assert hom == [2, 5, 4, 1]
    assert coh == [1, 4, 5, 2]


def test_degree_raising_structure_rejected(contact1):
    with pytest.raises(UnsupportedTruncation):
        truncated_complex("sigma", contact1.J, 1)
    c = Chart(("x1", "x2"))
    x1 = c.coord(0)
    L = Multivector.basis(c, 0, 1) * (x1 * x1)
    with pytest.raises(UnsupportedTruncation):
        truncated_complex("bv_delta", jc.JacobiStructure(L, Multivector.zero(c, 1)), 1)


def test_unknown_operator(plane):
    with pytest.raises(ValueError):
        truncated_complex("nope", plane, 1)


def test_feasibility_control(contact1):
    J, ch = contact1.J, contact1.chart
    target = jc.sigma(J, jc.WeightedMultivector(0, Multivector.scalar(ch.coord(0) * ch.coord(1))))
    res = coboundary_feasibility(J, target, 2)
    assert res.feasible and jc.sigma(J, res.solution) == target
    assert "feasible up to degree 2" == res.describe()
