"""Modular field, the jet connection on the top power, duality and D_0.

A volume form ``Phi`` on ``M`` gives the volume ``Psi = e^{(m+1)t} Phi ^ dt``
on ``M x R``.  Top-degree forms are divided by ``Phi`` exactly, which is why
``Phi`` must have a single-term coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import cylinder
from .jacobi import (
    JacobiStructure,
    JetSection,
    WeightedForm,
    WeightedMultivector,
    _sign,
    bv_delta,
    cochain_from_values,
    evaluate_cochain,
    gerstenhaber_bracket,
    jet_anchor,
    jet_bracket,
    sigma,
)
from .symalg import ExpPoly
from .tensor import (
    DegreeError,
    DiffForm,
    Multivector,
    apply_vector,
    contract_form,
    d_function,
    ext_d,
    interior,
    lie_derivative,
    sharp,
    wedge,
)


class VolumeError(ValueError):
    """The given top form cannot serve as a volume in the exact ring."""


class VolumeForm:
    """Top-degree form with an invertible single-term coefficient."""

    __slots__ = ("Phi", "coefficient", "_inverse")

    def __init__(self, Phi: DiffForm):
        m = Phi.chart.dim
        if Phi.degree != m:
            raise VolumeError(f"a volume form has degree {m}, got {Phi.degree}")
        c = Phi.coeff(*range(m))
        if not c.is_unit():
            raise VolumeError("the coefficient of a volume form must be a single nonzero term without x-powers")
        self.Phi = Phi
        self.coefficient = c
        self._inverse = c.inverse()

    @property
    def chart(self):
        return self.Phi.chart

    @property
    def dim(self) -> int:
        return self.chart.dim

    def ratio(self, top: DiffForm) -> ExpPoly:
        """The function ``g`` with ``top = g Phi``."""
        if top.degree != self.dim:
            raise DegreeError("ratio needs a top-degree form")
        return top.coeff(*range(self.dim)) * self._inverse

    def scaled(self, a: ExpPoly) -> "VolumeForm":
        return VolumeForm(self.Phi * a)


def as_volume(Phi) -> VolumeForm:
    return Phi if isinstance(Phi, VolumeForm) else VolumeForm(Phi)


# -- modular field ----------------------------------------------------------------
@dataclass
class ModularData:
    V: Multivector
    divE: ExpPoly
    V_class: WeightedMultivector  # (V - mE) + divE d_t at weight 1
    A_candidates: dict = field(default_factory=dict)  # sections A with <A, jet f> = ELW coefficient, by reading

    @property
    def V_class_pair(self) -> tuple[Multivector, ExpPoly]:
        return self.V_class.first, self.V_class.second.scalar_value()


def modular_vector(L: Multivector, vol: VolumeForm) -> Multivector:
    """``V`` with ``L_{sharp df} Phi = (Vf) Phi``, read off on coordinate functions."""
    chart = L.chart
    comps = [vol.ratio(lie_derivative(sharp(L, DiffForm.basis(chart, i)), vol.Phi)) for i in range(chart.dim)]
    return Multivector.from_components(chart, comps)


def divergence(X: Multivector, vol: VolumeForm) -> ExpPoly:
    return vol.ratio(lie_derivative(X, vol.Phi))


def modular_data(J: JacobiStructure, Phi) -> ModularData:
    J.warn_if_invalid()
    vol = as_volume(Phi)
    m = J.dim
    V = modular_vector(J.L, vol)
    div = divergence(J.E, vol)
    first = V - J.E * m
    cls = WeightedMultivector(1, first, Multivector.scalar(div))
    two_div = Multivector.scalar(div * 2)
    candidates = {
        "elw": WeightedMultivector(1, V * 2 - J.E * (m - 1), two_div),
        "elw_printed": WeightedMultivector(1, V * 2 - J.E, two_div),
        "2V_class-(2m+1)E": WeightedMultivector(1, first * 2 - J.E * (2 * m + 1), two_div),
    }
    return ModularData(V, div, cls, candidates)


def modular_identity_residual(J: JacobiStructure, Phi, f: ExpPoly, data: ModularData | None = None) -> DiffForm:
    """``L_{sharp df} Phi - (Vf) Phi`` for an arbitrary ``f`` (derivation check)."""
    vol = as_volume(Phi)
    data = data or modular_data(J, vol)
    return lie_derivative(sharp(J.L, d_function(f)), vol.Phi) - vol.Phi * apply_vector(data.V, f)


def extended_volume(vol: VolumeForm) -> DiffForm:
    big = cylinder.extended_chart(vol.chart)
    return cylinder.lift_form(big, vol.dim + 1, DiffForm.zero(vol.chart, vol.dim + 1), vol.Phi)


def modular_field_P_oracle(J: JacobiStructure, Phi) -> WeightedMultivector:
    """``W^P`` from ``L_{X_phi} Psi = (W^P phi) Psi`` on ``M x R``, projected to a weight-1 pair."""
    vol = as_volume(Phi)
    small = vol.chart
    big = cylinder.extended_chart(small)
    P = cylinder.poissonization(J.L, J.E)
    Psi = extended_volume(vol)
    top = tuple(range(big.dim))
    inv = Psi.coeff(*top).inverse()
    comps = []
    for i in range(big.dim):
        X = contract_form(DiffForm.basis(big, i), P)
        comps.append(lie_derivative(X, Psi).coeff(*top) * inv)
    W = Multivector.from_components(big, comps)
    return WeightedMultivector.project(W, small, 1)


def rescaling_shift(J: JacobiStructure, Phi, r: list) -> tuple[WeightedMultivector, WeightedMultivector]:
    """``V_class(e^{<r,x>} Phi) - V_class(Phi)`` and ``sigma(<r,x>)``."""
    vol = as_volume(Phi)
    chart = vol.chart
    a = chart.exp(r)
    lin = ExpPoly.zero(chart)
    for i, ri in enumerate(r):
        lin = lin + chart.coord(i) * ri
    before = modular_data(J, vol).V_class
    after = modular_data(J, vol.scaled(a)).V_class
    return after - before, sigma(J, WeightedMultivector(0, Multivector.scalar(lin)))


# -- ELW coefficient -------------------------------------------------------------
def elw_expression(J: JacobiStructure, Phi, f: ExpPoly) -> ExpPoly:
    """Coefficient of ``Psi (x) Phi`` in the ELW expression, from its definition.

    The first term is the algebroid bracket of ``jet f`` with
    ``e^{(m+1)t} Phi ^ dt`` (the Gerstenhaber bracket of the BV generator);
    the second is ``L_{rho(jet f)} Phi``.
    """
    vol = as_volume(Phi)
    m = vol.dim
    s = JetSection.jet(f).as_weighted()
    top = WeightedForm(m + 1, DiffForm.zero(vol.chart, m + 1), vol.Phi)
    br = gerstenhaber_bracket(J, s, top)
    c1 = vol.ratio(br.second)
    c2 = vol.ratio(lie_derivative(jet_anchor(J, JetSection.jet(f)), vol.Phi))
    return c1 + c2


def elw_expression_oracle(J: JacobiStructure, Phi, f: ExpPoly) -> ExpPoly:
    """The same coefficient with the first term expanded by the derivation rule.

    ``e^{(m+1)t} Phi ^ dt`` is written as ``(e^t c dx^1) ^ .. ^ (e^t dx^m) ^ (e^t dt)``
    and the jet bracket with ``jet f`` is applied factor by factor.
    """
    vol = as_volume(Phi)
    chart = vol.chart
    m = vol.dim
    s = JetSection.jet(f)
    zero = ExpPoly.zero(chart)
    factors = [JetSection(DiffForm.basis(chart, i) * (vol.coefficient if i == 0 else 1), zero) for i in range(m)]
    factors.append(JetSection(DiffForm.zero(chart, 1), ExpPoly.constant(chart, 1)))
    total = WeightedForm.zero(chart, m + 1)
    for i in range(m + 1):
        prod = None
        for j, x in enumerate(factors):
            y = (jet_bracket(J, s, x) if i == j else x).as_weighted()
            prod = y if prod is None else prod.wedge(y)
        total = total + prod
    c2 = vol.ratio(lie_derivative(jet_anchor(J, s), vol.Phi))
    return vol.ratio(total.second) + c2


def elw_closed_form(J: JacobiStructure, Phi, f: ExpPoly) -> ExpPoly:
    """``2(Vf) + 2 f div E - (m-1) Ef``."""
    data = modular_data(J, Phi)
    m = J.dim
    return apply_vector(data.V, f) * 2 + f * data.divE * 2 - apply_vector(J.E, f) * (m - 1)


def elw_closed_form_printed(J: JacobiStructure, Phi, f: ExpPoly) -> ExpPoly:
    """``2(Vf) + 2 f div E - Ef``; agrees with :func:`elw_closed_form` only when ``m = 2`` or ``E = 0``."""
    data = modular_data(J, Phi)
    return apply_vector(data.V, f) * 2 + f * data.divE * 2 - apply_vector(J.E, f)


# -- the connection on the top power ---------------------------------------------
def jet_connection(J: JacobiStructure, Phi, theta: JetSection) -> DiffForm:
    """``f d i(E)Phi + alpha ^ (d i(L)Phi - m i(E)Phi)``: the ``m``-form with
    ``nabla_theta Psi = e^{(m+1)t} [.] ^ dt``."""
    vol = as_volume(Phi)
    m = vol.dim
    L, E = J.L, J.E
    iE = interior(E, vol.Phi)
    out = ext_d(iE) * theta.f
    if m >= 2:
        inner = ext_d(interior(L, vol.Phi)) - iE * m
    else:
        inner = iE * -m
    return out + wedge(theta.alpha, inner)


def jet_connection_printed(J: JacobiStructure, Phi, theta: JetSection) -> DiffForm:
    """``f d i(E)Phi - alpha ^ (d i(L)Phi + m i(E)Phi)``, the other sign pattern."""
    vol = as_volume(Phi)
    m = vol.dim
    L, E = J.L, J.E
    iE = interior(E, vol.Phi)
    inner = iE * m
    if m >= 2:
        inner = inner + ext_d(interior(L, vol.Phi))
    return ext_d(iE) * theta.f - wedge(theta.alpha, inner)


def jet_connection_oracle(J: JacobiStructure, Phi, theta: JetSection) -> DiffForm:
    """``theta ^ d i(P) Psi`` on ``M x R`` with ``theta = e^t(alpha + f dt)``, projected."""
    vol = as_volume(Phi)
    small = vol.chart
    big = cylinder.extended_chart(small)
    m = vol.dim
    P = cylinder.poissonization(J.L, J.E)
    Psi = extended_volume(vol)
    th = cylinder.lift_form(big, 1, theta.alpha, DiffForm.scalar(theta.f))
    out = wedge(th, ext_d(interior(P, Psi)))
    first, second = cylinder.project(out, small, m + 1)
    if not first.is_zero():
        raise cylinder.ProjectionError("connection value has a component without dt")
    return second


def connection_coefficient(J: JacobiStructure, Phi, theta: JetSection, connection=None) -> ExpPoly:
    """``c(theta)`` with ``nabla_theta Psi = c(theta) Psi``."""
    vol = as_volume(Phi)
    connection = connection or jet_connection
    return vol.ratio(connection(J, vol, theta))


def curvature(J: JacobiStructure, Phi, s1: JetSection, s2: JetSection, connection=None) -> ExpPoly:
    """``rho(s1)c(s2) - rho(s2)c(s1) - c({s1,s2})``."""
    vol = as_volume(Phi)
    c = lambda s: connection_coefficient(J, vol, s, connection)
    return (
        apply_vector(jet_anchor(J, s1), c(s2))
        - apply_vector(jet_anchor(J, s2), c(s1))
        - c(jet_bracket(J, s1, s2))
    )


def connection_cochain(J: JacobiStructure, Phi, connection=None) -> WeightedMultivector:
    """The weight-1 cochain ``theta -> c(theta)``."""
    vol = as_volume(Phi)
    return cochain_from_values(vol.chart, 1, lambda args: connection_coefficient(J, vol, args[0], connection))


# -- duality ------------------------------------------------------------------------
def star(C: WeightedMultivector, Phi) -> WeightedForm:
    """``i(C~) Psi = e^{(m-k+1)t}[(-1)^m i(C2)Phi + i(C1)Phi ^ dt]``."""
    vol = as_volume(Phi)
    m = vol.dim
    k = C.weight
    w = m - k + 1
    if w < 0:
        raise DegreeError(f"weight {k} exceeds m + 1")
    second = interior(C.first, vol.Phi) if k <= m else DiffForm.zero(vol.chart, 0)
    if k == 0:
        first = DiffForm.zero(vol.chart, m + 1)
    else:
        first = interior(C.second, vol.Phi) * _sign(m)
    if w == 0:
        return WeightedForm(0, first)
    return WeightedForm(w, first, second)


def star_oracle(C: WeightedMultivector, Phi) -> WeightedForm:
    vol = as_volume(Phi)
    big = cylinder.extended_chart(vol.chart)
    out = interior(C.lift(big), extended_volume(vol))
    return WeightedForm.project(out, vol.chart, vol.dim - C.weight + 1)


def star_inverse(lam: WeightedForm, Phi) -> WeightedMultivector:
    """Inverse of :func:`star`, solving slot by slot with the dual basis."""
    from itertools import combinations

    vol = as_volume(Phi)
    chart = vol.chart
    m = vol.dim
    k = m + 1 - lam.weight

    def solve(form: DiffForm, degree: int) -> Multivector:
        terms = {}
        for idx in combinations(range(m), degree):
            img = interior(Multivector.basis(chart, *idx), vol.Phi)
            # img is a single term +-c dx^J; read off its coefficient
            (jdx, c), = img.items()
            terms[idx] = form.coeff(*jdx) * c.inverse()
        return Multivector(chart, degree, terms)

    first = solve(lam.second if lam.weight > 0 else DiffForm.zero(chart, 0), k) if k <= m else Multivector.zero(chart, k)
    if k == 0:
        return WeightedMultivector(0, first)
    second = solve(lam.first * _sign(m), k - 1)
    return WeightedMultivector(k, first, second)


def interior_weighted(W: WeightedMultivector, lam: WeightedForm) -> WeightedForm:
    """``i(W) lam`` for a weight-1 section ``W = e^{-t}(X + g d_t)``."""
    if W.weight != 1:
        raise DegreeError("interior_weighted expects a weight-1 section")
    k = lam.weight
    if k == 0:
        return WeightedForm.zero(lam.chart, 0)
    X, g = W.first, W.second.scalar_value()
    l1, l2 = lam.first, lam.second
    first = interior(X, l1) + l2 * g * _sign(k - 1)
    if k == 1:
        return WeightedForm(0, first)
    return WeightedForm(k - 1, first, interior(X, l2))


def interior_weighted_oracle(W: WeightedMultivector, lam: WeightedForm) -> WeightedForm:
    if lam.weight == 0:
        return WeightedForm.zero(lam.chart, 0)
    big = cylinder.extended_chart(lam.chart)
    out = interior(W.lift(big), lam.lift(big))
    return WeightedForm.project(out, lam.chart, lam.weight - 1)


def d0(J: JacobiStructure, Phi, lam: WeightedForm, data: ModularData | None = None) -> WeightedForm:
    """Koszul operator of the connection that kills ``Psi``: ``delta_P + i(W^P)``.

    With ``W^P`` read off from ``L_{X_phi} Psi = (W^P phi) Psi`` and
    ``X_phi = i(d phi) P``, this is the operator for which :func:`star`
    carries ``sigma`` to it (see :func:`star_sign`).
    """
    data = data or modular_data(J, Phi)
    return bv_delta(J, lam) + interior_weighted(data.V_class, lam)


def star_sign(k: int) -> int:
    """``eps(k)`` in ``star(sigma C) = eps(k) D_0(star C)`` for ``C`` of weight ``k``.

    The same sign relates the twisted coboundary to ``delta_P``.
    """
    return _sign(k)


# -- twisted cohomology ---------------------------------------------------------------
def twisted_coboundary(J: JacobiStructure, Phi, C: WeightedMultivector, connection=None) -> WeightedMultivector:
    """Coboundary of ``Psi``-valued cochains, ``sigma C - (-1)^k C ^ c``.

    ``c`` is the connection cochain of :func:`jet_connection`; the sign of
    ``sigma`` relative to the algebroid differential is absorbed so that the
    operator reduces to ``sigma`` when ``nabla Psi = 0``.
    """
    c = connection_cochain(J, Phi, connection)
    return sigma(J, C) - C.wedge(c) * _sign(C.weight)


def twisted_coboundary_oracle(J: JacobiStructure, Phi, C: WeightedMultivector, connection=None) -> WeightedMultivector:
    """Minus the invariant formula with ``nabla_s(g Psi) = (rho(s)g + g c(s)) Psi``."""
    vol = as_volume(Phi)
    c = lambda s: connection_coefficient(J, vol, s, connection)
    k = C.weight

    def value(args):
        total = ExpPoly.zero(vol.chart)
        for i, s in enumerate(args):
            rest = args[:i] + args[i + 1:]
            g = evaluate_cochain(C, rest)
            term = apply_vector(jet_anchor(J, s), g) + g * c(s)
            total = total + (term if i % 2 == 0 else -term)
        for i in range(len(args)):
            for j in range(i + 1, len(args)):
                br = jet_bracket(J, args[i], args[j])
                rest = [br] + [a for n, a in enumerate(args) if n not in (i, j)]
                term = evaluate_cochain(C, rest)
                total = total + (term if (i + j) % 2 == 0 else -term)
        return -total

    return cochain_from_values(vol.chart, k + 1, value)
