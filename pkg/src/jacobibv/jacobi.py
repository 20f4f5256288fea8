"""Jacobi structures, the 1-jet Lie algebroid and its BV generator.

Objects on ``M x R`` are never materialized here.  A weighted form of
weight ``k`` stands for ``e^{kt}(first + second ^ dt)`` and a weighted
multivector of weight ``k`` for ``e^{-kt}(first + d_t ^ second)``; only the
pairs are stored.  Oracles that do build the Poissonization on an extended
chart are suffixed ``_oracle``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

from . import cylinder
from .report import Check, InvalidStructureWarning
from .symalg import Chart, ChartMismatchError, ExpPoly
from .tensor import (
    DegreeError,
    DiffForm,
    Multivector,
    apply_vector,
    bivector_eval,
    contract_form,
    d_function,
    ext_d,
    interior,
    koszul_delta,
    lie_derivative,
    pairing,
    push_forms,
    schouten,
    sharp,
    wedge,
)


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


@dataclass(frozen=True)
class JacobiStructure:
    """A bivector ``L`` and a vector field ``E`` on one chart."""

    L: Multivector
    E: Multivector

    def __post_init__(self):
        if self.L.chart != self.E.chart:
            raise ChartMismatchError("L and E live on different charts")
        if self.L.degree != 2 or self.E.degree != 1:
            raise DegreeError("a Jacobi structure is a bivector and a vector field")

    @property
    def chart(self) -> Chart:
        return self.L.chart

    @property
    def dim(self) -> int:
        return self.chart.dim

    @cached_property
    def residuals(self) -> tuple[Multivector, Multivector]:
        L, E = self.L, self.E
        return schouten(L, L) - wedge(E, L) * 2, schouten(L, E)

    @property
    def is_valid(self) -> bool:
        r1, r2 = self.residuals
        return r1.is_zero() and r2.is_zero()

    def warn_if_invalid(self):
        if not self.is_valid:
            warnings.warn(
                "[L,L] - 2E^L or [L,E] is nonzero; results may violate the algebroid identities",
                InvalidStructureWarning,
                stacklevel=3,
            )


def check_jacobi(J: JacobiStructure) -> Check:
    r1, r2 = J.residuals
    return Check(
        "jacobi",
        r1.is_zero() and r2.is_zero(),
        residuals={"[L,L]-2E^L": r1, "[L,E]": r2},
    )


def fn_bracket(J: JacobiStructure, f: ExpPoly, g: ExpPoly) -> ExpPoly:
    """``{f, g} = L(df, dg) + f E(g) - g E(f)``."""
    J.warn_if_invalid()
    return (
        bivector_eval(J.L, d_function(f), d_function(g))
        + f * apply_vector(J.E, g)
        - g * apply_vector(J.E, f)
    )


# -- weighted objects ------------------------------------------------------
class _Weighted:
    __slots__ = ("weight", "first", "second")
    tensor_cls = DiffForm

    def __init__(self, weight: int, first, second=None):
        if weight < 0:
            raise DegreeError("negative weight")
        chart = first.chart
        if second is None:
            second = self.tensor_cls.zero(chart, max(weight - 1, 0))
        if not isinstance(first, self.tensor_cls) or not isinstance(second, self.tensor_cls):
            raise DegreeError(f"slots must be {self.tensor_cls.__name__}s")
        if first.chart != second.chart:
            raise ChartMismatchError("slot charts differ")
        if first.degree != weight:
            raise DegreeError(f"first slot has degree {first.degree}, weight is {weight}")
        if weight == 0:
            if not second.is_zero():
                raise DegreeError("weight-0 elements have no second slot")
            second = self.tensor_cls.zero(chart, 0)
        elif second.degree != weight - 1:
            raise DegreeError(f"second slot has degree {second.degree}, expected {weight - 1}")
        self.weight = weight
        self.first = first
        self.second = second

    @property
    def chart(self) -> Chart:
        return self.first.chart

    @classmethod
    def zero(cls, chart: Chart, weight: int):
        return cls(weight, cls.tensor_cls.zero(chart, weight), cls.tensor_cls.zero(chart, max(weight - 1, 0)))

    def is_zero(self) -> bool:
        return self.first.is_zero() and self.second.is_zero()

    def _check(self, other):
        if type(other) is not type(self):
            raise DegreeError("kind mismatch")
        if other.weight != self.weight:
            raise DegreeError(f"weights differ: {self.weight} vs {other.weight}")

    def __add__(self, other):
        self._check(other)
        return type(self)(self.weight, self.first + other.first, self.second + other.second)

    def __sub__(self, other):
        self._check(other)
        return type(self)(self.weight, self.first - other.first, self.second - other.second)

    def __neg__(self):
        return type(self)(self.weight, -self.first, -self.second)

    def __mul__(self, f):
        return type(self)(self.weight, self.first * f, self.second * f)

    __rmul__ = __mul__

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.weight == other.weight and self.first == other.first and self.second == other.second

    def __hash__(self):
        return hash((type(self).__name__, self.weight, self.first, self.second))

    def __repr__(self):
        return f"{type(self).__name__}(weight={self.weight}, first={self.first}, second={self.second})"


class WeightedForm(_Weighted):
    """``e^{kt}(first + second ^ dt)`` with ``deg first = k``."""

    __slots__ = ()
    tensor_cls = DiffForm

    def wedge(self, other: "WeightedForm") -> "WeightedForm":
        """Product in the algebra of weighted forms; weights add."""
        h = other.weight
        a1, a2, b1, b2 = self.first, self.second, other.first, other.second
        first = wedge(a1, b1)
        cls = type(self)
        if self.weight + h == 0:
            return cls(0, first)
        second = DiffForm.zero(self.chart, self.weight + h - 1)
        if h > 0:
            second = second + wedge(a1, b2)
        if self.weight > 0:
            second = second + wedge(a2, b1) * _sign(h)
        return cls(self.weight + h, first, second)

    def lift(self, big: Chart | None = None) -> DiffForm:
        big = big or cylinder.extended_chart(self.chart)
        return cylinder.lift_form(big, self.weight, self.first, self.second)

    @classmethod
    def project(cls, T: DiffForm, small: Chart, weight: int) -> "WeightedForm":
        a, b = cylinder.project(T, small, weight)
        return cls(weight, a, b)


class WeightedMultivector(_Weighted):
    """``e^{-kt}(first + d_t ^ second)`` with ``deg first = k``."""

    __slots__ = ()
    tensor_cls = Multivector

    def wedge(self, other: "WeightedMultivector") -> "WeightedMultivector":
        k, h = self.weight, other.weight
        c1, c2, d1, d2 = self.first, self.second, other.first, other.second
        first = wedge(c1, d1)
        cls = type(self)
        if k + h == 0:
            return cls(0, first)
        second = Multivector.zero(self.chart, k + h - 1)
        if h > 0:
            second = second + wedge(c1, d2) * _sign(k)
        if k > 0:
            second = second + wedge(c2, d1)
        return cls(k + h, first, second)

    def lift(self, big: Chart | None = None) -> Multivector:
        big = big or cylinder.extended_chart(self.chart)
        return cylinder.lift_multivector(big, -self.weight, self.first, self.second)

    @classmethod
    def project(cls, T: Multivector, small: Chart, weight: int) -> "WeightedMultivector":
        a, b = cylinder.project(T, small, -weight)
        return cls(weight, a, b)


@dataclass(frozen=True)
class JetSection:
    """``e^t(alpha + f dt)``, a section of the 1-jet bundle."""

    alpha: DiffForm
    f: ExpPoly

    def __post_init__(self):
        if self.alpha.degree != 1:
            raise DegreeError("alpha must be a 1-form")
        if self.alpha.chart != self.f.chart:
            raise ChartMismatchError("alpha and f on different charts")

    @property
    def chart(self) -> Chart:
        return self.f.chart

    @classmethod
    def jet(cls, f: ExpPoly) -> "JetSection":
        """``f -> e^t(df + f dt)``."""
        return cls(d_function(f), f)

    @classmethod
    def zero(cls, chart: Chart) -> "JetSection":
        return cls(DiffForm.zero(chart, 1), ExpPoly.zero(chart))

    def as_weighted(self) -> WeightedForm:
        return WeightedForm(1, self.alpha, DiffForm.scalar(self.f))

    @classmethod
    def from_weighted(cls, w: WeightedForm) -> "JetSection":
        if w.weight != 1:
            raise DegreeError("jet sections are weight-1 forms")
        return cls(w.first, w.second.scalar_value())

    def __add__(self, other):
        return JetSection(self.alpha + other.alpha, self.f + other.f)

    def __sub__(self, other):
        return JetSection(self.alpha - other.alpha, self.f - other.f)

    def __mul__(self, g):
        return JetSection(self.alpha * g, self.f * g)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.alpha.is_zero() and self.f.is_zero()


# -- the 1-jet algebroid ------------------------------------------------------
def jet_anchor(J: JacobiStructure, s: JetSection) -> Multivector:
    """``rho(e^t(alpha + f dt)) = sharp_L alpha + f E``."""
    return sharp(J.L, s.alpha) + J.E * s.f


def jet_bracket(J: JacobiStructure, s1: JetSection, s2: JetSection) -> JetSection:
    """Bracket of 1-jet sections, written out on the pair components."""
    J.warn_if_invalid()
    L, E = J.L, J.E
    a, f, b, g = s1.alpha, s1.f, s2.alpha, s2.f
    form = (
        lie_derivative(sharp(L, a), b)
        - lie_derivative(sharp(L, b), a)
        - d_function(bivector_eval(L, a, b))
        + lie_derivative(E, b) * f
        - lie_derivative(E, a) * g
        - b * pairing(E, a)
        + a * pairing(E, b)
    )
    fn = fn_bracket(J, f, g) - bivector_eval(L, d_function(f) - a, d_function(g) - b)
    return JetSection(form, fn)


def delta_L(L: Multivector, w: DiffForm) -> DiffForm:
    """``i(L)d - d i(L)``."""
    return koszul_delta(L, w)


def bv_delta(J: JacobiStructure, lam: WeightedForm) -> WeightedForm:
    """Exact generator on weighted forms (weight ``k`` to ``k - 1``)."""
    k = lam.weight
    if k == 0:
        return WeightedForm.zero(lam.chart, 0)
    L, E = J.L, J.E
    l1, l2 = lam.first, lam.second
    first = delta_L(L, l1) + interior(E, l1) * k
    if k > 1:
        first = first + lie_derivative(E, l2) * _sign(k)
    else:
        first = first + DiffForm.scalar(-apply_vector(E, l2.scalar_value()))
    if k == 1:
        return WeightedForm(0, first)
    second = delta_L(L, l2) + interior(L, l1) * _sign(k) + interior(E, l2) * (k - 1)
    return WeightedForm(k - 1, first, second)


def bv_delta_oracle(J: JacobiStructure, lam: WeightedForm) -> WeightedForm:
    """``i(P)d - d i(P)`` evaluated on the extended chart, then projected."""
    if lam.weight == 0:
        return WeightedForm.zero(lam.chart, 0)
    big = cylinder.extended_chart(lam.chart)
    P = cylinder.poissonization(J.L, J.E)
    x = lam.lift(big)
    out = koszul_delta(P, x)
    return WeightedForm.project(out, lam.chart, lam.weight - 1)


def gerstenhaber_bracket(J: JacobiStructure, a: WeightedForm, b: WeightedForm, delta=None) -> WeightedForm:
    """``[a,b] = (-1)^k (delta(a^b) - delta a ^ b - (-1)^k a ^ delta b)``, ``k = weight a``."""
    delta = delta or (lambda x: bv_delta(J, x))
    k = a.weight
    w = k + b.weight - 1
    if w < 0:
        return WeightedForm.zero(a.chart, 0)
    da = delta(a) if k > 0 else None
    db = delta(b) if b.weight > 0 else None
    out = delta(a.wedge(b))
    if da is not None:
        out = out - da.wedge(b)
    if db is not None:
        out = out - a.wedge(db) * _sign(k)
    return out * _sign(k)


def jet_bracket_bv(J: JacobiStructure, s1: JetSection, s2: JetSection) -> JetSection:
    """Degree-one bracket obtained from the BV generator."""
    return JetSection.from_weighted(gerstenhaber_bracket(J, s1.as_weighted(), s2.as_weighted()))


def bar_d(lam: WeightedForm) -> WeightedForm:
    """``e^{(k+1)t} d(e^{-kt} lam)``: slotwise exterior derivative."""
    k = lam.weight
    if k == 0:
        return WeightedForm(1, ext_d(lam.first), DiffForm.zero(lam.chart, 0))
    return WeightedForm(k + 1, ext_d(lam.first), ext_d(lam.second))


def anticommutator(J: JacobiStructure, lam: WeightedForm) -> WeightedForm:
    """``delta bar_d + bar_d delta`` by composition."""
    J.warn_if_invalid()
    out = bv_delta(J, bar_d(lam))
    if lam.weight > 0:
        out = out + bar_d(bv_delta(J, lam))
    return out


def anticommutator_closed_form(J: JacobiStructure, lam: WeightedForm) -> WeightedForm:
    """Closed form of ``delta bar_d + bar_d delta`` on a weight-``k`` form.

    first: ``k L_E l1 + i(E) d l1``;
    second: ``(k-1) L_E l2 + i(E) d l2 - (-1)^k delta_L l1``.
    """
    k = lam.weight
    L, E = J.L, J.E
    l1, l2 = lam.first, lam.second
    first = interior(E, ext_d(l1)) + lie_derivative(E, l1) * k
    if k == 0:
        return WeightedForm(0, first)
    second = (
        lie_derivative(E, l2) * (k - 1)
        + interior(E, ext_d(l2))
        - delta_L(L, l1) * _sign(k)
    )
    return WeightedForm(k, first, second)


def anticommutator_printed(J: JacobiStructure, lam: WeightedForm) -> WeightedForm:
    """The alternative closed form ``((k+1) i(E)d l1, L_E l2 + (k+1) i(E)d l2 - (-1)^k delta_L l1)``.

    Kept for comparison; it agrees with the composition only in weight 0.
    """
    k = lam.weight
    L, E = J.L, J.E
    l1, l2 = lam.first, lam.second
    first = interior(E, ext_d(l1)) * (k + 1)
    if k == 0:
        return WeightedForm(0, first)
    second = lie_derivative(E, l2) + interior(E, ext_d(l2)) * (k + 1) - delta_L(L, l1) * _sign(k)
    return WeightedForm(k, first, second)


# -- Jacobi cohomology ----------------------------------------------------------
def sigma(J: JacobiStructure, C: WeightedMultivector) -> WeightedMultivector:
    """Coboundary on weighted multivectors (weight ``k`` to ``k + 1``).

    first: ``[L,C1] - k E^C1 - L^C2``;
    second: ``-([L,C2] - (k-1) E^C2 + [E,C1])``.
    """
    J.warn_if_invalid()
    L, E = J.L, J.E
    k = C.weight
    c1, c2 = C.first, C.second
    first = schouten(L, c1) - wedge(E, c1) * k
    second = -schouten(E, c1)
    if k > 0:
        first = first - wedge(L, c2)
        second = second - schouten(L, c2) + wedge(E, c2) * (k - 1)
    return WeightedMultivector(k + 1, first, second)


def sigma_oracle(J: JacobiStructure, C: WeightedMultivector) -> WeightedMultivector:
    """``[P, C~]`` on the extended chart, projected back."""
    big = cylinder.extended_chart(C.chart)
    P = cylinder.poissonization(J.L, J.E)
    out = schouten(P, C.lift(big))
    return WeightedMultivector.project(out, C.chart, C.weight + 1)


def _ext_section_form(big: Chart, s: JetSection) -> DiffForm:
    return s.alpha.embed(big) + cylinder.dt(big) * s.f.embed(big)


def evaluate_cochain(C: WeightedMultivector, sections: list[JetSection]) -> ExpPoly:
    """``C(s_1, ..., s_k)`` with ``C = C1 + d_t ^ C2`` paired against ``wedge(alpha_i + f_i dt)``."""
    if len(sections) != C.weight:
        raise DegreeError("wrong number of arguments")
    small = C.chart
    big = cylinder.extended_chart(small)
    T = cylinder.lift_multivector(big, 0, C.first, C.second)
    w = DiffForm.scalar(ExpPoly.constant(big, 1))
    for s in sections:
        w = wedge(w, _ext_section_form(big, s))
    val = pairing(T, w)
    return cylinder._strip_factor(val, small, 0)


def jet_basis(chart: Chart) -> list[JetSection]:
    """``e^t dx^1, ..., e^t dx^m, e^t dt`` as jet sections."""
    zero = ExpPoly.zero(chart)
    out = [JetSection(DiffForm.basis(chart, i), zero) for i in range(chart.dim)]
    out.append(JetSection(DiffForm.zero(chart, 1), ExpPoly.constant(chart, 1)))
    return out


def cochain_from_values(chart: Chart, k: int, value) -> WeightedMultivector:
    """Rebuild a cochain from its values on the constant jet basis."""
    from itertools import combinations

    basis = jet_basis(chart)
    m = chart.dim
    first, second = {}, {}
    for idx in combinations(range(m), k):
        first[idx] = value([basis[i] for i in idx])
    if k > 0:
        for idx in combinations(range(m), k - 1):
            second[idx] = value([basis[m]] + [basis[i] for i in idx])
    return WeightedMultivector(
        k, Multivector(chart, k, first), Multivector(chart, max(k - 1, 0), second)
    )


def algebroid_coboundary(J: JacobiStructure, C: WeightedMultivector) -> WeightedMultivector:
    """Lie algebroid differential of ``J^1 M`` from the invariant formula.

    ``(dC)(s_0..s_k) = sum (-1)^i rho(s_i) C(..s_i^..)
    + sum_{i<j} (-1)^{i+j} C({s_i,s_j}, ..s_i^..s_j^..)``, evaluated on the
    constant basis sections (the formula is tensorial).
    """
    k = C.weight

    def value(args):
        total = ExpPoly.zero(C.chart)
        for i, s in enumerate(args):
            rest = args[:i] + args[i + 1:]
            term = apply_vector(jet_anchor(J, s), evaluate_cochain(C, rest))
            total = total + (term if i % 2 == 0 else -term)
        for i in range(len(args)):
            for j in range(i + 1, len(args)):
                br = jet_bracket(J, args[i], args[j])
                rest = [br] + [a for n, a in enumerate(args) if n not in (i, j)]
                term = evaluate_cochain(C, rest)
                total = total + (term if (i + j) % 2 == 0 else -term)
        return total

    return cochain_from_values(C.chart, k + 1, value)


def rho_sharp(J: JacobiStructure, lam: DiffForm) -> WeightedMultivector:
    """Pull a form back along the anchor, with the ``(-1)^k`` factor.

    With ``rho^T(dx^i) = -sharp_L dx^i + E^i d_t``:
    ``C1 = (-1)^k (wedge^k rho^T) lam`` and ``C2 = (-1)^k (wedge^{k-1} rho^T)(i(E) lam)``.
    """
    chart = lam.chart
    k = lam.degree
    images = [-sharp(J.L, DiffForm.basis(chart, i)) for i in range(chart.dim)]
    first = push_forms(lam, images) * _sign(k)
    if k == 0:
        return WeightedMultivector(0, first)
    second = push_forms(interior(J.E, lam), images) * _sign(k)
    return WeightedMultivector(k, first, second)


def rho_sharp_eval(J: JacobiStructure, lam: DiffForm, sections: list[JetSection]) -> ExpPoly:
    """``(-1)^k lam(rho s_1, ..., rho s_k)`` straight from the definition."""
    from .tensor import evaluate

    k = lam.degree
    if k == 0:
        return lam.scalar_value()
    val = evaluate(lam, *[jet_anchor(J, s) for s in sections])
    return val * _sign(k)


def hamiltonian_P(J: JacobiStructure, phi: ExpPoly, slope: ExpPoly | None = None):
    """``i(d phi)P`` at ``t = 0``: ``(sharp_L d phi + slope E, -E(phi))``."""
    slope = slope if slope is not None else ExpPoly.zero(phi.chart)
    X = sharp(J.L, d_function(phi)) + J.E * slope
    return X, -apply_vector(J.E, phi)


def hamiltonian_P_oracle(J: JacobiStructure, phi: ExpPoly, slope: ExpPoly | None = None):
    """Same vector built as ``i(d phi~) P`` with ``phi~ = phi + slope t`` on the extended chart."""
    small = phi.chart
    big = cylinder.extended_chart(small)
    t = big.coord(big.dim - 1)
    phi_big = phi.embed(big)
    if slope is not None:
        phi_big = phi_big + slope.embed(big) * t
    P = cylinder.poissonization(J.L, J.E)
    X = contract_form(d_function(phi_big), P)
    # X = e^{-t}(... ); evaluate the t-independent parts at t = 0
    comps = X.components()
    vec, dtc = [], None
    for i, c in enumerate(comps):
        groups = c.split_last(small)
        # keep only t^0 e^{-t} terms (slope terms are linear in t only through phi~)
        val = groups.get((-1, 0), ExpPoly.zero(small))
        if i < small.dim:
            vec.append(val)
        else:
            dtc = val
    return Multivector.from_components(small, vec), dtc


# -- strongness ------------------------------------------------------------------
def strongness_defect(J: JacobiStructure, a: WeightedForm, b: WeightedForm) -> WeightedForm:
    """``bar_d[a,b] - [bar_d a, b] - (-1)^k [a, bar_d b]``; zero for all pairs iff strong."""
    k = a.weight
    br = gerstenhaber_bracket(J, a, b)
    out = bar_d(br) - gerstenhaber_bracket(J, bar_d(a), b)
    return out - gerstenhaber_bracket(J, a, bar_d(b)) * _sign(k)


def leibniz_defect_bar_d(a: WeightedForm, b: WeightedForm) -> WeightedForm:
    """``bar_d(a^b) - bar_d a ^ b - (-1)^k a ^ bar_d b``."""
    return bar_d(a.wedge(b)) - bar_d(a).wedge(b) - a.wedge(bar_d(b)) * _sign(a.weight)


def simple_weighted_forms(chart: Chart, weight: int, max_degree: int = 1) -> list[WeightedForm]:
    """Weighted forms with one monomial coefficient in one slot, in a fixed order."""
    from itertools import combinations, product

    monos = [ExpPoly.constant(chart, 1)]
    if max_degree >= 1:
        monos += [chart.coord(i) for i in range(chart.dim)]
    out = []
    slots = [(0, idx) for idx in combinations(range(chart.dim), weight)]
    if weight > 0:
        slots += [(1, idx) for idx in combinations(range(chart.dim), weight - 1)]
    for (slot, idx), c in product(slots, monos):
        t = DiffForm(chart, len(idx), {idx: c})
        if slot == 0:
            out.append(WeightedForm(weight, t))
        else:
            out.append(WeightedForm(weight, DiffForm.zero(chart, weight), t))
    return out


def find_nonstrong_witness(J: JacobiStructure, weights=(1, 1), max_degree: int = 1):
    """First pair (in a fixed enumeration) violating the derivation rule for ``bar_d``.

    Returns ``(a, b, defect)`` or ``None``.
    """
    chart = J.chart
    for a in simple_weighted_forms(chart, weights[0], max_degree):
        for b in simple_weighted_forms(chart, weights[1], max_degree):
            defect = strongness_defect(J, a, b)
            if not defect.is_zero():
                return a, b, defect
    return None
