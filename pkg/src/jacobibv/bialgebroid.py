"""Brackets on ``TM + R``, Omega-Poisson structures and the triangular bialgebroid.

Sections of ``TM + R`` are pairs ``X + f d_t`` (:class:`ExtSection`); the
Omega-twisted bracket adds ``Omega(X, Y) d_t``.  Forms of this algebroid are
``l1 + l2 ^ dt`` (:class:`OmegaForm`) and its multivectors are
``C1 + d_t ^ C2`` (:class:`OmegaMultivector`).  Unlike the weighted objects
of :mod:`jacobibv.jacobi` there is no exponential factor in ``t``.

Oracles realize the algebroid on an extended chart (time coordinate last,
all coefficients ``t``-independent) and use generic formulas there: the
Chevalley-Eilenberg differential, the decomposable Schouten formula with the
twisted bracket, and ordinary Lie derivatives.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, permutations
from math import factorial

from . import cylinder
from .jacobi import (
    JacobiStructure,
    JetSection,
    WeightedForm,
    WeightedMultivector,
    _sign,
    algebroid_coboundary,
    bar_d,
    evaluate_cochain,
    gerstenhaber_bracket,
)
from .modular import as_volume, divergence, modular_vector
from .report import Check, InvalidStructureWarning
from .symalg import Chart, ChartMismatchError, ExpPoly
from .tensor import (
    DegreeError,
    DiffForm,
    Multivector,
    _vector_bracket,
    apply_vector,
    bivector_eval,
    contract_form,
    d_function,
    evaluate,
    ext_d,
    interior,
    koszul_bracket,
    koszul_delta,
    lie_derivative,
    pairing,
    push_forms,
    schouten,
    schouten_decomposable,
    sharp,
    wedge,
)


class OmegaError(ValueError):
    """The 2-form is not closed, or a construction needs ``Omega = 0``."""


def _require_closed(Om: DiffForm):
    if Om.degree != 2:
        raise DegreeError("Omega must be a 2-form")
    if not ext_d(Om).is_zero():
        raise OmegaError(f"d Omega = {ext_d(Om)} is not zero")


# -- sections of TM + R ---------------------------------------------------------
@dataclass(frozen=True)
class ExtSection:
    """``X + f d_t``."""

    X: Multivector
    f: ExpPoly

    def __post_init__(self):
        if self.X.degree != 1:
            raise DegreeError("X must be a vector field")
        if self.X.chart != self.f.chart:
            raise ChartMismatchError("X and f on different charts")

    @property
    def chart(self) -> Chart:
        return self.f.chart

    @classmethod
    def zero(cls, chart: Chart) -> "ExtSection":
        return cls(Multivector.zero(chart, 1), ExpPoly.zero(chart))

    def __add__(self, other):
        return ExtSection(self.X + other.X, self.f + other.f)

    def __sub__(self, other):
        return ExtSection(self.X - other.X, self.f - other.f)

    def __neg__(self):
        return ExtSection(-self.X, -self.f)

    def __mul__(self, g):
        return ExtSection(self.X * g, self.f * g)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.X.is_zero() and self.f.is_zero()

    def pair(self, s: JetSection) -> ExpPoly:
        """``<X + f d_t, alpha + g dt> = alpha(X) + f g``."""
        return pairing(self.X, s.alpha) + self.f * s.f

    def vector(self, big: Chart) -> Multivector:
        return self.X.embed(big) + cylinder.d_t(big) * self.f.embed(big)

    @classmethod
    def from_vector(cls, V: Multivector, small: Chart) -> "ExtSection":
        X, f = cylinder.project(V, small, 0)
        return cls(X, f.scalar_value())


def ext_bracket(s1: ExtSection, s2: ExtSection, Om: DiffForm, require_closed: bool = True) -> ExtSection:
    """``[X + f d_t, Y + g d_t] = [X, Y] + (Xg - Yf + Omega(X, Y)) d_t``."""
    if require_closed:
        _require_closed(Om)
    X, Y = s1.X, s2.X
    return ExtSection(
        _vector_bracket(X, Y),
        apply_vector(X, s2.f) - apply_vector(Y, s1.f) + evaluate(Om, X, Y),
    )


def ext_jacobiator(s1, s2, s3, Om: DiffForm, require_closed: bool = True) -> ExtSection:
    def br(a, b):
        return ext_bracket(a, b, Om, require_closed)

    return br(s1, br(s2, s3)) + br(s2, br(s3, s1)) + br(s3, br(s1, s2))


def nonclosed_jacobi_witness() -> tuple[DiffForm, tuple, ExpPoly]:
    """``Omega = x1 dx2^dx3`` on ``R^3`` breaks the Jacobi identity on the coordinate fields."""
    chart = Chart(("x1", "x2", "x3"))
    Om = DiffForm(chart, 2, {(1, 2): chart.coord(0)})
    zero = ExpPoly.zero(chart)
    secs = tuple(ExtSection(Multivector.basis(chart, i), zero) for i in range(3))
    jac = ext_jacobiator(*secs, Om, require_closed=False)
    return Om, secs, jac.f


def _twisted_vf_bracket(Om_big: DiffForm):
    big = Om_big.chart

    def br(X: Multivector, Y: Multivector) -> Multivector:
        return _vector_bracket(X, Y) + cylinder.d_t(big) * evaluate(Om_big, X, Y)

    return br


def omega_schouten(U: Multivector, V: Multivector, Om: DiffForm) -> Multivector:
    """Schouten bracket of the twisted algebroid, on the extended chart.

    ``U``, ``V`` live on the extended chart of ``Om.chart`` with
    ``t``-independent coefficients.  Built from decomposables with the twisted
    vector bracket, then signed like :func:`jacobibv.tensor.schouten`.
    """
    big = U.chart
    Om_big = Om.embed(big)
    out = schouten_decomposable(U, V, vf_bracket=_twisted_vf_bracket(Om_big))
    return out if U.degree % 2 == 1 else -out


# -- algebroid forms and multivectors ----------------------------------------------
class OmegaForm(WeightedForm):
    """``first + second ^ dt`` with ``deg first = k`` (the ``weight`` slot holds ``k``)."""

    __slots__ = ()

    @property
    def degree(self) -> int:
        return self.weight

    def lift(self, big: Chart | None = None) -> DiffForm:
        big = big or cylinder.extended_chart(self.chart)
        return cylinder.lift_form(big, 0, self.first, self.second)

    @classmethod
    def project(cls, T: DiffForm, small: Chart, weight: int) -> "OmegaForm":
        a, b = cylinder.project(T, small, 0)
        return cls(weight, a, b)

    @classmethod
    def from_jet(cls, s: JetSection) -> "OmegaForm":
        return cls(1, s.alpha, DiffForm.scalar(s.f))

    def to_jet(self) -> JetSection:
        if self.weight != 1:
            raise DegreeError("only degree-1 elements are jet sections")
        return JetSection(self.first, self.second.scalar_value())


class OmegaMultivector(WeightedMultivector):
    """``first + d_t ^ second`` with ``deg first = k``."""

    __slots__ = ()

    @property
    def degree(self) -> int:
        return self.weight

    def lift(self, big: Chart | None = None) -> Multivector:
        big = big or cylinder.extended_chart(self.chart)
        return cylinder.lift_multivector(big, 0, self.first, self.second)

    @classmethod
    def project(cls, T: Multivector, small: Chart, weight: int) -> "OmegaMultivector":
        a, b = cylinder.project(T, small, 0)
        return cls(weight, a, b)

    @classmethod
    def from_section(cls, s: ExtSection) -> "OmegaMultivector":
        return cls(1, s.X, Multivector.scalar(s.f))

    def to_section(self) -> ExtSection:
        if self.weight != 1:
            raise DegreeError("only degree-1 elements are sections")
        return ExtSection(self.first, self.second.scalar_value())


# -- Omega-Poisson structures ----------------------------------------------------
def raise_form(Q: Multivector, Om: DiffForm) -> Multivector:
    """``sharp_Q Omega``: the bivector of ``sharp_Q o flat_Omega o sharp_Q : T*M -> TM``.

    Its value on ``(a, b)`` is ``<sharp_Q flat_Omega sharp_Q a, b> = -Omega(sharp_Q a, sharp_Q b)``.
    This is the reading under which ``[Pi, Pi]_Omega = 0`` is equivalent to
    ``[Q, Q] = 0`` and ``L_E Q = sharp_Q Omega``.
    """
    chart = Q.chart
    m = chart.dim
    images = [sharp(Q, interior(sharp(Q, DiffForm.basis(chart, a)), Om)) for a in range(m)]
    terms = {(a, b): images[a].coeff(b) for a in range(m) for b in range(a + 1, m)}
    return Multivector(chart, 2, terms)


def raise_form_slotwise(Q: Multivector, Om: DiffForm) -> Multivector:
    """``(a, b) -> Omega(sharp_Q a, sharp_Q b)``, the negative of :func:`raise_form`."""
    chart = Q.chart
    images = [sharp(Q, DiffForm.basis(chart, i)) for i in range(chart.dim)]
    return push_forms(Om, images)


@dataclass(frozen=True)
class OmegaPoissonStructure:
    """``(Q, E, Omega)``; ``Pi = Q + d_t ^ E`` on ``TM + R`` with the Omega-twisted bracket."""

    Q: Multivector
    E: Multivector
    Omega: DiffForm

    def __post_init__(self):
        if not (self.Q.chart == self.E.chart == self.Omega.chart):
            raise ChartMismatchError("Q, E, Omega on different charts")
        if self.Q.degree != 2 or self.E.degree != 1:
            raise DegreeError("Q must be a bivector and E a vector field")
        _require_closed(self.Omega)

    @classmethod
    def enriched(cls, Q: Multivector, E: Multivector) -> "OmegaPoissonStructure":
        return cls(Q, E, DiffForm.zero(Q.chart, 2))

    @property
    def chart(self) -> Chart:
        return self.Q.chart

    @cached_property
    def residuals(self) -> tuple[Multivector, Multivector]:
        return schouten(self.Q, self.Q), lie_derivative(self.E, self.Q) - raise_form(self.Q, self.Omega)

    @property
    def is_valid(self) -> bool:
        return all(r.is_zero() for r in self.residuals)

    def warn_if_invalid(self):
        if not self.is_valid:
            warnings.warn(
                "[Q,Q] or L_E Q - sharp_Q Omega is nonzero; results may violate the algebroid identities",
                InvalidStructureWarning,
                stacklevel=3,
            )

    def Pi(self, big: Chart | None = None) -> Multivector:
        big = big or cylinder.extended_chart(self.chart)
        return self.Q.embed(big) + wedge(cylinder.d_t(big), self.E.embed(big))


def pi_self_bracket(S: OmegaPoissonStructure) -> Multivector:
    """``[Pi, Pi]`` in the twisted algebroid, on the extended chart."""
    P = S.Pi()
    return omega_schouten(P, P, S.Omega)


def check_omega_poisson(S: OmegaPoissonStructure) -> Check:
    r1, r2 = S.residuals
    big_residual = pi_self_bracket(S)
    pair_ok = r1.is_zero() and r2.is_zero()
    return Check(
        "omega-poisson",
        pair_ok and big_residual.is_zero(),
        residuals={"[Q,Q]": r1, "L_E Q - sharp_Q Omega": r2, "[Pi,Pi]_Omega": big_residual},
        details={"equivalence_consistent": pair_ok == big_residual.is_zero()},
    )


def pi_sharp(S: OmegaPoissonStructure, s: JetSection) -> ExtSection:
    """``sharp_Pi(alpha + f dt) = sharp_Q alpha + f E - alpha(E) d_t``."""
    return ExtSection(sharp(S.Q, s.alpha) + S.E * s.f, -pairing(S.E, s.alpha))


def pi_sharp_oracle(S: OmegaPoissonStructure, s: JetSection) -> ExtSection:
    big = cylinder.extended_chart(S.chart)
    form = s.alpha.embed(big) + cylinder.dt(big) * s.f.embed(big)
    return ExtSection.from_vector(contract_form(form, S.Pi(big)), S.chart)


def pi_eval(S: OmegaPoissonStructure, s1: JetSection, s2: JetSection) -> ExpPoly:
    """``Q(alpha, beta) + f beta(E) - g alpha(E)``."""
    return (
        bivector_eval(S.Q, s1.alpha, s2.alpha)
        + s1.f * pairing(S.E, s2.alpha)
        - s2.f * pairing(S.E, s1.alpha)
    )


def omega_anchor(S: OmegaPoissonStructure, s: JetSection) -> Multivector:
    return pi_sharp(S, s).X


def jet_bracket_omega(S: OmegaPoissonStructure, s1: JetSection, s2: JetSection) -> JetSection:
    """Bracket on ``T*M + R`` induced by ``Pi``, written out on components."""
    S.warn_if_invalid()
    Q, E, Om = S.Q, S.E, S.Omega
    a, f, b, g = s1.alpha, s1.f, s2.alpha, s2.f

    def twist(x):
        return lie_derivative(E, x) + interior(sharp(Q, x), Om)

    form = koszul_bracket(Q, a, b) + twist(b) * f - twist(a) * g
    fn = (
        apply_vector(sharp(Q, a), g)
        - apply_vector(sharp(Q, b), f)
        + f * apply_vector(E, g)
        - g * apply_vector(E, f)
    )
    return JetSection(form, fn)


def jet_bracket_omega_oracle(S: OmegaPoissonStructure, s1: JetSection, s2: JetSection) -> JetSection:
    """``L_{sharp a} b - L_{sharp b} a - d_Omega Pi(a, b)`` with algebroid Lie derivatives."""
    Om = S.Omega

    def lie(s: ExtSection, b: JetSection) -> JetSection:
        x = OmegaForm.from_jet(b)
        out = interior_ext(s, d_omega(Om, x)) + d_omega(Om, interior_ext(s, x))
        return out.to_jet()

    a1, a2 = pi_sharp(S, s1), pi_sharp(S, s2)
    d_pi = d_omega(Om, OmegaForm(0, DiffForm.scalar(pi_eval(S, s1, s2)))).to_jet()
    return lie(a1, s2) - lie(a2, s1) - d_pi


def interior_ext(s: ExtSection, lam: OmegaForm) -> OmegaForm:
    """``i(X + f d_t)(l1 + l2 ^ dt) = i(X) l1 + (-1)^{k-1} f l2 + (i(X) l2) ^ dt``."""
    k = lam.degree
    if k == 0:
        raise DegreeError("cannot contract a function")
    first = interior(s.X, lam.first) + lam.second * s.f * _sign(k - 1)
    if k == 1:
        return OmegaForm(0, first)
    return OmegaForm(k - 1, first, interior(s.X, lam.second))


# -- d_Omega and its Chevalley-Eilenberg oracle --------------------------------
def d_omega(Om: DiffForm, lam: OmegaForm) -> OmegaForm:
    """``d lam + (-1)^k Omega ^ l2``, the differential of the twisted algebroid.

    With the twisted bracket, ``d_Omega(dt)(X, Y) = -dt([X, Y]) = -Omega(X, Y)``,
    which fixes the sign of the correction term.
    """
    return _d_omega(Om, lam, 1)


def d_omega_printed(Om: DiffForm, lam: OmegaForm) -> OmegaForm:
    """``d lam - (-1)^k Omega ^ l2``; differs from :func:`d_omega` whenever ``Omega ^ l2 != 0``."""
    return _d_omega(Om, lam, -1)


def _d_omega(Om: DiffForm, lam: OmegaForm, sign: int) -> OmegaForm:
    _require_closed(Om)
    k = lam.degree
    if k == 0:
        return OmegaForm(1, ext_d(lam.first), DiffForm.zero(lam.chart, 0))
    first = ext_d(lam.first) + wedge(Om, lam.second) * (sign * _sign(k))
    return OmegaForm(k + 1, first, ext_d(lam.second))


def _ce_differential(w: DiffForm, Om_big: DiffForm) -> DiffForm:
    """Chevalley-Eilenberg differential of the twisted algebroid on the extended chart."""
    big = w.chart
    n = big.dim
    k = w.degree
    basis = [Multivector.basis(big, i) for i in range(n)]
    br = _twisted_vf_bracket(Om_big)

    def ev(form, args):
        if form.degree == 0:
            return form.scalar_value()
        return evaluate(form, *args)

    out = {}
    for idx in combinations(range(n), k + 1):
        args = [basis[i] for i in idx]
        total = ExpPoly.zero(big)
        for i, X in enumerate(args):
            term = apply_vector(X, ev(w, args[:i] + args[i + 1:]))
            total = total + (term if i % 2 == 0 else -term)
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                rest = [br(args[i], args[j])] + [a for p, a in enumerate(args) if p not in (i, j)]
                term = ev(w, rest)
                total = total + (term if (i + j) % 2 == 0 else -term)
        out[idx] = total
    return DiffForm(big, k + 1, out)


def d_omega_oracle(Om: DiffForm, lam: OmegaForm) -> OmegaForm:
    big = cylinder.extended_chart(lam.chart)
    out = _ce_differential(lam.lift(big), Om.embed(big))
    return OmegaForm.project(out, lam.chart, lam.degree + 1)


# -- the operation wedge_Omega --------------------------------------------------
def _omega_matrix(Om: DiffForm) -> list[list[ExpPoly]]:
    chart = Om.chart
    vecs = [Multivector.basis(chart, i) for i in range(chart.dim)]
    return [[evaluate(Om, vecs[i], vecs[j]) for j in range(chart.dim)] for i in range(chart.dim)]


def wedge_omega(Om: DiffForm, U: Multivector, V: Multivector) -> Multivector:
    """``sum_{i,j} Omega_ij (i(dx^i) U) ^ (i(dx^j) V)``."""
    if U.degree < 1 or V.degree < 1:
        raise DegreeError("wedge_omega needs degrees >= 1")
    chart = U.chart
    M = _omega_matrix(Om)
    out = Multivector.zero(chart, U.degree + V.degree - 2)
    for i in range(chart.dim):
        Ui = contract_form(DiffForm.basis(chart, i), U)
        if Ui.is_zero():
            continue
        for j in range(chart.dim):
            if M[i][j].is_zero():
                continue
            out = out + wedge(Ui, contract_form(DiffForm.basis(chart, j), V)) * M[i][j]
    return out


def wedge_omega_symmetrized(Om: DiffForm, U: Multivector, V: Multivector) -> Multivector:
    """The same operation by summing over permutations of the arguments."""
    k, h = U.degree, V.degree
    if k < 1 or h < 1:
        raise DegreeError("wedge_omega needs degrees >= 1")
    chart = U.chart
    m = chart.dim
    r = k + h - 2
    norm = factorial(k - 1) * factorial(h - 1)
    dxs = [DiffForm.basis(chart, i) for i in range(m)]
    flats = [interior(Multivector.basis(chart, i), Om) for i in range(m)]

    def ev(T, args):
        return T.scalar_value() if not args and T.degree == 0 else evaluate(T, *args)

    out = {}
    for idx in combinations(range(m), r):
        alphas = [dxs[i] for i in idx]
        total = ExpPoly.zero(chart)
        for perm in permutations(range(r)):
            sgn = _perm_sign(perm)
            args = [alphas[p] for p in perm]
            for i in range(m):
                val = ev(U, [dxs[i]] + args[: k - 1]) * ev(V, [flats[i]] + args[k - 1:])
                total = total + (val if sgn > 0 else -val)
        out[idx] = total.scale(Fraction(1, norm))
    return Multivector(chart, r, out)


def _perm_sign(perm) -> int:
    sgn = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sgn = -sgn
    return sgn


# -- Poisson cohomology of TM + R ---------------------------------------------------
def partial_omega(S: OmegaPoissonStructure, C: OmegaMultivector) -> OmegaMultivector:
    """``[Pi, C]``: ``[Q,C1] - d_t ^ ([Q,C2] + Q wedge_Omega C1 + L_E C1)``."""
    return _partial(S, C, -1)


def partial_omega_printed(S: OmegaPoissonStructure, C: OmegaMultivector) -> OmegaMultivector:
    """``[Q,C1] + d_t ^ ([Q,C2] + Q wedge_Omega C1 - L_E C1)``; does not square to zero in general."""
    return _partial(S, C, 1)


def _partial(S: OmegaPoissonStructure, C: OmegaMultivector, sign: int) -> OmegaMultivector:
    S.warn_if_invalid()
    Q, E = S.Q, S.E
    k = C.degree
    c1, c2 = C.first, C.second
    first = schouten(Q, c1)
    second = -lie_derivative(E, c1)
    if k > 0:
        second = second + (schouten(Q, c2) + wedge_omega(S.Omega, Q, c1)) * sign
    return OmegaMultivector(k + 1, first, second)


def partial_omega_oracle(S: OmegaPoissonStructure, C: OmegaMultivector) -> OmegaMultivector:
    """``[Pi, C]`` in the twisted algebroid, projected back."""
    big = cylinder.extended_chart(S.chart)
    out = omega_schouten(S.Pi(big), C.lift(big), S.Omega)
    return OmegaMultivector.project(out, S.chart, C.degree + 1)


# -- the exact generator delta_Omega ---------------------------------------------
def delta_omega(S: OmegaPoissonStructure, lam: OmegaForm) -> OmegaForm:
    """``[i(Pi), d_Omega]`` on components.

    first: ``delta_Q l1 + (-1)^k ([i(Q), e(Omega)] l2 + L_E l2)``; second: ``delta_Q l2``.
    """
    return _delta(S, lam, printed=False)


def delta_omega_printed(S: OmegaPoissonStructure, lam: OmegaForm) -> OmegaForm:
    """``delta_Q l1 + (-1)^{k-1} ([i(Q), e(Omega)] l2 - d i(E) l2)`` in the first slot."""
    return _delta(S, lam, printed=True)


def _delta(S: OmegaPoissonStructure, lam: OmegaForm, printed: bool) -> OmegaForm:
    S.warn_if_invalid()
    k = lam.degree
    if k == 0:
        return OmegaForm.zero(lam.chart, 0)
    Q, E, Om = S.Q, S.E, S.Omega
    l1, l2 = lam.first, lam.second
    comm = interior(Q, wedge(Om, l2))
    if l2.degree >= 2:
        comm = comm - wedge(Om, interior(Q, l2))
    if printed:
        corr = comm - ext_d(interior(E, l2)) if k > 1 else comm
        first = koszul_delta(Q, l1) + corr * _sign(k - 1)
    else:
        first = koszul_delta(Q, l1) + (comm + lie_derivative(E, l2)) * _sign(k)
    if k == 1:
        return OmegaForm(0, first)
    return OmegaForm(k - 1, first, koszul_delta(Q, l2))


def delta_omega_oracle(S: OmegaPoissonStructure, lam: OmegaForm) -> OmegaForm:
    """``i(Pi) d_Omega - d_Omega i(Pi)`` on the extended chart, ``d_Omega`` from the CE formula."""
    k = lam.degree
    if k == 0:
        return OmegaForm.zero(lam.chart, 0)
    big = cylinder.extended_chart(lam.chart)
    Om_big = S.Omega.embed(big)
    P = S.Pi(big)
    x = lam.lift(big)
    out = interior(P, _ce_differential(x, Om_big))
    if k >= 2:
        out = out - _ce_differential(interior(P, x), Om_big)
    return OmegaForm.project(out, lam.chart, k - 1)


def omega_gerstenhaber(S: OmegaPoissonStructure, a: OmegaForm, b: OmegaForm) -> OmegaForm:
    """Bracket generated by ``delta_omega``."""
    return gerstenhaber_bracket(None, a, b, delta=lambda x: delta_omega(S, x))


def jet_bracket_omega_bv(S: OmegaPoissonStructure, s1: JetSection, s2: JetSection) -> JetSection:
    return omega_gerstenhaber(S, OmegaForm.from_jet(s1), OmegaForm.from_jet(s2)).to_jet()


# -- modular fields ------------------------------------------------------------------
def modular_pi(S: OmegaPoissonStructure, Phi) -> ExtSection:
    """``W^Pi = (W^Q + E) + (div E) d_t``."""
    vol = as_volume(Phi)
    return ExtSection(modular_vector(S.Q, vol) + S.E, divergence(S.E, vol))


def modular_pi_direct(S: OmegaPoissonStructure, Phi, f: ExpPoly) -> ExpPoly:
    """Coefficient of ``L_{sharp_Pi(df + f dt)}(Phi ^ dt)`` against ``Phi ^ dt`` on the extended chart."""
    vol = as_volume(Phi)
    big = cylinder.extended_chart(S.chart)
    top = wedge(vol.Phi.embed(big), cylinder.dt(big))
    X = pi_sharp(S, JetSection.jet(f)).vector(big)
    out = lie_derivative(X, top)
    return cylinder._strip_factor(out.coeff(*range(big.dim)), S.chart, 0) * vol.coefficient.inverse()


def modular_pi_residual(S: OmegaPoissonStructure, Phi, f: ExpPoly) -> ExpPoly:
    return modular_pi_direct(S, Phi, f) - modular_pi(S, Phi).pair(JetSection.jet(f))


def modular_pi_rescaling(S: OmegaPoissonStructure, Phi, factor: ExpPoly, max_degree: int = 2):
    """Solve ``partial g = W^Pi(factor Phi) - W^Pi(Phi)`` for a degree-0 ``g``.

    The search runs over polynomials ``g`` of degree ``<= max_degree``; the
    returned :class:`~jacobibv.homology.Feasibility` carries ``g`` as an
    :class:`OmegaMultivector` of degree 0 when one exists.
    """
    from .homology import TruncatedSpace, solve_in_truncation

    vol = as_volume(Phi)
    diff = modular_pi(S, vol.Phi * factor) - modular_pi(S, vol)
    target = OmegaMultivector.from_section(diff)
    N = max(max_degree, target.first.poly_degree(), target.second.poly_degree(), 0)
    src = TruncatedSpace(S.chart, "multivector", max_degree)
    dst = TruncatedSpace(S.chart, "multivector", N)

    def op(x):
        return partial_omega(S, OmegaMultivector(x.weight, x.first, x.second))

    res = solve_in_truncation(src, 0, op, target, dst, 1)
    if res.solution is not None:
        x = res.solution
        res.solution = OmegaMultivector(0, x.first, x.second)
    return res


def trace_flat_sharp(S: OmegaPoissonStructure) -> ExpPoly:
    """``tr(flat_Omega o sharp_Q)`` as ``sum_i <d_i, flat sharp dx^i>``."""
    chart = S.chart
    total = ExpPoly.zero(chart)
    for i in range(chart.dim):
        img = interior(sharp(S.Q, DiffForm.basis(chart, i)), S.Omega)
        total = total + img.coeff(i)
    return total


def _section_from_operator(chart: Chart, op) -> ExtSection:
    """The section ``A`` with ``<A, df + f dt> = op(f)`` for a first-order ``op``."""
    g = op(ExpPoly.constant(chart, 1))
    comps = [op(chart.coord(i)) - g * chart.coord(i) for i in range(chart.dim)]
    return ExtSection(Multivector.from_components(chart, comps), g)


def top_lie_jet(S: OmegaPoissonStructure, Phi, f: ExpPoly) -> ExpPoly:
    """Coefficient of the jet-algebroid Lie derivative of ``Phi ^ dt`` along ``df + f dt``."""
    vol = as_volume(Phi)
    m = S.chart.dim
    top = OmegaForm(m + 1, DiffForm.zero(S.chart, m + 1), vol.Phi)
    out = omega_gerstenhaber(S, OmegaForm.from_jet(JetSection.jet(f)), top)
    return vol.ratio(out.second)


def top_lie_jet_oracle(S: OmegaPoissonStructure, Phi, f: ExpPoly) -> ExpPoly:
    """The same coefficient through the derivation rule on ``h dx^1 ^ dx^2 ^ .. ^ dt``."""
    vol = as_volume(Phi)
    chart = S.chart
    m = chart.dim
    s = JetSection.jet(f)
    factors = [JetSection(DiffForm.basis(chart, i) * (vol.coefficient if i == 0 else 1), ExpPoly.zero(chart))
               for i in range(m)]
    factors.append(JetSection(DiffForm.zero(chart, 1), ExpPoly.constant(chart, 1)))
    elems = [OmegaForm.from_jet(x) for x in factors]
    total = OmegaForm.zero(chart, m + 1)
    for i in range(m + 1):
        prod = None
        for j, e in enumerate(elems):
            x = OmegaForm.from_jet(jet_bracket_omega(S, s, factors[j])) if j == i else e
            prod = x if prod is None else prod.wedge(x)
        total = total + prod
    return vol.ratio(total.second)


@dataclass
class ElwOmega:
    A: ExtSection
    trace: ExpPoly
    first_display: ExtSection
    second_display: ExtSection
    derived: ExtSection

    def residuals(self) -> dict[str, ExtSection]:
        return {
            "A - first": self.A - self.first_display,
            "A - second": self.A - self.second_display,
            "first - second": self.first_display - self.second_display,
            "A - derived": self.A - self.derived,
        }


def modular_elw_omega(S: OmegaPoissonStructure, Phi) -> ElwOmega:
    """The modular section of ``T*M + R`` from the flat connection on the top bundle.

    ``A`` is read off from ``f -> c_jet(f) + c_rho(f)`` where ``c_jet`` is the
    jet-algebroid Lie derivative coefficient of ``Phi ^ dt`` and ``c_rho`` that
    of ``L_{rho(df + f dt)} Phi``.  Reported next to it are the closed forms
    ``(2W^Q + E) + (div E + tr) d_t`` and ``(2W^Pi - E) + tr d_t``, and
    ``(2W^Pi - 2E) + tr d_t = 2W^Q + (2 div E + tr) d_t``.  The last one
    accounts for ``{df + f dt, dt} = -(d(Ef) + flat_Omega sharp_Q df) - (Ef) dt``,
    which is not zero when ``E != 0``.
    """
    vol = as_volume(Phi)
    chart = S.chart

    def op(f):
        rho = omega_anchor(S, JetSection.jet(f))
        return top_lie_jet(S, vol, f) + vol.ratio(lie_derivative(rho, vol.Phi))

    A = _section_from_operator(chart, op)
    WQ = modular_vector(S.Q, vol)
    divE = divergence(S.E, vol)
    tr = trace_flat_sharp(S)
    first = ExtSection(WQ * 2 + S.E, divE + tr)
    W = modular_pi(S, vol)
    second = W * 2 - ExtSection(S.E, ExpPoly.zero(chart)) + ExtSection(Multivector.zero(chart, 1), tr)
    derived = W * 2 - ExtSection(S.E * 2, ExpPoly.zero(chart)) + ExtSection(Multivector.zero(chart, 1), tr)
    return ElwOmega(A, tr, first, second, derived)


def elw_operator_residual(S: OmegaPoissonStructure, Phi, f: ExpPoly) -> ExpPoly:
    """``c_jet(f) + c_rho(f) - <A, df + f dt>``: zero iff ``A`` represents the operator at ``f``."""
    vol = as_volume(Phi)
    rho = omega_anchor(S, JetSection.jet(f))
    val = top_lie_jet(S, vol, f) + vol.ratio(lie_derivative(rho, vol.Phi))
    return val - modular_elw_omega(S, vol).A.pair(JetSection.jet(f))


# -- Studi-Poisson brackets -----------------------------------------------------------
@dataclass(frozen=True)
class StudiFunction:
    """``f0 + f1 s`` with ``s^2 = 0``."""

    f0: ExpPoly
    f1: ExpPoly

    def __add__(self, other):
        return StudiFunction(self.f0 + other.f0, self.f1 + other.f1)

    def __sub__(self, other):
        return StudiFunction(self.f0 - other.f0, self.f1 - other.f1)

    def __mul__(self, other):
        if isinstance(other, StudiFunction):
            return StudiFunction(self.f0 * other.f0, self.f0 * other.f1 + self.f1 * other.f0)
        return StudiFunction(self.f0 * other, self.f1 * other)

    def is_zero(self) -> bool:
        return self.f0.is_zero() and self.f1.is_zero()


def studi_bracket(S: OmegaPoissonStructure, F: StudiFunction, G: StudiFunction) -> StudiFunction:
    """The two-component bracket built from ``{ , }_Q`` and ``E``.

    It is skew and ``{s, g} = Eg``.  With ``E != 0`` it is not a Poisson
    bracket on the dual numbers: a derivation ``D`` must satisfy
    ``0 = D(s^2) = 2 s D(s)``, while ``{s, g0} = E g0`` is real.  The Jacobi
    identity still holds on triples in which at most one argument has a
    nonzero ``s`` part, and on all triples when ``E = 0``.  See
    :func:`studi_jacobi_witness`.
    """
    if not S.Omega.is_zero():
        raise OmegaError("the Studi bracket needs Omega = 0")
    S.warn_if_invalid()
    Q, E = S.Q, S.E

    def pb(a, b):
        return bivector_eval(Q, d_function(a), d_function(b))

    f0, f1, g0, g1 = F.f0, F.f1, G.f0, G.f1
    real = pb(f0, g0) + f1 * apply_vector(E, g0) - g1 * apply_vector(E, f0)
    dual = pb(f0, g1) + pb(f1, g0) + f1 * apply_vector(E, g1) - g1 * apply_vector(E, f1)
    return StudiFunction(real, dual)


def studi_jacobiator(S, F, G, H) -> StudiFunction:
    def br(a, b):
        return studi_bracket(S, a, b)

    return br(F, br(G, H)) + br(G, br(H, F)) + br(H, br(F, G))


def studi_jacobi_witness(S: OmegaPoissonStructure):
    """A triple ``(x_i, x_j s, x_k s)`` with nonzero jacobiator, or ``None``."""
    chart = S.chart
    zero = ExpPoly.zero(chart)
    real = [StudiFunction(chart.coord(i), zero) for i in range(chart.dim)]
    dual = [StudiFunction(zero, chart.coord(i)) for i in range(chart.dim)]
    for F in real:
        for a, G in enumerate(dual):
            for H in dual[a + 1:]:
                j = studi_jacobiator(S, F, G, H)
                if not j.is_zero():
                    return (F, G, H), j
    return None


def studi_hamiltonian_s(S: OmegaPoissonStructure, G: StudiFunction) -> StudiFunction:
    """``{s, G}``; equals ``E`` applied componentwise."""
    chart = S.chart
    return studi_bracket(S, StudiFunction(ExpPoly.zero(chart), ExpPoly.constant(chart, 1)), G)


# -- time functions ---------------------------------------------------------------------
class TimeFunctionError(ValueError):
    """``E(tau) != 1``."""


def time_function_bivector(J: JacobiStructure, tau: ExpPoly, sign: int = 1) -> Multivector:
    """``L + sign * (sharp_L d tau) ^ E``; ``sign = 1`` gives a Poisson bivector."""
    return J.L + wedge(sharp(J.L, d_function(tau)), J.E) * sign


def time_function_structure(J: JacobiStructure, tau: ExpPoly) -> OmegaPoissonStructure:
    """Enriched Poisson structure ``(L_0, E)`` from a time function ``tau`` (``E tau = 1``)."""
    Etau = apply_vector(J.E, tau)
    if Etau != ExpPoly.constant(J.chart, 1):
        raise TimeFunctionError(f"E(tau) = {Etau}, expected 1")
    S = OmegaPoissonStructure.enriched(time_function_bivector(J, tau), J.E)
    if not S.is_valid:
        raise TimeFunctionError("the reduced bivector is not an enriched Poisson structure")
    return S


def time_hamiltonian_field(S: OmegaPoissonStructure, H: ExpPoly) -> Multivector:
    """``sharp_{L_0} dH + E``."""
    return sharp(S.Q, d_function(H)) + S.E


# -- the bracket {f, g}_s -------------------------------------------------------------
def s_bracket(J: JacobiStructure, f: ExpPoly, g: ExpPoly) -> ExpPoly:
    """``<d f, d_* g>``: ``d`` of ``TM + R`` (slotwise) against the jet-algebroid differential."""
    chart = J.chart
    df = JetSection.from_weighted(bar_d(WeightedForm(0, DiffForm.scalar(f))))
    dg = algebroid_coboundary(J, WeightedMultivector(0, Multivector.scalar(g)))
    return evaluate_cochain(dg, [df]) if not df.is_zero() else ExpPoly.zero(chart)


def s_bracket_defect(J: JacobiStructure, f: ExpPoly, g: ExpPoly) -> ExpPoly:
    """``{f, g}_s - L(df, dg)``."""
    return s_bracket(J, f, g) - bivector_eval(J.L, d_function(f), d_function(g))


def remark_bar_d_residual(lam: WeightedForm) -> WeightedForm:
    """``bar_d`` minus the untwisted algebroid differential of ``TM + R``."""
    chart = lam.chart
    oracle = d_omega_oracle(DiffForm.zero(chart, 2), OmegaForm(lam.weight, lam.first, lam.second))
    out = bar_d(lam)
    return out - WeightedForm(oracle.weight, oracle.first, oracle.second)


# -- plane examples ------------------------------------------------------------------------
def plane_chart() -> Chart:
    return Chart(("x1", "x2"))


def plane_omega_example(sign: int = 1) -> OmegaPoissonStructure:
    """``Q = d1^d2``, ``Omega = dx1^dx2``, ``E = sign * x1 d1``."""
    chart = plane_chart()
    Q = Multivector.basis(chart, 0, 1)
    E = Multivector.basis(chart, 0) * chart.coord(0) * sign
    return OmegaPoissonStructure(Q, E, DiffForm.basis(chart, 0, 1))


def plane_enriched_example() -> OmegaPoissonStructure:
    """``Q = d1^d2``, ``E = x1 d1 - x2 d2``, ``Omega = 0``."""
    chart = plane_chart()
    Q = Multivector.basis(chart, 0, 1)
    E = Multivector.basis(chart, 0) * chart.coord(0) - Multivector.basis(chart, 1) * chart.coord(1)
    return OmegaPoissonStructure.enriched(Q, E)


def failing_example() -> OmegaPoissonStructure:
    """``Q = d1^d2 + x1 d3^d4`` on ``R^4``, ``E = 0``, ``Omega = 0``."""
    chart = Chart(("x1", "x2", "x3", "x4"))
    Q = Multivector.basis(chart, 0, 1) + Multivector.basis(chart, 2, 3) * chart.coord(0)
    return OmegaPoissonStructure.enriched(Q, Multivector.zero(chart, 1))
