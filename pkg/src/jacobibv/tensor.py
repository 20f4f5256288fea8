"""Exterior calculus of forms and multivector fields with ExpPoly coefficients.

Conventions used throughout the package:

* The interior product contracts from the left, ``i(d_I)(dx^I ^ w) = w``,
  equivalently ``i(X ^ Y) = i(Y) o i(X)``.  This is the ordering under which
  ``i(P)(dt ^ mu) = e^{-t}(i(E)mu + dt ^ i(Lambda)mu)`` holds for the
  Poissonization ``P``.
* ``Lambda(alpha, beta) = <Lambda, alpha ^ beta>`` and
  ``<sharp_Lambda alpha, beta> = Lambda(alpha, beta)``.
* :func:`schouten` uses the sign convention ``[V, U] = (-1)^{uv} [U, V]``,
  under which the contact structure satisfies ``[L, L] = 2 E ^ L``.  It
  differs from the graded-Lie convention :func:`schouten_std` by the factor
  ``(-1)^(u+1)``.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .symalg import Chart, ChartMismatchError, ExpPoly

Index = tuple[int, ...]


class DegreeError(ValueError):
    """Raised when an operation receives a tensor of the wrong degree or kind."""


def sort_with_sign(idx: Sequence[int]) -> tuple[int, Index]:
    """Sign of the sorting permutation, or 0 when an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                sign = -sign
    return sign, tuple(sorted(idx))


def _merge_sign(left: Index, right: Index) -> int:
    if set(left) & set(right):
        return 0
    inversions = sum(1 for a in left for b in right if a > b)
    return -1 if inversions % 2 else 1


def _left_contract_index(inner: Index, outer: Index) -> tuple[int, Index]:
    """``i(e_inner)(e^outer)`` for basis elements, contracting from the left."""
    if not set(inner) <= set(outer):
        return 0, ()
    rest = tuple(k for k in outer if k not in inner)
    inversions = sum(1 for j in inner for r in rest if r < j)
    return (-1 if inversions % 2 else 1), rest


class _Skew:
    """Common storage for skew tensors: ``{sorted index tuple: ExpPoly}``."""

    __slots__ = ("chart", "degree", "_terms")
    kind = "skew"

    def __init__(self, chart: Chart, degree: int, terms: Mapping[Index, ExpPoly] | None = None):
        if degree < 0:
            raise DegreeError("negative degree")
        self.chart = chart
        self.degree = degree
        clean: dict[Index, ExpPoly] = {}
        for idx, coeff in (terms or {}).items():
            if len(idx) != degree:
                raise DegreeError(f"index {idx} does not match degree {degree}")
            if any(not 0 <= i < chart.dim for i in idx):
                raise DegreeError(f"index {idx} out of range for dim {chart.dim}")
            if not isinstance(coeff, ExpPoly):
                coeff = ExpPoly.constant(chart, coeff)
            elif coeff.chart != chart:
                raise ChartMismatchError("coefficient chart differs from tensor chart")
            sign, key = sort_with_sign(idx)
            if sign == 0 or coeff.is_zero():
                continue
            acc = clean.get(key)
            val = coeff if sign > 0 else -coeff
            clean[key] = val if acc is None else acc + val
            if clean[key].is_zero():
                del clean[key]
        self._terms = dict(sorted(clean.items()))

    # -- construction helpers -------------------------------------
    @classmethod
    def zero(cls, chart: Chart, degree: int):
        return cls(chart, degree)

    @classmethod
    def scalar(cls, f: ExpPoly):
        return cls(f.chart, 0, {(): f})

    @classmethod
    def basis(cls, chart: Chart, *idx: int):
        return cls(chart, len(idx), {tuple(idx): ExpPoly.constant(chart, 1)})

    @classmethod
    def from_components(cls, chart: Chart, comps: Sequence):
        """Degree-one tensor from a list of coefficients."""
        return cls(chart, 1, {(i,): c for i, c in enumerate(comps)})

    def _same(self, degree: int, terms) -> "_Skew":
        return type(self)(self.chart, degree, terms)

    # -- inspection -------------------------------------------------
    @property
    def terms(self) -> dict[Index, ExpPoly]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, *idx: int) -> ExpPoly:
        sign, key = sort_with_sign(idx)
        c = self._terms.get(key)
        if sign == 0 or c is None:
            return ExpPoly.zero(self.chart)
        return c if sign > 0 else -c

    def components(self) -> list[ExpPoly]:
        if self.degree != 1:
            raise DegreeError("components() needs degree 1")
        return [self.coeff(i) for i in range(self.chart.dim)]

    def scalar_value(self) -> ExpPoly:
        if self.degree != 0:
            raise DegreeError("not a scalar")
        return self.coeff()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def poly_degree(self) -> int:
        return max((c.poly_degree() for c in self._terms.values()), default=-1)

    def has_exponentials(self) -> bool:
        return any(c.has_exponentials() for c in self._terms.values())

    # -- linear structure ----------------------------------------
    def _check(self, other: "_Skew", same_degree: bool = True):
        if type(other) is not type(self):
            raise DegreeError(f"cannot combine {self.kind} with {other.kind}")
        if other.chart != self.chart:
            raise ChartMismatchError("charts differ")
        if same_degree and other.degree != self.degree:
            raise DegreeError(f"degrees differ: {self.degree} vs {other.degree}")

    def __add__(self, other):
        if not isinstance(other, _Skew):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out[k] + c if k in out else c
        return self._same(self.degree, out)

    def __neg__(self):
        return self._same(self.degree, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, _Skew):
            return NotImplemented
        return self + (-other)

    def __mul__(self, f):
        if isinstance(f, (int, Fraction)):
            if f == 0:
                return self._same(self.degree, {})
            return self._same(self.degree, {k: c * f for k, c in self._terms.items()})
        if isinstance(f, ExpPoly):
            if f.chart != self.chart:
                raise ChartMismatchError("charts differ")
            return self._same(self.degree, {k: c * f for k, c in self._terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def partial(self, i: int):
        """Coefficientwise derivative along coordinate ``i``."""
        return self._same(self.degree, {k: c.partial(i) for k, c in self._terms.items()})

    def map_coeffs(self, fn):
        return self._same(self.degree, {k: fn(c) for k, c in self._terms.items()})

    def embed(self, big: Chart):
        return type(self)(big, self.degree, {k: c.embed(big) for k, c in self._terms.items()})

    def __eq__(self, other):
        if not isinstance(other, _Skew):
            return NotImplemented
        return (
            type(self) is type(other)
            and self.chart == other.chart
            and self.degree == other.degree
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((type(self).__name__, self.chart, self.degree, tuple(self._terms.items())))

    def __str__(self):
        from .parse import format_tensor

        return format_tensor(self)

    def __repr__(self):
        return f"{type(self).__name__}(deg={self.degree}, {self})"


class DiffForm(_Skew):
    """Differential form ``sum_I c_I dx^I``."""

    __slots__ = ()
    kind = "form"


class Multivector(_Skew):
    """Multivector field ``sum_I c_I d_I``."""

    __slots__ = ()
    kind = "multivector"


def coerce_scalar(value, chart: Chart, cls):
    """Promote a rational or ExpPoly to a degree-0 tensor of class ``cls``."""
    if isinstance(value, _Skew):
        return value
    if isinstance(value, ExpPoly):
        return cls.scalar(value)
    return cls.scalar(ExpPoly.constant(chart, value))


# -- products --------------------------------------------------------------
def wedge(a: _Skew, b: _Skew) -> _Skew:
    """Exterior product of two forms or two multivectors."""
    a._check(b, same_degree=False)
    degree = a.degree + b.degree
    out: dict[Index, ExpPoly] = {}
    if degree > a.chart.dim:
        return a._same(degree, {})
    for ia, ca in a._terms.items():
        for ib, cb in b._terms.items():
            s = _merge_sign(ia, ib)
            if not s:
                continue
            key = tuple(sorted(ia + ib))
            val = ca * cb if s > 0 else -(ca * cb)
            out[key] = out[key] + val if key in out else val
    return a._same(degree, out)


def wedge_all(items: Iterable[_Skew], chart: Chart, cls) -> _Skew:
    result = cls.scalar(ExpPoly.constant(chart, 1))
    for it in items:
        result = wedge(result, it)
    return result


def ext_d(w: DiffForm) -> DiffForm:
    """Exterior derivative."""
    if not isinstance(w, DiffForm):
        raise DegreeError("ext_d takes a differential form")
    out: dict[Index, ExpPoly] = {}
    for idx, c in w._terms.items():
        for j in range(w.chart.dim):
            if j in idx:
                continue
            dc = c.partial(j)
            if dc.is_zero():
                continue
            s, key = sort_with_sign((j,) + idx)
            val = dc if s > 0 else -dc
            out[key] = out[key] + val if key in out else val
    return DiffForm(w.chart, w.degree + 1, out)


def d_function(f: ExpPoly) -> DiffForm:
    return ext_d(DiffForm.scalar(f))


def _contract(inner: _Skew, outer: _Skew, result_cls):
    if inner.chart != outer.chart:
        raise ChartMismatchError("charts differ")
    degree = outer.degree - inner.degree
    if degree < 0:
        return result_cls(outer.chart, 0, {})
    out: dict[Index, ExpPoly] = {}
    for ii, ci in inner._terms.items():
        for io, co in outer._terms.items():
            s, rest = _left_contract_index(ii, io)
            if not s:
                continue
            val = ci * co if s > 0 else -(ci * co)
            out[rest] = out[rest] + val if rest in out else val
    return result_cls(outer.chart, degree, out)


def interior(P: Multivector, mu: DiffForm) -> DiffForm:
    """``i(P) mu`` contracting from the left; zero when ``deg P > deg mu``."""
    if not isinstance(P, Multivector) or not isinstance(mu, DiffForm):
        raise DegreeError("interior(multivector, form) expected")
    return _contract(P, mu, DiffForm)


def koszul_delta(P: Multivector, w: DiffForm) -> DiffForm:
    """``i(P)d - d i(P)``; the second term is dropped when ``deg P > deg w``."""
    out = interior(P, ext_d(w))
    if w.degree >= P.degree:
        out = out - ext_d(interior(P, w))
    return out


def contract_form(w: DiffForm, U: Multivector) -> Multivector:
    """Transpose contraction ``i(w) U`` of a form into a multivector."""
    if not isinstance(w, DiffForm) or not isinstance(U, Multivector):
        raise DegreeError("contract_form(form, multivector) expected")
    return _contract(w, U, Multivector)


def pairing(U: Multivector, w: DiffForm) -> ExpPoly:
    """Full contraction of equal-degree tensors, ``<d_I, dx^I> = 1``."""
    if U.degree != w.degree:
        raise DegreeError(f"pairing needs equal degrees, got {U.degree} and {w.degree}")
    return interior(U, w).coeff()


def evaluate(T: _Skew, *args: _Skew) -> ExpPoly:
    """Evaluate a tensor on degree-one arguments of the dual kind."""
    if len(args) != T.degree:
        raise DegreeError("wrong number of arguments")
    dual = DiffForm if isinstance(T, Multivector) else Multivector
    w = wedge_all(args, T.chart, dual)
    return pairing(T, w) if isinstance(T, Multivector) else pairing(w, T)


# -- musical maps -------------------------------------------------------------
def sharp(L: Multivector, alpha: DiffForm) -> Multivector:
    """``<sharp_L alpha, beta> = L(alpha, beta)``."""
    if L.degree != 2 or alpha.degree != 1:
        raise DegreeError("sharp needs a bivector and a 1-form")
    return contract_form(alpha, L)


def flat(Om: DiffForm, X: Multivector) -> DiffForm:
    """``flat_Om X = i(X) Om``."""
    if Om.degree != 2 or X.degree != 1:
        raise DegreeError("flat needs a 2-form and a vector field")
    return interior(X, Om)


def bivector_eval(L: Multivector, alpha: DiffForm, beta: DiffForm) -> ExpPoly:
    return pairing(L, wedge(alpha, beta))


def apply_vector(X: Multivector, f: ExpPoly) -> ExpPoly:
    """Directional derivative ``X(f)``."""
    if X.degree != 1:
        raise DegreeError("apply_vector needs a vector field")
    total = ExpPoly.zero(X.chart)
    for (i,), c in X._terms.items():
        total = total + c * f.partial(i)
    return total


def push_forms(w: DiffForm, images: Sequence[Multivector]) -> Multivector:
    """Apply ``wedge^k T`` to ``w`` where ``T(dx^i) = images[i]``."""
    out = Multivector.zero(w.chart, w.degree)
    for idx, c in w._terms.items():
        out = out + wedge_all((images[i] for i in idx), w.chart, Multivector) * c
    return out


# -- Lie derivative ------------------------------------------------------------
def lie_derivative(X: Multivector, T: _Skew) -> _Skew:
    """``L_X T``: Cartan's formula on forms, ``[X, T]`` on multivectors."""
    if not isinstance(X, Multivector) or X.degree != 1:
        raise DegreeError("lie_derivative needs a vector field")
    if isinstance(T, DiffForm):
        out = interior(X, ext_d(T))
        return out + ext_d(interior(X, T)) if T.degree else out
    return schouten(X, T)


def lie_derivative_coordinates(X: Multivector, T: _Skew) -> _Skew:
    """Coordinate transport formula, used to cross-check :func:`lie_derivative`."""
    chart = T.chart
    comps = X.components()
    out = T._same(T.degree, {})
    for k, Xk in enumerate(comps):
        out = out + T.partial(k) * Xk
    if isinstance(T, DiffForm):
        # d(X^i) = d_j X^i dx^j replaces each dx^i
        for idx, c in T._terms.items():
            for pos, i in enumerate(idx):
                for j in range(chart.dim):
                    dXi = comps[i].partial(j)
                    if dXi.is_zero():
                        continue
                    new = idx[:pos] + (j,) + idx[pos + 1:]
                    out = out + DiffForm(chart, T.degree, {new: c * dXi})
    else:
        # [X, d_i] = -d_i(X^j) d_j
        for idx, c in T._terms.items():
            for pos, i in enumerate(idx):
                for j in range(chart.dim):
                    dXj = comps[j].partial(i)
                    if dXj.is_zero():
                        continue
                    new = idx[:pos] + (j,) + idx[pos + 1:]
                    out = out - Multivector(chart, T.degree, {new: c * dXj})
    return out


# -- Schouten-Nijenhuis ----------------------------------------------------
def _right_derivative(U: Multivector, k: int) -> Multivector:
    """Remove ``d_k`` after moving it to the right end of each term."""
    u = U.degree
    out: dict[Index, ExpPoly] = {}
    for idx, c in U._terms.items():
        if k not in idx:
            continue
        pos = idx.index(k)
        rest = idx[:pos] + idx[pos + 1:]
        out[rest] = c if (u - 1 - pos) % 2 == 0 else -c
    return Multivector(U.chart, u - 1, out)


def schouten_std(U: Multivector, V: Multivector) -> Multivector:
    """Schouten bracket in the graded-Lie convention.

    ``[U, V] = -(-1)^{(u-1)(v-1)} [V, U]``, ``[X, f] = X(f)`` and the
    Leibniz rule ``[U, V ^ W] = [U, V] ^ W + (-1)^{(u-1)v} V ^ [U, W]``.
    Computed by the coordinate formula
    ``sum_k dR_k U ^ d_k V - (-1)^{(u-1)(v-1)} dR_k V ^ d_k U``.
    """
    if not isinstance(U, Multivector) or not isinstance(V, Multivector):
        raise DegreeError("schouten takes multivectors")
    if U.chart != V.chart:
        raise ChartMismatchError("charts differ")
    u, v = U.degree, V.degree
    degree = u + v - 1
    if degree < 0:
        return Multivector.zero(U.chart, 0)
    out = Multivector.zero(U.chart, degree)
    sign = -1 if ((u - 1) * (v - 1)) % 2 == 0 else 1
    for k in range(U.chart.dim):
        if u:
            dU = _right_derivative(U, k)
            if dU:
                out = out + wedge(dU, V.partial(k))
        if v:
            dV = _right_derivative(V, k)
            if dV:
                out = out + wedge(dV, U.partial(k)) * sign
    return out


def schouten(U: Multivector, V: Multivector) -> Multivector:
    """Schouten bracket with ``[V, U] = (-1)^{uv}[U, V]`` and ``[X, f] = X(f)``."""
    out = schouten_std(U, V)
    return out if U.degree % 2 == 1 else -out


def _decompose(U: Multivector) -> list[tuple[ExpPoly, list[Multivector]]]:
    """Each term ``c d_I`` as a coefficient and a list of basis vector fields."""
    return [
        (c, [Multivector.basis(U.chart, i) for i in idx]) for idx, c in U._terms.items()
    ]


def _bracket_decomposables(
    Xs: list[Multivector], Ys: list[Multivector], vf_bracket
) -> Multivector:
    """Schouten bracket of ``X_1^..^X_u`` and ``Y_1^..^Y_v`` (graded-Lie convention)."""
    chart = (Xs or Ys)[0].chart if (Xs or Ys) else None
    u, v = len(Xs), len(Ys)
    out = None
    for i, X in enumerate(Xs):
        for j, Y in enumerate(Ys):
            term = vf_bracket(X, Y)
            rest = Xs[:i] + Xs[i + 1:] + Ys[:j] + Ys[j + 1:]
            for r in rest:
                term = wedge(term, r)
            if (i + j) % 2:
                term = -term
            out = term if out is None else out + term
    if out is None:
        return Multivector.zero(chart, max(u + v - 1, 0))
    return out


def schouten_decomposable(
    U: Multivector, V: Multivector, vf_bracket=None, anchor=None
) -> Multivector:
    """Schouten bracket (graded-Lie convention) via the decomposable formula.

    ``[X_1^..^X_u, Y_1^..^Y_v] = sum (-1)^{i+j} [X_i, Y_j] ^ X_1..^X_i..^Y_1..^Y_j..``
    with ``[X_1^..^X_u, f] = sum (-1)^{u-i} X_i(f) X_1..^X_i..^X_u``.  The
    coefficient of each term is absorbed into its first factor.  ``vf_bracket``
    and ``anchor`` default to the ordinary vector-field bracket and action, so
    the same routine serves any algebroid whose sections are modelled as vector
    fields on a chart.
    """
    vf_bracket = vf_bracket or _vector_bracket
    anchor = anchor or apply_vector
    chart = U.chart
    out = Multivector.zero(chart, max(U.degree + V.degree - 1, 0))

    def factors(T):
        res = []
        for c, vecs in _decompose(T):
            if vecs:
                res.append((None, [vecs[0] * c] + vecs[1:]))
            else:
                res.append((c, []))
        return res

    for fu, Xs in factors(U):
        for fv, Ys in factors(V):
            if fu is not None and fv is not None:
                continue  # [f, g] = 0
            if fv is not None:  # [X_1^..^X_u, g]
                u = len(Xs)
                for i, X in enumerate(Xs):
                    term = Multivector.scalar(anchor(X, fv))
                    for r in Xs[:i] + Xs[i + 1:]:
                        term = wedge(term, r)
                    out = out + (term if (u - 1 - i) % 2 == 0 else -term)
            elif fu is not None:  # [f, Y_1^..^Y_v] = -(-1)^{v-1}... by antisymmetry
                v = len(Ys)
                acc = Multivector.zero(chart, v - 1)
                for j, Y in enumerate(Ys):
                    term = Multivector.scalar(anchor(Y, fu))
                    for r in Ys[:j] + Ys[j + 1:]:
                        term = wedge(term, r)
                    acc = acc + (term if (v - 1 - j) % 2 == 0 else -term)
                # [f, V] = -(-1)^{(0-1)(v-1)} [V, f]
                out = out + (acc if (v - 1) % 2 == 1 else -acc)
            else:
                out = out + _bracket_decomposables(Xs, Ys, vf_bracket)
    return out


def _vector_bracket(X: Multivector, Y: Multivector) -> Multivector:
    xs, ys = X.components(), Y.components()
    comps = []
    for i in range(X.chart.dim):
        comps.append(apply_vector(X, ys[i]) - apply_vector(Y, xs[i]))
    return Multivector.from_components(X.chart, comps)


def vector_bracket(X: Multivector, Y: Multivector) -> Multivector:
    """Lie bracket of vector fields."""
    if X.degree != 1 or Y.degree != 1:
        raise DegreeError("vector_bracket needs vector fields")
    return _vector_bracket(X, Y)


def koszul_bracket(L: Multivector, alpha: DiffForm, beta: DiffForm) -> DiffForm:
    """``{alpha, beta}_L = L_{sharp alpha} beta - L_{sharp beta} alpha - d L(alpha, beta)``."""
    if L.degree != 2 or alpha.degree != 1 or beta.degree != 1:
        raise DegreeError("koszul_bracket needs a bivector and two 1-forms")
    return (
        lie_derivative(sharp(L, alpha), beta)
        - lie_derivative(sharp(L, beta), alpha)
        - d_function(bivector_eval(L, alpha, beta))
    )


def basis_indices(m: int, k: int) -> list[Index]:
    return list(combinations(range(m), k))
