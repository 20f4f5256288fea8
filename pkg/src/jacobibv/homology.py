"""Exact truncated complexes, Betti numbers and bounded-degree feasibility.

A truncation keeps the weighted forms (or multivectors) whose coefficients
are polynomials of degree at most ``N``.  With constant structure
coefficients every operator offered here maps this space into itself, so the
truncations are honest subcomplexes.  Linear coefficients are accepted as
well, but some operators then raise the degree (``sigma`` wedges with ``L``,
for instance); images are checked term by term and an escaping term raises
:class:`UnsupportedTruncation`.  Feasibility questions such as
:func:`coboundary_feasibility` use a larger target space and are not
affected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .jacobi import (
    JacobiStructure,
    WeightedForm,
    WeightedMultivector,
    bar_d,
    bv_delta,
    sigma,
)
from .symalg import Chart, ExpPoly
from .tensor import DiffForm, Multivector


class UnsupportedTruncation(ValueError):
    """The operator does not preserve the bounded-degree subspace."""


def monomials(chart: Chart, N: int) -> list[tuple]:
    """Exponent tuples of total degree at most ``N``, by degree, then lexicographically descending."""
    exps = [e for e in product(range(N + 1), repeat=chart.dim) if sum(e) <= N]
    return sorted(exps, key=lambda e: (sum(e), tuple(-x for x in e)))


class TruncatedSpace:
    """Graded pieces of weighted forms or multivectors with coefficient degree ``<= N``."""

    def __init__(self, chart: Chart, kind: str, N: int):
        if kind not in ("form", "multivector"):
            raise ValueError("kind must be 'form' or 'multivector'")
        self.chart = chart
        self.kind = kind
        self.N = N
        self.monos = monomials(chart, N)
        self._bases: dict[int, list] = {}

    @property
    def tensor_cls(self):
        return DiffForm if self.kind == "form" else Multivector

    @property
    def weighted_cls(self):
        return WeightedForm if self.kind == "form" else WeightedMultivector

    def basis(self, k: int) -> list[tuple]:
        """Descriptions ``(slot, index tuple, exponent tuple)``."""
        if k not in self._bases:
            m = self.chart.dim
            desc = []
            if 0 <= k <= m:
                desc += [(1, idx, e) for idx in combinations(range(m), k) for e in self.monos]
            if 1 <= k <= m + 1:
                desc += [(2, idx, e) for idx in combinations(range(m), k - 1) for e in self.monos]
            self._bases[k] = desc
        return self._bases[k]

    def dim(self, k: int) -> int:
        return len(self.basis(k))

    def element(self, k: int, i: int):
        slot, idx, e = self.basis(k)[i]
        coeff = ExpPoly(self.chart, {(self.chart._zero_freq, e): 1})
        t = self.tensor_cls(self.chart, len(idx), {idx: coeff})
        W = self.weighted_cls
        if slot == 1:
            return W(k, t)
        return W(k, self.tensor_cls.zero(self.chart, k), t)

    def coordinates(self, k: int, x) -> dict[int, Fraction]:
        index = self._index(k)
        out: dict[int, Fraction] = {}
        for slot, tensor in ((1, x.first), (2, x.second)):
            if slot == 2 and k == 0:
                continue
            for idx, coeff in tensor.items():
                for (freqs, exps), c in coeff.items():
                    key = (slot, idx, exps)
                    if any(freqs) or key not in index:
                        raise UnsupportedTruncation(
                            f"image term {coeff} on {idx} leaves the degree-{self.N} truncation"
                        )
                    out[index[key]] = out.get(index[key], Fraction(0)) + c
        return out

    def _index(self, k: int) -> dict:
        attr = f"_idx{k}"
        cached = getattr(self, attr, None)
        if cached is None:
            cached = {d: i for i, d in enumerate(self.basis(k))}
            setattr(self, attr, cached)
        return cached


def _matrix(rows: int, cols: int, columns: list[dict]) -> DomainMatrix:
    data = [[QQ(0)] * cols for _ in range(rows)]
    for j, col in enumerate(columns):
        for i, c in col.items():
            data[i][j] = QQ(c.numerator, c.denominator)
    return DomainMatrix(data, (rows, cols), QQ)


def operator_matrix(space_in: TruncatedSpace, k: int, op, space_out: TruncatedSpace, k_out: int) -> DomainMatrix:
    cols = [space_out.coordinates(k_out, op(space_in.element(k, i))) for i in range(space_in.dim(k))]
    return _matrix(space_out.dim(k_out), space_in.dim(k), cols)


@dataclass
class TruncatedComplex:
    """Matrices ``maps[k]`` of an operator from degree ``k`` to ``k + step``."""

    tag: str
    step: int
    space: TruncatedSpace
    degrees: list[int]
    maps: dict[int, DomainMatrix] = field(default_factory=dict)

    def dims(self) -> dict[int, int]:
        return {k: self.space.dim(k) for k in self.degrees}

    def rank(self, k: int) -> int:
        M = self.maps.get(k)
        if M is None or 0 in M.shape:
            return 0
        return M.rank()

    def composition_residuals(self) -> dict[int, int]:
        """Number of nonzero entries in each consecutive composite."""
        out = {}
        for k in self.degrees:
            A = self.maps.get(k)
            B = self.maps.get(k + self.step)
            if A is None or B is None or 0 in A.shape or 0 in B.shape:
                continue
            prod = (B * A).to_list()
            out[k] = sum(1 for row in prod for x in row if x != 0)
        return out

    def is_complex(self) -> bool:
        return all(v == 0 for v in self.composition_residuals().values())


def _structure_supported(J: JacobiStructure):
    for T in (J.L, J.E):
        if T.has_exponentials() or T.poly_degree() > 1:
            raise UnsupportedTruncation(
                "truncation needs structure coefficients that are polynomials of degree <= 1"
            )


def truncated_complex(operator: str, J: JacobiStructure, N: int, Phi=None) -> TruncatedComplex:
    """Exact matrices of ``operator`` on the degree-``N`` truncation.

    ``operator`` is one of ``bv_delta``, ``d0``, ``bar_d`` (weighted forms) or
    ``sigma``, ``twisted`` (weighted multivectors).  ``d0`` and ``twisted``
    need the volume form ``Phi``.
    """
    from . import modular

    _structure_supported(J)
    chart = J.chart
    m = chart.dim
    degrees = list(range(m + 2))
    if operator in ("d0", "twisted"):
        if Phi is None:
            raise ValueError(f"{operator} needs a volume form")
        vol = modular.as_volume(Phi)
        if vol.coefficient.has_exponentials() or not vol.coefficient.is_constant():
            raise UnsupportedTruncation("truncation needs a constant-coefficient volume form")
    if operator == "bv_delta":
        space, step, op = TruncatedSpace(chart, "form", N), -1, lambda x: bv_delta(J, x)
    elif operator == "d0":
        data = modular.modular_data(J, vol)
        space, step, op = TruncatedSpace(chart, "form", N), -1, lambda x: modular.d0(J, vol, x, data)
    elif operator == "bar_d":
        space, step, op = TruncatedSpace(chart, "form", N), 1, bar_d
    elif operator == "sigma":
        space, step, op = TruncatedSpace(chart, "multivector", N), 1, lambda x: sigma(J, x)
    elif operator == "twisted":
        c = modular.connection_cochain(J, vol)
        space, step = TruncatedSpace(chart, "multivector", N), 1

        def op(x):
            return sigma(J, x) - x.wedge(c) * (-1 if x.weight % 2 else 1)
    else:
        raise ValueError(f"unknown operator {operator!r}")
    cx = TruncatedComplex(operator, step, space, degrees)
    for k in degrees:
        kt = k + step
        if kt not in degrees:
            continue
        cx.maps[k] = operator_matrix(space, k, op, space, kt)
    return cx


def betti(T: TruncatedComplex) -> list[int]:
    """``dim ker - rank`` in each degree, in the direction of the complex."""
    out = []
    for k in T.degrees:
        incoming = k - T.step
        out.append(T.space.dim(k) - T.rank(k) - (T.rank(incoming) if incoming in T.maps else 0))
    return out


@dataclass
class Feasibility:
    feasible: bool
    max_degree: int
    solution: object = None
    rank: int = 0
    augmented_rank: int = 0

    def describe(self) -> str:
        if self.feasible:
            return f"feasible up to degree {self.max_degree}"
        return f"infeasible up to degree {self.max_degree}"


def solve_in_truncation(space_in: TruncatedSpace, k: int, op, target, space_out: TruncatedSpace, k_out: int) -> Feasibility:
    """Decide whether ``op(x) = target`` has a solution ``x`` in degree ``k`` of ``space_in``."""
    A = operator_matrix(space_in, k, op, space_out, k_out)
    try:
        b = space_out.coordinates(k_out, target)
    except UnsupportedTruncation:
        return Feasibility(False, space_in.N)
    rows, cols = A.shape
    bcol = _matrix(rows, 1, [b])
    aug = A.hstack(bcol)
    ra = A.rank() if cols else 0
    rb = aug.rank()
    if ra != rb:
        return Feasibility(False, space_in.N, None, ra, rb)
    rref, pivots = aug.rref()
    data = rref.to_list()
    x = None
    for r, pc in enumerate(pivots):
        val = data[r][cols]
        coef = Fraction(int(val.numerator), int(val.denominator))
        term = space_in.element(k, pc) * coef
        x = term if x is None else x + term
    if x is None:
        x = space_in.weighted_cls.zero(space_in.chart, k)
    return Feasibility(True, space_in.N, x, ra, rb)


def coboundary_feasibility(J: JacobiStructure, target: WeightedMultivector, max_degree: int) -> Feasibility:
    """Is ``target = sigma f`` for a polynomial ``f`` of degree ``<= max_degree``?"""
    space = TruncatedSpace(J.chart, "multivector", max(max_degree, target.first.poly_degree(), 0))
    src = TruncatedSpace(J.chart, "multivector", max_degree)
    res = solve_in_truncation(src, 0, lambda x: sigma(J, x), target, space, 1)
    return res
