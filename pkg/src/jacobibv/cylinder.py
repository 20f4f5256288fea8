"""Genuine tensors on ``M x R`` for cross-checking the weighted-pair formulas.

The main code never builds tensors on the product; it works with weighted
pairs.  The helpers here lift such pairs to an extended chart (time coordinate
appended last, ``e^{ct}`` carried as an exponential frequency), run the
generic calculus there and project back, checking that the ``t``-dependence
is exactly the expected exponential factor.
"""
from __future__ import annotations

from fractions import Fraction

from .symalg import Chart, ExpPoly
from .tensor import DiffForm, Multivector, _Skew, wedge


class ProjectionError(ValueError):
    """A tensor on ``M x R`` is not of the expected weighted shape."""


def time_name(chart: Chart) -> str:
    name = "t"
    while name in chart.coord_names:
        name += "_"
    return name


def extended_chart(chart: Chart) -> Chart:
    return chart.extended(time_name(chart))


def exp_t(big: Chart, c) -> ExpPoly:
    freqs = [Fraction(0)] * big.dim
    freqs[-1] = Fraction(c)
    return big.exp(freqs)


def dt(big: Chart) -> DiffForm:
    return DiffForm.basis(big, big.dim - 1)


def d_t(big: Chart) -> Multivector:
    return Multivector.basis(big, big.dim - 1)


def lift_form(big: Chart, c, first: DiffForm, second: DiffForm) -> DiffForm:
    """``e^{ct}(first + second ^ dt)`` on the extended chart."""
    out = first.embed(big)
    if first.degree > 0:
        out = out + wedge(second.embed(big), dt(big))
    return out * exp_t(big, c)


def lift_multivector(big: Chart, c, first: Multivector, second: Multivector) -> Multivector:
    """``e^{ct}(first + d_t ^ second)`` on the extended chart."""
    out = first.embed(big)
    if first.degree > 0:
        out = out + wedge(d_t(big), second.embed(big))
    return out * exp_t(big, c)


def _strip_factor(coeff: ExpPoly, small: Chart, c) -> ExpPoly:
    groups = coeff.split_last(small)
    want = (Fraction(c), 0)
    extra = [k for k in groups if k != want]
    if extra:
        raise ProjectionError(f"unexpected t-dependence {extra} (expected e^({c}t))")
    return groups.get(want, ExpPoly.zero(small))


def project(T: _Skew, small: Chart, c) -> tuple[_Skew, _Skew]:
    """Split ``T = e^{ct}(A + B ^ dt)`` (forms) or ``e^{ct}(A + d_t ^ B)`` (multivectors)."""
    m = small.dim
    cls = type(T)
    k = T.degree
    first: dict = {}
    second: dict = {}
    for idx, coeff in T.items():
        val = _strip_factor(coeff, small, c)
        if idx and idx[-1] == m:
            rest = idx[:-1]
            if cls is Multivector and len(rest) % 2:
                val = -val  # d_I ^ d_t = (-1)^|I| d_t ^ d_I
            second[rest] = val
        else:
            first[idx] = val
    A = cls(small, k, first)
    B = cls(small, max(k - 1, 0), second) if k > 0 else cls.zero(small, 0)
    if k == 0 and second:
        raise ProjectionError("degree-0 tensor with a time component")
    return A, B


def poissonization(L: Multivector, E: Multivector) -> Multivector:
    """``P = e^{-t}(L + d_t ^ E)`` on the extended chart."""
    big = extended_chart(L.chart)
    return lift_multivector(big, -1, L, E)
