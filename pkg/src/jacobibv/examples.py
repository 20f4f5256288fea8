"""Constructors for the standard structures used by tests and the CLI."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .jacobi import JacobiStructure, check_jacobi
from .symalg import Chart, ExpPoly
from .tensor import (
    DiffForm,
    Multivector,
    d_function,
    ext_d,
    interior,
    lie_derivative,
    sharp,
    wedge,
    wedge_all,
)


class StructureError(ValueError):
    """A constructor was given parameters outside its range."""


@dataclass(frozen=True)
class ContactExample:
    chart: Chart
    J: JacobiStructure
    theta: DiffForm
    Phi: DiffForm
    n: int


@dataclass(frozen=True)
class GcsExample:
    chart: Chart
    J: JacobiStructure
    Omega: DiffForm
    Phi: DiffForm
    sigma: ExpPoly
    n: int


def _require_valid(J: JacobiStructure, what: str):
    rep = check_jacobi(J)
    if not rep.passed:
        raise StructureError(f"{what} failed the Jacobi identities: {rep.residual_pretty()}")


def contact_chart(n: int) -> Chart:
    if n < 1:
        raise StructureError("n must be at least 1")
    if n == 1:
        return Chart(("q", "p", "z"))
    return Chart(tuple(f"q{i}" for i in range(1, n + 1)) + tuple(f"p{i}" for i in range(1, n + 1)) + ("z",))


def contact_canonical(n: int) -> ContactExample:
    """Canonical contact structure on ``R^{2n+1}`` with ``theta = dz - sum p_i dq^i``."""
    chart = contact_chart(n)
    zi = 2 * n
    L = Multivector.zero(chart, 2)
    theta = DiffForm.basis(chart, zi)
    for i in range(n):
        qi, pi = i, n + i
        p = chart.coord(pi)
        L = L + Multivector.basis(chart, qi, pi) + Multivector.basis(chart, zi, pi) * p
        theta = theta - DiffForm.basis(chart, qi) * p
    E = Multivector.basis(chart, zi)
    J = JacobiStructure(L, E)
    _require_valid(J, "contact structure")
    dtheta = ext_d(theta)
    if not (interior(E, theta) == DiffForm.scalar(chart.const(1)) and interior(E, dtheta).is_zero()):
        raise StructureError("Reeb identities fail")
    Phi = wedge(theta, wedge_all([dtheta] * n, chart, DiffForm))
    if Phi.is_zero():
        raise StructureError("theta ^ (d theta)^n vanishes")
    return ContactExample(chart, J, theta, Phi, n)


def contact_hamiltonian(ex: ContactExample, f: ExpPoly) -> Multivector:
    """``X_f = sharp_L df + f E``, characterized by ``i(X)theta = f``, ``i(X)d theta = -df + (Ef) theta``."""
    return sharp(ex.J.L, d_function(f)) + ex.J.E * f


def gcs_chart(n: int) -> Chart:
    if n < 1:
        raise StructureError("n must be at least 1")
    return Chart(tuple(f"x{i}" for i in range(1, 2 * n + 1)))


def gcs_structure(n: int, sigma: ExpPoly | list | None = None) -> GcsExample:
    """Globally conformal symplectic structure ``Omega = e^sigma Omega_0``.

    ``sigma`` is a linear form (an ExpPoly of degree one without constant or
    exponential terms, or a list of rational slopes).  ``sharp_L`` inverts
    ``flat_Omega`` and ``E = -sharp_L d sigma``.  With either sign of ``L``,
    ``E = +sharp_L d sigma`` violates ``[L,L] = 2E^L`` in the bracket
    convention used here, so the sign of ``E`` is forced.
    """
    chart = gcs_chart(n)
    if sigma is None:
        sigma = [1] + [0] * (2 * n - 1)
    if isinstance(sigma, ExpPoly):
        slopes = _linear_slopes(sigma)
    else:
        slopes = [Fraction(s) for s in sigma]
        if len(slopes) != chart.dim:
            raise StructureError("need one slope per coordinate")
    sig = ExpPoly.zero(chart)
    for i, s in enumerate(slopes):
        sig = sig + chart.coord(i) * s
    e_plus = chart.exp(slopes)
    e_minus = chart.exp([-s for s in slopes])
    Omega0 = DiffForm.zero(chart, 2)
    L0 = Multivector.zero(chart, 2)
    for i in range(n):
        Omega0 = Omega0 + DiffForm.basis(chart, 2 * i, 2 * i + 1)
        L0 = L0 + Multivector.basis(chart, 2 * i, 2 * i + 1)
    Omega = Omega0 * e_plus
    L = -L0 * e_minus
    E = -sharp(L, d_function(sig))
    J = JacobiStructure(L, E)
    _require_valid(J, "conformal symplectic structure")
    for i in range(chart.dim):
        X = sharp(L, DiffForm.basis(chart, i))
        if interior(X, Omega) != DiffForm.basis(chart, i):
            raise StructureError("sharp_L is not the inverse of flat_Omega")
    if not lie_derivative(E, Omega).is_zero():
        raise StructureError("L_E Omega != 0")
    Phi = wedge_all([Omega] * n, chart, DiffForm)
    return GcsExample(chart, J, Omega, Phi, sig, n)


def _linear_slopes(sigma: ExpPoly) -> list[Fraction]:
    chart = sigma.chart
    slopes = [Fraction(0)] * chart.dim
    for (freqs, exps), c in sigma.items():
        if any(freqs) or sum(exps) != 1:
            raise StructureError("sigma must be a linear form without constant term")
        slopes[exps.index(1)] = c
    return slopes


def constant_poisson(matrix, names: list[str] | None = None) -> JacobiStructure:
    """``L = sum_{i<j} a_ij d_i ^ d_j`` for a skew rational matrix ``a``."""
    m = len(matrix)
    if m == 0 or any(len(row) != m for row in matrix):
        raise StructureError("need a nonempty square matrix")
    a = [[Fraction(x) for x in row] for row in matrix]
    for i in range(m):
        for j in range(m):
            if a[i][j] != -a[j][i]:
                raise StructureError("matrix is not skew-symmetric")
    chart = Chart(tuple(names) if names else tuple(f"x{i}" for i in range(1, m + 1)))
    L = Multivector(chart, 2, {(i, j): a[i][j] for i in range(m) for j in range(i + 1, m)})
    J = JacobiStructure(L, Multivector.zero(chart, 1))
    _require_valid(J, "constant Poisson structure")
    return J


def standard_volume(chart: Chart) -> DiffForm:
    return DiffForm.basis(chart, *range(chart.dim))
