"""Named randomized property suites shared by the CLI and the tests.

A suite takes a :class:`Target`, a trial count and a seed and returns one
:class:`~jacobibv.report.Check`.  Inputs come from a seeded
:class:`~jacobibv.sampling.Sampler`, so a given ``(target, trials, seed)``
always produces the same report.  The first nonzero residual stops the suite
and is recorded together with the trial index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import bialgebroid as bi
from . import jacobi as jc
from . import modular as md
from .report import Check
from .sampling import Sampler
from .symalg import Chart
from .tensor import DiffForm, Multivector, apply_vector, ext_d, vector_bracket


@dataclass
class Target:
    """A structure to test: a Jacobi structure or an Omega-Poisson structure."""

    label: str
    J: jc.JacobiStructure | None = None
    S: bi.OmegaPoissonStructure | None = None
    Phi: DiffForm | None = None
    freqs: list = field(default_factory=list)

    @property
    def chart(self) -> Chart:
        return (self.J or self.S).chart

    @property
    def kind(self) -> str:
        return "jacobi" if self.J is not None else "omega"

    def sampler(self, seed: int, max_degree: int = 2) -> Sampler:
        return Sampler(self.chart, seed=seed, max_degree=max_degree, freqs=self.freqs or None)


class SuiteError(ValueError):
    """The suite does not apply to the given target."""


Residuals = dict


def _is_zero(r) -> bool:
    return r.is_zero()


def _run(name: str, target: Target, trials: int, seed: int, body: Callable[[Sampler], Residuals]) -> Check:
    sm = target.sampler(seed)
    for trial in range(trials):
        for label, r in body(sm).items():
            if not _is_zero(r):
                return Check(name, False, {label: r}, {"target": target.label, "trials": trials}, seed, trial)
    return Check(name, True, details={"target": target.label, "trials": trials}, seed=seed)


def _need(target: Target, kind: str, volume: bool = False):
    if target.kind != kind:
        raise SuiteError(f"this suite needs a {'Jacobi' if kind == 'jacobi' else 'Omega-Poisson'} structure")
    if volume and target.Phi is None:
        raise SuiteError("this suite needs a volume form")


def _need_enriched(S):
    if not S.Omega.is_zero():
        raise SuiteError("the Studi bracket needs Omega = 0")


# -- Jacobi structures --------------------------------------------------------------
def bv_square(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J, m = target.J, target.chart.dim

    def body(sm):
        out = {}
        for k in range(2, m + 2):
            lam = sm.weighted_form(k)
            out[f"delta^2 (weight {k})"] = jc.bv_delta(J, jc.bv_delta(J, lam))
        return out

    return _run("bv-square", target, trials, seed, body)


def bv_oracle(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J, m = target.J, target.chart.dim

    def body(sm):
        out = {}
        for k in range(1, m + 2):
            lam = sm.weighted_form(k)
            out[f"delta - oracle (weight {k})"] = jc.bv_delta(J, lam) - jc.bv_delta_oracle(J, lam)
        return out

    return _run("bv-oracle", target, trials, seed, body)


def gerstenhaber_jet(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J = target.J

    def body(sm):
        s1, s2 = sm.jet_section(), sm.jet_section()
        return {"bv bracket - jet bracket": jc.jet_bracket_bv(J, s1, s2) - jc.jet_bracket(J, s1, s2)}

    return _run("gerstenhaber-jet", target, trials, seed, body)


def algebroid_axioms(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J = target.J

    def body(sm):
        s1, s2, s3 = sm.jet_section(), sm.jet_section(), sm.jet_section()
        f, g = sm.exppoly(), sm.exppoly()
        br = jc.jet_bracket(J, s1, s2)
        anchor = jc.jet_anchor(J, br) - vector_bracket(jc.jet_anchor(J, s1), jc.jet_anchor(J, s2))
        leibniz = jc.jet_bracket(J, s1, s2 * f) - br * f - s2 * apply_vector(jc.jet_anchor(J, s1), f)
        jac = (
            jc.jet_bracket(J, s1, jc.jet_bracket(J, s2, s3))
            + jc.jet_bracket(J, s2, jc.jet_bracket(J, s3, s1))
            + jc.jet_bracket(J, s3, br)
        )
        hom = jc.jet_bracket(J, jc.JetSection.jet(f), jc.JetSection.jet(g)) - jc.JetSection.jet(jc.fn_bracket(J, f, g))
        return {"anchor": anchor, "leibniz": leibniz, "jacobi": jac, "jet homomorphism": hom}

    return _run("algebroid-axioms", target, trials, seed, body)


def anticommutator(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J, m = target.J, target.chart.dim

    def body(sm):
        out = {}
        for k in range(0, m + 2):
            lam = sm.weighted_form(k)
            out[f"anticommutator - closed form (weight {k})"] = (
                jc.anticommutator(J, lam) - jc.anticommutator_closed_form(J, lam)
            )
        return out

    return _run("anticommutator", target, trials, seed, body)


def sigma_square(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J, m = target.J, target.chart.dim

    def body(sm):
        out = {}
        for k in range(0, m + 1):
            C = sm.weighted_multivector(k)
            out[f"sigma^2 (weight {k})"] = jc.sigma(J, jc.sigma(J, C))
        return out

    return _run("sigma-square", target, trials, seed, body)


def sigma_oracle(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J, m = target.J, target.chart.dim

    def body(sm):
        out = {}
        for k in range(0, m + 2):
            C = sm.weighted_multivector(k)
            out[f"sigma - oracle (weight {k})"] = jc.sigma(J, C) - jc.sigma_oracle(J, C)
        return out

    return _run("sigma-oracle", target, trials, seed, body)


def rho_sharp_chain(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J, m = target.J, target.chart.dim

    def body(sm):
        out = {}
        for k in range(0, m):
            for tag, lam in (("random", sm.form(k)), ("closed", sm.closed_form(k))):
                out[f"sigma rho - rho d ({tag}, degree {k})"] = (
                    jc.sigma(J, jc.rho_sharp(J, lam)) - jc.rho_sharp(J, ext_d(lam))
                )
        return out

    return _run("rho-sharp-chain", target, trials, seed, body)


def modular_identity(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi", volume=True)
    J, Phi = target.J, target.Phi
    data = md.modular_data(J, Phi)
    oracle = md.modular_field_P_oracle(J, Phi) - data.V_class

    def body(sm):
        f = sm.exppoly()
        return {
            "L_{sharp df} Phi - (Vf) Phi": md.modular_identity_residual(J, Phi, f, data),
            "W^P oracle - V_class": oracle,
        }

    return _run("modular-identity", target, trials, seed, body)


def elw(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi", volume=True)
    J, Phi = target.J, target.Phi

    def body(sm):
        f = sm.exppoly()
        e = md.elw_expression(J, Phi, f)
        return {
            "ELW expression - closed form": e - md.elw_closed_form(J, Phi, f),
            "ELW expression - factor route": e - md.elw_expression_oracle(J, Phi, f),
        }

    return _run("elw", target, trials, seed, body)


def star_chain(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi", volume=True)
    J, Phi, m = target.J, target.Phi, target.chart.dim
    data = md.modular_data(J, Phi)

    def body(sm):
        out = {}
        for k in range(0, m + 1):
            C = sm.weighted_multivector(k)
            sC = md.star(C, Phi)
            out[f"star - oracle (weight {k})"] = sC - md.star_oracle(C, Phi)
            out[f"star sigma - eps D0 star (weight {k})"] = (
                md.star(jc.sigma(J, C), Phi) - md.d0(J, Phi, sC, data) * md.star_sign(k)
            )
            out[f"star twisted - eps delta star (weight {k})"] = (
                md.star(md.twisted_coboundary(J, Phi, C), Phi) - jc.bv_delta(J, sC) * md.star_sign(k)
            )
        return out

    return _run("star-chain", target, trials, seed, body)


def s_bracket(target: Target, trials: int, seed: int) -> Check:
    _need(target, "jacobi")
    J = target.J

    def body(sm):
        f, g = sm.exppoly(), sm.exppoly()
        return {"{f,g}_s - L(df,dg)": bi.s_bracket_defect(J, f, g)}

    return _run("s-bracket", target, trials, seed, body)


def remark_bar_d(target: Target, trials: int, seed: int) -> Check:
    m = target.chart.dim

    def body(sm):
        out = {}
        for k in range(0, m + 1):
            out[f"bar_d - algebroid d (weight {k})"] = bi.remark_bar_d_residual(sm.weighted_form(k))
        return out

    return _run("remark-bar-d", target, trials, seed, body)


# -- Omega-Poisson structures ---------------------------------------------------------
def _omega_form(sm: Sampler, k: int) -> bi.OmegaForm:
    return bi.OmegaForm(k, sm.form(k), sm.form(k - 1) if k else DiffForm.zero(sm.chart, 0))


def _omega_multivector(sm: Sampler, k: int) -> bi.OmegaMultivector:
    return bi.OmegaMultivector(k, sm.multivector(k), sm.multivector(k - 1) if k else Multivector.zero(sm.chart, 0))


def d_omega(target: Target, trials: int, seed: int) -> Check:
    _need(target, "omega")
    Om, m = target.S.Omega, target.chart.dim

    def body(sm):
        out = {}
        for k in range(0, m + 1):
            lam = _omega_form(sm, k)
            out[f"d_Omega - CE oracle (degree {k})"] = bi.d_omega(Om, lam) - bi.d_omega_oracle(Om, lam)
            out[f"d_Omega^2 (degree {k})"] = bi.d_omega(Om, bi.d_omega(Om, lam))
        return out

    return _run("d-omega", target, trials, seed, body)


def delta_omega(target: Target, trials: int, seed: int) -> Check:
    _need(target, "omega")
    S, m = target.S, target.chart.dim

    def body(sm):
        out = {}
        for k in range(1, m + 2):
            lam = _omega_form(sm, k)
            d = bi.delta_omega(S, lam)
            out[f"delta_Omega - [i(Pi), d_Omega] (degree {k})"] = d - bi.delta_omega_oracle(S, lam)
            out[f"delta_Omega^2 (degree {k})"] = bi.delta_omega(S, d) if k >= 2 else d * 0
        return out

    return _run("delta-omega", target, trials, seed, body)


def partial_omega(target: Target, trials: int, seed: int) -> Check:
    _need(target, "omega")
    S, m = target.S, target.chart.dim

    def body(sm):
        out = {}
        for k in range(0, m + 1):
            C = _omega_multivector(sm, k)
            p = bi.partial_omega(S, C)
            out[f"partial - [Pi, C]_Omega (degree {k})"] = p - bi.partial_omega_oracle(S, C)
            out[f"partial^2 (degree {k})"] = bi.partial_omega(S, p)
        return out

    return _run("partial-omega", target, trials, seed, body)


def omega_bracket(target: Target, trials: int, seed: int) -> Check:
    _need(target, "omega")
    S = target.S

    def body(sm):
        a, b = sm.jet_section(), sm.jet_section()
        br = bi.jet_bracket_omega(S, a, b)
        return {
            "bracket - BV bracket of delta_Omega": br - bi.jet_bracket_omega_bv(S, a, b),
            "bracket - Lie derivative route": br - bi.jet_bracket_omega_oracle(S, a, b),
            "sharp_Pi - oracle": bi.pi_sharp(S, a) - bi.pi_sharp_oracle(S, a),
        }

    return _run("omega-bracket", target, trials, seed, body)


def wedge_omega(target: Target, trials: int, seed: int) -> Check:
    _need(target, "omega")
    Om = target.S.Omega
    top = min(3, target.chart.dim)

    def body(sm):
        out = {}
        for k in range(1, top + 1):
            for h in range(1, top + 1):
                U, V = sm.multivector(k), sm.multivector(h)
                out[f"contraction - symmetrization ({k},{h})"] = (
                    bi.wedge_omega(Om, U, V) - bi.wedge_omega_symmetrized(Om, U, V)
                )
        return out

    return _run("wedge-omega", target, trials, seed, body)


def ext_jacobi(target: Target, trials: int, seed: int) -> Check:
    _need(target, "omega")
    Om = target.S.Omega

    def body(sm):
        s1, s2, s3 = (bi.ExtSection(sm.multivector(1), sm.exppoly()) for _ in range(3))
        return {"jacobiator": bi.ext_jacobiator(s1, s2, s3, Om)}

    return _run("ext-jacobi", target, trials, seed, body)


def modular_pi(target: Target, trials: int, seed: int) -> Check:
    _need(target, "omega", volume=True)
    S, Phi = target.S, target.Phi

    def body(sm):
        f = sm.exppoly()
        return {
            "W^Pi - direct route": bi.modular_pi_residual(S, Phi, f),
            "Gerstenhaber route - factor route": bi.top_lie_jet(S, Phi, f) - bi.top_lie_jet_oracle(S, Phi, f),
            "D operator - A": bi.elw_operator_residual(S, Phi, f),
        }

    return _run("modular-pi", target, trials, seed, body)


def studi(target: Target, trials: int, seed: int) -> Check:
    """Skewness and ``{s, G} = E G``; the Jacobi identity is a separate suite."""
    _need(target, "omega")
    S = target.S
    _need_enriched(S)

    def body(sm):
        F = bi.StudiFunction(sm.exppoly(), sm.exppoly())
        G = bi.StudiFunction(sm.exppoly(), sm.exppoly())
        skew = bi.studi_bracket(S, F, G) + bi.studi_bracket(S, G, F)
        xs = bi.studi_hamiltonian_s(S, G) - bi.StudiFunction(apply_vector(S.E, G.f0), apply_vector(S.E, G.f1))
        return {"{F,G} + {G,F}": skew, "{s,G} - EG": xs}

    return _run("studi", target, trials, seed, body)


def studi_jacobi(target: Target, trials: int, seed: int) -> Check:
    _need(target, "omega")
    S = target.S
    _need_enriched(S)

    def body(sm):
        F, G, H = (bi.StudiFunction(sm.exppoly(), sm.exppoly()) for _ in range(3))
        return {"jacobiator": bi.studi_jacobiator(S, F, G, H)}

    return _run("studi-jacobi", target, trials, seed, body)


SUITES: dict[str, Callable[[Target, int, int], Check]] = {
    "bv-square": bv_square,
    "bv-oracle": bv_oracle,
    "gerstenhaber-jet": gerstenhaber_jet,
    "algebroid-axioms": algebroid_axioms,
    "anticommutator": anticommutator,
    "sigma-square": sigma_square,
    "sigma-oracle": sigma_oracle,
    "rho-sharp-chain": rho_sharp_chain,
    "modular-identity": modular_identity,
    "elw": elw,
    "star-chain": star_chain,
    "s-bracket": s_bracket,
    "remark-bar-d": remark_bar_d,
    "d-omega": d_omega,
    "delta-omega": delta_omega,
    "partial-omega": partial_omega,
    "omega-bracket": omega_bracket,
    "wedge-omega": wedge_omega,
    "ext-jacobi": ext_jacobi,
    "modular-pi": modular_pi,
    "studi": studi,
    "studi-jacobi": studi_jacobi,
}

JACOBI_SUITES = (
    "bv-square", "bv-oracle", "gerstenhaber-jet", "algebroid-axioms", "anticommutator",
    "sigma-square", "sigma-oracle", "rho-sharp-chain", "modular-identity", "elw", "star-chain",
    "s-bracket", "remark-bar-d",
)
OMEGA_SUITES = (
    "d-omega", "delta-omega", "partial-omega", "omega-bracket", "wedge-omega", "ext-jacobi",
    "modular-pi", "studi",
)


def run_suite(name: str, target: Target, trials: int, seed: int) -> Check:
    try:
        fn = SUITES[name]
    except KeyError:
        raise SuiteError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}") from None
    return fn(target, trials, seed)
