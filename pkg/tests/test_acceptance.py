"""The twelve acceptance criteria, each reported as one PASS/FAIL line.

Every comparison is exact.  Clauses whose printed values disagree with the
computation are strict xfails; the attainable parts are separate tests.
"""
import random

import pytest

from conftest import ACCEPTANCE_LINES
from jacobibv import bialgebroid as bi
from jacobibv import examples as ex
from jacobibv import jacobi as jc
from jacobibv import modular as md
from jacobibv.cli import main, preset_target
from jacobibv.homology import betti, coboundary_feasibility, truncated_complex
from jacobibv.sampling import Sampler
from jacobibv.suites import Target, run_suite
from jacobibv.symalg import Chart, ExpPoly
from jacobibv.tensor import DiffForm, Multivector, ext_d, interior, lie_derivative

TRIALS = 100


def report(criterion: int, label: str, ok: bool, expected_failure: bool = False) -> bool:
    status = "PASS" if ok else "FAIL"
    if expected_failure:
        status += " (recorded discrepancy, strict xfail)" if not ok else " (unexpected)"
    line = f"criterion {criterion:>2}: {status:<4} {label}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def suite_ok(name: str, target: Target, trials: int = TRIALS, seed: int = 0) -> bool:
    check = run_suite(name, target, trials, seed)
    if not check.passed:
        print(check.line())
    return check.passed


# -- 1 --------------------------------------------------------------------------------
@pytest.mark.parametrize("n", [1, 2])
def test_criterion_01_contact(n):
    c = ex.contact_canonical(n)
    J, E, theta = c.J, c.J.E, c.theta
    data = md.modular_data(J, c.Phi)
    one = DiffForm.scalar(c.chart.const(1))
    ok = (
        jc.check_jacobi(J).passed
        and interior(E, theta) == one
        and interior(E, ext_d(theta)).is_zero()
        and data.divE.is_zero()
        and data.V == E * n
        and data.V_class.second.is_zero()
    )
    assert report(1, f"contact n={n}: Jacobi, Reeb, div E = 0, V = nE, d_t part 0", ok)


@pytest.mark.parametrize("n", [1, 2])
def test_criterion_01_modular_field_computed(n):
    c = ex.contact_canonical(n)
    data = md.modular_data(c.J, c.Phi)
    ok = data.V_class.first == c.J.E * (-(n + 1))
    assert report(1, f"contact n={n}: computed modular field (V - mE) + div E d_t = -(n+1)E + 0", ok)


@pytest.mark.xfail(strict=True, reason="the modular field (V - mE) + div E d_t is -(n+1)E, not nE")
@pytest.mark.parametrize("n", [1, 2])
def test_criterion_01_modular_field_printed(n):
    c = ex.contact_canonical(n)
    data = md.modular_data(c.J, c.Phi)
    ok = data.V_class.first == c.J.E * n and data.V_class.second.is_zero()
    assert report(1, f"contact n={n}: modular field equals nE + 0", ok, expected_failure=True)


# -- 2 --------------------------------------------------------------------------------
@pytest.mark.parametrize("n", [1, 2])
def test_criterion_02_gcs_invariance(n):
    g = ex.gcs_structure(n)
    data = md.modular_data(g.J, g.Phi)
    ok = (
        jc.check_jacobi(g.J).passed
        and lie_derivative(g.J.E, g.Omega).is_zero()
        and data.divE.is_zero()
    )
    assert report(2, f"gcs n={n}: Jacobi, L_E Omega = 0, div E = 0", ok)


@pytest.mark.parametrize("n", [1, 2])
def test_criterion_02_gcs_computed_values(n):
    g = ex.gcs_structure(n)
    data = md.modular_data(g.J, g.Phi)
    E = g.J.E
    ok = data.V == E * (n - 1) and data.V_class.first == E * (-(n + 1)) and data.V_class.second.is_zero()
    assert report(2, f"gcs n={n}: computed V = (n-1)E, modular field = -(n+1)E + 0", ok)


def test_criterion_02_gcs_V_printed_n1():
    g = ex.gcs_structure(1)
    data = md.modular_data(g.J, g.Phi)
    assert report(2, "gcs n=1: V = -n(n-1)E", data.V == g.J.E * 0)


@pytest.mark.xfail(strict=True, reason="computed V is (n-1)E; -n(n-1)E agrees only for n = 1")
def test_criterion_02_gcs_V_printed_n2():
    g = ex.gcs_structure(2)
    data = md.modular_data(g.J, g.Phi)
    assert report(2, "gcs n=2: V = -n(n-1)E", data.V == g.J.E * (-2), expected_failure=True)


@pytest.mark.xfail(strict=True, reason="computed modular field is -(n+1)E")
@pytest.mark.parametrize("n", [1, 2])
def test_criterion_02_gcs_modular_field_printed(n):
    g = ex.gcs_structure(n)
    data = md.modular_data(g.J, g.Phi)
    ok = data.V_class.first == g.J.E * (-n * (2 * n - 1)) and data.V_class.second.is_zero()
    assert report(2, f"gcs n={n}: modular field = -n(2n-1)E + 0", ok, expected_failure=True)


# -- 3 --------------------------------------------------------------------------------
@pytest.mark.parametrize("preset", ["contact:1", "gcs:1"])
def test_criterion_03_bv_generator(preset):
    t = preset_target(preset)
    ok = suite_ok("bv-square", t) and suite_ok("bv-oracle", t)
    assert report(3, f"{preset}: delta_P^2 = 0 and delta_P = i(P)d - d i(P) route, {TRIALS} trials per weight", ok)


# -- 4 --------------------------------------------------------------------------------
@pytest.mark.parametrize("preset", ["contact:1", "gcs:1"])
def test_criterion_04_degree_one(preset):
    t = preset_target(preset)
    ok = suite_ok("gerstenhaber-jet", t) and suite_ok("algebroid-axioms", t)
    assert report(4, f"{preset}: BV-generated bracket = jet bracket; anchor, Leibniz, Jacobi, jet homomorphism", ok)


# -- 5 --------------------------------------------------------------------------------
@pytest.mark.parametrize("preset", ["contact:1", "gcs:1"])
def test_criterion_05_anticommutator_closed_form(preset):
    t = preset_target(preset)
    ok = suite_ok("anticommutator", t)
    assert report(5, f"{preset}: delta_P bar_d + bar_d delta_P = derived closed form, {TRIALS} trials", ok)


def test_criterion_05_printed_weight_zero(contact1):
    sm = Sampler(contact1.chart, seed=5)
    J = contact1.J
    ok = all(
        jc.anticommutator(J, lam) == jc.anticommutator_printed(J, lam)
        for lam in (sm.weighted_form(0) for _ in range(TRIALS))
    )
    assert report(5, "contact:1: printed closed form agrees on weight 0", ok)


@pytest.mark.xfail(strict=True, reason="the printed closed form differs from the composition in positive weight")
def test_criterion_05_printed_closed_form(contact1):
    sm = Sampler(contact1.chart, seed=5)
    J = contact1.J
    ok = True
    for _ in range(TRIALS):
        for k in range(1, contact1.chart.dim + 2):
            lam = sm.weighted_form(k)
            ok = ok and jc.anticommutator(J, lam) == jc.anticommutator_printed(J, lam)
    assert report(5, "contact:1: composition = printed closed form, all weights", ok, expected_failure=True)


# -- 6 --------------------------------------------------------------------------------
def test_criterion_06_nonstrong_witness(contact1, capsys):
    found = jc.find_nonstrong_witness(contact1.J)
    code = main(["counterexample-nonstrong", "--preset", "contact:1"])
    out = capsys.readouterr().out
    ok = found is not None and code == 0 and "witness" in out.lower()
    if ok:
        a, b, defect = found
        ok = not defect.is_zero() and defect == jc.strongness_defect(contact1.J, a, b)
    assert report(6, "contact:1: concrete violation of the strong Leibniz rule found and printed (exit 0)", ok)


# -- 7 --------------------------------------------------------------------------------
@pytest.mark.parametrize("preset", ["contact:1", "gcs:1"])
def test_criterion_07_sigma(preset):
    t = preset_target(preset)
    ok = suite_ok("sigma-square", t) and suite_ok("sigma-oracle", t) and suite_ok("rho-sharp-chain", t)
    assert report(7, f"{preset}: sigma^2 = 0, sigma = oracle, sigma rho = rho d (closed and random)", ok)


# -- 8 --------------------------------------------------------------------------------
def test_criterion_08_duality(plane_poisson):
    J = plane_poisson
    Phi = ex.standard_volume(J.chart)
    m = J.dim
    ok = True
    for N in range(5):
        hom = betti(truncated_complex("d0", J, N, Phi))
        coh = betti(truncated_complex("sigma", J, N, Phi))
        ok = ok and all(hom[k] == coh[m - k + 1] for k in range(m + 2))
    assert report(8, "L = d1^d2, E = 0: betti_k(D0) = betti^{m-k+1}(sigma) for N = 0..4", ok)


def test_criterion_08_star_chain_map(plane_poisson):
    t = Target("const", J=plane_poisson, Phi=ex.standard_volume(plane_poisson.chart))
    sm = t.sampler(8)
    iso = all(
        md.star_inverse(md.star(C, t.Phi), t.Phi) == C
        for C in (sm.weighted_multivector(k) for k in range(plane_poisson.dim + 2) for _ in range(20))
    )
    ok = suite_ok("star-chain", t) and iso
    assert report(8, "L = d1^d2, E = 0: star is an invertible chain map up to the pinned sign", ok)


# -- 9 --------------------------------------------------------------------------------
def test_criterion_09_contact_not_unimodular(contact1):
    J = contact1.J
    data = md.modular_data(J, contact1.Phi)
    printed = jc.WeightedMultivector(1, J.E, Multivector.zero(contact1.chart, 0))
    a = coboundary_feasibility(J, data.V_class, 4)
    b = coboundary_feasibility(J, printed, 4)
    ok = not a.feasible and not b.feasible and a.max_degree == 4
    assert report(9, "contact:1: sigma f = modular field and sigma f = E + 0 infeasible for deg f <= 4", ok)


def test_criterion_09_solver_finds_coboundaries(contact1):
    J, chart = contact1.J, contact1.chart
    q, p, z = (chart.coord(i) for i in range(3))
    f = q * z - p * p * 2 + 3
    target = jc.sigma(J, jc.WeightedMultivector(0, Multivector.scalar(f)))
    res = coboundary_feasibility(J, target, 4)
    assert res.feasible
    assert jc.sigma(J, res.solution) == target


# -- 10 -------------------------------------------------------------------------------
def test_criterion_10_prop_4_2():
    passing = bi.check_omega_poisson(bi.plane_omega_example())
    wrong_sign = bi.check_omega_poisson(bi.plane_omega_example(-1))
    failing = bi.check_omega_poisson(bi.failing_example())
    ok = (
        passing.passed
        and not wrong_sign.passed
        and not failing.passed
        and not failing.residuals["[Q,Q]"].is_zero()
        and all(r.details["equivalence_consistent"] for r in (passing, wrong_sign, failing))
    )
    assert report(10, "plane examples: pair conditions <=> [Pi,Pi]_Omega = 0, failing witness detected", ok)


@pytest.mark.parametrize("preset", ["omega:plane", "omega:enriched"])
def test_criterion_10_delta_omega(preset):
    t = preset_target(preset)
    ok = suite_ok("delta-omega", t) and suite_ok("omega-bracket", t)
    assert report(10, f"{preset}: delta_Omega = [i(Pi), d_Omega], delta_Omega^2 = 0, BV bracket = jet bracket", ok)


# -- 11 -------------------------------------------------------------------------------
def _trace_oracle(S):
    """``sum_{i,j} Q^{ij} Omega_{ji}`` from coefficient matrices."""
    m = S.chart.dim
    total = ExpPoly.zero(S.chart)
    for i in range(m):
        for j in range(m):
            if i != j:
                total = total + S.Q.coeff(i, j) * S.Omega.coeff(j, i)
    return total


def _e_zero_structure():
    chart = Chart(("x1", "x2", "x3"))
    Q = Multivector.basis(chart, 0, 1)
    return bi.OmegaPoissonStructure(Q, Multivector.zero(chart, 1), DiffForm.basis(chart, 0, 2))


@pytest.mark.parametrize("preset", ["omega:plane", "omega:enriched"])
def test_criterion_11_modular_field(preset):
    t = preset_target(preset)
    S, Phi = t.S, t.Phi
    elw = bi.modular_elw_omega(S, Phi)
    data_div = md.divergence(S.E, md.as_volume(Phi))
    ok = (
        suite_ok("modular-pi", t)
        and elw.residuals()["A - derived"].is_zero()
        and elw.trace == _trace_oracle(S)
        and elw.A.f - data_div * 2 == elw.trace
    )
    assert report(11, f"{preset}: W^Pi = direct route, ELW section = derived form, trace term exact", ok)


def test_criterion_11_displays_when_E_vanishes():
    S = _e_zero_structure()
    assert S.is_valid
    elw = bi.modular_elw_omega(S, ex.standard_volume(S.chart))
    ok = all(r.is_zero() for r in elw.residuals().values())
    assert report(11, "E = 0, Omega != 0: both displayed closed forms equal the ELW section", ok)


@pytest.mark.xfail(strict=True, reason="with E != 0 both displays differ from the ELW section by -E + div E d_t")
@pytest.mark.parametrize("preset", ["omega:plane", "omega:enriched"])
def test_criterion_11_displays_printed(preset):
    t = preset_target(preset)
    elw = bi.modular_elw_omega(t.S, t.Phi)
    r = elw.residuals()
    ok = r["A - first"].is_zero() and r["A - second"].is_zero()
    assert report(11, f"{preset}: both displayed closed forms equal the ELW section", ok, expected_failure=True)


@pytest.mark.parametrize("preset", ["contact:1", "gcs:1"])
def test_criterion_11_s_bracket(preset):
    ok = suite_ok("s-bracket", preset_target(preset))
    assert report(11, f"{preset}: {{f,g}}_s = L(df,dg), {TRIALS} pairs", ok)


# -- 12 -------------------------------------------------------------------------------
@pytest.mark.parametrize("preset", ["omega:enriched", "time:1"])
def test_criterion_12_studi_skew_and_s(preset):
    ok = suite_ok("studi", preset_target(preset))
    assert report(12, f"{preset}: Studi bracket skew, {{s, G}} = EG", ok)


def test_criterion_12_jacobi_e_zero():
    chart = Chart(("x1", "x2", "x3"))
    Q = Multivector.basis(chart, 0, 1) + Multivector.basis(chart, 1, 2) * chart.coord(0)
    S = bi.OmegaPoissonStructure.enriched(Q, Multivector.zero(chart, 1))
    assert S.is_valid
    ok = suite_ok("studi-jacobi", Target("E=0", S=S))
    assert report(12, "E = 0: Studi Jacobi identity on random triples", ok)


@pytest.mark.parametrize("preset", ["omega:enriched", "time:1"])
def test_criterion_12_jacobi_one_dual_part(preset):
    S = preset_target(preset).S
    sm = Sampler(S.chart, seed=12)
    zero = ExpPoly.zero(S.chart)
    rng = random.Random(12)
    ok = True
    for _ in range(TRIALS):
        fs = [bi.StudiFunction(sm.exppoly(), zero) for _ in range(3)]
        i = rng.randrange(3)
        fs[i] = bi.StudiFunction(fs[i].f0, sm.exppoly())
        ok = ok and bi.studi_jacobiator(S, *fs).is_zero()
    assert report(12, f"{preset}: Studi Jacobi identity on triples with at most one s-part", ok)


@pytest.mark.xfail(strict=True, reason="with E != 0 the bracket fails Jacobi on (x1, x1 s, x2 s)")
@pytest.mark.parametrize("preset", ["omega:enriched", "time:1"])
def test_criterion_12_jacobi_random(preset):
    ok = suite_ok("studi-jacobi", preset_target(preset))
    assert report(12, f"{preset}: Studi Jacobi identity on random triples", ok, expected_failure=True)
