"""Command line interface: ``jacobibv COMMAND [--preset P | --file F] [options]``.

Exit status is 0 when every check passes, 1 when a mathematical check fails
(the report names the residual) and 2 on input errors.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from importlib import resources

from . import bialgebroid as bi
from . import examples as ex
from . import jacobi as jc
from . import modular as md
from .homology import UnsupportedTruncation, betti, truncated_complex
from .parse import ParseError, format_value, parse_structure, parse_tensor
from .report import Check, render
from .suites import JACOBI_SUITES, OMEGA_SUITES, SUITES, SuiteError, Target, run_suite
from .tensor import DegreeError, DiffForm, Multivector

COMMANDS = (
    "check-jacobi",
    "check-omega-poisson",
    "bv",
    "sigma",
    "modular",
    "elw",
    "duality",
    "betti",
    "verify",
    "counterexample-nonstrong",
)


class InputError(ValueError):
    """Bad command line input; maps to exit status 2."""


# -- targets --------------------------------------------------------------------------
def _rationals(text: str) -> list[Fraction]:
    try:
        return [Fraction(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"expected comma-separated rationals, got {text!r}") from None


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise InputError(f"{what} must be an integer, got {text!r}") from None


def preset_target(spec: str) -> Target:
    """Resolve ``contact:n``, ``gcs:n[:slopes]``, ``const:rows``, ``omega:name`` or ``time:n``."""
    head, _, rest = spec.partition(":")
    if head == "contact":
        n = _int(rest or "1", "n")
        c = ex.contact_canonical(n)
        return Target(spec, J=c.J, Phi=c.Phi)
    if head == "gcs":
        n_text, _, slope_text = rest.partition(":")
        n = _int(n_text or "1", "n")
        slopes = _rationals(slope_text) if slope_text else [Fraction(1)]
        if len(slopes) == 1:
            slopes = slopes + [Fraction(0)] * (2 * n - 1)
        g = ex.gcs_structure(n, slopes)
        return Target(spec, J=g.J, Phi=g.Phi, freqs=[slopes, [-s for s in slopes]])
    if head == "const":
        rows = [_rationals(r) for r in rest.split(";") if r.strip()]
        J = ex.constant_poisson(rows)
        return Target(spec, J=J, Phi=ex.standard_volume(J.chart))
    if head == "omega":
        makers = {
            "plane": bi.plane_omega_example,
            "plane-neg": lambda: bi.plane_omega_example(-1),
            "enriched": bi.plane_enriched_example,
            "failing": bi.failing_example,
        }
        if rest not in makers:
            raise InputError(f"unknown omega preset {rest!r}; known: {', '.join(makers)}")
        S = makers[rest]()
        return Target(spec, S=S, Phi=ex.standard_volume(S.chart))
    if head == "time":
        n = _int(rest or "1", "n")
        c = ex.contact_canonical(n)
        S = bi.time_function_structure(c.J, c.chart.coord("z"))
        return Target(spec, S=S, Phi=c.Phi)
    raise InputError(f"unknown preset {spec!r}")


def file_target(path: str) -> Target:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    sf = parse_structure(text)
    chart = sf.chart
    L = sf.one("bivector")
    E = sf.one("vector", required=False)
    if E is None:
        E = Multivector.zero(chart, 1)
    Phi = sf.one("volume", required=False)
    if Phi is None:
        Phi = ex.standard_volume(chart)
    if sf.kind == "jacobi":
        return Target(path, J=jc.JacobiStructure(L, E), Phi=Phi)
    Om = sf.one("form2", required=sf.kind == "omega-poisson")
    if Om is None:
        Om = DiffForm.zero(chart, 2)
    if sf.kind == "enriched" and not Om.is_zero():
        raise InputError("an enriched structure has Omega = 0")
    return Target(path, S=bi.OmegaPoissonStructure(L, E, Om), Phi=Phi)


def shipped_structure(name: str) -> str:
    """Text of a structure file shipped with the package, e.g. ``contact1.jac``."""
    return resources.files("jacobibv").joinpath("data", name).read_text(encoding="utf-8")


def resolve(args) -> Target:
    if args.preset and args.file:
        raise InputError("give either --preset or --file, not both")
    if args.file:
        return file_target(args.file)
    return preset_target(args.preset or "contact:1")


# -- commands -------------------------------------------------------------------------
def _need_kind(t: Target, kind: str, command: str):
    if t.kind != kind:
        wanted = "a Jacobi structure" if kind == "jacobi" else "an Omega-Poisson structure"
        raise InputError(f"{command} needs {wanted}; {t.label} is not one")


def cmd_check_jacobi(t: Target, args) -> list[Check]:
    _need_kind(t, "jacobi", "check-jacobi")
    return [jc.check_jacobi(t.J)]


def cmd_check_omega_poisson(t: Target, args) -> list[Check]:
    _need_kind(t, "omega", "check-omega-poisson")
    return [bi.check_omega_poisson(t.S)]


def _pair(t: Target, kind: str, first_text: str | None, second_text: str | None):
    if first_text is None and second_text is None:
        raise InputError("give the input with --first and/or --second")
    chart = t.chart
    first = parse_tensor(chart, first_text, kind) if first_text is not None else None
    second = parse_tensor(chart, second_text, kind) if second_text is not None else None
    if first is not None:
        k = first.degree
    else:
        k = second.degree + 1
    cls = DiffForm if kind == "form" else Multivector
    if first is None:
        first = cls.zero(chart, k)
    if second is None:
        second = cls.zero(chart, max(k - 1, 0))
    if first.degree != k or (k > 0 and second.degree != k - 1):
        raise InputError(f"slot degrees {first.degree} and {second.degree} do not fit together")
    return k, first, second


def cmd_bv(t: Target, args) -> list[Check]:
    k, a, b = _pair(t, "form", args.first, args.second)
    if k == 0:
        raise InputError("the generator lowers the degree; give an input of degree >= 1")
    if t.kind == "jacobi":
        lam = jc.WeightedForm(k, a, b)
        out, ref = jc.bv_delta(t.J, lam), jc.bv_delta_oracle(t.J, lam)
        sq = jc.bv_delta(t.J, out) if k >= 2 else None
    else:
        lam = bi.OmegaForm(k, a, b)
        out, ref = bi.delta_omega(t.S, lam), bi.delta_omega_oracle(t.S, lam)
        sq = bi.delta_omega(t.S, out) if k >= 2 else None
    residuals = {"delta - oracle": out - ref}
    if sq is not None:
        residuals["delta^2"] = sq
    details = {"first": format_value(out.first), "second": format_value(out.second)}
    return [Check("bv", all(r.is_zero() for r in residuals.values()), residuals, details)]


def cmd_sigma(t: Target, args) -> list[Check]:
    k, a, b = _pair(t, "multivector", args.first, args.second)
    if t.kind == "jacobi":
        C = jc.WeightedMultivector(k, a, b)
        out, ref = jc.sigma(t.J, C), jc.sigma_oracle(t.J, C)
        sq = jc.sigma(t.J, out)
    else:
        C = bi.OmegaMultivector(k, a, b)
        out, ref = bi.partial_omega(t.S, C), bi.partial_omega_oracle(t.S, C)
        sq = bi.partial_omega(t.S, out)
    residuals = {"coboundary - oracle": out - ref, "square": sq}
    details = {"first": format_value(out.first), "second": format_value(out.second)}
    return [Check("sigma", all(r.is_zero() for r in residuals.values()), residuals, details)]


def cmd_modular(t: Target, args) -> list[Check]:
    if t.kind == "jacobi":
        data = md.modular_data(t.J, t.Phi)
        v1, v2 = data.V_class_pair
        values = Check(
            "modular-values",
            True,
            details={"V": data.V, "divE": data.divE, "V_class": f"{format_value(v1)} + ({format_value(v2)}) d_t"},
        )
        return [values, run_suite("modular-identity", t, args.trials, args.seed)]
    W = bi.modular_pi(t.S, t.Phi)
    values = Check("modular-values", True, details={"W^Pi": f"{format_value(W.X)} + ({format_value(W.f)}) d_t"})
    factor = t.chart.exp([1] + [0] * (t.chart.dim - 1))
    res = bi.modular_pi_rescaling(t.S, t.Phi, factor, max_degree=max(args.max_degree, 1))
    shift = Check(
        "modular-class-rescaling",
        res.feasible,
        residuals={} if res.feasible else {"partial g = shift": "no solution in the truncation"},
        details={"factor": factor, "g": res.solution.first if res.feasible else "none"},
    )
    return [values, run_suite("modular-pi", t, args.trials, args.seed), shift]


def cmd_elw(t: Target, args) -> list[Check]:
    if t.kind == "jacobi":
        data = md.modular_data(t.J, t.Phi)
        details = {name: f"{format_value(A.first)} + ({format_value(A.second)}) d_t" for name, A in data.A_candidates.items()}
        return [Check("elw-candidates", True, details=details), run_suite("elw", t, args.trials, args.seed)]
    res = bi.modular_elw_omega(t.S, t.Phi)
    r = res.residuals()
    details = {"A": f"{format_value(res.A.X)} + ({format_value(res.A.f)}) d_t", "trace": res.trace}
    checks = [
        Check("elw-omega-derived", r["A - derived"].is_zero(), {"A - derived": r["A - derived"].vector(_big(t))}, details),
        Check("elw-omega-first-display", r["A - first"].is_zero(), {"A - first": r["A - first"].vector(_big(t))}),
        Check("elw-omega-second-display", r["A - second"].is_zero(), {"A - second": r["A - second"].vector(_big(t))}),
    ]
    return checks + [run_suite("modular-pi", t, args.trials, args.seed)]


def _big(t: Target):
    from .cylinder import extended_chart

    return extended_chart(t.chart)


def cmd_duality(t: Target, args) -> list[Check]:
    _need_kind(t, "jacobi", "duality")
    m = t.chart.dim
    checks = []
    for N in range(args.max_degree + 1):
        bd = betti(truncated_complex("d0", t.J, N, t.Phi))
        bs = betti(truncated_complex("sigma", t.J, N, t.Phi))
        mismatch = [k for k in range(m + 2) if bd[k] != bs[m - k + 1]]
        checks.append(Check(
            f"duality-N{N}",
            not mismatch,
            {"degrees": f"homology and cohomology differ at k = {mismatch}"} if mismatch else {},
            {"betti_D0": bd, "betti_sigma": bs},
        ))
    checks.append(run_suite("star-chain", t, args.trials, args.seed))
    return checks


def cmd_betti(t: Target, args) -> list[Check]:
    _need_kind(t, "jacobi", "betti")
    cx = truncated_complex(args.operator, t.J, args.max_degree, t.Phi)
    res = cx.composition_residuals()
    bad = {f"composite at degree {k}": f"{n} nonzero entries" for k, n in res.items() if n}
    return [Check(
        f"betti-{args.operator}",
        not bad,
        bad,
        {"N": args.max_degree, "dims": [cx.space.dim(k) for k in cx.degrees], "betti": betti(cx)},
    )]


def cmd_verify(t: Target, args) -> list[Check]:
    names = args.suites or ["all"]
    if names == ["all"]:
        names = list(JACOBI_SUITES if t.kind == "jacobi" else OMEGA_SUITES)
        if t.kind == "omega" and not t.S.Omega.is_zero():
            names.remove("studi")
        if t.kind == "jacobi" and t.Phi is None:
            names = [n for n in names if n not in ("modular-identity", "elw", "star-chain")]
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise InputError(f"unknown suite(s) {', '.join(unknown)}; known: {', '.join(sorted(SUITES))}")
    return [run_suite(n, t, args.trials, args.seed) for n in names]


def cmd_counterexample_nonstrong(t: Target, args) -> list[Check]:
    _need_kind(t, "jacobi", "counterexample-nonstrong")
    found = jc.find_nonstrong_witness(t.J)
    if found is None:
        return [Check("nonstrong-witness", False, {"search": "no violating pair among simple weight-1 forms"})]
    a, b, defect = found
    return [Check("nonstrong-witness", True, details={"a": a, "b": b, "defect": defect})]


HANDLERS = {
    "check-jacobi": cmd_check_jacobi,
    "check-omega-poisson": cmd_check_omega_poisson,
    "bv": cmd_bv,
    "sigma": cmd_sigma,
    "modular": cmd_modular,
    "elw": cmd_elw,
    "duality": cmd_duality,
    "betti": cmd_betti,
    "verify": cmd_verify,
    "counterexample-nonstrong": cmd_counterexample_nonstrong,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jacobibv", description="Exact checks for Jacobi and Omega-Poisson structures.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("suites", nargs="*", help="suite names for 'verify' (default: all applicable)")
    p.add_argument("--preset", help="contact:n, gcs:n[:slopes], const:a,b;c,d, omega:NAME or time:n")
    p.add_argument("--file", help="structure file")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-degree", type=int, default=2)
    p.add_argument("--operator", default="sigma", choices=("bv_delta", "d0", "bar_d", "sigma", "twisted"))
    p.add_argument("--first", help="first slot of the input (bv: a form, sigma: a multivector)")
    p.add_argument("--second", help="dt / d_t slot of the input")
    p.add_argument("--json", action="store_true", help="one JSON record per check")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.suites and args.command != "verify":
        parser.error("extra positional arguments are only accepted by 'verify'")
    if args.trials < 0 or args.max_degree < 0:
        parser.error("--trials and --max-degree must be nonnegative")
    try:
        target = resolve(args)
        checks = HANDLERS[args.command](target, args)
    except (InputError, ParseError, SuiteError, ex.StructureError, md.VolumeError,
            bi.OmegaError, bi.TimeFunctionError, UnsupportedTruncation, DegreeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(render(checks, as_json=args.json))
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
