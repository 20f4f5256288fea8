"""Seeded random generators for property checks."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from .symalg import Chart, ExpPoly
from .tensor import DiffForm, Multivector


class Sampler:
    """Random exact objects drawn from a :class:`random.Random` stream.

    ``max_degree`` bounds polynomial degree, ``max_terms`` the number of
    monomials per coefficient, ``density`` the chance a component is nonzero.
    ``freqs`` optionally lists exponential frequency tuples that may multiply
    a coefficient.
    """

    def __init__(self, chart: Chart, seed: int = 0, max_degree: int = 2, max_terms: int = 2,
                 density: float = 0.5, freqs: list | None = None):
        self.chart = chart
        self.rng = random.Random(seed)
        self.max_degree = max_degree
        self.max_terms = max_terms
        self.density = density
        self.freqs = [tuple(Fraction(f) for f in fr) for fr in (freqs or [])]

    def rational(self) -> Fraction:
        num = self.rng.choice([-3, -2, -1, 1, 1, 2, 3])
        den = self.rng.choice([1, 1, 1, 2])
        return Fraction(num, den)

    def monomial_exps(self, degree: int | None = None) -> tuple:
        m = self.chart.dim
        d = self.rng.randint(0, self.max_degree) if degree is None else degree
        exps = [0] * m
        for _ in range(d):
            exps[self.rng.randrange(m)] += 1
        return tuple(exps)

    def exppoly(self, nonzero: bool = False) -> ExpPoly:
        while True:
            terms = {}
            for _ in range(self.rng.randint(1, self.max_terms)):
                fr = self.chart._zero_freq
                if self.freqs and self.rng.random() < 0.3:
                    fr = self.rng.choice(self.freqs)
                key = (fr, self.monomial_exps())
                terms[key] = terms.get(key, 0) + self.rational()
            p = ExpPoly(self.chart, terms)
            if not nonzero or not p.is_zero():
                return p

    def _skew(self, cls, degree: int):
        m = self.chart.dim
        if degree > m or degree < 0:
            return cls.zero(self.chart, max(degree, 0))
        terms = {}
        for idx in combinations(range(m), degree):
            if self.rng.random() < self.density:
                terms[idx] = self.exppoly()
        return cls(self.chart, degree, terms)

    def form(self, degree: int) -> DiffForm:
        return self._skew(DiffForm, degree)

    def multivector(self, degree: int) -> Multivector:
        return self._skew(Multivector, degree)

    def closed_form(self, degree: int) -> DiffForm:
        """``d`` of a random form (zero in degree 0)."""
        from .tensor import ext_d

        if degree == 0:
            return DiffForm.scalar(ExpPoly.constant(self.chart, self.rational()))
        return ext_d(self.form(degree - 1))

    def weighted_form(self, weight: int):
        from .jacobi import WeightedForm

        if weight == 0:
            return WeightedForm(0, self.form(0))
        return WeightedForm(weight, self.form(weight), self.form(weight - 1))

    def weighted_multivector(self, weight: int):
        from .jacobi import WeightedMultivector

        if weight == 0:
            return WeightedMultivector(0, self.multivector(0))
        return WeightedMultivector(weight, self.multivector(weight), self.multivector(weight - 1))

    def jet_section(self):
        from .jacobi import JetSection

        return JetSection(self.form(1), self.exppoly())
