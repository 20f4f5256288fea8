"""Exact exponential-polynomial coefficients on a coordinate chart.

An :class:`ExpPoly` is a finite sum ``c * x^a * exp(<r, x>)`` with rational
``c``, natural exponent tuple ``a`` and rational frequency tuple ``r``.  The
ring is closed under sums, products and partial derivatives, and zero testing
is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

Rational = Fraction


class ChartMismatchError(ValueError):
    """Raised when two values built on different charts are combined."""


@dataclass(frozen=True)
class Chart:
    """An ordered list of coordinate names."""

    coord_names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.coord_names)
        object.__setattr__(self, "coord_names", names)
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        for n in names:
            if not n.isidentifier():
                raise ValueError(f"invalid coordinate name {n!r}")

    @classmethod
    def from_names(cls, *names: str) -> "Chart":
        return cls(tuple(names))

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    def index(self, name: str) -> int:
        try:
            return self.coord_names.index(name)
        except ValueError:
            raise KeyError(f"unknown coordinate {name!r}") from None

    def extended(self, name: str = "t") -> "Chart":
        """The chart of ``M x R`` with ``name`` appended as last coordinate."""
        return Chart(self.coord_names + (name,))

    # convenience constructors
    def coord(self, i: int | str) -> "ExpPoly":
        if isinstance(i, str):
            i = self.index(i)
        exps = tuple(1 if j == i else 0 for j in range(self.dim))
        return ExpPoly(self, {(self._zero_freq, exps): Fraction(1)})

    def const(self, c) -> "ExpPoly":
        return ExpPoly.constant(self, c)

    def exp(self, freqs: Iterable) -> "ExpPoly":
        freqs = tuple(Fraction(f) for f in freqs)
        if len(freqs) != self.dim:
            raise ValueError("frequency tuple has wrong length")
        return ExpPoly(self, {(freqs, self._zero_exp): Fraction(1)})

    @property
    def _zero_freq(self) -> tuple:
        return (Fraction(0),) * self.dim

    @property
    def _zero_exp(self) -> tuple:
        return (0,) * self.dim


Key = tuple  # (frequency tuple, exponent tuple)


class ExpPoly:
    """Immutable exponential polynomial with rational coefficients.

    Terms are stored as ``{(freqs, exps): coeff}`` with no zero coefficient.
    Iteration and printing follow lexicographic order on ``(freqs, exps)``.
    """

    __slots__ = ("chart", "_terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[Key, object] | None = None):
        self.chart = chart
        clean: dict[Key, Fraction] = {}
        if terms:
            m = chart.dim
            for (freqs, exps), c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                if len(freqs) != m or len(exps) != m:
                    raise ValueError("term key has wrong length for chart")
                if any(e < 0 for e in exps):
                    raise ValueError("negative exponent")
                key = (tuple(Fraction(f) for f in freqs), tuple(int(e) for e in exps))
                clean[key] = clean.get(key, Fraction(0)) + c
                if clean[key] == 0:
                    del clean[key]
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, chart: Chart, c) -> "ExpPoly":
        return cls(chart, {(chart._zero_freq, chart._zero_exp): c})

    @classmethod
    def zero(cls, chart: Chart) -> "ExpPoly":
        return cls(chart)

    # -- inspection ---------------------------------------------------
    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_constant(self) -> bool:
        return all(not any(f) and not any(e) for f, e in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self._terms.values()), Fraction(0))

    def poly_degree(self) -> int:
        """Total polynomial degree (``-1`` for zero)."""
        return max((sum(e) for _, e in self._terms), default=-1)

    def has_exponentials(self) -> bool:
        return any(any(f) for f, _ in self._terms)

    def is_unit(self) -> bool:
        """True for a single term ``c * exp(<r, x>)``, which is exactly invertible."""
        if len(self._terms) != 1:
            return False
        (_, exps), = self._terms
        return not any(exps)

    def inverse(self) -> "ExpPoly":
        if not self.is_unit():
            raise ZeroDivisionError(f"{self} is not invertible in the ring")
        ((freqs, exps), c), = self._terms.items()
        return ExpPoly(self.chart, {(tuple(-f for f in freqs), exps): 1 / c})

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "ExpPoly":
        if isinstance(other, ExpPoly):
            if other.chart != self.chart:
                raise ChartMismatchError(f"charts differ: {self.chart} vs {other.chart}")
            return other
        if isinstance(other, (int, Fraction)):
            return ExpPoly.constant(self.chart, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return ExpPoly(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly(self.chart, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return ExpPoly(self.chart)
            return ExpPoly(self.chart, {k: c * other for k, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Key, Fraction] = {}
        for (f1, e1), c1 in self._terms.items():
            for (f2, e2), c2 in other._terms.items():
                key = (
                    tuple(a + b for a, b in zip(f1, f2)),
                    tuple(a + b for a, b in zip(e1, e2)),
                )
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return ExpPoly(self.chart, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only natural powers are supported")
        result = ExpPoly.constant(self.chart, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "ExpPoly":
        return self * Fraction(c)

    def partial(self, i: int) -> "ExpPoly":
        """Derivative with respect to coordinate ``i`` (0-based)."""
        if not 0 <= i < self.chart.dim:
            raise IndexError(f"coordinate index {i} out of range for dim {self.chart.dim}")
        out: dict[Key, Fraction] = {}
        for (freqs, exps), c in self._terms.items():
            # d/dx_i (x^a e^{<r,x>}) = a_i x^{a - e_i} e^{..} + r_i x^a e^{..}
            if exps[i]:
                lowered = exps[:i] + (exps[i] - 1,) + exps[i + 1:]
                k = (freqs, lowered)
                out[k] = out.get(k, Fraction(0)) + c * exps[i]
            if freqs[i]:
                k = (freqs, exps)
                out[k] = out.get(k, Fraction(0)) + c * freqs[i]
        return ExpPoly(self.chart, out)

    def gradient(self) -> list["ExpPoly"]:
        return [self.partial(i) for i in range(self.chart.dim)]

    # -- chart changes (used by the M x R embedding) -------------------
    def embed(self, big: Chart) -> "ExpPoly":
        """Reinterpret on a chart whose leading coordinates are this chart's."""
        extra = big.dim - self.chart.dim
        if big.coord_names[: self.chart.dim] != self.chart.coord_names or extra < 0:
            raise ChartMismatchError("target chart does not extend this chart")
        return ExpPoly(
            big,
            {
                (f + (Fraction(0),) * extra, e + (0,) * extra): c
                for (f, e), c in self._terms.items()
            },
        )

    def split_last(self, small: Chart) -> dict[tuple[Fraction, int], "ExpPoly"]:
        """Group terms by (frequency, exponent) of the trailing coordinate."""
        if self.chart.dim != small.dim + 1:
            raise ChartMismatchError("chart is not a one-coordinate extension")
        groups: dict[tuple[Fraction, int], dict] = {}
        for (f, e), c in self._terms.items():
            groups.setdefault((f[-1], e[-1]), {})[(f[:-1], e[:-1])] = c
        return {k: ExpPoly(small, v) for k, v in groups.items()}

    # -- comparison / hashing ----------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self == ExpPoly.constant(self.chart, other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.chart == other.chart and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, tuple(self._terms.items())))
        return self._hash

    # -- printing -------------------------------------------------------
    def __str__(self):
        return format_exppoly(self)

    def __repr__(self):
        return f"ExpPoly({format_exppoly(self)!r})"


def _fmt_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_monomial(chart: Chart, freqs, exps) -> list[str]:
    factors = []
    for name, e in zip(chart.coord_names, exps):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f"{name}^{e}")
    if any(freqs):
        parts = []
        for name, f in zip(chart.coord_names, freqs):
            if f == 0:
                continue
            if f == 1:
                s = name
            elif f == -1:
                s = f"-{name}"
            else:
                s = f"{_fmt_rational(f)}*{name}"
            if parts and not s.startswith("-"):
                parts.append("+ " + s)
            elif parts:
                parts.append("- " + s[1:])
            else:
                parts.append(s)
        factors.append(f"exp({' '.join(parts)})")
    return factors


def format_exppoly(p: ExpPoly) -> str:
    """Canonical text form, parseable by :mod:`jacobibv.parse`."""
    if p.is_zero():
        return "0"
    pieces = []
    for (freqs, exps), c in p.items():
        factors = _fmt_monomial(p.chart, freqs, exps)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not factors:
            body = _fmt_rational(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_fmt_rational(mag)] + factors)
        pieces.append((sign, body))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out
