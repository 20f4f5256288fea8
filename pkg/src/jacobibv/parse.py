"""Text syntax for coefficients, tensors and structure files.

Expressions::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "^" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" INT)*
    atom   := NUMBER ["/" NUMBER] | NAME | "@" NAME | "exp" "(" expr ")" | "(" expr ")"

A coordinate ``x`` denotes the function, ``dx`` its differential and ``@x``
the coordinate vector field.  ``^`` followed by an integer literal is a
power; otherwise it is the exterior product (``*`` between two tensors is a
wedge as well).  ``/`` divides by a nonzero rational constant.

Structure files::

    # comment
    chart dim=3 coords=q,p,z
    kind jacobi
    bivector L = @q^@p + @z^p*@p
    vector E = @z
    volume Phi = dz^dq^dp
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .symalg import Chart, ExpPoly, format_exppoly
from .tensor import DiffForm, Multivector, _Skew, wedge


class ParseError(ValueError):
    """Syntax or semantic error with a 1-based line/column position."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()@]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int, col0: int = 1) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            bad = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), col0 + m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", col0 + len(text)))
    return toks


class _ExprParser:
    def __init__(self, chart: Chart, text: str, line: int = 1, col0: int = 1, env=None):
        self.chart = chart
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.line = line
        self.env = env or {}

    # token helpers
    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text:
            self.fail(f"expected {text!r}, found {t.text or 'end of input'!r}", t)
        return self.take()

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, self.line, tok.col)

    # grammar
    def parse(self):
        value = self.expr()
        if self.peek().kind != "end":
            self.fail(f"unexpected token {self.peek().text!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take()
            rhs = self.term()
            value = self.combine_add(value, rhs if op.text == "+" else _neg(rhs), op)
        return value

    def term(self):
        value = self.unary()
        while self.peek().text in ("*", "^", "/"):
            op = self.take()
            if op.text == "/":
                rhs = self.unary()
                if not isinstance(rhs, ExpPoly) or not rhs.is_constant() or rhs.is_zero():
                    self.fail("division only by a nonzero rational constant", op)
                value = value * (1 / rhs.constant_value())
                continue
            rhs = self.unary()
            value = self.combine_mul(value, rhs, op)
        return value

    def unary(self):
        if self.peek().text == "-":
            self.take()
            return _neg(self.unary())
        return self.power()

    def power(self):
        value = self.atom()
        while self.peek().text == "^" and self.peek(1).kind == "num":
            op = self.take()
            n = int(self.take().text)
            if not isinstance(value, ExpPoly):
                self.fail("powers apply to functions only", op)
            value = value ** n
        return value

    def atom(self):
        t = self.peek()
        if t.kind == "num":
            self.take()
            num = Fraction(int(t.text))
            if self.peek().text == "/" and self.peek(1).kind == "num":
                self.take()
                den = int(self.take().text)
                if den == 0:
                    self.fail("zero denominator", t)
                num = num / den
            return ExpPoly.constant(self.chart, num)
        if t.text == "(":
            self.take()
            v = self.expr()
            self.expect(")")
            return v
        if t.text == "@":
            self.take()
            n = self.peek()
            if n.kind != "name":
                self.fail("expected a coordinate name after '@'", n)
            self.take()
            return Multivector.basis(self.chart, self.coord_index(n))
        if t.kind == "name":
            self.take()
            name = t.text
            if name == "exp":
                return self.exp_call(t)
            if name in self.env:
                return self.env[name]
            if name in self.chart.coord_names:
                return self.chart.coord(name)
            if name.startswith("d") and name[1:] in self.chart.coord_names:
                return DiffForm.basis(self.chart, self.chart.index(name[1:]))
            self.fail(f"unknown coordinate or name {name!r}", t)
        self.fail(f"unexpected token {t.text or 'end of input'!r}", t)

    def coord_index(self, tok: _Tok) -> int:
        if tok.text not in self.chart.coord_names:
            self.fail(f"unknown coordinate {tok.text!r}", tok)
        return self.chart.index(tok.text)

    def exp_call(self, tok: _Tok):
        self.expect("(")
        arg = self.expr()
        self.expect(")")
        if not isinstance(arg, ExpPoly):
            self.fail("exp() takes a function argument", tok)
        freqs = [Fraction(0)] * self.chart.dim
        zero_f = self.chart._zero_freq
        for (f, e), c in arg.items():
            if f != zero_f or sum(e) != 1:
                self.fail("exp() argument must be a rational linear form without constant term", tok)
            freqs[e.index(1)] += c
        return self.chart.exp(freqs)

    # value algebra
    def combine_add(self, a, b, op):
        if isinstance(a, ExpPoly) and isinstance(b, ExpPoly):
            return a + b
        a, b = self.promote(a, b, op)
        if a.degree != b.degree:
            self.fail(f"cannot add degree {a.degree} and degree {b.degree}", op)
        return a + b

    def combine_mul(self, a, b, op):
        if isinstance(a, ExpPoly) and isinstance(b, ExpPoly):
            return a * b
        if isinstance(a, ExpPoly):
            return b * a
        if isinstance(b, ExpPoly):
            return a * b
        if type(a) is not type(b):
            self.fail("cannot combine a form with a multivector", op)
        return wedge(a, b)

    def promote(self, a, b, op):
        if isinstance(a, ExpPoly):
            a = type(b).scalar(a)
        if isinstance(b, ExpPoly):
            b = type(a).scalar(b)
        if type(a) is not type(b):
            self.fail("cannot combine a form with a multivector", op)
        return a, b


def _neg(v):
    return -v


def parse_expr(chart: Chart, text: str, line: int = 1, col0: int = 1, env=None):
    """Parse to an :class:`ExpPoly`, :class:`DiffForm` or :class:`Multivector`."""
    return _ExprParser(chart, text, line, col0, env).parse()


def parse_function(chart: Chart, text: str) -> ExpPoly:
    v = parse_expr(chart, text)
    if isinstance(v, _Skew):
        if v.degree != 0:
            raise ParseError(f"expected a function, got a degree-{v.degree} {v.kind}")
        return v.scalar_value()
    return v


def parse_tensor(chart: Chart, text: str, kind: str, degree: int | None = None):
    """Parse ``text`` as a form/multivector; bare functions become degree 0."""
    cls = DiffForm if kind == "form" else Multivector
    v = parse_expr(chart, text)
    if isinstance(v, ExpPoly):
        if v.is_zero() and degree is not None:
            return cls.zero(chart, degree)
        v = cls.scalar(v)
    if not isinstance(v, cls):
        raise ParseError(f"expected a {kind}, got a {v.kind}")
    if degree is not None and v.degree != degree:
        raise ParseError(f"expected degree {degree}, got degree {v.degree}")
    return v


# -- printing ---------------------------------------------------------------
def _basis_text(T: _Skew, idx) -> str:
    names = T.chart.coord_names
    if isinstance(T, DiffForm):
        return "^".join(f"d{names[i]}" for i in idx)
    return "^".join(f"@{names[i]}" for i in idx)


def format_tensor(T: _Skew) -> str:
    """Canonical text, one term per basis element in index order."""
    if T.is_zero():
        return "0"
    if T.degree == 0:
        return format_exppoly(T.scalar_value())
    parts = []
    for idx, c in T.items():
        basis = _basis_text(T, idx)
        if c == 1:
            parts.append(("+", basis))
        elif c == -1:
            parts.append(("-", basis))
        elif len(c) == 1:
            s = format_exppoly(c)
            if s.startswith("-"):
                parts.append(("-", f"{s[1:]}*{basis}"))
            else:
                parts.append(("+", f"{s}*{basis}"))
        else:
            parts.append(("+", f"({format_exppoly(c)})*{basis}"))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def format_value(v) -> str:
    """Text for a function, tensor, or a pair-like value with ``first``/``second`` slots."""
    if isinstance(v, ExpPoly):
        return format_exppoly(v)
    if isinstance(v, _Skew):
        return format_tensor(v)
    if hasattr(v, "first") and hasattr(v, "second"):
        return f"({format_value(v.first)}, {format_value(v.second)})"
    if hasattr(v, "alpha") and hasattr(v, "f"):
        return f"({format_value(v.alpha)}, {format_value(v.f)})"
    if hasattr(v, "f0") and hasattr(v, "f1"):
        return f"{format_value(v.f0)} + ({format_value(v.f1)}) s"
    if hasattr(v, "X") and hasattr(v, "f"):
        return f"({format_value(v.X)}, {format_value(v.f)})"
    raise TypeError(f"cannot format {type(v).__name__}")


# -- structure files ----------------------------------------------------------
ITEM_KINDS = {
    "function": ("function", 0),
    "vector": ("multivector", 1),
    "bivector": ("multivector", 2),
    "multivector": ("multivector", None),
    "form": ("form", None),
    "form1": ("form", 1),
    "form2": ("form", 2),
    "volume": ("form", "top"),
}
STRUCTURE_KINDS = ("jacobi", "omega-poisson", "enriched")


@dataclass
class StructureFile:
    chart: Chart
    kind: str = "jacobi"
    items: dict = field(default_factory=dict)  # name -> (item kind, value)

    def of_kind(self, item_kind: str) -> list:
        return [(n, v) for n, (k, v) in self.items.items() if k == item_kind]

    def one(self, item_kind: str, required: bool = True):
        found = self.of_kind(item_kind)
        if len(found) > 1:
            raise ParseError(f"more than one {item_kind} declared")
        if not found:
            if required:
                raise ParseError(f"no {item_kind} declared")
            return None
        return found[0][1]


def parse_structure(text: str) -> StructureFile:
    chart = None
    sf = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.lstrip()
        indent = len(line) - len(stripped)
        head, _, rest = stripped.partition(" ")
        if head == "chart":
            if chart is not None:
                raise ParseError("chart declared twice", lineno, indent + 1)
            chart = _parse_chart(rest, lineno, indent + len(head) + 2)
            sf = StructureFile(chart)
            continue
        if sf is None:
            raise ParseError("the file must start with a chart declaration", lineno, indent + 1)
        if head == "kind":
            kind = rest.strip()
            if kind not in STRUCTURE_KINDS:
                raise ParseError(f"unknown structure kind {kind!r}", lineno, indent + 6)
            sf.kind = kind
            continue
        if head not in ITEM_KINDS:
            raise ParseError(f"unknown item kind {head!r}", lineno, indent + 1)
        name, eq, expr = rest.partition("=")
        name = name.strip()
        if not eq or not name.isidentifier():
            raise ParseError("expected 'KIND NAME = expression'", lineno, indent + len(head) + 2)
        if name in sf.items or name in chart.coord_names:
            raise ParseError(f"name {name!r} already used", lineno, indent + len(head) + 2)
        col0 = len(raw) - len(raw.lstrip()) + len(head) + 1 + len(rest) - len(expr) + 1
        env = {n: v for n, (_, v) in sf.items.items()}
        value = parse_expr(chart, expr, lineno, col0, env)
        sf.items[name] = (head, _coerce_item(chart, head, value, lineno, col0))
    if sf is None:
        raise ParseError("empty structure file")
    return sf


def _parse_chart(rest: str, lineno: int, col: int) -> Chart:
    fields = dict(part.split("=", 1) for part in rest.split() if "=" in part)
    if "coords" not in fields:
        raise ParseError("chart needs coords=...", lineno, col)
    names = tuple(n.strip() for n in fields["coords"].split(",") if n.strip())
    try:
        chart = Chart(names)
    except ValueError as exc:
        raise ParseError(str(exc), lineno, col) from None
    if "dim" in fields and int(fields["dim"]) != chart.dim:
        raise ParseError(f"dim={fields['dim']} but {chart.dim} coordinates given", lineno, col)
    return chart


def _coerce_item(chart: Chart, head: str, value, lineno: int, col: int):
    kind, degree = ITEM_KINDS[head]
    if degree == "top":
        degree = chart.dim
    if kind == "function":
        if isinstance(value, _Skew):
            if value.degree != 0:
                raise ParseError(f"{head} expects a function, got degree {value.degree}", lineno, col)
            value = value.scalar_value()
        return value
    cls = DiffForm if kind == "form" else Multivector
    if isinstance(value, ExpPoly):
        if value.is_zero() and degree is not None:
            return cls.zero(chart, degree)
        value = cls.scalar(value)
    if not isinstance(value, cls):
        raise ParseError(f"{head} expects a {kind}, got a {value.kind}", lineno, col)
    if degree is not None and value.degree != degree:
        raise ParseError(f"{head} expects degree {degree}, got degree {value.degree}", lineno, col)
    return value


def format_structure(sf: StructureFile) -> str:
    lines = [f"chart dim={sf.chart.dim} coords={','.join(sf.chart.coord_names)}", f"kind {sf.kind}"]
    for name, (head, value) in sf.items.items():
        lines.append(f"{head} {name} = {format_value(value)}")
    return "\n".join(lines) + "\n"
