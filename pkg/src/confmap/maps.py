"""Holomorphic self-maps of the disk and the right half-plane.

A small expression language (variable, complex literals, arithmetic,
integer powers, sqrt/log/exp on principal branches, and composition) with a
parser and canonical printer, forward-mode dual-number differentiation that
works over both machine complex numbers and mpmath scalars, a catalog of
built-in map families, sampled validation, iteration, and the Cayley
conjugation between the two domains.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from ._numerics import exp_of, log_of, sqrt_of
from .geometry import DiskPoint, HalfPlanePoint

__all__ = [
    "MapExpression",
    "Var",
    "Const",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Neg",
    "Pow",
    "Func",
    "Compose",
    "Dual",
    "SelfMap",
    "DomainEscape",
    "ParseError",
    "parse",
    "parse_constant",
    "expression_text",
    "eval_with_derivative",
    "iterate",
    "validate_self_map",
    "ValidationCertificate",
    "ViolationReport",
    "conjugate_to_halfplane",
    "conjugate_to_disk",
    "identity_map",
    "rotation",
    "automorphism",
    "blaschke",
    "power_map",
    "degree_two_blaschke",
    "hp_affine",
    "hp_joukowski",
    "hp_sqrt_drift",
    "hp_log_slow",
    "catalog_map",
    "catalog_disk_sweep",
    "catalog_halfplane_sweep",
]


class DomainEscape(ValueError):
    """Raised when a map value leaves its stated codomain."""


class ParseError(ValueError):
    """Syntax or semantic error in an expression, with source position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


# ---------------------------------------------------------------------------
# Dual numbers
# ---------------------------------------------------------------------------


class Dual:
    """Forward-mode value/derivative pair over any complex-like scalar."""

    __slots__ = ("val", "der")

    def __init__(self, val, der=0.0):
        self.val = val
        self.der = der

    def __repr__(self):
        return f"Dual({self.val!r}, {self.der!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.val * other.val, self.der * other.val + self.val * other.der
            )
        return Dual(self.val * other, self.der * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            return Dual(
                self.val * inv, (self.der - self.val * inv * other.der) * inv
            )
        return Dual(self.val / other, self.der / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        return Dual(other * inv, -other * inv * inv * self.der)

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n == 0:
            return Dual(self.val**0, self.val * 0)
        return Dual(self.val**n, n * self.val ** (n - 1) * self.der)


def _fn_exp(x):
    if isinstance(x, Dual):
        e = _fn_exp(x.val)
        return Dual(e, e * x.der)
    return exp_of(x)


def _fn_log(x):
    if isinstance(x, Dual):
        return Dual(_fn_log(x.val), x.der / x.val)
    return log_of(x)


def _fn_sqrt(x):
    if isinstance(x, Dual):
        s = _fn_sqrt(x.val)
        return Dual(s, x.der / (2 * s))
    return sqrt_of(x)


_FUNCTIONS = {"exp": _fn_exp, "log": _fn_log, "sqrt": _fn_sqrt}


# ---------------------------------------------------------------------------
# Expression AST
# ---------------------------------------------------------------------------


class MapExpression:
    """Base class of expression nodes; subclasses implement ``evaluate``."""

    __slots__ = ()

    def evaluate(self, z):
        raise NotImplementedError


@dataclass(frozen=True)
class Var(MapExpression):
    __slots__ = ()

    def evaluate(self, z):
        return z


@dataclass(frozen=True)
class Const(MapExpression):
    value: complex

    def evaluate(self, z):
        return self.value


@dataclass(frozen=True)
class Add(MapExpression):
    left: MapExpression
    right: MapExpression

    def evaluate(self, z):
        return self.left.evaluate(z) + self.right.evaluate(z)


@dataclass(frozen=True)
class Sub(MapExpression):
    left: MapExpression
    right: MapExpression

    def evaluate(self, z):
        return self.left.evaluate(z) - self.right.evaluate(z)


@dataclass(frozen=True)
class Mul(MapExpression):
    left: MapExpression
    right: MapExpression

    def evaluate(self, z):
        return self.left.evaluate(z) * self.right.evaluate(z)


@dataclass(frozen=True)
class Div(MapExpression):
    left: MapExpression
    right: MapExpression

    def evaluate(self, z):
        return self.left.evaluate(z) / self.right.evaluate(z)


@dataclass(frozen=True)
class Neg(MapExpression):
    operand: MapExpression

    def evaluate(self, z):
        return -self.operand.evaluate(z)


@dataclass(frozen=True)
class Pow(MapExpression):
    base: MapExpression
    power: int

    def evaluate(self, z):
        return self.base.evaluate(z) ** self.power


@dataclass(frozen=True)
class Func(MapExpression):
    name: str
    arg: MapExpression

    def evaluate(self, z):
        return _FUNCTIONS[self.name](self.arg.evaluate(z))


@dataclass(frozen=True)
class Compose(MapExpression):
    """outer(inner(z)); the inner value is computed once and reused."""

    outer: MapExpression
    inner: MapExpression

    def evaluate(self, z):
        return self.outer.evaluate(self.inner.evaluate(z))


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_P_ADD, _P_MUL, _P_UNARY, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _fmt_const(value: complex) -> tuple[str, int]:
    re_part, im_part = value.real, value.imag
    if im_part == 0.0:
        text = _fmt_real(re_part)
        prec = _P_ATOM if re_part >= 0 else _P_UNARY
        return text, prec
    if re_part == 0.0:
        if im_part == 1.0:
            return "i", _P_ATOM
        if im_part == -1.0:
            return "-i", _P_UNARY
        return _fmt_real(im_part) + "i", _P_ATOM if im_part >= 0 else _P_UNARY
    sign = "+" if im_part >= 0 else "-"
    imag = abs(im_part)
    imag_text = "i" if imag == 1.0 else _fmt_real(imag) + "i"
    return f"({_fmt_real(re_part)}{sign}{imag_text})", _P_ATOM


def _render(node: MapExpression, var_text: str) -> tuple[str, int]:
    if isinstance(node, Var):
        return var_text, _P_ATOM
    if isinstance(node, Const):
        return _fmt_const(node.value)
    if isinstance(node, (Add, Sub)):
        op = "+" if isinstance(node, Add) else "-"
        lt, lp = _render(node.left, var_text)
        rt, rp = _render(node.right, var_text)
        if lp < _P_ADD:
            lt = f"({lt})"
        if rp <= _P_ADD:
            rt = f"({rt})"
        elif rt.startswith("-"):
            if op == "+":
                op, rt = "-", rt[1:]
            else:
                rt = f"({rt})"
        return f"{lt}{op}{rt}", _P_ADD
    if isinstance(node, (Mul, Div)):
        op = "*" if isinstance(node, Mul) else "/"
        lt, lp = _render(node.left, var_text)
        rt, rp = _render(node.right, var_text)
        if lp < _P_MUL:
            lt = f"({lt})"
        if rp <= _P_MUL:
            rt = f"({rt})"
        return f"{lt}{op}{rt}", _P_MUL
    if isinstance(node, Neg):
        t, p = _render(node.operand, var_text)
        if p < _P_UNARY:
            t = f"({t})"
        return f"-{t}", _P_UNARY
    if isinstance(node, Pow):
        bt, bp = _render(node.base, var_text)
        if bp < _P_ATOM:
            bt = f"({bt})"
        exp_text = str(node.power) if node.power >= 0 else f"({node.power})"
        return f"{bt}^{exp_text}", _P_POW
    if isinstance(node, Func):
        at, _ = _render(node.arg, var_text)
        return f"{node.name}({at})", _P_ATOM
    if isinstance(node, Compose):
        inner_text, _ = _render(node.inner, var_text)
        return _render(node.outer, f"({inner_text})")
    raise TypeError(f"unknown expression node: {node!r}")


def expression_text(expr: MapExpression, variable: str = "z") -> str:
    """Canonical text for an expression.

    Composition prints by substituting the inner expression into every
    variable occurrence of the outer one, so deeply iterated multi-occurrence
    maps can print large even though they evaluate cheaply.
    """
    return _render(expr, variable)[0]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?i?|\.\d+(?:[eE][+-]?\d+)?i?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def _tokenize(source: str) -> list[tuple[str, object, int]]:
    tokens: list[tuple[str, object, int]] = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            m = _NUMBER_RE.match(source, i)
            text = m.group(0)
            if text.endswith("i"):
                tokens.append(("num", complex(0.0, float(text[:-1])), i))
            else:
                tokens.append(("num", complex(float(text), 0.0), i))
            i = m.end()
            continue
        if c.isalpha() or c == "_":
            m = _IDENT_RE.match(source, i)
            tokens.append(("ident", m.group(0), i))
            i = m.end()
            continue
        if source.startswith("**", i):
            tokens.append(("op", "^", i))
            i += 2
            continue
        if c in "+-*/^(),":
            tokens.append(("op", c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, source: str, variable: str):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.variable = variable

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, value, position = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", position)
        self.advance()

    def parse(self) -> MapExpression:
        expr = self.expr()
        kind, value, position = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {value!r}", position)
        return expr

    def expr(self) -> MapExpression:
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if value == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> MapExpression:
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.unary()
                node = Mul(node, rhs) if value == "*" else Div(node, rhs)
            else:
                return node

    def unary(self) -> MapExpression:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        if kind == "op" and value == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> MapExpression:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return Pow(base, self.integer_exponent())
        return base

    def integer_exponent(self) -> int:
        kind, value, position = self.peek()
        sign = 1
        parens = False
        if kind == "op" and value == "(":
            self.advance()
            parens = True
            kind, value, position = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            sign = -1
            kind, value, position = self.peek()
        if kind != "num" or value.imag != 0.0 or value.real != int(value.real):
            raise ParseError("exponent must be an integer literal", position)
        self.advance()
        if parens:
            self.expect_op(")")
        return sign * int(value.real)

    def atom(self) -> MapExpression:
        kind, value, position = self.advance()
        if kind == "num":
            return Const(value)
        if kind == "ident":
            if value == self.variable:
                return Var()
            if value == "i":
                return Const(1j)
            if value in _FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    k, v, _ = self.peek()
                    if k == "op" and v == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != 1:
                    raise ParseError(
                        f"{value} takes exactly one argument, got {len(args)}",
                        position,
                    )
                return Func(value, args[0])
            raise ParseError(f"unknown identifier {value!r}", position)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {value!r}", position)


def _variable_for(domain: str) -> str:
    if domain == "disk":
        return "z"
    if domain == "half-plane":
        return "w"
    raise ValueError(f"unknown domain tag: {domain!r}")


def parse(source: str, domain: str = "disk") -> "SelfMap":
    """Parse expression text into a :class:`SelfMap`.

    The free variable is ``z`` on the disk and ``w`` on the half-plane;
    any other identifier is rejected with its source position.
    """
    variable = _variable_for(domain)
    expr = _Parser(source, variable).parse()
    return SelfMap(domain=domain, expr=expr)


def parse_constant(text: str) -> complex:
    """Parse a literal complex constant such as ``0.5`` or ``1-2i``."""
    expr = _Parser(text, "\x00never").parse()
    return complex(expr.evaluate(0.0))


# ---------------------------------------------------------------------------
# SelfMap
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelfMap:
    """A holomorphic self-map of the disk or the right half-plane.

    ``certificate`` records how self-mapping is known: ``"analytic"`` for
    built-in families that are self-maps by construction, ``"sampled"`` for
    parsed expressions pending :func:`validate_self_map`.
    """

    domain: str
    expr: MapExpression
    family: str | None = None
    params: tuple = ()
    certificate: str = "sampled"
    label: str = ""

    def __post_init__(self):
        _variable_for(self.domain)
        if not self.label:
            object.__setattr__(self, "label", self.source_text())

    @property
    def variable(self) -> str:
        return _variable_for(self.domain)

    def source_text(self) -> str:
        return expression_text(self.expr, self.variable)

    def __call__(self, z):
        """Raw evaluation with no domain checks (usable near the boundary)."""
        return self.expr.evaluate(z)

    def eval_dual(self, z) -> tuple:
        """(value, derivative) at ``z``, no domain checks."""
        result = self.expr.evaluate(Dual(z, 1.0))
        if isinstance(result, Dual):
            return result.val, result.der
        return result, z * 0


def _interior(value, domain: str) -> bool:
    if domain == "disk":
        return abs(value) < 1.0
    return value.real > 0


def _unwrap_point(point, domain: str):
    if isinstance(point, DiskPoint):
        if domain != "disk":
            raise TypeError("disk point supplied to a half-plane map")
        return point.value
    if isinstance(point, HalfPlanePoint):
        if domain != "half-plane":
            raise TypeError("half-plane point supplied to a disk map")
        return point.value
    return point


def eval_with_derivative(m: SelfMap, point) -> tuple:
    """Evaluate ``m`` and its derivative at an interior point.

    Raises:
        ValueError: if the input is not interior to the domain.
        DomainEscape: if the value leaves the codomain.
    """
    z = _unwrap_point(point, m.domain)
    if not _interior(z, m.domain):
        raise ValueError(f"point is not interior to the {m.domain}: {z!r}")
    val, der = m.eval_dual(z)
    if not _interior(val, m.domain):
        raise DomainEscape(
            f"map leaves the {m.domain} at {z!r}: value {val!r}"
        )
    return val, der


def iterate(m: SelfMap, n: int) -> SelfMap:
    """n-fold composition of ``m`` with itself; ``n = 0`` is the identity."""
    if n < 0:
        raise ValueError("iteration count must be nonnegative")
    if n == 0:
        return identity_map(m.domain)
    expr = m.expr
    for _ in range(n - 1):
        expr = Compose(m.expr, expr)
    return SelfMap(
        domain=m.domain,
        expr=expr,
        certificate=m.certificate,
        label=f"iterate({m.label},{n})",
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationCertificate:
    kind: str
    samples: int
    max_modulus: float | None = None
    min_real: float | None = None
    note: str = ""


@dataclass(frozen=True)
class ViolationReport:
    witness: complex
    value: complex
    samples: int


def validate_self_map(m: SelfMap, samples: int = 2048):
    """Check the self-map property on a deterministic boundary-dense grid.

    Disk maps are sampled on concentric rings up to radius 1 - 1e-4,
    half-plane maps on log-spaced boxes up to |Re| = 1e3.  Built-in catalog
    families short-circuit to an analytic certificate (still reporting the
    scanned extremes).  Returns a :class:`ValidationCertificate` or the
    first :class:`ViolationReport` encountered.
    """
    analytic = m.certificate == "analytic"
    if m.domain == "disk":
        n_rings = 16
        per_ring = max(8, samples // n_rings)
        max_mod = 0.0
        count = 0
        for j in range(n_rings):
            r = 0.1 + (1.0 - 1e-4 - 0.1) * j / (n_rings - 1)
            for k in range(per_ring):
                z = r * cmath.exp(2j * math.pi * k / per_ring)
                v = m(z)
                count += 1
                mod = abs(v)
                if mod >= 1.0 and not analytic:
                    return ViolationReport(z, v, count)
                max_mod = max(max_mod, mod)
        kind = "analytic" if analytic else "sampled"
        return ValidationCertificate(kind, count, max_modulus=max_mod)

    xs = [10.0 ** (-2 + 5 * j / 23) for j in range(24)]
    min_re = math.inf
    count = 0
    for x in xs:
        for t in (-8.0, -2.0, -0.5, 0.0, 0.5, 2.0, 8.0):
            zeta = complex(x, t * x)
            v = m(zeta)
            count += 1
            if v.real <= 0.0 and not analytic:
                return ViolationReport(zeta, v, count)
            min_re = min(min_re, v.real)
    kind = "analytic" if analytic else "sampled"
    return ValidationCertificate(kind, count, min_real=min_re)


# ---------------------------------------------------------------------------
# Domain transfer
# ---------------------------------------------------------------------------


def _check_unimodular(value: complex, name: str) -> complex:
    value = complex(value)
    if abs(abs(value) - 1.0) > 1e-12:
        raise ValueError(f"{name} must be unimodular: {value!r}")
    return value


_CAYLEY = Div(Sub(Var(), Const(1.0)), Add(Var(), Const(1.0)))
_CAYLEY_INV = Div(Add(Const(1.0), Var()), Sub(Const(1.0), Var()))


def conjugate_to_halfplane(m: SelfMap, sigma, omega=None) -> SelfMap:
    """Conjugate a disk map to the half-plane, sending ``sigma`` to infinity.

    The boundary point ``sigma`` is pre-rotated to 1 and its boundary image
    ``omega`` (default: ``sigma``, the fixed-point case) post-rotated to 1,
    then both sides are moved through the Cayley transform.  Hyperbolic
    distortion is preserved pointwise under the transfer.
    """
    if m.domain != "disk":
        raise ValueError("expected a disk map")
    sigma = _check_unimodular(sigma, "sigma")
    omega = sigma if omega is None else _check_unimodular(omega, "omega")
    rotated_arg = Mul(Const(sigma), _CAYLEY)
    value = Mul(Const(omega.conjugate()), Compose(m.expr, rotated_arg))
    expr = Compose(_CAYLEY_INV, value)
    return SelfMap(
        domain="half-plane",
        expr=expr,
        certificate=m.certificate,
        label=f"to-halfplane({m.label};sigma={_fmt_const(sigma)[0]})",
    )


def conjugate_to_disk(m: SelfMap, sigma, omega=None) -> SelfMap:
    """Conjugate a half-plane map to the disk, sending infinity to ``sigma``.

    Exact inverse of :func:`conjugate_to_halfplane` with the same
    ``sigma``/``omega``.
    """
    if m.domain != "half-plane":
        raise ValueError("expected a half-plane map")
    sigma = _check_unimodular(sigma, "sigma")
    omega = sigma if omega is None else _check_unimodular(omega, "omega")
    inner = Mul(Const(sigma.conjugate()), Var())
    value = Compose(m.expr, Compose(_CAYLEY_INV, inner))
    expr = Mul(Const(omega), Compose(_CAYLEY, value))
    return SelfMap(
        domain="disk",
        expr=expr,
        certificate=m.certificate,
        label=f"to-disk({m.label};sigma={_fmt_const(sigma)[0]})",
    )


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


def identity_map(domain: str = "disk") -> SelfMap:
    prefix = "hp:" if domain == "half-plane" else ""
    return SelfMap(
        domain=domain,
        expr=Var(),
        family=f"{prefix}identity",
        certificate="analytic",
        label=f"{prefix}identity",
    )


def rotation(theta: float) -> SelfMap:
    """Disk rotation z -> exp(i*theta) * z."""
    factor = cmath.exp(1j * float(theta))
    return SelfMap(
        domain="disk",
        expr=Mul(Const(factor), Var()),
        family="rotation",
        params=(("theta", float(theta)),),
        certificate="analytic",
        label=f"rotation:theta={_fmt_real(float(theta))}",
    )


def automorphism(b: float) -> SelfMap:
    """Disk automorphism (z + b) / (1 + conj(b) z), |b| < 1; fixes +-1 for real b."""
    b = complex(b)
    if not abs(b) < 1.0:
        raise ValueError("automorphism parameter must satisfy |b| < 1")
    expr = Div(
        Add(Var(), Const(b)), Add(Const(1.0), Mul(Const(b.conjugate()), Var()))
    )
    b_text = _fmt_const(b)[0]
    return SelfMap(
        domain="disk",
        expr=expr,
        family="psi",
        params=(("b", b),),
        certificate="analytic",
        label=f"psi:b={b_text}",
    )


def blaschke(zeros: Sequence[complex]) -> SelfMap:
    """Finite Blaschke product with the given interior zero list."""
    zeros = tuple(complex(a) for a in zeros)
    if not zeros:
        raise ValueError("need at least one zero")
    for a in zeros:
        if not abs(a) < 1.0:
            raise ValueError(f"Blaschke zero must be interior: {a!r}")
    expr = None
    for a in zeros:
        if a == 0:
            factor: MapExpression = Var()
        else:
            factor = Div(
                Sub(Var(), Const(a)),
                Sub(Const(1.0), Mul(Const(a.conjugate()), Var())),
            )
        expr = factor if expr is None else Mul(expr, factor)
    zero_text = ";".join(_fmt_const(a)[0] for a in zeros)
    return SelfMap(
        domain="disk",
        expr=expr,
        family="blaschke",
        params=(("zeros", zeros),),
        certificate="analytic",
        label=f"blaschke:zeros={zero_text}",
    )


def power_map(n: int) -> SelfMap:
    """The disk map z -> z**n for integer n >= 1."""
    if n < 1:
        raise ValueError("power must be a positive integer")
    return SelfMap(
        domain="disk",
        expr=Pow(Var(), n),
        family="power",
        params=(("n", n),),
        certificate="analytic",
        label=f"power:n={n}",
    )


def degree_two_blaschke(a: float) -> SelfMap:
    """The degree-two Blaschke product z (z - a) / (1 - a z) for real a in [0, 1).

    Fixes 1 with derivative 2 / (1 - a) there.
    """
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise ValueError("parameter must lie in [0, 1)")
    expr = Mul(
        Var(),
        Div(Sub(Var(), Const(a)), Sub(Const(1.0), Mul(Const(a), Var()))),
    )
    return SelfMap(
        domain="disk",
        expr=expr,
        family="blaschke2",
        params=(("a", a),),
        certificate="analytic",
        label=f"blaschke2:a={_fmt_real(a)}",
    )


def hp_affine(lam: float, c: complex = 0.0) -> SelfMap:
    """Half-plane map w -> lam*w + c with lam > 0 and Re(c) >= 0."""
    lam = float(lam)
    c = complex(c)
    if lam <= 0:
        raise ValueError("scale must be positive")
    if c.real < 0:
        raise ValueError("offset must have nonnegative real part")
    expr: MapExpression = Mul(Const(lam), Var())
    if c != 0:
        expr = Add(expr, Const(c))
    return SelfMap(
        domain="half-plane",
        expr=expr,
        family="hp:affine",
        params=(("lam", lam), ("c", c)),
        certificate="analytic",
        label=f"hp:affine:lam={_fmt_real(lam)}:c={_fmt_const(c)[0]}",
    )


def hp_joukowski() -> SelfMap:
    """The half-plane map w -> (w**2 + 1) / (2 w), fixing 1 and infinity."""
    expr = Div(Add(Pow(Var(), 2), Const(1.0)), Mul(Const(2.0), Var()))
    return SelfMap(
        domain="half-plane",
        expr=expr,
        family="hp:joukowski",
        certificate="analytic",
        label="hp:joukowski",
    )


def hp_sqrt_drift(c: float = 1.0) -> SelfMap:
    """The half-plane map w -> w + c*sqrt(w) with c > 0."""
    c = float(c)
    if c <= 0:
        raise ValueError("drift coefficient must be positive")
    expr = Add(Var(), Mul(Const(c), Func("sqrt", Var())))
    return SelfMap(
        domain="half-plane",
        expr=expr,
        family="hp:sqrt-drift",
        params=(("c", c),),
        certificate="analytic",
        label=f"hp:sqrt-drift:c={_fmt_real(c)}",
    )


def hp_log_slow() -> SelfMap:
    """The half-plane map w -> w / (1 + log(1 + w)).

    Marches to infinity so slowly that the distortion residual along the
    positive axis decays only like 1/log; its disk conjugate has an
    infinite angular derivative at 1.
    """
    expr = Div(Var(), Add(Const(1.0), Func("log", Add(Const(1.0), Var()))))
    return SelfMap(
        domain="half-plane",
        expr=expr,
        family="hp:log-slow",
        certificate="analytic",
        label="hp:log-slow",
    )


def _parse_params(segments: Iterable[str]) -> dict[str, str]:
    params: dict[str, str] = {}
    for seg in segments:
        key, _, raw = seg.partition("=")
        if not raw:
            raise ValueError(f"malformed catalog parameter {seg!r}")
        params[key.strip()] = raw.strip()
    return params


def catalog_map(spec: str) -> SelfMap:
    """Build a catalog map from an id like ``"blaschke2:a=0.5"``.

    The id is the family name followed by colon-separated ``key=value``
    parameters; values are parsed as complex literals.
    """
    segments = spec.split(":")
    split_at = len(segments)
    for idx, seg in enumerate(segments):
        if "=" in seg:
            split_at = idx
            break
    family = ":".join(segments[:split_at])
    params = _parse_params(segments[split_at:])

    if family in ("identity", "id"):
        return identity_map("disk")
    if family == "hp:identity":
        return identity_map("half-plane")
    if family == "rotation":
        return rotation(parse_constant(params["theta"]).real)
    if family == "psi":
        return automorphism(parse_constant(params["b"]))
    if family == "blaschke":
        zeros = [parse_constant(t) for t in params["zeros"].split(";") if t]
        return blaschke(zeros)
    if family == "power":
        return power_map(int(parse_constant(params["n"]).real))
    if family == "blaschke2":
        return degree_two_blaschke(parse_constant(params["a"]).real)
    if family == "hp:affine":
        lam = parse_constant(params["lam"]).real
        c = parse_constant(params["c"]) if "c" in params else 0.0
        return hp_affine(lam, c)
    if family == "hp:joukowski":
        return hp_joukowski()
    if family == "hp:sqrt-drift":
        c = parse_constant(params["c"]).real if "c" in params else 1.0
        return hp_sqrt_drift(c)
    if family == "hp:log-slow":
        return hp_log_slow()
    raise ValueError(f"unknown catalog map: {spec!r}")


def catalog_disk_sweep() -> list[SelfMap]:
    """Ten representative disk maps used by the property sweeps."""
    return [
        identity_map("disk"),
        rotation(math.pi / 3),
        automorphism(0.5),
        automorphism(-0.3),
        blaschke([0.3, -0.4j]),
        blaschke([0.5, 0.2 + 0.1j, -0.3]),
        power_map(2),
        power_map(3),
        degree_two_blaschke(0.25),
        degree_two_blaschke(0.5),
    ]


def catalog_halfplane_sweep() -> list[SelfMap]:
    return [
        identity_map("half-plane"),
        hp_affine(2.0, 1.0),
        hp_joukowski(),
        hp_sqrt_drift(1.0),
        hp_log_slow(),
    ]
