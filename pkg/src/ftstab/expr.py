"""Expression language over the signed-power algebra.

Expressions are finite trees built from constants, variables ``x1..xn``,
sums, products, and three power primitives:

    abs(u)^r        -> AbsPow(u, r)   meaning |u|^r
    sign(u)         -> Sign(u)
    spow(u, r)      -> SPow(u, r)     meaning sign(u)*|u|^r

``spow`` is the real odd-root semantics of u^(p/q) for odd p, q; together
the three primitives keep drift/diffusion coefficients, Lyapunov functions
and their derivatives closed under symbolic differentiation away from the
coordinate axes (sign' = 0 on u != 0).

Numbers parsed from text carry exact ``Fraction`` tags so that canonical
simplification can combine coefficients and exponents exactly and prove
identities like "this generator is identically zero" with no tolerance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import numpy as np

Number = Union[int, float, Fraction]


class ExprError(Exception):
    """Base class for expression-language failures."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class SingularEvaluationError(ExprError):
    """Negative exponent evaluated at a zero base."""

    def __init__(self, subterm: str):
        super().__init__(f"singular evaluation: negative exponent at zero base in {subterm}")
        self.subterm = subterm


# ---------------------------------------------------------------------------
# nodes


@dataclass(frozen=True)
class Expr:
    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: Number  # Fraction when exact, float otherwise


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple[Expr, ...]


@dataclass(frozen=True)
class Product(Expr):
    factors: tuple[Expr, ...]


@dataclass(frozen=True)
class AbsPow(Expr):
    base: Expr
    exponent: Number


@dataclass(frozen=True)
class Sign(Expr):
    base: Expr


@dataclass(frozen=True)
class SPow(Expr):
    base: Expr
    exponent: Number


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def _num_sign(v: Number) -> int:
    return (v > 0) - (v < 0)


def _pow_number(base: Number, exp: Number) -> Number:
    """base**exp, exact when the result is derivable in rationals."""
    if isinstance(base, (int, Fraction)) and base in (0, 1):
        return Fraction(base)  # 0^r (r>0) and 1^r regardless of the exponent
    if isinstance(exp, Fraction) and exp.denominator == 1:
        exp = int(exp)
    if isinstance(base, (int, Fraction)) and isinstance(exp, int):
        return Fraction(base) ** exp
    return float(base) ** float(exp)


def _check_exponent(r: Number) -> Number:
    if isinstance(r, float) and not np.isfinite(r):
        raise ExprError(f"non-finite exponent {r!r}")
    return r


# ---------------------------------------------------------------------------
# smart constructors; every structural rewrite used by normalize() lives here


def ssum(terms) -> Expr:
    """Flatten nested sums and fold constant terms (exact for Fractions)."""
    flat: list[Expr] = []
    const: Number = Fraction(0)
    for t in terms:
        if isinstance(t, Sum):
            for s in t.terms:
                if isinstance(s, Const):
                    const = const + s.value
                else:
                    flat.append(s)
        elif isinstance(t, Const):
            const = const + t.value
        else:
            flat.append(t)
    if const != 0 or not flat:
        flat.append(Const(const))
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def sproduct(factors) -> Expr:
    """Flatten nested products; fold constants into one leading coefficient."""
    flat: list[Expr] = []
    coeff: Number = Fraction(1)
    for f in factors:
        if isinstance(f, Product):
            for g in f.factors:
                if isinstance(g, Const):
                    coeff = coeff * g.value
                else:
                    flat.append(g)
        elif isinstance(f, Const):
            coeff = coeff * f.value
        else:
            flat.append(f)
    if coeff == 0:
        return Const(coeff)
    if coeff != 1 or not flat:
        flat.insert(0, Const(coeff))
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def sabspow(base: Expr, exponent: Number) -> Expr:
    """|base|^exponent with exponent-0 elimination and |.|-nesting collapse."""
    _check_exponent(exponent)
    if exponent == 0:
        return ONE
    if isinstance(base, Const):
        if not (base.value == 0 and exponent < 0):
            return Const(_pow_number(abs(base.value), exponent))
    if isinstance(base, (AbsPow, SPow)):
        # | |u|^s |^r = | sign(u)|u|^s |^r = |u|^(s*r)
        return sabspow(base.base, base.exponent * exponent)
    return AbsPow(base, exponent)


def ssign(base: Expr) -> Expr:
    if isinstance(base, Const):
        return Const(Fraction(_num_sign(base.value)))
    if isinstance(base, Sign):
        return base
    if isinstance(base, SPow):
        return ssign(base.base)
    return Sign(base)


def sspow(base: Expr, exponent: Number) -> Expr:
    """sign(base)*|base|^exponent; spow(u,1) = u, spow(u,0) = sign(u)."""
    _check_exponent(exponent)
    if exponent == 0:
        return ssign(base)
    if isinstance(base, Const):
        if not (base.value == 0 and exponent < 0):
            s = _num_sign(base.value)
            return Const(s * _pow_number(abs(base.value), exponent))
    if isinstance(base, SPow):
        return sspow(base.base, base.exponent * exponent)
    if isinstance(base, AbsPow):
        return sabspow(base.base, base.exponent * exponent)
    if exponent == 1:
        return base
    return SPow(base, exponent)


def normalize(e: Expr) -> Expr:
    """Rebuild the tree through the smart constructors (idempotent)."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Sum):
        return ssum(normalize(t) for t in e.terms)
    if isinstance(e, Product):
        return sproduct(normalize(f) for f in e.factors)
    if isinstance(e, AbsPow):
        return sabspow(normalize(e.base), e.exponent)
    if isinstance(e, SPow):
        return sspow(normalize(e.base), e.exponent)
    if isinstance(e, Sign):
        return ssign(normalize(e.base))
    raise TypeError(f"not an Expr: {e!r}")


def max_var_index(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Sum):
        return max(max_var_index(t) for t in e.terms)
    if isinstance(e, Product):
        return max(max_var_index(f) for f in e.factors)
    if isinstance(e, (AbsPow, SPow, Sign)):
        return max_var_index(e.base)
    return 0


def min_exponent(e: Expr) -> Number:
    """Smallest power exponent anywhere in the tree (1 if none)."""
    if isinstance(e, Sum):
        return min(min_exponent(t) for t in e.terms)
    if isinstance(e, Product):
        return min(min_exponent(f) for f in e.factors)
    if isinstance(e, (AbsPow, SPow)):
        return min(e.exponent, min_exponent(e.base))
    if isinstance(e, Sign):
        return min_exponent(e.base)
    return 1


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, point) -> float:
    """Evaluate at a point (sequence of reals), IEEE-double semantics.

    AbsPow(0, r) = SPow(0, r) = 0 for r > 0 and Sign(0) = 0; a negative
    exponent at a zero base raises SingularEvaluationError naming the
    subterm.
    """
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        return float(point[e.index - 1])
    if isinstance(e, Sum):
        return sum(evaluate(t, point) for t in e.terms)
    if isinstance(e, Product):
        out = 1.0
        for f in e.factors:
            out *= evaluate(f, point)
        return out
    if isinstance(e, Sign):
        u = evaluate(e.base, point)
        return float((u > 0) - (u < 0))
    if isinstance(e, (AbsPow, SPow)):
        u = evaluate(e.base, point)
        r = float(e.exponent)
        if u == 0.0 and r < 0:
            raise SingularEvaluationError(to_text(e))
        mag = abs(u) ** r
        if isinstance(e, AbsPow):
            return mag
        return ((u > 0) - (u < 0)) * mag
    raise TypeError(f"not an Expr: {e!r}")


def compile_evaluator(e: Expr, dim: int) -> Callable[[np.ndarray], np.ndarray]:
    """Compile to a vectorized callable on points of shape (N, dim).

    Singular points produce non-finite entries rather than raising; callers
    that sample near the axes run under np.errstate and screen the output.
    """
    if max_var_index(e) > dim:
        raise ExprError(f"variable index {max_var_index(e)} out of range for dim {dim}")

    def build(node: Expr):
        if isinstance(node, Const):
            v = float(node.value)
            return lambda X: v
        if isinstance(node, Var):
            j = node.index - 1
            return lambda X: X[:, j]
        if isinstance(node, Sum):
            fs = [build(t) for t in node.terms]

            def run_sum(X, fs=fs):
                out = fs[0](X)
                for f in fs[1:]:
                    out = out + f(X)
                return out

            return run_sum
        if isinstance(node, Product):
            fs = [build(f) for f in node.factors]

            def run_prod(X, fs=fs):
                out = fs[0](X)
                for f in fs[1:]:
                    out = out * f(X)
                return out

            return run_prod
        if isinstance(node, Sign):
            f = build(node.base)
            return lambda X: np.sign(f(X))
        if isinstance(node, (AbsPow, SPow)):
            f = build(node.base)
            r = float(node.exponent)
            signed = isinstance(node, SPow)
            if r == 1.0:
                mag = lambda X: np.abs(f(X))
            elif r == 2.0:
                def mag(X):
                    u = f(X)
                    return u * u
            else:
                mag = lambda X: np.abs(f(X)) ** r
            if signed:
                return lambda X: np.sign(f(X)) * mag(X)
            return mag
        raise TypeError(f"not an Expr: {node!r}")

    fn = build(e)

    def evaluator(X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = fn(X)
        if np.isscalar(out) or np.ndim(out) == 0:
            return np.full(X.shape[0], float(out))
        return out

    return evaluator


# ---------------------------------------------------------------------------
# differentiation (valid on x_i != 0: sign' = 0 off the axes)


def differentiate(e: Expr, i: int) -> Expr:
    """Partial derivative with respect to x_i.

    Power rules: d|u|^r = r*spow(u, r-1)*u', d spow(u,r) = r*|u|^(r-1)*u',
    d sign(u) = 0; linearity and the product rule elsewhere.
    """
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == i else ZERO
    if isinstance(e, Sum):
        return ssum(differentiate(t, i) for t in e.terms)
    if isinstance(e, Product):
        parts = []
        for k, f in enumerate(e.factors):
            df = differentiate(f, i)
            if _is_zero(df):
                continue
            parts.append(sproduct([*e.factors[:k], df, *e.factors[k + 1:]]))
        return ssum(parts)
    if isinstance(e, Sign):
        return ZERO
    if isinstance(e, AbsPow):
        du = differentiate(e.base, i)
        if _is_zero(du):
            return ZERO
        r = e.exponent
        return sproduct([Const(_as_number(r)), sspow(e.base, r - 1), du])
    if isinstance(e, SPow):
        du = differentiate(e.base, i)
        if _is_zero(du):
            return ZERO
        r = e.exponent
        return sproduct([Const(_as_number(r)), sabspow(e.base, r - 1), du])
    raise TypeError(f"not an Expr: {e!r}")


def _as_number(v: Number) -> Number:
    return Fraction(v) if isinstance(v, int) else v


# ---------------------------------------------------------------------------
# canonical form: sums of monomials coeff * prod sign(x_i)^b_i |x_i|^a_i


@dataclass(frozen=True)
class Monomial:
    """coeff * prod_i sign(x_i)^b_i * |x_i|^a_i.

    ``powers`` holds (var_index, abs_exponent, sign_bit) sorted by index;
    entries with a = 0 and b = 0 are dropped, sign bits are reduced mod 2
    (sign^2 = 1 on x_i != 0).
    """

    coeff: Number
    powers: tuple[tuple[int, Number, int], ...] = ()

    def degree(self) -> float:
        return float(sum(a for _, a, _ in self.powers))


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    acc: dict[int, list] = {}
    for idx, a, b in m1.powers + m2.powers:
        if idx in acc:
            acc[idx][0] = acc[idx][0] + a
            acc[idx][1] ^= b
        else:
            acc[idx] = [a, b]
    powers = tuple(
        (idx, a, b) for idx, (a, b) in sorted(acc.items()) if not (a == 0 and b == 0)
    )
    return Monomial(m1.coeff * m2.coeff, powers)


def mono_evaluate(m: Monomial, point) -> float:
    out = float(m.coeff)
    for idx, a, b in m.powers:
        u = float(point[idx - 1])
        if u == 0.0 and a < 0:
            raise SingularEvaluationError(f"|x{idx}|^{a}")
        out *= abs(u) ** float(a)
        if b:
            out *= (u > 0) - (u < 0)
    return out


def _mono_sort_key(m: Monomial):
    return tuple((idx, float(a), b) for idx, a, b in m.powers)


def _combine(monos: list[Monomial]) -> tuple[Monomial, ...]:
    acc: dict[tuple, Monomial] = {}
    for m in monos:
        key = m.powers
        if key in acc:
            acc[key] = Monomial(acc[key].coeff + m.coeff, key)
        else:
            acc[key] = m
    out = [m for m in acc.values() if m.coeff != 0]
    out.sort(key=_mono_sort_key)
    return tuple(out)


_EXPAND_LIMIT = 12  # max integer exponent expanded by repeated convolution


def _to_monomials(e: Expr) -> list[Monomial] | None:
    """None when e is not a polynomial in the sign/abs-power factors."""
    if isinstance(e, Const):
        return [Monomial(_as_number(e.value))] if e.value != 0 else []
    if isinstance(e, Var):
        return [Monomial(Fraction(1), ((e.index, Fraction(1), 1),))]
    if isinstance(e, Sum):
        out: list[Monomial] = []
        for t in e.terms:
            ms = _to_monomials(t)
            if ms is None:
                return None
            out.extend(ms)
        return out
    if isinstance(e, Product):
        out = [Monomial(Fraction(1))]
        for f in e.factors:
            ms = _to_monomials(f)
            if ms is None:
                return None
            out = [mono_mul(a, b) for a in out for b in ms]
            out = list(_combine(out))
        return out
    if isinstance(e, Sign):
        ms = _to_monomials(e.base)
        if ms is None or len(ms) > 1:
            return None
        if not ms:
            return []  # sign(0)
        m = ms[0]
        powers = tuple((idx, Fraction(0), b) for idx, _, b in m.powers if b)
        return [Monomial(Fraction(_num_sign(m.coeff)), powers)]
    if isinstance(e, (AbsPow, SPow)):
        ms = _to_monomials(e.base)
        if ms is None:
            return None
        r = _as_number(e.exponent)
        if not ms:
            return [] if r > 0 else None  # 0^r
        if len(ms) == 1:
            m = ms[0]
            signed = isinstance(e, SPow)
            coeff = _pow_number(abs(m.coeff), r)
            if signed:
                coeff = _num_sign(m.coeff) * coeff
                powers = tuple((idx, a * r, b) for idx, a, b in m.powers)
            else:
                powers = tuple((idx, a * r, 0) for idx, a, b in m.powers)
            powers = tuple(p for p in powers if not (p[1] == 0 and p[2] == 0))
            return list(_combine([Monomial(coeff, powers)]))
        # polynomial base: |u|^(2k) = u^(2k); spow(u, odd k) = u^k
        if isinstance(r, Fraction) and r.denominator == 1 and 0 < r <= _EXPAND_LIMIT:
            k = int(r)
            even = k % 2 == 0
            if (isinstance(e, AbsPow) and even) or (isinstance(e, SPow) and not even):
                out = [Monomial(Fraction(1))]
                for _ in range(k):
                    out = [mono_mul(a, b) for a in out for b in ms]
                    out = list(_combine(out))
                return out
        return None
    raise TypeError(f"not an Expr: {e!r}")


def _mono_to_expr(m: Monomial) -> Expr:
    factors: list[Expr] = [Const(m.coeff)]
    for idx, a, b in m.powers:
        if b and a != 0:
            factors.append(sspow(Var(idx), a))
        elif b:
            factors.append(Sign(Var(idx)))
        else:
            factors.append(sabspow(Var(idx), a))
    return sproduct(factors)


@dataclass(frozen=True)
class CanonicalForm:
    expr: Expr
    monomials: tuple[Monomial, ...] | None  # None when not canonical
    canonical: bool

    def is_exact_zero(self) -> bool:
        return self.canonical and not self.monomials

    def max_degree(self) -> float:
        if not self.monomials:
            return 0.0
        return max(m.degree() for m in self.monomials)


def to_canonical(e: Expr) -> CanonicalForm:
    """Canonicalize into combined monomials; falls back to normalize()."""
    ms = _to_monomials(normalize(e))
    if ms is None:
        return CanonicalForm(normalize(e), None, False)
    combined = _combine(list(ms))
    expr = ssum([_mono_to_expr(m) for m in combined]) if combined else ZERO
    return CanonicalForm(expr, combined, True)


def canonicalize(e: Expr) -> Expr:
    return to_canonical(e).expr


# ---------------------------------------------------------------------------
# parser


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*|\+|-|/|\^|\(|\)|,))"
)

_FUNCTIONS = ("abs", "sign", "spow", "pow")


@dataclass
class _Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ParseError(f"unexpected character {rest[0]!r}", len(text) - len(rest))
        for kind in ("number", "ident", "op"):
            if m.group(kind) is not None:
                tokens.append(_Token(kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent: sum < product < unary < power < atom."""

    def __init__(self, text: str, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.text = text
        self.dim = dim
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.next()
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected {op!r}, found {tok.text!r}", tok.offset)
        return tok

    def parse(self) -> Expr:
        e = self.parse_sum()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.offset)
        return e

    def parse_sum(self) -> Expr:
        terms = [self.parse_product()]
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            rhs = self.parse_product()
            terms.append(rhs if op == "+" else _negate(rhs))
        return ssum(terms)

    def parse_product(self) -> Expr:
        factors = [self.parse_unary()]
        while self.peek().kind == "op" and self.peek().text in "*/":
            tok = self.next()
            rhs = self.parse_unary()
            if tok.text == "/":
                c = _as_const(rhs)
                if c is None:
                    raise ParseError("division only by nonzero constants", tok.offset)
                if c == 0:
                    raise ParseError("division by zero", tok.offset)
                rhs = Const(Fraction(1) / c if isinstance(c, Fraction) else 1.0 / c)
            factors.append(rhs)
        return sproduct(factors)

    def parse_unary(self) -> Expr:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.next()
            return _negate(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            tok = self.next()
            exp = self.parse_exponent()
            return self.make_pow(base, exp, tok.offset)
        return base

    def parse_exponent(self) -> Number:
        # right-associative; the exponent must fold to a constant
        tok = self.peek()
        e = self.parse_unary()  # covers -r, (p/q), nested a^b
        c = _as_const(e)
        if c is None:
            raise ParseError("exponent must be a constant", tok.offset)
        return c

    def make_pow(self, base: Expr, r: Number, offset: int) -> Expr:
        if _provably_nonnegative(base):
            return sabspow(base, r)
        if isinstance(r, Fraction) and r.denominator == 1 and r.numerator % 2 == 0:
            return sabspow(base, r)  # even integer power is sign-free
        raise ParseError(
            "'^' needs a provably nonnegative base here; write spow(u, r) for the "
            "signed power or abs(u)^r for the magnitude",
            offset,
        )

    def parse_atom(self) -> Expr:
        tok = self.next()
        if tok.kind == "number":
            return Const(Fraction(tok.text))
        if tok.kind == "op" and tok.text == "(":
            e = self.parse_sum()
            self.expect_op(")")
            return e
        if tok.kind == "ident":
            name = tok.text
            if name in _FUNCTIONS:
                return self.parse_call(name, tok.offset)
            m = re.fullmatch(r"x(\d+)", name)
            if m:
                idx = int(m.group(1))
                if not 1 <= idx <= self.dim:
                    raise ParseError(
                        f"variable index out of range: x{idx} with dim {self.dim}",
                        tok.offset,
                    )
                return Var(idx)
            raise ParseError(f"unknown identifier {name!r}", tok.offset)
        raise ParseError(f"unexpected token {tok.text!r}", tok.offset)

    def parse_call(self, name: str, offset: int) -> Expr:
        self.expect_op("(")
        arg = self.parse_sum()
        if name in ("spow", "pow"):
            comma = self.expect_op(",")
            exp_expr = self.parse_sum()
            r = _as_const(exp_expr)
            if r is None:
                raise ParseError(f"{name} exponent must be a constant", comma.offset)
            self.expect_op(")")
            if name == "spow":
                return sspow(arg, r)
            return self.make_pow(arg, r, offset)
        self.expect_op(")")
        if name == "abs":
            return sabspow(arg, Fraction(1))
        return ssign(arg)


def _negate(e: Expr) -> Expr:
    return sproduct([Const(Fraction(-1)), e])


def _as_const(e: Expr) -> Number | None:
    return e.value if isinstance(e, Const) else None


def _provably_nonnegative(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value >= 0
    if isinstance(e, AbsPow):
        return True
    if isinstance(e, Sum):
        return all(_provably_nonnegative(t) for t in e.terms)
    if isinstance(e, Product):
        return all(_provably_nonnegative(f) for f in e.factors)
    return False


def parse(text: str, dim: int) -> Expr:
    """Parse an expression over x1..x<dim>.

    Grammar: numbers (decimal or p/q rationals), +, -, *, / (by nonzero
    constants), ^ (right-assoc, nonnegative or even-integer powers only),
    abs(e), sign(e), spow(e, r), pow(e, r), parentheses.
    """
    return _Parser(text, dim).parse()


# ---------------------------------------------------------------------------
# printer; parse(to_text(e)) == normalize(e)


def _fmt_number(v: Number) -> str:
    if not isinstance(v, Fraction):
        # exact binary fraction of the float, so reparsing preserves the value
        v = Fraction(float(v))
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _fmt_exponent(v: Number) -> str:
    if isinstance(v, Fraction) and v.denominator == 1 and v >= 0:
        return str(v.numerator)
    return f"({_fmt_number(v)})"


def _strip_neg(e: Expr) -> tuple[bool, Expr]:
    """Split a leading minus sign off a term, for 'a - b' printing."""
    if isinstance(e, Const) and e.value < 0:
        return True, Const(-e.value)
    if isinstance(e, Product) and isinstance(e.factors[0], Const) and e.factors[0].value < 0:
        c = e.factors[0].value
        return True, sproduct([Const(-c), *e.factors[1:]])
    return False, e


def to_text(e: Expr) -> str:
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Sum):
        parts = [to_text(e.terms[0])]
        for t in e.terms[1:]:
            neg, body = _strip_neg(t)
            parts.append((" - " if neg else " + ") + to_text(body))
        return "".join(parts)
    if isinstance(e, Product):
        bits = []
        factors = e.factors
        prefix = ""
        if isinstance(factors[0], Const) and factors[0].value == -1 and len(factors) > 1:
            prefix = "-"
            factors = factors[1:]
        for f in factors:
            txt = to_text(f)
            if isinstance(f, Sum):
                txt = f"({txt})"
            bits.append(txt)
        return prefix + "*".join(bits)
    if isinstance(e, AbsPow):
        if e.exponent == 1:
            return f"abs({to_text(e.base)})"
        return f"abs({to_text(e.base)})^{_fmt_exponent(e.exponent)}"
    if isinstance(e, Sign):
        return f"sign({to_text(e.base)})"
    if isinstance(e, SPow):
        return f"spow({to_text(e.base)}, {_fmt_number(e.exponent)})"
    raise TypeError(f"not an Expr: {e!r}")
