"""Minimal exact expression engine for vector-field coefficients.

Expressions are finite sums of terms

    coeff * x1^p1 ... xn^pn * t^pt * r^pr * s^ps * exp(a*r + b*s)

with rational ``coeff``, ``a``, ``b`` and nonnegative integer powers.  This
class is closed under the operations the symmetry analysis needs: addition,
multiplication, exact partial differentiation, and Lie brackets of first-order
vector fields on (x1..xn, t, r, s).  Zero testing is decidable: the normal
form has sorted, merged, nonzero terms, so an expression is zero iff its term
list is empty.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "SymExpr", "VectorFieldSpec", "lie_bracket", "differentiate", "is_zero",
    "parse_expr", "parse_poly",
]


@lru_cache(maxsize=None)
def var_names(n: int) -> tuple:
    return tuple(f"x{j}" for j in range(1, n + 1)) + ("t", "r", "s")


@lru_cache(maxsize=None)
def var_index(n: int) -> dict:
    return {name: i for i, name in enumerate(var_names(n))}


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}")


class SymExpr:
    """Exact symbolic expression in (x1..xn, t, r, s); immutable."""

    __slots__ = ("n", "_terms", "_key")

    def __init__(self, n: int, terms=None):
        self.n = n
        clean = {}
        if terms:
            for key, coeff in terms.items():
                if coeff:
                    clean[key] = clean.get(key, Fraction(0)) + coeff
                    if not clean[key]:
                        del clean[key]
        self._terms = clean
        self._key = tuple(sorted(self._terms.items()))

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "SymExpr":
        return cls(n)

    @classmethod
    def const(cls, n: int, value) -> "SymExpr":
        value = _q(value)
        if not value:
            return cls(n)
        key = (Fraction(0), Fraction(0), (0,) * (n + 3))
        return cls(n, {key: value})

    @classmethod
    def var(cls, n: int, name: str) -> "SymExpr":
        idx = var_index(n)
        if name not in idx:
            raise KeyError(f"unknown variable {name!r} for n={n}")
        powers = [0] * (n + 3)
        powers[idx[name]] = 1
        key = (Fraction(0), Fraction(0), tuple(powers))
        return cls(n, {key: Fraction(1)})

    @classmethod
    def exp_rs(cls, n: int, a, b) -> "SymExpr":
        """exp(a*r + b*s) with exact rational a, b."""
        key = (_q(a), _q(b), (0,) * (n + 3))
        return cls(n, {key: Fraction(1)})

    # -- normal form --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other):
        return isinstance(other, SymExpr) and self.n == other.n and self._key == other._key

    def __hash__(self):
        return hash((self.n, self._key))

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other):
        if self.n != other.n:
            raise ValueError("arity mismatch between expressions")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymExpr.const(self.n, other)
        self._check(other)
        terms = dict(self._terms)
        for key, coeff in other._terms.items():
            terms[key] = terms.get(key, Fraction(0)) + coeff
        return SymExpr(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return SymExpr(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymExpr.const(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = _q(other)
            return SymExpr(self.n, {k: c * q for k, c in self._terms.items()})
        self._check(other)
        terms = {}
        for (a1, b1, p1), c1 in self._terms.items():
            for (a2, b2, p2), c2 in other._terms.items():
                key = (a1 + a2, b1 + b2, tuple(u + v for u, v in zip(p1, p2)))
                terms[key] = terms.get(key, Fraction(0)) + c1 * c2
        return SymExpr(self.n, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = SymExpr.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- calculus ------------------------------------------------------------

    def differentiate(self, name: str) -> "SymExpr":
        """Exact partial derivative; exp factors use the product rule."""
        idx = var_index(self.n)
        if name not in idx:
            raise KeyError(f"unknown variable {name!r} for n={self.n}")
        i = idx[name]
        terms = {}

        def put(key, coeff):
            if coeff:
                terms[key] = terms.get(key, Fraction(0)) + coeff

        for (a, b, powers), coeff in self._terms.items():
            if powers[i] > 0:
                lowered = list(powers)
                lowered[i] -= 1
                put((a, b, tuple(lowered)), coeff * powers[i])
            if name == "r" and a:
                put((a, b, powers), coeff * a)
            elif name == "s" and b:
                put((a, b, powers), coeff * b)
        return SymExpr(self.n, terms)

    def depends_on(self, name: str) -> bool:
        idx = var_index(self.n)[name]
        for (a, b, powers) in self._terms:
            if powers[idx]:
                return True
            if name == "r" and a:
                return True
            if name == "s" and b:
                return True
        return False

    def evaluate(self, values: dict):
        """Numeric value at a point; accepts floats or numpy arrays."""
        names = var_names(self.n)
        total = 0.0
        for (a, b, powers), coeff in self._terms.items():
            term = float(coeff)
            for name, power in zip(names, powers):
                if power:
                    term = term * np.asarray(values[name]) ** power
            if a or b:
                term = term * np.exp(float(a) * np.asarray(values["r"])
                                     + float(b) * np.asarray(values["s"]))
            total = total + term
        return total

    def subs_rational(self, values: dict) -> Fraction:
        """Exact value at a rational point (no exp factors allowed)."""
        total = Fraction(0)
        names = var_names(self.n)
        for (a, b, powers), coeff in self._terms.items():
            if a or b:
                raise ValueError("exact substitution defined only for exp-free expressions")
            term = coeff
            for name, power in zip(names, powers):
                if power:
                    term *= _q(values[name]) ** power
            total += term
        return total

    # -- display -------------------------------------------------------------

    def __repr__(self):
        if self.is_zero:
            return "0"
        names = var_names(self.n)
        parts = []
        for (a, b, powers), coeff in self._key:
            factors = []
            if coeff != 1 or (not any(powers) and not (a or b)):
                factors.append(str(coeff))
            for name, power in zip(names, powers):
                if power == 1:
                    factors.append(name)
                elif power > 1:
                    factors.append(f"{name}^{power}")
            if a or b:
                inner = []
                if a:
                    inner.append(f"{a}*r")
                if b:
                    inner.append(f"{b}*s")
                factors.append(f"exp({' + '.join(inner)})")
            parts.append("*".join(factors))
        return " + ".join(parts)


def differentiate(e: SymExpr, name: str) -> SymExpr:
    return e.differentiate(name)


def is_zero(e: SymExpr) -> bool:
    return e.is_zero


# ---------------------------------------------------------------------------
# Vector fields on (x1..xn, t, r, s).

@dataclass(frozen=True)
class VectorFieldSpec:
    """First-order vector field: xi_j d/dx_j + tau d/dt + phi d/dr + sigma d/ds."""

    n: int
    xi: tuple
    tau: SymExpr
    phi: SymExpr
    sigma: SymExpr

    def __post_init__(self):
        if len(self.xi) != self.n:
            raise ValueError("xi must have one component per spatial variable")
        for comp in (*self.xi, self.tau, self.phi, self.sigma):
            if comp.n != self.n:
                raise ValueError("component arity mismatch")

    @classmethod
    def zero(cls, n: int) -> "VectorFieldSpec":
        z = SymExpr.zero(n)
        return cls(n=n, xi=(z,) * n, tau=z, phi=z, sigma=z)

    def components(self) -> tuple:
        return (*self.xi, self.tau, self.phi, self.sigma)

    def component_map(self) -> dict:
        return dict(zip(var_names(self.n), self.components()))

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components())

    def __add__(self, other: "VectorFieldSpec") -> "VectorFieldSpec":
        if self.n != other.n:
            raise ValueError("arity mismatch")
        return VectorFieldSpec(
            n=self.n,
            xi=tuple(a + b for a, b in zip(self.xi, other.xi)),
            tau=self.tau + other.tau,
            phi=self.phi + other.phi,
            sigma=self.sigma + other.sigma,
        )

    def __sub__(self, other: "VectorFieldSpec") -> "VectorFieldSpec":
        return self + other.scale(-1)

    def scale(self, c) -> "VectorFieldSpec":
        return VectorFieldSpec(
            n=self.n,
            xi=tuple(comp * c for comp in self.xi),
            tau=self.tau * c,
            phi=self.phi * c,
            sigma=self.sigma * c,
        )

    def apply_to(self, f: SymExpr) -> SymExpr:
        """Directional derivative X(f)."""
        out = SymExpr.zero(self.n)
        for name, coeff in zip(var_names(self.n), self.components()):
            if not coeff.is_zero:
                out = out + coeff * f.differentiate(name)
        return out

    def is_vertical(self) -> bool:
        """True when the field moves only (r, s)."""
        return all(c.is_zero for c in self.xi) and self.tau.is_zero


def lie_bracket(X: VectorFieldSpec, Y: VectorFieldSpec) -> VectorFieldSpec:
    """[X, Y] with component [X,Y]^u = X(Y^u) - Y(X^u), exact."""
    if X.n != Y.n:
        raise ValueError("arity mismatch between vector fields")
    comps = [X.apply_to(yu) - Y.apply_to(xu)
             for xu, yu in zip(X.components(), Y.components())]
    n = X.n
    return VectorFieldSpec(n=n, xi=tuple(comps[:n]), tau=comps[n],
                           phi=comps[n + 1], sigma=comps[n + 2])


# ---------------------------------------------------------------------------
# Textual syntax: integers/rationals, variables, + - * ^, exp(a*r + b*s).

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([()+\-*/^]))")


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad character in expression at {text[pos:]!r}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, n, aliases=None):
        self.tokens = tokens
        self.pos = 0
        self.n = n
        self.aliases = aliases or {}

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise ValueError(f"expected {expect!r}, found {tok!r}")
        self.pos += 1
        return tok

    def parse(self) -> SymExpr:
        e = self.expr()
        if self.peek() is not None:
            raise ValueError(f"trailing input from token {self.peek()!r}")
        return e

    def expr(self) -> SymExpr:
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> SymExpr:
        e = self.power()
        while self.peek() == "*":
            self.take()
            e = e * self.power()
        return e

    def power(self) -> SymExpr:
        base = self.atom()
        if self.peek() == "^":
            self.take()
            if self.peek() == "-":
                raise ValueError("negative powers are not supported")
            base = base ** int(self.take())
        return base

    def number(self) -> Fraction:
        num = int(self.take())
        if self.peek() == "/":
            self.take()
            den = int(self.take())
            return Fraction(num, den)
        return Fraction(num)

    def atom(self) -> SymExpr:
        tok = self.peek()
        if tok == "-":
            self.take()
            return -self.power()
        if tok == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if tok is None:
            raise ValueError("unexpected end of expression")
        if tok.isdigit():
            return SymExpr.const(self.n, self.number())
        name = self.take()
        if name == "exp":
            self.take("(")
            arg = self.expr()
            self.take(")")
            return self._exp_of(arg)
        name = self.aliases.get(name, name)
        return SymExpr.var(self.n, name)

    def _exp_of(self, arg: SymExpr) -> SymExpr:
        """exp of a linear form in (r, s) only."""
        idx = var_index(self.n)
        a = b = Fraction(0)
        for (ea, eb, powers), coeff in arg._terms.items():
            if ea or eb:
                raise ValueError("nested exp is not supported")
            active = [i for i, p in enumerate(powers) if p]
            if not active:
                raise ValueError("constant offset inside exp is not supported")
            if len(active) != 1 or powers[active[0]] != 1:
                raise ValueError("exp argument must be linear in r and s")
            name = var_names(self.n)[active[0]]
            if name == "r":
                a += coeff
            elif name == "s":
                b += coeff
            else:
                raise ValueError("exp argument may involve only r and s")
        return SymExpr.exp_rs(self.n, a, b)


def parse_expr(text: str, n: int, aliases: dict | None = None) -> SymExpr:
    """Parse the CLI expression syntax into a SymExpr."""
    return _Parser(_tokenize(text), n, aliases).parse()


def parse_poly(text: str, varname: str = "z") -> tuple:
    """Parse a univariate polynomial, returning coefficients (c0, c1, ...)."""
    expr = parse_expr(text, 0, aliases={varname: "r"})
    idx = var_index(0)["r"]
    degree = 0
    for (a, b, powers) in expr._terms:
        if a or b:
            raise ValueError("polynomial payload cannot contain exp")
        for i, p in enumerate(powers):
            if p and i != idx:
                raise ValueError(f"polynomial must involve only {varname!r}")
        degree = max(degree, powers[idx])
    coeffs = [Fraction(0)] * (degree + 1)
    for (a, b, powers), coeff in expr._terms.items():
        coeffs[powers[idx]] = coeff
    return tuple(coeffs)
