"""Skew polynomials in a shift operator D (``D f(u) = f(u - hbar) D``) or a derivation.

Coefficients are sympy expressions in the base variable; Lambda-atoms are the
undefined function ``Lambda`` applied to shifted arguments, so the shift twist
moves their arguments and ``Lambda(x) Lambda(x)^{-1}`` cancels automatically.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import sympy

from .report import CheckReport

U = sympy.Symbol("u")
T = sympy.Symbol("t")
HB = sympy.Symbol("hbar")
LAMBDA = sympy.Function("Lambda")
CHI = sympy.Function("chi")

SHIFT, DERIVATION = "shift", "derivation"


class TwistMismatch(TypeError):
    pass


class NotAPolynomial(ValueError):
    pass


def _simplify(expr):
    return sympy.cancel(sympy.together(expr))


@dataclass(frozen=True)
class SkewPoly:
    """``sum_i coeffs[i] * X^i`` with ``X`` the shift ``D`` or the derivation ``d/dvar``."""

    coeffs: tuple
    twist: str = SHIFT
    var: sympy.Symbol = U
    step: sympy.Expr = HB

    def __post_init__(self):
        cs = [_simplify(sympy.sympify(c)) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def generator(cls, twist: str = SHIFT, var=U, step=HB) -> "SkewPoly":
        return cls((0, 1), twist, var, step)

    @classmethod
    def scalar(cls, c, twist: str = SHIFT, var=U, step=HB) -> "SkewPoly":
        return cls((c,), twist, var, step)

    def _like(self, coeffs) -> "SkewPoly":
        return SkewPoly(tuple(coeffs), self.twist, self.var, self.step)

    def _check(self, other: "SkewPoly"):
        if (self.twist, self.var, self.step) != (other.twist, other.var, other.step):
            raise TwistMismatch(f"{self.twist} vs {other.twist}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else sympy.Integer(0)

    def __add__(self, other) -> "SkewPoly":
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return self._like(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "SkewPoly":
        return self._like(-c for c in self.coeffs)

    def __sub__(self, other) -> "SkewPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "SkewPoly":
        return self._lift(other) - self

    def _lift(self, other) -> "SkewPoly":
        if isinstance(other, SkewPoly):
            self._check(other)
            return other
        return self._like((other,))

    def twist_power(self, i: int, f) -> list:
        """``X^i f = sum_j c_j X^j`` as the list ``c``."""
        if self.twist == SHIFT:
            return [0] * i + [f.subs(self.var, self.var - i * self.step)]
        out = [sympy.Integer(0)] * (i + 1)
        for k in range(i + 1):
            out[i - k] += comb(i, k) * sympy.diff(f, self.var, k)
        return out

    def __mul__(self, other) -> "SkewPoly":
        other = self._lift(other)
        out = [sympy.Integer(0)] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                for m, c in enumerate(self.twist_power(i, b)):
                    out[m + j] += a * c
        return self._like(out)

    def __rmul__(self, other) -> "SkewPoly":
        return self._lift(other) * self

    def apply(self, f):
        """Action on a function of ``var``."""
        if self.twist == SHIFT:
            return _simplify(sum(c * f.subs(self.var, self.var - i * self.step) for i, c in enumerate(self.coeffs)))
        return _simplify(sum(c * sympy.diff(f, self.var, i) for i, c in enumerate(self.coeffs)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SkewPoly):
            return NotImplemented
        if (self.twist, self.var, self.step) != (other.twist, other.var, other.step):
            return False
        n = max(len(self.coeffs), len(other.coeffs))
        return all(_simplify(self.coeff(i) - other.coeff(i)) == 0 for i in range(n))

    def __hash__(self):
        return hash((self.coeffs, self.twist))

    def __repr__(self) -> str:
        x = "D" if self.twist == SHIFT else "d"
        return " + ".join(f"({c})*{x}^{i}" for i, c in enumerate(self.coeffs)) or "0"


skew_mul = SkewPoly.__mul__


def lam(shift) -> sympy.Expr:
    """``Lambda(u + shift hbar)``."""
    return LAMBDA(U + sympy.sympify(shift) * HB)


def s_of_lambda():
    half = sympy.Rational(1, 2)
    return lam(-half) + 1 / lam(half)


def miura_factorization() -> SkewPoly:
    D = SkewPoly.generator()
    half = sympy.Rational(1, 2)
    return (lam(-half) * D - 1) * ((1 / lam(half)) * D - 1)


def miura_factor_check() -> CheckReport:
    """``(Lambda(u-h/2) D - 1)(Lambda(u+h/2)^{-1} D - 1) = D^2 - s(u) D + 1``."""
    P = miura_factorization()
    want = SkewPoly((1, -s_of_lambda(), 1))
    ok = P == want and P.degree == 2
    return CheckReport("miura-factorization", "symbolic", ok, "1" if ok else repr(P), {},
                       "(L(u-h/2) D - 1)(L(u+h/2)^-1 D - 1) = D^2 - s(u) D + 1",
                       {"coefficients": [str(c) for c in P.coeffs]})


def classical_miura_check() -> CheckReport:
    """``(d - chi/2)(d + chi/2) = d^2 - q`` with ``q = chi^2/4 - chi'/2``, also applied to a test function."""
    d = SkewPoly.generator(DERIVATION, T, 0)
    chi = CHI(T)
    P = (d - chi / 2) * (d + chi / 2)
    q = chi**2 / 4 - sympy.diff(chi, T) / 2
    want = SkewPoly((-q, 0, 1), DERIVATION, T, 0)
    g = sympy.Function("g")(T)
    direct = sympy.diff(sympy.diff(g, T) + chi * g / 2, T) - chi / 2 * (sympy.diff(g, T) + chi * g / 2)
    applied = sympy.simplify(P.apply(g) - direct) == 0
    ok = P == want and applied
    return CheckReport("classical-miura", "symbolic", ok, "1" if ok else repr(P), {},
                       "(d - chi/2)(d + chi/2) = d^2 - (chi^2/4 - chi'/2)",
                       {"q": str(q)})


def parse_q(text: str) -> sympy.Poly:
    """A nonzero polynomial in ``u`` with rational coefficients, from plain text."""
    try:
        expr = sympy.sympify(text, locals={"u": U}, rational=True)
        poly = sympy.Poly(expr, U, domain=sympy.QQ)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as exc:
        raise NotAPolynomial(f"not a polynomial in u: {text!r}") from exc
    if poly.is_zero:
        raise NotAPolynomial("Q must be nonzero")
    return poly


def baxter_s(Q) -> sympy.Expr:
    q = Q.as_expr() if isinstance(Q, sympy.Poly) else sympy.sympify(Q)
    return _simplify((q.subs(U, U - HB) + q.subs(U, U + HB)) / q)


def baxter_check(Q, hbar=HB) -> CheckReport:
    """``(D^2 - s(u) D + 1) Q(u + hbar) = 0`` with ``s = (Q(u-h) + Q(u+h))/Q(u)``."""
    Q = parse_q(Q) if isinstance(Q, str) else Q
    q = Q.as_expr() if isinstance(Q, sympy.Poly) else sympy.sympify(Q)
    s = baxter_s(q)
    op = SkewPoly((1, -s, 1))
    res = op.apply(q.subs(U, U + HB))
    if hbar is not HB:
        res = _simplify(res.subs(HB, sympy.nsimplify(hbar)))
        s = _simplify(s.subs(HB, sympy.nsimplify(hbar)))
    ok = res == 0
    return CheckReport("baxter", "symbolic", ok, "1" if ok else str(res), {"Q": str(q)},
                       "(D^2 - s(u) D + 1) Q(u+h) = 0, s = (Q(u-h) + Q(u+h))/Q(u)",
                       {"s": str(s)})


def random_q(rng: random.Random, max_degree: int = 6) -> sympy.Poly:
    deg = rng.randint(0, max_degree)
    coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(deg + 1)]
    if coeffs[0] == 0:
        coeffs[0] = Fraction(1)
    return sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in coeffs], U, domain=sympy.QQ)


def verify_baxter(count: int = 50, seed: int = 0, max_degree: int = 6, q: str | None = None) -> list[CheckReport]:
    reports = [miura_factor_check(), classical_miura_check()]
    if q is not None:
        reports.append(baxter_check(q))
        return reports
    rng = random.Random(seed)
    bad = []
    for _ in range(count):
        Q = random_q(rng, max_degree)
        r = baxter_check(Q)
        if not r.passed:
            bad.append({"Q": str(Q.as_expr()), "residual": r.residual})
    reports.append(CheckReport("baxter-random", "symbolic", not bad, bad or "1",
                               {"count": count, "seed": seed, "max_degree": max_degree},
                               "(D^2 - s(u) D + 1) Q(u+h) = 0 for random polynomial Q"))
    return reports
