"""Exact scalars used throughout: rationals, level-affine shifts, and
Laurent polynomials in the shifted level ``kappa = k + 2``.

Every spectral shift in the bosonization is of the form ``a0 + ak*k`` in
units of hbar, and every leg coefficient is a Laurent monomial in
``k + 2`` (for instance ``2/(k+2)``).  Keeping the level symbolic lets
relations be checked at generic ``k``; :meth:`AffineShift.at` and
:meth:`KCoeff.at` specialize to a rational level.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Union

Rat = Fraction
Number = Union[int, Fraction]


class CriticalLevelError(ArithmeticError):
    """A quantity with a pole at ``k = -2`` was evaluated there."""


def rat(x) -> Fraction:
    """Coerce ints, Fractions and strings such as ``"-3/4"`` to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot make an exact rational from {x!r}")


def fmt_rat(q: Fraction) -> str:
    q = rat(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, order=True)
class AffineShift:
    """``a0 + ak*k`` in units of hbar."""

    a0: Fraction = Fraction(0)
    ak: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a0", rat(self.a0))
        object.__setattr__(self, "ak", rat(self.ak))

    @classmethod
    def of(cls, value) -> "AffineShift":
        if isinstance(value, AffineShift):
            return value
        return cls(rat(value), Fraction(0))

    def __add__(self, other) -> "AffineShift":
        other = AffineShift.of(other)
        return AffineShift(self.a0 + other.a0, self.ak + other.ak)

    __radd__ = __add__

    def __neg__(self) -> "AffineShift":
        return AffineShift(-self.a0, -self.ak)

    def __sub__(self, other) -> "AffineShift":
        return self + (-AffineShift.of(other))

    def __rsub__(self, other) -> "AffineShift":
        return AffineShift.of(other) - self

    def scale(self, c) -> "AffineShift":
        c = rat(c)
        return AffineShift(self.a0 * c, self.ak * c)

    @property
    def is_constant(self) -> bool:
        return self.ak == 0

    def at(self, k) -> Fraction:
        return self.a0 + self.ak * rat(k)

    def kappa_form(self) -> tuple[Fraction, Fraction]:
        """Return ``(a, alpha)`` with ``a0 + ak*k = a + alpha*(k+2)``."""
        return self.a0 - 2 * self.ak, self.ak

    def __str__(self) -> str:
        if self.ak == 0:
            return fmt_rat(self.a0)
        kpart = "k" if self.ak == 1 else ("-k" if self.ak == -1 else f"{fmt_rat(self.ak)}k")
        if self.a0 == 0:
            return kpart
        sign = "+" if self.a0 > 0 else "-"
        return f"{kpart}{sign}{fmt_rat(abs(self.a0))}"


def shift(a0=0, ak=0) -> AffineShift:
    return AffineShift(rat(a0), rat(ak))


ZERO_SHIFT = AffineShift()


class KCoeff:
    """Laurent polynomial in ``kappa = k + 2`` with rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        if terms is None:
            items: Iterable = ()
        elif isinstance(terms, dict):
            items = terms.items()
        else:
            items = terms
        clean = {}
        for p, c in items:
            c = rat(c)
            if c:
                clean[int(p)] = clean.get(int(p), Fraction(0)) + c
        self._terms = tuple(sorted((p, c) for p, c in clean.items() if c))
        self._hash = hash(self._terms)

    @classmethod
    def of(cls, value) -> "KCoeff":
        if isinstance(value, KCoeff):
            return value
        return cls({0: rat(value)})

    @classmethod
    def monomial(cls, c, power: int) -> "KCoeff":
        return cls({power: rat(c)})

    @property
    def terms(self) -> tuple[tuple[int, Fraction], ...]:
        return self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = KCoeff.of(other)
        if not isinstance(other, KCoeff):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return self._hash

    def __add__(self, other) -> "KCoeff":
        other = KCoeff.of(other)
        return KCoeff(list(self._terms) + list(other._terms))

    __radd__ = __add__

    def __neg__(self) -> "KCoeff":
        return KCoeff([(p, -c) for p, c in self._terms])

    def __sub__(self, other) -> "KCoeff":
        return self + (-KCoeff.of(other))

    def __rsub__(self, other) -> "KCoeff":
        return KCoeff.of(other) - self

    def __mul__(self, other) -> "KCoeff":
        other = KCoeff.of(other)
        out: dict[int, Fraction] = {}
        for p, c in self._terms:
            for q, d in other._terms:
                out[p + q] = out.get(p + q, Fraction(0)) + c * d
        return KCoeff(out)

    __rmul__ = __mul__

    def coeff(self, power: int) -> Fraction:
        for p, c in self._terms:
            if p == power:
                return c
        return Fraction(0)

    @property
    def is_constant(self) -> bool:
        return all(p == 0 for p, _ in self._terms)

    def constant(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"{self} depends on the level")
        return self.coeff(0)

    def is_integer(self) -> bool:
        return self.is_constant and self.coeff(0).denominator == 1

    @property
    def min_power(self) -> int:
        return self._terms[0][0] if self._terms else 0

    def at(self, k) -> Fraction:
        kappa = rat(k) + 2
        if kappa == 0:
            if self.min_power < 0:
                raise CriticalLevelError(f"{self} is singular at k=-2")
            return self.coeff(0)
        return sum((c * kappa**p for p, c in self._terms), Fraction(0))

    def sort_key(self):
        return self._terms

    def __repr__(self) -> str:
        return f"KCoeff({str(self)})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for p, c in self._terms:
            if p == 0:
                parts.append(fmt_rat(c))
            elif p == 1:
                parts.append(f"{fmt_rat(c)}*(k+2)")
            else:
                parts.append(f"{fmt_rat(c)}*(k+2)^{p}")
        return " + ".join(parts)


ONE = KCoeff.of(1)


def taylor_shift_weights(alpha: Fraction, order: int) -> list[Fraction]:
    """Weights ``alpha**j / j!`` of ``f(a + alpha*kappa)`` in powers of kappa."""
    return [alpha**j / factorial(j) for j in range(order + 1)]
