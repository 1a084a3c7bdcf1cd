"""Multiplicative structure functions.

A :class:`FactorProduct` is ``C * hbar**n * prod (x + s*hbar)**e`` times
families ``prod_{l>=0} (x + (b + l*step)*hbar)**e``.  Exponents are
:class:`~hbar_miura.exact.KCoeff` so contraction exponents such as
``gamma1*gamma2*(k+2)/2`` can be carried before they collapse.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import AffineShift, KCoeff, fmt_rat, rat
from .shiftsum import ShiftSum, rat_lcm


class PoleAtPoint(ZeroDivisionError):
    pass


class UnbalancedGamma(ValueError):
    pass


class UnbalancedProduct(ValueError):
    pass


@dataclass(frozen=True)
class FactorProduct:
    constant: Fraction = Fraction(1)
    factors: ShiftSum = field(default_factory=ShiftSum)
    hbar_power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "constant", rat(self.constant))
        if self.constant == 0:
            raise ValueError("a FactorProduct cannot have zero constant")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def one(cls) -> "FactorProduct":
        return cls()

    @classmethod
    def const(cls, c) -> "FactorProduct":
        return cls(rat(c))

    @classmethod
    def linear(cls, s, exponent=1) -> "FactorProduct":
        """``(x + s*hbar)**exponent``."""
        return cls(factors=ShiftSum.atom(s, exponent))

    @classmethod
    def family(cls, base, step, exponent=1) -> "FactorProduct":
        return cls(factors=ShiftSum.family(base, step, exponent))

    @classmethod
    def ratio(cls, num_shifts, den_shifts) -> "FactorProduct":
        p = cls()
        for s in num_shifts:
            p = p * cls.linear(s)
        for s in den_shifts:
            p = p * cls.linear(s, -1)
        return p

    # -- algebra --------------------------------------------------------------
    def __mul__(self, other: "FactorProduct") -> "FactorProduct":
        if not isinstance(other, FactorProduct):
            other = FactorProduct.const(other)
        return FactorProduct(self.constant * other.constant, self.factors + other.factors, self.hbar_power + other.hbar_power)

    __rmul__ = __mul__

    def inverse(self) -> "FactorProduct":
        return self.power(-1)

    def __truediv__(self, other: "FactorProduct") -> "FactorProduct":
        return self * other.inverse()

    def power(self, n: int) -> "FactorProduct":
        n = int(n)
        return FactorProduct(self.constant**n, self.factors.scale(n), self.hbar_power * n)

    def shifted(self, s) -> "FactorProduct":
        """Substitute ``x -> x + s*hbar``."""
        return FactorProduct(self.constant, self.factors.shifted(s), self.hbar_power)

    def negated(self) -> "FactorProduct":
        """Substitute ``x -> -x`` using ``(-x + s) = -(x - s)``.

        Families contribute the sign ``(-1)**(sum of exponents)`` per index,
        which is only meaningful when that sum is an even integer.
        """
        sign_exp = KCoeff()
        for _, e in self.factors.finite:
            sign_exp = sign_exp + e
        fam_total = KCoeff()
        for _, e in self.factors.families:
            fam_total = fam_total + e
        if fam_total and not (fam_total.is_integer() and fam_total.constant() % 2 == 0):
            raise UnbalancedProduct("family sign product diverges under x -> -x")
        if not sign_exp.is_integer():
            raise UnbalancedProduct(f"non-integer total exponent {sign_exp} under x -> -x")
        sign = -1 if sign_exp.constant() % 2 else 1
        return FactorProduct(self.constant * sign, self.factors.reflected(), self.hbar_power)

    def normalize(self) -> "FactorProduct":
        return FactorProduct(self.constant, _rebalance(self.factors.normalize()), self.hbar_power)

    def is_one(self) -> bool:
        n = self.normalize()
        return n.constant == 1 and not n.factors and n.hbar_power == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, FactorProduct):
            return NotImplemented
        return (self.constant, self.factors, self.hbar_power) == (other.constant, other.factors, other.hbar_power)

    def __hash__(self) -> int:
        return hash((self.constant, self.factors, self.hbar_power))

    def equals(self, other: "FactorProduct") -> bool:
        """Structural equality of canonical forms."""
        return (self / other).is_one()

    # -- properties -----------------------------------------------------------
    def exponents_integral(self) -> bool:
        return all(e.is_integer() for _, e in self.normalize().factors.items())

    def is_balanced(self) -> bool:
        """Every step-sign class converges: sum e = 0 and sum e*base = 0."""
        classes: dict[int, list] = {}
        for (b, st, j), e in self.factors.families:
            classes.setdefault(1 if st > 0 else -1, []).append((b, st, e))
        for members in classes.values():
            L = rat_lcm(st for _, st, _ in members)
            tot = KCoeff()
            w0 = KCoeff()
            wk = KCoeff()
            for b, st, e in members:
                n = int(L / abs(st))
                for i in range(n):
                    bb = b + st * i
                    tot = tot + e
                    w0 = w0 + e * bb.a0
                    wk = wk + e * bb.ak
            if tot or w0 or wk:
                return False
        return True

    # -- evaluation -----------------------------------------------------------
    def eval_truncated(self, x, hbar=1, k=0, L: int = 10_000, tail: bool = False) -> float:
        """Finite part times the partial product ``l < L`` of all families.

        Families of one step sign are first refined to their common step so
        that every family is cut at the same distance; balanced families then
        converge like ``O(1/L)``.  With ``tail=True`` the remainder
        ``prod_{l>=L}`` is added in closed form, ``prod Gamma(L + a_i)**-e_i``,
        which is exact for a balanced class.
        """
        if not self.is_balanced():
            raise UnbalancedProduct("only balanced products can be evaluated")
        x = float(x)
        hbq = rat(hbar) if not isinstance(hbar, float) else None
        hb = float(hbar) if hbq is None else float(hbq)
        k = rat(k)
        # exponents aggregated per exact shift so that cancelling zeros/poles
        # between finite atoms and families never get evaluated
        acc: dict[Fraction, Fraction] = {}
        for (s, _), e in self.factors.finite:
            v = s.at(k)
            acc[v] = acc.get(v, Fraction(0)) + e.at(k)
        classes: dict[int, list] = {}
        for (b, st, _), e in self.factors.families:
            classes.setdefault(1 if st > 0 else -1, []).append((b, st, e))
        for sgn, members in classes.items():
            Lstep = rat_lcm(st for _, st, _ in members)
            g = sgn * Lstep
            for b, st, e in members:
                ev = e.at(k)
                for i in range(int(Lstep / abs(st))):
                    b0 = (b + st * i).at(k)
                    for l in range(L):
                        v = b0 + l * g
                        acc[v] = acc.get(v, Fraction(0)) + ev
        log_abs = math.log(abs(float(self.constant))) + self.hbar_power * math.log(abs(hb))
        sign = (1 if self.constant > 0 else -1) * (1 if hb > 0 or self.hbar_power % 2 == 0 else -1)
        if tail:
            for sgn, members in classes.items():
                Lstep = rat_lcm(st for _, st, _ in members)
                g = float(sgn * Lstep) * hb
                for b, st, e in members:
                    ev = float(e.at(k))
                    for i in range(int(Lstep / abs(st))):
                        a = (x + float((b + st * i).at(k)) * hb) / g
                        log_abs -= ev * math.lgamma(L + a)
        for v, e in acc.items():
            if e == 0:
                continue
            value = x + float(v) * hb
            if value == 0.0:
                raise PoleAtPoint(f"factor vanishes at x={x}")
            if value < 0:
                if e.denominator != 1:
                    raise ValueError("negative base with non-integer exponent")
                if e.numerator % 2:
                    sign = -sign
            log_abs += float(e) * math.log(abs(value))
        return sign * math.exp(log_abs)

    def numeric_probe_equal(self, other: "FactorProduct", k=0, hbar=1, L: int = 4000, seed: int = 0, tol=1e-6) -> bool:
        """Fallback equality at three pseudo-random points."""
        rng = random.Random(seed)
        q = self / other
        for _ in range(3):
            x = rng.uniform(0.31, 0.97) + rng.choice([-3.5, 0.0, 2.5])
            try:
                v = q.eval_truncated(x, hbar, k, L)
            except (PoleAtPoint, ValueError):
                continue
            if abs(v - 1) > tol * max(1.0, L / 1000):
                return False
        return True

    # -- text -----------------------------------------------------------------
    def __str__(self) -> str:
        parts = [fmt_rat(self.constant)]
        if self.hbar_power:
            parts.append(f"hbar^{self.hbar_power}")
        fin = " ".join(f"(x + {s})^{_fmt_exp(e)}" for (s, _), e in self.factors.finite)
        fam = " ".join(f"({b}, {fmt_rat(st)})^{_fmt_exp(e)}" for (b, st, _), e in self.factors.families)
        parts.append(f"prod[{fin}]")
        parts.append(f"fam[{fam}]")
        return " * ".join(parts)


def _const_ratio(a: KCoeff, b: KCoeff):
    """``a / b`` when it is a rational constant, else None."""
    if not b:
        return None
    p, c = b.terms[0]
    r = a.coeff(p) / c
    return r if a == b * r else None


def _rebalance(ss: ShiftSum) -> ShiftSum:
    """Move one family per step-sign class so the class converges.

    Residue-canonical bases are exact as formal products but generally not
    convergent; moving a share of the first family of each class by one
    step (emitting the telescoped atom) restores a zero exponent-weighted
    base sum whenever the class exponents sum to zero.
    """
    classes: dict[int, list] = {}
    for (b, st, j), e in ss.families:
        classes.setdefault(1 if st > 0 else -1, []).append((b, st, j, e))
    out = ss
    for members in classes.values():
        L = rat_lcm(st for _, st, _, _ in members)
        total = KCoeff()
        deficit = KCoeff()
        for b, st, _, e in members:
            n = int(L / abs(st))
            total = total + e * n
            deficit = deficit + e * (n * b.a0 + st * Fraction(n * (n - 1), 2))
        if total or not deficit:
            continue
        b, st, j, _ = members[0]
        n = int(L / abs(st))
        # move a delta-share of the first family one step: F(b) = X(b) + F(b+st)
        delta = deficit * Fraction(-1) * (1 / (n * st))
        out = out + ShiftSum.family(b + st, st, delta, j) - ShiftSum.family(b, st, delta, j) + ShiftSum.atom(b, delta, j)
    return out


def _fmt_exp(e: KCoeff) -> str:
    return str(e) if e.is_constant else f"({e})"


# ---------------------------------------------------------------------------
# Gamma ratios


@dataclass(frozen=True)
class GammaRatio:
    """``prod Gamma(scale*x/hbar + offset)**exponent``."""

    terms: tuple[tuple[AffineShift, int], ...]
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((AffineShift.of(o), int(e)) for o, e in self.terms))
        object.__setattr__(self, "scale", rat(self.scale))

    def is_balanced(self) -> bool:
        tot = sum(e for _, e in self.terms)
        w = AffineShift()
        for o, e in self.terms:
            w = w + o.scale(e)
        return tot == 0 and w == AffineShift()

    def log_value(self, x: float, hbar: float = 1.0, k=0) -> tuple[float, int]:
        """(log|value|, sign) via lgamma; the direct oracle."""
        z = float(self.scale) * x / hbar
        tot, sign = 0.0, 1
        for o, e in self.terms:
            arg = z + float(o.at(k))
            tot += e * math.lgamma(arg)
            if arg < 0 and math.floor(arg) % 2 == 1:
                sign *= (-1) ** (e % 2)
        return tot, sign

    def value(self, x: float, hbar: float = 1.0, k=0) -> float:
        lv, s = self.log_value(x, hbar, k)
        return s * math.exp(lv)


def gamma_to_product(g: GammaRatio) -> FactorProduct:
    """Rewrite a Gamma ratio as finite factors times convergent families.

    An unbalanced ratio is repaired, when possible, by moving one offset by
    an integer with ``Gamma(z+1) = z*Gamma(z)``; the moved steps become
    finite factors.
    """
    sigma = g.scale
    if sum(e for _, e in g.terms) != 0:
        raise UnbalancedGamma(f"exponents of {g} do not sum to zero")
    terms = list(g.terms)
    finite = ShiftSum()
    const = Fraction(1)
    hpow = 0
    deficit = AffineShift()
    for o, e in terms:
        deficit = deficit + o.scale(e)
    if deficit != AffineShift():
        if deficit.ak != 0:
            raise UnbalancedGamma(f"level-dependent imbalance in {g}")
        for i, (o, e) in enumerate(terms):
            n = -deficit.a0 / e
            if n.denominator == 1:
                break
        else:
            raise UnbalancedGamma(f"no integer repair for {g}")
        n = int(n)
        # Gamma(z+o) = Gamma(z+o+n) / prod_{j=0}^{n-1} (z+o+j)    (n >= 0)
        # Gamma(z+o) = Gamma(z+o+n) * prod_{j=n}^{-1} (z+o+j)      (n < 0)
        rng, sgn = (range(n), -e) if n >= 0 else (range(n, 0), e)
        for j in rng:
            # (sigma*x/hbar + c) = (sigma/hbar) * (x + (c/sigma)*hbar)
            c = o + j
            finite = finite + ShiftSum.atom(c.scale(1 / sigma), sgn)
            const *= sigma**sgn
            hpow -= sgn
        terms[i] = (o + n, e)
    fams = ShiftSum()
    for o, e in terms:
        # Gamma(z+a) -> prod_l (z + a + l)**-1 ; the sigma/hbar factors cancel
        fams = fams + ShiftSum.family(o.scale(1 / sigma), 1 / sigma, -e)
    return FactorProduct(const, finite + fams, hpow).normalize()


# -- the R-matrix scalar factors --------------------------------------------


def rho_gamma(sign: int) -> GammaRatio:
    """``rho^{+}`` (sign=+1) or ``rho^{-}`` (sign=-1) as a Gamma ratio in u."""
    half = Fraction(1, 2)
    if sign > 0:
        return GammaRatio(((half, 2), (0, -1), (1, -1)), scale=-half)
    return GammaRatio(((half, -2), (0, 1), (1, 1)), scale=half)


def rho_plus() -> FactorProduct:
    return gamma_to_product(rho_gamma(+1))


def rho_minus() -> FactorProduct:
    return gamma_to_product(rho_gamma(-1))


rho = rho_plus
