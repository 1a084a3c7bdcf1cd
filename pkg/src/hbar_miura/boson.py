"""Three free bosons, normal-ordered vertex operators and their contractions.

Conventions (all spectral shifts in units of hbar)::

    [lambda_m, lambda_n] = (k+2)/2 m delta,   [p_lambda, q_lambda] = (k+2)/2
    [b_m, b_n]           = -m delta,          [p_b, q_b]           = -1
    [c_m, c_n]           =  m delta,          [p_c, q_c]           =  1

    X^-(u;A) =  sum_{n>0} X_{-n}/n (u+A)^n
    X^+(u;B) = -sum_{n>0} X_n/n (u+B)^{-n}
    :exp(X(u;A,B)): = exp(X^-(u;A)) e^{q_X} (u+B)^{p_X} exp(X^+(u;B))

A :class:`VertexOperator` stores, per boson, the creation legs, the
annihilation legs, the zero-mode powers ``(u+B)^{beta p_X}`` and the charge
``alpha`` of ``e^{alpha q_X}``, each as a :class:`ShiftSum`.  Moving the
annihilation/zero-mode part of ``V1(u)`` through the creation/charge part of
``V2(v)`` produces::

    prod ((u-v+B-A)/(u+B))^{g1 g2 c_X}  *  prod (u+B)^{beta alpha c_X}
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Sequence

import sympy

from .exact import AffineShift, CriticalLevelError, KCoeff, rat
from .factors import FactorProduct
from .shiftsum import ShiftSum

BOSONS = ("lambda", "b", "c")

K = sympy.Symbol("k")
HBAR = sympy.Symbol("hbar")


class NonScalarExchange(ValueError):
    """The exchange of two currents is not a single structure function."""


class UncancelledPole(ValueError):
    pass


def pairing(boson: str) -> KCoeff:
    """Contraction constant ``c_X`` (also the zero-mode pairing)."""
    if boson == "lambda":
        return KCoeff.monomial(Fraction(1, 2), 1)
    if boson == "b":
        return KCoeff.of(-1)
    if boson == "c":
        return KCoeff.of(1)
    raise KeyError(boson)


def _bidx(boson: str) -> int:
    return BOSONS.index(boson)


def _empty3() -> tuple[ShiftSum, ShiftSum, ShiftSum]:
    return (ShiftSum(), ShiftSum(), ShiftSum())


@dataclass(frozen=True)
class VertexOperator:
    creation: tuple[ShiftSum, ShiftSum, ShiftSum] = field(default_factory=_empty3)
    annihilation: tuple[ShiftSum, ShiftSum, ShiftSum] = field(default_factory=_empty3)
    zero_p: tuple[ShiftSum, ShiftSum, ShiftSum] = field(default_factory=_empty3)
    charge: tuple[KCoeff, KCoeff, KCoeff] = (KCoeff(), KCoeff(), KCoeff())
    prefactor: FactorProduct = field(default_factory=FactorProduct)

    # -- builders -----------------------------------------------------------
    @classmethod
    def identity(cls) -> "VertexOperator":
        return cls()

    @classmethod
    def full(cls, boson: str, coeff, A, B=None) -> "VertexOperator":
        """``:exp(coeff * X(u; A, B)):`` (``B`` defaults to ``A``)."""
        B = A if B is None else B
        i = _bidx(boson)
        c = KCoeff.of(coeff)
        v = cls()
        return v._with(i, creation=ShiftSum.atom(A, c), annihilation=ShiftSum.atom(B, c), zero_p=ShiftSum.atom(B, c), charge=c)

    @classmethod
    def plus(cls, boson: str, coeff, B) -> "VertexOperator":
        """``exp(coeff * X^+(u; B))``."""
        return cls()._with(_bidx(boson), annihilation=ShiftSum.atom(B, KCoeff.of(coeff)))

    @classmethod
    def minus(cls, boson: str, coeff, A) -> "VertexOperator":
        """``exp(coeff * X^-(u; A))``."""
        return cls()._with(_bidx(boson), creation=ShiftSum.atom(A, KCoeff.of(coeff)))

    @classmethod
    def minus_family(cls, boson: str, coeff, base, step) -> "VertexOperator":
        """``exp(coeff * sum_{l>=0} X^-(u; base + l*step))``."""
        return cls()._with(_bidx(boson), creation=ShiftSum.family(base, step, KCoeff.of(coeff)))

    @classmethod
    def zero_power(cls, boson: str, coeff, B) -> "VertexOperator":
        """``(u + B)^{coeff * p_X}``."""
        return cls()._with(_bidx(boson), zero_p=ShiftSum.atom(B, KCoeff.of(coeff)))

    def _with(self, i, creation=None, annihilation=None, zero_p=None, charge=None) -> "VertexOperator":
        cr, an, zp, ch = list(self.creation), list(self.annihilation), list(self.zero_p), list(self.charge)
        if creation is not None:
            cr[i] = cr[i] + creation
        if annihilation is not None:
            an[i] = an[i] + annihilation
        if zero_p is not None:
            zp[i] = zp[i] + zero_p
        if charge is not None:
            ch[i] = ch[i] + charge
        return replace(self, creation=tuple(cr), annihilation=tuple(an), zero_p=tuple(zp), charge=tuple(ch))

    # -- structure ----------------------------------------------------------
    def legs_concat(self, other: "VertexOperator") -> "VertexOperator":
        """Normal-ordered product ``:self other:`` at the same argument."""
        return VertexOperator(
            tuple(a + b for a, b in zip(self.creation, other.creation)),
            tuple(a + b for a, b in zip(self.annihilation, other.annihilation)),
            tuple(a + b for a, b in zip(self.zero_p, other.zero_p)),
            tuple(a + b for a, b in zip(self.charge, other.charge)),
            self.prefactor * other.prefactor,
        )

    def shifted(self, s) -> "VertexOperator":
        """The operator at argument ``u + s`` (prefactor in ``u`` shifts too)."""
        s = AffineShift.of(s)
        return VertexOperator(
            tuple(x.shifted(s) for x in self.creation),
            tuple(x.shifted(s) for x in self.annihilation),
            tuple(x.shifted(s) for x in self.zero_p),
            self.charge,
            self.prefactor.shifted(s),
        )

    @property
    def one_sided(self) -> bool:
        has_cr = any(self.creation) or any(self.charge)
        has_an = any(self.annihilation) or any(self.zero_p)
        return not (has_cr and has_an)

    def inverse(self) -> "VertexOperator":
        if not self.one_sided:
            raise ValueError("inverse is only implemented for one-sided operators")
        return VertexOperator(
            tuple(-x for x in self.creation),
            tuple(-x for x in self.annihilation),
            tuple(-x for x in self.zero_p),
            tuple(-c for c in self.charge),
            self.prefactor.inverse(),
        )

    def normalize(self) -> "VertexOperator":
        return VertexOperator(
            tuple(x.normalize() for x in self.creation),
            tuple(x.normalize() for x in self.annihilation),
            tuple(x.normalize() for x in self.zero_p),
            self.charge,
            self.prefactor.normalize(),
        )

    def key(self):
        return self._key

    @cached_property
    def _key(self):
        n = self.normalize()
        return (n.creation, n.annihilation, n.zero_p, n.charge, n.prefactor)

    def bosons_used(self) -> set[str]:
        used = set()
        for i, X in enumerate(BOSONS):
            if self.creation[i] or self.annihilation[i] or self.zero_p[i] or self.charge[i]:
                used.add(X)
        n = self.normalize()
        used = {X for i, X in enumerate(BOSONS) if n.creation[i] or n.annihilation[i] or n.zero_p[i] or n.charge[i]}
        return used

    def summary(self) -> str:
        n = self.normalize()
        parts = []
        for i, X in enumerate(BOSONS):
            bits = []
            if n.creation[i]:
                bits.append(f"{len(n.creation[i].finite)}+{len(n.creation[i].families)}fam creation")
            if n.annihilation[i]:
                bits.append(f"{len(n.annihilation[i].finite)} annihilation")
            if n.zero_p[i]:
                bits.append("zero-mode")
            if n.charge[i]:
                bits.append(f"q*({n.charge[i]})")
            if bits:
                parts.append(f"{X}: " + ", ".join(bits))
        return "; ".join(parts) or "identity"


# ---------------------------------------------------------------------------
# contractions


def _pair_shifts(ann: ShiftSum, cre: ShiftSum, expo: KCoeff) -> ShiftSum:
    """Exponent data of ``prod (x + B - A)^{g1 g2 expo}`` in ``x = u - v``."""
    out = ShiftSum()
    for (B, j1), g1 in ann.finite:
        if j1:
            raise ValueError("derivative legs only occur after critical specialization")
        for (A, j2), g2 in cre.finite:
            out = out + ShiftSum.atom(B - A, g1 * g2 * expo)
        for (A0, st, j2), g2 in cre.families:
            out = out + ShiftSum.family(B - A0, -st, g1 * g2 * expo)
    for (B0, st, j1), g1 in ann.families:
        if cre.families:
            raise ValueError("family-family contraction is not supported")
        for (A, j2), g2 in cre.finite:
            out = out + ShiftSum.family(B0 - A, st, g1 * g2 * expo)
    return out


def _total_weight(ss: ShiftSum) -> KCoeff:
    """Total weight of a creation leg sum.

    Each family ``c * sum_l X(b + l*step)`` counts ``c * (1/2 - b/step)``
    (Hurwitz regularization), which is invariant under the telescoping
    normalization.  Derivative legs carry no weight.
    """
    tot = KCoeff()
    for (_, j), g in ss.finite:
        if not j:
            tot = tot + g
    for (b, st, j), g in ss.families:
        if not j:
            a, alpha = b.kappa_form()
            tot = tot + g * (KCoeff.of(Fraction(1, 2) - a / st) - KCoeff.monomial(alpha / st, 1))
    return tot


def contraction(V1: VertexOperator, V2: VertexOperator, k=None) -> tuple[FactorProduct, FactorProduct]:
    """Scalar from reordering ``V1(u) V2(v)`` into ``:V1(u) V2(v):``.

    Returns ``(P_x, P_u)``: a product in ``x = u - v`` and a product in ``u``.
    With a rational ``k`` the exponents (which carry the pairings) are
    evaluated there.
    """
    px = ShiftSum()
    pu = ShiftSum()
    for i, X in enumerate(BOSONS):
        c = pairing(X)
        ann, cre = V1.annihilation[i], V2.creation[i]
        if ann and cre:
            px = px + _pair_shifts(ann, cre, c)
            w = _total_weight(cre)
            if w:
                pu = pu + ann.scale(-(w * c))
        alpha = V2.charge[i]
        if alpha and V1.zero_p[i]:
            pu = pu + V1.zero_p[i].scale(alpha * c)
    px, pu = FactorProduct(factors=px), FactorProduct(factors=pu)
    if k is not None:
        px, pu = _specialize_product(px, k), _specialize_product(pu, k)
    return px.normalize(), pu.normalize()


def _finite_poles(p: FactorProduct) -> ShiftSum:
    n = p.normalize().factors
    return ShiftSum([(key, e) for key, e in n.finite if e.is_constant and e.constant() < 0])


@dataclass(frozen=True)
class VOSum:
    """Finite formal sum of ``coefficient * vertex operator``.

    Coefficients are sympy rational functions of ``k`` and ``hbar``.
    """

    terms: tuple[tuple[sympy.Expr, VertexOperator], ...] = ()

    @classmethod
    def of(cls, vo: VertexOperator, coeff=1) -> "VOSum":
        return cls(((sympy.sympify(coeff), vo),))

    def __add__(self, other: "VOSum") -> "VOSum":
        return VOSum(self.terms + other.terms)

    def __neg__(self) -> "VOSum":
        return self.scale(-1)

    def __sub__(self, other: "VOSum") -> "VOSum":
        return self + (-other)

    def scale(self, c) -> "VOSum":
        c = sympy.sympify(c)
        return VOSum(tuple((c * a, v) for a, v in self.terms))

    def shifted(self, s) -> "VOSum":
        return VOSum(tuple((a, v.shifted(s)) for a, v in self.terms))

    def map(self, fn) -> "VOSum":
        return VOSum(tuple((a, fn(v)) for a, v in self.terms))

    def times(self, other: "VOSum") -> "VOSum":
        """Operator product ``self * other`` at equal argument.

        Only products that need no reordering scalar are accepted (this is
        the case for every product in the Sugawara assembly).
        """
        out = []
        for a, v in self.terms:
            for b, w in other.terms:
                px, pu = contraction(v, w)
                if not (px.is_one() and pu.is_one()):
                    raise ValueError("product needs a coincident-point contraction")
                out.append((a * b, v.legs_concat(w)))
        return VOSum(tuple(out))

    def collect(self, k=None) -> "VOSum":
        """Combine terms with identical canonical operators.

        With ``k`` given, coefficients are evaluated there first.
        """
        acc: dict = {}
        order = []
        reps = {}
        for a, v in self.terms:
            key = v.key()
            if key not in acc:
                acc[key] = sympy.Integer(0)
                order.append(key)
                reps[key] = v.normalize()
            if k is not None:
                a = sympy.sympify(a).subs(K, sympy.Rational(str(k)))
            acc[key] = acc[key] + a
        terms = []
        for key in order:
            c = sympy.factor(sympy.cancel(acc[key]))
            if c != 0:
                terms.append((c, reps[key]))
        return VOSum(tuple(terms))

    def is_zero(self) -> bool:
        return not self.collect().terms

    def __len__(self) -> int:
        return len(self.terms)


def exchange_factor(a: VOSum, b: VOSum, k=None) -> FactorProduct:
    """``r`` with ``a(u) b(v) = r(u - v) b(v) a(u)`` as a formal identity.

    Every term pair must give the same ratio, and each contraction's finite
    poles must be cleared by the denominator of ``r``; otherwise the
    commutator carries delta-function terms and NonScalarExchange is raised.
    """
    ratios = []
    contractions = []
    for _, v in a.terms:
        for _, w in b.terms:
            px, pu = contraction(v, w, k)
            qy, qv = contraction(w, v, k)
            if not (pu.is_one() and qv.is_one()):
                raise NonScalarExchange("contraction depends on u or v separately")
            r = (px / qy.negated()).normalize()
            ratios.append(r)
            contractions.append(px)
    r0 = ratios[0]
    for r in ratios[1:]:
        if not r.equals(r0):
            raise NonScalarExchange("term-dependent exchange ratios")
    den = FactorProduct(factors=_finite_poles(r0)).inverse()
    for px in contractions:
        if _finite_poles(px * den):
            raise NonScalarExchange("contraction poles not cleared by the structure function")
    return r0


def shift_expr(s: AffineShift) -> sympy.Expr:
    s = AffineShift.of(s)
    return sympy.Rational(s.a0.numerator, s.a0.denominator) + sympy.Rational(s.ak.numerator, s.ak.denominator) * K


def simple_residues(p: FactorProduct) -> list[tuple[AffineShift, sympy.Expr]]:
    """Residues of a finite rational product at its poles ``x = x0``.

    Only simple poles are supported; a higher-order pole raises
    UncancelledPole.
    """
    n = p.normalize()
    if n.factors.families:
        raise UncancelledPole("infinitely many poles")
    atoms = []
    for (s, j), e in n.factors.finite:
        if not e.is_integer():
            raise UncancelledPole(f"non-integer exponent {e}")
        atoms.append((s, int(e.constant())))
    out = []
    const = sympy.Rational(n.constant.numerator, n.constant.denominator) * HBAR ** n.hbar_power
    for s0, e0 in atoms:
        if e0 >= 0:
            continue
        if e0 < -1:
            raise UncancelledPole(f"pole of order {-e0} at x = {-s0}")
        val = const
        for s, e in atoms:
            if s != s0:
                val *= shift_expr(s - s0) ** e
        out.append((-s0, sympy.cancel(val)))
    return out


def normal_order_ef(e: VOSum, f: VOSum, kernels: Sequence[FactorProduct] | None = None) -> VOSum:
    """Normal-ordered product ``:e(u) f(u):`` by residues.

    With the default kernel ``1/x`` (``x = u - v``) this is the mode-level
    product ``e(u) f^+(u) - f^-(u) e(u)``: the two orderings share one
    rational contraction ``R(x)``, so the difference of the two contour
    integrals is the sum over poles ``x0`` of ``R(x)/x`` of
    ``Res * :e(u) f(u - x0):``.  ``kernels`` replaces ``1/x`` per term of
    ``f``, which gives the shifted-contour definition.
    """
    out = VOSum()
    for a, ei in e.terms:
        for idx, (b, fj) in enumerate(f.terms):
            px, pu = contraction(ei, fj)
            qy, qv = contraction(fj, ei)
            if not (pu.is_one() and qv.is_one()):
                raise NonScalarExchange("contraction depends on u or v separately")
            if not (px / qy.negated()).normalize().is_one():
                raise NonScalarExchange("the two orderings have different contractions")
            kern = FactorProduct.linear(0, -1) if kernels is None else kernels[idx]
            for x0, res in simple_residues(px * kern):
                vo = ei.legs_concat(fj.shifted(-x0)).normalize()
                out = out + VOSum.of(vo, a * b * res)
    return out


def describe(vo: VertexOperator) -> str:
    """Readable leg listing of a canonical operator."""
    n = vo.normalize()
    out = []
    for i, X in enumerate(BOSONS):
        for label, ss in (("-", n.creation[i]), ("+", n.annihilation[i]), ("p", n.zero_p[i])):
            for (s, j), c in ss.finite:
                out.append(f"{X}{label}[{s}]*{c}" + (f"'{j}" if j else ""))
            for (b, st, j), c in ss.families:
                out.append(f"{X}{label}fam[{b};{st}]*{c}" + (f"'{j}" if j else ""))
        if n.charge[i]:
            out.append(f"q_{X}*{n.charge[i]}")
    if not n.prefactor.is_one():
        out.append(f"pref {n.prefactor}")
    return " ".join(out) or "1"


def specialize_shiftsum(ss: ShiftSum, k) -> ShiftSum:
    """Substitute a rational level into a leg sum.

    Away from ``k = -2`` this is plain substitution.  At the critical level
    a coefficient ``c(kappa)`` with poles in ``kappa = k+2`` is combined
    with the Taylor expansion of its k-dependent shift,
    ``X(a + alpha*kappa) = sum_m alpha^m/m! kappa^m X^{(m)}(a)``, and only the
    ``kappa^0`` part is kept; negative powers must cancel in total,
    otherwise CriticalLevelError is raised.
    """
    k = rat(k)
    if k != -2:
        fin = [((AffineShift(s.at(k)), j), c.at(k)) for (s, j), c in ss.finite]
        fam = [((AffineShift(b.at(k)), st, j), c.at(k)) for (b, st, j), c in ss.families]
        return ShiftSum(fin, fam)
    by_power: dict[int, tuple[list, list]] = {}

    def emit(t, kind, key, val):
        fin, fam = by_power.setdefault(t, ([], []))
        (fin if kind == "fin" else fam).append((key, val))

    for kind, items in (("fin", ss.finite), ("fam", ss.families)):
        for key, c in items:
            base = key[0]
            a, alpha = base.kappa_form()
            j = key[-1]
            for p, cp in c.terms:
                if p > 0:
                    continue
                for m in range(0, -p + 1):
                    if m and not alpha:
                        break
                    w = cp * alpha**m / factorial(m)
                    if kind == "fin":
                        emit(p + m, kind, (AffineShift(a), j + m), w)
                    else:
                        emit(p + m, kind, (AffineShift(a), key[1], j + m), w)
    for t, (fin, fam) in by_power.items():
        if t < 0 and ShiftSum(fin, fam).normalize():
            raise CriticalLevelError(f"leg sum has a surviving (k+2)^{t} part")
    fin, fam = by_power.get(0, ([], []))
    return ShiftSum(fin, fam)


def _specialize_product(p: FactorProduct, k) -> FactorProduct:
    fin = [((AffineShift(s.at(k)), j), e.at(k)) for (s, j), e in p.factors.finite]
    fam = [((AffineShift(b.at(k)), st, j), e.at(k)) for (b, st, j), e in p.factors.families]
    return FactorProduct(p.constant, ShiftSum(fin, fam), p.hbar_power)


def specialize(vo: VertexOperator, k) -> VertexOperator:
    """The operator at a rational level (all shifts constant)."""
    return VertexOperator(
        tuple(specialize_shiftsum(x, k) for x in vo.creation),
        tuple(specialize_shiftsum(x, k) for x in vo.annihilation),
        tuple(specialize_shiftsum(x, k) for x in vo.zero_p),
        tuple(KCoeff.of(c.at(k)) for c in vo.charge),
        _specialize_product(vo.prefactor, k),
    ).normalize()


def vosum_at(vs: VOSum, k) -> VOSum:
    """Specialize coefficients and operators to ``k``, then collect."""
    kk = sympy.Rational(str(rat(k)))
    terms = []
    for a, v in vs.terms:
        c = sympy.cancel(sympy.sympify(a).subs(K, kk))
        if c.has(sympy.zoo) or c.has(sympy.nan):
            raise CriticalLevelError(f"coefficient {a} is singular at k={k}")
        terms.append((c, specialize(v, k)))
    return VOSum(tuple(terms)).collect()


def delta_decomposition(a: VOSum, b: VOSum) -> dict[AffineShift, VOSum]:
    """Commutator ``[a(u), b(v)]`` as ``sum_x0 delta(u - v - x0*hbar) * T_x0(u)``.

    The two orderings share the rational contraction ``R(x)``; the
    difference of its two expansions is ``hbar * sum Res_{x0} R * delta``.
    Returns ``{x0: T_x0}`` with ``T_x0(u) = hbar * sum Res :a(u) b(u - x0):``.
    """
    out: dict[AffineShift, VOSum] = {}
    for ca, v in a.terms:
        for cb, w in b.terms:
            px, pu = contraction(v, w)
            qy, qv = contraction(w, v)
            if not (pu.is_one() and qv.is_one()):
                raise NonScalarExchange("contraction depends on u or v separately")
            if not (px / qy.negated()).normalize().is_one():
                raise NonScalarExchange("orderings differ by a nontrivial structure function")
            for x0, res in simple_residues(px):
                vo = v.legs_concat(w.shifted(-x0)).normalize()
                out[x0] = out.get(x0, VOSum()) + VOSum.of(vo, ca * cb * res * HBAR)
    return out
