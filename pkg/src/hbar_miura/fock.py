"""Charged triple-boson Fock spaces and the exact action of vertex operators.

A basis vector is ``prod X_{-n} |l, s, t>`` (unnormalized monomials), stored
as charges plus one partition per boson.  Applying an operator ``V(u)``
produces a formal series in ``u`` whose exponents are ``E + integer`` with
``E`` fixed by the zero-mode eigenvalues of the charge sector; results are
maps ``exponent -> FockVector``.

Truncation: output states are kept up to total mode degree ``cutoff``, and
the negative-power tail in ``u`` is kept down to ``floor``.  Both are exact
for every retained coefficient.

Creation families ``sum_{l>=0} X^-(u; b + l*step)`` are summed with the
Hurwitz regularization ``sum_l (z + l*S)^m = -S^m B_{m+1}(z/S)/(m+1)``, which
obeys the same telescoping rule as the symbolic leg sums.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
import math
from math import comb, factorial
from typing import Iterable, Mapping, NamedTuple

import sympy
from gmpy2 import mpq

from .boson import BOSONS, HBAR, K, VOSum, VertexOperator, contraction, pairing, specialize
from .factors import FactorProduct
from .exact import rat
from .shiftsum import ShiftSum


class NonRationalPower(ValueError):
    pass


class FockState(NamedTuple):
    """``prod X_{-n} |l, s, t>`` with ``parts[i]`` sorted descending."""

    l: mpq
    s: mpq
    t: mpq
    parts: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]] = ((), (), ())

    @classmethod
    def vacuum(cls, l=0, s=0, t=0) -> "FockState":
        return cls(mpq(rat(l)), mpq(rat(s)), mpq(rat(t)))

    @property
    def degree(self) -> int:
        return sum(sum(p) for p in self.parts)

    def __str__(self) -> str:
        modes = " ".join(f"{X}_-{n}" for X, p in zip(BOSONS, self.parts) for n in p)
        return f"{modes + ' ' if modes else ''}|{self.l},{self.s},{self.t}>"


class FockVector(dict):
    """Finite linear combination ``{FockState: Fraction}``."""

    @classmethod
    def basis(cls, state: FockState) -> "FockVector":
        return cls({state: ONE})

    def add(self, other: Mapping, scale=1) -> "FockVector":
        for st, c in other.items():
            v = self.get(st, 0) + c * scale
            if v:
                self[st] = v
            else:
                self.pop(st, None)
        return self

    def scaled(self, c) -> "FockVector":
        return FockVector({st: v * c for st, v in self.items() if v * c})

    def truncated(self, cutoff: int) -> "FockVector":
        return FockVector({st: v for st, v in self.items() if st.degree <= cutoff})

    def is_zero(self) -> bool:
        return not any(self.values())

    def to_json(self) -> list:
        return [
            {"charges": [str(st.l), str(st.s), str(st.t)], "parts": [list(p) for p in st.parts], "coeff": str(c)}
            for st, c in sorted(self.items(), key=lambda kv: (kv[0].degree, kv[0]))
        ]


def _partitions(n: int, maxpart: int | None = None):
    maxpart = n if maxpart is None else maxpart
    if n == 0:
        yield ()
        return
    for first in range(min(n, maxpart), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _triples(degree: int) -> tuple:
    out = []
    for a in range(degree + 1):
        for b in range(degree - a + 1):
            c = degree - a - b
            for pa in _partitions(a):
                for pb in _partitions(b):
                    for pc in _partitions(c):
                        out.append((pa, pb, pc))
    return tuple(out)


def states_up_to(cutoff: int, charges: Iterable[tuple] = ((0, 0, 0),)) -> list[FockState]:
    """All basis states of degree <= cutoff in the given charge sectors."""
    out = []
    for l, s, t in charges:
        for d in range(cutoff + 1):
            for parts in _triples(d):
                out.append(FockState(mpq(rat(l)), mpq(rat(s)), mpq(rat(t)), parts))
    return out


def charge_sectors(radius: int = 1) -> list[tuple[int, int, int]]:
    r = range(-radius, radius + 1)
    return [(l, s, t) for l in r for s in r for t in r]


# ---------------------------------------------------------------------------
# truncated Laurent arithmetic (integer exponents, dropped below ``floor``)

Series = dict  # int -> mpq
ONE = mpq(1)


def _smul(a: Series, b: Series, floor: int) -> Series:
    out: Series = {}
    for i, x in a.items():
        for j, y in b.items():
            p = i + j
            if p >= floor:
                out[p] = out.get(p, 0) + x * y
    return {p: c for p, c in out.items() if c}


def _binom_general(e: Fraction, j: int) -> Fraction:
    e, out = mpq(e), ONE
    for i in range(j):
        out *= (e - i)
    return out / factorial(j)


def _shifted_power(c: Fraction, e: Fraction, floor: int) -> tuple[Fraction, Series]:
    """``(u + c)^e = u^e * sum_j binom(e, j) c^j u^{-j}``; returns ``(e, series)``."""
    series: Series = {}
    c = mpq(c)
    j = 0
    while -j >= floor:
        if c == 0 and j > 0:
            break
        b = _binom_general(e, j)
        if b == 0 and e.denominator == 1 and e >= 0 and j > e:
            break
        term = b * c**j
        if term:
            series[-j] = term
        j += 1
    return e, series


@lru_cache(maxsize=None)
def _bernoulli_poly(n: int) -> tuple[Fraction, ...]:
    """Coefficients of ``B_n(x)`` from degree 0 upward."""
    x = sympy.Symbol("x")
    coeffs = sympy.Poly(sympy.bernoulli(n, x), x).all_coeffs()[::-1]
    return tuple(mpq(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in coeffs)


def _poly_shift(coeffs_in_z: dict[int, Fraction], c: Fraction) -> dict[int, Fraction]:
    """Rewrite a polynomial in ``z = u + c`` as a polynomial in ``u``."""
    out: dict[int, Fraction] = {}
    for p, a in coeffs_in_z.items():
        for i in range(p + 1):
            out[i] = out.get(i, 0) + a * comb(p, i) * c ** (p - i)
    return {i: v for i, v in out.items() if v}


def hurwitz_power_sum(m: int, c: Fraction, S: Fraction) -> dict[int, Fraction]:
    """Regularized ``sum_{l>=0} (u + c + l*S)^m`` as a polynomial in ``u``."""
    B = _bernoulli_poly(m + 1)
    in_z = {}
    for d, bd in enumerate(B):
        if bd:
            # -S^m/(m+1) * bd * (z/S)^d
            in_z[d] = -bd * S ** (m - d) / (m + 1)
    return _poly_shift(in_z, c)


# ---------------------------------------------------------------------------
# application of a single operator with constant shifts


def _creation_polys(vo: VertexOperator, hbar: Fraction, budget: int) -> list[dict[int, dict[int, Fraction]]]:
    """Per boson: ``n -> polynomial in u`` multiplying ``X_{-n}``."""
    out = []
    for i in range(3):
        ss = vo.creation[i]
        per_n: dict[int, dict[int, Fraction]] = {}
        for n in range(1, budget + 1):
            poly: dict[int, Fraction] = {}
            for (s, j), c in ss.finite:
                if j > n:
                    continue
                g = mpq(c.constant()) * mpq(factorial(n), factorial(n - j)) * hbar**j / n
                for p, a in _poly_shift({n - j: ONE}, s.a0 * hbar).items():
                    poly[p] = poly.get(p, 0) + g * a
            for (b, st, j), c in ss.families:
                if j > n:
                    continue
                g = mpq(c.constant()) * mpq(factorial(n), factorial(n - j)) * hbar**j / n
                for p, a in hurwitz_power_sum(n - j, b.a0 * hbar, st * hbar).items():
                    poly[p] = poly.get(p, 0) + g * a
            poly = {p: a for p, a in poly.items() if a}
            if poly:
                per_n[n] = poly
        out.append(per_n)
    return out


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict[int, Fraction] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return {p: c for p, c in out.items() if c}


_CREATION_CACHE: dict = {}


def _creation_expansion(vo: VertexOperator, hbar: Fraction, budget: int) -> list[tuple[tuple, int, dict]]:
    """Terms ``(added parts, degree, polynomial)`` of ``exp(creation)`` up to ``budget``."""
    key = (vo.key(), hbar, budget)
    hit = _CREATION_CACHE.get(key)
    if hit is not None:
        return hit
    polys = _creation_polys(vo, hbar, budget)
    entries = [(((), (), ()), 0, {0: ONE})]
    for i in range(3):
        for n, poly in sorted(polys[i].items()):
            new = []
            for parts, deg, pol in entries:
                cur = pol
                r = 0
                while deg + r * n <= budget:
                    if r:
                        cur = _poly_mul(cur, poly)
                        cur = {p: c / r for p, c in cur.items()}
                    plist = list(parts)
                    plist[i] = parts[i] + (n,) * r
                    new.append((tuple(plist), deg + r * n, cur))
                    r += 1
            entries = new
    _CREATION_CACHE[key] = entries
    return entries


def _alpha(ss: ShiftSum, n: int, hbar: Fraction, floor: int) -> Series:
    """``-sum_legs gamma (u+B)^{-n} / n`` truncated at ``floor``."""
    if ss.families:
        raise ValueError("annihilation families are not supported by the Fock engine")
    alpha: Series = {}
    for (s, j), c in ss.finite:
        if j:
            raise ValueError("derivative annihilation legs are not supported")
        _, ser = _shifted_power(s.a0 * hbar, Fraction(-n), floor + n)
        for p, a in ser.items():
            alpha[p - n] = alpha.get(p - n, 0) - mpq(c.constant()) * a / n
    return {p: a for p, a in alpha.items() if a}


def _exp_annihilation(state: FockState, k: Fraction, alpha_of, mul, one, start=None, mul_acc=None):
    """``exp(annihilation) state`` as a list of ``(remaining parts, series)``.

    ``alpha_of(i, n)`` gives the coefficient series of ``X_n`` for boson ``i``
    (``None`` when that boson has no annihilation legs); ``mul`` multiplies
    two series; results are multiplied onto ``start`` (default ``one``) with
    ``mul_acc`` (default ``mul``).
    Acting ``X_n^r`` on ``X_{-n}^m`` gives ``(c_X n)^r m!/(m-r)!``.
    """
    results = [((), one if start is None else start)]
    mul_acc = mul_acc or mul
    for i, X in enumerate(BOSONS):
        parts = state.parts[i]
        cX = pairing(X).at(k)
        counts: dict[int, int] = {}
        for n in parts:
            counts[n] = counts.get(n, 0) + 1
        if cX == 0 or not counts or alpha_of(i, 1) is None:
            results = [(rem + (parts,), ser) for rem, ser in results]
            continue
        options = []
        for n, m in sorted(counts.items()):
            alpha = alpha_of(i, n)
            choices = []
            cur = one
            for r in range(m + 1):
                if r:
                    cur = mul(cur, alpha)
                if not cur:
                    break
                w = mpq(cX * n) ** r * mpq(factorial(m), factorial(m - r) * factorial(r))
                choices.append((n, m - r, {p: a * w for p, a in cur.items()}))
            options.append(choices)
        new_results = []
        for rem, ser in results:
            partial = [((), ser)]
            for choices in options:
                nxt = []
                for kept, s0 in partial:
                    for n, left, s1 in choices:
                        prod = mul_acc(s0, s1)
                        if prod:
                            nxt.append((kept + (n,) * left, prod))
                partial = nxt
            for kept, s0 in partial:
                new_results.append((rem + (tuple(sorted(kept, reverse=True)),), s0))
        results = new_results
    return results


def _annihilation_terms(vo: VertexOperator, state: FockState, k: Fraction, hbar: Fraction, floor: int):
    def alpha_of(i, n):
        ss = vo.annihilation[i]
        return _alpha(ss, n, hbar, floor) if ss else None

    return _exp_annihilation(state, k, alpha_of, lambda a, b: _smul(a, b, floor), {0: ONE})


def _zero_mode_factor(vo: VertexOperator, state: FockState, hbar: Fraction, floor: int) -> tuple[Fraction, Series]:
    eig = (state.l / 2, -state.s, state.t)
    E = Fraction(0)
    series: Series = {0: ONE}
    for i in range(3):
        for (s, j), c in vo.zero_p[i].finite:
            if j:
                raise ValueError("derivative zero-mode legs are not supported")
            e = c.constant() * eig[i]
            if not e:
                continue
            e0, ser = _shifted_power(s.a0 * hbar, e, floor)
            E += e0
            series = _smul(series, ser, floor)
        if vo.zero_p[i].families:
            raise ValueError("zero-mode families are not supported")
    return E, series


def _prefactor(vo: VertexOperator, hbar: Fraction, floor: int) -> tuple[Fraction, Series]:
    p = vo.prefactor
    if p.factors.families:
        raise ValueError("prefactor families are not supported")
    E = Fraction(0)
    series: Series = {0: mpq(p.constant) * mpq(hbar) ** p.hbar_power}
    for (s, j), e in p.factors.finite:
        e0, ser = _shifted_power(s.a0 * hbar, e.constant(), floor)
        E += e0
        series = _smul(series, ser, floor)
    return E, series


def apply_vo(vo: VertexOperator, state: FockState, cutoff: int, k, hbar=1, floor: int = -8) -> dict[Fraction, FockVector]:
    """Exact action of a specialized operator on one basis state.

    Returns ``{exponent of u: FockVector}`` with output degree <= cutoff; every
    exponent >= floor is exact (a few below it may appear too).
    """
    k, hbar = rat(k), rat(hbar)
    # exponents are E + (integer); translate the absolute floor to the integer part
    E = _prefactor(vo, hbar, 0)[0] + _zero_mode_factor(vo, state, hbar, 0)[0]
    floor = math.floor(rat(floor) - E)
    inner_floor = floor - cutoff - 1
    out: dict[Fraction, FockVector] = {}
    E_pre, pre = _prefactor(vo, hbar, inner_floor)
    E_zero, zser = _zero_mode_factor(vo, state, hbar, inner_floor)
    base = _smul(pre, zser, inner_floor)
    qshift = tuple(c.at(k) if c else Fraction(0) for c in vo.charge)
    l2 = mpq(state.l + qshift[0] * (k + 2))
    s2 = mpq(state.s + qshift[1])
    t2 = mpq(state.t + qshift[2])
    E = E_pre + E_zero
    for rem, ser in _annihilation_terms(vo, state, k, hbar, inner_floor):
        ser = _smul(ser, base, inner_floor)
        if not ser:
            continue
        rem_deg = sum(sum(p) for p in rem)
        if rem_deg > cutoff:
            continue
        for added, deg, poly in _creation_expansion(vo, hbar, max(0, cutoff - rem_deg)):
            parts = tuple(tuple(sorted(rem[i] + added[i], reverse=True)) for i in range(3))
            st = FockState(l2, s2, t2, parts)
            for p, a in _smul(poly, ser, floor).items():
                key = E + p
                vec = out.setdefault(key, FockVector())
                vec.add({st: a})
    return {p: v for p, v in out.items() if not v.is_zero()}


# ---------------------------------------------------------------------------
# products A(u) B(v) via the contraction, without an intermediate basis

Series2 = dict  # (int, int) -> Fraction


def _smul2(a: Series2, b: Series2, fu: int, fv: int) -> Series2:
    out: Series2 = {}
    for (i1, j1), x in a.items():
        for (i2, j2), y in b.items():
            i, j = i1 + i2, j1 + j2
            if i >= fu and j >= fv:
                out[(i, j)] = out.get((i, j), 0) + x * y
    return {p: c for p, c in out.items() if c}


def _in_u(ser: Series) -> Series2:
    return {(p, 0): c for p, c in ser.items()}


def _in_v(ser: Series) -> Series2:
    return {(0, p): c for p, c in ser.items()}


def _difference_power(c: Fraction, e: Fraction, fu: int) -> Series2:
    """``(u - v + c)^e / u^e`` expanded for ``|u| > |v|``, u-exponents >= ``fu``."""
    out: Series2 = {}
    j = 0
    while -j >= fu:
        bj = _binom_general(e, j) * (-1) ** j
        if bj == 0 and e.denominator == 1 and e >= 0:
            break
        _, ser = _shifted_power(c, e - j, fu + j)
        for p, a in ser.items():
            out[(p - j, j)] = bj * a
        j += 1
    return {p: a for p, a in out.items() if a}


def _product_factor(p: FactorProduct, hbar: Fraction, fu: int) -> tuple[Fraction, Series]:
    if p.factors.families:
        raise ValueError("contraction families are not supported by the pair engine")
    E = Fraction(0)
    series: Series = {0: mpq(p.constant) * mpq(hbar) ** p.hbar_power}
    for (s, j), e in p.factors.finite:
        e0, ser = _shifted_power(s.a0 * hbar, e.constant(), fu)
        E += e0
        series = _smul(series, ser, fu)
    return E, series


def apply_pair(va: VertexOperator, vb: VertexOperator, state: FockState, cutoff: int, k, hbar=1,
               floor_u=-8, floor_v=-8, ceil_u=None, ceil_v=None) -> dict[tuple, FockVector]:
    """Exact ``A(u) B(v) state`` for ``|u| > |v|`` keyed by ``(exponent of u, exponent of v)``.

    Uses ``A(u) B(v) = P_x(u-v) P_u(u) :A(u) B(v):`` so no intermediate
    truncation is involved.  Output degree <= cutoff; exponents within
    ``[floor, ceil]`` are exact (terms above a ceiling may be dropped).
    """
    k, hbar = rat(k), rat(hbar)
    px, pu = contraction(va, vb, k)
    E_px = sum((e.constant() for _, e in px.factors.finite), Fraction(0))
    E_u = (_prefactor(va, hbar, 0)[0] + _zero_mode_factor(va, state, hbar, 0)[0]
           + _product_factor(pu, hbar, 0)[0] + E_px)
    E_v = _prefactor(vb, hbar, 0)[0] + _zero_mode_factor(vb, state, hbar, 0)[0]
    fu = math.floor(rat(floor_u) - E_u)
    fv = math.floor(rat(floor_v) - E_v)
    # creation polynomials raise u (or v) by at most ``cutoff``; P_x trades u
    # for v, so only the factors multiplied before it need the deeper v floor
    fu_in = fu - cutoff - 1
    fv_in = fv - cutoff - 1
    fv_deep = fv_in - max(0, cutoff - fu)
    deep = lambda a, b: _smul2(a, b, fu_in, fv_deep)  # noqa: E731
    mul = lambda a, b: _smul2(a, b, fu_in, fv_in)  # noqa: E731

    base: Series2 = {(0, 0): mpq(px.constant) * mpq(hbar) ** px.hbar_power}
    for ser in (_prefactor(va, hbar, fu_in)[1], _zero_mode_factor(va, state, hbar, fu_in)[1],
                _product_factor(pu, hbar, fu_in)[1]):
        base = deep(base, _in_u(ser))
    for ser in (_prefactor(vb, hbar, fv_deep)[1], _zero_mode_factor(vb, state, hbar, fv_deep)[1]):
        base = deep(base, _in_v(ser))
    if px.factors.families:
        raise ValueError("contraction families are not supported by the pair engine")
    for (s, j), e in px.factors.finite:
        base = deep(base, _difference_power(s.a0 * hbar, e.constant(), fu_in))
    base = {key: c for key, c in base.items() if key[1] >= fv_in}

    def alpha_of(i, n):
        sa, sb = va.annihilation[i], vb.annihilation[i]
        if not (sa or sb):
            return None
        out = _in_u(_alpha(sa, n, hbar, fu_in)) if sa else {}
        for key, c in (_in_v(_alpha(sb, n, hbar, fv_deep)) if sb else {}).items():
            out[key] = out.get(key, 0) + c
        return {p: c for p, c in out.items() if c}

    charge = [(a.at(k) if a else 0) + (b.at(k) if b else 0) for a, b in zip(va.charge, vb.charge)]
    l2 = mpq(state.l + charge[0] * (k + 2))
    s2 = mpq(state.s + charge[1])
    t2 = mpq(state.t + charge[2])
    out: dict[tuple, FockVector] = {}
    top_u = math.inf if ceil_u is None else math.floor(rat(ceil_u) - E_u)
    top_v = math.inf if ceil_v is None else math.floor(rat(ceil_v) - E_v)
    for rem, ser in _exp_annihilation(state, k, alpha_of, deep, {(0, 0): ONE}, base, mul):
        rem_deg = sum(sum(p) for p in rem)
        if rem_deg > cutoff:
            continue
        # creation polynomials only raise exponents
        ser = {key: c for key, c in ser.items() if key[0] <= top_u and key[1] <= top_v}
        if not ser:
            continue
        budget = cutoff - rem_deg
        for add_a, deg_a, poly_a in _creation_expansion(va, hbar, budget):
            ser_a = _smul2(_in_u(poly_a), ser, fu, fv_in)
            ser_a = {key: c for key, c in ser_a.items() if key[0] <= top_u}
            if not ser_a:
                continue
            for add_b, deg_b, poly_b in _creation_expansion(vb, hbar, budget - deg_a):
                parts = tuple(tuple(sorted(rem[i] + add_a[i] + add_b[i], reverse=True)) for i in range(3))
                st = FockState(l2, s2, t2, parts)
                for key, a in _smul2(_in_v(poly_b), ser_a, fu, fv).items():
                    vec = out.get(key)
                    if vec is None:
                        vec = out[key] = FockVector()
                    vec.add({st: a})
    return {(E_u + i, E_v + j): v for (i, j), v in out.items() if not v.is_zero()}


# ---------------------------------------------------------------------------
# operator sums at a fixed level


class FockOperator:
    """A VOSum specialized to a rational level and hbar, acting on Fock vectors."""

    def __init__(self, op: VOSum | VertexOperator, k, hbar=1):
        if isinstance(op, VertexOperator):
            op = VOSum.of(op)
        self.k, self.hbar = rat(k), rat(hbar)
        kk = sympy.Rational(self.k.numerator, self.k.denominator)
        hh = sympy.Rational(self.hbar.numerator, self.hbar.denominator)
        self.terms = []
        for a, v in op.terms:
            c = sympy.nsimplify(sympy.sympify(a).subs({K: kk, HBAR: hh}))
            if not c.is_rational:
                raise NonRationalPower(f"coefficient {a} is not rational at k={k}")
            c = mpq(int(c.p), int(c.q))
            if c:
                self.terms.append((c, specialize(v, self.k)))

    def series(self, vec: FockVector | FockState, cutoff: int, floor: int = -8) -> dict[Fraction, FockVector]:
        if isinstance(vec, FockState):
            vec = FockVector.basis(vec)
        out: dict[Fraction, FockVector] = {}
        for st, c in vec.items():
            for a, v in self.terms:
                for p, w in apply_vo(v, st, cutoff, self.k, self.hbar, floor).items():
                    out.setdefault(p, FockVector()).add(w, a * c)
        return {p: v for p, v in out.items() if not v.is_zero()}

    def mode(self, m, vec: FockVector | FockState, cutoff: int) -> FockVector:
        """Coefficient of ``u^{-m-1}`` of the action (``m`` may be fractional)."""
        m = rat(m)
        p = -m - 1
        floor = int(p.numerator // p.denominator) - 1
        res = self.series(vec, cutoff, floor)
        return res.get(p, FockVector())

    def coefficient(self, power, vec, cutoff: int) -> FockVector:
        power = rat(power)
        floor = int(power.numerator // power.denominator) - 1
        return self.series(vec, cutoff, floor).get(power, FockVector())


def series_difference(a: dict, b: dict) -> dict:
    out: dict[Fraction, FockVector] = {}
    for p, v in a.items():
        out.setdefault(p, FockVector()).add(v)
    for p, v in b.items():
        out.setdefault(p, FockVector()).add(v, -1)
    return {p: v for p, v in out.items() if not v.is_zero()}


class DerivationCharge:
    """``d = d_lambda + d_b + d_c`` acting on Fock vectors (k != -2).

    ``d_X = c_X^{-1} (X_{-1} p_X + sum_{n>0} X_{-(n+1)} X_n)``, i.e. the
    operator with ``[d, X_{-n}] = n X_{-(n+1)}`` lifted from the vacuum.
    """

    def __init__(self, k):
        from .exact import CriticalLevelError

        self.k = rat(k)
        if self.k == -2:
            raise CriticalLevelError("d_lambda carries 2/(k+2) and is undefined at k = -2")

    def act(self, vec: FockVector | FockState) -> FockVector:
        if isinstance(vec, FockState):
            vec = FockVector.basis(vec)
        out = FockVector()
        for st, c in vec.items():
            eig = (st.l / 2, -st.s, st.t)
            for i, X in enumerate(BOSONS):
                cX = pairing(X).at(self.k)
                pref = 1 / cX
                # X_{-1} p_X term
                if eig[i]:
                    parts = list(st.parts)
                    parts[i] = tuple(sorted(st.parts[i] + (1,), reverse=True))
                    out.add({FockState(st.l, st.s, st.t, tuple(parts)): pref * eig[i]}, c)
                # sum_n X_{-(n+1)} X_n
                counts: dict[int, int] = {}
                for n in st.parts[i]:
                    counts[n] = counts.get(n, 0) + 1
                for n, m in counts.items():
                    lst = list(st.parts[i])
                    lst.remove(n)
                    lst.append(n + 1)
                    parts = list(st.parts)
                    parts[i] = tuple(sorted(lst, reverse=True))
                    out.add({FockState(st.l, st.s, st.t, tuple(parts)): pref * cX * n * m}, c)
        return out


def product_series(A: FockOperator, B: FockOperator, vec, cutoff: int, floor_a, floor_b, margin: int = 4) -> dict:
    """Coefficients of ``u^p v^q`` in ``A(u) B(v) vec`` keyed ``(p, q)``, degree <= cutoff.

    The intermediate vector is kept to degree ``cutoff + margin``.
    """
    out: dict[tuple, FockVector] = {}
    for q, mid in B.series(vec, cutoff + margin, floor_b).items():
        for p, w in A.series(mid, cutoff, floor_a).items():
            out[(p, q)] = w
    return out


def pair_series(A: FockOperator, B: FockOperator, vec, cutoff: int, floor_a, floor_b, ceil_a=None,
                ceil_b=None) -> dict:
    """Same as :func:`product_series` but through the contraction (exact, no margin)."""
    if isinstance(vec, FockState):
        vec = FockVector.basis(vec)
    out: dict[tuple, FockVector] = {}
    for st, c in vec.items():
        for a, va in A.terms:
            for b, vb in B.terms:
                for key, w in apply_pair(va, vb, st, cutoff, A.k, A.hbar, floor_a, floor_b, ceil_a, ceil_b).items():
                    out.setdefault(key, FockVector()).add(w, a * b * c)
    return {p: v for p, v in out.items() if not v.is_zero()}
