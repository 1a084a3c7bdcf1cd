"""Finite sums of shift-indexed atoms plus arithmetic-progression families.

A :class:`ShiftSum` stores

* finite atoms ``c * X_j(s)`` keyed by ``(s, j)``, and
* families ``c * sum_{l>=0} X_j(b + l*step)`` keyed by ``(b, step, j)``,

where ``X_j(s)`` is an abstract additive function of the shift ``s`` (the
``j``-th shift derivative).  Read multiplicatively with ``X(s) = log(x + s)``
this is the exponent data of a factor product; read additively with
``X(s)`` a free-boson half-field it is a leg sum.  Both use the same
telescoping rule::

    F(b) - F(b + step) = X(b)

which :func:`normalize` applies to reach a canonical form.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator

from .exact import AffineShift, KCoeff, rat

FiniteKey = tuple[AffineShift, int]
FamilyKey = tuple[AffineShift, Fraction, int]


def _rat_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(gcd(a.numerator * b.denominator, b.numerator * a.denominator), a.denominator * b.denominator)


def rat_lcm(values: Iterable[Fraction]) -> Fraction:
    out = None
    for v in values:
        v = abs(rat(v))
        out = v if out is None else out * v / _rat_gcd(out, v)
    if out is None:
        raise ValueError("lcm of nothing")
    return out


def _is_int(q: Fraction) -> bool:
    return q.denominator == 1


class ShiftSum:
    """Immutable shift-indexed sum with KCoeff coefficients."""

    __slots__ = ("finite", "families", "_hash")

    def __init__(self, finite=None, families=None):
        fin: dict[FiniteKey, KCoeff] = {}
        for key, c in (finite.items() if isinstance(finite, dict) else (finite or ())):
            s, j = (key, 0) if isinstance(key, AffineShift) else key
            s = AffineShift.of(s)
            fin[(s, j)] = fin.get((s, j), KCoeff()) + KCoeff.of(c)
        fam: dict[FamilyKey, KCoeff] = {}
        for key, c in (families.items() if isinstance(families, dict) else (families or ())):
            if len(key) == 2:
                b, step = key
                j = 0
            else:
                b, step, j = key
            step = rat(step)
            if step == 0:
                raise ValueError("family step must be nonzero")
            b = AffineShift.of(b)
            fam[(b, step, j)] = fam.get((b, step, j), KCoeff()) + KCoeff.of(c)
        self.finite = tuple(sorted(((k, v) for k, v in fin.items() if v), key=_fin_sort))
        self.families = tuple(sorted(((k, v) for k, v in fam.items() if v), key=_fam_sort))
        self._hash = hash((self.finite, self.families))

    # -- construction helpers -------------------------------------------------
    @classmethod
    def atom(cls, s, coeff=1, order: int = 0) -> "ShiftSum":
        return cls({(AffineShift.of(s), order): coeff})

    @classmethod
    def family(cls, base, step, coeff=1, order: int = 0) -> "ShiftSum":
        return cls(families={(AffineShift.of(base), rat(step), order): coeff})

    # -- algebra --------------------------------------------------------------
    def __add__(self, other: "ShiftSum") -> "ShiftSum":
        return ShiftSum(list(self.finite) + list(other.finite), list(self.families) + list(other.families))

    def __neg__(self) -> "ShiftSum":
        return self.scale(-1)

    def __sub__(self, other: "ShiftSum") -> "ShiftSum":
        return self + (-other)

    def scale(self, c) -> "ShiftSum":
        c = KCoeff.of(c)
        return ShiftSum([(k, v * c) for k, v in self.finite], [(k, v * c) for k, v in self.families])

    def shifted(self, s) -> "ShiftSum":
        s = AffineShift.of(s)
        return ShiftSum(
            [((a + s, j), v) for (a, j), v in self.finite],
            [((b + s, st, j), v) for (b, st, j), v in self.families],
        )

    def reflected(self) -> "ShiftSum":
        """Map every shift ``s`` to ``-s`` (steps flip sign too)."""
        return ShiftSum(
            [((-a, j), v) for (a, j), v in self.finite],
            [((-b, -st, j), v) for (b, st, j), v in self.families],
        )

    def __bool__(self) -> bool:
        return bool(self.finite or self.families)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShiftSum):
            return NotImplemented
        return self.finite == other.finite and self.families == other.families

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"ShiftSum(finite={list(self.finite)}, families={list(self.families)})"

    def items(self) -> Iterator:
        yield from self.finite
        yield from self.families

    @property
    def max_order(self) -> int:
        orders = [j for (_, j), _ in self.finite] + [j for (_, _, j), _ in self.families]
        return max(orders, default=0)

    def normalize(self) -> "ShiftSum":
        return normalize(self)

    def is_zero(self) -> bool:
        return not normalize(self)

    def family_coefficient_sums(self) -> dict[Fraction, KCoeff]:
        """Total family coefficient per signed step (after refinement)."""
        out: dict[Fraction, KCoeff] = {}
        for (b, st, j), c in self.families:
            out[st] = out.get(st, KCoeff()) + c
        return out


def _fin_sort(item):
    (s, j), _ = item
    return (j, s.ak, s.a0)


def _fam_sort(item):
    (b, st, j), _ = item
    return (j, st, b.ak, b.a0)


def _reduce_base(a0: Fraction, g: Fraction) -> tuple[Fraction, int]:
    """Return residue ``r`` in ``[0, |g|)`` and integer ``m`` with ``a0 = r + m*g``."""
    L = abs(g)
    q = a0 / L
    r = a0 - L * (q.numerator // q.denominator)
    m = (a0 - r) / g
    assert _is_int(m)
    return r, int(m)


def _rebase(fin, b: AffineShift, g: Fraction, j: int, c: KCoeff):
    """Express ``c*F(b, g)`` as ``c*F(r, g)`` plus finite atoms; returns r."""
    r, m = _reduce_base(b.a0, g)
    base_r = AffineShift(r, b.ak)
    if m > 0:
        for i in range(m):
            key = (base_r + g * i, j)
            fin[key] = fin.get(key, KCoeff()) - c
    elif m < 0:
        for i in range(m, 0):
            key = (base_r + g * i, j)
            fin[key] = fin.get(key, KCoeff()) + c
    return r


def normalize(ss: ShiftSum) -> ShiftSum:
    """Canonical form: combine atoms, telescope families, coarsen steps.

    Families are grouped by (derivative order, step sign, k-part of the
    base); within a group they are refined to the lcm step, bases reduced to
    residues in ``[0, step)``, and then merged back to the smallest step
    for which the residue pattern is periodic.
    """
    fin: dict[FiniteKey, KCoeff] = {}
    for key, c in ss.finite:
        fin[key] = fin.get(key, KCoeff()) + c
    groups: dict[tuple, list] = {}
    for (b, st, j), c in ss.families:
        groups.setdefault((j, st > 0, b.ak), []).append((b, st, c))
    fam_out: dict[FamilyKey, KCoeff] = {}
    for (j, positive, ak), members in groups.items():
        sign = 1 if positive else -1
        L = rat_lcm(st for _, st, _ in members)
        g = sign * L
        residues: dict[Fraction, KCoeff] = {}
        for b, st, c in members:
            n = L / abs(st)
            assert _is_int(n)
            for i in range(int(n)):
                r = _rebase(fin, b + st * i, g, j, c)
                residues[r] = residues.get(r, KCoeff()) + c
        residues = {r: c for r, c in residues.items() if c}
        if not residues:
            continue
        step, reps = _coarsen(residues, L)
        for r0, c in reps:
            if step == L:
                fam_out[(AffineShift(r0, ak), g, j)] = fam_out.get((AffineShift(r0, ak), g, j), KCoeff()) + c
                continue
            # F(r0, sign*step) equals a sum of step-L families whose bases
            # need rebasing; subtract those corrections.
            coarse = sign * step
            for i in range(int(L / step)):
                _rebase_correction(fin, AffineShift(r0, ak) + coarse * i, g, j, c)
            key = (AffineShift(r0, ak), coarse, j)
            fam_out[key] = fam_out.get(key, KCoeff()) + c
    return ShiftSum(fin, fam_out)


def _rebase_correction(fin, b: AffineShift, g: Fraction, j: int, c: KCoeff) -> None:
    # F(b,g) = F(r,g) + corr; we replace sum of F(r,g) by F(coarse) - sum corr.
    tmp: dict[FiniteKey, KCoeff] = {}
    _rebase(tmp, b, g, j, c)
    for key, v in tmp.items():
        fin[key] = fin.get(key, KCoeff()) - v


def _coarsen(residues: dict[Fraction, KCoeff], L: Fraction):
    """Find the minimal period of ``residues`` on ``[0, L)``."""
    n = len(residues)
    for M in range(n, 1, -1):
        if n % M:
            continue
        p = L / M
        ok = True
        for r, c in residues.items():
            r2 = r + p
            if r2 >= L:
                r2 -= L
            if residues.get(r2) != c:
                ok = False
                break
        if ok:
            reps = sorted((r, c) for r, c in residues.items() if r < p)
            return p, reps
    return L, sorted(residues.items())
