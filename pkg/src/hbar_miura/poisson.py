"""Classical limit k+2 -> 0: Poisson brackets of lambda-exponentials and the s(u) algebra.

With ``{lambda_m, lambda_n} = (m/2) delta_{m+n,0}`` every classical field used
here is an exponential of a linear functional of the lambda modes, so
``{F(u), G(v)} = sigma(u, v) F(u) G(v)`` with a scalar ``sigma``.  Scalars are
kept as formal series in two expansion regions:

* ``"u>v"``: powers ``u^i v^j`` with ``i < 0`` and polynomial dependence on ``v``;
* ``"v>u"``: the mirror image.

Infinite products of shifted legs are summed with Hurwitz regularization,
which reproduces the asymptotic expansion of the digamma function.
A delta distribution ``c delta(u - v - a)`` is the pair
``c/(u-v-a)`` expanded in ``"u>v"`` minus the same expanded in ``"v>u"``.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath

from .exact import rat
from .factors import FactorProduct, rho_gamma, rho_plus
from .fock import _binom_general, hurwitz_power_sum
from .report import CheckReport

UV, VU = "u>v", "v>u"
H = Fraction(1, 2)

Series2 = dict  # {(power of u, power of v): Fraction}


def _add_into(acc: dict, other: dict, c=1) -> dict:
    for key, val in other.items():
        acc[key] = acc.get(key, 0) + c * val
    return acc


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


def _inverse_power(n: int, c: Fraction, order: int) -> dict[int, Fraction]:
    """``(x + c)^{-n}`` in powers of ``1/x`` down to ``x^{-order}``."""
    out = {}
    for j in range(order - n + 1):
        t = _binom_general(Fraction(-n), j) * c**j
        if t:
            out[-n - j] = Fraction(t)
    return out


def _power(m: int, c: Fraction) -> dict[int, Fraction]:
    """``(x + c)^m`` as a polynomial."""
    return {i: Fraction(comb(m, i)) * c ** (m - i) for i in range(m + 1) if c ** (m - i) or i == m}


def _outer(a: dict[int, Fraction], b: dict[int, Fraction], c=1, swap=False) -> Series2:
    out = {}
    for i, x in a.items():
        for j, y in b.items():
            key = (j, i) if swap else (i, j)
            out[key] = out.get(key, 0) + c * x * y
    return out


# ---------------------------------------------------------------------------
# classical fields


@dataclass(frozen=True)
class ClassicalField:
    """``exp`` of a linear functional of lambda modes.

    ``ann`` holds ``(shift, weight)`` for factors ``A^+(u + shift hbar)^weight``;
    ``cre`` holds ``(shift, weight, family)`` for ``B^-(u + shift hbar)^weight``
    or, with ``family``, ``A^-(u + shift hbar)^weight = prod_{l>=0} B^-(u + shift + (2l+1))``.
    """

    ann: tuple = ()
    cre: tuple = ()

    def __mul__(self, other: "ClassicalField") -> "ClassicalField":
        return ClassicalField(self.ann + other.ann, self.cre + other.cre)

    def inverse(self) -> "ClassicalField":
        return ClassicalField(tuple((s, -w) for s, w in self.ann), tuple((s, -w, f) for s, w, f in self.cre))

    def shifted(self, s) -> "ClassicalField":
        s = rat(s)
        return ClassicalField(tuple((a + s, w) for a, w in self.ann), tuple((a + s, w, f) for a, w, f in self.cre))

    def ann_coefficient(self, n: int, hbar: Fraction, order: int) -> dict[int, Fraction]:
        """Coefficient of ``lambda_n`` (n > 0): a series in ``1/u``."""
        out: dict[int, Fraction] = {}
        for s, w in self.ann:
            _add_into(out, _inverse_power(n, s * hbar, order), Fraction(w, n))
        return _clean(out)

    def cre_coefficient(self, n: int, hbar: Fraction) -> dict[int, Fraction]:
        """Coefficient of ``lambda_{-n}`` (n > 0): a polynomial in ``u``."""
        out: dict[int, Fraction] = {}
        for s, w, fam in self.cre:
            poly = hurwitz_power_sum(n - 1, (s + 1) * hbar, 2 * hbar) if fam else _power(n - 1, s * hbar)
            _add_into(out, {i: Fraction(c) for i, c in poly.items()}, 2 * hbar * w)
        return _clean(out)


def A_plus(s=0) -> ClassicalField:
    return ClassicalField(ann=((rat(s), 1),))


def B_minus(s=0) -> ClassicalField:
    return ClassicalField(cre=((rat(s), 1, False),))


def A_minus(s=0) -> ClassicalField:
    return ClassicalField(cre=((rat(s), 1, True),))


def Lambda_plus(s=0) -> ClassicalField:
    s = rat(s)
    return A_plus(s - H) * A_plus(s + H).inverse()


def Lambda_minus(s=0) -> ClassicalField:
    s = rat(s)
    return A_minus(s - H) * A_minus(s + H).inverse()


def Lambda(s=0) -> ClassicalField:
    return Lambda_plus(s) * Lambda_minus(s)


ClassicalSum = tuple  # ((coefficient, ClassicalField), ...)


def s_field() -> ClassicalSum:
    """``s(u) = Lambda(u - hbar/2) + Lambda(u + hbar/2)^{-1}``."""
    return ((1, Lambda(-H)), (1, Lambda(H).inverse()))


def build_classical(name: str):
    table = {
        "A_plus": A_plus, "A_minus": A_minus, "B_minus": B_minus,
        "Lambda_plus": Lambda_plus, "Lambda_minus": Lambda_minus, "Lambda": Lambda,
    }
    if name == "s":
        return s_field()
    if name == "Lambda_pm":
        return Lambda_plus(), Lambda_minus()
    return table[name]()


# ---------------------------------------------------------------------------
# brackets


@dataclass
class StructureFunction:
    """``sigma(u, v)``: series per region plus symbolic atoms ``c delta(u - v - a)``."""

    parts: dict = field(default_factory=lambda: {UV: {}, VU: {}})
    deltas: dict = field(default_factory=dict)
    order: int = 0

    def __add__(self, other: "StructureFunction") -> "StructureFunction":
        parts = {r: _clean(_add_into(dict(self.parts[r]), other.parts[r])) for r in (UV, VU)}
        deltas = _clean(_add_into(dict(self.deltas), other.deltas))
        return StructureFunction(parts, deltas, min(self.order, other.order))

    def scale(self, c) -> "StructureFunction":
        return StructureFunction({r: {k: c * v for k, v in p.items()} for r, p in self.parts.items()},
                                 {a: c * v for a, v in self.deltas.items()}, self.order)

    def __neg__(self) -> "StructureFunction":
        return self.scale(-1)

    def __sub__(self, other) -> "StructureFunction":
        return self + (-other)

    def swapped(self) -> "StructureFunction":
        """``sigma(v, u)`` re-read as a function of ``(u, v)``."""
        parts = {UV: {(j, i): c for (i, j), c in self.parts[VU].items()},
                 VU: {(j, i): c for (i, j), c in self.parts[UV].items()}}
        return StructureFunction(parts, {-a: c for a, c in self.deltas.items()}, self.order)

    def truncated(self, order: int) -> "StructureFunction":
        parts = {UV: {k: v for k, v in self.parts[UV].items() if k[0] >= -order},
                 VU: {k: v for k, v in self.parts[VU].items() if k[1] >= -order}}
        return StructureFunction(parts, dict(self.deltas), order)

    def is_zero(self) -> bool:
        return not (self.parts[UV] or self.parts[VU] or self.deltas)

    def coefficients(self, region: str = UV) -> list:
        return [[i, j, c] for (i, j), c in sorted(self.parts[region].items(), key=lambda t: (-t[0][0], t[0][1]))]


def pbracket(F: ClassicalField, G: ClassicalField, order: int = 12, hbar=1) -> StructureFunction:
    """``sigma`` with ``{F(u), G(v)} = sigma(u, v) F(u) G(v)``."""
    hbar = rat(hbar)
    uv: Series2 = {}
    vu: Series2 = {}
    for n in range(1, order + 1):
        a_f = F.ann_coefficient(n, hbar, order)
        c_g = G.cre_coefficient(n, hbar)
        if a_f and c_g:
            _add_into(uv, _outer(a_f, c_g, Fraction(n, 2)))
        c_f = F.cre_coefficient(n, hbar)
        a_g = G.ann_coefficient(n, hbar, order)
        if c_f and a_g:
            _add_into(vu, _outer(c_f, a_g, Fraction(-n, 2)))
    return StructureFunction({UV: _clean(uv), VU: _clean(vu)}, {}, order)


def pole_series(c: Fraction, order: int) -> dict[str, Series2]:
    """``1/(u - v + c)`` in both regions."""
    uv, vu = {}, {}
    for m in range(order):
        _add_into(uv, _outer({-m - 1: Fraction(1)}, _power(m, -c)))
        _add_into(vu, _outer({-m - 1: Fraction(1)}, _power(m, c), -1, swap=True))
    return {UV: _clean(uv), VU: _clean(vu)}


def delta_function(a, c, order: int) -> StructureFunction:
    """``c delta(u - v - a)`` as two expansions of ``c/(u - v - a)``."""
    p = pole_series(-rat(a), order)
    return StructureFunction({UV: {k: c * v for k, v in p[UV].items()}, VU: {k: -c * v for k, v in p[VU].items()}},
                             {}, order)


def log_derivative_series(fp: FactorProduct, order: int, hbar=1) -> Series2:
    """``sum_poles e/(B - S + c)`` for ``fp(B - S)``, expanded in ``1/B``; keys ``(B power, S power)``.

    Finite factors ``(x + a)^e`` give ``e/(x + a hbar)``; families are summed with
    Hurwitz regularization (their divergent parts cancel for balanced products).
    """
    hbar = rat(hbar)
    fp = fp.normalize()
    out: Series2 = {}
    for (s, j), e in fp.factors.finite:
        if j:
            raise ValueError("derivative legs are not supported")
        c = s.a0 * hbar
        for m in range(order):
            _add_into(out, _outer({-m - 1: Fraction(1)}, _power(m, -c)), e.constant())
    for (b, st, j), e in fp.factors.families:
        if j:
            raise ValueError("derivative legs are not supported")
        for m in range(order):
            poly = hurwitz_power_sum(m, -b.a0 * hbar, -st * hbar)
            _add_into(out, _outer({-m - 1: Fraction(1)}, {i: Fraction(x) for i, x in poly.items()}), e.constant())
    return _clean(out)


def rho_bracket(order: int = 12, hbar=1) -> StructureFunction:
    """``hbar [d_v log rho(u - v)]_{u>v} - hbar [d_u log rho(v - u)]_{v>u}``."""
    hbar = rat(hbar)
    L = log_derivative_series(rho_plus(), order, hbar)
    uv = {k: -hbar * c for k, c in L.items()}
    vu = {(j, i): hbar * c for (i, j), c in L.items()}
    return StructureFunction({UV: _clean(uv), VU: _clean(vu)}, {}, order)


def rho_half_bracket(order: int = 12, hbar=1) -> StructureFunction:
    """``hbar d_v log rho(u - v)`` in the ``u>v`` region only."""
    full = rho_bracket(order, hbar)
    return StructureFunction({UV: full.parts[UV], VU: {}}, {}, order)


def digamma_log_derivative(x: float, hbar: float = 1.0) -> float:
    """``d/dx log rho(x)`` from the Gamma form of rho."""
    g = rho_gamma(+1)
    z = float(g.scale) * x / hbar
    tot = mpmath.mpf(0)
    for o, e in g.terms:
        tot += e * float(g.scale) / hbar * mpmath.digamma(z + float(o.at(0)))
    return float(tot)


def evaluate(series: Series2, u: float, v: float) -> float:
    return float(sum(mpmath.mpf(c.numerator) / c.denominator * mpmath.mpf(u) ** i * mpmath.mpf(v) ** j
                     for (i, j), c in series.items()))


# ---------------------------------------------------------------------------
# {s(u), s(v)}


def _field_key(F: ClassicalField) -> frozenset:
    """Canonical form of a product of legs (cancelled legs dropped)."""
    legs = Counter()
    for s, w in F.ann:
        legs[("ann", s, False)] += w
    for s, w, fam in F.cre:
        legs[("cre", s, fam)] += w
    return frozenset((k, w) for k, w in legs.items() if w)


def _on_support(a: ClassicalField, b: ClassicalField, d: Fraction) -> frozenset:
    """``a(u) b(v)`` restricted to ``u = v + d hbar``, as a field of ``v``."""
    return _field_key(a.shifted(d) * b)


def _solve(matrix: list, rhs: list) -> list:
    """Exact Gauss-Jordan solve of a square system."""
    n = len(rhs)
    m = [list(row) + [r] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col])
        m[col], m[piv] = m[piv], m[col]
        inv_p = 1 / m[col][col]
        m[col] = [x * inv_p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[-1] for row in m]


def split_deltas(diff: StructureFunction, candidates, hbar: Fraction) -> tuple[dict, StructureFunction]:
    """Write ``diff = sum_d c_d delta(u - v - d hbar) + rest`` over candidate shifts ``d``.

    The ``c_d`` solve the Vandermonde system of the ``u^{-m-1} v^0`` coefficients.
    """
    cands = sorted(set(candidates))
    rhs = [diff.parts[UV].get((-m - 1, 0), Fraction(0)) for m in range(len(cands))]
    coeffs = _solve([[(d * hbar) ** m for d in cands] for m in range(len(cands))], rhs) if cands else []
    rest = diff
    atoms = {}
    for d, c in zip(cands, coeffs):
        if c:
            atoms[d] = c
            rest = rest - delta_function(d * hbar, c, diff.order).truncated(diff.order)
    return atoms, rest


@dataclass
class SBracket:
    """``{s(u), s(v)}`` compared with ``sigma_rho s(u) s(v)`` monomial by monomial."""

    expected: StructureFunction
    deltas: dict      # (shift in hbar units, field on the support) -> coefficient
    residual: list

    def scalar_deltas(self) -> dict:
        """Atoms whose field collapses to 1, keyed by shift."""
        return {d: c for (d, key), c in self.deltas.items() if not key}


def s_bracket(order: int = 12, hbar=1) -> SBracket:
    hbar = rat(hbar)
    expected = rho_bracket(order, hbar)
    s = s_field()
    residual = []
    deltas: dict = {}
    for ca, a in s:
        for cb, b in s:
            diff = pbracket(a, b, order, hbar) - expected
            if diff.is_zero():
                continue
            cands = {x - y for x, _ in b.ann for y, _ in a.ann} | {Fraction(0)}
            atoms, rest = split_deltas(diff, cands, hbar)
            if not rest.is_zero():
                residual.append({"monomial": [str(sorted(_field_key(a))), str(sorted(_field_key(b)))],
                                 "after deltas": rest.coefficients()[:8]})
            for d, c in atoms.items():
                key = (d, _on_support(a, b, d))
                deltas[key] = deltas.get(key, 0) + ca * cb * c
    return SBracket(expected, _clean(deltas), residual)


# shift (hbar units) -> coefficient (hbar units) of the inhomogeneous delta terms
DELTA_SIGNS = {
    "derived": {Fraction(1): Fraction(-1), Fraction(-1): Fraction(1)},
    "printed": {Fraction(1): Fraction(1), Fraction(-1): Fraction(-1)},
}


def verify_s_bracket(order: int = 12, hbar=1, *, signs: str = "derived", u_num: float = -40.0, v_num: float = 0.3,
                     tol: float = 1e-8) -> CheckReport:
    """Engine bracket of ``s`` against the rho-form plus two scalar delta atoms.

    ``signs`` selects the delta coefficients: ``derived`` follows from the
    Lambda brackets, ``printed`` is the opposite sign pair.
    """
    if order < 4:
        raise ValueError("order must be at least 4")
    hbar = rat(hbar)
    sb = s_bracket(order, hbar)
    got = {d * hbar: c for d, c in sb.scalar_deltas().items()}
    non_scalar = {f"{d}:{sorted(key)}": c for (d, key), c in sb.deltas.items() if key}
    want = {d * hbar: c * hbar for d, c in DELTA_SIGNS[signs].items()}
    # double entry: rho-form series against numeric digamma
    approx = evaluate(sb.expected.parts[UV], u_num, v_num)
    exact = -float(hbar) * digamma_log_derivative(u_num - v_num, float(hbar))
    gap = abs(approx - exact)
    ok = not sb.residual and not non_scalar and got == want and gap < tol
    sign = lambda c: "+" if c > 0 else "-"  # noqa: E731
    formula = ("{s(u),s(v)} = h[d_v log rho(u-v) - d_u log rho(v-u)] s(u)s(v) "
               + " ".join(f"{sign(c)} h delta(u-v{'-' if d > 0 else '+'}h)" for d, c in sorted(
                   DELTA_SIGNS[signs].items(), reverse=True)))
    return CheckReport(
        "s-bracket", "symbolic", ok,
        "1" if ok else {"series": sb.residual, "delta atoms": got, "expected atoms": want,
                        "non-scalar atoms": non_scalar, "numeric gap": gap},
        {"order": order, "hbar": hbar, "signs": signs},
        formula,
        {"delta atoms": got,
         "structure coefficients u>v": sb.expected.coefficients(UV)[:order],
         "digamma check": {"u": u_num, "v": v_num, "series": approx, "digamma": exact, "gap": gap}},
    )


# ---------------------------------------------------------------------------
# Jacobi identity


def _series3(sf: StructureFunction, x: int, y: int) -> dict:
    """Embed ``sigma(var_x, var_y)`` into three variables keyed ``(regions, powers)``."""
    out = {}
    for region, part in sf.parts.items():
        tag = (x, y) if region == UV else (y, x)
        for (i, j), c in part.items():
            p = [0, 0, 0]
            p[x] += i
            p[y] += j
            out[(frozenset({tag}), tuple(p))] = c
    return out


def _mul3(a: dict, b: dict) -> dict:
    out = {}
    for (ra, pa), x in a.items():
        for (rb, pb), y in b.items():
            key = (ra | rb, tuple(i + j for i, j in zip(pa, pb)))
            out[key] = out.get(key, 0) + x * y
    return out


def jacobiator(F: ClassicalField, G: ClassicalField, Hf: ClassicalField, order: int = 6, hbar=1) -> dict:
    """Scalar of ``{F,{G,H}} + {G,{H,F}} + {H,{F,G}}`` (times ``FGH``) at ``(u, v, w)``."""
    s = {}
    fields = (F, G, Hf)
    for i in range(3):
        for j in range(3):
            if i != j:
                s[(i, j)] = _series3(pbracket(fields[i], fields[j], order, hbar), i, j)
    # {X,{Y,Z}} = s_YZ (s_XY + s_XZ) XYZ
    out: dict = {}
    for x, y, z in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        _add_into(out, _mul3(s[(y, z)], _add_into(dict(s[(x, y)]), s[(x, z)])))
    return _clean(out)


def random_field(rng: random.Random, legs: int = 3) -> ClassicalField:
    halves = [Fraction(n, 2) for n in range(-4, 5)]
    ann = tuple((rng.choice(halves), rng.choice((-1, 1, 2))) for _ in range(rng.randint(0, legs)))
    cre = tuple((rng.choice(halves), rng.choice((-1, 1)), rng.random() < 0.5) for _ in range(rng.randint(0, legs)))
    return ClassicalField(ann, cre)


def verify_jacobi(order: int = 6, trials: int = 10, seed: int = 0, hbar=1) -> CheckReport:
    rng = random.Random(seed)
    triples = [(Lambda_plus(), Lambda_minus(), Lambda_minus()), (A_plus(), A_plus(), A_plus())]
    triples += [tuple(random_field(rng) for _ in range(3)) for _ in range(trials)]
    s = [f for _, f in s_field()]
    triples += [(a, b, c) for a in s for b in s for c in s]
    bad = []
    for n, (F, G, Hf) in enumerate(triples):
        j = jacobiator(F, G, Hf, order, hbar)
        if j:
            bad.append({"triple": n, "terms": len(j)})
    return CheckReport("jacobi", "symbolic", not bad, bad or "1",
                       {"order": order, "trials": trials, "seed": seed},
                       "{F,{G,H}} + {G,{H,F}} + {H,{F,G}} = 0", {"triples": len(triples)})


def verify_poisson(order: int = 12, hbar=1, jacobi_order: int = 6, trials: int = 10) -> list[CheckReport]:
    return [verify_s_bracket(order, hbar), verify_jacobi(jacobi_order, trials, hbar=hbar)]
