"""Sugawara operator l(u), the Miura map at the critical level, centrality and fusion.

The derivation of the trace formula runs in a free algebra of noncommutative
sympy symbols (half currents e^pm, f^pm and the diagonal k_i^pm).  The
operator l(u) itself is assembled from the free-field currents and compared
with ``Lambda(u - hbar/2) + Lambda(u + hbar/2)^{-1}`` symbolically and on
Fock states.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy

from .boson import HBAR, VOSum, describe, exchange_factor, normal_order_ef, vosum_at
from .exact import rat
from .fock import FockOperator, FockState, pair_series, product_series, series_difference
from .relations import _params, _rho, _run_states, _states, _table_residual, _variant_key
from .report import CheckReport
from .wakimoto import build, k_current, lambda_cap, lambda_cap_inverse, lambda_minus, lambda_plus

H = Fraction(1, 2)
CRITICAL = Fraction(-2)
CENTRALITY_CURRENTS = ("e", "f", "h_plus", "h_minus")

U, V, HB = sympy.symbols("u v hbar")


# ---------------------------------------------------------------------------
# Gauss decomposition in the free algebra


@lru_cache(maxsize=None)
def _atom(name: str, arg: sympy.Expr) -> sympy.Symbol:
    return sympy.Symbol(f"{name}({sympy.sstr(arg)})", commutative=False)


def atom(name: str, arg) -> sympy.Symbol:
    """Noncommutative symbol ``name(arg)``; the argument is canonicalized."""
    return _atom(name, sympy.expand(sympy.sympify(arg)))


def inv(name: str, arg) -> sympy.Symbol:
    return atom(name + "^-1", arg)


def u_pm(sign: int, u, k=CRITICAL):
    """``u_pm = u +- k hbar / 4``."""
    return u + sign * sympy.Rational(str(k)) * HB / 4


@dataclass(frozen=True)
class GaussL:
    """``L^pm(u) = F D E`` with lower, diagonal and upper factors (2x2 sympy matrices)."""

    sign: int
    f_part: sympy.Matrix
    diag: sympy.Matrix
    e_part: sympy.Matrix

    def matrix(self) -> sympy.Matrix:
        return self.f_part * self.diag * self.e_part

    def inverse(self) -> sympy.Matrix:
        """``E^{-1} D^{-1} F^{-1}`` (each factor inverts in closed form)."""
        s = "+" if self.sign > 0 else "-"
        e_inv = sympy.Matrix([[1, -self.e_part[0, 1]], [0, 1]])
        f_inv = sympy.Matrix([[1, 0], [-self.f_part[1, 0], 1]])
        k1, k2 = self.diag[0, 0], self.diag[1, 1]
        d_inv = sympy.Matrix([[inv(f"k1{s}", _arg_of(k1)), 0], [0, inv(f"k2{s}", _arg_of(k2))]])
        return e_inv * d_inv * f_inv


def _arg_of(sym: sympy.Symbol) -> sympy.Expr:
    name = sym.name
    return sympy.sympify(name[name.index("(") + 1:-1], locals={"u": U, "v": V, "hbar": HB})


def gauss(sign: int, u, k=CRITICAL) -> GaussL:
    s = "+" if sign > 0 else "-"
    f = HB * atom(f"f{s}", u_pm(-sign, u, k))
    e = HB * atom(f"e{s}", u_pm(sign, u, k))
    return GaussL(
        sign,
        sympy.Matrix([[1, 0], [f, 1]]),
        sympy.Matrix([[atom(f"k1{s}", u), 0], [0, atom(f"k2{s}", u)]]),
        sympy.Matrix([[1, e], [0, 1]]),
    )


def build_L(u=U, k=CRITICAL) -> sympy.Matrix:
    """``L(u) = L^-(u - hbar/2) L^+(u + hbar/2)^{-1}`` as a 2x2 matrix over the free algebra."""
    lm = gauss(-1, u - HB / 2, k).matrix()
    lp_inv = gauss(1, u + HB / 2, k).inverse()
    return (lm * lp_inv).applyfunc(sympy.expand)


def _k1m(u):
    return atom("k1-", u - HB / 2)


def _k2m(u):
    return atom("k2-", u - HB / 2)


def _k1p_inv(u):
    return inv("k1+", u + HB / 2)


def _k2p_inv(u):
    return inv("k2+", u + HB / 2)


def expected_L_entries(u=U) -> tuple[sympy.Expr, sympy.Expr]:
    """Diagonal entries of ``L(u)`` at the critical level, written out by hand."""
    ep, em = atom("e+", u), atom("e-", u)
    fp, fm = atom("f+", u + HB), atom("f-", u - HB)
    l11 = (_k1m(u) * _k1p_inv(u) + HB**2 * _k1m(u) * ep * _k2p_inv(u) * fp
           - HB**2 * _k1m(u) * em * _k2p_inv(u) * fp)
    l22 = (_k2m(u) * _k2p_inv(u) - HB**2 * fm * _k1m(u) * ep * _k2p_inv(u)
           + HB**2 * fm * _k1m(u) * em * _k2p_inv(u))
    return sympy.expand(l11), sympy.expand(l22)


def half_current_relations(u=U, v=V, k=CRITICAL) -> tuple[sympy.Expr, sympy.Expr]:
    """Half-current exchange relations multiplied by ``u - v + hbar``, as ``lhs - rhs``."""
    r1 = ((u - v + HB) * atom("f-", u_pm(1, v, k)) * atom("k1-", u)
          - (u - v) * atom("k1-", u) * atom("f-", u_pm(1, v, k))
          - HB * atom("f-", u_pm(1, u, k)) * atom("k1-", u))
    r2 = ((u - v + HB) * inv("k2+", v) * atom("f+", u_pm(-1, u, k))
          - (u - v) * atom("f+", u_pm(-1, u, k)) * inv("k2+", v)
          - HB * inv("k2+", v) * atom("f+", u_pm(-1, v, k)))
    return sympy.expand(r1), sympy.expand(r2)


def moving_lemmas(u=U) -> tuple[sympy.Expr, sympy.Expr]:
    """Relations at the coincident point ``v = u + hbar``, renamed ``u -> u - hbar/2``, as ``lhs - rhs``."""
    return half_current_relations(u - HB / 2, u + HB / 2)


def expected_moving_lemmas(u=U) -> tuple[sympy.Expr, sympy.Expr]:
    """``f^-(u-hbar) k1^-(u-hbar/2) = k1^-(u-hbar/2) f^-(u)`` and
    ``k2^+(u+hbar/2)^{-1} f^+(u+hbar) = f^+(u) k2^+(u+hbar/2)^{-1}``."""
    m1 = atom("f-", u - HB) * _k1m(u) - _k1m(u) * atom("f-", u)
    m2 = _k2p_inv(u) * atom("f+", u + HB) - atom("f+", u) * _k2p_inv(u)
    return m1, m2


def _proportional(expr: sympy.Expr, target: sympy.Expr) -> bool:
    """``expr = c * target`` for a nonzero scalar ``c``."""
    if target == 0:
        return expr == 0
    ratio = None
    e_terms = Counter()
    for t in sympy.Add.make_args(sympy.expand(expr)):
        c, nc = t.args_cnc()
        e_terms[sympy.Mul(*nc)] += sympy.Mul(*c)
    for t in sympy.Add.make_args(sympy.expand(target)):
        c, nc = t.args_cnc()
        key = sympy.Mul(*nc)
        r = sympy.simplify(e_terms.pop(key, 0) / sympy.Mul(*c))
        if r == 0 or (ratio is not None and sympy.simplify(r - ratio) != 0):
            return False
        ratio = r
    return all(sympy.simplify(c) == 0 for c in e_terms.values())


def sugawara_trace(u=U) -> sympy.Expr:
    """``L11 + L22`` after moving ``f^pm`` with the lemmas, in terms of ``e = e^+ - e^-``."""
    l11, l22 = build_L(u)[0, 0], build_L(u)[1, 1]
    move = {
        _k2p_inv(u) * atom("f+", u + HB): atom("f+", u) * _k2p_inv(u),
        atom("f-", u - HB) * _k1m(u): _k1m(u) * atom("f-", u),
    }
    tr = sympy.expand(l11 + l22)
    for old, new in move.items():
        tr = sympy.expand(tr.subs(old, new))
    e = atom("e", u)
    return sympy.expand(tr.subs(atom("e+", u), e + atom("e-", u)))


def expected_trace(u=U) -> sympy.Expr:
    """Three-term form with ``:e f: = e f^+ - f^- e``."""
    e, fp, fm = atom("e", u), atom("f+", u), atom("f-", u)
    ef = e * fp - fm * e
    return sympy.expand(_k1m(u) * _k1p_inv(u) + _k2m(u) * _k2p_inv(u) + HB**2 * _k1m(u) * ef * _k2p_inv(u))


def verify_sugawara_steps() -> list[CheckReport]:
    """Gauss entries, moving lemmas and the trace formula, exactly in the free algebra."""
    reports = []
    L = build_L()
    exp11, exp22 = expected_L_entries()
    for name, got, want in (("L11", L[0, 0], exp11), ("L22", L[1, 1], exp22)):
        diff = sympy.expand(got - want)
        reports.append(CheckReport(f"gauss-{name}", "symbolic", diff == 0, "1" if diff == 0 else str(diff), {},
                                   f"{name} of L^-(u-h/2) L^+(u+h/2)^-1 at k=-2"))
    for i, (got, want) in enumerate(zip(moving_lemmas(), expected_moving_lemmas()), 1):
        ok = _proportional(got, want)
        reports.append(CheckReport(f"moving-lemma-{i}", "symbolic", ok, "1" if ok else str(got), {},
                                   ["f-(u-h) k1-(u-h/2) = k1-(u-h/2) f-(u)",
                                    "k2+(u+h/2)^-1 f+(u+h) = f+(u) k2+(u+h/2)^-1"][i - 1]))
    diff = sympy.expand(sugawara_trace() - expected_trace())
    reports.append(CheckReport("trace", "symbolic", diff == 0, "1" if diff == 0 else str(diff), {},
                               "l(u) = k1-k1+^-1 + k2-k2+^-1 + h^2 k1- :e f: k2+^-1"))
    return reports


# ---------------------------------------------------------------------------
# free-field l(u)


@dataclass(frozen=True)
class SugawaraParts:
    diag1: VOSum
    diag2: VOSum
    middle: VOSum

    def total(self) -> VOSum:
        return self.diag1 + self.diag2 + self.middle


def sugawara_parts(variant=None, kernels=None) -> SugawaraParts:
    """The three groups of l(u) from the free-field currents at symbolic level."""
    k1m = VOSum.of(k_current(-1, 1, variant).shifted(-H))
    k2m = VOSum.of(k_current(-1, 2, variant).shifted(-H))
    k1pi = VOSum.of(k_current(1, 1, variant).shifted(H).inverse())
    k2pi = VOSum.of(k_current(1, 2, variant).shifted(H).inverse())
    ef = normal_order_ef(build("e", variant), build("f", variant), kernels)
    return SugawaraParts(k1m.times(k1pi), k2m.times(k2pi), k1m.times(ef).times(k2pi).scale(HBAR**2))


def build_l(k=None, variant=None) -> VOSum:
    """l(u) as a VOSum; collected and specialized when ``k`` is given."""
    total = sugawara_parts(variant).total()
    return total if k is None else vosum_at(total, k)


def miura_target(k=None) -> VOSum:
    """``Lambda(u - hbar/2) + Lambda(u + hbar/2)^{-1}``."""
    t = VOSum.of(lambda_cap(-H)) + VOSum.of(lambda_cap_inverse(H))
    return t if k is None else vosum_at(t, k)


def _term_multiset(vs: VOSum) -> Counter:
    return Counter((str(sympy.factor(a)), v.key()) for a, v in vs.terms)


def verify_l_structure(variant=None) -> CheckReport:
    """At generic k the middle group is ``h^2 k1^- :e f: k2^{+-1}`` with the six mode-level terms."""
    parts = sugawara_parts(variant)
    sizes = [len(parts.diag1), len(parts.diag2), len(parts.middle)]
    ef = normal_order_ef(build("e", variant), build("f", variant))
    ok = sizes[:2] == [1, 1] and sizes[2] == len(ef) and len(parts.total().collect()) == sum(sizes)
    return CheckReport("l-structure", "symbolic", ok, "1" if ok else sizes, _params(None, variant),
                       "l(u) = k1-(u-h/2)k1+(u+h/2)^-1 + k2-(u-h/2)k2+(u+h/2)^-1 + h^2 k1- :e f: k2+^-1",
                       {"group sizes": sizes, ":ef: terms": len(ef)})


def _summary(vs: VOSum) -> list[str]:
    return [f"{sympy.sstr(a)} * {describe(v)}" for a, v in vs.terms]


def verify_miura(k=CRITICAL, variant=None, *, cutoff: int = 4, radius: int = 1, floor: int = -3, hbar=1,
                 fock: bool = True) -> list[CheckReport]:
    """``l(u) = Lambda(u - hbar/2) + Lambda(u + hbar/2)^{-1}``; holds only at ``k = -2``."""
    k = rat(k)
    l_at, t_at = build_l(k, variant), miura_target(k)
    diff = vosum_at(build_l(None, variant) - miura_target(), k)
    ok = _term_multiset(l_at) == _term_multiset(t_at) and not diff.terms
    reports = [CheckReport("miura", "symbolic", ok, "1" if ok else _summary(diff), _params(k, variant),
                           "l(u) = Lambda(u-h/2) + Lambda(u+h/2)^-1",
                           {"l(u) terms": _summary(l_at), "target terms": _summary(t_at)})]
    if fock:
        L = FockOperator(build_l(None, variant), k, hbar)
        T = FockOperator(miura_target(), k, hbar)
        residual = []
        for st in _states(cutoff, radius):
            d = series_difference(L.series(st, cutoff, floor), T.series(st, cutoff, floor))
            for p, vec in sorted(d.items()):
                residual.append({"state": str(st), "u_power": p, "difference": vec.to_json()})
        reports.append(CheckReport("miura", "fock", not residual, residual,
                                   _params(k, variant, hbar=hbar, cutoff=cutoff, sectors=radius, floor=floor),
                                   "l(u) psi = (Lambda(u-h/2) + Lambda(u+h/2)^-1) psi"))
    return reports


def vacuum_expectation(k=CRITICAL, cutoff: int = 4, hbar=1, floor: int = -2) -> dict:
    """Coefficients of ``<0| l(u) |0>`` keyed by power of ``u``."""
    L = FockOperator(build_l(k), k, hbar)
    vac = FockState(Fraction(0), Fraction(0), Fraction(0), ((), (), ()))
    return {p: v.get(vac, 0) for p, v in L.series(vac, cutoff, floor).items() if v.get(vac, 0)}


# ---------------------------------------------------------------------------
# Lambda exchange


def lambda_exchange_expected():
    """``rho(x - (k+2)) / rho(x)``."""
    return (_rho(-2, -1) * _rho().inverse()).normalize()


def verify_lambda_exchange() -> CheckReport:
    r = exchange_factor(VOSum.of(lambda_plus()), VOSum.of(lambda_minus()))
    ratio = (r * lambda_exchange_expected().inverse()).normalize()
    ok = ratio.is_one()
    return CheckReport("lambda-exchange", "symbolic", ok, "1" if ok else str(ratio), {},
                       "Lambda+(u) Lambda-(v) = rho(u-v-(k+2)h)/rho(u-v) Lambda-(v) Lambda+(u)",
                       {"exchange factor": str(r.normalize())})


# ---------------------------------------------------------------------------
# centrality at the critical level


@lru_cache(maxsize=None)
def _critical_op(name: str, k: Fraction, hbar: Fraction, variant: tuple) -> FockOperator:
    if name == "l":
        return FockOperator(build_l(k, dict(variant)), k, hbar)
    return FockOperator(build(name, dict(variant)), k, hbar)


def _l_window(p, window):
    return -window <= p <= window


def _x_window(p, window):
    return -window - 1 <= p <= window - 1


def _ordered(a, b, st, cutoff, fa, fb, ca, cb, margin):
    try:
        return pair_series(a, b, st, cutoff, fa, fb, ca, cb)
    except ValueError:
        return product_series(a, b, st, cutoff, fa, fb, margin)


def _centrality_state(args) -> list:
    x, k, hbar, variant, cutoff, window, margin, st = args
    lop = _critical_op("l", k, hbar, variant)
    xop = _critical_op(x, k, hbar, variant)
    fl, fx = -window, -window - 1
    lx = _ordered(lop, xop, st, cutoff, fl, fx, window, window - 1, margin)
    xl = {(p, q): v for (q, p), v in _ordered(xop, lop, st, cutoff, fx, fl, window - 1, window, margin).items()}
    lx = {key: v for key, v in lx.items() if _l_window(key[0], window) and _x_window(key[1], window)}
    xl = {key: v for key, v in xl.items() if _l_window(key[0], window) and _x_window(key[1], window)}
    return _table_residual(lx, xl, window + 2, st)


def verify_centrality(k=CRITICAL, variant=None, *, cutoff: int = 4, window: int = 2, radius: int = 0, hbar=1,
                      margin: int = 6, currents=CENTRALITY_CURRENTS, workers=None) -> list[CheckReport]:
    """``[l_n, x_m] = 0`` on Fock states of degree <= cutoff (a finite-window check)."""
    kf, hb = rat(k), rat(hbar)
    vkey = _variant_key(variant)
    states = _states(cutoff, radius)
    reports = []
    for x in currents:
        residual = _run_states(_centrality_state, (x, kf, hb, vkey, cutoff, window, margin), states, workers)
        reports.append(CheckReport(f"centrality-{x}", "fock", not residual, residual,
                                   _params(kf, variant, hbar=hb, cutoff=cutoff, window=window, sectors=radius,
                                           states=len(states)),
                                   f"[l[n], {x}[m]] = 0 for |n|,|m| <= {window} (finite window)"))
    return reports


# ---------------------------------------------------------------------------
# fusion in the commutative Lambda-symbol ring


class FusionSymbol:
    """Laurent polynomial in commuting symbols ``Lambda(u + s hbar)``, ``s`` half-integer.

    Monomials are frozensets of ``(s, exponent)`` pairs with nonzero exponents.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def one(cls) -> "FusionSymbol":
        return cls({frozenset(): 1})

    @classmethod
    def atom(cls, s, power: int = 1) -> "FusionSymbol":
        return cls({frozenset({(Fraction(s), power)}): 1})

    def __add__(self, other: "FusionSymbol") -> "FusionSymbol":
        out = Counter(self.terms)
        out.update(other.terms)
        return FusionSymbol(out)

    def __sub__(self, other: "FusionSymbol") -> "FusionSymbol":
        return self + FusionSymbol({m: -c for m, c in other.terms.items()})

    def __mul__(self, other: "FusionSymbol") -> "FusionSymbol":
        out: Counter = Counter()
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                powers = Counter(dict(m1))
                powers.update(dict(m2))
                out[frozenset((s, e) for s, e in powers.items() if e)] += c1 * c2
        return FusionSymbol(out)

    def shifted(self, s) -> "FusionSymbol":
        s = Fraction(s)
        return FusionSymbol({frozenset((a + s, e) for a, e in m): c for m, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, FusionSymbol) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        def mono(m):
            return "*".join(f"L({s}){'' if e == 1 else '^' + str(e)}" for s, e in sorted(m)) or "1"

        return " + ".join(f"{'' if c == 1 else str(c) + '*'}{mono(m)}" for m, c in sorted(
            self.terms.items(), key=lambda t: sorted(t[0]))) or "0"


def l_symbol() -> FusionSymbol:
    """``l(u) = Lambda(u - hbar/2) + Lambda(u + hbar/2)^{-1}``."""
    return FusionSymbol.atom(-H) + FusionSymbol.atom(H, -1)


def fusion(n: int, bound: int = 8) -> FusionSymbol:
    """``l^(n)`` from ``l^(1)(u - n hbar) l^(n)(u) = l^(n+1)(u) + l^(n-1)(u)``."""
    if not 0 <= n <= bound:
        raise ValueError(f"fusion order must lie in [0, {bound}]")
    prev, cur = FusionSymbol(), FusionSymbol.one()
    if n == 0:
        return cur
    prev, cur = cur, l_symbol()
    for m in range(1, n):
        prev, cur = cur, l_symbol().shifted(-m) * cur - prev
    return cur


def fusion_closed_form(n: int) -> FusionSymbol:
    """Sum over ``j`` of ``prod_{i<j} Lambda(u + 1/2 - i)^{-1} prod_{j<=i<n} Lambda(u - 1/2 - i)``."""
    out = FusionSymbol()
    for j in range(n + 1):
        mono = frozenset({(H - i, -1) for i in range(j)} | {(-H - i, 1) for i in range(j, n)})
        out = out + FusionSymbol({mono: 1})
    return out


def verify_fusion(n_max: int = 5) -> CheckReport:
    bad = {}
    for n in range(n_max + 1):
        got, want = fusion(n, max(8, n_max)), fusion_closed_form(n)
        if got != want or len(got) != n + 1:
            bad[n] = {"recursion": repr(got), "closed form": repr(want)}
    return CheckReport("fusion", "symbolic", not bad, bad or "1", {"n_max": n_max},
                       "l1(u-n h) ln(u) = l(n+1)(u) + l(n-1)(u)",
                       {"l2": repr(fusion(2))})


def verify_vacuum(cutoff: int = 4) -> CheckReport:
    vals = vacuum_expectation(CRITICAL, cutoff)
    ok = vals.get(Fraction(0)) == 2
    return CheckReport("vacuum-l", "fock", ok, "1" if ok else vals, {"k": -2, "cutoff": cutoff},
                       "<0| l(u) |0> = 2 + O(1/u)", {"coefficients": vals})
