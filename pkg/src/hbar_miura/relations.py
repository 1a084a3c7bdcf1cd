"""Defining relations of the Yangian double checked against the free-field currents.

Scalar exchange relations ``a(u) b(v) = r(u-v) b(v) a(u)`` are checked
symbolically (the exchange factor divided by ``r`` must normalize to 1) and,
when ``r`` is rational, mode by mode on Fock states via
``D(u-v) a(u) b(v) = N(u-v) b(v) a(u)``.  The delta-supported ``[e, f]``
relation is checked on Fock states only, with an exact symbolic residue
decomposition reported alongside.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, gamma, pi

import sympy

from .boson import (HBAR, NonScalarExchange, VOSum, _specialize_product, delta_decomposition, exchange_factor,
                    normal_order_ef, vosum_at)
from .exact import CriticalLevelError, rat, shift
from .factors import FactorProduct, rho_gamma, rho_minus, rho_plus
from .fock import (DerivationCharge, FockOperator, FockState, FockVector, _binom_general, charge_sectors,
                   pair_series, product_series, states_up_to)
from .report import CheckReport
from .wakimoto import DEFAULT_VARIANTS, U_MINUS, VARIANT_SITES, build, ef_display, resolve_variants

WORKERS_ENV = "HBAR_MIURA_WORKERS"
DELTA = "delta"


class CriticalLevelUnsupported(CriticalLevelError):
    pass


class NoConsistentVariant(RuntimeError):
    pass


def _x(a0=0, ak=0, e=1) -> FactorProduct:
    """``(x + a0 + ak*k)^e`` with ``x = u - v`` in units of hbar."""
    return FactorProduct.linear(shift(a0, ak), e)


def _rho(a0=0, ak=0) -> FactorProduct:
    """``rho(x + a0 + ak*k)`` with ``rho = rho^+``."""
    return rho_plus().shifted(shift(a0, ak))


Q = Fraction(1, 4)
H = Fraction(1, 2)


@dataclass(frozen=True)
class RelationSpec:
    id: str
    left: tuple[str, str]
    expected: object  # FactorProduct or DELTA
    mode: str  # symbolic | fock | both
    formula: str


def _specs() -> list[RelationSpec]:
    out = []
    add = lambda *a: out.append(RelationSpec(*a))  # noqa: E731
    for sign, tag in ((1, "plus"), (-1, "minus")):
        for i in (1, 2):
            for j in (1, 2):
                add(f"k{i}{tag}-k{j}{tag}", (f"k{i}_{tag}", f"k{j}_{tag}"), FactorProduct.one(), "symbolic",
                    f"k{i}{'+-'[sign < 0]}(u) k{j}{'+-'[sign < 0]}(v) = k{j}(v) k{i}(u)")
    for i in (1, 2):
        add(f"k{i}plus-k{i}minus", (f"k{i}_plus", f"k{i}_minus"), _rho(0, H) / _rho(0, -H), "symbolic",
            f"rho(u- - v+) k{i}+(u) k{i}-(v) = k{i}-(v) k{i}+(u) rho(u+ - v-)")
    add("k2plus-k1minus", ("k2_plus", "k1_minus"), _rho(-1, -H) / _rho(-1, H), "symbolic",
        "rho(u+ - v- - h) k2+(u) k1-(v) = k1-(v) k2+(u) rho(u- - v+ - h)")
    add("k1plus-k2minus", ("k1_plus", "k2_minus"), _rho(1, -H) / _rho(1, H), "symbolic",
        "rho(u+ - v- + h) k1+(u) k2-(v) = k2-(v) k1+(u) rho(u- - v+ + h)")
    add("e-e", ("e", "e"), _x(1) / _x(-1), "both", "e(u) e(v) = (u-v+h)/(u-v-h) e(v) e(u)")
    add("f-f", ("f", "f"), _x(-1) / _x(1), "both", "f(u) f(v) = (u-v-h)/(u-v+h) f(v) f(u)")
    for sign, tag, pm, mp in ((1, "plus", "+", "-"), (-1, "minus", "-", "+")):
        s = sign * Q
        add(f"k1{tag}-e", (f"k1_{tag}", "e"), _x(0, s) / _x(1, s), "both",
            f"k1{pm}(u) e(v) = (u{pm} - v)/(u{pm} - v + h) e(v) k1{pm}(u)")
        add(f"k2{tag}-e", (f"k2_{tag}", "e"), _x(0, s) / _x(-1, s), "both",
            f"k2{pm}(u) e(v) = (u{pm} - v)/(u{pm} - v - h) e(v) k2{pm}(u)")
        add(f"k1{tag}-f", (f"k1_{tag}", "f"), _x(1, -s) / _x(0, -s), "both",
            f"k1{pm}(u) f(v) = (u{mp} - v + h)/(u{mp} - v) f(v) k1{pm}(u)")
        add(f"k2{tag}-f", (f"k2_{tag}", "f"), _x(-1, -s) / _x(0, -s), "both",
            f"k2{pm}(u) f(v) = (u{mp} - v - h)/(u{mp} - v) f(v) k2{pm}(u)")
    add("e-f", ("e", "f"), DELTA, "fock",
        "[e(u), f(v)] = (1/h)(delta(u- - v+) h+(u-) - delta(u+ - v-) h-(v-))")
    for tag, pm in (("plus", "+"), ("minus", "-")):
        add(f"h{tag}-h{tag}", (f"h_{tag}", f"h_{tag}"), FactorProduct.one(), "both",
            f"[h{pm}(u), h{pm}(v)] = 0")
    for sign, tag, pm, mp in ((1, "plus", "+", "-"), (-1, "minus", "-", "+")):
        s = sign * Q
        add(f"h{tag}-e", (f"h_{tag}", "e"), _x(1, s) / _x(-1, s), "both",
            f"h{pm}(u) e(v) = (u{pm} - v + h)/(u{pm} - v - h) e(v) h{pm}(u)")
        add(f"h{tag}-f", (f"h_{tag}", "f"), _x(-1, -s) / _x(1, -s), "both",
            f"h{pm}(u) f(v) = (u{mp} - v - h)/(u{mp} - v + h) f(v) h{pm}(u)")
    add("hplus-hminus", ("h_plus", "h_minus"),
        _x(1, H) / _x(1, -H) * _x(-1, -H) / _x(-1, H), "both",
        "h+(u) h-(v) = (u+ - v- + h)/(u- - v+ + h) (u- - v+ - h)/(u+ - v- - h) h-(v) h+(u)")
    return out


RELATIONS: tuple[RelationSpec, ...] = tuple(_specs())
RELATION_IDS = tuple(r.id for r in RELATIONS)


def relation(rel_id: str) -> RelationSpec:
    for r in RELATIONS:
        if r.id == rel_id:
            return r
    raise KeyError(rel_id)


# ---------------------------------------------------------------------------
# manifest


def parse_manifest(text: str) -> list[tuple[RelationSpec, dict]]:
    """Parse ``<relation id> [key=value ...]`` lines; ``#`` starts a comment."""
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        params = {}
        for item in rest:
            if "=" not in item:
                raise ValueError(f"bad manifest parameter {item!r}")
            key, val = item.split("=", 1)
            params[key] = val
        out.append((relation(head), params))
    return out


def default_manifest() -> str:
    return "\n".join(f"{r.id} mode={'fock' if r.mode == 'fock' else 'symbolic'}" for r in RELATIONS) + "\n"


# ---------------------------------------------------------------------------
# symbolic checks


def _params(k, variant, **extra) -> dict:
    out = {"k": "symbolic" if k is None else str(rat(k)), "variant": resolve_variants(variant)}
    out.update({key: (str(v) if isinstance(v, Fraction) else v) for key, v in extra.items()})
    return out


def _symbolic_exchange(spec: RelationSpec, k, variant) -> tuple[bool, str]:
    a, b = (build(n, variant) for n in spec.left)
    expected = spec.expected
    if k is not None:
        a, b = vosum_at(a, k), vosum_at(b, k)
        expected = _specialize_product(expected, rat(k))
    r = exchange_factor(a, b, k)
    residual = (r / expected).normalize()
    return residual.is_one(), "1" if residual.is_one() else str(residual)


def symbolic_ef_delta(variant=None) -> tuple[bool, dict]:
    """Residue decomposition of ``[e(u), f(v)]`` against the two h-terms."""
    d = delta_decomposition(build("e", variant), build("f", variant))
    expected = {
        shift(0, H): VOSum.of(build("h_plus", variant).terms[0][1].shifted(U_MINUS)).scale(1 / HBAR),
        shift(0, -H): VOSum.of(build("h_minus", variant).terms[0][1].shifted(-U_MINUS)).scale(-1 / HBAR),
    }
    residual = {}
    for x0 in set(d) | set(expected):
        diff = (d.get(x0, VOSum()) - expected.get(x0, VOSum())).collect()
        if not diff.is_zero():
            residual[str(x0)] = len(diff)
    return not residual, residual


# ---------------------------------------------------------------------------
# Fock checks (run per state, optionally in worker processes)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@lru_cache(maxsize=None)
def _fock_op(name: str, k: Fraction, hbar: Fraction, variant: tuple, shift_k: Fraction = Fraction(0)) -> FockOperator:
    vs = build(name, dict(variant))
    if shift_k:
        vs = vs.shifted(shift(0, shift_k))
    return FockOperator(vs, k, hbar)


def _in_window(p: Fraction, window: int) -> bool:
    return -window - 1 <= p <= window - 1


def _rational_polys(r: FactorProduct, k: Fraction, hbar: Fraction) -> tuple[dict, dict]:
    """Numerator and denominator of a rational ``r(x)`` as polynomials in ``u, v``."""
    r = _specialize_product(r.normalize(), k).normalize()
    if r.factors.families:
        raise ValueError("structure function is not rational")
    num = {0: r.constant * hbar**r.hbar_power}
    den = {0: Fraction(1)}
    for (s, j), e in r.factors.finite:
        e = e.constant()
        if j or e.denominator != 1:
            raise ValueError("structure function is not rational")
        target = num if e > 0 else den
        lin = {1: Fraction(1), 0: s.a0 * hbar}
        for _ in range(abs(int(e))):
            new = {}
            for i, a in target.items():
                for m, c in lin.items():
                    new[i + m] = new.get(i + m, 0) + a * c
            target.clear()
            target.update(new)

    def in_uv(poly):
        out = {}
        for n, c in poly.items():
            for i in range(n + 1):
                out[(i, n - i)] = out.get((i, n - i), 0) + c * comb(n, i) * (-1) ** (n - i)
        return {key: c for key, c in out.items() if c}

    return in_uv(num), in_uv(den)


def _apply_uv(poly: dict, table: dict) -> dict:
    out: dict = {}
    for (p, q), vec in table.items():
        for (i, j), c in poly.items():
            out.setdefault((p + i, q + j), FockVector()).add(vec, c)
    return out


def _product(a: FockOperator, b: FockOperator, st, cutoff, fa, fb, margin, ceil=None):
    try:
        return pair_series(a, b, st, cutoff, fa, fb, ceil, ceil)
    except ValueError:
        return product_series(a, b, st, cutoff, fa, fb, margin)


def _table_residual(lhs: dict, rhs: dict, window: int, st: FockState) -> list:
    out = []
    for key in sorted(set(lhs) | set(rhs)):
        p, q = key
        if not (_in_window(p, window) and _in_window(q, window)):
            continue
        d = FockVector()
        d.add(lhs.get(key, {}))
        d.add(rhs.get(key, {}), -1)
        if not d.is_zero():
            out.append({"state": str(st), "u_power": p, "v_power": q, "difference": d.to_json()})
    return out


def _exchange_state(args) -> list:
    spec_id, k, hbar, variant, cutoff, window, margin, st = args
    spec = relation(spec_id)
    a = _fock_op(spec.left[0], k, hbar, variant)
    b = _fock_op(spec.left[1], k, hbar, variant)
    num, den = _rational_polys(spec.expected, k, hbar)
    deg = max(i + j for i, j in list(num) + list(den))
    floor = -window - 1 - deg
    ab = _product(a, b, st, cutoff, floor, floor, margin, window - 1)
    ba = {(p, q): v for (q, p), v in _product(b, a, st, cutoff, floor, floor, margin, window - 1).items()}
    return _table_residual(_apply_uv(den, ab), _apply_uv(num, ba), window, st)


def _delta_coefficient(g: dict, P: Fraction, N: Fraction, a: Fraction) -> FockVector:
    """Coefficient of ``x^P`` in ``(x - a)^N g(x)`` (expanded in ``1/x``)."""
    out = FockVector()
    if not g:
        return out
    top = max(g)
    i = 0
    while P - N + i <= top:
        r = P - N + i
        if r in g:
            out.add(g[r], _binom_general(N, i) * (-a) ** i)
        i += 1
    return out


def _delta_state(args) -> list:
    k, hbar, variant, cutoff, window, margin, st = args
    e = _fock_op("e", k, hbar, variant)
    f = _fock_op("f", k, hbar, variant)
    hp = _fock_op("h_plus", k, hbar, variant, -Q * k)
    hm = _fock_op("h_minus", k, hbar, variant, -Q * k)
    floor = -window - 1
    ef = _product(e, f, st, cutoff, floor, floor, margin, window - 1)
    fe = {(p, q): v for (q, p), v in _product(f, e, st, cutoff, floor, floor, margin, window - 1).items()}
    lhs: dict = {}
    for key, v in ef.items():
        lhs.setdefault(key, FockVector()).add(v)
    for key, v in fe.items():
        lhs.setdefault(key, FockVector()).add(v, -1)
    # delta(u - v - a) = sum_n (u - a)^n v^{-n-1}, a = k*hbar/2
    a = k * hbar / 2
    g1 = hp.series(st, cutoff, floor - 2 * window - 2)
    g2 = hm.series(st, cutoff, floor - 2 * window - 2)
    rhs: dict = {}
    keys = {key for key in lhs if _in_window(key[0], window) and _in_window(key[1], window)}
    offsets_u = {p - int(p) for p, _ in lhs} | {Fraction(0)}
    offsets_v = {q - int(q) for _, q in lhs} | {Fraction(0)}
    for ou in offsets_u:
        for ov in offsets_v:
            for m in range(-window, window + 1):
                for n in range(-window, window + 1):
                    keys.add((ou - m - 1, ov - n - 1))
    for P, Qv in keys:
        if not (_in_window(P, window) and _in_window(Qv, window)):
            continue
        vec = FockVector()
        vec.add(_delta_coefficient(g1, P, -Qv - 1, a), 1 / hbar)
        vec.add(_delta_coefficient(g2, Qv, -P - 1, a), -1 / hbar)
        if not vec.is_zero():
            rhs[(P, Qv)] = vec
    return _table_residual(lhs, rhs, window, st)


def _commutator_state(args) -> list:
    name_a, name_b, k, hbar, variant, cutoff, window, margin, st = args
    a = _fock_op(name_a, k, hbar, variant)
    b = _fock_op(name_b, k, hbar, variant)
    floor = -window - 1
    ab = _product(a, b, st, cutoff, floor, floor, margin, window - 1)
    ba = {(p, q): v for (q, p), v in _product(b, a, st, cutoff, floor, floor, margin, window - 1).items()}
    return _table_residual(ab, ba, window, st)


def _run_states(fn, head: tuple, states, workers=None) -> list:
    workers = worker_count() if workers is None else workers
    jobs = [head + (st,) for st in states]
    residual: list = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            for part in pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))):
                residual.extend(part)
    else:
        for job in jobs:
            residual.extend(fn(job))
    return residual


def _states(cutoff: int, radius: int):
    return states_up_to(cutoff, charge_sectors(radius))


def _variant_key(variant) -> tuple:
    return tuple(sorted(resolve_variants(variant).items()))


# ---------------------------------------------------------------------------
# public checks


def verify_relation(spec: RelationSpec | str, k=None, cutoff: int = 3, variant=None, *, mode: str | None = None,
                    hbar=1, window: int = 2, radius: int = 1, margin: int = 6, workers=None) -> CheckReport:
    """Check one relation.  ``k=None`` means symbolic level (Fock mode then uses k=1)."""
    if isinstance(spec, str):
        spec = relation(spec)
    if mode is None:
        mode = "fock" if spec.mode == "fock" else "symbolic"
    hbar = rat(hbar)
    if mode == "symbolic" and spec.expected is not DELTA:
        try:
            ok, residual = _symbolic_exchange(spec, k, variant)
        except NonScalarExchange as exc:
            rep = verify_relation(spec, k, cutoff, variant, mode="fock", hbar=hbar, window=window, radius=radius,
                                  margin=margin, workers=workers)
            rep.details["routed"] = f"non-scalar exchange: {exc}"
            return rep
        return CheckReport(spec.id, "symbolic", ok, residual, _params(k, variant), spec.formula)
    if mode == "symbolic":
        ok, residual = symbolic_ef_delta(variant)
        return CheckReport(spec.id, "symbolic", ok, "1" if ok else residual, _params(k, variant), spec.formula,
                           {"decomposition": "residues of the e-f contraction at x = +-k/2"})
    kf = Fraction(1) if k is None else rat(k)
    vkey = _variant_key(variant)
    states = _states(cutoff, radius)
    if spec.expected is DELTA:
        residual = _run_states(_delta_state, (kf, hbar, vkey, cutoff, window, margin), states, workers)
    else:
        residual = _run_states(_exchange_state, (spec.id, kf, hbar, vkey, cutoff, window, margin), states, workers)
    params = _params(kf, variant, hbar=hbar, cutoff=cutoff, window=window, sectors=radius)
    return CheckReport(spec.id, "fock", not residual, residual, params, spec.formula, {"states": len(states)})


def verify_defining(k=None, variant=None, *, fock: bool = True, cutoff: int = 3, window: int = 2, radius: int = 1,
                    hbar=1, workers=None) -> list[CheckReport]:
    """Every relation symbolically (where scalar) plus the delta relation on Fock states."""
    reports = []
    for spec in RELATIONS:
        if spec.expected is DELTA:
            reports.append(verify_relation(spec, k, variant=variant, mode="symbolic"))
            if fock:
                reports.append(verify_relation(spec, 1 if k is None else k, cutoff, variant, mode="fock", hbar=hbar,
                                               window=window, radius=radius, workers=workers))
        else:
            reports.append(verify_relation(spec, k, variant=variant, mode="symbolic"))
    return reports


def verify_ef_display(variant=None) -> CheckReport:
    """The printed four-term ``:e f:`` against the engine's contour-ordered product."""
    from .wakimoto import contour_kernels

    engine = normal_order_ef(build("e", variant), build("f", variant), contour_kernels())
    diff = (engine - ef_display(variant)).collect()
    ok = diff.is_zero()
    return CheckReport("ef-display", "symbolic", ok, "1" if ok else f"{len(diff)} surviving terms",
                       _params(None, variant), ":e(u) f(u): four-term display")


# -- R-matrix scalar factors --------------------------------------------------


@dataclass(frozen=True)
class ChargeConjugation:
    matrix: tuple = ((0, -1), (1, 0))

    def as_sympy(self) -> sympy.Matrix:
        return sympy.Matrix(self.matrix)

    def squares_to_minus_one(self) -> bool:
        C = self.as_sympy()
        return C * C == -sympy.eye(2)


_U = sympy.Symbol("u")


def _r_matrix_part(u) -> sympy.Matrix:
    """Matrix part of ``R(u)`` at hbar = 1: ``(u + P) / (u + 1)``."""
    P = sympy.zeros(4)
    for i in range(2):
        for j in range(2):
            P[2 * i + j, 2 * j + i] = 1
    return (u * sympy.eye(4) + P) / (u + 1)


def _partial_transpose_1(M: sympy.Matrix) -> sympy.Matrix:
    out = sympy.zeros(4)
    for i in range(2):
        for j in range(2):
            for a in range(2):
                for b in range(2):
                    out[2 * j + a, 2 * i + b] = M[2 * i + a, 2 * j + b]
    return out


def _scalar_ratio(A: sympy.Matrix, B: sympy.Matrix) -> sympy.Expr:
    """``c`` with ``A = c B`` (raises if the matrices are not proportional)."""
    c = None
    for a, b in zip(A, B):
        if b == 0:
            if sympy.simplify(a) != 0:
                raise ValueError("matrices are not proportional")
            continue
        r = sympy.cancel(a / b)
        if c is None:
            c = r
        elif sympy.cancel(r - c) != 0:
            raise ValueError("matrices are not proportional")
    return c


def _linear_factors(expr: sympy.Expr) -> FactorProduct:
    """A rational function of ``u`` with rational roots as a FactorProduct in ``x = u``."""
    out = FactorProduct.one()
    for part, sign in zip(sympy.fraction(sympy.cancel(expr)), (1, -1)):
        const, factors = sympy.factor_list(part, _U)
        out = out * FactorProduct.const(Fraction(str(const)) ** sign)
        for fac, e in factors:
            poly = sympy.Poly(fac, _U)
            if poly.degree() != 1:
                raise ValueError(f"non-linear factor {fac}")
            lead, c0 = (Fraction(str(x)) for x in poly.all_coeffs())
            out = out * FactorProduct.const(lead ** (sign * e)) * FactorProduct.linear(c0 / lead, sign * e)
    return out


def verify_rho_properties(L: int = 10_000) -> CheckReport:
    """Unitarity, crossing (reduced to a scalar identity) and a numeric probe of rho^+."""
    M = _r_matrix_part
    C = ChargeConjugation()
    details: dict = {"C^2 = -1": C.squares_to_minus_one()}
    # unitarity: rho+(u) rho-(-u) M(u) M(-u) = 1 with M(u) M(-u) = c(u) * 1
    c_unit = _linear_factors(_scalar_ratio(M(_U) * M(-_U), sympy.eye(4)))
    unit = (rho_plus() * rho_minus().negated() * c_unit).normalize()
    details["unitarity"] = unit.is_one()
    # crossing: (C x 1) M(u) (C x 1)^-1 = c(u) M(-u-1)^{t1}, so rho^{+-}(u) c(u) = rho^{-+}(-u-1)
    CC = sympy.kronecker_product(C.as_sympy(), sympy.eye(2))
    lhs = CC * M(_U) * CC.inv()
    rhs = _partial_transpose_1(M(-_U - 1))
    c_cross = _linear_factors(_scalar_ratio(lhs, rhs))
    for name, a, b in (("crossing +", rho_plus(), rho_minus()), ("crossing -", rho_minus(), rho_plus())):
        details[name] = (a * c_cross / b.negated().shifted(1)).normalize().is_one()
    # numeric: rho+(-hbar) from the product form against the Gamma form (= 2/pi)
    approx = rho_plus().eval_truncated(-1, 1, 0, L)
    exact = rho_gamma(+1).value(-1.0)
    details["rho+(-h) product"] = approx
    details["rho+(-h) gamma"] = exact
    details["2/pi"] = 2 / pi
    details["gamma oracle"] = gamma(1) ** 2 / (gamma(0.5) * gamma(1.5))
    err = abs(approx - exact)
    details["|difference|"] = err
    ok_num = err <= 1e-4 and abs(exact - 2 / pi) < 1e-12
    passed = all(v for key, v in details.items() if isinstance(v, bool)) and ok_num
    failing = [key for key, v in details.items() if v is False]
    if not ok_num:
        failing.append("numeric probe")
    return CheckReport("rho-properties", "symbolic", passed, "1" if passed else failing, {"L": L},
                       "rho+(x) rho-(-x) = 1; (C x 1) R(u) (C x 1)^-1 = R(-u-h)^t1; rho+(-h) = 2/pi", details)


# -- center and derivation -------------------------------------------------------


def verify_center_heisenberg(k=1, cutoff: int = 3, variant=None, *, window: int = 2, radius: int = 1, hbar=1,
                             workers=None, fock: bool = True) -> list[CheckReport]:
    reports = []
    for K_name in ("K_plus", "K_minus"):
        for x in ("e", "f", "h_plus", "h_minus"):
            a, b = build(K_name, variant), build(x, variant)
            zero = a.collect().is_zero()
            if zero:
                # K is the zero operator: it trivially commutes with everything
                ok, res = True, "1"
            else:
                r = exchange_factor(a.collect(), b).normalize()
                ok, res = r.is_one(), ("1" if r.is_one() else str(r))
            reports.append(CheckReport(f"{K_name}-{x}", "symbolic", ok, res, _params(None, variant),
                                       f"{K_name}(u) {x}(v) = {x}(v) {K_name}(u)",
                                       {"K identically zero": zero}))
    if fock:
        kf, hb = rat(k), rat(hbar)
        vkey = _variant_key(variant)
        states = _states(cutoff, radius)
        for K_name in ("K_plus", "K_minus"):
            for x in ("e", "f", "h_plus", "h_minus"):
                residual = _run_states(_commutator_state, (K_name, x, kf, hb, vkey, cutoff, window, 6), states,
                                       workers)
                reports.append(CheckReport(f"{K_name}-{x}", "fock", not residual, residual,
                                           _params(kf, variant, hbar=hb, cutoff=cutoff, window=window,
                                                   sectors=radius),
                                           f"[{K_name}[m], {x}[n]] = 0"))
    return reports


DERIVATION_CURRENTS = ("e", "f", "h_plus", "h_minus", "k1_plus", "k2_plus", "k1_minus", "k2_minus")


def _derivation_state(args) -> list:
    name, k, hbar, variant, cutoff, window, st = args
    op = _fock_op(name, k, hbar, variant)
    d = DerivationCharge(k)
    floor = -window - 2
    vec = FockVector.basis(st)
    direct = op.series(vec, cutoff, floor)
    lhs: dict = {}
    for p, w in direct.items():
        lhs.setdefault(p, FockVector()).add(d.act(w).truncated(cutoff))
    for p, w in op.series(d.act(vec), cutoff, floor).items():
        lhs.setdefault(p, FockVector()).add(w, -1)
    rhs = {p - 1: w.scaled(p) for p, w in direct.items() if p}
    out = []
    for p in sorted(set(lhs) | set(rhs)):
        if not _in_window(p, window):
            continue
        diff = FockVector()
        diff.add(lhs.get(p, {}))
        diff.add(rhs.get(p, {}), -1)
        if not diff.is_zero():
            out.append({"state": str(st), "u_power": p, "difference": diff.to_json()})
    return out


def verify_derivation(k=1, cutoff: int = 3, variant=None, *, currents=DERIVATION_CURRENTS, window: int = 2,
                      radius: int = 0, hbar=1, workers=None) -> list[CheckReport]:
    """``[d, x(u)] = d/du x(u)`` as coefficient tables (generic level only)."""
    kf = rat(k)
    if kf == -2:
        raise CriticalLevelUnsupported("d carries 2/(k+2); the derivation check needs k != -2")
    hb = rat(hbar)
    vkey = _variant_key(variant)
    states = _states(cutoff, radius)
    vac = DerivationCharge(kf).act(FockState.vacuum())
    reports = [CheckReport("d-vacuum", "fock", vac.is_zero(), [] if vac.is_zero() else vac.to_json(),
                           _params(kf, variant), "d |0> = 0")]
    for name in currents:
        residual = _run_states(_derivation_state, (name, kf, hb, vkey, cutoff, window), states, workers)
        reports.append(CheckReport(f"d-{name}", "fock", not residual, residual,
                                   _params(kf, variant, hbar=hb, cutoff=cutoff, window=window, sectors=radius),
                                   f"[d, {name}(u)] = d/du {name}(u)", {"states": len(states)}))
    return reports


# -- variant reconciliation ------------------------------------------------------


@dataclass
class Reconciliation:
    selected: dict
    matrix: dict = field(default_factory=dict)  # assignment string -> {check id: pass}

    def failing(self) -> dict:
        return {a: [c for c, ok in row.items() if not ok] for a, row in self.matrix.items()
                if not all(row.values())}


def _assignment_str(assign: dict) -> str:
    return ",".join(f"{s}={assign[s]}" for s in sorted(assign))


def _operands_key(spec: RelationSpec, variant) -> tuple:
    return tuple(tuple((str(a), v.key()) for a, v in build(name, variant).terms) for name in spec.left)


def _variant_suite(variant, cache: dict) -> dict:
    """Symbolic suite for one assignment; verdicts are reused when a relation's operands are unchanged."""
    row = {}
    for spec in RELATIONS:
        key = (spec.id, _operands_key(spec, variant))
        if key not in cache:
            cache[key] = verify_relation(spec, None, variant=variant, mode="symbolic").passed
        row[spec.id] = cache[key]
    row["ef-display"] = verify_ef_display(variant).passed
    return row


def reconcile_variants() -> Reconciliation:
    """Run the symbolic defining suite for every variant assignment.

    Exactly one assignment should pass everything; the failing ones are
    kept as evidence that the checker detects each ambiguous site.
    """
    import itertools

    sites = sorted(VARIANT_SITES)
    matrix = {}
    cache: dict = {}
    for choice in itertools.product(*(VARIANT_SITES[s] for s in sites)):
        assign = dict(zip(sites, choice))
        matrix[_assignment_str(assign)] = _variant_suite(assign, cache)
    passing = [a for a, row in matrix.items() if all(row.values())]
    if not passing:
        raise NoConsistentVariant("no variant assignment passes the defining relations")
    if len(passing) > 1:
        raise NoConsistentVariant(f"tie between {passing}")
    selected = dict(part.split("=") for part in passing[0].split(","))
    return Reconciliation(selected, matrix)


def reconciliation_report(rec: Reconciliation) -> CheckReport:
    ok = rec.selected == DEFAULT_VARIANTS
    return CheckReport("variant-reconciliation", "symbolic", ok, "1" if ok else rec.selected,
                       {"sites": sorted(VARIANT_SITES)}, "unique all-pass variant assignment",
                       {"selected": rec.selected, "failing": rec.failing()})
