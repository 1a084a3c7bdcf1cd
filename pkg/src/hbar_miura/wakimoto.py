"""Free-field (Wakimoto) currents of the Yangian double at level k.

Every builder returns a :class:`VOSum` whose leg shifts are affine in the
symbolic level ``k`` (units of hbar).  ``u_pm = u +- k/4``.

Ambiguous source formulas are exposed as variants, grouped by site:

* ``kbos``: the bosonic k_i^pm.  ``literal`` transcribes the printed closed
  forms (reading the malformed factor as shift ``2l``); ``shifted``
  evaluates the same forms at ``u + k/4`` for k^+ and ``u - k/4`` for k^-.
  :func:`reconstruct_k_from_h` builds them independently from h^pm.
* ``hminus``: the second b-leg of h^-.  The printed shift ``-(k/4+1)``
  (``printed``) against ``-(5k/4+1)`` (``corrected``).
* ``ef``: the printed four-term normal-ordered product.  The denominator of
  its last term is ``Upsilon^+(u-(k+1))`` as printed (``printed``),
  ``Upsilon^-(u-(k+1))`` (``upsilon-minus``) or ``Upsilon^-(u+(k+1))``
  (``corrected``).
"""
from __future__ import annotations

from fractions import Fraction

from .boson import HBAR, VertexOperator, VOSum
from .exact import AffineShift, KCoeff, shift
from .shiftsum import ShiftSum

CURRENT_NAMES = (
    "e", "f", "h_plus", "h_minus",
    "k1_plus", "k1_minus", "k2_plus", "k2_minus",
    "upsilon_plus", "upsilon_minus",
    "lambda_cap_plus", "lambda_cap_minus", "lambda_cap",
    "K_plus", "K_minus", "d_charge",
)

VARIANT_SITES = {
    "kbos": ("shifted", "literal"),
    "ef": ("corrected", "upsilon-minus", "printed"),
    "hminus": ("corrected", "printed"),
}
DEFAULT_VARIANTS = {"kbos": "shifted", "ef": "corrected", "hminus": "corrected"}

TWO_OVER_KAPPA = KCoeff.monomial(2, -1)
KAPPA = shift(2, 1)          # k + 2
HALF_KAPPA = shift(1, Fraction(1, 2))
U_MINUS = shift(0, Fraction(-1, 4))
U_PLUS = shift(0, Fraction(1, 4))


class UnknownVariant(KeyError):
    pass


class UnknownCurrent(KeyError):
    pass


def resolve_variants(variant=None) -> dict[str, str]:
    """Map a variant spec to a per-site choice.

    Accepts ``None``/``"reconciled"`` (defaults), a dict, or a string of
    ``site=choice`` pairs separated by commas.
    """
    out = dict(DEFAULT_VARIANTS)
    if variant in (None, "", "reconciled", "default"):
        return out
    if isinstance(variant, str):
        pairs = {}
        for part in variant.split(","):
            if "=" not in part:
                raise UnknownVariant(variant)
            site, choice = (p.strip() for p in part.split("=", 1))
            pairs[site] = choice
        variant = pairs
    for site, choice in dict(variant).items():
        if site not in VARIANT_SITES or choice not in VARIANT_SITES[site]:
            raise UnknownVariant(f"{site}={choice}")
        out[site] = choice
    return out


# ---------------------------------------------------------------------------
# elementary pieces

def upsilon_plus(s=0) -> VertexOperator:
    """``Upsilon^+(u+s) = (u+s-(k/2+1))^{p_lambda} exp(lambda^+(u+s; -(k/2+1)))``."""
    B = AffineShift.of(s) + shift(-1, Fraction(-1, 2))
    return VertexOperator.zero_power("lambda", 1, B).legs_concat(VertexOperator.plus("lambda", 1, B))


def upsilon_minus(s=0) -> VertexOperator:
    """``Upsilon^-(u+s) = exp(2/(k+2) lambda^-(u+s; -(k+2)))``."""
    return VertexOperator.minus("lambda", TWO_OVER_KAPPA, AffineShift.of(s) - KAPPA)


def upsilon_minus_family(base, step, sign=1) -> VertexOperator:
    """``prod_{l>=0} Upsilon^-(u + base + l*step)^sign``."""
    return VertexOperator.minus_family("lambda", TWO_OVER_KAPPA * sign, AffineShift.of(base) - KAPPA, step)


def _prod(*ops: VertexOperator) -> VertexOperator:
    out = VertexOperator.identity()
    for op in ops:
        out = out.legs_concat(op)
    return out


def vo_family(V: VertexOperator, base, step, sign: int = 1) -> VertexOperator:
    """``prod_{l>=0} V(u + base + l*step)^sign`` for a one-sided ``V``."""
    if not V.one_sided or not V.prefactor.is_one() or any(V.charge):
        raise ValueError("families are only formed from one-sided operators without charges")

    def fam(ss: ShiftSum) -> ShiftSum:
        out = ShiftSum()
        for (s, j), c in ss.finite:
            out = out + ShiftSum.family(s + AffineShift.of(base), step, c * sign, j)
        if ss.families:
            raise ValueError("nested families")
        return out

    return VertexOperator(
        tuple(fam(x) for x in V.creation),
        tuple(fam(x) for x in V.annihilation),
        tuple(fam(x) for x in V.zero_p),
    ).normalize()


# ---------------------------------------------------------------------------
# currents

def h_plus() -> VertexOperator:
    B1, B2 = shift(0, Fraction(-3, 4)), shift(-2, Fraction(-3, 4))
    return _prod(
        upsilon_plus(U_MINUS + 1),
        upsilon_plus(U_MINUS - 1).inverse(),
        VertexOperator.zero_power("b", 1, B1),
        VertexOperator.zero_power("b", -1, B2),
        VertexOperator.plus("b", 1, B1),
        VertexOperator.plus("b", -1, B2),
    )


def h_minus(variant=None) -> VertexOperator:
    choice = resolve_variants(variant)["hminus"]
    A2 = shift(-1, Fraction(-5, 4)) if choice == "corrected" else shift(-1, Fraction(-1, 4))
    return _prod(
        upsilon_minus(U_PLUS - HALF_KAPPA),
        upsilon_minus(U_PLUS + HALF_KAPPA).inverse(),
        VertexOperator.minus("b", 1, shift(-3, Fraction(-5, 4))),
        VertexOperator.minus("b", -1, A2),
    )


def e_terms() -> tuple[VertexOperator, VertexOperator]:
    b_part = VertexOperator.full("b", -1, shift(-1, -1), shift(-2, -1))
    e1 = VertexOperator.full("c", -1, shift(-1, -1)).legs_concat(b_part)
    e2 = VertexOperator.full("c", -1, shift(-2, -1)).legs_concat(b_part)
    return e1, e2


def f_terms() -> tuple[VertexOperator, VertexOperator]:
    f1 = _prod(
        upsilon_plus(1),
        upsilon_plus(-1).inverse(),
        VertexOperator.full("b", 1, shift(-1, Fraction(-1, 2)), shift(0, Fraction(-1, 2))),
        VertexOperator.full("c", 1, shift(-1, Fraction(-1, 2))),
    )
    f2 = _prod(
        upsilon_minus(-HALF_KAPPA),
        upsilon_minus(HALF_KAPPA).inverse(),
        VertexOperator.full("b", 1, shift(-3, Fraction(-3, 2)), shift(-2, Fraction(-3, 2))),
        VertexOperator.full("c", 1, shift(-2, Fraction(-3, 2))),
    )
    return f1, f2


def e_current() -> VOSum:
    e1, e2 = e_terms()
    return VOSum.of(e1, -1 / HBAR) + VOSum.of(e2, 1 / HBAR)


def f_current() -> VOSum:
    f1, f2 = f_terms()
    return VOSum.of(f1, 1 / HBAR) + VOSum.of(f2, -1 / HBAR)


def reconstruct_k_from_h(sign: int, i: int, variant=None) -> VertexOperator:
    """k_i^pm from h^pm by the infinite-product inversion formulas."""
    if sign > 0:
        h = h_plus()
        num_base, den_base = {1: (-1, 0), 2: (-1, -2)}[i]
        step = -2
    else:
        h = h_minus(variant)
        num_base, den_base = {1: (2, 1), 2: (0, 1)}[i]
        step = 2
    return vo_family(h, num_base, step).legs_concat(vo_family(h, den_base, step, -1)).normalize()


def _k_literal(sign: int, i: int, arg) -> VertexOperator:
    """Printed closed forms of the bosonic k_i^pm at argument ``u + arg``."""
    a = AffineShift.of(arg)
    if sign > 0:
        if i == 1:
            ups = _prod(upsilon_plus(a + shift(0, Fraction(-1, 2))), upsilon_plus(a + shift(1, Fraction(-1, 2))).inverse())
            B1, B2 = shift(-1, -1), shift(0, -1)
        else:
            ups = _prod(upsilon_plus(a + shift(0, Fraction(-1, 2))), upsilon_plus(a + shift(-1, Fraction(-1, 2))).inverse())
            B1, B2 = shift(-1, -1), shift(-2, -1)
        return _prod(
            ups,
            VertexOperator.zero_power("b", 1, a + B1),
            VertexOperator.zero_power("b", -1, a + B2),
            VertexOperator.plus("b", 1, a + B1),
            VertexOperator.plus("b", -1, a + B2),
        ).normalize()
    if i == 1:
        fams = [(shift(2, 1), 1), (shift(1), 1), (shift(3, 1), -1), (shift(0), -1)]
        A1, A2 = shift(-1, -1), shift(-2, -1)
    else:
        fams = [(shift(2, 1), 1), (shift(-1), 1), (shift(1, 1), -1), (shift(0), -1)]
        A1, A2 = shift(-3, -1), shift(-2, -1)
    ops = [upsilon_minus_family(a + base, 2, sgn) for base, sgn in fams]
    ops.append(VertexOperator.minus("b", 1, a + A1))
    ops.append(VertexOperator.minus("b", -1, a + A2))
    return _prod(*ops).normalize()


def k_current(sign: int, i: int, variant=None) -> VertexOperator:
    if resolve_variants(variant)["kbos"] == "literal":
        return _k_literal(sign, i, 0)
    return _k_literal(sign, i, U_PLUS if sign > 0 else U_MINUS)


def lambda_plus(s=0) -> VertexOperator:
    s = AffineShift.of(s)
    half = Fraction(1, 2)
    return _prod(upsilon_plus(s - HALF_KAPPA + half), upsilon_plus(s - HALF_KAPPA - half).inverse()).normalize()


def lambda_minus(s=0) -> VertexOperator:
    s = AffineShift.of(s)
    half = Fraction(1, 2)
    return _prod(
        upsilon_minus_family(s + KAPPA + 1 - half, 2, 1),
        upsilon_minus_family(s + 1 + half, 2, 1),
        upsilon_minus_family(s + KAPPA + 1 + half, 2, -1),
        upsilon_minus_family(s + 1 - half, 2, -1),
    ).normalize()


def lambda_cap(s=0) -> VertexOperator:
    """Normal-ordered ``:Lambda^+(u+s) Lambda^-(u+s):``."""
    return lambda_plus(s).legs_concat(lambda_minus(s)).normalize()


def K_current(sign: int, variant=None) -> VOSum:
    """Heisenberg-center current ``k_2(u+hbar) k_1(u) - 1``."""
    prod = k_current(sign, 2, variant).shifted(1).legs_concat(k_current(sign, 1, variant)).normalize()
    return VOSum.of(prod) - VOSum.of(VertexOperator.identity())


def ef_display(variant=None) -> VOSum:
    """The printed four-term expression for ``:e(u)f(u):``."""
    choice = resolve_variants(variant)["ef"]
    b = lambda A, B: VertexOperator.full("b", 1, A, B)  # noqa: E731
    bneg = VertexOperator.full("b", -1, shift(-1, -1), shift(-2, -1))
    u1 = _prod(upsilon_plus(shift(1, Fraction(-1, 2))), upsilon_plus(shift(-1, Fraction(-1, 2))).inverse())
    u2 = _prod(upsilon_plus(shift(0, Fraction(-1, 2))), upsilon_plus(shift(-2, Fraction(-1, 2))).inverse())
    u3 = _prod(upsilon_minus(0), upsilon_minus(KAPPA).inverse())
    last_den = {
        "corrected": upsilon_minus(shift(1, 1)),
        "upsilon-minus": upsilon_minus(shift(-1, -1)),
        "printed": upsilon_plus(shift(-1, -1)),
    }[choice]
    u4 = _prod(upsilon_minus(-1), last_den.inverse())
    terms = [
        (-1, _prod(u1, b(shift(-1, -1), shift(0, -1)), bneg)),
        (1, _prod(u2, b(shift(-2, -1), shift(-1, -1)), bneg)),
        (1, _prod(u3, b(shift(-2, -1), shift(-1, -1)), bneg)),
        (-1, _prod(u4, b(shift(-3, -1), shift(-2, -1)), bneg)),
    ]
    out = VOSum()
    for c, v in terms:
        out = out + VOSum.of(v.normalize(), sympy_ratio(c))
    return out


def sympy_ratio(c):
    return c / HBAR**2


def build(name: str, variant=None) -> VOSum:
    """Build a named current as a VOSum at symbolic level."""
    resolve_variants(variant)
    one = lambda v: VOSum.of(v.normalize())  # noqa: E731
    if name == "e":
        return e_current()
    if name == "f":
        return f_current()
    if name == "h_plus":
        return one(h_plus())
    if name == "h_minus":
        return one(h_minus(variant))
    if name in ("k1_plus", "k1_minus", "k2_plus", "k2_minus"):
        return one(k_current(1 if name.endswith("plus") else -1, int(name[1]), variant))
    if name == "upsilon_plus":
        return one(upsilon_plus())
    if name == "upsilon_minus":
        return one(upsilon_minus())
    if name == "lambda_cap_plus":
        return one(lambda_plus())
    if name == "lambda_cap_minus":
        return one(lambda_minus())
    if name == "lambda_cap":
        return one(lambda_cap())
    if name == "K_plus":
        return K_current(1, variant)
    if name == "K_minus":
        return K_current(-1, variant)
    if name == "d_charge":
        raise UnknownCurrent("d_charge is a quadratic mode operator; use fock.DerivationCharge")
    raise UnknownCurrent(name)


def charge_shift(vs: VOSum, k) -> tuple[Fraction, Fraction, Fraction]:
    """Shift of the Fock labels (l, s, t) produced by each term (must agree)."""
    from .exact import rat

    shifts = set()
    for _, v in vs.terms:
        lam, b, c = (ch.at(k) if ch else Fraction(0) for ch in v.charge)
        # e^{alpha q_lambda} moves l by alpha*(k+2); e^{beta q_b} moves s by beta
        shifts.add((lam * (rat(k) + 2), b, c))
    if len(shifts) != 1:
        raise ValueError("terms carry different charges")
    return shifts.pop()


def contour_kernels() -> list:
    """Shifted Cauchy kernels of the contour definition, one per f-term."""
    from .factors import FactorProduct

    return [FactorProduct.linear(-HALF_KAPPA, -1), FactorProduct.linear(HALF_KAPPA, -1)]


def lambda_cap_inverse(s=0) -> VertexOperator:
    """``Lambda(u+s)^{-1} = Lambda^-(u+s)^{-1} Lambda^+(u+s)^{-1}`` (already normal-ordered)."""
    return lambda_minus(s).inverse().legs_concat(lambda_plus(s).inverse()).normalize()
