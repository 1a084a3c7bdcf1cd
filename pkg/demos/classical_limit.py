"""Classical Poisson bracket of s(u) and the difference-operator picture.

The Lambda brackets give the shifted-delta terms of {s(u), s(v)}; the
second-order difference operator D^2 - s(u) D + 1 factors through Lambda and
annihilates Q(u + h) when s is built from a polynomial Q.
"""
from hbar_miura.poisson import s_bracket, verify_jacobi
from hbar_miura.skew import baxter_check, miura_factor_check

sb = s_bracket(8)
print("delta atoms of {s(u), s(v)} (shift in units of h -> coefficient):", dict(sb.scalar_deltas()))
print("residual after subtracting the expected series:", sb.residual or "none")
print("Jacobi on random triples:", verify_jacobi(4, 5).passed)

print("factorization:", miura_factor_check().passed)
for q in ("u**2", "u**3 - 2*u + 1/3"):
    rep = baxter_check(q)
    print(f"Q = {q}: s(u) = {rep.details['s']}, annihilated: {rep.passed}")
