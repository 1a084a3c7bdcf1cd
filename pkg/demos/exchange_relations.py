"""Free-field currents and their exchange factors.

Builds the bosonized currents, prints the scalar exchange factor of a few
pairs at generic level, then confirms the e-f delta relation on a Fock window.
"""
from hbar_miura.boson import exchange_factor
from hbar_miura.relations import RELATIONS, verify_relation
from hbar_miura.wakimoto import build

for a, b in [("e", "e"), ("f", "f"), ("h_plus", "e"), ("k1_plus", "f")]:
    print(f"{a}(u) {b}(v) = [{exchange_factor(build(a), build(b))}] {b}(v) {a}(u)")

print()
for spec in RELATIONS:
    rep = verify_relation(spec, None, mode="symbolic")
    print(f"{rep.check:12s} {'ok' if rep.passed else 'FAIL'}")

rep = verify_relation("e-f", 1, 2, mode="fock", window=1, radius=0)
print(f"\ne-f delta relation at k=1 on {rep.details['states']} Fock states: {'ok' if rep.passed else 'FAIL'}")
