"""Fragment recognition and the degree of interaction.

A sentence is *separated* when, after bringing it into standard form
(prenex, negation normal form), no atom contains both a universally
quantified variable and an existentially quantified one from the
alternating part of the prefix.  The *degree* then measures how many
distinct existential blocks are chained together through atoms.
"""

from sepfrag import analysis, parse_formula, to_standard_form

RUNNING_EXAMPLE = (
    "forall x1. exists y1 v1. forall x2. exists y2 v2. forall x3. exists y3 v3. "
    "(P(x1, x2, x3) & ~Q(y1, y3)) | P(y2, v2, v3) | ~Q(y3, v1)"
)


def show(text):
    f, sig = parse_formula(text)
    sf = to_standard_form(f)
    report = analysis.analyze(sf)
    print(f"  {text}")
    print(f"    separated: {report.is_sf}   strongly separated: {report.is_ssf}")
    print(f"    monadic: {report.is_mfo}    exists*forall*: {report.is_bsr}")
    if report.is_sf:
        print(f"    degree: {report.degree}  (alternations: {report.alternations})")
        for vars_, levels in report.partition.components:
            print(f"      component {sorted(vars_)} spans blocks {sorted(levels)}")
        bounds = analysis.bounds(sf)
        print(f"    small-model bound: {bounds.model_size}")
        if bounds.bsr_model_size is not None:
            print(f"    exists*forall* bound: {bounds.bsr_model_size}")
        if bounds.mfo_model_size is not None:
            print(f"    monadic bound: {bounds.mfo_model_size}")
    print()


print("A sentence with six interacting existential variables in two components:")
show(RUNNING_EXAMPLE)

print("Monadic sentences always have degree 1 (unary atoms cannot join blocks):")
show("forall x. exists y. P(x) | Q(y) | ~T(y)")

print("A sentence whose only atom mixes the two sides is not separated:")
show("forall x. exists y. R(x, y)")

print("The leading existential block is exempt from the separation rule:")
show("exists z. forall x. R(z, x)")

print("Tetration grows fast; bounds are kept symbolic once they overflow:")
for k in range(5):
    e = analysis.twoup(k, 3)
    print(f"  2^^{k}(3) = {e.evaluate() if e.evaluate() is not None else e}")
