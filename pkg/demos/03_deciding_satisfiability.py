"""Deciding satisfiability.

Universal-free sentences reduce to propositional logic: Skolemize,
eliminate ground equations via a fresh congruence predicate, abstract
atoms, and classify the CNF (Horn -> unit propagation, 2-CNF ->
implication graph, otherwise DPLL).  Sentences with universals are
searched up to the smallest applicable model-size bound.
"""

from sepfrag import decide_sat, parse_formula, print_formula
from sepfrag.decide import DecideConfig, ground_equality_elim, skolemize_existential
from sepfrag.generators import expand_counting

print("Skolemization replaces existentials with fresh constants:")
f, _ = parse_formula("exists x y. R(x, y) & x = y")
print(" ", print_formula(f), "  ->  ", print_formula(skolemize_existential(f)))
print()

print("Ground equality elimination makes congruence explicit:")
g, _ = parse_formula("P(c) & c = d & ~P(d)")
print(" ", print_formula(ground_equality_elim(g))[:120], "...")
v = decide_sat(g)
print("  verdict:", v.status, " (the congruence instance closes the refutation)")
print()

print("Verdicts carry verified witnesses:")
for text in [
    "exists z. P(z) & ~P(z)",
    "P(c) & c = d",
    "forall x. exists y. P(x) | Q(y)",
    "forall x. P(x) & ~P(x)",
]:
    h, _ = parse_formula(text)
    v = decide_sat(h)
    witness = v.structure.to_json() if v.structure else "-"
    print(f"  {text:38s} -> {v.status:6s} {witness}")
print()

print("Counting quantifiers expand into plain existentials with")
print("pairwise disequalities, and force exactly that many elements:")
for k in (1, 2, 3):
    q, _ = parse_formula(f"exists>={k} y. y = y")
    expanded = expand_counting(q).formula
    v = decide_sat(expanded)
    print(f"  at least {k} element(s): minimal witness has "
          f"{len(v.structure.universe)} element(s)")
print()

print("Backends can be forced; Horn inputs normally take the linear path:")
h, _ = parse_formula("(~P(c) | Q(c)) & P(c)")
for backend in ("auto", "dpll"):
    v = decide_sat(h, DecideConfig(backend=backend))
    print(f"  backend={backend:5s} used={v.details['backend']}, status={v.status}")
