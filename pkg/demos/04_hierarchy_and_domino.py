"""Index hierarchies and torus tilings.

The index hierarchy uses kappa+1 levels of indices: level 0 is a chain
of mu constants, and each later level consists of bit strings over the
previous level's chain, so level l holds 2^^l(mu-1)+1 indices.  Any
model must realize these towers, which is what makes the encodings hard.
A domino system is then laid out on the top-level chain as a torus.
"""

from sepfrag import evaluate, formula_len
from sepfrag.generators import (
    DominoSystem,
    HierarchyParams,
    brute_force_tiler,
    canonical_domino_model,
    canonical_hierarchy_model,
    generate_domino_encoding,
    generate_index_hierarchy,
    hierarchy_level_sets,
)

print("Canonical hierarchy models and their level chains:")
for kappa, mu in ((1, 2), (1, 3), (2, 2)):
    p = HierarchyParams(kappa, mu)
    sentence = generate_index_hierarchy(p)
    model = canonical_hierarchy_model(p)
    chains = hierarchy_level_sets(model, kappa)
    print(f"  kappa={kappa}, mu={mu}: formula length {formula_len(sentence)}, "
          f"|universe|={len(model.universe)}")
    for level, chain in enumerate(chains):
        print(f"    level {level}: {' -> '.join(chain)}")
    print(f"    model satisfies the axioms: {evaluate(model, {}, sentence)}")
print()

print("A one-tile domino system on the 3x3 torus:")
system = DominoSystem(("A",), frozenset({("A", "A")}), frozenset({("A", "A")}))
p = HierarchyParams(1, 2)
t = p.torus_size().evaluate()
tiling = brute_force_tiler(system, ("A",), t)
encoding = generate_domino_encoding(system, ("A",), p)
model = canonical_domino_model(system, ("A",), p, tiling)
print(f"  torus size: {t}, tiling found: {tiling is not None}")
print(f"  encoding length: {formula_len(encoding)}")
print(f"  canonical model satisfies the encoding: {evaluate(model, {}, encoding)}")
print()

print("Two alternating tiles cannot tile an odd torus horizontally:")
alternating = DominoSystem(
    ("A", "B"),
    frozenset({("A", "B"), ("B", "A")}),
    frozenset({("A", "A"), ("B", "B")}),
)
print("  3x3:", brute_force_tiler(alternating, ("A",), 3))
tiling4 = brute_force_tiler(alternating, ("A",), 4)
print("  4x4 bottom row:", [tiling4.cells[(x, 0)] for x in range(4)])
