import itertools
import random

import pytest

from sepfrag import syntax as S
from sepfrag.errors import ConstantOutsideSubset, SignatureMismatch, UnassignedVariable
from sepfrag.search import GroundSpace, enumerate_structures, find_model
from sepfrag.semantics import Structure, evaluate, models, substructure
from sepfrag.syntax import parse_formula

from util import random_sentence


def P(name, *args):
    return S.Pred(name, tuple(S.Var(a) if a.islower() and len(a) == 1 else S.Const(a) for a in args))


def test_evaluate_simple_model():
    a = Structure(("a", "b"), {}, {"P": frozenset({("a",)})})
    f, _ = parse_formula("exists x. P(x)")
    assert evaluate(a, {}, f)
    g, _ = parse_formula("forall x. P(x)")
    assert not evaluate(a, {}, g)


def test_equality_is_identity():
    a = Structure(("a",), {"c": "a"}, {})
    f, _ = parse_formula("c = c")
    assert evaluate(a, {}, f)


def test_unassigned_variable_raises():
    a = Structure(("a",), {}, {"P": frozenset()})
    with pytest.raises(UnassignedVariable):
        evaluate(a, {}, S.Pred("P", (S.Var("x"),)))


def test_missing_predicate_raises():
    a = Structure(("a",), {}, {})
    with pytest.raises(SignatureMismatch):
        evaluate(a, {}, S.Pred("P", (S.Const("c"),)))


def test_counting_semantics():
    a = Structure(("a", "b", "c"), {}, {"P": frozenset({("a",), ("b",)})})
    assert evaluate(a, {}, S.CountingExists(2, ("x",), P("P", "x")))
    assert not evaluate(a, {}, S.CountingExists(3, ("x",), P("P", "x")))


def test_truth_table_agreement_ground():
    # ground quantifier-free formulas match a direct truth-table expansion
    rng = random.Random(11)
    atoms = [S.Pred("A", (S.Const("c"),)), S.Pred("B", (S.Const("c"),)),
             S.Pred("C", (S.Const("c"),)), S.Pred("D", (S.Const("c"),))]
    from util import random_boolean

    for _ in range(60):
        f = random_boolean(rng, atoms)
        for bits in itertools.product([False, True], repeat=4):
            table = {
                name: frozenset({("a",)}) if on else frozenset()
                for name, on in zip("ABCD", bits)
            }
            a = Structure(("a",), {"c": "a"}, table)
            val = {name: on for name, on in zip("ABCD", bits)}

            def tt(g):
                if isinstance(g, S.Pred):
                    return val[g.name]
                if isinstance(g, S.Not):
                    return not tt(g.sub)
                if isinstance(g, S.And):
                    return all(tt(p) for p in g.parts)
                if isinstance(g, S.Or):
                    return any(tt(p) for p in g.parts)
                if isinstance(g, S.Implies):
                    return (not tt(g.left)) or tt(g.right)
                if isinstance(g, S.Iff):
                    return tt(g.left) == tt(g.right)
                raise AssertionError(g)

            assert evaluate(a, {}, f) == tt(f)


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_structures(S.Signature({"P": 1}, set()), 2)) == 4
    assert sum(1 for _ in enumerate_structures(S.Signature({}, {"c"}), 2)) == 2
    assert sum(1 for _ in enumerate_structures(S.Signature({"P": 1}, {"c"}), 2)) == 8


def test_enumeration_matches_formula():
    sig = S.Signature({"P": 1, "R": 2}, {"c"})
    for size in (1, 2):
        expect = (size ** len(sig.constants)) * 2 ** (size + size * size)
        assert sum(1 for _ in enumerate_structures(sig, size)) == expect


def test_enumeration_deterministic():
    sig = S.Signature({"P": 1}, {"c"})
    a = [s.to_json() for s in enumerate_structures(sig, 2)]
    b = [s.to_json() for s in enumerate_structures(sig, 2)]
    assert a == b


def test_find_model_two_elements():
    f, _ = parse_formula("(exists x. P(x)) & (exists y. ~P(y))")
    m = find_model(f, max_size=2)
    assert m is not None and len(m.universe) == 2


def test_find_model_contradiction():
    f, _ = parse_formula("forall x. P(x) & ~P(x)")
    assert find_model(f, max_size=3) is None


def test_find_model_returns_smallest_first():
    f, _ = parse_formula("exists x. P(x)")
    m = find_model(f, max_size=3)
    assert len(m.universe) == 1


def test_substructure_full_subset_is_identity():
    a = Structure(("a", "b"), {"c": "a"}, {"R": frozenset({("a", "b")})})
    assert substructure(a, {"a", "b"}) == a


def test_substructure_drops_tuples():
    a = Structure(("a", "b"), {}, {"R": frozenset({("a", "b"), ("a", "a")})})
    b = substructure(a, {"a"})
    assert b.predicates["R"] == frozenset({("a", "a")})


def test_substructure_constant_guard():
    a = Structure(("a", "b"), {"c": "b"}, {})
    with pytest.raises(ConstantOutsideSubset):
        substructure(a, {"a"})


def test_universal_sentences_preserved_under_substructures():
    # prenex sentences without existential quantifiers survive restriction
    from util import random_atom, random_boolean, small_signature

    rng = random.Random(7)
    checked = 0
    while checked < 200:
        sig = small_signature(rng, max_bits=8)
        xs = ["x", "y"][: rng.randint(1, 2)]
        leaves = [random_atom(rng, sig, xs, with_eq=True) for _ in range(3)]
        f = S.Forall(tuple(xs), random_boolean(rng, leaves, allow_imp=False))
        for m in enumerate_structures(S.infer_signature(f, sig), 2):
            if not evaluate(m, {}, f):
                continue
            for drop in m.universe:
                keep = set(m.universe) - {drop}
                if not keep or any(e not in keep for e in m.constants.values()):
                    continue
                assert evaluate(substructure(m, keep), {}, f)
                checked += 1
            if checked >= 200:
                break


def test_packed_engine_agrees_with_reference_evaluator():
    # the vectorized oracle and the scalar evaluator must agree everywhere
    rng = random.Random(23)
    for _ in range(120):
        f, sig = random_sentence(rng, with_eq=True)
        size = rng.randint(1, 2)
        space = GroundSpace(S.infer_signature(f, sig), size)
        cmaps = list(space.const_maps())
        cmap = rng.choice(cmaps)
        chunk = rng.randrange(space.n_chunks)
        vec = space.eval_chunk(f, cmap, chunk)
        for _ in range(10):
            local = rng.randrange(1 << space.chunk_bits)
            code = (chunk << space.chunk_bits) + local
            got = bool((int(vec[local >> 6]) >> (local & 63)) & 1)
            assert got == evaluate(space.decode(cmap, code), {}, f)


def test_packed_engine_agrees_on_counting():
    rng = random.Random(5)
    sig = S.Signature({"P": 1}, set())
    for n in (1, 2, 3):
        f = S.CountingExists(n, ("x",), S.Pred("P", (S.Var("x"),)))
        space = GroundSpace(sig, 3)
        vec = space.eval_chunk(f, {}, 0)
        for code in range(8):
            got = bool((int(vec[0]) >> code) & 1)
            assert got == evaluate(space.decode({}, code), {}, f)


def test_models_helper():
    a = Structure(("a",), {}, {"P": frozenset({("a",)})})
    assert models(a, parse_formula("forall x. P(x)")[0])


def test_equivalent_upto_reflexive():
    from sepfrag.search import equivalent_upto

    f, _ = parse_formula("forall x. exists y. P(x) | Q(y)")
    assert equivalent_upto(f, f, 3).equal


def test_equivalent_upto_budget():
    from sepfrag.errors import BudgetExceeded
    from sepfrag.search import equivalent_upto

    f, _ = parse_formula("forall x y. R(x, y) | T(x, y) | U(y, x)")
    with pytest.raises(BudgetExceeded):
        equivalent_upto(f, S.Not(S.Not(f)), 3, budget=1000)


def test_budget_env_override(monkeypatch):
    from sepfrag.search import default_budget

    monkeypatch.setenv("SEPFRAG_BUDGET", "123")
    assert default_budget() == 123


def test_scope_minimization_preserves_truth():
    from sepfrag.search import scope_minimized

    rng = random.Random(47)
    for _ in range(80):
        f, sig = random_sentence(rng, with_eq=True)
        g = scope_minimized(f)
        for m in enumerate_structures(S.infer_signature(f, sig), 2):
            assert evaluate(m, {}, f) == evaluate(m, {}, g)
            break  # one structure per formula; full spaces below
        space = GroundSpace(S.infer_signature(f, sig), 2)
        for cmap in space.const_maps():
            va = space.eval_chunk(f, cmap, 0)
            vb = space.eval_chunk(g, cmap, 0)
            assert (va & space.valid_mask == vb & space.valid_mask).all()


def test_packed_engine_on_prefix_sentences():
    # exists*forall* prefixes with a joint matrix: the shape that needs
    # scope minimization to evaluate quickly must stay correct
    rng = random.Random(53)
    from util import random_atom, random_boolean, small_signature
    from sepfrag.search import scope_minimized

    for _ in range(40):
        sig = small_signature(rng, max_bits=8)
        us = [f"u{i}" for i in range(1, rng.randint(2, 4))]
        vs = [f"v{i}" for i in range(1, rng.randint(2, 4))]
        leaves = [random_atom(rng, sig, us + vs, with_eq=True) for _ in range(4)]
        f = S.Exists(tuple(us), S.Forall(tuple(vs), random_boolean(rng, leaves, allow_imp=False)))
        reduced = scope_minimized(f)
        size = 2
        space = GroundSpace(S.infer_signature(f, sig), size)
        cmaps = list(space.const_maps())
        cmap = cmaps[0]
        vec = space.eval_chunk(reduced, cmap, 0)
        for _ in range(8):
            code = rng.randrange(1 << space.n_bits)
            got = bool((int(vec[code >> 6]) >> (code & 63)) & 1)
            assert got == evaluate(space.decode(cmap, code), {}, f)
