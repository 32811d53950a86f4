import random

import pytest

from sepfrag import syntax as S
from sepfrag.errors import (
    ArityMismatch,
    NotASentence,
    ParseError,
    UnexpandedCounting,
)
from sepfrag.search import equivalent_upto
from sepfrag.syntax import (
    alpha_eq,
    canonical_key,
    classify_cnf,
    cnf_matrix,
    formula_len,
    parse_formula,
    print_formula,
    substitute,
    to_nnf,
    to_standard_form,
)

from util import random_sentence, random_sf_sentence


# --- parsing ---------------------------------------------------------------

def test_parse_basic_quantified():
    f, sig = parse_formula("forall x. exists y. P(x) | Q(y)")
    assert isinstance(f, S.Forall)
    assert isinstance(f.body, S.Exists)
    assert sig.predicates == {"P": 1, "Q": 1}


def test_parse_arity_mismatch():
    with pytest.raises(ArityMismatch) as e:
        parse_formula("P(x) & P(x, y)")
    assert e.value.symbol == "P"
    assert {e.value.seen, e.value.declared} == {1, 2}


def test_parse_intro_example_sf_shape():
    text = (
        "forall x1. exists y1 v1. forall x2. exists y2 v2. forall x3. exists y3 v3. "
        "(P(x1, x2, x3) & ~Q(y1, y3)) | P(y2, v2, v3) | ~Q(y3, v1)"
    )
    f, sig = parse_formula(text)
    sf = to_standard_form(f)
    assert len(sf.blocks) == 3
    assert sig.predicates == {"P": 3, "Q": 2}


def test_parse_counting():
    f, _ = parse_formula("exists>=2 y. P(y)")
    assert isinstance(f, S.CountingExists)
    assert f.n == 2


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse_formula("forall . P(c)")
    assert e.value.position == 7


def test_parse_scope_resolution():
    # bound names are variables, everything else lowercase is a constant
    f, sig = parse_formula("exists x. R(x, c)")
    atom = f.body
    assert atom.args[0] == S.Var("x")
    assert atom.args[1] == S.Const("c")
    assert sig.constants == {"c"}


def test_parse_precedence():
    f, _ = parse_formula("~P(c) & Q(c) | R(c) -> P(c) <-> Q(c)")
    assert isinstance(f, S.Iff)
    assert isinstance(f.left, S.Implies)
    assert isinstance(f.left.left, S.Or)
    assert isinstance(f.left.left.parts[0], S.And)
    assert isinstance(f.left.left.parts[0].parts[0], S.Not)


def test_implication_right_associative():
    f, _ = parse_formula("P(c) -> Q(c) -> R(c)")
    assert isinstance(f.right, S.Implies)


def test_rebound_variable_renamed():
    f, _ = parse_formula("(exists x. P(x)) & (exists x. Q(x))")
    names = [g.vars[0] for g in S.subformulas(f) if isinstance(g, S.Exists)]
    assert len(set(names)) == 2


# --- printing --------------------------------------------------------------

def test_print_negated_atom():
    f, _ = parse_formula("~P(x)")
    assert print_formula(f) == "~P(x)"


def test_print_quantifier_scope_stretches_right():
    f, _ = parse_formula("forall x. P(x) | Q(x)")
    s = print_formula(f)
    assert s == "forall x. P(x) | Q(x)"
    g, _ = parse_formula(s)
    assert alpha_eq(f, g)


def test_print_quantifier_inside_connective_parenthesized():
    f, _ = parse_formula("(forall x. P(x)) & Q(c)")
    s = print_formula(f)
    assert alpha_eq(parse_formula(s)[0], f)


def test_roundtrip_random(subtests=None):
    rng = random.Random(3)
    for _ in range(100):
        f, _ = random_sentence(rng, with_eq=True)
        printed = print_formula(f)
        g, _ = parse_formula(printed)
        assert alpha_eq(f, g), printed


def test_canonical_key_alpha_invariant():
    f, _ = parse_formula("exists x. P(x)")
    g, _ = parse_formula("exists w. P(w)")
    assert canonical_key(f) == canonical_key(g)
    assert print_formula(f) != print_formula(g)


# --- NNF -------------------------------------------------------------------

def test_nnf_de_morgan():
    f, _ = parse_formula("~(P(x) & Q(y))")
    assert print_formula(to_nnf(f)) == "~P(x) | ~Q(y)"


def test_nnf_biconditional_shape():
    f, _ = parse_formula("P(x) <-> Q(y)")
    assert print_formula(to_nnf(f)) == "(~P(x) | Q(y)) & (P(x) | ~Q(y))"


def test_nnf_rejects_counting():
    f, _ = parse_formula("exists>=2 y. P(y)")
    with pytest.raises(UnexpandedCounting):
        to_nnf(f)


def test_nnf_equivalent_on_random_formulas():
    rng = random.Random(17)
    for _ in range(100):
        f, _ = random_sentence(rng, with_eq=True)
        v = equivalent_upto(f, to_nnf(f), 3)
        assert v.equal


# --- standard form ---------------------------------------------------------

def test_standard_form_hoists_existential_first():
    f, _ = parse_formula("(forall x. P(x)) & (exists y. Q(y))")
    sf = to_standard_form(f)
    assert sf.leading and sf.blocks[0][0]


def test_standard_form_identity_case():
    f, _ = parse_formula("forall x. exists y. P(x) | Q(y)")
    sf = to_standard_form(f)
    assert sf.leading == ()
    assert sf.blocks == ((("x",), ("y",)),)


def test_standard_form_drops_unused_prefix_vars():
    f, _ = parse_formula("forall x. P(c)")
    sf = to_standard_form(f)
    assert sf.leading == () and sf.blocks == ()


def test_standard_form_requires_sentence():
    f = S.Pred("P", (S.Var("x"),))
    with pytest.raises(NotASentence):
        to_standard_form(f)


def test_standard_form_equivalence_random():
    rng = random.Random(29)
    for _ in range(100):
        f, _ = random_sentence(rng, with_eq=True)
        sf = to_standard_form(f)
        assert sf.check()
        assert equivalent_upto(f, sf.to_formula(), 3).equal


def test_checker_rejects_broken_shapes():
    f, _ = parse_formula("forall x. exists y. P(x) | Q(y)")
    sf = to_standard_form(f)
    # matrix must mention every prefix variable
    broken = S.StandardForm(sf.leading, sf.blocks, S.Pred("P", (S.Var("x"),)))
    assert not broken.check()
    # matrix must be quantifier-free NNF
    broken2 = S.StandardForm((), (), parse_formula("~(P(c) & Q(c))")[0])
    assert not broken2.check()


# --- CNF -------------------------------------------------------------------

def test_cnf_single_distribution():
    f, _ = parse_formula("P(c) | Q(d) & R(e)")
    m = cnf_matrix(f)
    assert len(m.clauses) == 2
    assert all(len(cl) == 2 for cl in m.clauses)


def test_cnf_identity_on_cnf_input():
    f, _ = parse_formula("(P(c) | Q(d)) & (~P(c) | R(e))")
    m = cnf_matrix(f)
    assert len(m.clauses) == 2


def test_cnf_equivalence_random():
    rng = random.Random(41)
    from util import random_atom, random_boolean, small_signature

    for _ in range(100):
        sig = small_signature(rng)
        if not sig.constants:
            sig.constants.add("c")
        leaves = [random_atom(rng, sig, [], with_eq=True) for _ in range(3)]
        f = to_nnf(random_boolean(rng, leaves, allow_imp=False))
        m = cnf_matrix(f)
        assert equivalent_upto(f, m.to_formula(), 3).equal


def test_cnf_budget():
    from sepfrag.errors import ClauseBudgetExceeded

    parts = []
    for i in range(8):
        parts.append(S.Or((S.Pred("P", (S.Const(f"a{i}"),)), S.Pred("P", (S.Const(f"b{i}"),)))))
    f = S.to_nnf(S.Or((S.And(tuple(parts)), S.And(tuple(parts)))))
    with pytest.raises(ClauseBudgetExceeded):
        cnf_matrix(f, max_clauses=10)


def test_classify_cnf():
    m1 = cnf_matrix(parse_formula("(~P(c) | Q(c)) & ~Q(c)")[0])
    c1 = classify_cnf(m1)
    assert c1.horn and c1.krom
    m2 = cnf_matrix(parse_formula("P(c) | Q(c) | R(c)")[0])
    c2 = classify_cnf(m2)
    assert not c2.horn and not c2.krom


# --- substitution ----------------------------------------------------------

def test_substitute_free_occurrence():
    f, _ = parse_formula("exists y. R(x, y)")  # x parses as a constant
    g = S.Pred("P", (S.Var("x"),))
    assert substitute(g, {"x": S.Const("c")}) == S.Pred("P", (S.Const("c"),))


def test_substitute_bound_untouched():
    f = S.Exists(("x",), S.Pred("P", (S.Var("x"),)))
    assert substitute(f, {"x": S.Const("c")}) == f


def test_substitute_capture_avoiding():
    # exists y. R(x, y) with x := y must rename the binder
    f = S.Exists(("y",), S.Pred("R", (S.Var("x"), S.Var("y"))))
    g = substitute(f, {"x": S.Var("y")})
    assert g.vars[0] != "y"
    inner = g.body
    assert inner.args[0] == S.Var("y")
    assert inner.args[1] == S.Var(g.vars[0])
    # semantic check: result means "some second component differs-or-not from y"
    a_free = S.Exists(("w",), S.Pred("R", (S.Var("y"), S.Var("w"))))
    assert equivalent_upto(g, a_free, 2).equal


# --- length ----------------------------------------------------------------

def test_len_atom():
    assert formula_len(S.Pred("P", (S.Var("x"),))) == 2


def test_len_implication_identity():
    f, _ = parse_formula("P(x) -> Q(y)")
    g, _ = parse_formula("~P(x) | Q(y)")
    assert formula_len(f) == formula_len(g)


def test_len_biconditional_identity():
    f, _ = parse_formula("P(x) <-> Q(y)")
    g, _ = parse_formula("(~P(x) | Q(y)) & (P(x) | ~Q(y))")
    assert formula_len(f) == formula_len(g)


def test_len_identities_random():
    rng = random.Random(53)
    for _ in range(50):
        f, _ = random_sentence(rng, with_eq=True)
        g, _ = random_sentence(rng, with_eq=True)
        assert formula_len(S.Implies(f, g)) == formula_len(S.Or((S.Not(f), g)))
        assert formula_len(S.Iff(f, g)) == formula_len(
            S.And((S.Or((S.Not(f), g)), S.Or((f, S.Not(g)))))
        )


def test_sf_generator_produces_separated_sentences():
    rng = random.Random(61)
    for _ in range(40):
        f, _ = random_sf_sentence(rng)
        sf = to_standard_form(f)
        assert sf.check()
