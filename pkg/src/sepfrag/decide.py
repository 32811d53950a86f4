"""Satisfiability decision.

Sentences without universal quantifiers go through the propositional
route: Skolemize each existential variable to a fresh constant, eliminate
ground equations via a fresh congruence predicate, abstract ground atoms
to propositional variables, and hand the CNF to a classified backend
(unit-propagation for Horn, implication-graph reachability for 2-CNF,
DPLL otherwise).  Everything else is decided by bounded model search
against the best available small-model bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import analysis
from . import syntax as S
from . import translate
from .errors import (
    BudgetExceeded,
    HasUniversals,
    NotGround,
    NotHorn,
    NotKrom,
    UnexpandedCounting,
)
from .search import find_model
from .semantics import Structure, evaluate
from .generators import expand_counting

SKOLEM_PREFIX = "sk"


# ---------------------------------------------------------------------------
# Skolemization of purely existential sentences


def skolemize_existential(f: S.Formula) -> S.Formula:
    """Replace each existential variable of a universal-free sentence with
    a fresh constant sk1, sk2, ... in quantifier order; the result is
    ground and equisatisfiable."""
    if S.has_counting(f):
        raise UnexpandedCounting("expand counting quantifiers before Skolemization")
    g = S.to_nnf(f)
    uni, _ = S.bound_vars_by_kind(g)
    if uni:
        raise HasUniversals(f"universal variables {sorted(uni)}")
    fresh = S.FreshNames(S.constants_of(g) | S.all_var_names(g))
    counter = [0]

    def walk(h):
        if isinstance(h, S.Exists):
            binding = {}
            for v in h.vars:
                counter[0] += 1
                binding[v] = S.Const(fresh.fresh(f"{SKOLEM_PREFIX}{counter[0]}"))
            return walk(S.substitute(h.body, binding))
        if isinstance(h, (S.And, S.Or)):
            return type(h)(tuple(walk(p) for p in h.parts))
        if isinstance(h, S.Not):
            return S.Not(walk(h.sub))
        return h

    out = walk(g)
    if S.free_vars(out):
        raise HasUniversals("input must be a sentence")
    return out


# ---------------------------------------------------------------------------
# ground equality elimination


def _fresh_eq_pred(sig: S.Signature) -> str:
    name = "E"
    i = 0
    while name in sig.predicates:
        i += 1
        name = f"E{i}"
    return name


def ground_equality_elim(g: S.Formula) -> S.Formula:
    """Replace ground equations c = d with E(c, d) and append ground
    instances of reflexivity, symmetry, transitivity, and congruence.

    Congruence instances are restricted to pairs of non-equational atoms
    that actually occur in the input, which keeps the output cubic in the
    input length."""
    out, _ = _ground_equality_elim_info(g)
    return out


def _ground_equality_elim_info(g: S.Formula):
    if S.free_vars(g) or not S.is_quantifier_free(g):
        raise NotGround("input must be ground")
    sig = S.infer_signature(g)
    ename = _fresh_eq_pred(sig)
    consts = sorted(sig.constants)

    def replace(h):
        if isinstance(h, S.Eq):
            return S.Pred(ename, (h.left, h.right))
        if isinstance(h, S.Not):
            return S.Not(replace(h.sub))
        if isinstance(h, (S.And, S.Or)):
            return type(h)(tuple(replace(p) for p in h.parts))
        if isinstance(h, (S.Implies, S.Iff)):
            return type(h)(replace(h.left), replace(h.right))
        return h

    def e(c, d):
        return S.Pred(ename, (S.Const(c), S.Const(d)))

    axioms = [e(c, c) for c in consts]
    axioms += [
        S.Implies(e(c, d), e(d, c)) for c in consts for d in consts if c != d
    ]
    axioms += [
        S.Implies(S.And((e(c, d), e(d, f))), e(c, f))
        for c in consts
        for d in consts
        for f in consts
        if len({c, d, f}) > 1
    ]
    occurring = {}
    for a in S.atoms_iter(g):
        if isinstance(a, S.Pred):
            occurring.setdefault(a.name, set()).add(
                tuple(t.name for t in a.args)
            )
    for pname in sorted(occurring):
        tuples = sorted(occurring[pname])
        for left in tuples:
            for right in tuples:
                if left == right:
                    continue
                prem = [e(c, d) for c, d in zip(left, right)]
                axioms.append(
                    S.Implies(
                        S.conj(prem + [S.Pred(pname, tuple(S.Const(c) for c in left))]),
                        S.Pred(pname, tuple(S.Const(c) for c in right)),
                    )
                )
    return S.conj([replace(g)] + axioms), ename


# ---------------------------------------------------------------------------
# propositional abstraction


@dataclass(frozen=True)
class AtomMap:
    """Bijection between the ground atoms of a formula and propositional
    variable indices (0-based, first-occurrence order)."""

    atoms: tuple[S.Pred, ...]
    index: dict

    def variable(self, atom: S.Pred) -> int:
        return self.index[S.atom_key(atom)]


@dataclass(frozen=True)
class PropCnf:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]  # nonzero ints; +v / -v encode polarity


def to_propositional(g: S.Formula):
    """Abstract each distinct ground atom to a propositional variable;
    returns the abstracted tree (atoms become nullary predicates q<i>)
    and the atom map.  Structure is untouched, so Horn stays Horn and
    Krom stays Krom."""
    if S.free_vars(g) or not S.is_quantifier_free(g):
        raise NotGround("input must be ground")
    atoms: list[S.Pred] = []
    index: dict = {}

    def walk(h):
        if isinstance(h, S.Pred):
            key = S.atom_key(h)
            if key not in index:
                index[key] = len(atoms)
                atoms.append(h)
            return S.Pred(f"q{index[key]}", ())
        if isinstance(h, S.Eq):
            raise NotGround("eliminate equality before propositional abstraction")
        if isinstance(h, S.Not):
            return S.Not(walk(h.sub))
        if isinstance(h, (S.And, S.Or)):
            return type(h)(tuple(walk(p) for p in h.parts))
        if isinstance(h, (S.Implies, S.Iff)):
            return type(h)(walk(h.left), walk(h.right))
        return h

    tree = walk(g)
    return tree, AtomMap(tuple(atoms), index)


def prop_cnf(tree: S.Formula, amap: AtomMap, clause_budget=S.DEFAULT_CLAUSE_BUDGET) -> PropCnf:
    matrix = S.cnf_matrix(S.to_nnf(tree), max_clauses=clause_budget)
    clauses = []
    for cl in matrix.clauses:
        lits = []
        for lit in cl:
            v = int(lit.atom.name[1:]) + 1
            lits.append(v if lit.positive else -v)
        clauses.append(tuple(lits))
    return PropCnf(len(amap.atoms), tuple(clauses))


def cnf_flags(c: PropCnf):
    horn = all(sum(1 for l in cl if l > 0) <= 1 for cl in c.clauses)
    krom = all(len(cl) <= 2 for cl in c.clauses)
    return horn, krom


# ---------------------------------------------------------------------------
# propositional backends


@dataclass(frozen=True)
class SatVerdict:
    status: str  # "sat" | "unsat" | "inconclusive"
    structure: Optional[Structure] = None
    assignment: Optional[dict] = None
    bound: Optional[analysis.TetrationExpr] = None
    details: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {"sat": 0, "unsat": 1, "inconclusive": 2}[self.status]


def dpll_sat(c: PropCnf) -> SatVerdict:
    """Complete DPLL with unit propagation; branches on the lowest
    unassigned index, true first."""

    def propagate(assign, clauses):
        changed = True
        while changed:
            changed = False
            for cl in clauses:
                unassigned = []
                satisfied = False
                for l in cl:
                    v = assign.get(abs(l))
                    if v is None:
                        unassigned.append(l)
                    elif (l > 0) == v:
                        satisfied = True
                        break
                if satisfied:
                    continue
                if not unassigned:
                    return False
                if len(unassigned) == 1:
                    l = unassigned[0]
                    assign[abs(l)] = l > 0
                    changed = True
        return True

    def solve(assign):
        assign = dict(assign)
        if not propagate(assign, c.clauses):
            return None
        for v in range(1, c.num_vars + 1):
            if v not in assign:
                for val in (True, False):
                    got = solve({**assign, v: val})
                    if got is not None:
                        return got
                return None
        return assign

    got = solve({})
    if got is None:
        return SatVerdict("unsat", details={"backend": "dpll"})
    return SatVerdict("sat", assignment=got, details={"backend": "dpll"})


def horn_sat(c: PropCnf) -> SatVerdict:
    """Least-model unit propagation; satisfiable iff no all-negative
    clause has its body forced."""
    horn, _ = cnf_flags(c)
    if not horn:
        raise NotHorn("a clause has more than one positive literal")
    true: set[int] = set()
    changed = True
    while changed:
        changed = False
        for cl in c.clauses:
            head = next((l for l in cl if l > 0), None)
            body_forced = all((-l) in true for l in cl if l < 0)
            if not body_forced:
                continue
            if head is None:
                return SatVerdict("unsat", details={"backend": "horn"})
            if head not in true:
                true.add(head)
                changed = True
    assignment = {v: (v in true) for v in range(1, c.num_vars + 1)}
    for cl in c.clauses:
        if not any((l > 0) == assignment.get(abs(l), False) for l in cl):
            return SatVerdict("unsat", details={"backend": "horn"})
    return SatVerdict("sat", assignment=assignment, details={"backend": "horn"})


def krom_sat(c: PropCnf) -> SatVerdict:
    """2-CNF via the implication graph: unsatisfiable iff a variable and
    its negation share a strongly connected component."""
    _, krom = cnf_flags(c)
    if not krom:
        raise NotKrom("a clause has more than two literals")
    if any(len(cl) == 0 for cl in c.clauses):
        return SatVerdict("unsat", details={"backend": "krom"})

    def node(l):
        # literal l in {-n..-1, 1..n} -> node id
        return 2 * (abs(l) - 1) + (0 if l > 0 else 1)

    n_nodes = 2 * c.num_vars
    edges = [[] for _ in range(n_nodes)]
    for cl in c.clauses:
        a = cl[0]
        b = cl[1] if len(cl) == 2 else cl[0]
        edges[node(-a)].append(node(b))
        edges[node(-b)].append(node(a))

    # iterative Tarjan
    comp = [-1] * n_nodes
    low = [0] * n_nodes
    num = [0] * n_nodes
    visited = [False] * n_nodes
    on_stack = [False] * n_nodes
    stack: list[int] = []
    counter = [0]
    n_comps = [0]

    for root in range(n_nodes):
        if visited[root]:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                visited[v] = True
                num[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for j in range(i, len(edges[v])):
                w = edges[v][j]
                if not visited[w]:
                    work.append((v, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], num[w])
            if recurse:
                continue
            if low[v] == num[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comps[0]
                    if w == v:
                        break
                n_comps[0] += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])

    assignment = {}
    for v in range(1, c.num_vars + 1):
        pos, neg = comp[node(v)], comp[node(-v)]
        if pos == neg:
            return SatVerdict("unsat", details={"backend": "krom"})
        # Tarjan numbers components in reverse topological order
        assignment[v] = pos < neg
    return SatVerdict("sat", assignment=assignment, details={"backend": "krom"})


# ---------------------------------------------------------------------------
# the full decision pipeline


@dataclass
class DecideConfig:
    max_model_size: int = 5
    backend: str = "auto"  # auto | dpll | horn | krom
    prefer_propositional: bool = True
    try_translation_bound: bool = True
    clause_budget: int = S.DEFAULT_CLAUSE_BUDGET


def _herbrand_structure(g: S.Formula, assignment, amap: AtomMap, eq_pred) -> Structure:
    """Build a model of the ground sentence from a propositional
    assignment, then quotient by the congruence predicate if equality was
    eliminated."""
    consts = sorted(S.constants_of(g))
    if not consts:
        sig0 = S.infer_signature(g)
        return Structure(("e1",), {}, {p: frozenset() for p in sig0.predicates})
    universe = tuple(consts)
    tables: dict[str, set] = {}
    for i, atom in enumerate(amap.atoms):
        if assignment.get(i + 1, False):
            tables.setdefault(atom.name, set()).add(tuple(t.name for t in atom.args))
    sig = S.infer_signature(g)
    for p in sig.predicates:
        tables.setdefault(p, set())
    structure = Structure(
        universe, {c: c for c in consts}, {p: frozenset(t) for p, t in tables.items()}
    )
    if eq_pred is None:
        return structure
    # quotient by the congruence classes of the eliminated equality;
    # mapping true tuples through class representatives realizes the
    # congruence saturation and the quotient in one step
    eq = structure.predicates.get(eq_pred, frozenset())
    parent = {c: c for c in consts}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for c, d in eq:
        rc, rd = find(c), find(d)
        if rc != rd:
            parent[max(rc, rd)] = min(rc, rd)
    rep = {c: find(c) for c in consts}
    universe2 = tuple(sorted(set(rep.values())))
    tables2 = {
        p: frozenset(tuple(rep[e] for e in t) for t in table)
        for p, table in structure.predicates.items()
        if p != eq_pred
    }
    return Structure(universe2, {c: rep[c] for c in consts}, tables2)


def _existential_path(sentence: S.Formula, ground: S.Formula, cfg: DecideConfig) -> SatVerdict:
    has_eq = any(isinstance(a, S.Eq) for a in S.atoms_iter(ground))
    eq_pred = None
    g = ground
    if has_eq:
        g, eq_pred = _ground_equality_elim_info(ground)
    tree, amap = to_propositional(g)
    cnf = prop_cnf(tree, amap, cfg.clause_budget)
    horn, krom = cnf_flags(cnf)
    backend = cfg.backend
    if backend == "auto":
        backend = "horn" if horn else ("krom" if krom else "dpll")
    verdict = {"horn": horn_sat, "krom": krom_sat, "dpll": dpll_sat}[backend](cnf)
    details = dict(verdict.details)
    details.update(
        {
            "path": "propositional",
            "horn": horn,
            "krom": krom,
            "equality_eliminated": has_eq,
            "variables": cnf.num_vars,
            "clauses": len(cnf.clauses),
        }
    )
    if verdict.status == "unsat":
        return SatVerdict("unsat", details=details)
    witness = _herbrand_structure(g, verdict.assignment, amap, eq_pred)
    if not evaluate(witness, {}, sentence):
        raise RuntimeError("internal error: propositional witness fails re-evaluation")
    return SatVerdict("sat", structure=witness, assignment=verdict.assignment, details=details)


def _model_bound(sf: S.StandardForm, cfg: DecideConfig):
    """Smallest exactly-evaluated size bound available for the sentence;
    None when every applicable bound stays symbolic."""
    candidates = []
    details = {}
    separated = analysis.is_sf(sf)
    if separated:
        rep = analysis.bounds(sf)
        exact = rep.model_size.evaluate()
        details["degree_bound"] = str(rep.model_size)
        if exact is not None:
            candidates.append(exact)
        if rep.bsr_model_size is not None:
            candidates.append(rep.bsr_model_size)
        if rep.mfo_model_size is not None:
            candidates.append(rep.mfo_model_size)
        if cfg.try_translation_bound and not analysis.is_bsr(sf):
            try:
                bsr = translate.to_bsr(
                    sf, selection_cap=2000, conjunct_cap=2000, clause_budget=2000,
                    dnf_term_cap=512,
                )
                n_consts = len(S.constants_of(sf.matrix))
                candidates.append(max(len(bsr.leading) + n_consts, 1))
                details["translation_bound"] = candidates[-1]
            except BudgetExceeded:
                pass
    elif analysis.is_mfo(sf):
        preds = {a.name for a in S.atoms_iter(sf.matrix) if isinstance(a, S.Pred)}
        candidates.append(2 ** len(preds))
    bound = min(candidates) if candidates else None
    symbolic = None
    if separated and bound is None:
        symbolic = analysis.bounds(sf).model_size
    return bound, symbolic, details


def decide_sat(f: S.Formula, cfg: Optional[DecideConfig] = None) -> SatVerdict:
    """Decide satisfiability of a function-free sentence.

    Counting quantifiers are expanded first.  Universal-free sentences go
    through the propositional route; everything else is searched up to
    min(size bound, cfg.max_model_size), returning an inconclusive
    verdict carrying the bound when the search space was not exhausted.
    """
    cfg = cfg or DecideConfig()
    expanded = expand_counting(f).formula
    sf = S.to_standard_form(expanded)
    if not sf.universal_vars and cfg.prefer_propositional:
        ground = skolemize_existential(sf.to_formula())
        return _existential_path(f, ground, cfg)

    bound, symbolic, details = _model_bound(sf, cfg)
    limit = cfg.max_model_size if bound is None else min(bound, cfg.max_model_size)
    details.update({"path": "model-search", "bound": bound, "search_limit": limit})
    witness = find_model(expanded, max_size=limit)
    if witness is not None:
        if not evaluate(witness, {}, f):
            raise RuntimeError("internal error: search witness fails re-evaluation")
        return SatVerdict("sat", structure=witness, details=details)
    if bound is not None and bound <= cfg.max_model_size:
        return SatVerdict("unsat", details=details)
    return SatVerdict(
        "inconclusive",
        bound=symbolic,
        details=details,
    )
