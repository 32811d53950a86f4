"""First-order formulas over relational signatures with constants.

Terms are variables or constants; there are no non-constant function
symbols.  Formula trees are immutable, so every transformation returns a
new tree.

Concrete syntax::

    formula := quant | iff
    quant   := ("forall" | "exists" | "exists>="NAT) ident+ "." formula
    iff     := imp ("<->" imp)*
    imp     := disj ("->" imp)?
    disj    := conj ("|" conj)*
    conj    := neg ("&" neg)*
    neg     := "~" neg | "true" | "false" | atom | "(" formula ")"
    atom    := PRED "(" term ("," term)* ")" | term "=" term

where PRED matches ``[A-Z][A-Za-z0-9_]*`` and ident/term match
``[a-z_][A-Za-z0-9_]*``.  Negation binds strongest, then "&", then "|",
then "->" (right associative), then "<->"; quantifier scopes stretch as
far to the right as possible.  An identifier is a variable exactly when
it is bound by an enclosing quantifier; all other lowercase identifiers
denote constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from .errors import (
    ArityMismatch,
    ClauseBudgetExceeded,
    NotASentence,
    NotNNF,
    ParseError,
    UnexpandedCounting,
)

# ---------------------------------------------------------------------------
# terms and formulas


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


Term = Union[Var, Const]


@dataclass(frozen=True)
class Pred:
    """Predicate application P(t1, ..., tn)."""

    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    """Equation s = t over the distinguished equality predicate."""

    left: Term
    right: Term


Atom = Union[Pred, Eq]


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True)
class CountingExists:
    """Counting quantifier: at least `n` distinct witness tuples."""

    n: int
    vars: tuple[str, ...]
    body: "Formula"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("counting threshold must be >= 1")


Formula = Union[
    Top, Bottom, Pred, Eq, Not, And, Or, Implies, Iff, Forall, Exists, CountingExists
]

TRUE = Top()
FALSE = Bottom()


def conj(parts) -> Formula:
    """n-ary conjunction; flattens nested And and drops trivial cases."""
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        elif isinstance(p, Top):
            continue
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(parts) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        elif isinstance(p, Bottom):
            continue
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def forall(names, body) -> Formula:
    names = tuple(names)
    return Forall(names, body) if names else body


def exists(names, body) -> Formula:
    names = tuple(names)
    return Exists(names, body) if names else body


def implies(a, b) -> Formula:
    return Implies(a, b)


# ---------------------------------------------------------------------------
# traversals


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.sub)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from subformulas(p)
    elif isinstance(f, (Implies, Iff)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Forall, Exists, CountingExists)):
        yield from subformulas(f.body)


def atoms_iter(f: Formula) -> Iterator[Atom]:
    for g in subformulas(f):
        if isinstance(g, (Pred, Eq)):
            yield g


def term_vars(t: Term) -> frozenset[str]:
    return frozenset((t.name,)) if isinstance(t, Var) else frozenset()


def atom_vars(a: Atom) -> frozenset[str]:
    if isinstance(a, Eq):
        return term_vars(a.left) | term_vars(a.right)
    out = set()
    for t in a.args:
        if isinstance(t, Var):
            out.add(t.name)
    return frozenset(out)


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Top, Bottom)):
        return frozenset()
    if isinstance(f, (Pred, Eq)):
        return atom_vars(f)
    if isinstance(f, Not):
        return free_vars(f.sub)
    if isinstance(f, (And, Or)):
        out = frozenset()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, (Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - frozenset(f.vars)


def constants_of(f: Formula) -> frozenset[str]:
    out = set()
    for a in atoms_iter(f):
        terms = (a.left, a.right) if isinstance(a, Eq) else a.args
        for t in terms:
            if isinstance(t, Const):
                out.add(t.name)
    return frozenset(out)


def bound_vars_by_kind(f: Formula) -> tuple[frozenset[str], frozenset[str]]:
    """All variable names bound by universal / existential quantifiers."""
    uni, exi = set(), set()
    for g in subformulas(f):
        if isinstance(g, Forall):
            uni.update(g.vars)
        elif isinstance(g, (Exists, CountingExists)):
            exi.update(g.vars)
    return frozenset(uni), frozenset(exi)


def all_var_names(f: Formula) -> frozenset[str]:
    """Every variable name occurring in f, free or bound."""
    out = set()
    for g in subformulas(f):
        if isinstance(g, (Pred, Eq)):
            out |= atom_vars(g)
        elif isinstance(g, (Forall, Exists, CountingExists)):
            out.update(g.vars)
    return frozenset(out)


def has_counting(f: Formula) -> bool:
    return any(isinstance(g, CountingExists) for g in subformulas(f))


def is_quantifier_free(f: Formula) -> bool:
    return not any(
        isinstance(g, (Forall, Exists, CountingExists)) for g in subformulas(f)
    )


def is_nnf(f: Formula) -> bool:
    """Negations only on atoms, no implications or biconditionals."""
    for g in subformulas(f):
        if isinstance(g, (Implies, Iff)):
            return False
        if isinstance(g, Not) and not isinstance(g.sub, (Pred, Eq)):
            return False
    return True


# ---------------------------------------------------------------------------
# signatures


@dataclass
class Signature:
    """Predicate arities and the constant vocabulary.

    The equality predicate is built into the formula syntax and is never
    listed here.
    """

    predicates: dict[str, int] = field(default_factory=dict)
    constants: set[str] = field(default_factory=set)

    def copy(self) -> "Signature":
        return Signature(dict(self.predicates), set(self.constants))

    def declare(self, name: str, arity: int):
        seen = self.predicates.get(name)
        if seen is not None and seen != arity:
            raise ArityMismatch(name, arity, seen)
        self.predicates[name] = arity

    def merge(self, other: "Signature") -> "Signature":
        out = self.copy()
        for name, arity in other.predicates.items():
            out.declare(name, arity)
        out.constants |= other.constants
        return out


def infer_signature(f: Formula, hint: Optional[Signature] = None) -> Signature:
    sig = hint.copy() if hint is not None else Signature()
    for a in atoms_iter(f):
        if isinstance(a, Pred):
            sig.declare(a.name, len(a.args))
            for t in a.args:
                if isinstance(t, Const):
                    sig.constants.add(t.name)
        else:
            for t in (a.left, a.right):
                if isinstance(t, Const):
                    sig.constants.add(t.name)
    return sig


# ---------------------------------------------------------------------------
# fresh names and binder normalization


class FreshNames:
    """Deterministic fresh-name source: base, then base#1, base#2, ..."""

    def __init__(self, used=()):
        self.used = set(used)
        self._counters: dict[str, int] = {}

    def reserve(self, name: str):
        self.used.add(name)

    def fresh(self, base: str) -> str:
        if base not in self.used:
            self.used.add(base)
            return base
        n = self._counters.get(base, 0)
        while True:
            n += 1
            cand = f"{base}#{n}"
            if cand not in self.used:
                self._counters[base] = n
                self.used.add(cand)
                return cand


def _rename(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename free variable occurrences; mapping values must be fresh."""

    def ren_term(t):
        if isinstance(t, Var) and t.name in mapping:
            return Var(mapping[t.name])
        return t

    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Pred):
        return Pred(f.name, tuple(ren_term(t) for t in f.args))
    if isinstance(f, Eq):
        return Eq(ren_term(f.left), ren_term(f.right))
    if isinstance(f, Not):
        return Not(_rename(f.sub, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_rename(p, mapping) for p in f.parts))
    if isinstance(f, (Implies, Iff)):
        return type(f)(_rename(f.left, mapping), _rename(f.right, mapping))
    inner = {k: v for k, v in mapping.items() if k not in f.vars}
    body = _rename(f.body, inner) if inner else f.body
    if isinstance(f, CountingExists):
        return CountingExists(f.n, f.vars, body)
    return type(f)(f.vars, body)


def rename_apart(f: Formula, reserved=()) -> Formula:
    """Make every binder bind a distinct name, disjoint from free names.

    Free variables, constants, and the names in `reserved` are never
    chosen as binder names.  Renaming is deterministic (left-to-right,
    counter per base name).
    """
    fresh = FreshNames(set(reserved) | set(all_var_names(f)) | set(constants_of(f)))
    taken = set(reserved) | set(free_vars(f)) | set(constants_of(f))

    def claim(name: str) -> str:
        # first binder occurrence of a name keeps it; later ones rename
        if name not in taken:
            taken.add(name)
            return name
        return fresh.fresh(name)

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Top, Bottom, Pred, Eq)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.sub))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(walk(p) for p in g.parts))
        if isinstance(g, (Implies, Iff)):
            return type(g)(walk(g.left), walk(g.right))
        mapping = {}
        newvars = []
        for v in g.vars:
            nv = claim(v)
            if nv != v:
                mapping[v] = nv
            newvars.append(nv)
        body = _rename(g.body, mapping) if mapping else g.body
        body = walk(body)
        if isinstance(g, CountingExists):
            return CountingExists(g.n, tuple(newvars), body)
        return type(g)(tuple(newvars), body)

    return walk(f)


def substitute(f: Formula, binding: Mapping[str, Term]) -> Formula:
    """Replace free occurrences of variables; bound occurrences untouched.

    Capture is avoided by renaming binders that would capture a
    substituted variable.
    """
    binding = {k: v for k, v in binding.items()}
    if not binding:
        return f
    intro = {t.name for t in binding.values() if isinstance(t, Var)}
    fresh = FreshNames(
        set(all_var_names(f)) | set(constants_of(f)) | set(binding) | intro
    )

    def sub_term(t, bnd):
        if isinstance(t, Var) and t.name in bnd:
            return bnd[t.name]
        return t

    def walk(g, bnd):
        if not bnd:
            return g
        if isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, Pred):
            return Pred(g.name, tuple(sub_term(t, bnd) for t in g.args))
        if isinstance(g, Eq):
            return Eq(sub_term(g.left, bnd), sub_term(g.right, bnd))
        if isinstance(g, Not):
            return Not(walk(g.sub, bnd))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(walk(p, bnd) for p in g.parts))
        if isinstance(g, (Implies, Iff)):
            return type(g)(walk(g.left, bnd), walk(g.right, bnd))
        inner = {k: v for k, v in bnd.items() if k not in g.vars}
        inner_intro = {t.name for t in inner.values() if isinstance(t, Var)}
        mapping = {}
        newvars = []
        for v in g.vars:
            if v in inner_intro:
                nv = fresh.fresh(v)
                mapping[v] = nv
                newvars.append(nv)
            else:
                newvars.append(v)
        body = _rename(g.body, mapping) if mapping else g.body
        body = walk(body, inner)
        if isinstance(g, CountingExists):
            return CountingExists(g.n, tuple(newvars), body)
        return type(g)(tuple(newvars), body)

    return walk(f, binding)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<ge>>=)
  | (?P<nat>\d+)
  | (?P<pred>[A-Z][A-Za-z0-9_]*)
  | (?P<word>[a-z_][A-Za-z0-9_]*)
  | (?P<sym>[()~&|=,.])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"forall", "exists", "true", "false"}


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(i, "a token", f"parse error at {i}: unexpected {text[i]!r}")
        i = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        tokens.append(_Token(kind, m.group(), m.start()))
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig_hint: Optional[Signature]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.sig = sig_hint.copy() if sig_hint is not None else Signature()
        self.scopes: list[set[str]] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Token:
        t = self.next()
        if t.text != text:
            raise ParseError(t.pos, repr(text))
        return t

    def error(self, expected: str):
        raise ParseError(self.peek().pos, expected)

    def in_scope(self, name: str) -> bool:
        return any(name in s for s in self.scopes)

    def term(self) -> Term:
        t = self.next()
        if t.kind != "word" or t.text in _KEYWORDS:
            raise ParseError(t.pos, "a term")
        if self.in_scope(t.text):
            return Var(t.text)
        self.sig.constants.add(t.text)
        return Const(t.text)

    def formula(self) -> Formula:
        t = self.peek()
        if t.kind == "word" and t.text in ("forall", "exists"):
            return self.quantified()
        return self.iff()

    def quantified(self) -> Formula:
        t = self.next()
        n = None
        if t.text == "exists" and self.peek().kind == "ge":
            self.next()
            nat = self.next()
            if nat.kind != "nat":
                raise ParseError(nat.pos, "a counting threshold")
            n = int(nat.text)
            if n < 1:
                raise ParseError(nat.pos, "a threshold >= 1")
        names = []
        while self.peek().kind == "word" and self.peek().text not in _KEYWORDS:
            names.append(self.next().text)
        if not names:
            self.error("at least one bound variable")
        self.expect(".")
        self.scopes.append(set(names))
        body = self.formula()
        self.scopes.pop()
        if n is not None:
            return CountingExists(n, tuple(names), body)
        if t.text == "forall":
            return Forall(tuple(names), body)
        return Exists(tuple(names), body)

    def iff(self) -> Formula:
        out = self.imp()
        while self.peek().kind == "iff":
            self.next()
            out = Iff(out, self.imp())
        return out

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek().kind == "imp":
            self.next()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek().text == "|":
            self.next()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.neg()]
        while self.peek().text == "&":
            self.next()
            parts.append(self.neg())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def neg(self) -> Formula:
        t = self.peek()
        if t.text == "~":
            self.next()
            return Not(self.neg())
        if t.text == "(":
            self.next()
            out = self.formula()
            self.expect(")")
            return out
        if t.kind == "word" and t.text == "true":
            self.next()
            return TRUE
        if t.kind == "word" and t.text == "false":
            self.next()
            return FALSE
        if t.kind == "pred":
            return self.predicate()
        if t.kind == "word" and t.text not in _KEYWORDS:
            left = self.term()
            self.expect("=")
            return Eq(left, self.term())
        self.error("a formula")

    def predicate(self) -> Formula:
        name = self.next()
        self.expect("(")
        args = [self.term()]
        while self.peek().text == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        self.sig.declare(name.text, len(args))
        return Pred(name.text, tuple(args))


def parse_formula(text: str, sig_hint: Optional[Signature] = None):
    """Parse the concrete syntax; returns (formula, inferred signature).

    Binders are alpha-renamed so that no name is bound twice and no name
    is both free and bound.
    """
    p = _Parser(text, sig_hint)
    f = p.formula()
    if p.peek().kind != "eof":
        p.error("end of input")
    f = rename_apart(f)
    return f, infer_signature(f, p.sig)


# ---------------------------------------------------------------------------
# printing

_IDENT_RE = re.compile(r"[a-z_][A-Za-z0-9_]*\Z")

_PREC_IFF = 1
_PREC_IMP = 2
_PREC_OR = 3
_PREC_AND = 4
_PREC_NEG = 5


def _printable_binders(f: Formula, canonical: bool) -> dict[int, tuple[str, ...]]:
    """Choose concrete binder names per quantifier node (keyed by id)."""
    used = set(constants_of(f)) | set(free_vars(f)) | _KEYWORDS
    choice: dict[int, tuple[str, ...]] = {}
    counter = [0]

    def pick(name: str) -> str:
        if not canonical:
            cand = name if _IDENT_RE.match(name) else name.replace("#", "")
            if _IDENT_RE.match(cand) and cand not in used:
                used.add(cand)
                return cand
        while True:
            counter[0] += 1
            cand = f"v{counter[0]}"
            if cand not in used:
                used.add(cand)
                return cand

    def walk(g: Formula):
        if isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Forall, Exists, CountingExists)):
            choice[id(g)] = tuple(pick(v) for v in g.vars)
            walk(g.body)

    walk(f)
    return choice


def _print(f: Formula, prec: int, names: dict, env: dict[str, str]) -> str:
    def term_str(t: Term) -> str:
        return env.get(t.name, t.name) if isinstance(t, Var) else t.name

    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Pred):
        return f"{f.name}({', '.join(term_str(t) for t in f.args)})"
    if isinstance(f, Eq):
        return f"{term_str(f.left)} = {term_str(f.right)}"
    if isinstance(f, Not):
        return "~" + _print(f.sub, _PREC_NEG, names, env)
    if isinstance(f, And):
        s = " & ".join(_print(p, _PREC_AND + 1, names, env) for p in f.parts)
        return s if prec <= _PREC_AND else f"({s})"
    if isinstance(f, Or):
        s = " | ".join(_print(p, _PREC_OR + 1, names, env) for p in f.parts)
        return s if prec <= _PREC_OR else f"({s})"
    if isinstance(f, Implies):
        s = (
            _print(f.left, _PREC_IMP + 1, names, env)
            + " -> "
            + _print(f.right, _PREC_IMP, names, env)
        )
        return s if prec <= _PREC_IMP else f"({s})"
    if isinstance(f, Iff):
        s = (
            _print(f.left, _PREC_IFF, names, env)
            + " <-> "
            + _print(f.right, _PREC_IFF + 1, names, env)
        )
        return s if prec <= _PREC_IFF else f"({s})"
    # quantifiers bind weakest; they need parentheses inside any operator
    chosen = names[id(f)]
    inner = dict(env)
    inner.update(zip(f.vars, chosen))
    if isinstance(f, CountingExists):
        head = f"exists>={f.n}"
    elif isinstance(f, Forall):
        head = "forall"
    else:
        head = "exists"
    s = f"{head} {' '.join(chosen)}. " + _print(f.body, 0, names, inner)
    return s if prec == 0 else f"({s})"


def print_formula(f: Formula) -> str:
    """Canonical concrete syntax; round-trips through parse_formula up to
    alpha-renaming.  Binder names are kept where legal and made fresh
    otherwise."""
    return _print(f, 0, _printable_binders(f, canonical=False), {})


def canonical_key(f: Formula) -> str:
    """Alpha-invariant string form: binders renamed positionally."""
    return _print(f, 0, _printable_binders(f, canonical=True), {})


def alpha_eq(f: Formula, g: Formula) -> bool:
    return canonical_key(f) == canonical_key(g)


# ---------------------------------------------------------------------------
# negation normal form


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms, eliminating -> and <-> by the
    length-preserving rewrites a -> b == ~a | b and
    a <-> b == (~a | b) & (a | ~b)."""
    if has_counting(f):
        raise UnexpandedCounting("expand counting quantifiers before NNF")

    def pos(g: Formula) -> Formula:
        if isinstance(g, (Top, Bottom, Pred, Eq)):
            return g
        if isinstance(g, Not):
            return neg(g.sub)
        if isinstance(g, (And, Or)):
            return type(g)(tuple(pos(p) for p in g.parts))
        if isinstance(g, Implies):
            return disj([neg(g.left), pos(g.right)])
        if isinstance(g, Iff):
            return conj(
                [disj([neg(g.left), pos(g.right)]), disj([pos(g.left), neg(g.right)])]
            )
        return type(g)(g.vars, pos(g.body))

    def neg(g: Formula) -> Formula:
        if isinstance(g, Top):
            return FALSE
        if isinstance(g, Bottom):
            return TRUE
        if isinstance(g, (Pred, Eq)):
            return Not(g)
        if isinstance(g, Not):
            return pos(g.sub)
        if isinstance(g, And):
            return disj([neg(p) for p in g.parts])
        if isinstance(g, Or):
            return conj([neg(p) for p in g.parts])
        if isinstance(g, Implies):
            return conj([pos(g.left), neg(g.right)])
        if isinstance(g, Iff):
            # ~(a <-> b) == nnf of the rewritten biconditional, negated
            return disj(
                [conj([pos(g.left), neg(g.right)]), conj([neg(g.left), pos(g.right)])]
            )
        if isinstance(g, Forall):
            return Exists(g.vars, neg(g.body))
        return Forall(g.vars, neg(g.body))

    return pos(f)


# ---------------------------------------------------------------------------
# prenexing and standard form


@dataclass(frozen=True)
class StandardForm:
    """Sentence exists z. forall x1 exists y1 ... forall xn exists yn. matrix.

    `leading` is the topmost existential block (possibly empty); `blocks`
    holds the alternating (x_i, y_i) pairs.  Every x_i is nonempty, every
    y_i except possibly the last is nonempty, and the matrix is a
    quantifier-free NNF formula over & | ~ in which every prefix variable
    occurs.
    """

    leading: tuple[str, ...]
    blocks: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    matrix: Formula

    @property
    def universal_vars(self) -> tuple[str, ...]:
        return tuple(v for x, _ in self.blocks for v in x)

    @property
    def existential_vars(self) -> tuple[str, ...]:
        return tuple(v for _, y in self.blocks for v in y)

    def levels(self) -> dict[str, int]:
        """Block index (1-based) of each non-leading existential variable."""
        out = {}
        for i, (_, y) in enumerate(self.blocks, start=1):
            for v in y:
                out[v] = i
        return out

    def to_formula(self) -> Formula:
        f = self.matrix
        for x, y in reversed(self.blocks):
            f = exists(y, f)
            f = forall(x, f)
        return exists(self.leading, f)

    def check(self) -> bool:
        """Invariant checker; accepts exactly the shapes produced by
        to_standard_form."""
        if not is_nnf(self.matrix) or not is_quantifier_free(self.matrix):
            return False
        prefix = list(self.leading)
        for x, y in self.blocks:
            prefix.extend(x)
            prefix.extend(y)
        if len(set(prefix)) != len(prefix):
            return False
        fv = free_vars(self.matrix)
        if set(prefix) != set(fv):
            return False
        for i, (x, y) in enumerate(self.blocks):
            if not x:
                return False
            if not y and i != len(self.blocks) - 1:
                return False
        return True


def _prenex(f: Formula):
    """NNF formula -> (prefix blocks, quantifier-free matrix).

    Sibling prefixes merge existential-first: at each round all leading
    existential blocks are hoisted before any universal one, keeping the
    topmost exists-block intact whenever possible.
    """
    if isinstance(f, (Top, Bottom, Pred, Eq, Not)):
        return [], f
    if isinstance(f, (Forall, Exists)):
        pre, mat = _prenex(f.body)
        kind = "forall" if isinstance(f, Forall) else "exists"
        return [(kind, list(f.vars))] + pre, mat
    if isinstance(f, (And, Or)):
        parts = [_prenex(p) for p in f.parts]
        prefixes = [pre for pre, _ in parts]
        merged = []
        while any(prefixes):
            for kind in ("exists", "forall"):
                block = []
                for pre in prefixes:
                    while pre and pre[0][0] == kind:
                        block.extend(pre.pop(0)[1])
                if block:
                    merged.append((kind, block))
        matrix = type(f)(tuple(mat for _, mat in parts))
        return merged, matrix
    raise UnexpandedCounting("expand counting quantifiers before prenexing")


def to_standard_form(f: Formula) -> StandardForm:
    """Equivalence-preserving conversion of a sentence to standard form."""
    if free_vars(f):
        raise NotASentence(f"free variables: {sorted(free_vars(f))}")
    g = rename_apart(to_nnf(f))
    prefix, matrix = _prenex(g)
    fv = free_vars(matrix)
    cleaned = []
    for kind, names in prefix:
        kept = [v for v in names if v in fv]
        if not kept:
            continue
        if cleaned and cleaned[-1][0] == kind:
            cleaned[-1][1].extend(kept)
        else:
            cleaned.append((kind, kept))
    leading: tuple[str, ...] = ()
    if cleaned and cleaned[0][0] == "exists":
        leading = tuple(cleaned.pop(0)[1])
    blocks = []
    i = 0
    while i < len(cleaned):
        x = tuple(cleaned[i][1])
        y: tuple[str, ...] = ()
        if i + 1 < len(cleaned):
            y = tuple(cleaned[i + 1][1])
        blocks.append((x, y))
        i += 2
    return StandardForm(leading, tuple(blocks), matrix)


# ---------------------------------------------------------------------------
# CNF matrices


def term_key(t: Term):
    return ("v" if isinstance(t, Var) else "c", t.name)


def atom_key(a: Atom):
    if isinstance(a, Eq):
        return ("=", term_key(a.left), term_key(a.right))
    return ("p", a.name) + tuple(term_key(t) for t in a.args)


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool

    def key(self):
        return (atom_key(self.atom), not self.positive)

    def to_formula(self) -> Formula:
        return self.atom if self.positive else Not(self.atom)


@dataclass(frozen=True)
class CnfMatrix:
    """Clause set; a clause is a tuple of literals, each deduplicated and
    canonically ordered."""

    clauses: tuple[tuple[Literal, ...], ...]

    def to_formula(self) -> Formula:
        return conj([disj([lit.to_formula() for lit in cl]) for cl in self.clauses])


DEFAULT_CLAUSE_BUDGET = 10**6


def cnf_matrix(m: Formula, max_clauses: int = DEFAULT_CLAUSE_BUDGET) -> CnfMatrix:
    """Distribution-based CNF of a quantifier-free NNF formula.

    No definitional abbreviations: the result is equivalent, not merely
    equisatisfiable.  Exceeding `max_clauses` raises rather than
    truncating.
    """
    if not is_quantifier_free(m) or not is_nnf(m):
        raise NotNNF(f"expected a quantifier-free NNF formula, got: {print_formula(m)}")

    def clauses(g) -> list[frozenset[Literal]]:
        if isinstance(g, Top):
            return []
        if isinstance(g, Bottom):
            return [frozenset()]
        if isinstance(g, (Pred, Eq)):
            return [frozenset((Literal(g, True),))]
        if isinstance(g, Not):
            return [frozenset((Literal(g.sub, False),))]
        if isinstance(g, And):
            out = []
            for p in g.parts:
                out.extend(clauses(p))
                if len(out) > max_clauses:
                    raise ClauseBudgetExceeded(
                        f"CNF clause budget of {max_clauses} exceeded",
                        limit=max_clauses,
                    )
            return out
        # Or: distribute over the conjunctions of the parts
        out = [frozenset()]
        for p in g.parts:
            pcl = clauses(p)
            if len(out) * len(pcl) > max_clauses:
                raise ClauseBudgetExceeded(
                    f"CNF clause budget of {max_clauses} exceeded", limit=max_clauses
                )
            out = [a | b for a in out for b in pcl]
        return out

    seen = set()
    result = []
    for cl in clauses(m):
        ordered = tuple(sorted(cl, key=Literal.key))
        if ordered not in seen:
            seen.add(ordered)
            result.append(ordered)
    result.sort(key=lambda cl: tuple(l.key() for l in cl))
    return CnfMatrix(tuple(result))


@dataclass(frozen=True)
class CnfClassification:
    horn: bool
    krom: bool


def classify_cnf(m: CnfMatrix) -> CnfClassification:
    """Horn: at most one positive literal per clause.  Krom: at most two
    literals per clause."""
    horn = all(sum(1 for lit in cl if lit.positive) <= 1 for cl in m.clauses)
    krom = all(len(cl) <= 2 for cl in m.clauses)
    return CnfClassification(horn, krom)


# ---------------------------------------------------------------------------
# formula length


def formula_len(f: Formula) -> int:
    """Symbol-occurrence count after rewriting -> and <-> as in NNF, so
    len(a -> b) = len(~a | b) and the biconditional identity hold by
    construction."""
    if isinstance(f, (Top, Bottom)):
        return 1
    if isinstance(f, Pred):
        return 1 + len(f.args)
    if isinstance(f, Eq):
        return 3
    if isinstance(f, Not):
        return 1 + formula_len(f.sub)
    if isinstance(f, (And, Or)):
        return (len(f.parts) - 1) + sum(formula_len(p) for p in f.parts)
    if isinstance(f, Implies):
        return formula_len(Or((Not(f.left), f.right)))
    if isinstance(f, Iff):
        return formula_len(
            And((Or((Not(f.left), f.right)), Or((f.left, Not(f.right)))))
        )
    return 1 + len(f.vars) + formula_len(f.body)
