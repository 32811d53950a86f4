"""Exhaustive model enumeration, model search, and the equivalence oracle.

Structures over a finite signature and universe {e1..em} are identified
with bit codes: one bit per ground atom, ordered predicate-major.  The
evaluator computes a formula's truth over 2^20 structures at a time as a
packed uint64 vector, which makes the brute-force oracles cheap enough to
back every other module's tests.  Quantifiers are evaluated with dynamic
scope reduction (a quantified conjunction/disjunction is split into
independent parts before enumerating assignments), which changes cost,
never truth values.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import syntax as S
from .errors import BudgetExceeded, NotASentence
from .semantics import Structure, evaluate

_CHUNK_BITS = 20

# word with bit j set iff bit k of j is set, for k < 6
_WORD_PATTERNS = (
    0xAAAAAAAAAAAAAAAA,
    0xCCCCCCCCCCCCCCCC,
    0xF0F0F0F0F0F0F0F0,
    0xFF00FF00FF00FF00,
    0xFFFF0000FFFF0000,
    0xFFFFFFFF00000000,
)

_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


def default_budget() -> int:
    env = os.environ.get("SEPFRAG_BUDGET")
    return int(env) if env else 10_000_000


class GroundSpace:
    """Ground atoms of a signature over universe {e1..em}, in canonical
    order: predicates sorted by name, argument tuples lexicographic."""

    def __init__(self, sig: S.Signature, size: int):
        if size < 1:
            raise ValueError("universe size must be >= 1")
        self.sig = sig
        self.size = size
        self.universe = tuple(f"e{i + 1}" for i in range(size))
        self.atoms: list[tuple[str, tuple[int, ...]]] = []
        self.atom_index: dict[tuple[str, tuple[int, ...]], int] = {}
        for name in sorted(sig.predicates):
            for combo in itertools.product(range(size), repeat=sig.predicates[name]):
                self.atom_index[(name, combo)] = len(self.atoms)
                self.atoms.append((name, combo))
        self.n_bits = len(self.atoms)
        self.const_names = tuple(sorted(sig.constants))
        self.chunk_bits = min(self.n_bits, _CHUNK_BITS)
        self.n_chunks = 1 << max(0, self.n_bits - self.chunk_bits)
        self.n_words = 1 << max(0, self.chunk_bits - 6)
        if self.chunk_bits < 6:
            self.valid_mask = np.uint64((1 << (1 << self.chunk_bits)) - 1)
        else:
            self.valid_mask = _ALL_ONES

    @property
    def n_const_maps(self) -> int:
        return self.size ** len(self.const_names)

    @property
    def n_structures(self) -> int:
        return self.n_const_maps * (1 << self.n_bits)

    def const_maps(self, canonical: bool = False) -> Iterator[dict[str, int]]:
        """Constant interpretations in lexicographic order.  With
        `canonical` only restricted-growth assignments are produced, which
        is complete up to isomorphism when all structures over the
        remaining symbols are enumerated."""
        for combo in itertools.product(range(self.size), repeat=len(self.const_names)):
            if canonical:
                top = 0
                ok = True
                for idx in combo:
                    if idx > top:
                        ok = False
                        break
                    top = max(top, idx + 1)
                if not ok:
                    continue
            yield dict(zip(self.const_names, combo))

    def decode(self, cmap: dict[str, int], code: int) -> Structure:
        tables: dict[str, set] = {name: set() for name in self.sig.predicates}
        for bit, (name, combo) in enumerate(self.atoms):
            if (code >> bit) & 1:
                tables[name].add(tuple(self.universe[i] for i in combo))
        return Structure(
            self.universe,
            {c: self.universe[i] for c, i in cmap.items()},
            {name: frozenset(t) for name, t in tables.items()},
        )

    # -- packed evaluation ------------------------------------------------

    def _atom_vec(self, bit: int, chunk: int, cache: dict) -> np.ndarray:
        vec = cache.get(bit)
        if vec is not None:
            return vec
        if bit >= self.chunk_bits:
            on = (chunk >> (bit - self.chunk_bits)) & 1
            vec = np.full(self.n_words, _ALL_ONES if on else 0, dtype=np.uint64)
        elif bit < 6:
            vec = np.full(self.n_words, np.uint64(_WORD_PATTERNS[bit]), dtype=np.uint64)
        else:
            run = 1 << (bit - 6)
            pattern = np.concatenate(
                [np.zeros(run, dtype=np.uint64), np.full(run, _ALL_ONES, dtype=np.uint64)]
            )
            vec = np.tile(pattern, self.n_words // (2 * run))
        cache[bit] = vec
        return vec

    def eval_chunk(
        self,
        f: S.Formula,
        cmap: dict[str, int],
        chunk: int,
        fixed: Optional[dict[int, bool]] = None,
    ) -> np.ndarray:
        """Truth of sentence f on every structure in the chunk, one bit
        per structure code."""
        ev = _VecEval(self, cmap, chunk, fixed or {})
        return ev.eval(f, {}) & self.valid_mask

    def first_true(self, vec: np.ndarray, chunk: int) -> Optional[int]:
        nz = np.nonzero(vec)[0]
        if len(nz) == 0:
            return None
        w = int(nz[0])
        word = int(vec[w])
        bit = (word & -word).bit_length() - 1
        return (chunk << self.chunk_bits) + w * 64 + bit


class _VecEval:
    def __init__(self, space: GroundSpace, cmap, chunk, fixed):
        self.space = space
        self.cmap = cmap
        self.chunk = chunk
        self.fixed = fixed
        self.cache: dict[int, np.ndarray] = {}
        self._free: dict[int, frozenset] = {}
        self._keep = []  # keeps nodes alive so id() keys stay valid

    def _true(self):
        return np.full(self.space.n_words, _ALL_ONES, dtype=np.uint64)

    def _false(self):
        return np.zeros(self.space.n_words, dtype=np.uint64)

    def free(self, g: S.Formula) -> frozenset:
        got = self._free.get(id(g))
        if got is None:
            got = S.free_vars(g)
            self._free[id(g)] = got
            self._keep.append(g)
        return got

    def _resolve(self, t: S.Term, env) -> int:
        if isinstance(t, S.Var):
            return env[t.name]
        return self.cmap[t.name]

    def eval(self, g: S.Formula, env) -> np.ndarray:
        if isinstance(g, S.Top):
            return self._true()
        if isinstance(g, S.Bottom):
            return self._false()
        if isinstance(g, S.Pred):
            combo = tuple(self._resolve(t, env) for t in g.args)
            bit = self.space.atom_index[(g.name, combo)]
            on = self.fixed.get(bit)
            if on is not None:
                return self._true() if on else self._false()
            return self.space._atom_vec(bit, self.chunk, self.cache)
        if isinstance(g, S.Eq):
            same = self._resolve(g.left, env) == self._resolve(g.right, env)
            return self._true() if same else self._false()
        if isinstance(g, S.Not):
            return ~self.eval(g.sub, env)
        if isinstance(g, S.And):
            return self._combine(True, (self.eval(p, env) for p in g.parts))
        if isinstance(g, S.Or):
            return self._combine(False, (self.eval(p, env) for p in g.parts))
        if isinstance(g, S.Implies):
            return ~self.eval(g.left, env) | self.eval(g.right, env)
        if isinstance(g, S.Iff):
            return ~(self.eval(g.left, env) ^ self.eval(g.right, env))
        if isinstance(g, S.Forall):
            return self._quant(True, list(g.vars), g.body, env)
        if isinstance(g, S.Exists):
            return self._quant(False, list(g.vars), g.body, env)
        if isinstance(g, S.CountingExists):
            return self._count(g, env)
        raise TypeError(f"not a formula: {g!r}")

    def _combine(self, is_and, vecs) -> np.ndarray:
        acc = None
        for v in vecs:
            if acc is None:
                acc = v.copy()
            elif is_and:
                np.bitwise_and(acc, v, out=acc)
            else:
                np.bitwise_or(acc, v, out=acc)
        if acc is None:
            return self._true() if is_and else self._false()
        return acc

    def _quant(self, universal: bool, varlist, body, env) -> np.ndarray:
        rel = [v for v in varlist if v in self.free(body)]
        if not rel:
            return self.eval(body, env)
        if isinstance(body, (S.And, S.Or)):
            body_and = isinstance(body, S.And)
            if universal == body_and:
                # the quantifier distributes over the connective
                return self._combine(
                    body_and,
                    (self._quant(universal, rel, p, env) for p in body.parts),
                )
            groups, free_parts = self._group(body.parts, rel)
            if free_parts or len(groups) > 1:
                pieces = []
                for gvars, gparts in groups:
                    sub = gparts[0] if len(gparts) == 1 else type(body)(tuple(gparts))
                    pieces.append(self._quant(universal, sorted(gvars), sub, env))
                for p in free_parts:
                    pieces.append(self.eval(p, env))
                return self._combine(body_and, pieces)
        v = rel[0]
        rest = rel[1:]
        vecs = []
        for e in range(self.space.size):
            env2 = dict(env)
            env2[v] = e
            vecs.append(self._quant(universal, rest, body, env2))
        return self._combine(universal, vecs)

    def _group(self, parts, rel):
        """Partition parts into components connected by shared quantified
        variables; parts using none of them are returned separately."""
        relset = set(rel)
        groups: list[tuple[set, list]] = []
        free_parts = []
        for p in parts:
            pv = self.free(p) & relset
            if not pv:
                free_parts.append(p)
                continue
            hit = [g for g in groups if g[0] & pv]
            merged = (set(pv), [p])
            for g in hit:
                merged[0].update(g[0])
                merged[1].extend(g[1])
                groups.remove(g)
            groups.append(merged)
        # reorder each group's parts to their original order
        order = {id(p): i for i, p in enumerate(parts)}
        out = []
        for gvars, gparts in groups:
            gparts.sort(key=lambda p: order[id(p)])
            out.append((gvars, gparts))
        out.sort(key=lambda g: order[id(g[1][0])])
        return out, free_parts

    def _count(self, g: S.CountingExists, env) -> np.ndarray:
        # at-least-n-of accumulator over all witness tuples
        levels = [self._true()] + [self._false() for _ in range(g.n)]
        for combo in itertools.product(range(self.space.size), repeat=len(g.vars)):
            env2 = dict(env)
            env2.update(zip(g.vars, combo))
            v = self.eval(g.body, env2)
            for i in range(g.n, 0, -1):
                np.bitwise_or(levels[i], levels[i - 1] & v, out=levels[i])
        return levels[g.n]


# ---------------------------------------------------------------------------
# scope minimization
#
# Reduces quantifier scopes before packed evaluation: blocks merge into
# adjacent same-kind blocks, distribute over their own connective, and
# split across independent parts of the dual connective.  This rewriting
# only changes evaluation cost; its truth-preservation is cross-checked
# against the reference evaluator in the test suite.


def scope_minimized(f: S.Formula) -> S.Formula:
    if isinstance(f, (S.Top, S.Bottom, S.Pred, S.Eq)):
        return f
    if isinstance(f, S.Not):
        return S.Not(scope_minimized(f.sub))
    if isinstance(f, (S.Implies, S.Iff)):
        return type(f)(scope_minimized(f.left), scope_minimized(f.right))
    if isinstance(f, (S.And, S.Or)):
        return type(f)(tuple(scope_minimized(p) for p in f.parts))
    if isinstance(f, S.CountingExists):
        return S.CountingExists(f.n, f.vars, scope_minimized(f.body))
    body = scope_minimized(f.body)
    names = tuple(v for v in f.vars if v in S.free_vars(body))
    if not names:
        return body
    if type(body) is type(f) and not set(names) & set(body.vars):
        return scope_minimized(type(f)(names + body.vars, body.body))
    universal = isinstance(f, S.Forall)
    if isinstance(body, (S.And, S.Or)):
        body_and = isinstance(body, S.And)
        if universal == body_and:
            return type(body)(
                tuple(scope_minimized(type(f)(names, p)) for p in body.parts)
            )
        groups: list[tuple[set, list]] = []
        free_parts = []
        nameset = set(names)
        for p in body.parts:
            pv = S.free_vars(p) & nameset
            if not pv:
                free_parts.append(p)
                continue
            hit = [g for g in groups if g[0] & pv]
            merged = (set(pv), [p])
            for g in hit:
                merged[0].update(g[0])
                merged[1].extend(g[1])
                groups.remove(g)
            groups.append(merged)
        if free_parts or len(groups) > 1:
            order = {id(p): i for i, p in enumerate(body.parts)}
            pieces = []
            for gvars, gparts in groups:
                gparts.sort(key=lambda p: order[id(p)])
                sub = gparts[0] if len(gparts) == 1 else type(body)(tuple(gparts))
                pieces.append(
                    scope_minimized(
                        type(f)(tuple(v for v in names if v in gvars), sub)
                    )
                )
            pieces.extend(free_parts)
            return type(body)(tuple(pieces))
    return type(f)(names, body)


# ---------------------------------------------------------------------------
# public operations


def enumerate_structures(sig: S.Signature, size: int) -> Iterator[Structure]:
    """Every structure over sig with universe {e1..e_size}, constant maps
    lexicographic outermost, predicate table codes ascending innermost."""
    space = GroundSpace(sig, size)
    for cmap in space.const_maps():
        for code in range(1 << space.n_bits):
            yield space.decode(cmap, code)


def count_structures(sig: S.Signature, size: int) -> int:
    return GroundSpace(sig, size).n_structures


def find_model(
    f: S.Formula,
    sig: Optional[S.Signature] = None,
    max_size: int = 4,
    symmetry_reduction: bool = True,
) -> Optional[Structure]:
    """First structure (sizes 1..max_size, canonical enumeration order)
    satisfying the sentence, or None.  Constants are pinned to canonical
    universe prefixes, which is complete up to isomorphism."""
    if S.free_vars(f):
        raise NotASentence(f"free variables: {sorted(S.free_vars(f))}")
    full_sig = S.infer_signature(f, sig)
    reduced = scope_minimized(f)
    for size in range(1, max_size + 1):
        space = GroundSpace(full_sig, size)
        for cmap in space.const_maps(canonical=symmetry_reduction):
            for chunk in range(space.n_chunks):
                vec = space.eval_chunk(reduced, cmap, chunk)
                code = space.first_true(vec, chunk)
                if code is not None:
                    witness = space.decode(cmap, code)
                    if not evaluate(witness, {}, f):
                        raise RuntimeError(
                            "internal error: packed evaluation disagrees with "
                            "the reference evaluator on the returned witness"
                        )
                    return witness
    return None


@dataclass(frozen=True)
class Counterexample:
    structure: Structure
    assignment: dict
    which: str  # "left" or "right": the input that evaluates to true


@dataclass(frozen=True)
class EquivVerdict:
    equal: bool
    counterexample: Optional[Counterexample] = None


def equivalent_upto(
    f: S.Formula,
    g: S.Formula,
    size: int,
    budget: Optional[int] = None,
) -> EquivVerdict:
    """Exhaustively compare f and g on every structure with universe size
    1..size over their joint signature.

    Free variables are handled by binding them to fresh constants, so the
    check covers all assignments as well.  The first disagreement in
    enumeration order is reported; exceeding the structure budget raises.
    """
    if budget is None:
        budget = default_budget()
    sig = S.infer_signature(g, S.infer_signature(f))
    fv = sorted(S.free_vars(f) | S.free_vars(g))
    var_consts = {}
    fresh = S.FreshNames(set(sig.constants) | set(fv))
    for v in fv:
        var_consts[v] = fresh.fresh(f"{v}_val")
    if var_consts:
        binding = {v: S.Const(c) for v, c in var_consts.items()}
        f = S.substitute(f, binding)
        g = S.substitute(g, binding)
        sig = S.infer_signature(g, S.infer_signature(f))

    fr = scope_minimized(f)
    gr = scope_minimized(g)
    spent = 0
    for m in range(1, size + 1):
        space = GroundSpace(sig, m)
        spent += space.n_structures
        if spent > budget:
            raise BudgetExceeded(
                f"equivalence check needs {spent} structure evaluations, "
                f"budget is {budget}",
                needed=spent,
                limit=budget,
            )
        for cmap in space.const_maps():
            for chunk in range(space.n_chunks):
                va = space.eval_chunk(fr, cmap, chunk)
                vb = space.eval_chunk(gr, cmap, chunk)
                code = space.first_true(va ^ vb, chunk)
                if code is None:
                    continue
                witness = space.decode(cmap, code)
                assignment = {
                    v: witness.constants[c] for v, c in var_consts.items()
                }
                consts = {
                    c: e
                    for c, e in witness.constants.items()
                    if c not in set(var_consts.values())
                }
                local = code - (chunk << space.chunk_bits)
                left_true = bool((int(va[local >> 6]) >> (local & 63)) & 1)
                return EquivVerdict(
                    False,
                    Counterexample(
                        Structure(witness.universe, consts, witness.predicates),
                        assignment,
                        "left" if left_true else "right",
                    ),
                )
    return EquivVerdict(True)
