"""Finite letter-indexed algebras; deterministic bottom-up tree automata.

A DBTA is an algebra plus an accepting subset of the carrier.  Carrier elements
are anonymous integers 0..size-1; an optional name tuple is carried for display
only.  Operation tables are stored densely in lexicographic argument order, so
the entry for (e1,...,en) sits at index e1*m^(n-1) + ... + en.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import AlphabetMismatchError
from .trees import RankedAlphabet, Term, TermBody, Tree, Var


@dataclass(frozen=True)
class FiniteAlgebra:
    alphabet: RankedAlphabet
    size: int
    tables: Mapping[str, tuple[int, ...]]
    element_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("carrier must be nonempty")
        for letter in self.alphabet.letters:
            table = self.tables.get(letter.name)
            if table is None:
                raise ValueError(f"missing table for {letter.name}")
            if len(table) != self.size**letter.arity:
                raise ValueError(f"table for {letter.name} has wrong length")
            if any(not 0 <= e < self.size for e in table):
                raise ValueError(f"table for {letter.name} has out-of-range entries")
        if len(self.tables) != len(self.alphabet.letters):
            raise ValueError("tables for unknown letters")
        if self.element_names is not None and len(self.element_names) != self.size:
            raise ValueError("element_names has wrong length")

    def op(self, name: str, args: tuple[int, ...] | list[int]) -> int:
        index = 0
        for arg in args:
            index = index * self.size + arg
        return self.tables[name][index]

    def name_of(self, element: int) -> str:
        if self.element_names is not None:
            return self.element_names[element]
        return str(element)

    def arg_tuples(self, arity: int) -> Iterator[tuple[int, ...]]:
        """All argument tuples in table order."""
        return itertools.product(range(self.size), repeat=arity)

    def canonical_key(self) -> tuple:
        """Serialization that identifies the algebra up to nothing (exact form)."""
        return (self.size, tuple(sorted((name, table) for name, table in self.tables.items())))


@dataclass(frozen=True)
class Dbta:
    algebra: FiniteAlgebra
    accepting: frozenset[int]

    def __post_init__(self):
        if any(not 0 <= e < self.algebra.size for e in self.accepting):
            raise ValueError("accepting set outside the carrier")

    @property
    def alphabet(self) -> RankedAlphabet:
        return self.algebra.alphabet


def _require_same_alphabet(a: RankedAlphabet, b: RankedAlphabet) -> None:
    if a != b:
        raise AlphabetMismatchError("operation requires equal alphabets")


def evaluate(algebra: FiniteAlgebra, tree: Tree) -> int:
    """Bottom-up fold of the tree by the letter tables."""
    if tree.label not in algebra.alphabet:
        raise AlphabetMismatchError(f"letter {tree.label.name} not in the algebra's alphabet")
    return algebra.op(tree.label.name, [evaluate(algebra, child) for child in tree.children])


def accepts(dbta: Dbta, tree: Tree) -> bool:
    return evaluate(dbta.algebra, tree) in dbta.accepting


def complement(dbta: Dbta) -> Dbta:
    full = frozenset(range(dbta.algebra.size))
    return Dbta(dbta.algebra, full - dbta.accepting)


def product_algebra(a: FiniteAlgebra, b: FiniteAlgebra) -> FiniteAlgebra:
    """Componentwise product; (x, y) is encoded as x * b.size + y."""
    _require_same_alphabet(a.alphabet, b.alphabet)
    size = a.size * b.size
    tables: dict[str, tuple[int, ...]] = {}
    for letter in a.alphabet.letters:
        rows = []
        for args in itertools.product(range(size), repeat=letter.arity):
            xs = tuple(arg // b.size for arg in args)
            ys = tuple(arg % b.size for arg in args)
            rows.append(a.op(letter.name, xs) * b.size + b.op(letter.name, ys))
        tables[letter.name] = tuple(rows)
    return FiniteAlgebra(a.alphabet, size, tables)


def boolean_combine(kind: str, d1: Dbta, d2: Dbta) -> Dbta:
    """Product automaton for union / intersection / difference."""
    algebra = product_algebra(d1.algebra, d2.algebra)
    m2 = d2.algebra.size
    pairs = [(x, y) for x in range(d1.algebra.size) for y in range(m2)]
    if kind == "union":
        accepting = {x * m2 + y for x, y in pairs if x in d1.accepting or y in d2.accepting}
    elif kind == "intersection":
        accepting = {x * m2 + y for x, y in pairs if x in d1.accepting and y in d2.accepting}
    elif kind == "difference":
        accepting = {x * m2 + y for x, y in pairs if x in d1.accepting and y not in d2.accepting}
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return Dbta(algebra, frozenset(accepting))


def reachable_elements(algebra: FiniteAlgebra) -> frozenset[int]:
    """Elements that are values of some tree (least fixpoint)."""
    known: set[int] = set()
    changed = True
    while changed:
        changed = False
        for letter in algebra.alphabet.letters:
            for args in itertools.product(sorted(known), repeat=letter.arity):
                value = algebra.op(letter.name, args)
                if value not in known:
                    known.add(value)
                    changed = True
    return frozenset(known)


def smallest_trees(algebra: FiniteAlgebra) -> dict[int, Tree]:
    """A minimal-node-count witness tree per reachable element (deterministic)."""
    cost: dict[int, int] = {}
    best: dict[int, Tree] = {}
    changed = True
    while changed:
        changed = False
        for letter in algebra.alphabet.letters:
            known = sorted(cost)
            for args in itertools.product(known, repeat=letter.arity):
                total = 1 + sum(cost[arg] for arg in args)
                value = algebra.op(letter.name, args)
                if value not in cost or total < cost[value]:
                    cost[value] = total
                    best[value] = Tree(algebra.alphabet[letter.name], tuple(best[a] for a in args))
                    changed = True
    return best


def is_empty(dbta: Dbta) -> Tree | None:
    """None iff the language is empty; otherwise a minimal accepted tree.

    Ties among minimal trees break on the canonical rendering, so the result
    is deterministic.
    """
    best = smallest_trees(dbta.algebra)
    witnesses = [best[e] for e in sorted(dbta.accepting) if e in best]
    if not witnesses:
        return None
    from .trees import render_tree

    return min(witnesses, key=lambda t: (t.size(), render_tree(t)))


def are_equivalent(d1: Dbta, d2: Dbta) -> tuple[bool, Tree | None]:
    """Language equality; on False, a smallest-by-node-count distinguishing tree."""
    _require_same_alphabet(d1.alphabet, d2.alphabet)
    algebra = product_algebra(d1.algebra, d2.algebra)
    m2 = d2.algebra.size
    symdiff = frozenset(
        x * m2 + y
        for x in range(d1.algebra.size)
        for y in range(m2)
        if (x in d1.accepting) != (y in d2.accepting)
    )
    witness = is_empty(Dbta(algebra, symdiff))
    return (witness is None, witness)


def subset_counterexample(d1: Dbta, d2: Dbta) -> Tree | None:
    """A minimal tree in L(d1) \\ L(d2), or None if L(d1) is included in L(d2)."""
    return is_empty(boolean_combine("difference", d1, d2))


@dataclass(frozen=True)
class ReachableResult:
    elements: frozenset[int]
    dbta: Dbta
    old_to_new: Mapping[int, int]


def restrict_algebra(
    algebra: FiniteAlgebra, elements: frozenset[int]
) -> tuple[FiniteAlgebra, dict[int, int]]:
    """Restrict the carrier to a table-closed subset; elements are renumbered."""
    order = sorted(elements)
    old_to_new = {old: new for new, old in enumerate(order)}
    tables: dict[str, tuple[int, ...]] = {}
    for letter in algebra.alphabet.letters:
        rows = []
        for args in itertools.product(order, repeat=letter.arity):
            value = algebra.op(letter.name, args)
            if value not in elements:
                raise ValueError("subset is not closed under the tables")
            rows.append(old_to_new[value])
        tables[letter.name] = tuple(rows)
    names = None
    if algebra.element_names is not None:
        names = tuple(algebra.element_names[old] for old in order)
    return FiniteAlgebra(algebra.alphabet, len(order), tables, names), old_to_new


def reachable(dbta: Dbta) -> ReachableResult:
    """The tree-reachable elements and the DBTA restricted to them."""
    elements = reachable_elements(dbta.algebra)
    if not elements:
        # No constants: no trees; keep a single dead element so the algebra is nonempty.
        dead_tables = {
            letter.name: tuple(0 for _ in range(1**letter.arity))
            for letter in dbta.alphabet.letters
        }
        algebra = FiniteAlgebra(dbta.alphabet, 1, dead_tables)
        return ReachableResult(frozenset(), Dbta(algebra, frozenset()), {})
    algebra, old_to_new = restrict_algebra(dbta.algebra, elements)
    accepting = frozenset(old_to_new[e] for e in dbta.accepting if e in elements)
    return ReachableResult(elements, Dbta(algebra, accepting), old_to_new)


def eval_term_in_algebra(algebra: FiniteAlgebra, body: TermBody, env: tuple[int, ...]) -> int:
    """Value of a term body with variable i bound to env[i-1]."""
    if isinstance(body, Var):
        return env[body.index - 1]
    return algebra.op(
        body.label.name,
        [eval_term_in_algebra(algebra, child, env) for child in body.children],
    )


def preimage_tree_hom(dbta: Dbta, hom) -> Dbta:
    """DBTA for the inverse image of the language under a tree homomorphism.

    Same carrier; the table for a source letter is the evaluation of its image
    term.  accepts(result, t) iff accepts(dbta, hom_apply(hom, t)).
    """
    if hom.target != dbta.alphabet:
        raise AlphabetMismatchError("homomorphism target must match the automaton alphabet")
    algebra = dbta.algebra
    tables: dict[str, tuple[int, ...]] = {}
    for letter in hom.source.letters:
        term: Term = hom.rules[letter.name]
        rows = [
            eval_term_in_algebra(algebra, term.body, env)
            for env in itertools.product(range(algebra.size), repeat=letter.arity)
        ]
        tables[letter.name] = tuple(rows)
    new_algebra = FiniteAlgebra(hom.source, algebra.size, tables, algebra.element_names)
    return Dbta(new_algebra, dbta.accepting)
