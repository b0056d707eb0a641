"""Syntactic algebras (Myhill-Nerode for trees), term definability, division.

The syntactic algebra of a recognized language is obtained by restricting the
recognizer to its tree-reachable elements and then quotienting by the coarsest
congruence that separates accepting from non-accepting elements.  It divides
every other recognizer of the same language and is unique up to isomorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .automata import Dbta, FiniteAlgebra, reachable
from .errors import CapExceededError
from .trees import Term, TermBody, TermNode, Var


@dataclass(frozen=True)
class SyntacticResult:
    minimal: Dbta
    projection: Mapping[int, int]  # original reachable element -> minimal element


def _refine_partition(algebra: FiniteAlgebra, initial: list[int]) -> list[int]:
    """Coarsest congruence refining the initial class assignment.

    One argument position is varied at a time while the other positions range
    over all raw carrier tuples; iterating this single-position refinement to a
    fixpoint yields a congruence because multi-position substitutions factor
    into chains of single-position ones.
    """
    size = algebra.size
    classes = list(initial)
    while True:
        signatures: list[tuple] = []
        for element in range(size):
            sig: list[int] = [classes[element]]
            for letter in algebra.alphabet.letters:
                arity = letter.arity
                if arity == 0:
                    continue
                for position in range(arity):
                    for others in itertools.product(range(size), repeat=arity - 1):
                        args = others[:position] + (element,) + others[position:]
                        sig.append(classes[algebra.op(letter.name, args)])
            signatures.append(tuple(sig))
        remap: dict[tuple, int] = {}
        new_classes = []
        for sig in signatures:
            if sig not in remap:
                remap[sig] = len(remap)
            new_classes.append(remap[sig])
        if new_classes == classes:
            return classes
        classes = new_classes


def syntactic_algebra(dbta: Dbta) -> SyntacticResult:
    """Minimal recognizer of the language plus the projection onto it."""
    restriction = reachable(dbta)
    restricted = restriction.dbta
    algebra = restricted.algebra
    initial = [1 if e in restricted.accepting else 0 for e in range(algebra.size)]
    classes = _refine_partition(algebra, initial)

    n_classes = max(classes) + 1 if classes else 1
    representative = {}
    for element, cls in enumerate(classes):
        representative.setdefault(cls, element)
    tables: dict[str, tuple[int, ...]] = {}
    for letter in algebra.alphabet.letters:
        rows = []
        for args in itertools.product(range(n_classes), repeat=letter.arity):
            reps = tuple(representative[c] for c in args)
            rows.append(classes[algebra.op(letter.name, reps)])
        tables[letter.name] = tuple(rows)
    names = None
    if algebra.element_names is not None:
        names = tuple(algebra.element_names[representative[c]] for c in range(n_classes))
    minimal_algebra = FiniteAlgebra(algebra.alphabet, n_classes, tables, names)
    accepting = frozenset(classes[e] for e in restricted.accepting)
    projection = {
        old: classes[new] for old, new in restriction.old_to_new.items()
    }
    return SyntacticResult(Dbta(minimal_algebra, accepting), projection)


# --- isomorphism ------------------------------------------------------------


def find_isomorphism(
    a: FiniteAlgebra,
    b: FiniteAlgebra,
    accepting: tuple[frozenset[int], frozenset[int]] | None = None,
) -> tuple[int, ...] | None:
    """A carrier bijection making all letter tables commute, or None.

    Backtracking with per-assignment consistency pruning; feasible for
    carriers up to about 10.  With ``accepting`` the bijection must also match
    the two accepting sets.
    """
    if a.size != b.size:
        return None
    if {(l.name, l.arity) for l in a.alphabet.letters} != {
        (l.name, l.arity) for l in b.alphabet.letters
    }:
        return None
    size = a.size
    image: list[int | None] = [None] * size
    used = [False] * size

    def consistent() -> bool:
        if accepting is not None:
            fa, fb = accepting
            for e in range(size):
                if image[e] is not None and (e in fa) != (image[e] in fb):
                    return False
        for letter in a.alphabet.letters:
            for args in itertools.product(range(size), repeat=letter.arity):
                mapped = tuple(image[arg] for arg in args)
                if any(m is None for m in mapped):
                    continue
                target = image[a.op(letter.name, args)]
                if target is not None and target != b.op(letter.name, mapped):  # type: ignore[arg-type]
                    return False
        return True

    def assign(element: int) -> bool:
        if element == size:
            return True
        for candidate in range(size):
            if used[candidate]:
                continue
            image[element] = candidate
            used[candidate] = True
            if consistent() and assign(element + 1):
                return True
            image[element] = None
            used[candidate] = False
        return False

    if assign(0):
        return tuple(image)  # type: ignore[arg-type]
    return None


def dbta_isomorphic(d1: Dbta, d2: Dbta) -> tuple[int, ...] | None:
    return find_isomorphism(d1.algebra, d2.algebra, (d1.accepting, d2.accepting))


# --- term definability ------------------------------------------------------


def term_definable(
    algebra: FiniteAlgebra,
    target: tuple[int, ...],
    arity: int,
    depth_cap: int,
) -> Term | None:
    """Breadth-first search for a term denoting the target table.

    Terms are generated by depth (variables and constants at depth 1); among
    terms with the same induced table only the first is kept, so the result is
    the first witness in the documented order.  None when the cap is exhausted.
    """
    if depth_cap < 1:
        raise ValueError("depth_cap must be >= 1")
    if len(target) != algebra.size**arity:
        raise ValueError("target table has wrong length")
    envs = list(itertools.product(range(algebra.size), repeat=arity))
    goal = tuple(target)

    seen: dict[tuple[int, ...], TermBody] = {}
    by_depth: list[list[tuple[TermBody, tuple[int, ...]]]] = [[]]

    def consider(body: TermBody, values: tuple[int, ...], level: list) -> TermBody | None:
        if values in seen:
            return None
        seen[values] = body
        level.append((body, values))
        return body if values == goal else None

    level1: list[tuple[TermBody, tuple[int, ...]]] = []
    for i in range(1, arity + 1):
        values = tuple(env[i - 1] for env in envs)
        hit = consider(Var(i), values, level1)
        if hit is not None:
            return Term(arity, hit)
    for letter in algebra.alphabet.letters:
        if letter.arity != 0:
            continue
        constant = algebra.op(letter.name, ())
        hit = consider(TermNode(letter), tuple(constant for _ in envs), level1)
        if hit is not None:
            return Term(arity, hit)
    by_depth.append(level1)

    for depth in range(2, depth_cap + 1):
        level: list[tuple[TermBody, tuple[int, ...]]] = []
        pool = [entry for lvl in by_depth[1:] for entry in lvl]
        last = set(id(body) for body, _ in by_depth[depth - 1])
        for letter in algebra.alphabet.letters:
            if letter.arity == 0:
                continue
            for combo in itertools.product(pool, repeat=letter.arity):
                if not any(id(body) in last for body, _ in combo):
                    continue  # depth must be exactly one more than the deepest child
                values = tuple(
                    algebra.op(letter.name, [vals[k] for _, vals in combo])
                    for k in range(len(envs))
                )
                body = TermNode(letter, tuple(b for b, _ in combo))
                hit = consider(body, values, level)
                if hit is not None:
                    return Term(arity, hit)
        by_depth.append(level)
    return None


# --- division ---------------------------------------------------------------


@dataclass(frozen=True)
class DividesWitness:
    role_assignment: Mapping[str, str]  # letter of a -> letter of b
    subuniverse: frozenset[int]
    partition: tuple[frozenset[int], ...]


def _partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in _partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1 :]
        yield [[first]] + sub


def divides(a: FiniteAlgebra, b: FiniteAlgebra, max_carrier: int = 6) -> DividesWitness | None:
    """Does ``a`` arise from ``b`` by reduct, subalgebra, then quotient?

    Operation roles of ``a`` (its letters) are assigned to operations of ``b``
    of the same arity; roles may share one operation of ``b``, matching the
    unindexed reading of division.  Exhaustive and capped: carriers above
    ``max_carrier`` raise CapExceededError rather than answering.
    """
    if a.size > max_carrier or b.size > max_carrier:
        raise CapExceededError(f"divides search capped at carrier {max_carrier}")
    roles = list(a.alphabet.letters)
    candidates: list[list[str]] = []
    for role in roles:
        names = [letter.name for letter in b.alphabet.letters if letter.arity == role.arity]
        if not names:
            return None
        candidates.append(names)

    universe = list(range(b.size))
    for choice in itertools.product(*candidates):
        assignment = {role.name: picked for role, picked in zip(roles, choice)}
        ops = {role.name: (role.arity, b.tables[picked]) for role, picked in zip(roles, choice)}

        def closed(subset: frozenset[int]) -> bool:
            for role_name, (arity, _table) in ops.items():
                for args in itertools.product(sorted(subset), repeat=arity):
                    if b.op(assignment[role_name], args) not in subset:
                        return False
            return True

        for mask in range(1, 1 << b.size):
            subset = frozenset(e for e in universe if mask >> e & 1)
            if len(subset) < a.size or not closed(subset):
                continue
            order = sorted(subset)
            for blocks in _partitions(order):
                if len(blocks) != a.size:
                    continue
                block_of = {}
                for idx, block in enumerate(blocks):
                    for element in block:
                        block_of[element] = idx
                tables: dict[str, tuple[int, ...]] = {}
                ok = True
                for role in roles:
                    rows: dict[tuple[int, ...], int] = {}
                    for args in itertools.product(order, repeat=role.arity):
                        key = tuple(block_of[arg] for arg in args)
                        value = block_of[b.op(assignment[role.name], args)]
                        if rows.setdefault(key, value) != value:
                            ok = False
                            break
                    if not ok:
                        break
                    tables[role.name] = tuple(
                        rows[key]
                        for key in itertools.product(range(a.size), repeat=role.arity)
                    )
                if not ok:
                    continue
                quotient = FiniteAlgebra(a.alphabet, a.size, tables)
                if find_isomorphism(a, quotient) is not None:
                    return DividesWitness(
                        assignment,
                        subset,
                        tuple(frozenset(block) for block in blocks),
                    )
    return None
