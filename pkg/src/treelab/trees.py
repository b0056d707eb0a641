"""Ranked trees and the machinery around them.

Alphabets, trees, terms with numbered variables, one-hole contexts, root-to-leaf
path words, and tree homomorphisms.  Also the bounded enumerators that the rest
of the package uses as brute-force oracle substrate.  All values are immutable;
all operations are pure functions.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence, Union

from .errors import AlphabetMismatchError, ParseError

MAX_ARITY = 8


@dataclass(frozen=True, order=True)
class Letter:
    name: str
    arity: int


@dataclass(frozen=True)
class RankedAlphabet:
    """Ordered sequence of letters; names are unique, identity is (name, arity).

    An alphabet without arity-0 letters denotes an empty tree set.  Such
    alphabets are permitted because operation-only signatures (e.g. the bare
    two-element lattice) are needed for algebra-division checks.
    """

    letters: tuple[Letter, ...]

    def __post_init__(self):
        names = [letter.name for letter in self.letters]
        if len(set(names)) != len(names):
            raise ValueError("duplicate letter names in alphabet")
        for letter in self.letters:
            if not 0 <= letter.arity <= MAX_ARITY:
                raise ValueError(f"arity of {letter.name} out of range 0..{MAX_ARITY}")

    @staticmethod
    def of(*pairs: tuple[str, int]) -> "RankedAlphabet":
        return RankedAlphabet(tuple(Letter(name, arity) for name, arity in pairs))

    def get(self, name: str) -> Letter | None:
        for letter in self.letters:
            if letter.name == name:
                return letter
        return None

    def __getitem__(self, name: str) -> Letter:
        letter = self.get(name)
        if letter is None:
            raise KeyError(name)
        return letter

    def __contains__(self, letter: Letter) -> bool:
        return self.get(letter.name) == letter

    @property
    def constants(self) -> tuple[Letter, ...]:
        return tuple(letter for letter in self.letters if letter.arity == 0)

    def index(self, name: str) -> int:
        for i, letter in enumerate(self.letters):
            if letter.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class Tree:
    label: Letter
    children: tuple["Tree", ...] = ()

    def __post_init__(self):
        if len(self.children) != self.label.arity:
            raise ValueError(
                f"{self.label.name} expects {self.label.arity} children, got {len(self.children)}"
            )

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children)

    def leaf_count(self) -> int:
        if not self.children:
            return 1
        return sum(child.leaf_count() for child in self.children)

    def subtrees(self) -> Iterator["Tree"]:
        """All subtrees in preorder, the tree itself first."""
        yield self
        for child in self.children:
            yield from child.subtrees()


@dataclass(frozen=True)
class Var:
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("variable indices start at 1")


TermBody = Union["TermNode", Var]


@dataclass(frozen=True)
class TermNode:
    label: Letter
    children: tuple[TermBody, ...] = ()

    def __post_init__(self):
        if len(self.children) != self.label.arity:
            raise ValueError(
                f"{self.label.name} expects {self.label.arity} children, got {len(self.children)}"
            )


@dataclass(frozen=True)
class Term:
    """A tree whose leaves may also be variables x1..x{nvars}.

    Variables may repeat or be absent; a term with nvars = 0 is just a tree
    written in term form.
    """

    nvars: int
    body: TermBody

    def __post_init__(self):
        for index in var_occurrences(self.body):
            if not 1 <= index <= self.nvars:
                raise ValueError(f"variable x{index} out of declared range 1..{self.nvars}")


def var_occurrences(body: TermBody) -> list[int]:
    """Variable indices in left-to-right occurrence order."""
    if isinstance(body, Var):
        return [body.index]
    out: list[int] = []
    for child in body.children:
        out.extend(var_occurrences(child))
    return out


@dataclass(frozen=True)
class Context:
    """A term with one declared variable occurring exactly once (the hole)."""

    term: Term

    def __post_init__(self):
        if self.term.nvars != 1 or var_occurrences(self.term.body) != [1]:
            raise ValueError("a context must use its single variable exactly once")

    @staticmethod
    def hole() -> "Context":
        return Context(Term(1, Var(1)))


def substitute(term: Term, args: Sequence[Tree]) -> Tree:
    """Ground a term by substituting a tree for each variable."""
    if len(args) != term.nvars:
        raise ValueError(f"term expects {term.nvars} arguments, got {len(args)}")

    def go(body: TermBody) -> Tree:
        if isinstance(body, Var):
            return args[body.index - 1]
        return Tree(body.label, tuple(go(child) for child in body.children))

    return go(term.body)


def compose_term(term: Term, args: Sequence[Term]) -> TermBody:
    """Substitute term bodies for the variables of ``term`` (term-level composition)."""
    if len(args) != term.nvars:
        raise ValueError(f"term expects {term.nvars} arguments, got {len(args)}")

    def go(body: TermBody) -> TermBody:
        if isinstance(body, Var):
            return args[body.index - 1].body
        return TermNode(body.label, tuple(go(child) for child in body.children))

    return go(term.body)


def apply_context(ctx: Context, tree: Tree) -> Tree:
    return substitute(ctx.term, [tree])


# --- path words -------------------------------------------------------------

# A path symbol is either (letter, child_index) for an interior step or a bare
# arity-0 letter for the final leaf; a path word is a tuple of symbols ending
# with exactly one leaf symbol.
PathSym = Union[Letter, tuple[Letter, int]]
PathWord = tuple[PathSym, ...]


def path_alphabet(alphabet: RankedAlphabet) -> tuple[list[tuple[Letter, int]], list[Letter]]:
    """The path alphabet of a ranked alphabet: step symbols and leaf symbols."""
    steps = [
        (letter, i)
        for letter in alphabet.letters
        if letter.arity >= 1
        for i in range(1, letter.arity + 1)
    ]
    leaves = [letter for letter in alphabet.letters if letter.arity == 0]
    return steps, leaves


def path_words(tree: Tree) -> frozenset[PathWord]:
    """One word per root-to-leaf path: (label, child index) steps, then the leaf label."""
    if not tree.children:
        return frozenset({(tree.label,)})
    out: set[PathWord] = set()
    for i, child in enumerate(tree.children, start=1):
        step: PathSym = (tree.label, i)
        for word in path_words(child):
            out.add((step,) + word)
    return frozenset(out)


def enumerate_path_words(alphabet: RankedAlphabet, max_len: int) -> list[PathWord]:
    """All well-formed path words of length <= max_len, in deterministic order."""
    steps, leaves = path_alphabet(alphabet)
    out: list[PathWord] = []
    for length in range(1, max_len + 1):
        for prefix in itertools.product(steps, repeat=length - 1):
            for leaf in leaves:
                out.append(tuple(prefix) + (leaf,))
    return out


# --- tree homomorphisms -----------------------------------------------------


@dataclass(frozen=True)
class TreeHom:
    """Letter-to-term substitution; terms may duplicate or drop their variables."""

    source: RankedAlphabet
    target: RankedAlphabet
    rules: Mapping[str, Term]  # source letter name -> term over target

    def __post_init__(self):
        for letter in self.source.letters:
            term = self.rules.get(letter.name)
            if term is None:
                raise ValueError(f"no image term for letter {letter.name}")
            if term.nvars != letter.arity:
                raise ValueError(f"image of {letter.name} must have {letter.arity} variables")
            _check_letters(term.body, self.target)
        if len(self.rules) != len(self.source.letters):
            raise ValueError("rules for unknown letters")

    @staticmethod
    def identity(alphabet: RankedAlphabet) -> "TreeHom":
        rules = {
            letter.name: Term(
                letter.arity,
                TermNode(letter, tuple(Var(i) for i in range(1, letter.arity + 1))),
            )
            for letter in alphabet.letters
        }
        return TreeHom(alphabet, alphabet, rules)


def _check_letters(body: TermBody, alphabet: RankedAlphabet) -> None:
    if isinstance(body, Var):
        return
    if body.label not in alphabet:
        raise AlphabetMismatchError(f"letter {body.label.name} not in target alphabet")
    for child in body.children:
        _check_letters(child, alphabet)


def hom_apply(hom: TreeHom, tree: Tree) -> Tree:
    if tree.label not in hom.source:
        raise AlphabetMismatchError(f"letter {tree.label.name} not in source alphabet")
    images = [hom_apply(hom, child) for child in tree.children]
    return substitute(hom.rules[tree.label.name], images)


def hom_apply_term(hom: TreeHom, term: Term) -> Term:
    """Image of a term under a homomorphism; variables are preserved."""

    def go(body: TermBody) -> TermBody:
        if isinstance(body, Var):
            return body
        images = [Term(term.nvars, go(child)) for child in body.children]
        return compose_term(hom.rules[body.label.name], images)

    return Term(term.nvars, go(term.body))


# --- parsing and rendering --------------------------------------------------

_TOKEN = re.compile(r"\s*([A-Za-z0-9_@.|']+|[(),])")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            if text[pos:].strip():
                raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}", pos)
            break
        tokens.append((match.group(1), match.start(1)))
        pos = match.end()
    return tokens


class _TermReader:
    def __init__(self, text: str, alphabet: RankedAlphabet, var_map: Mapping[str, int]):
        self.tokens = _tokenize(text)
        self.alphabet = alphabet
        self.var_map = var_map
        self.at = 0
        self.length = len(text)

    def _peek(self) -> tuple[str, int] | None:
        return self.tokens[self.at] if self.at < len(self.tokens) else None

    def _next(self) -> tuple[str, int]:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.length)
        self.at += 1
        return tok

    def read(self) -> TermBody:
        name, pos = self._next()
        if name in "(),":
            raise ParseError(f"expected a name, got {name!r}", pos)
        if name in self.var_map:
            return Var(self.var_map[name])
        letter = self.alphabet.get(name)
        if letter is None:
            raise ParseError(f"unknown letter {name!r}", pos)
        children: list[TermBody] = []
        tok = self._peek()
        if tok is not None and tok[0] == "(":
            self._next()
            children.append(self.read())
            while True:
                tok = self._next()
                if tok[0] == ")":
                    break
                if tok[0] != ",":
                    raise ParseError(f"expected ',' or ')', got {tok[0]!r}", tok[1])
                children.append(self.read())
        if len(children) != letter.arity:
            raise ParseError(
                f"arity mismatch: {name} expects {letter.arity}, got {len(children)}", pos
            )
        return TermNode(letter, tuple(children))

    def finish(self) -> None:
        tok = self._peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok[0]!r}", tok[1])


def parse_tree(text: str, alphabet: RankedAlphabet) -> Tree:
    """Parse ``name`` or ``name(t1,...,tn)``; whitespace is insignificant."""
    reader = _TermReader(text, alphabet, {})
    body = reader.read()
    reader.finish()

    def to_tree(node: TermBody) -> Tree:
        assert isinstance(node, TermNode)
        return Tree(node.label, tuple(to_tree(child) for child in node.children))

    return to_tree(body)


def parse_term(
    text: str,
    alphabet: RankedAlphabet,
    nvars: int,
    var_map: Mapping[str, int] | None = None,
) -> Term:
    """Like parse_tree but variable names map to indices; default names x1..xN."""
    if var_map is None:
        var_map = {f"x{i}": i for i in range(1, nvars + 1)}
    reader = _TermReader(text, alphabet, var_map)
    body = reader.read()
    reader.finish()
    return Term(nvars, body)


def render_tree(tree: Tree) -> str:
    """Canonical text; constants carry no parentheses.  parse o render = id."""
    if not tree.children:
        return tree.label.name
    return f"{tree.label.name}({','.join(render_tree(child) for child in tree.children)})"


def render_term(term: Term, var_names: Mapping[int, str] | None = None) -> str:
    def name_of(index: int) -> str:
        if var_names is not None:
            return var_names[index]
        return f"x{index}"

    def go(body: TermBody) -> str:
        if isinstance(body, Var):
            return name_of(body.index)
        if not body.children:
            return body.label.name
        return f"{body.label.name}({','.join(go(child) for child in body.children)})"

    return go(term.body)


# --- bounded enumeration ----------------------------------------------------


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of positive integers with the given sum, lexicographic."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_trees(alphabet: RankedAlphabet, max_nodes: int) -> list[Tree]:
    """All trees with <= max_nodes nodes, each exactly once.

    Order: by node count, then root letter in alphabet order, then child size
    composition (lexicographic), then recursively the same order per child.
    """
    by_size: list[list[Tree]] = [[]]
    out: list[Tree] = []
    for size in range(1, max_nodes + 1):
        level: list[Tree] = []
        for letter in alphabet.letters:
            arity = letter.arity
            if arity == 0:
                if size == 1:
                    level.append(Tree(letter))
                continue
            if size - 1 < arity:
                continue
            for comp in _compositions(size - 1, arity):
                for kids in itertools.product(*(by_size[part] for part in comp)):
                    level.append(Tree(letter, kids))
        by_size.append(level)
        out.extend(level)
    return out


def enumerate_contexts(alphabet: RankedAlphabet, max_nodes: int) -> list[Context]:
    """All one-hole contexts with <= max_nodes letter nodes (the hole is free).

    Order: by letter-node count, then root letter, then hole position, then
    sub-sizes lexicographically.
    """
    trees = enumerate_trees(alphabet, max_nodes)
    trees_by_size: dict[int, list[Tree]] = {}
    for tree in trees:
        trees_by_size.setdefault(tree.size(), []).append(tree)

    def tree_to_body(tree: Tree) -> TermBody:
        return TermNode(tree.label, tuple(tree_to_body(child) for child in tree.children))

    by_size: list[list[TermBody]] = [[Var(1)]]
    out: list[Context] = [Context.hole()]
    for size in range(1, max_nodes + 1):
        level: list[TermBody] = []
        for letter in alphabet.letters:
            arity = letter.arity
            if arity == 0:
                continue
            for hole_at in range(arity):
                # size-1 nodes split over children; the hole child may use 0
                for ctx_size in range(0, size):
                    rest = size - 1 - ctx_size
                    sibling_sizes: list[list[tuple[int, ...]]]
                    if arity == 1:
                        if rest != 0:
                            continue
                        sibling_comps = [()]
                    else:
                        sibling_comps = list(_compositions(rest, arity - 1)) if rest >= arity - 1 else []
                    for comp in sibling_comps:
                        sib_lists = [trees_by_size.get(part, []) for part in comp]
                        for ctx_body in by_size[ctx_size]:
                            for sibs in itertools.product(*sib_lists):
                                children: list[TermBody] = []
                                sib_iter = iter(sibs)
                                for i in range(arity):
                                    if i == hole_at:
                                        children.append(ctx_body)
                                    else:
                                        children.append(tree_to_body(next(sib_iter)))
                                level.append(TermNode(letter, tuple(children)))
        by_size.append(level)
        out.extend(Context(Term(1, body)) for body in level)
    return out
