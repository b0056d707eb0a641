import pytest

from treelab.errors import ParseError
from treelab.fixtures import HOM_DUP, SIG_GCD, SIG_LINE, SIG_MONO, SIG_POTT, SIG_POTT_K
from treelab.trees import (
    Context,
    Letter,
    RankedAlphabet,
    Term,
    TermNode,
    Tree,
    Var,
    apply_context,
    enumerate_contexts,
    enumerate_trees,
    hom_apply,
    hom_apply_term,
    parse_tree,
    path_words,
    render_tree,
    substitute,
    var_occurrences,
)


def count_trees_oracle(alphabet, max_nodes):
    """Independent counting recursion: c[s] = sum over letters of the number of
    ways to split s-1 nodes among the children."""
    counts = [0] * (max_nodes + 1)
    for s in range(1, max_nodes + 1):
        total = 0
        for letter in alphabet.letters:
            if letter.arity == 0:
                total += 1 if s == 1 else 0
                continue

            def splits(budget, parts):
                if parts == 0:
                    return 1 if budget == 0 else 0
                return sum(counts[k] * splits(budget - k, parts - 1) for k in range(1, budget + 1))

            total += splits(s - 1, letter.arity)
        counts[s] = total
    return sum(counts)


def test_parse_single_constant():
    tree = parse_tree("f0", SIG_POTT)
    assert tree == Tree(SIG_POTT["f0"])


def test_parse_nested():
    tree = parse_tree("f2(f1(f0),f0)", SIG_POTT)
    assert tree.size() == 4
    assert tree.label.name == "f2"
    assert tree.children[0].label.name == "f1"


def test_parse_arity_mismatch():
    with pytest.raises(ParseError, match="arity mismatch: f1 expects 1"):
        parse_tree("f1(f0,f0)", SIG_POTT)


def test_parse_unknown_letter_has_position():
    with pytest.raises(ParseError, match="unknown letter"):
        parse_tree("f2(f0,nope)", SIG_POTT)


def test_parse_whitespace_insignificant():
    assert parse_tree(" f2 ( f0 , f0 ) ", SIG_POTT) == parse_tree("f2(f0,f0)", SIG_POTT)


def test_render_constant_and_binary():
    assert render_tree(parse_tree("f0", SIG_POTT)) == "f0"
    assert render_tree(parse_tree("f2(f0,f0)", SIG_POTT)) == "f2(f0,f0)"


def test_roundtrip_on_enumerated_trees():
    trees = enumerate_trees(SIG_POTT, 10)
    assert len(trees) >= 1000
    for tree in trees[:1000]:
        assert parse_tree(render_tree(tree), SIG_POTT) == tree


def test_enumerate_unary_chain():
    trees = enumerate_trees(SIG_MONO, 3)
    assert [render_tree(t) for t in trees] == ["z", "s(z)", "s(s(z))"]


def test_enumerate_gcd_small():
    trees = enumerate_trees(SIG_GCD, 3)
    assert [render_tree(t) for t in trees] == [
        "c",
        "d",
        "g(c,c)",
        "g(c,d)",
        "g(d,c)",
        "g(d,d)",
    ]


@pytest.mark.parametrize("alphabet", [SIG_POTT, SIG_GCD, SIG_MONO, SIG_POTT_K])
def test_enumerate_count_matches_recursion(alphabet):
    for bound in (3, 5):
        assert len(enumerate_trees(alphabet, bound)) == count_trees_oracle(alphabet, bound)


def test_enumerate_no_duplicates_and_bound():
    trees = enumerate_trees(SIG_POTT, 6)
    assert len(set(trees)) == len(trees)
    assert all(t.size() <= 6 for t in trees)


def test_path_words_examples():
    g, c, d = SIG_GCD["g"], SIG_GCD["c"], SIG_GCD["d"]
    assert path_words(parse_tree("g(c,d)", SIG_GCD)) == frozenset(
        {((g, 1), c), ((g, 2), d)}
    )
    assert path_words(Tree(c)) == frozenset({(c,)})
    f2, f1, f0 = SIG_POTT["f2"], SIG_POTT["f1"], SIG_POTT["f0"]
    assert path_words(parse_tree("f2(f1(f0),f0)", SIG_POTT)) == frozenset(
        {((f2, 1), (f1, 1), f0), ((f2, 2), f0)}
    )


def test_path_word_count_equals_leaves():
    for tree in enumerate_trees(SIG_POTT, 6):
        assert len(path_words(tree)) == tree.leaf_count()


def test_apply_context():
    hole = Context.hole()
    t = parse_tree("f1(f0)", SIG_POTT)
    assert apply_context(hole, t) == t
    ctx = Context(Term(1, TermNode(SIG_POTT["f1"], (Var(1),))))
    assert apply_context(ctx, parse_tree("f0", SIG_POTT)) == parse_tree("f1(f0)", SIG_POTT)
    ctx2 = Context(
        Term(1, TermNode(SIG_POTT["f2"], (Var(1), TermNode(SIG_POTT["f0"]))))
    )
    assert apply_context(ctx2, parse_tree("f1(f0)", SIG_POTT)) == parse_tree(
        "f2(f1(f0),f0)", SIG_POTT
    )


def test_context_requires_single_occurrence():
    with pytest.raises(ValueError):
        Context(Term(1, TermNode(SIG_POTT["f2"], (Var(1), Var(1)))))


def test_hom_dup_balances_lines():
    line = parse_tree("f1(f1(f0))", SIG_LINE)
    image = hom_apply(HOM_DUP, line)
    assert render_tree(image) == "f2(f2(f0,f0),f2(f0,f0))"


def test_identity_hom():
    from treelab.trees import TreeHom

    ident = TreeHom.identity(SIG_POTT)
    for tree in enumerate_trees(SIG_POTT, 5):
        assert hom_apply(ident, tree) == tree


def test_constant_dropping_hom():
    from treelab.trees import TreeHom

    sig_ac = RankedAlphabet.of(("a", 1), ("c", 0))
    dropper = TreeHom(
        sig_ac,
        sig_ac,
        {"c": Term(0, TermNode(Letter("c", 0))), "a": Term(1, TermNode(Letter("c", 0)))},
    )
    assert hom_apply(dropper, parse_tree("a(a(c))", sig_ac)) == parse_tree("c", sig_ac)


def test_hom_commutes_with_context_substitution():
    contexts = [c for c in enumerate_contexts(SIG_LINE, 3)]
    trees = [t for t in enumerate_trees(SIG_LINE, 3)]
    for ctx in contexts:
        image_ctx = hom_apply_term(HOM_DUP, ctx.term)
        for tree in trees:
            left = hom_apply(HOM_DUP, apply_context(ctx, tree))
            right = substitute(image_ctx, [hom_apply(HOM_DUP, tree)])
            assert left == right


def test_enumerate_contexts_counts_and_shape():
    contexts = enumerate_contexts(SIG_POTT, 2)
    assert contexts[0] == Context.hole()
    assert len(set(c.term for c in contexts)) == len(contexts)
    for ctx in contexts:
        assert var_occurrences(ctx.term.body) == [1]


def test_alphabet_invariants():
    with pytest.raises(ValueError, match="duplicate"):
        RankedAlphabet.of(("a", 1), ("a", 0))
    with pytest.raises(ValueError, match="arity"):
        RankedAlphabet.of(("a", 9), ("c", 0))
