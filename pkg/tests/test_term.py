"""Term AST, syntax trees, predicates, ranks, parsing, codecs."""

import random

import pytest

from vebflow.errors import DocumentError, InvalidAddressError, ParseError
from vebflow.generate import random_term
from vebflow.ordinal import CnfOrdinal, OMEGA, ONE, ZERO, add, cmp, parse_ordinal
from vebflow.term import (
    Arrow,
    ArrowL,
    Const,
    ConstL,
    Join,
    JoinL,
    SyntaxTree,
    Var,
    VarL,
    Veblen,
    VeblenL,
    apply_fixed_point,
    borel_rank,
    constant_labels,
    decode_tree,
    encode_tree,
    has_veblen,
    is_closed,
    is_normal,
    is_well_formed,
    neck,
    parse_term,
    render_term,
    syntax_tree,
    term_from_tree,
)

TWO = CnfOrdinal.from_int(2)


# -- syntax_tree embedding --------------------------------------------

def test_syntax_tree_single_constant():
    st = syntax_tree(Const("q"))
    assert st.nodes == {(): ConstL("q")}


def test_syntax_tree_arrow_over_join():
    st = syntax_tree(parse_term("1 ~> join(0, 2)"))
    assert st.nodes == {
        (): ArrowL(),
        (0,): ConstL("1"),
        (1,): JoinL(),
        (1, 0): ConstL("0"),
        (1, 1): ConstL("2"),
    }


def test_syntax_tree_veblen():
    st = syntax_tree(Veblen(ONE, Const("q")))
    assert st.nodes == {(): VeblenL(ONE), (0,): ConstL("q")}


def test_term_from_tree_inverts_syntax_tree():
    rng = random.Random(3)
    for _ in range(500):
        t = random_term(rng, 5)
        assert term_from_tree(syntax_tree(t)) == t


# -- predicates --------------------------------------------------------

def test_well_formed_examples():
    assert not is_well_formed(Veblen(ZERO, Join((Const("a"), Const("b")))))
    assert is_well_formed(Const("q"))
    assert is_well_formed(Veblen(ONE, Arrow(Const("a"), Join((Const("b"),)))))


def test_normal_examples():
    assert is_normal(Arrow(Const("a"), Join((Const("b"),))))
    assert not is_normal(Arrow(Const("a"), Const("b")))
    assert not is_normal(Arrow(Join((Const("a"),)), Join((Const("b"),))))


def test_closed_and_has_veblen():
    assert is_closed(Const("a"))
    assert not is_closed(Var("x"))
    assert not is_closed(Arrow(Const("a"), Join((Var("y"),))))
    assert has_veblen(Veblen(ZERO, Const("a")))
    assert not has_veblen(Arrow(Const("a"), Join((Const("b"),))))


def test_constant_labels():
    t = parse_term('q"a" ~> join(q"b", q"a")')
    assert constant_labels(t) == {"a", "b"}


def test_join_requires_a_child():
    with pytest.raises(ValueError):
        Join(())


# -- fixed-point rewrite ------------------------------------------------

def test_fixed_point_examples():
    q = Const("q")
    assert apply_fixed_point(Veblen(ZERO, Veblen(ONE, q))) == Veblen(ONE, q)
    t = Veblen(ONE, Veblen(ZERO, q))
    assert apply_fixed_point(t) == t
    assert apply_fixed_point(Veblen(ZERO, Veblen(ONE, Veblen(TWO, q)))) == Veblen(TWO, q)


def test_fixed_point_keeps_equal_indices():
    t = Veblen(ONE, Veblen(ONE, Const("q")))
    assert apply_fixed_point(t) == t


def test_fixed_point_rewrites_under_other_nodes():
    inner = Veblen(ZERO, Veblen(ONE, Const("q")))
    t = Arrow(inner, Join((inner,)))
    got = apply_fixed_point(t)
    assert got == Arrow(Veblen(ONE, Const("q")), Join((Veblen(ONE, Const("q")),)))


def test_fixed_point_idempotent_and_preserves_well_formed():
    rng = random.Random(11)
    for _ in range(2000):
        t = random_term(rng, 6)
        once = apply_fixed_point(t)
        assert apply_fixed_point(once) == once
        assert is_well_formed(once)


def _exhaustive_rewrite(t):
    """One-step-at-a-time oracle for the collapse rule."""
    def step(t):
        match t:
            case Veblen(b, Veblen(a, s)) if cmp(b, a) < 0:
                return Veblen(a, s), True
            case Arrow(l, r):
                nl, ch = step(l)
                if ch:
                    return Arrow(nl, r), True
                nr, ch = step(r)
                return Arrow(l, nr), ch
            case Join(children):
                kids = list(children)
                for i, c in enumerate(kids):
                    nc, ch = step(c)
                    if ch:
                        kids[i] = nc
                        return Join(tuple(kids)), True
                return t, False
            case Veblen(i, c):
                nc, ch = step(c)
                return Veblen(i, nc), ch
            case _:
                return t, False

    changed = True
    while changed:
        t, changed = step(t)
    return t


def test_fixed_point_matches_exhaustive_oracle():
    rng = random.Random(13)
    for _ in range(1000):
        t = random_term(rng, 5)
        assert apply_fixed_point(t) == _exhaustive_rewrite(t)


# -- neck ----------------------------------------------------------------

def test_neck_examples():
    a, b = Const("a"), Const("b")
    assert neck(Const("q")) == ([], Const("q"))
    assert neck(Veblen(TWO, Veblen(ONE, Arrow(a, b)))) == ([TWO, ONE], Arrow(a, b))
    assert neck(Veblen(ZERO, Const("q"))) == ([ZERO], Const("q"))


def test_neck_reassembles():
    rng = random.Random(17)
    for _ in range(500):
        t = random_term(rng, 5)
        head, body = neck(t)
        assert not isinstance(body, Veblen)
        rebuilt = body
        for idx in reversed(head):
            rebuilt = Veblen(idx, rebuilt)
        assert rebuilt == t


# -- borel_rank -----------------------------------------------------------

def test_rank_examples():
    t1 = Arrow(Const("a"), Join((Const("b"),)))
    assert borel_rank(t1, ()) == ONE

    t2 = Veblen(ZERO, Join((Const("a"),)))
    assert borel_rank(t2, (0,)) == TWO

    t3 = Veblen(ONE, Veblen(ZERO, Join((Const("a"),))))
    assert borel_rank(t3, (0, 0)) == add(OMEGA, ONE)
    # more of the same walk: the join node itself is not a Veblen label
    assert borel_rank(t3, ()) == ONE
    assert borel_rank(t3, (0,)) == OMEGA
    assert borel_rank(t3, (0, 0, 0)) == add(OMEGA, ONE)


def test_rank_rejects_invalid_address():
    t = Arrow(Const("a"), Join((Const("b"),)))
    with pytest.raises(InvalidAddressError):
        borel_rank(t, (2,))
    with pytest.raises(InvalidAddressError):
        borel_rank(t, (0, 0))


def test_rank_weakly_increasing_along_paths():
    rng = random.Random(19)
    for _ in range(500):
        t = random_term(rng, 5)
        st = syntax_tree(t)
        for addr in st.addresses():
            for cut in range(len(addr) + 1):
                assert cmp(borel_rank(t, addr[:cut]), borel_rank(t, addr)) <= 0


# -- parse / render --------------------------------------------------------

def test_parse_examples():
    assert parse_term('q"a" ~> join(q"b", q"c")') == Arrow(
        Const("a"), Join((Const("b"), Const("c")))
    )
    assert parse_term('veb[w](q"a")') == Veblen(OMEGA, Const("a"))
    assert parse_term('join(q"a")') == Join((Const("a"),))


def test_parse_sugar_and_associativity():
    assert parse_term("7") == Const("7")
    assert parse_term('q"a" ~> q"b" ~> q"c"') == Arrow(
        Const("a"), Arrow(Const("b"), Const("c"))
    )
    assert parse_term('(q"a" ~> q"b") ~> q"c"') == Arrow(
        Arrow(Const("a"), Const("b")), Const("c")
    )
    assert parse_term('x"v"') == Var("v")
    assert parse_term('veb[w^2 + 1](q"a")').index == parse_ordinal("w^2 + 1")


def test_parse_alphabet_restriction():
    parse_term('q"a"', alphabet={"a"})
    with pytest.raises(ParseError):
        parse_term('q"b"', alphabet={"a"})
    with pytest.raises(ParseError):
        parse_term("3", alphabet={"a"})


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse_term('q"a" ~> ')
    assert e.value.line == 1
    for text in ("", "join()", 'veb[w](join(q"a")', 'q"a" q"b"', "~> 1", 'q"a'):
        with pytest.raises(ParseError):
            parse_term(text)


def test_render_parse_identity_on_random_terms():
    rng = random.Random(23)
    for _ in range(10_000):
        t = random_term(rng, 6, closed=False)
        assert parse_term(render_term(t)) == t


def test_render_quotes_awkward_labels():
    t = Const('a"b\\c')
    assert parse_term(render_term(t)) == t


# -- tree-side predicate agreement -----------------------------------------

def _wf_tree(st):
    for addr, label in st.nodes.items():
        if isinstance(label, VeblenL) and isinstance(
            st.nodes.get(addr + (0,)), JoinL
        ):
            return False
    return True


def _normal_tree(st):
    for addr, label in st.nodes.items():
        if isinstance(label, ArrowL):
            left = st.nodes[addr + (0,)]
            if not isinstance(left, (ConstL, VarL, VeblenL)):
                return False
            if not isinstance(st.nodes[addr + (1,)], JoinL):
                return False
    return True


def test_predicates_agree_with_tree_characterizations():
    rng = random.Random(29)
    for i in range(10_000):
        # mix arbitrary ASTs (incl. ill-formed shapes built by hand) in
        t = random_term(rng, 6, closed=False)
        if i % 7 == 0:
            t = Veblen(ZERO, Join((t,)))
        if i % 11 == 0:
            t = Arrow(Join((t,)), t)
        st = syntax_tree(t)
        assert is_well_formed(t) == _wf_tree(st)
        assert is_normal(t) == _normal_tree(st)


def test_tree_addresses_prefix_closed_and_leaves_are_leaf_labels():
    rng = random.Random(31)
    for _ in range(2000):
        st = syntax_tree(random_term(rng, 5, closed=False))
        addrs = set(st.nodes)
        for a in addrs:
            assert a[:-1] in addrs or a == ()
            if st.is_leaf(a):
                assert isinstance(st.label(a), (ConstL, VarL))


# -- codec -------------------------------------------------------------------

def test_encode_single_constant():
    doc = encode_tree(syntax_tree(Const("a")))
    assert doc == {"nodes": [{"addr": [], "kind": "const", "payload": "a"}]}


def test_round_trip_arrow_join_tree():
    st = syntax_tree(parse_term("1 ~> join(0, 2)"))
    assert decode_tree(encode_tree(st)) == st


def test_round_trip_random_trees():
    rng = random.Random(37)
    for _ in range(1000):
        st = syntax_tree(random_term(rng, 6, closed=False))
        assert decode_tree(encode_tree(st)) == st


def test_decode_rejects_unknown_kind():
    with pytest.raises(DocumentError, match="unknown kind"):
        decode_tree({"nodes": [{"addr": [], "kind": 7}]})


def test_decode_rejects_shape_violations():
    with pytest.raises(DocumentError):
        decode_tree({"nodes": []})  # missing root
    with pytest.raises(DocumentError):
        decode_tree({"nodes": [{"addr": [], "kind": "arrow"}]})  # arity
    with pytest.raises(DocumentError):
        decode_tree(
            {
                "nodes": [
                    {"addr": [], "kind": "const", "payload": "a"},
                    {"addr": [0, 0], "kind": "const", "payload": "b"},
                ]
            }
        )  # not prefix closed
    with pytest.raises(DocumentError):
        decode_tree(
            {
                "nodes": [
                    {"addr": [], "kind": "const", "payload": "a"},
                    {"addr": [], "kind": "const", "payload": "a"},
                ]
            }
        )  # duplicate address
    with pytest.raises(DocumentError):
        decode_tree({"nodes": [{"addr": [], "kind": "veblen", "payload": "q"}]})
    with pytest.raises(DocumentError):
        decode_tree("nope")


def test_decode_rejects_child_index_gap():
    doc = {
        "nodes": [
            {"addr": [], "kind": "join"},
            {"addr": [1], "kind": "const", "payload": "a"},
        ]
    }
    with pytest.raises(DocumentError):
        decode_tree(doc)
