import random

import pytest

from bespal.formula import (Announce, And, Atom, BOT, Implies, Knows, Not,
                            Or, ParseError, _announce_step, agents_of,
                            atoms_of, complexity, compose_delta, desugar,
                            is_core, parse, render, translate)

import oracles
from formgen import random_formula

P, Q, R = Atom("p"), Atom("q"), Atom("r")


@pytest.mark.parametrize("text", [
    "p",
    "bot",
    "p -> q -> p",
    "(p -> q) -> p",
    "~p & q | r",
    "p | (q | r) & p",
    "K[a] ~q",
    "[p] K[a] q",
    "p <-> q <-> r",
    "[~1_a] K[c] (0_a & 1_b & 2_c)",
    "K[a2] (p -> bot)",
])
def test_render_parse_round_trip(text):
    f = parse(text)
    assert render(f) == text
    assert parse(render(f)) is f


def test_parse_shapes():
    assert parse("p -> q -> p") is Implies(P, Implies(Q, P))
    assert parse("~p & q | r") is Or(And(Not(P), Q), R)
    assert parse("p & q & r") is And(P, And(Q, R))
    # prefix operators bind tightest: the announcement takes K[a] q only
    assert parse("[p] K[a] q & r") is And(Announce(P, Knows("a", Q)), R)
    assert parse("bot") is BOT
    assert parse("0_a") is Atom("0_a")


@pytest.mark.parametrize("text", [
    "", "p ->", "(p", "p)", "p q", "K p", "K[a", "K[] p", "[p q", "->",
    "p & ? q",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse(text)
    with pytest.raises(ValueError):
        parse(text)


def test_interning_is_identity():
    assert parse("p & (q -> bot)") is parse("p&(q->bot)")
    assert Implies(P, Q) is Implies(P, Q)
    f = parse("[p] K[a] (q | ~r)")
    assert f.fid == parse("[p] K[a] (q | ~r)").fid


def test_desugar_pinned_encodings():
    assert desugar(Not(P)) is Implies(P, BOT)
    assert desugar(And(P, Q)) is parse(
        "(((p -> bot) -> bot) -> (q -> bot)) -> bot")
    assert desugar(Or(P, Q)) is parse("(p -> bot) -> q")
    left = Implies(P, Q)
    right = Implies(Q, P)
    assert desugar(parse("p <-> q")) is desugar(And(left, right))


def test_desugar_matches_independent_table():
    rng = random.Random(7)
    for _ in range(300):
        f = random_formula(rng, ["p", "q", "r"], ["a", "b"], 4)
        d = desugar(f)
        assert is_core(d)
        assert d is oracles.core_form(f)
        assert desugar(d) is d


@pytest.mark.parametrize("text,expected", [
    ("p", 1),
    ("bot", 1),
    ("~p", 2),
    ("p -> q", 2),
    ("K[a] p", 2),
    ("[p] q", 3),
    ("[q] K[a] p", 6),
    ("[p] [q] r", 9),
])
def test_complexity_pinned(text, expected):
    assert complexity(parse(text)) == expected


def test_translate_pinned_rewrites():
    assert render(translate(parse("[q] K[a] p"))) == "q -> K[a] (q -> p)"
    assert translate(parse("[p] q")) is parse("p -> q")
    assert translate(parse("[p] bot")) is parse("p -> bot")
    assert translate(parse("[p] (q -> r)")) is parse("(p -> q) -> p -> r")
    assert translate(parse("K[a] p")) is parse("K[a] p")


def _announce_subterms(f):
    out, stack, seen = [], [desugar(f)], set()
    while stack:
        g = stack.pop()
        if g.fid in seen:
            continue
        seen.add(g.fid)
        if isinstance(g, Announce):
            out.append(g)
            stack += [g.announced, g.body]
        elif isinstance(g, Implies):
            stack += [g.left, g.right]
        elif isinstance(g, Knows):
            stack.append(g.body)
    return out


def test_translate_eliminates_announcements_and_shrinks():
    rng = random.Random(11)
    for _ in range(200):
        f = random_formula(rng, ["p", "q"], ["a"], 4)
        t = translate(f)
        assert not _announce_subterms(t)
        assert complexity(t) <= complexity(f)
        for sub in _announce_subterms(f):
            assert complexity(_announce_step(sub)) < complexity(sub)


def test_compose_delta():
    assert compose_delta(()) is Implies(BOT, BOT)
    assert compose_delta((P,)) is P
    assert compose_delta((P, Q)) is And(P, Announce(P, Q))
    assert compose_delta([P, Q, R]) is And(
        P, Announce(P, And(Q, Announce(Q, R))))


def test_atoms_and_agents_of():
    f = parse("[m_a | m_b] (K[a] m_a -> K[b] ~m_b)")
    assert atoms_of(f) == {"m_a", "m_b"}
    assert agents_of(f) == {"a", "b"}
    assert atoms_of(BOT) == set()
    assert agents_of(parse("p & q")) == set()
