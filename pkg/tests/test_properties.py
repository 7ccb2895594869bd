import random

from hypothesis import given, settings, strategies as st

from bespal.formula import (BOT, And, Announce, Atom, Iff, Implies, Knows,
                            Not, Or, complexity, desugar, is_core, parse,
                            render, translate)
from bespal.kripke import eval_formula
from bespal.modal_relation import relation_sets
from bespal.support_engine import Evaluator

import formgen
import oracles
from universes import flat, micro1, micro2, micro3

UNIVERSES = [micro1(), micro2(), micro3(), flat(4, ["a"]),
             flat(5, ["a", "b"])]
M2 = micro2()
M2_RELS = relation_sets(M2)
M2_EVALS = [Evaluator(M2, rel) for rel in M2_RELS]
M3 = micro3()


def formulas(max_leaves=10):
    leaves = st.one_of(st.sampled_from([Atom("p"), Atom("q")]), st.just(BOT))
    agents = st.sampled_from(["a", "b"])

    def extend(children):
        return st.one_of(
            st.builds(Not, children),
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Implies, children, children),
            st.builds(Iff, children, children),
            st.builds(Knows, agents, children),
            st.builds(Announce, children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@given(formulas())
def test_render_parse_round_trip(f):
    assert parse(render(f)) is f


@given(formulas())
def test_desugar_is_core_and_idempotent(f):
    core = desugar(f)
    assert is_core(core)
    assert desugar(core) is core


def _has_announce(f):
    if isinstance(f, Announce):
        return True
    if isinstance(f, Implies):
        return _has_announce(f.left) or _has_announce(f.right)
    if isinstance(f, Knows):
        return _has_announce(f.body)
    return False


@given(formulas())
def test_translation_is_announcement_free_and_shrinks(f):
    t = translate(f)
    assert not _has_announce(desugar(t))
    assert 1 <= complexity(t) <= complexity(f)


@st.composite
def base_pairs(draw):
    u = draw(st.sampled_from(UNIVERSES))
    mask = draw(st.integers(0, u.n_bases - 1))
    extra = draw(st.integers(0, u.n_bases - 1))
    return u, mask, mask | extra


@given(base_pairs())
def test_closure_is_monotone_and_matches_naive(args):
    u, small, large = args
    assert u.closure(small) <= u.closure(large)
    assert u.closure(small) == oracles.naive_closure(u, small)
    assert u.is_consistent(small) == (not oracles.naive_inconsistent(u, small))


@given(st.integers(0, 2 ** 8 - 1))
def test_superset_quantifiers_match_brute_force(bitmap):
    u = M3
    want_all = 0
    want_any = 0
    for m in range(u.n_bases):
        sups = list(oracles.supersets(u, m))
        if all(bitmap >> c & 1 for c in sups):
            want_all |= u.bit(m)
        if any(bitmap >> c & 1 for c in sups):
            want_any |= u.bit(m)
    assert u.sup_and(bitmap) == want_all
    assert u.sup_or(bitmap) == want_any


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(M2_EVALS) - 1), formulas(max_leaves=8))
def test_support_bitmaps_are_up_closed_with_explosion(index, f):
    ev = M2_EVALS[index]
    bm = ev.bitmap(f)
    assert bm & M2.closures.inconsistent == M2.closures.inconsistent
    for b in M2.iter_bases(bm):
        for c in M2.enumerate_supersets(b):
            assert bm >> c & 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, len(M2_EVALS) - 1), formulas(max_leaves=8))
def test_support_matches_naive_oracle_on_random_formulas(index, f):
    rel = M2_RELS[index]
    ev = M2_EVALS[index]
    bm = ev.bitmap(f)
    for b in range(M2.n_bases):
        assert bool(bm >> b & 1) == oracles.naive_supports(M2, rel, b, f)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_kripke_eval_matches_naive_oracle(seed):
    rng = random.Random(seed)
    model = formgen.random_s5_model(rng, rng.randint(2, 4), ["p", "q"],
                                    ["a", "b"])
    f = formgen.random_formula(rng, ["p", "q"], ["a", "b"], depth=3)
    for w in model.worlds:
        assert eval_formula(model, w, f) == \
            oracles.naive_kripke(model.worlds, model.valuation,
                                 model.relations, w, f)
