import itertools

import pytest

from bespal.modal_relation import (AgentRelationSet, BudgetError,
                                   ModalConditionError, RawRelation,
                                   bell_number, check_modal_conditions,
                                   identity_relation, iter_partitions,
                                   partition_at_index, reachable_set,
                                   relation_from_json, relation_sets,
                                   rule_union, saturate_core_relation)
from bespal.scenarios import build_card_game

from universes import flat, micro1, micro2, micro3

A_STAR = "a"


def test_bell_numbers():
    assert [bell_number(n) for n in range(8)] == \
        [1, 1, 2, 5, 15, 52, 203, 877]


def test_partition_indexing_is_a_bijection():
    items = ["w", "x", "y", "z"]
    seen = set()
    for blocks in iter_partitions(items):
        flat_items = sorted(i for b in blocks for i in b)
        assert flat_items == sorted(items)
        seen.add(frozenset(frozenset(b) for b in blocks))
    assert len(seen) == bell_number(4) == 15
    with pytest.raises(ValueError):
        partition_at_index(items, bell_number(4))


def test_identity_relation_is_modal():
    for u in (micro1(), micro2(), micro3()):
        rel = identity_relation(u)
        assert check_modal_conditions(rel).ok
        assert rel.row(u.agents[0], 3) == u.bit(3)


def test_condition_witnesses_on_bad_partitions():
    u = micro1()
    gp, gq = u.mask_of(["gp"]), u.mask_of(["gq"])
    incons = u.closures.inconsistent

    mixed = AgentRelationSet(u, {"a": [u.bit(0) | u.bit(gp) | incons,
                                       u.bit(gq)]})
    report = check_modal_conditions(mixed)
    assert not report.ok
    assert "b" in report.failing_conditions()

    # relating the empty base to gp forces gq to reach a superset of gp
    lopsided = AgentRelationSet(u, {"a": [u.bit(0) | u.bit(gp),
                                          u.bit(gq), incons]})
    report = check_modal_conditions(lopsided)
    assert not report.ok
    assert {"c", "d"} & set(report.failing_conditions())
    witness = report.failures[0]["bases"]
    assert all(0 <= m < u.n_bases for m in witness)


def test_raw_relation_checks():
    u = micro1()
    gp, gq = u.mask_of(["gp"]), u.mask_of(["gq"])
    loops = {(m, m) for m in range(u.n_bases)}

    missing_loop = RawRelation(u, {"a": loops - {(gq, gq)}})
    assert "reflexive" in check_modal_conditions(
        missing_loop).failing_conditions()

    asymmetric = RawRelation(u, {"a": loops | {(gp, gq)}})
    assert "symmetric" in check_modal_conditions(
        asymmetric).failing_conditions()

    ok = RawRelation(u, {"a": loops})
    assert check_modal_conditions(ok).ok
    assert ok.to_relation_set() == identity_relation(u)

    with pytest.raises(ModalConditionError):
        asymmetric.to_relation_set()


def test_relation_sets_counts_and_validity():
    counts = {}
    for name, u in [("m1", micro1()), ("m2", micro2()), ("m3", micro3())]:
        rels = relation_sets(u)
        assert all(check_modal_conditions(r).ok for r in rels)
        assert len(set(rels)) == len(rels)
        counts[name] = len(rels)
    # one agent: valid partitions of the consistent bases; two agents square it
    assert counts == {"m1": 3, "m2": 9, "m3": 17}


def test_relation_sets_match_filtered_partitions():
    u = micro3()
    cons = list(u.iter_bases(u.closures.consistent))
    expected = set()
    for blocks in iter_partitions(cons):
        parts = [sum(u.bit(m) for m in block) for block in blocks]
        parts.append(u.closures.inconsistent)
        rel = AgentRelationSet(u, {"a": parts})
        if check_modal_conditions(rel).ok:
            expected.add(rel)
    assert expected == set(relation_sets(u))


def test_relation_sets_sampling_is_seeded():
    u = flat(4, ["a", "b"])
    first = relation_sets(u, mode="sample", count=12, seed=5)
    second = relation_sets(u, mode="sample", count=12, seed=5)
    other = relation_sets(u, mode="sample", count=12, seed=6)
    assert [r.canonical_form() for r in first] == \
        [r.canonical_form() for r in second]
    assert [r.canonical_form() for r in first] != \
        [r.canonical_form() for r in other]
    assert all(check_modal_conditions(r).ok for r in first)


def test_relation_sets_budget():
    with pytest.raises(BudgetError):
        relation_sets(flat(6, ["a"]), budget=3)


def test_saturation_agrees_with_exhaustive_search():
    """One core edge saturates exactly when some valid relation set holds
    that edge while keeping the unpaired max-consistent bases apart."""
    for u in (micro1(), micro3()):
        rels = relation_sets(u)
        cons = list(u.iter_bases(u.closures.consistent))
        maxcon = list(u.iter_bases(u.closures.max_consistent))
        agent = u.agents[0]
        for m1, m2 in itertools.combinations(cons, 2):
            try:
                rel = saturate_core_relation(u, {agent: [(m1, m2)]})
                saturated = True
                assert rel.row(agent, m1) >> m2 & 1
                assert check_modal_conditions(rel).ok
            except ModalConditionError:
                saturated = False

            def respects(r):
                if not r.row(agent, m1) >> m2 & 1:
                    return False
                return all(not r.row(agent, x) >> y & 1
                           for x, y in itertools.combinations(maxcon, 2)
                           if not {x, y} <= {m1, m2})
            assert saturated == any(respects(r) for r in rels), \
                (u.label(m1), u.label(m2))


def test_saturation_rejects_inconsistent_endpoint():
    u = micro1()
    bad = u.mask_of(["gp", "gq"])
    with pytest.raises(ModalConditionError) as err:
        saturate_core_relation(u, {"a": [(u.mask_of(["gp"]), bad)]})
    assert not err.value.report.ok
    assert err.value.report.failures[0]["detail"] == \
        "inconsistent core endpoint"


def test_saturation_reports_torn_core():
    u = micro3()
    gp, gq = u.mask_of(["gp"]), u.mask_of(["gq"])
    with pytest.raises(ModalConditionError) as err:
        saturate_core_relation(u, {"a": [(gp, gq)]})
    assert err.value.report.failures[0]["detail"] == \
        "core edge torn apart by refinement"


def test_card_saturation_layout():
    spec = build_card_game()
    u = spec.universe
    rel = saturate_core_relation(u, spec.core_relations)
    assert check_modal_conditions(rel).ok
    deals = spec.named_bases
    maxcon = u.closures.max_consistent
    assert sorted(u.label(m) for m in u.iter_bases(maxcon)) == sorted(deals)
    # player a cannot tell deals apart that give a the same card
    row = rel.row("a", deals["B_012"])
    assert row & maxcon == u.bit(deals["B_012"]) | u.bit(deals["B_021"])
    row = rel.row("c", deals["B_012"])
    assert row & maxcon == u.bit(deals["B_012"]) | u.bit(deals["B_102"])
    reach = reachable_set(rel, deals["B_012"])
    assert reach == sum(u.bit(m) for m in deals.values())


def test_relation_from_json_forms():
    u = micro1()
    loops = [[u.label(m), u.label(m)] for m in range(u.n_bases)]
    raw = relation_from_json(u, {"core_edges": {"a": loops}, "raw": True})
    assert raw == identity_relation(u)

    spec = build_card_game()
    core = {agent: [[spec.universe.label(m1), spec.universe.label(m2)]
                    for m1, m2 in pairs]
            for agent, pairs in spec.core_relations.items()}
    again = relation_from_json(spec.universe, {"core_edges": core})
    assert again == saturate_core_relation(spec.universe,
                                           spec.core_relations)


def test_rule_union():
    u = micro3()
    gp, gq = u.mask_of(["gp"]), u.mask_of(["gq"])
    merged = rule_union(u, u.bit(gp) | u.bit(gq))
    assert merged == u.rules_of(gp) | u.rules_of(gq)
    assert u.rules_of(gp) < merged
    assert rule_union(u, u.bit(0)) == u.rules_of(0)
