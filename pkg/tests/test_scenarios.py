import csv
import json
import os

import pytest

from bespal.formula import compose_delta, parse
from bespal.modal_relation import saturate_core_relation
from bespal.scenarios import (MUDDY_PHI, MUDDY_PSI, AnnounceStep, CheckStep,
                              ScenarioSpec, build_card_game, build_muddy,
                              load_scenario, run_scenario, scenario_from_json,
                              scenario_to_json)
from bespal.update_engine import canonical_update

from universes import micro3


def _row(result, name):
    return next(r for r in result.rows if r.get("name") == name)


def _announce_rows(result):
    return [r for r in result.rows if r["kind"] == "announce"]


def test_card_game_runs_clean():
    result = run_scenario(build_card_game())
    assert result.ok and result.status == "ok"
    row = _row(result, "c-names-the-deal")
    assert row["expected"] is True and row["supported"] is True
    assert row["kripke"] is True and row["kripke_world"] == "012"
    # the staged construction produces an invalid relation here, and the
    # run records that rather than hiding it
    assert [r["verified"] for r in _announce_rows(result)] == [False]


def test_muddy_runs_clean():
    result = run_scenario(load_scenario("muddy"))
    assert result.ok
    both = _row(result, "a-and-b-know")
    assert both["supported"] is True and both["kripke"] is True
    third = _row(result, "c-knows")
    assert third["expected"] is False and third["supported"] is False
    assert third["kripke"] is False
    assert [r["verified"] for r in _announce_rows(result)] == [False, False]


def test_muddy_counterexample_runs_clean():
    result = run_scenario(load_scenario("muddy-counterexample"))
    assert result.ok
    assert _row(result, "b-knows")["supported"] is True
    assert _row(result, "a-knows")["supported"] is False
    assert [r["verified"] for r in _announce_rows(result)] == [True, True]


def test_card_update_stage_edges():
    spec = build_card_game()
    u = spec.universe
    rel = saturate_core_relation(u, spec.core_relations)
    stages = canonical_update(u, rel, spec.named_bases["B_012"],
                              parse("~1_a"), verify=False)
    doc = stages.s_star.to_json()
    assert set(doc["field"]) == {"B_012", "B_021", "B_201", "B_210"}
    assert doc["edges"] == {
        "a": [["B_012", "B_021"], ["B_201", "B_210"]],
        "b": [["B_012", "B_210"]],
        "c": [["B_021", "B_201"]],
    }


def test_muddy_update_stage_edges():
    spec = build_muddy("succeeding")
    u = spec.universe
    rel = saturate_core_relation(u, spec.core_relations)
    phi, psi = parse(MUDDY_PHI), parse(MUDDY_PSI)
    at = spec.named_bases["B_ab"]

    first = canonical_update(u, rel, at, compose_delta([phi]), verify=False)
    doc = first.s_star.to_json()
    assert set(doc["field"]) == {"B_a", "B_ab", "B_abc", "B_ac", "B_b",
                                 "B_bc", "B_c"}
    assert doc["edges"] == {
        "a": [["B_ab", "B_b"], ["B_abc", "B_bc"], ["B_ac", "B_c"]],
        "b": [["B_a", "B_ab"], ["B_abc", "B_ac"], ["B_bc", "B_c"]],
        "c": [["B_a", "B_ac"], ["B_ab", "B_abc"], ["B_b", "B_bc"]],
    }

    second = canonical_update(u, rel, at, compose_delta([phi, psi]),
                              verify=False)
    doc = second.s_star.to_json()
    assert set(doc["field"]) == {"B_ab", "B_abc", "B_ac", "B_bc"}
    assert doc["edges"] == {
        "a": [["B_abc", "B_bc"]],
        "b": [["B_abc", "B_ac"]],
        "c": [["B_ab", "B_abc"]],
    }


def test_counterexample_keeps_the_marker_edge():
    spec = build_muddy("counterexample")
    u = spec.universe
    rel = saturate_core_relation(u, spec.core_relations)
    phi = parse(MUDDY_PHI)
    stages = canonical_update(u, rel, spec.named_bases["B_ab"],
                              compose_delta([phi]), verify=False)
    # B_0's marker derives m_a, so announcing the disjunction does not
    # separate B_0 from B_a and agent a stays in the dark
    edge = ["B_0", "B_a"]
    assert edge in stages.s.to_json()["edges"]["a"]
    assert edge in stages.s_announced.to_json()["edges"]["a"]
    assert edge in stages.s_star.to_json()["edges"]["a"]


def test_scenario_json_round_trip(tmp_path):
    spec = build_card_game()
    doc = scenario_to_json(spec)
    clone = scenario_from_json(json.loads(json.dumps(doc)))
    assert clone.name == spec.name
    assert clone.named_bases == spec.named_bases
    assert scenario_to_json(clone) == doc

    path = tmp_path / "card.scenario.json"
    path.write_text(json.dumps(doc))
    result = run_scenario(load_scenario(str(path)))
    assert result.ok
    assert _row(result, "c-names-the-deal")["ok"] is True


def test_mutated_expectation_is_a_verdict_mismatch():
    spec = build_card_game()
    for step in spec.script:
        if isinstance(step, CheckStep):
            step.expected = False
    result = run_scenario(spec)
    assert result.status == "verdict-mismatch"
    assert not result.ok
    assert result.error["checks"] == ["c-names-the-deal"]


def test_torn_core_reports_saturation_failure():
    u = micro3()
    spec = ScenarioSpec(
        name="torn", universe=u,
        named_bases={"X": u.mask_of(["gp"]), "Y": u.mask_of(["gp", "gq"])},
        core_relations={"a": [(u.mask_of(["gp"]), u.mask_of(["gq"]))]},
        script=[CheckStep("x-holds-p", "X", parse("p"), True)])
    result = run_scenario(spec)
    assert result.status == "saturation-failure"
    assert not result.ok
    assert result.error["failures"]


def test_exhaustive_mode_budget_is_reported():
    result = run_scenario(build_card_game(), mode="exhaustive", budget=10)
    assert result.status == "budget-exceeded"
    assert "budget" in result.error["message"]


def test_export_writes_report_and_figures(tmp_path):
    out = str(tmp_path)
    result = run_scenario(build_card_game(), out_dir=out, render_png=True)
    assert result.ok
    names = set(os.listdir(out))
    assert "report.json" in names and "checks.csv" in names
    for stage in ("s", "s_announced", "s_star", "t", "r"):
        assert "card-game.1.{}.dot".format(stage) in names
        assert "card-game.1.{}.png".format(stage) in names
        assert os.path.getsize(os.path.join(
            out, "card-game.1.{}.png".format(stage))) > 0
    assert "card-game.1.stages.json" in names
    for path in result.files:
        assert os.path.exists(path)

    with open(os.path.join(out, "report.json")) as handle:
        report = json.load(handle)
    assert report["scenario"] == "card-game" and report["status"] == "ok"

    with open(os.path.join(out, "checks.csv")) as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 1
    assert rows[0]["name"] == "c-names-the-deal"
    assert rows[0]["ok"] == "True" and rows[0]["kripke"] == "True"

    with open(os.path.join(out, "card-game.1.stages.json")) as handle:
        stages_doc = json.load(handle)
    assert stages_doc["at"] == "B_012"
    assert stages_doc["verified"] is False
    assert set(stages_doc["s_star"]["field"]) == \
        {"B_012", "B_021", "B_201", "B_210"}


def test_inline_scenario_from_json():
    u = micro3()
    doc = {
        "name": "inline",
        "universe": u.to_json(),
        "core_relations": {"a": [["gp+gq", "gq+gqr"]]},
        "script": [
            {"announce": "q", "at": "B_gq"},
            # gqr's only rule needs q as a premise, and announcements do
            # not add rules, so r stays underivable there
            {"check": "r-after-q", "base": "B_gqr", "formula": "r",
             "expected": False},
        ],
        "kripke_model": None,
    }
    doc["universe"]["named_bases"] = {"B_gq": ["gq"], "B_gqr": ["gqr"]}
    spec = scenario_from_json(doc)
    assert spec.named_bases == {"B_gq": u.mask_of(["gq"]),
                                "B_gqr": u.mask_of(["gqr"])}
    result = run_scenario(spec)
    assert result.ok
    assert any(r["kind"] == "announce" for r in result.rows)
    assert _row(result, "r-after-q")["supported"] is False
