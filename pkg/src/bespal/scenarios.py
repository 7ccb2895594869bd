"""Worked multi-agent scenarios: the card table and the muddy children.

Each scenario bundles a rule universe with named bases, a core relation
to saturate, an optional possible-worlds twin, and a script of
announcements and expected verdicts.  run_scenario saturates the core,
replays the script in both semantics, compares every check against its
expected verdict, and (given an output directory) exports the staged
relation updates as JSON, DOT and PNG files.

The card table: three players a, b, c each secretly hold one of the
cards 0, 1, 2.  Holding rules are fixed (two players cannot share a
card, one player cannot hold two), each possible draw is a named base,
and after a announces "I do not hold card 1" player c can name the
whole deal from B_012.

The muddy children: children a, b, c may be muddy; the father announces
that at least one is, then that nobody knows their own state.  The
"succeeding" variant encodes "not muddy" as a rule block making the
child's muddiness absurd, and the two announcements leave a and b
knowing they are muddy at B_ab.  The "counterexample" variant drops the
not-muddy blocks in favour of inert marker atoms; then B_0 supports m_a
outright, the first announcement fails to eliminate it, and a never
learns their own state while b still does.
"""

import csv
import itertools
import json
import os
from dataclasses import dataclass, field

from .base_space import BaseRule, RuleGroup, Universe
from .formula import Announce, And, Atom, Knows, compose_delta, parse, render
from .kripke import KripkeModel, eval_formula
from .modal_relation import (BudgetError, ModalConditionError,
                             check_modal_conditions, saturate_core_relation)
from .support_engine import supports
from .update_engine import canonical_update
from . import figures


@dataclass
class AnnounceStep:
    formula: object
    at: str


@dataclass
class CheckStep:
    name: str
    base: str
    formula: object
    expected: bool
    kripke_world: str = None


@dataclass
class ScenarioSpec:
    name: str
    universe: Universe
    named_bases: dict
    core_relations: dict
    script: list
    kripke_model: KripkeModel = None

    def validate(self):
        for step in self.script:
            if isinstance(step, AnnounceStep):
                if step.at not in self.named_bases:
                    raise ValueError("unknown base {!r}".format(step.at))
            else:
                if step.base not in self.named_bases:
                    raise ValueError("unknown base {!r}".format(step.base))
                if step.expected not in (True, False):
                    raise ValueError(
                        "check {!r} has no expected verdict".format(step.name))
                if step.kripke_world is not None:
                    if self.kripke_model is None or \
                            step.kripke_world not in self.kripke_model.worlds:
                        raise ValueError("unknown world {!r}"
                                         .format(step.kripke_world))


PLAYERS = ("a", "b", "c")
CARDS = ("0", "1", "2")


def build_card_game():
    atoms = [c + "_" + p for c in CARDS for p in PLAYERS]
    fixed = []
    for c in CARDS:
        for p1, p2 in itertools.combinations(PLAYERS, 2):
            for target in atoms:
                fixed.append(BaseRule((c + "_" + p1, c + "_" + p2), target))
    for p in PLAYERS:
        for c1, c2 in itertools.combinations(CARDS, 2):
            for target in atoms:
                fixed.append(BaseRule((c1 + "_" + p, c2 + "_" + p), target))
    groups = [RuleGroup("d" + a, (BaseRule((), a),)) for a in atoms]
    u = Universe(atoms=atoms, agents=list(PLAYERS), fixed_rules=fixed,
                 groups=groups)

    named = {}
    for perm in itertools.permutations(CARDS):
        deal = "".join(perm)
        named["B_" + deal] = u.mask_of(
            ["d" + perm[i] + "_" + PLAYERS[i] for i in range(3)])
    u.named_bases.update(named)

    core = {p: [] for p in PLAYERS}
    for d1, d2 in itertools.combinations(sorted(named), 2):
        for i, p in enumerate(PLAYERS):
            if d1[2 + i] == d2[2 + i]:
                core[p].append((named[d1], named[d2]))

    worlds = sorted(n[2:] for n in named)
    valuation = {w: {w[i] + "_" + PLAYERS[i] for i in range(3)}
                 for w in worlds}
    relations = {}
    for i, p in enumerate(PLAYERS):
        edges = set()
        for w1 in worlds:
            for w2 in worlds:
                if w1[i] == w2[i]:
                    edges.add((w1, w2))
        relations[p] = edges
    twin = KripkeModel(worlds, PLAYERS, valuation, relations)

    goal = parse("K[c] (0_a & 1_b & 2_c)")
    spec = ScenarioSpec(
        name="card-game", universe=u, named_bases=named,
        core_relations=core, kripke_model=twin,
        script=[AnnounceStep(parse("~1_a"), at="B_012"),
                CheckStep("c-names-the-deal", "B_012", goal, True,
                          kripke_world="012")])
    spec.validate()
    return spec


MUDDY_PHI = "m_a | m_b | m_c"
MUDDY_PSI = ("~(K[a] m_a | K[a] ~m_a) & ~(K[b] m_b | K[b] ~m_b)"
             " & ~(K[c] m_c | K[c] ~m_c)")


def _muddy_twin():
    worlds = [""] + ["".join(s) for k in (1, 2, 3)
                     for s in itertools.combinations(PLAYERS, k)]
    valuation = {w: {"m_" + j for j in w} for w in worlds}
    relations = {}
    for j in PLAYERS:
        edges = set()
        for w1 in worlds:
            for w2 in worlds:
                if set(w1) - {j} == set(w2) - {j}:
                    edges.add((w1, w2))
        relations[j] = edges
    return KripkeModel(worlds, PLAYERS, valuation, relations)


def _muddy_names(subsets):
    return ["B_" + (s or "0") for s in subsets]


def build_muddy(variant="succeeding"):
    if variant not in ("succeeding", "counterexample"):
        raise ValueError("unknown muddy variant {!r}".format(variant))
    subsets = [""] + ["".join(s) for k in (1, 2, 3)
                      for s in itertools.combinations(PLAYERS, k)]

    if variant == "succeeding":
        # the spare atom is concluded by no rule, so the all-muddy base
        # stays consistent while each not-muddy block still makes the
        # child's muddiness absurd
        atoms = ["m_a", "m_b", "m_c", "spare"]
        groups = [RuleGroup("ax_" + j, (BaseRule((), "m_" + j),))
                  for j in PLAYERS]
        groups += [RuleGroup("bl_" + j,
                             tuple(BaseRule(("m_" + j,), q) for q in atoms))
                   for j in PLAYERS]
        u = Universe(atoms=atoms, agents=list(PLAYERS), groups=groups)
        named = {}
        for s in subsets:
            picks = [("ax_" + j) if j in s else ("bl_" + j) for j in PLAYERS]
            named["B_" + (s or "0")] = u.mask_of(picks)
    else:
        # inert markers keep the named bases incomparable; the marker
        # pair rules make any two of them jointly absurd, so the lattice
        # of consistent bases is exactly the empty base plus these eight
        marker = {s: "p_" + (s or "0") for s in subsets}
        atoms = ["m_a", "m_b", "m_c"] + [marker[s] for s in subsets]
        fixed = [BaseRule((marker[s1], marker[s2]), t)
                 for s1, s2 in itertools.combinations(subsets, 2)
                 for t in atoms]
        groups = []
        for s in subsets:
            rules = [BaseRule((), marker[s])]
            if s == "":
                rules.append(BaseRule((marker[s],), "m_a"))
            else:
                rules.extend(BaseRule((), "m_" + j) for j in s)
            groups.append(RuleGroup("g_" + (s or "0"), tuple(rules)))
        u = Universe(atoms=atoms, agents=list(PLAYERS), fixed_rules=fixed,
                     groups=groups)
        named = {"B_" + (s or "0"): u.mask_of(["g_" + (s or "0")])
                 for s in subsets}
    u.named_bases.update(named)

    core = {j: [] for j in PLAYERS}
    for j in PLAYERS:
        for s in subsets:
            if j not in s:
                bigger = "".join(sorted(s + j))
                core[j].append((named["B_" + (s or "0")], named["B_" + bigger]))

    phi = parse(MUDDY_PHI)
    psi = parse(MUDDY_PSI)
    script = [AnnounceStep(phi, at="B_ab"), AnnounceStep(psi, at="B_ab")]
    if variant == "succeeding":
        script += [
            CheckStep("a-and-b-know", "B_ab",
                      And(Knows("a", Atom("m_a")), Knows("b", Atom("m_b"))),
                      True, kripke_world="ab"),
            CheckStep("c-knows", "B_ab", Knows("c", Atom("m_c")),
                      False, kripke_world="ab"),
        ]
        twin = _muddy_twin()
    else:
        script += [
            CheckStep("b-knows", "B_ab", Knows("b", Atom("m_b")), True),
            CheckStep("a-knows", "B_ab", Knows("a", Atom("m_a")), False),
        ]
        twin = None

    spec = ScenarioSpec(
        name="muddy" if variant == "succeeding" else "muddy-counterexample",
        universe=u, named_bases=named, core_relations=core,
        script=script, kripke_model=twin)
    spec.validate()
    return spec


BUILDERS = {
    "card-game": build_card_game,
    "muddy": lambda: build_muddy("succeeding"),
    "muddy-counterexample": lambda: build_muddy("counterexample"),
}


def scenario_from_json(doc):
    u = Universe.from_json(doc["universe"])
    core = {agent: [(u.resolve_base(b1), u.resolve_base(b2))
                    for b1, b2 in pairs]
            for agent, pairs in doc["core_relations"].items()}
    script = []
    for entry in doc["script"]:
        if "announce" in entry:
            script.append(AnnounceStep(parse(entry["announce"]),
                                       at=entry["at"]))
        else:
            script.append(CheckStep(
                entry["check"], entry["base"], parse(entry["formula"]),
                entry["expected"], kripke_world=entry.get("kripke_world")))
    twin = None
    if doc.get("kripke_model") is not None:
        twin = KripkeModel.from_json(doc["kripke_model"])
    spec = ScenarioSpec(name=doc["name"], universe=u,
                        named_bases=dict(u.named_bases), core_relations=core,
                        script=script, kripke_model=twin)
    spec.validate()
    return spec


def scenario_to_json(spec):
    u = spec.universe
    script = []
    for step in spec.script:
        if isinstance(step, AnnounceStep):
            script.append({"announce": render(step.formula), "at": step.at})
        else:
            entry = {"check": step.name, "base": step.base,
                     "formula": render(step.formula),
                     "expected": step.expected}
            if step.kripke_world is not None:
                entry["kripke_world"] = step.kripke_world
            script.append(entry)
    doc = {
        "name": spec.name,
        "universe": u.to_json(),
        "core_relations": {agent: sorted([u.label(m1), u.label(m2)]
                                         for m1, m2 in pairs)
                           for agent, pairs in spec.core_relations.items()},
        "script": script,
        "kripke_model": (spec.kripke_model.to_json()
                         if spec.kripke_model is not None else None),
    }
    return doc


def load_scenario(name_or_path):
    """A built-in scenario by name, or a JSON scenario file by path."""
    if name_or_path in BUILDERS:
        return BUILDERS[name_or_path]()
    with open(name_or_path) as handle:
        return scenario_from_json(json.load(handle))


@dataclass
class ScenarioResult:
    name: str
    status: str
    rows: list
    files: list = field(default_factory=list)
    error: dict = None

    @property
    def ok(self):
        return self.status == "ok"

    def to_json(self):
        return {"scenario": self.name, "status": self.status,
                "rows": self.rows, "files": self.files, "error": self.error}


def run_scenario(spec, mode="canonical", out_dir=None, budget=None,
                 seed=0, render_png=True):
    """Replay the scenario script and compare every expected verdict.

    Returns a ScenarioResult whose status is "ok", "verdict-mismatch",
    "saturation-failure" or "budget-exceeded".  With out_dir set, each
    announcement's staged update is exported as JSON plus one DOT (and
    PNG) file per stage, and the final report is written as report.json
    with the check rows in checks.csv.
    """
    spec.validate()
    u = spec.universe
    rows = []
    files = []

    try:
        relations = saturate_core_relation(u, spec.core_relations)
    except ModalConditionError as e:
        return _finish(spec, out_dir, ScenarioResult(
            spec.name, "saturation-failure", rows,
            error={"message": str(e), "failures": e.report.failures}))
    except BudgetError as e:
        return _finish(spec, out_dir, ScenarioResult(
            spec.name, "budget-exceeded", rows, error={"message": str(e)}))
    report = check_modal_conditions(relations)
    if not report.ok:
        return _finish(spec, out_dir, ScenarioResult(
            spec.name, "saturation-failure", rows,
            error={"message": "saturated relation fails the modal conditions",
                   "failures": report.failures}))

    delta = []
    mismatch = False
    try:
        for index, step in enumerate(spec.script, 1):
            if isinstance(step, AnnounceStep):
                delta.append(step.formula)
                stages = canonical_update(
                    u, relations, spec.named_bases[step.at],
                    compose_delta(delta), verify=False)
                row = {"step": index, "kind": "announce",
                       "formula": render(step.formula), "at": step.at,
                       "verified": bool(stages.report.ok)}
                if out_dir is not None:
                    files.extend(figures.export_stages(
                        stages, out_dir, "{}.{}".format(spec.name, index),
                        render_png=render_png))
                rows.append(row)
                continue

            judgement = supports(
                u, relations, spec.named_bases[step.base], step.formula,
                delta=tuple(delta), mode=mode, budget=budget)
            row = {"step": index, "kind": "check", "name": step.name,
                   "base": step.base, "formula": render(step.formula),
                   "expected": step.expected, "supported": judgement.holds,
                   "ok": judgement.holds == step.expected}
            if step.kripke_world is not None:
                wrapped = step.formula
                for announced in reversed(delta):
                    wrapped = Announce(announced, wrapped)
                truth = eval_formula(spec.kripke_model, step.kripke_world,
                                     wrapped)
                row["kripke_world"] = step.kripke_world
                row["kripke"] = truth
                row["ok"] = row["ok"] and truth == step.expected
            mismatch = mismatch or not row["ok"]
            rows.append(row)
    except BudgetError as e:
        return _finish(spec, out_dir, ScenarioResult(
            spec.name, "budget-exceeded", rows, files,
            error={"message": str(e)}))

    status = "verdict-mismatch" if mismatch else "ok"
    result = ScenarioResult(spec.name, status, rows, files)
    if mismatch:
        result.error = {"message": "scripted verdicts disagree",
                        "checks": [r["name"] for r in rows
                                   if r["kind"] == "check" and not r["ok"]]}
    return _finish(spec, out_dir, result)


def _finish(spec, out_dir, result):
    if out_dir is None:
        return result
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as handle:
        json.dump(result.to_json(), handle, indent=2, sort_keys=True)
        handle.write("\n")
    result.files.append(path)

    checks = [r for r in result.rows if r["kind"] == "check"]
    path = os.path.join(out_dir, "checks.csv")
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=[
            "step", "name", "base", "formula", "expected", "supported",
            "kripke_world", "kripke", "ok"])
        writer.writeheader()
        for row in checks:
            writer.writerow({k: row.get(k, "") for k in writer.fieldnames})
    result.files.append(path)
    return result
