"""Command line surface over the two semantics.

Exit codes: 0 all expectations met, 1 a semantic verdict went the other
way (unsupported formula, failed condition report, verdict mismatch),
2 usage or input errors, 3 search budget exceeded.
"""

import contextlib
import json
import sys

import click

from . import figures, scenarios
from .base_space import Universe
from .formula import complexity, parse, render, translate
from .kripke import KripkeModel, eval_formula
from .modal_relation import (BudgetError, ModalConditionError,
                             check_modal_conditions, relation_from_json,
                             saturate_core_relation)
from .support_engine import axiom_suite, supports
from .support_engine import valid_in_space as _valid_in_space
from .update_engine import canonical_update

EXIT_SEMANTIC = 1
EXIT_BUDGET = 3


@contextlib.contextmanager
def _budget_guard():
    try:
        yield
    except BudgetError as e:
        click.echo("budget exceeded: {}".format(e), err=True)
        sys.exit(EXIT_BUDGET)


def _parse_formula(text):
    try:
        return parse(text)
    except ValueError as e:
        raise click.UsageError("bad formula {!r}: {}".format(text, e))


def _load_json(path):
    try:
        with open(path) as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise click.UsageError("cannot read {}: {}".format(path, e))


def _load_universe(path):
    try:
        return Universe.from_json(_load_json(path))
    except (KeyError, ValueError) as e:
        raise click.UsageError("bad universe file {}: {}".format(path, e))


def _load_relations(universe, path):
    doc = _load_json(path)
    try:
        return relation_from_json(universe, doc)
    except ModalConditionError as e:
        click.echo("relations in {} violate the modal conditions: {}"
                   .format(path, e), err=True)
        _echo_failures(universe, e.report)
        sys.exit(EXIT_SEMANTIC)
    except (KeyError, ValueError) as e:
        raise click.UsageError("bad relations file {}: {}".format(path, e))


def _resolve_base(universe, text):
    try:
        return universe.resolve_base(text)
    except ValueError as e:
        raise click.UsageError(str(e))


def _workspace(scenario, universe_path, relations_path):
    """Universe plus relations, from a scenario or a pair of files."""
    if scenario is not None:
        if universe_path or relations_path:
            raise click.UsageError(
                "--scenario replaces --universe/--relations")
        try:
            spec = scenarios.load_scenario(scenario)
        except (OSError, KeyError, ValueError,
                json.JSONDecodeError) as e:
            raise click.UsageError("bad scenario {!r}: {}"
                                   .format(scenario, e))
        try:
            return spec.universe, saturate_core_relation(
                spec.universe, spec.core_relations)
        except ModalConditionError as e:
            click.echo("scenario core cannot be saturated: {}".format(e),
                       err=True)
            sys.exit(EXIT_SEMANTIC)
    if not universe_path or not relations_path:
        raise click.UsageError(
            "pass --scenario or both --universe and --relations")
    u = _load_universe(universe_path)
    return u, _load_relations(u, relations_path)


def _emit_json(doc):
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


def _echo_failures(universe, report):
    for f in report.failures:
        bases = ", ".join(universe.label(m) for m in f["bases"])
        line = "condition ({}) fails for agent {} at {}".format(
            f["condition"], f["agent"], bases)
        if f.get("detail"):
            line += " ({})".format(f["detail"])
        click.echo(line)


_mode = click.option("--mode", type=click.Choice(["canonical", "exhaustive"]),
                     default="canonical", show_default=True,
                     help="support evaluation strategy")
_seed = click.option("--seed", type=int, default=0, show_default=True)
_fmt = click.option("--format", "fmt",
                    type=click.Choice(["text", "json", "dot"]),
                    default="text", show_default=True)
_budget = click.option("--budget", type=int, default=None,
                       envvar="BESPAL_BUDGET",
                       help="cap on bases visited per evaluation "
                            "(env BESPAL_BUDGET)")
_sample = click.option("--sample", type=int, default=0, show_default=True,
                       help="sample this many relation sets instead of "
                            "enumerating all of them")


@click.group()
@click.version_option(package_name="bespal", prog_name="bespal")
def main():
    """Announcement logic over rule bases and possible worlds."""


@main.command()
@click.option("--scenario", help="built-in name or scenario file supplying "
                                 "universe and relations")
@click.option("--universe", "universe_path", type=click.Path())
@click.option("--relations", "relations_path", type=click.Path())
@click.option("--base", required=True)
@click.option("--formula", "formula_text", required=True)
@click.option("--assume", multiple=True, help="assumption formula (repeat)")
@click.option("--delta", multiple=True,
              help="announcement already made, in order (repeat)")
@_mode
@_budget
@_fmt
def check(scenario, universe_path, relations_path, base, formula_text,
          assume, delta, mode, budget, fmt):
    """Judge whether a base supports a formula."""
    u, relations = _workspace(scenario, universe_path, relations_path)
    f = _parse_formula(formula_text)
    gammas = tuple(_parse_formula(g) for g in assume)
    deltas = tuple(_parse_formula(d) for d in delta)
    mask = _resolve_base(u, base)
    with _budget_guard():
        judgement = supports(u, relations, mask, f, assumptions=gammas,
                             delta=deltas, mode=mode, budget=budget)
    if fmt == "json":
        _emit_json(judgement.to_json(u))
    else:
        click.echo("base: {}".format(u.label(mask)))
        click.echo("formula: {}".format(render(f)))
        if deltas:
            click.echo("after: {}".format("; ".join(map(render, deltas))))
        click.echo("supported: {}".format("yes" if judgement.holds else "no"))
    sys.exit(0 if judgement.holds else EXIT_SEMANTIC)


@main.command("kripke-check")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--world", required=True)
@click.option("--formula", "formula_text", required=True)
@_fmt
def kripke_check(model_path, world, formula_text, fmt):
    """Evaluate a formula at a world of a possible-worlds model."""
    try:
        model = KripkeModel.from_json(_load_json(model_path))
    except (KeyError, ValueError) as e:
        raise click.UsageError("bad model file {}: {}".format(model_path, e))
    if world not in model.worlds:
        raise click.UsageError("unknown world {!r}".format(world))
    f = _parse_formula(formula_text)
    truth = eval_formula(model, world, f)
    if fmt == "json":
        _emit_json({"world": world, "formula": render(f), "holds": truth})
    else:
        click.echo("holds: {}".format("yes" if truth else "no"))
    sys.exit(0 if truth else EXIT_SEMANTIC)


@main.command("validate-relation")
@click.option("--universe", "universe_path", type=click.Path(), required=True)
@click.option("--relations", "relations_path", type=click.Path(),
              required=True)
@_fmt
def validate_relation(universe_path, relations_path, fmt):
    """Check a relation set against the modal relation conditions."""
    u = _load_universe(universe_path)
    relations = _load_relations(u, relations_path)
    report = check_modal_conditions(relations)
    if fmt == "json":
        _emit_json(report.to_json(u))
    elif report.ok:
        click.echo("ok")
    else:
        _echo_failures(u, report)
    sys.exit(0 if report.ok else EXIT_SEMANTIC)


@main.command()
@click.option("--scenario", help="built-in name or scenario file supplying "
                                 "universe and relations")
@click.option("--universe", "universe_path", type=click.Path())
@click.option("--relations", "relations_path", type=click.Path())
@click.option("--base", required=True)
@click.option("--formula", "formula_text", required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="write stage JSON, DOT and PNG files here")
@click.option("--png/--no-png", default=True, show_default=True)
@_seed
@_fmt
def update(scenario, universe_path, relations_path, base, formula_text,
           out_dir, png, seed, fmt):
    """Run the staged announcement update and export the stages."""
    u, relations = _workspace(scenario, universe_path, relations_path)
    f = _parse_formula(formula_text)
    mask = _resolve_base(u, base)
    stages = canonical_update(u, relations, mask, f, verify=False)
    files = []
    if out_dir is not None:
        files = figures.export_stages(stages, out_dir, "update",
                                      render_png=png, seed=seed)
    if fmt == "json":
        doc = stages.to_json()
        doc["files"] = files
        _emit_json(doc)
    elif fmt == "dot":
        for name, graph in figures.stage_graphs(stages).items():
            click.echo("// stage {}".format(name))
            click.echo(figures.graph_dot(graph))
    else:
        click.echo("announced: {}".format(render(stages.announced)))
        click.echo("at: {}".format(u.label(stages.at)))
        for name, stage in [("s", stages.s), ("s_announced",
                                              stages.s_announced),
                            ("s_star", stages.s_star), ("t", stages.t_stage)]:
            size = len(list(u.iter_bases(stage.field)))
            click.echo("stage {}: {} bases".format(name, size))
        click.echo("verified: {}".format("yes" if stages.report.ok else "no"))
        if not stages.report.ok:
            _echo_failures(u, stages.report)
        for path in files:
            click.echo("wrote {}".format(path))
    sys.exit(0 if stages.report.ok else EXIT_SEMANTIC)


@main.command()
@click.option("--universe", "universe_path", type=click.Path(), required=True)
@click.option("--formula", "formula_text", required=True)
@click.option("--assume", multiple=True, help="assumption formula (repeat)")
@_mode
@_sample
@_seed
@_budget
@_fmt
def valid(universe_path, formula_text, assume, mode, sample, seed, budget,
          fmt):
    """Test validity over every base and relation set of a universe."""
    u = _load_universe(universe_path)
    f = _parse_formula(formula_text)
    gammas = tuple(_parse_formula(g) for g in assume)
    with _budget_guard():
        ok, witness = _valid_in_space(
            u, f, mode="sample" if sample else "exhaustive",
            count=sample or 20, seed=seed, budget=budget, eval_mode=mode,
            assumptions=gammas)
    if fmt == "json":
        _emit_json({"formula": render(f), "valid": ok,
                    "counterexample": witness})
    elif ok:
        click.echo("valid")
    else:
        click.echo("not valid: base {} under relation set {}"
                   .format(witness["base"], witness["relations"]))
    sys.exit(0 if ok else EXIT_SEMANTIC)


@main.command()
@click.option("--universe", "universe_path", type=click.Path(), required=True)
@click.option("--no-rules", is_flag=True, default=False,
              help="skip the inference rule checks")
@_sample
@_seed
@_budget
@_fmt
def axioms(universe_path, no_rules, sample, seed, budget, fmt):
    """Check every axiom schema (and rule) over a universe's relations."""
    u = _load_universe(universe_path)
    with _budget_guard():
        checks = axiom_suite(
            u, mode="sample" if sample else "exhaustive", count=sample or 20,
            seed=seed, budget=budget, include_rules=not no_rules)
    ok = all(c.ok for c in checks)
    if fmt == "json":
        _emit_json({"ok": ok, "checks": [c.to_json() for c in checks]})
    else:
        for c in checks:
            click.echo("{:<28} {:<6} instances={:<5} {}".format(
                c.name, c.kind, c.instances, "ok" if c.ok else "FAIL"))
            if not c.ok:
                click.echo("  counterexample: {}".format(c.counterexample))
    sys.exit(0 if ok else EXIT_SEMANTIC)


@main.command("translate")
@click.argument("formula_text", metavar="FORMULA")
@_fmt
def translate_cmd(formula_text, fmt):
    """Rewrite announcements away and report the complexity measure."""
    f = _parse_formula(formula_text)
    t = translate(f)
    if fmt == "json":
        _emit_json({"formula": render(f), "translated": render(t),
                    "c": complexity(f)})
    else:
        click.echo(render(t))
        click.echo("c={}".format(complexity(f)))


@main.group()
def scenario():
    """Run the bundled or user-written scenarios."""


@scenario.command("run")
@click.argument("name_or_path")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="write report.json, checks.csv and stage exports here")
@click.option("--png/--no-png", default=True, show_default=True)
@_mode
@_seed
@_budget
@_fmt
def scenario_run(name_or_path, out_dir, png, mode, seed, budget, fmt):
    """Replay a scenario script and compare every expected verdict."""
    try:
        spec = scenarios.load_scenario(name_or_path)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as e:
        raise click.UsageError("bad scenario {!r}: {}"
                               .format(name_or_path, e))
    result = scenarios.run_scenario(spec, mode=mode, out_dir=out_dir,
                                    budget=budget, seed=seed,
                                    render_png=png)
    if fmt == "json":
        _emit_json(result.to_json())
    else:
        for row in result.rows:
            if row["kind"] == "announce":
                click.echo("announce {} at {} (update verified: {})".format(
                    row["formula"], row["at"],
                    "yes" if row["verified"] else "no"))
            else:
                click.echo("check {}: expected {}, got {} -> {}".format(
                    row["name"], row["expected"], row["supported"],
                    "ok" if row["ok"] else "MISMATCH"))
        click.echo("status: {}".format(result.status))
        for path in result.files:
            click.echo("wrote {}".format(path))
    if result.status == "budget-exceeded":
        sys.exit(EXIT_BUDGET)
    sys.exit(0 if result.ok else EXIT_SEMANTIC)


if __name__ == "__main__":
    main()
