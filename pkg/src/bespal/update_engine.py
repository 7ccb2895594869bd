"""The announcement update construction over a base lattice.

Announcing f at a base b rebuilds the agent relations in four steps:
restrict to what is reachable from b (stage s), keep only edges whose
endpoints agree about f (s_announced), drop everything no longer
reachable from b (s_star), then wire the remaining bases back in: bases
below the s_star field are classed by which s_star classes sit strictly
above them (t_stage), and the rest of the consistent bases are classed
by which t classes sit strictly below them together with the rules they
carry beyond the t field; inconsistent bases become one clique (r).

The result is verified against the modal relation conditions and an
UpdateVerificationError carries the witnesses if it fails.  Effective
updates pin the relation on pairs touching b's supporting component;
is_effective_update checks that pin.
"""

from dataclasses import dataclass

from .formula import Formula, desugar, render
from .modal_relation import (
    AgentRelationSet, check_modal_conditions, reachable_set, relation_sets,
    rule_union,
)


class Stage:
    """One relation stage: per-agent symmetric rows over a field."""

    def __init__(self, universe, rows, field):
        self.universe = universe
        self.rows = rows
        self.field = field

    def row(self, agent, mask):
        return self.rows[agent].get(mask, 0)

    def edge_set(self, agent):
        """Undirected edges as (smaller mask, larger mask) pairs."""
        u = self.universe
        out = set()
        for mask, row in self.rows[agent].items():
            for m2 in u.iter_bases(row):
                out.add((min(mask, m2), max(mask, m2)))
        return frozenset(out)

    def to_json(self):
        u = self.universe
        return {
            "field": sorted(u.label(m) for m in u.iter_bases(self.field)),
            "edges": {a: sorted(sorted([u.label(m1), u.label(m2)])
                                for (m1, m2) in self.edge_set(a)
                                if m1 != m2)
                      for a in u.agents},
        }


@dataclass
class UpdateStages:
    s: Stage
    s_announced: Stage
    s_star: Stage
    t_stage: Stage
    r: AgentRelationSet
    announced: Formula
    at: int
    report: object = None

    def to_json(self):
        u = self.s.universe
        return {
            "at": u.label(self.at),
            "announced": render(self.announced),
            "verified": bool(self.report.ok) if self.report else None,
            "s": self.s.to_json(),
            "s_announced": self.s_announced.to_json(),
            "s_star": self.s_star.to_json(),
            "t": self.t_stage.to_json(),
            "r": self.r.to_json(),
        }


class UpdateVerificationError(ValueError):
    def __init__(self, message, report, stages=None):
        super().__init__(message)
        self.report = report
        self.stages = stages


def canonical_update(universe, relations, base, formula, evaluator=None,
                     verify=True):
    """The staged announcement update of the relations by formula at base.

    With verify=True (the default) the final relation set must satisfy
    the modal conditions or UpdateVerificationError is raised; with
    verify=False the stages are returned regardless, the condition
    report attached, so failures can be inspected rather than trapped.
    The construction does not guarantee modality on every universe:
    completing the fixed pairs over a deep lattice can force a class
    whose members disagree about which neighbours remain available, and
    no choice of the free pairs repairs that.
    """
    from .support_engine import Evaluator

    u = universe
    ev = evaluator if evaluator is not None else Evaluator(u, relations)
    f = desugar(formula)
    supp = ev.bitmap(f)

    reach = reachable_set(relations, base)
    s_rows = {a: {m: relations.row(a, m) & reach for m in u.iter_bases(reach)}
              for a in u.agents}
    s = Stage(u, s_rows, reach)

    sa_rows = {}
    for a in u.agents:
        rows = {}
        for m in u.iter_bases(reach):
            keep = supp if supp >> m & 1 else ~supp & u.full
            rows[m] = s_rows[a][m] & keep
        sa_rows[a] = rows
    s_announced = Stage(u, sa_rows, reach)

    reach2 = u.bit(base)
    frontier = [base]
    while frontier:
        m = frontier.pop()
        for a in u.agents:
            new = sa_rows[a][m] & ~reach2
            reach2 |= new
            frontier.extend(u.iter_bases(new))
    star_rows = {a: {m: sa_rows[a][m] for m in u.iter_bases(reach2)}
                 for a in u.agents}
    s_star = Stage(u, star_rows, reach2)

    cons = u.closures.consistent
    below = 0
    for m in u.iter_bases(cons & ~reach2):
        for sup in u.enumerate_supersets(m, proper=True):
            if reach2 >> sup & 1:
                below |= u.bit(m)
                break

    t_field = reach2 | below
    t_rows = {}
    star_class_of = {}
    for a in u.agents:
        star_class_of[a] = {}
        next_id = {}
        for m in u.iter_bases(reach2):
            row = star_rows[a][m]
            if row not in next_id:
                next_id[row] = len(next_id)
            star_class_of[a][m] = next_id[row]
        by_signature = {}
        for m in u.iter_bases(below):
            signature = frozenset(
                star_class_of[a][sup]
                for sup in u.enumerate_supersets(m, proper=True)
                if reach2 >> sup & 1)
            by_signature.setdefault(signature, 0)
            by_signature[signature] |= u.bit(m)
        rows = dict(star_rows[a])
        for part in by_signature.values():
            for m in u.iter_bases(part):
                rows[m] = part
        t_rows[a] = rows
    t_stage = Stage(u, t_rows, t_field)

    delta_rules = rule_union(u, t_field)
    rest = cons & ~t_field
    residues = {m: frozenset(u.rules_of(m) - delta_rules)
                for m in u.iter_bases(rest)}
    classes = {}
    for a in u.agents:
        t_class_of = {}
        next_id = {}
        for m in u.iter_bases(t_field):
            row = t_rows[a][m]
            key = ("t", row)
            if key not in next_id:
                next_id[key] = len(next_id)
            t_class_of[m] = next_id[key]
        by_key = {}
        for m in u.iter_bases(rest):
            signature = frozenset(t_class_of[sub] for sub in _strict_submasks(m)
                                  if t_field >> sub & 1)
            key = (signature, residues[m])
            by_key.setdefault(key, 0)
            by_key[key] |= u.bit(m)
        parts = []
        seen_rows = {}
        for m in u.iter_bases(t_field):
            row = t_rows[a][m]
            if row not in seen_rows:
                seen_rows[row] = True
                parts.append(row)
        parts.extend(by_key.values())
        # announcing at an inconsistent base pulls (part of) the
        # inconsistent clique into the field; only the rest is left over
        leftover = u.closures.inconsistent & ~t_field
        if leftover:
            parts.append(leftover)
        classes[a] = parts

    r = AgentRelationSet(u, classes)
    report = check_modal_conditions(r)
    stages = UpdateStages(s=s, s_announced=s_announced, s_star=s_star,
                          t_stage=t_stage, r=r, announced=formula, at=base,
                          report=report)

    if verify and not report.ok:
        raise UpdateVerificationError(
            "updated relation fails modal conditions: {}".format(
                _describe_failures(u, report)),
            report, stages)
    for a in u.agents:
        for m in u.iter_bases(reach2):
            assert r.row(a, m) == star_rows[a][m], (u.label(m), a)
            assert star_rows[a][m] & ~sa_rows[a][m] == 0
            assert sa_rows[a][m] & ~s_rows[a][m] == 0
    return stages


def _strict_submasks(mask):
    sub = (mask - 1) & mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _describe_failures(universe, report):
    bits = []
    for f in report.failures[:4]:
        bits.append("{} fails ({}) at {}".format(
            f["agent"], f["condition"],
            ", ".join(universe.label(m) for m in f["bases"])))
    return "; ".join(bits)


def is_effective_update(universe, original, updated, formula, base,
                        evaluator=None):
    """Does `updated` qualify as an effective update at base by formula?

    The pin covers every pair with at least one endpoint in base's
    component under the agreement-filtered original relation: such a
    pair must be related afterwards exactly when it was related before
    and both ends support the formula.  Pairs not touching the
    component are unconstrained, beyond the whole being a valid
    relation set.  Returns (ok, witness_pair_or_None); when base itself
    refutes the formula its own reflexive pair already breaks the pin,
    so no effective update exists.
    """
    from .support_engine import Evaluator

    u = universe
    ev = evaluator if evaluator is not None else Evaluator(u, original)
    f = desugar(formula)
    supp = ev.bitmap(f)
    if not supp >> base & 1:
        return False, (base, base)
    if not check_modal_conditions(updated).ok:
        return False, None

    comp = u.bit(base)
    frontier = [base]
    while frontier:
        m = frontier.pop()
        for a in u.agents:
            new = original.row(a, m) & supp & ~comp
            comp |= new
            frontier.extend(u.iter_bases(new))

    for a in u.agents:
        for m in u.iter_bases(comp):
            expected = original.row(a, m) & supp
            actual = updated.row(a, m)
            if expected != actual:
                bad = expected ^ actual
                return False, (m, (bad & -bad).bit_length() - 1)
    return True, None


def effective_updates(universe, relations, formula, base, mode="canonical",
                      budget=None, evaluator=None):
    """All effective updates at base by formula, per the chosen mode.

    canonical: the staged construction's result (a one-element list), or
    an empty list when base refutes the formula.  exhaustive: every
    valid relation set of the universe passing is_effective_update.
    """
    from .support_engine import Evaluator

    ev = evaluator if evaluator is not None else Evaluator(universe, relations)
    f = desugar(formula)
    supp = ev.bitmap(f)
    if not supp >> base & 1:
        return []
    if mode == "canonical":
        return [canonical_update(universe, relations, base, f, ev).r]
    if mode == "exhaustive":
        out = []
        for candidate in relation_sets(universe, mode="exhaustive",
                                       budget=budget):
            ok, _ = is_effective_update(universe, relations, candidate, f,
                                        base, ev)
            if ok:
                out.append(candidate)
        return out
    raise ValueError("unknown mode {!r}".format(mode))
