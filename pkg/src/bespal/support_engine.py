"""Support semantics over a base universe with agent relations.

The Evaluator computes, for a core formula and a history of prior
announcements, the set of bases supporting it, as one bitmap over the
whole lattice.  Clauses:

    atom p     bases whose closure contains p
    bot        inconsistent bases
    f -> g     every superset supporting f supports g
    K[a] f     with no history: every relation successor supports f;
               with history d: every superset C supporting the composed
               announcement of d has, in each update of the relations by
               that announcement at C, only successors supporting f
               under the same history
    [f] g      every superset supporting f (under the history) supports
               g under the history extended by f

Updates in the K clause follow the evaluator's mode: "canonical" uses
the staged construction, where the updated successor row at a
supporting base C is its original row cut to the announcement's
supporting set, so no stages are built; "exhaustive" enumerates every
valid relation set qualifying as an effective update (tiny universes
only, budget guarded).

Assumption contexts enter only at the top level: supports() with
assumptions asks that every superset of the base supporting all of them
supports the formula.
"""

from dataclasses import dataclass

from .formula import (
    And, Announce, Atom, BOT, Bot, Iff, Implies, Knows, Not, Or,
    compose_delta, desugar, render, translate,
)
from .modal_relation import relation_sets


class Evaluator:
    """Bitmap-valued support evaluation against one relation set."""

    def __init__(self, universe, relations, mode="canonical", budget=None):
        if mode not in ("canonical", "exhaustive"):
            raise ValueError("unknown mode {!r}".format(mode))
        self.universe = universe
        self.relations = relations
        self.mode = mode
        self.budget = budget
        self._memo = {}

    def bitmap(self, f, delta=()):
        """Bases supporting f after the announcements in delta."""
        f = desugar(f)
        delta = tuple(desugar(d) for d in delta)
        key = (tuple(d.fid for d in delta), f.fid)
        got = self._memo.get(key)
        if got is None:
            got = self._eval(f, delta)
            self._memo[key] = got
        return got

    def _eval(self, f, delta):
        u = self.universe
        if isinstance(f, Atom):
            return u.closures.atom_bitmap(f.name)
        if isinstance(f, Bot):
            return u.closures.inconsistent
        if isinstance(f, Implies):
            left = self.bitmap(f.left, delta)
            right = self.bitmap(f.right, delta)
            return u.sup_and((~left & u.full) | right)
        if isinstance(f, Announce):
            ann = self.bitmap(f.announced, delta)
            body = self.bitmap(f.body, delta + (f.announced,))
            return u.sup_and((~ann & u.full) | body)
        if isinstance(f, Knows):
            return self._eval_knows(f, delta)
        raise TypeError("not a core formula: {!r}".format(f))

    def _eval_knows(self, f, delta):
        u = self.universe
        body = self.bitmap(f.body, delta)
        if not delta:
            ok = 0
            for part in self.relations.classes[f.agent]:
                if part & ~body == 0:
                    ok |= part
            return ok
        announced = compose_delta(delta)
        supp = self.bitmap(announced)
        if self.mode == "canonical":
            ok = ~supp & u.full
            for part in self.relations.classes[f.agent]:
                if part & supp & ~body == 0:
                    ok |= part
            return u.sup_and(ok)
        from .update_engine import effective_updates
        ok = ~supp & u.full
        for m in u.iter_bases(supp):
            successors = 0
            for updated in effective_updates(u, self.relations, announced, m,
                                             mode="exhaustive",
                                             budget=self.budget,
                                             evaluator=self):
                successors |= updated.row(f.agent, m)
            if successors & ~body == 0:
                ok |= u.bit(m)
        return u.sup_and(ok)


@dataclass
class Judgement:
    holds: bool
    base: int
    formula: object
    assumptions: tuple
    delta: tuple
    mode: str
    bitmap: int

    def counterexample(self, universe):
        """Label of a base where the judgement's bitmap fails, if any."""
        missing = ~self.bitmap & universe.full
        if missing == 0:
            return None
        return universe.label((missing & -missing).bit_length() - 1)

    def to_json(self, universe):
        return {
            "base": universe.label(self.base),
            "formula": render(self.formula),
            "assumptions": [render(g) for g in self.assumptions],
            "delta": [render(d) for d in self.delta],
            "mode": self.mode,
            "holds": self.holds,
            "supporting_count": self.bitmap.bit_count(),
        }


def supports(universe, relations, base, formula, assumptions=(), delta=(),
             mode="canonical", budget=None, evaluator=None):
    """Judge whether the base supports the formula.

    assumptions quantify at the top level only: every superset of the
    base supporting all of them (under delta) must support the formula
    (under delta).  delta is the history of prior announcements.
    """
    ev = evaluator if evaluator is not None else Evaluator(
        universe, relations, mode=mode, budget=budget)
    fbm = ev.bitmap(formula, delta)
    if assumptions:
        gam = universe.full
        for g in assumptions:
            gam &= ev.bitmap(g, delta)
        result = universe.sup_and((~gam & universe.full) | fbm)
    else:
        result = fbm
    return Judgement(holds=bool(result >> base & 1), base=base,
                     formula=formula, assumptions=tuple(assumptions),
                     delta=tuple(delta), mode=ev.mode, bitmap=result)


def valid_for_relations(universe, relations, formula, assumptions=(),
                        delta=(), mode="canonical", budget=None,
                        evaluator=None):
    """True when every base supports the formula under this relation set."""
    j = supports(universe, relations, 0, formula, assumptions, delta,
                 mode=mode, budget=budget, evaluator=evaluator)
    return j.bitmap == universe.full


def valid_in_space(universe, formula, relations=None, mode="exhaustive",
                   count=20, seed=0, budget=None, eval_mode="canonical",
                   assumptions=()):
    """Validity over every base and every relation set of the universe.

    relations: explicit list of relation sets to quantify over; when
    omitted they come from relation_sets(universe, mode) (exhaustive
    enumeration or seeded sampling).  Returns (valid, counterexample)
    with counterexample = {"base": label, "relations": index} or None.
    """
    if relations is None:
        relations = relation_sets(universe, mode=mode, count=count,
                                  seed=seed, budget=budget)
    for i, rs in enumerate(relations):
        j = supports(universe, rs, 0, formula, assumptions,
                     mode=eval_mode, budget=budget)
        if j.bitmap != universe.full:
            return False, {"base": j.counterexample(universe), "relations": i}
    return True, None


# ------------------------------------------------------------ axiom suite

@dataclass
class AxiomCheck:
    name: str
    kind: str
    instances: int
    ok: bool
    counterexample: dict | None

    def to_json(self):
        return {"name": self.name, "kind": self.kind,
                "instances": self.instances, "ok": self.ok,
                "counterexample": self.counterexample}


def instance_pool(universe, size=12):
    """Small formula pool used to instantiate axiom schemas."""
    atoms = [Atom(n) for n in list(universe.atoms)[:3]]
    agents = list(universe.agents)
    pool = [Implies(BOT, BOT)] + atoms + [BOT]
    if len(atoms) >= 2:
        p, q = atoms[0], atoms[1]
        pool.append(Not(p))
        pool.append(Or(p, Not(p)))
        pool.append(Implies(p, q))
        pool.append(Knows(agents[0], p))
        pool.append(Announce(p, q))
        if len(agents) > 1:
            pool.append(Knows(agents[1], Not(q)))
    seen = set()
    out = []
    for f in pool:
        if f.fid not in seen:
            seen.add(f.fid)
            out.append(f)
    return out[:size]


_AXIOMS = [
    ("implication-weakening", 2, False,
     lambda a, f, g: Implies(f, Implies(g, f))),
    ("implication-distribution", 3, False,
     lambda a, f, g, h: Implies(Implies(f, Implies(g, h)),
                                Implies(Implies(f, g), Implies(f, h)))),
    ("contraposition", 2, False,
     lambda a, f, g: Implies(Implies(Not(f), Not(g)), Implies(g, f))),
    ("knowledge-distribution", 2, True,
     lambda a, f, g: Implies(Knows(a, Implies(f, g)),
                             Implies(Knows(a, f), Knows(a, g)))),
    ("knowledge-truth", 1, True, lambda a, f: Implies(Knows(a, f), f)),
    ("positive-introspection", 1, True,
     lambda a, f: Implies(Knows(a, f), Knows(a, Knows(a, f)))),
    ("negative-introspection", 1, True,
     lambda a, f: Implies(Not(Knows(a, f)), Knows(a, Not(Knows(a, f))))),
    ("atomic-permanence", 2, False,
     lambda a, f, p: Iff(Announce(f, p), Implies(f, p))),
    ("announcement-bottom", 1, False,
     lambda a, f: Iff(Announce(f, BOT), Implies(f, BOT))),
    ("announcement-implication", 3, False,
     lambda a, f, g, h: Iff(Announce(f, Implies(g, h)),
                            Implies(Announce(f, g), Announce(f, h)))),
    ("announcement-knowledge", 2, True,
     lambda a, f, g: Iff(Announce(f, Knows(a, g)),
                         Implies(f, Knows(a, Announce(f, g))))),
    ("announcement-composition", 3, False,
     lambda a, f, g, h: Iff(Announce(f, Announce(g, h)),
                            Announce(And(f, Announce(f, g)), h))),
]


def axiom_suite(universe, relations=None, mode="exhaustive", count=20,
                seed=0, budget=None, pool=None, include_rules=True):
    """Check every axiom schema (and inference rule) over relation sets.

    relations: explicit list of relation sets, or None to take them
    from relation_sets(universe, mode).  Schemas are instantiated from
    the pool, deduplicating instances whose component bitmaps coincide
    under the evaluator at hand.  Rules are checked as validity
    preservation: whenever the premises come out valid for a relation
    set, so must the conclusion.
    """
    if relations is None:
        relations = relation_sets(universe, mode=mode, count=count,
                                  seed=seed, budget=budget)
    else:
        relations = list(relations)
    if pool is None:
        pool = instance_pool(universe)
    evaluators = [Evaluator(universe, rel) for rel in relations]
    checks = []

    for name, arity, needs_agent, build in _AXIOMS:
        agents = list(universe.agents) if needs_agent else [None]
        instances = 0
        bad = None
        for i, ev in enumerate(evaluators):
            seen = set()
            for agent in agents:
                for metas in _tuples(pool, arity):
                    if name == "atomic-permanence" and \
                            not isinstance(metas[1], Atom):
                        continue
                    key = (agent,) + tuple(ev.bitmap(m) for m in metas)
                    if key in seen:
                        continue
                    seen.add(key)
                    inst = build(agent, *metas)
                    instances += 1
                    bm = ev.bitmap(inst)
                    if bm != universe.full and bad is None:
                        missing = ~bm & universe.full
                        bad = {"relations": i, "instance": render(inst),
                               "base": universe.label(
                                   (missing & -missing).bit_length() - 1)}
            if bad is not None:
                break
        checks.append(AxiomCheck(name, "axiom", instances, bad is None, bad))

    if include_rules:
        checks.extend(_rule_checks(universe, evaluators, pool))
    return checks


def _tuples(pool, arity):
    if arity == 1:
        for f in pool:
            yield (f,)
    elif arity == 2:
        for f in pool:
            for g in pool:
                yield (f, g)
    else:
        for f in pool:
            for g in pool:
                for h in pool:
                    yield (f, g, h)


def _rule_checks(universe, evaluators, pool):
    full = universe.full
    out = []

    instances = 0
    bad = None
    for i, ev in enumerate(evaluators):
        for f in pool:
            if ev.bitmap(f) != full:
                continue
            for g in pool:
                if ev.bitmap(Implies(f, g)) != full:
                    continue
                instances += 1
                if ev.bitmap(g) != full and bad is None:
                    bad = {"relations": i,
                           "instance": "{} with {}".format(
                               render(g), render(Implies(f, g)))}
    out.append(AxiomCheck("modus-ponens", "rule", instances, bad is None, bad))

    instances = 0
    bad = None
    for i, ev in enumerate(evaluators):
        for f in pool:
            if ev.bitmap(f) != full:
                continue
            for agent in universe.agents:
                instances += 1
                if ev.bitmap(Knows(agent, f)) != full and bad is None:
                    bad = {"relations": i, "instance": render(Knows(agent, f))}
    out.append(AxiomCheck("knowledge-generalization", "rule", instances,
                          bad is None, bad))

    instances = 0
    bad = None
    for i, ev in enumerate(evaluators):
        for g in pool:
            if ev.bitmap(g) != full:
                continue
            for f in pool:
                instances += 1
                if ev.bitmap(Announce(f, g)) != full and bad is None:
                    bad = {"relations": i, "instance": render(Announce(f, g))}
    out.append(AxiomCheck("announcement-generalization", "rule", instances,
                          bad is None, bad))
    return out


# -------------------------------------------- announcement-free translation

def translation_crosscheck(universe, formulas, relations=None,
                           mode="exhaustive", count=20, seed=0,
                           budget=None, eval_mode="canonical"):
    """Compare each formula's support set with its translation's.

    Runs over every relation set (explicit list, or generated from the
    universe per mode).  Returns (all_ok, rows); a row records the
    formula, its translation and, on disagreement, the relation set
    index and a base label where the two sets differ.
    """
    if relations is None:
        relations = relation_sets(universe, mode=mode, count=count,
                                  seed=seed, budget=budget)
    evaluators = [Evaluator(universe, rel, mode=eval_mode, budget=budget)
                  for rel in relations]
    rows = []
    all_ok = True
    for f in formulas:
        t = translate(f)
        row = {"formula": render(f), "translated": render(t), "ok": True}
        for i, ev in enumerate(evaluators):
            left = ev.bitmap(f)
            right = ev.bitmap(t)
            if left != right:
                diff = left ^ right
                row["ok"] = False
                row["relations"] = i
                row["base"] = universe.label(
                    (diff & -diff).bit_length() - 1)
                all_ok = False
                break
        rows.append(row)
    return all_ok, rows
