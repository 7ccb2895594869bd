"""Possible-worlds models and their announcement-restriction semantics.

Worlds are opaque hashable labels.  An announcement [f] g is evaluated by
restricting the model to the worlds where f holds and evaluating g there;
a knowledge operator K[a] g quantifies over the agent's successor worlds.
Truth of the announced formula at the evaluation world is part of the
announcement clause: [f] g holds wherever f fails.
"""

import json

from .formula import Announce, Atom, Bot, Implies, Knows, desugar


class KripkeModel:
    def __init__(self, worlds, agents, valuation, relations):
        self.worlds = list(worlds)
        self.agents = tuple(agents)
        self.valuation = {w: frozenset(valuation.get(w, ())) for w in self.worlds}
        self.relations = {a: set(relations.get(a, ())) for a in self.agents}
        self._rows = {}
        self._memo = {}
        self._restrictions = {}

    def row(self, agent, world):
        """Successors of world under the agent's relation."""
        key = (agent, world)
        got = self._rows.get(key)
        if got is None:
            got = {v for (w, v) in self.relations[agent] if w == world}
            self._rows[key] = got
        return got

    def __repr__(self):
        return "<KripkeModel {} worlds, {} agents>".format(
            len(self.worlds), len(self.agents))

    # -------------------------------------------------------------- JSON

    @classmethod
    def from_json(cls, doc):
        relations = {a: set(tuple(e) for e in edges)
                     for a, edges in doc.get("relations", {}).items()}
        model = cls(doc["worlds"], doc["agents"], doc.get("valuation", {}),
                    relations)
        if doc.get("s5_closure", False):
            model = s5_closure(model)
        return model

    @classmethod
    def load(cls, path):
        with open(path) as handle:
            return cls.from_json(json.load(handle))

    def to_json(self):
        return {
            "worlds": list(self.worlds),
            "agents": list(self.agents),
            "valuation": {w: sorted(v) for w, v in self.valuation.items()},
            "relations": {a: sorted([list(e) for e in edges])
                          for a, edges in self.relations.items()},
            "s5_closure": False,
        }


def s5_closure(model):
    """Reflexive-symmetric-transitive closure of every agent relation."""
    closed = {}
    for agent in model.agents:
        parent = {w: w for w in model.worlds}

        def find(w):
            while parent[w] != w:
                parent[w] = parent[parent[w]]
                w = parent[w]
            return w

        for (w, v) in model.relations[agent]:
            parent[find(w)] = find(v)
        classes = {}
        for w in model.worlds:
            classes.setdefault(find(w), []).append(w)
        edges = set()
        for members in classes.values():
            for w in members:
                for v in members:
                    edges.add((w, v))
        closed[agent] = edges
    return KripkeModel(model.worlds, model.agents, model.valuation, closed)


def s5_failures(model):
    """Human-readable reflexivity/symmetry/transitivity violations."""
    problems = []
    world_set = set(model.worlds)
    for agent in model.agents:
        edges = model.relations[agent]
        for (w, v) in edges:
            if w not in world_set or v not in world_set:
                problems.append("{}: edge ({}, {}) leaves the world set"
                                .format(agent, w, v))
        for w in model.worlds:
            if (w, w) not in edges:
                problems.append("{}: missing loop at {}".format(agent, w))
        for (w, v) in edges:
            if (v, w) not in edges:
                problems.append("{}: ({}, {}) has no converse".format(agent, w, v))
        for (w, v) in edges:
            for v2 in model.row(agent, v):
                if (w, v2) not in edges:
                    problems.append("{}: ({}, {}) and ({}, {}) but not ({}, {})"
                                    .format(agent, w, v, v, v2, w, v2))
    return problems


def is_s5_model(model):
    return not s5_failures(model)


def eval_formula(model, world, f):
    """Truth of f at world, desugaring first.  Memoized per model."""
    if world not in model.valuation:
        raise ValueError("unknown world {!r}".format(world))
    return _eval(model, world, desugar(f))


def _eval(model, world, f):
    key = (world, f.fid)
    got = model._memo.get(key)
    if got is not None:
        return got
    if isinstance(f, Atom):
        out = f.name in model.valuation[world]
    elif isinstance(f, Bot):
        out = False
    elif isinstance(f, Implies):
        out = not _eval(model, world, f.left) or _eval(model, world, f.right)
    elif isinstance(f, Knows):
        if f.agent not in model.relations:
            raise ValueError("unknown agent {!r}".format(f.agent))
        out = all(_eval(model, v, f.body) for v in model.row(f.agent, world))
    elif isinstance(f, Announce):
        if _eval(model, world, f.announced):
            out = _eval(restrict(model, f.announced), world, f.body)
        else:
            out = True
    else:
        raise TypeError("not a core formula: {!r}".format(f))
    model._memo[key] = out
    return out


def restrict(model, f):
    """The model cut down to the worlds where f holds."""
    f = desugar(f)
    got = model._restrictions.get(f.fid)
    if got is not None:
        return got
    keep = [w for w in model.worlds if _eval(model, w, f)]
    keep_set = set(keep)
    relations = {a: {(w, v) for (w, v) in edges if w in keep_set and v in keep_set}
                 for a, edges in model.relations.items()}
    valuation = {w: model.valuation[w] for w in keep}
    out = KripkeModel(keep, model.agents, valuation, relations)
    model._restrictions[f.fid] = out
    return out
