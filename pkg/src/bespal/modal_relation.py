"""Agent relations over a base lattice and their validity conditions.

A usable relation set is, per agent, an equivalence on the whole lattice
(S5), stored as a list of class bitmaps.  On top of equivalence the
support semantics needs four conditions tying the relation to the
subset order and to consistency:

  (a) an inconsistent base relates to at least one inconsistent base and
      only to inconsistent bases;
  (b) a consistent base relates only to consistent bases;
  (c) if B relates to C then every consistent superset D of B relates to
      some superset of C;
  (d) if B relates to a consistent C then every subset D of B relates to
      some subset of C.

check_modal_conditions verifies all of that and reports minimal
witnesses.  relation_sets enumerates or samples every valid relation
set of a universe; saturate_core_relation grows a relation on the
max-consistent layer downward to a valid relation on the whole lattice.
"""

import itertools
import random
from dataclasses import dataclass, field

from .base_space import submasks

CONDITION_NAMES = ("reflexive", "symmetric", "transitive", "a", "b", "c", "d")


@dataclass
class ConditionReport:
    ok: bool
    failures: list = field(default_factory=list)

    def failing_conditions(self):
        return sorted({f["condition"] for f in self.failures})

    def to_json(self, universe=None):
        failures = []
        for f in self.failures:
            entry = dict(f)
            if universe is not None:
                entry["bases"] = [universe.label(m) for m in f["bases"]]
            failures.append(entry)
        return {"ok": self.ok, "checked": list(CONDITION_NAMES),
                "failures": failures}


class ModalConditionError(ValueError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class AgentRelationSet:
    """Per-agent partitions of the full lattice of one universe."""

    def __init__(self, universe, classes):
        self.universe = universe
        self.classes = {}
        for agent in universe.agents:
            parts = tuple(classes[agent])
            seen = 0
            for part in parts:
                if part == 0 or (part & seen):
                    raise ValueError("classes for {!r} overlap or are empty"
                                     .format(agent))
                seen |= part
            if seen != universe.full:
                raise ValueError("classes for {!r} do not cover the lattice"
                                 .format(agent))
            self.classes[agent] = parts
        self._index = {}

    def row(self, agent, mask):
        """Successor set of a base, as a lattice bitmap."""
        return self.classes[agent][self.class_id(agent, mask)]

    def class_id(self, agent, mask):
        index = self._index.get(agent)
        if index is None:
            index = {}
            for cid, part in enumerate(self.classes[agent]):
                for m in self.universe.iter_bases(part):
                    index[m] = cid
            self._index[agent] = index
        return index[mask]

    def canonical_form(self):
        return {agent: frozenset(parts) for agent, parts in self.classes.items()}

    def __eq__(self, other):
        return (isinstance(other, AgentRelationSet)
                and self.universe is other.universe
                and self.canonical_form() == other.canonical_form())

    def __hash__(self):
        return hash(tuple(sorted((a, tuple(sorted(p)))
                                 for a, p in self.canonical_form().items())))

    def __repr__(self):
        sizes = {a: len(p) for a, p in self.classes.items()}
        return "<AgentRelationSet classes per agent {}>".format(sizes)

    def to_json(self):
        u = self.universe
        edges = {}
        for agent in u.agents:
            pairs = []
            for part in self.classes[agent]:
                members = list(u.iter_bases(part))
                for i, m1 in enumerate(members):
                    for m2 in members[i:]:
                        pairs.append([u.label(m1), u.label(m2)])
                        if m1 != m2:
                            pairs.append([u.label(m2), u.label(m1)])
            edges[agent] = sorted(pairs)
        return {"raw": True, "core_edges": edges}


class RawRelation:
    """Arbitrary per-agent edge sets, for validation and loading."""

    def __init__(self, universe, pairs):
        self.universe = universe
        self.pairs = {a: set(pairs.get(a, ())) for a in universe.agents}
        self.rows = {}
        for agent in universe.agents:
            rows = {}
            for (m1, m2) in self.pairs[agent]:
                rows[m1] = rows.get(m1, 0) | universe.bit(m2)
            self.rows[agent] = rows

    def row(self, agent, mask):
        return self.rows[agent].get(mask, 0)

    def to_relation_set(self):
        """Interpret the edges as a full equivalence, or raise."""
        report = check_modal_conditions(self)
        if not report.ok:
            raise ModalConditionError(
                "relation fails: " + ", ".join(report.failing_conditions()),
                report)
        u = self.universe
        classes = {}
        for agent in u.agents:
            done = 0
            parts = []
            for mask in range(u.n_bases):
                if done >> mask & 1:
                    continue
                part = self.row(agent, mask)
                parts.append(part)
                done |= part
            classes[agent] = parts
        return AgentRelationSet(u, classes)


def identity_relation(universe):
    singletons = [universe.bit(m) for m in range(universe.n_bases)]
    return AgentRelationSet(universe, {a: singletons for a in universe.agents})


def relation_domain(rel, agent=None):
    """Bitmap of bases taking part in at least one edge."""
    if isinstance(rel, AgentRelationSet):
        return rel.universe.full
    agents = [agent] if agent else list(rel.rows)
    out = 0
    for a in agents:
        for mask, row in rel.rows[a].items():
            if row:
                out |= rel.universe.bit(mask) | row
    return out


def rule_union(universe, bitmap):
    """Union of the rule sets of the bases in the bitmap."""
    group_union = 0
    for mask in universe.iter_bases(bitmap):
        group_union |= mask
    return universe.rules_of(group_union)


def reachable_set(rel, mask):
    """Bases reachable from mask through any agent's relation."""
    u = rel.universe
    current = u.bit(mask)
    if isinstance(rel, AgentRelationSet):
        changed = True
        while changed:
            changed = False
            for agent in u.agents:
                for part in rel.classes[agent]:
                    if part & current and part & ~current:
                        current |= part
                        changed = True
        return current
    frontier = [mask]
    while frontier:
        m = frontier.pop()
        for agent in u.agents:
            row = rel.row(agent, m)
            new = row & ~current
            current |= new
            frontier.extend(u.iter_bases(new))
    return current


# ------------------------------------------------------ condition checks

def check_modal_conditions(rel, agent=None):
    """Validate equivalence plus conditions (a)-(d); minimal witnesses."""
    agents = [agent] if agent else list(rel.universe.agents)
    failures = []
    for a in agents:
        if isinstance(rel, AgentRelationSet):
            failures.extend(_check_classes(rel.universe, a, rel.classes[a]))
        else:
            failures.extend(_check_raw(rel, a))
    return ConditionReport(ok=not failures, failures=failures)


def _lowest(bitmap):
    return (bitmap & -bitmap).bit_length() - 1


def _check_classes(u, agent, parts):
    # sup_or(X) marks the bases lying below some member of X (its down
    # closure), sub_or(X) the bases lying above some member (up closure).
    cons = u.closures.consistent
    incons = u.closures.inconsistent
    failures = []
    for part in parts:
        if part & cons and part & incons:
            failures.append({
                "agent": agent, "condition": "b",
                "bases": [_lowest(part & cons), _lowest(part & incons)],
                "detail": "consistent base related to inconsistent base"})
    down = [u.sup_or(part) for part in parts]
    up = [u.sub_or(part) for part in parts]
    for i, x in enumerate(parts):
        for j, y in enumerate(parts):
            # (c): a consistent D above X must offer a superset of every
            # member of X, i.e. X lies below Y wherever such D exists.
            if y & up[i] & cons:
                missing = x & ~down[j]
                if missing:
                    c = _lowest(missing)
                    d = _lowest(y & up[i] & cons)
                    b = _lowest(x & u.sup_or(u.bit(d)))
                    failures.append({
                        "agent": agent, "condition": "c",
                        "bases": [b, c, d],
                        "detail": "superset has no related superset"})
            # (d): a D below consistent X must offer a subset of every
            # member of X.
            if x & cons and y & down[i]:
                missing = x & ~up[j]
                if missing:
                    c = _lowest(missing)
                    d = _lowest(y & down[i])
                    b = _lowest(x & u.sub_or(u.bit(d)))
                    failures.append({
                        "agent": agent, "condition": "d",
                        "bases": [b, c, d],
                        "detail": "subset has no related subset"})
    return failures


def _check_raw(raw, agent):
    u = raw.universe
    cons = u.closures.consistent
    incons = u.closures.inconsistent
    failures = []
    rows = raw.rows[agent]

    for mask in range(u.n_bases):
        if not rows.get(mask, 0) >> mask & 1:
            failures.append({"agent": agent, "condition": "reflexive",
                             "bases": [mask], "detail": "missing loop"})
            break
    for mask in sorted(rows):
        bad = 0
        for m2 in u.iter_bases(rows[mask]):
            if not rows.get(m2, 0) >> mask & 1:
                bad = 1
                failures.append({"agent": agent, "condition": "symmetric",
                                 "bases": [mask, m2],
                                 "detail": "edge without converse"})
                break
        if bad:
            break
    for mask in sorted(rows):
        row = rows[mask]
        bad = 0
        for m2 in u.iter_bases(row):
            extra = rows.get(m2, 0) & ~row
            if extra:
                failures.append({"agent": agent, "condition": "transitive",
                                 "bases": [mask, m2, _lowest(extra)],
                                 "detail": "relation not transitive"})
                bad = 1
                break
        if bad:
            break

    for mask in u.iter_bases(incons):
        row = rows.get(mask, 0)
        if row == 0:
            failures.append({"agent": agent, "condition": "a", "bases": [mask],
                             "detail": "inconsistent base with empty row"})
            break
        if row & cons:
            failures.append({"agent": agent, "condition": "a",
                             "bases": [mask, _lowest(row & cons)],
                             "detail": "inconsistent base related to consistent"})
            break
    for mask in u.iter_bases(cons):
        row = rows.get(mask, 0)
        if row & incons:
            failures.append({"agent": agent, "condition": "b",
                             "bases": [mask, _lowest(row & incons)],
                             "detail": "consistent base related to inconsistent"})
            break

    done_c = done_d = False
    for mask in sorted(rows):
        if done_c and done_d:
            break
        row = rows[mask]
        for m2 in u.iter_bases(row):
            if not done_c:
                above_target = u.sub_or(u.bit(m2))
                for d in u.iter_bases(u.sub_or(u.bit(mask)) & cons):
                    if not rows.get(d, 0) & above_target:
                        failures.append({
                            "agent": agent, "condition": "c",
                            "bases": [mask, m2, d],
                            "detail": "superset has no related superset"})
                        done_c = True
                        break
            if not done_d and cons >> m2 & 1:
                below_target = u.sup_or(u.bit(m2))
                for d in u.iter_bases(u.sup_or(u.bit(mask))):
                    if not rows.get(d, 0) & below_target:
                        failures.append({
                            "agent": agent, "condition": "d",
                            "bases": [mask, m2, d],
                            "detail": "subset has no related subset"})
                        done_d = True
                        break
            if done_c and done_d:
                break
    return failures


# ------------------------------------------------------------ saturation

def saturate_core_relation(universe, core_edges):
    """Grow the given core edges into a valid full relation.

    Every core edge must join two consistent bases.  Conditions (c) and
    (d) say precisely that related bases see the same classes among
    their consistent supersets and among their subsets, so a partition
    is valid iff it is stable under splitting by those two signatures.
    Starting from the core classes (max-consistent bases seeded apart,
    everything else lumped) and refining to stability yields the
    coarsest valid relation extending the core, and refinement never
    separates bases that any valid extension keeps together; if the
    core classes themselves get torn apart, no valid extension exists
    and ModalConditionError is raised.
    """
    u = universe
    maxcon = u.closures.max_consistent
    cons = u.closures.consistent
    cons_list = list(u.iter_bases(cons))
    classes = {}
    for agent in u.agents:
        parent = {}
        for m in u.iter_bases(maxcon):
            parent[m] = m
        for (m1, m2) in core_edges.get(agent, ()):
            for m in (m1, m2):
                if not (cons >> m & 1):
                    raise ModalConditionError(
                        "core edge ({}, {}) touches an inconsistent base"
                        .format(u.label(m1), u.label(m2)),
                        ConditionReport(ok=False, failures=[{
                            "agent": agent, "condition": "b",
                            "bases": [m1, m2],
                            "detail": "inconsistent core endpoint"}]))
                parent.setdefault(m, m)

        def find(m):
            while parent[m] != m:
                parent[m] = parent[parent[m]]
                m = parent[m]
            return m

        for (m1, m2) in core_edges.get(agent, ()):
            parent[find(m1)] = find(m2)

        part_of = {}
        next_id = 0
        roots = {}
        for m in parent:
            root = find(m)
            if root not in roots:
                roots[root] = next_id
                next_id += 1
            part_of[m] = roots[root]
        below_id = next_id
        for m in cons_list:
            if m not in part_of:
                part_of[m] = below_id

        cons = u.closures.consistent
        while True:
            groups = {}
            for m in cons_list:
                up = frozenset(part_of[s]
                               for s in u.enumerate_supersets(m, proper=True)
                               if cons >> s & 1)
                down = frozenset(part_of[s] for s in submasks(m)
                                 if s != m)
                groups.setdefault((part_of[m], up, down), []).append(m)
            if len(groups) == len(set(part_of.values())):
                break
            part_of = {}
            for new_id, members in enumerate(groups.values()):
                for m in members:
                    part_of[m] = new_id

        for m1, m2 in ((a, b) for pairs in core_edges.get(agent, ())
                       for a, b in [pairs]):
            if part_of[m1] != part_of[m2]:
                raise ModalConditionError(
                    "no valid relation keeps {} and {} related for {}"
                    .format(u.label(m1), u.label(m2), agent),
                    ConditionReport(ok=False, failures=[{
                        "agent": agent, "condition": "c",
                        "bases": [m1, m2],
                        "detail": "core edge torn apart by refinement"}]))

        parts_by_id = {}
        for m, pid in part_of.items():
            parts_by_id[pid] = parts_by_id.get(pid, 0) | u.bit(m)
        parts = list(parts_by_id.values())
        if u.closures.inconsistent:
            parts.append(u.closures.inconsistent)
        classes[agent] = parts

    rel = AgentRelationSet(u, classes)
    report = check_modal_conditions(rel)
    if not report.ok:
        raise ModalConditionError(
            "saturated relation fails: " + ", ".join(report.failing_conditions()),
            report)
    return rel


def relation_from_json(universe, doc):
    """Relation JSON: {"core_edges": {agent: [[b1, b2], ...]}, "raw": bool}.

    Base names go through Universe.resolve_base.  With raw false the
    edges live on the max-consistent layer and are saturated; with raw
    true they are the literal full relation and must already be valid.
    """
    edges = {}
    for agent, pairs in doc.get("core_edges", {}).items():
        edges[agent] = [(universe.resolve_base(b1), universe.resolve_base(b2))
                        for (b1, b2) in pairs]
    if doc.get("raw", False):
        closed = {a: set() for a in universe.agents}
        for agent, pairs in edges.items():
            for (m1, m2) in pairs:
                closed[agent].add((m1, m2))
        return RawRelation(universe, closed).to_relation_set()
    return saturate_core_relation(universe, edges)


# --------------------------------------------- enumeration and sampling

class BudgetError(RuntimeError):
    pass


def bell_number(n):
    """Number of partitions of an n-element set."""
    if n == 0:
        return 1
    return _rgs_tail_counts(n - 1, 1)


def _rgs_tail_counts(length, used):
    """Completions of a restricted growth string: `length` digits to go,
    `used` classes already open."""
    key = (length, used)
    got = _RGS_MEMO.get(key)
    if got is None:
        if length == 0:
            got = 1
        else:
            got = used * _rgs_tail_counts(length - 1, used) \
                + _rgs_tail_counts(length - 1, used + 1)
        _RGS_MEMO[key] = got
    return got


_RGS_MEMO = {}


def partition_at_index(items, index):
    """The index-th partition of items, as a list of lists.

    Indexing is a bijection with range(bell_number(len(items))), so a
    uniform index gives a uniform partition.
    """
    n = len(items)
    if not 0 <= index < bell_number(n):
        raise ValueError("partition index out of range")
    if n == 0:
        return []
    blocks = [[items[0]]]
    for i in range(1, n):
        remaining = n - i - 1
        placed = False
        for d in range(len(blocks) + 1):
            width = _rgs_tail_counts(remaining,
                                     len(blocks) + (1 if d == len(blocks) else 0))
            if index < width:
                if d == len(blocks):
                    blocks.append([items[i]])
                else:
                    blocks[d].append(items[i])
                placed = True
                break
            index -= width
        assert placed
    return blocks


def iter_partitions(items):
    """All partitions of items, in restricted-growth-string order."""
    n = len(items)
    for index in range(bell_number(n)):
        yield partition_at_index(items, index)


def _partition_classes(universe, blocks):
    parts = [sum(universe.bit(m) for m in block) for block in blocks]
    if universe.closures.inconsistent:
        parts.append(universe.closures.inconsistent)
    return parts


def _classes_valid(universe, parts):
    return not _check_classes(universe, "_", parts)


def relation_sets(universe, mode="exhaustive", count=20, seed=0, budget=None):
    """Valid relation sets of a universe.

    exhaustive: every per-agent combination of valid partitions of the
    consistent bases (inconsistent bases always one clique).  sample:
    `count` sets drawn by uniform rejection sampling, seeded.
    """
    u = universe
    budget = budget if budget is not None else 10 ** 6
    consistent = list(u.iter_bases(u.closures.consistent))
    n = len(consistent)
    if mode == "exhaustive":
        total = bell_number(n)
        if total > budget:
            raise BudgetError(
                "exhaustive enumeration needs {} partitions, budget {}"
                .format(total, budget))
        valid_parts = []
        for blocks in iter_partitions(consistent):
            parts = _partition_classes(u, blocks)
            if _classes_valid(u, parts):
                valid_parts.append(parts)
        n_sets = len(valid_parts) ** len(u.agents)
        if n_sets > budget:
            raise BudgetError(
                "{} valid partitions give {} relation sets, budget {}"
                .format(len(valid_parts), n_sets, budget))
        out = []
        for choice in itertools.product(valid_parts, repeat=len(u.agents)):
            out.append(AgentRelationSet(
                u, {a: parts for a, parts in zip(u.agents, choice)}))
        return out
    if mode == "sample":
        rng = random.Random(seed)
        out = []
        attempts = 0
        while len(out) < count:
            classes = {}
            for agent in u.agents:
                while True:
                    attempts += 1
                    if attempts > budget:
                        raise BudgetError(
                            "sampling exceeded {} attempts".format(budget))
                    blocks = partition_at_index(
                        consistent, rng.randrange(bell_number(n)))
                    parts = _partition_classes(u, blocks)
                    if _classes_valid(u, parts):
                        classes[agent] = parts
                        break
            out.append(AgentRelationSet(u, classes))
        return out
    raise ValueError("unknown mode {!r}".format(mode))
