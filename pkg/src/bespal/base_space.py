"""Finite spaces of bases and the subset-lattice bitmap toolkit.

A base is a set of atomic rules.  To keep every quantifier finite, a
Universe declares the raw material once: the atoms, the agents, a block
of fixed rules shared by every base, and up to 20 optional rule groups.
A base is then just a bitmask over the groups; the whole lattice has
2**len(groups) bases and a set of bases fits in one Python int (bit m set
means the base with group mask m is in the set).

The payoff is that "for all supersets" and "for all subsets" become k
shift-and-or passes over the entire lattice at once, which is what makes
the support semantics tractable.
"""

import itertools
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class BaseRule:
    """An atomic rule: derive conclusion once all premises are derived."""

    premises: tuple
    conclusion: str

    def __str__(self):
        if not self.premises:
            return "=> " + self.conclusion
        return ", ".join(self.premises) + " => " + self.conclusion


@dataclass(frozen=True)
class RuleGroup:
    """A named bundle of rules that is present or absent as one unit."""

    name: str
    rules: tuple

    def __str__(self):
        return "{}: {}".format(self.name, "; ".join(str(r) for r in self.rules))


MAX_GROUPS = 20


class Universe:
    """Atoms, agents, fixed rules and optional rule groups of one space."""

    def __init__(self, atoms, agents, fixed_rules=(), groups=(), named_bases=None):
        self.atoms = tuple(atoms)
        self.agents = tuple(agents)
        self.fixed_rules = tuple(fixed_rules)
        self.groups = tuple(groups)
        if len(self.groups) > MAX_GROUPS:
            raise ValueError("too many rule groups: {} > {}".format(
                len(self.groups), MAX_GROUPS))
        if len(set(g.name for g in self.groups)) != len(self.groups):
            raise ValueError("duplicate group names")
        known = set(self.atoms)
        for rule in self.fixed_rules + tuple(r for g in self.groups for r in g.rules):
            for atom in rule.premises + (rule.conclusion,):
                if atom not in known:
                    raise ValueError("rule mentions undeclared atom {!r}".format(atom))
        self.k = len(self.groups)
        self.n_bases = 1 << self.k
        self.full = (1 << self.n_bases) - 1
        self._group_index = {g.name: i for i, g in enumerate(self.groups)}
        self.named_bases = dict(named_bases or {})
        for name, mask in self.named_bases.items():
            if not 0 <= mask < self.n_bases:
                raise ValueError("named base {!r} out of range".format(name))
        # Shift masks for the lattice transforms: _above[i] selects the
        # positions whose group bit i is clear, _below[i] those where it
        # is set.
        self._above = []
        for i in range(self.k):
            step = 1 << i
            block = (1 << step) - 1
            period = step * 2
            mask = 0
            for start in range(0, self.n_bases, period):
                mask |= block << start
            self._above.append(mask)
        self._below = [m << (1 << i) for i, m in enumerate(self._above)]
        self._closures = None

    # ------------------------------------------------------------ naming

    def mask_of(self, group_names):
        mask = 0
        for name in group_names:
            try:
                mask |= 1 << self._group_index[name]
            except KeyError:
                raise ValueError("unknown group {!r}".format(name)) from None
        return mask

    def resolve_base(self, text):
        """A base from CLI text: a declared name, '{}', or 'g1+g2'."""
        if text in self.named_bases:
            return self.named_bases[text]
        if text in ("{}", ""):
            return 0
        return self.mask_of(text.split("+"))

    def label(self, mask):
        for name, named in self.named_bases.items():
            if named == mask:
                return name
        if mask == 0:
            return "{}"
        return "+".join(g.name for i, g in enumerate(self.groups) if mask >> i & 1)

    def group_names(self, mask):
        return [g.name for i, g in enumerate(self.groups) if mask >> i & 1]

    def rules_of(self, mask):
        """All rules of the base, fixed block included, as a frozenset."""
        rules = set(self.fixed_rules)
        for i in range(self.k):
            if mask >> i & 1:
                rules.update(self.groups[i].rules)
        return frozenset(rules)

    # --------------------------------------------------- lattice bitmaps

    def bit(self, mask):
        return 1 << mask

    def iter_bases(self, bitmap):
        """Indices of the bases in a set-of-bases bitmap, ascending."""
        while bitmap:
            low = bitmap & -bitmap
            yield low.bit_length() - 1
            bitmap ^= low

    def sup_or(self, bitmap):
        """bit m set iff some superset of m (m included) is in the input."""
        for i in range(self.k):
            bitmap |= (bitmap >> (1 << i)) & self._above[i]
        return bitmap

    def sup_and(self, bitmap):
        """bit m set iff every superset of m (m included) is in the input."""
        return self.sup_or(~bitmap & self.full) ^ self.full

    def sub_or(self, bitmap):
        """bit m set iff some subset of m (m included) is in the input."""
        for i in range(self.k):
            bitmap |= (bitmap << (1 << i)) & self._below[i]
        return bitmap

    def sub_and(self, bitmap):
        """bit m set iff every subset of m (m included) is in the input."""
        return self.sub_or(~bitmap & self.full) ^ self.full

    # ---------------------------------------------------------- closures

    @property
    def closures(self):
        if self._closures is None:
            self._closures = ClosureCache(self)
        return self._closures

    def closure(self, mask):
        return self.closures.closure(mask)

    def is_consistent(self, mask):
        return bool(self.closures.consistent >> mask & 1)

    def is_max_consistent(self, mask):
        return bool(self.closures.max_consistent >> mask & 1)

    def enumerate_supersets(self, mask, proper=False):
        """All supersets of mask in the lattice, ascending by value."""
        free = (self.n_bases - 1) ^ mask
        sub = 0
        while True:
            if sub or not proper:
                yield mask | sub
            if sub == free:
                return
            sub = (sub - free) & free

    # -------------------------------------------------------------- JSON

    @classmethod
    def from_json(cls, doc):
        def rule(entry):
            return BaseRule(tuple(entry["premises"]), entry["conclusion"])

        groups = tuple(RuleGroup(g["name"], tuple(rule(r) for r in g["rules"]))
                       for g in doc.get("groups", []))
        u = cls(atoms=doc["atoms"], agents=doc["agents"],
                fixed_rules=tuple(rule(r) for r in doc.get("fixed_rules", [])),
                groups=groups)
        for name, group_names in doc.get("named_bases", {}).items():
            u.named_bases[name] = u.mask_of(group_names)
        return u

    @classmethod
    def load(cls, path):
        with open(path) as handle:
            return cls.from_json(json.load(handle))

    def to_json(self):
        def rule(r):
            return {"premises": list(r.premises), "conclusion": r.conclusion}

        return {
            "atoms": list(self.atoms),
            "agents": list(self.agents),
            "fixed_rules": [rule(r) for r in self.fixed_rules],
            "groups": [{"name": g.name, "rules": [rule(r) for r in g.rules]}
                       for g in self.groups],
            "named_bases": {name: self.group_names(mask)
                            for name, mask in self.named_bases.items()},
        }


class ClosureCache:
    """Derivable atoms of every base in a universe, plus derived bitmaps.

    Closure is computed by premise counting: each rule keeps a count of
    premises not yet derived and fires when the count hits zero.
    """

    def __init__(self, universe):
        self.universe = universe
        u = universe
        atom_index = {a: i for i, a in enumerate(u.atoms)}
        n_atoms = len(u.atoms)
        all_atoms = (1 << n_atoms) - 1

        group_rules = [[(tuple(atom_index[p] for p in r.premises),
                         atom_index[r.conclusion]) for r in g.rules]
                       for g in u.groups]
        fixed = [(tuple(atom_index[p] for p in r.premises), atom_index[r.conclusion])
                 for r in u.fixed_rules]

        self._closed = []
        consistent = 0
        for mask in range(u.n_bases):
            rules = list(fixed)
            for i in range(u.k):
                if mask >> i & 1:
                    rules.extend(group_rules[i])
            derived = self._chase(rules, n_atoms)
            self._closed.append(derived)
            if derived != all_atoms:
                consistent |= 1 << mask

        self.consistent = consistent
        self.inconsistent = ~consistent & u.full
        # Consistency is downward closed, so maximality only needs the
        # immediate successors to fail.
        maxcon = consistent
        for i in range(u.k):
            step = 1 << i
            grown_bad = (self.inconsistent >> step) & u._above[i]
            maxcon &= grown_bad | u._below[i]
        self.max_consistent = maxcon

        self._atom_bitmaps = {}
        for atom, idx in atom_index.items():
            bm = 0
            for mask in range(u.n_bases):
                if self._closed[mask] >> idx & 1:
                    bm |= 1 << mask
            self._atom_bitmaps[atom] = bm
        self._atom_index = atom_index

    @staticmethod
    def _chase(rules, n_atoms):
        derived = 0
        counts = []
        waiting = [[] for _ in range(n_atoms)]
        queue = []
        for ridx, (premises, conclusion) in enumerate(rules):
            counts.append(len(premises))
            if not premises:
                queue.append(conclusion)
            for p in set(premises):
                waiting[p].append((ridx, premises.count(p)))
        while queue:
            atom = queue.pop()
            if derived >> atom & 1:
                continue
            derived |= 1 << atom
            for ridx, times in waiting[atom]:
                counts[ridx] -= times
                if counts[ridx] == 0:
                    conclusion = rules[ridx][1]
                    if not derived >> conclusion & 1:
                        queue.append(conclusion)
        return derived

    def closure(self, mask):
        """Atoms derivable from the base, as a frozenset of names."""
        bits = self._closed[mask]
        return frozenset(a for a, i in self._atom_index.items() if bits >> i & 1)

    def atom_bitmap(self, atom):
        """Bases whose closure contains the atom, as a lattice bitmap."""
        try:
            return self._atom_bitmaps[atom]
        except KeyError:
            raise ValueError("undeclared atom {!r}".format(atom)) from None


def submasks(mask):
    """All submasks of an int mask, descending, mask itself first."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask
