"""Formulas of epistemic logic with public announcements.

Core connectives are atoms, bot, implication, knowledge and announcement.
Negation, conjunction, disjunction and biconditional are accepted by the
parser and kept in the tree as sugar; desugar() eliminates them with the
implication encodings the support semantics is built on:

    ~f       ==  f -> bot
    f & g    ==  (((f -> bot) -> bot) -> (g -> bot)) -> bot
    f | g    ==  (f -> bot) -> g
    f <-> g  ==  (f -> g) & (g -> f)

Grammar (precedence climbing, loosest first; -> and <-> right-associative,
& and | right-associative, prefix operators bind tightest):

    formula  :=  iffish
    iffish   :=  implish ('<->' iffish)?
    implish  :=  orish ('->' implish)?
    orish    :=  andish ('|' orish)?
    andish   :=  unary ('&' andish)?
    unary    :=  '~' unary | 'K' '[' name ']' unary
              |  '[' formula ']' unary | atomish
    atomish  :=  'bot' | name | '(' formula ')'

Names match [A-Za-z0-9_]+ and may start with a digit (deal atoms such as
0_a); whether a name denotes a declared atom is the evaluators' concern,
not the parser's.  'bot' and 'K' are reserved words.

Formula objects are interned: structurally equal trees are the same
object, so == is identity and every node carries a small integer .fid
usable as a memo key.
"""

import itertools
import re

_table = {}
_ids = itertools.count()


class Formula:
    __slots__ = ("fid",)

    def __repr__(self):
        return "<{} {}>".format(type(self).__name__, render(self))

    def __str__(self):
        return render(self)


def _intern(cls, key, fields):
    node = _table.get(key)
    if node is None:
        node = object.__new__(cls)
        for name, value in fields:
            object.__setattr__(node, name, value)
        object.__setattr__(node, "fid", next(_ids))
        _table[key] = node
    return node


class Atom(Formula):
    __slots__ = ("name",)

    def __new__(cls, name):
        return _intern(cls, ("at", name), [("name", name)])


class Bot(Formula):
    __slots__ = ()

    def __new__(cls):
        return _intern(cls, ("bot",), [])


class Implies(Formula):
    __slots__ = ("left", "right")

    def __new__(cls, left, right):
        return _intern(cls, ("im", left.fid, right.fid),
                       [("left", left), ("right", right)])


class Knows(Formula):
    __slots__ = ("agent", "body")

    def __new__(cls, agent, body):
        return _intern(cls, ("kn", agent, body.fid),
                       [("agent", agent), ("body", body)])


class Announce(Formula):
    """[announced] body: body holds after announced is truthfully announced."""

    __slots__ = ("announced", "body")

    def __new__(cls, announced, body):
        return _intern(cls, ("an", announced.fid, body.fid),
                       [("announced", announced), ("body", body)])


class Not(Formula):
    __slots__ = ("body",)

    def __new__(cls, body):
        return _intern(cls, ("no", body.fid), [("body", body)])


class And(Formula):
    __slots__ = ("left", "right")

    def __new__(cls, left, right):
        return _intern(cls, ("nd", left.fid, right.fid),
                       [("left", left), ("right", right)])


class Or(Formula):
    __slots__ = ("left", "right")

    def __new__(cls, left, right):
        return _intern(cls, ("or", left.fid, right.fid),
                       [("left", left), ("right", right)])


class Iff(Formula):
    __slots__ = ("left", "right")

    def __new__(cls, left, right):
        return _intern(cls, ("if", left.fid, right.fid),
                       [("left", left), ("right", right)])


BOT = Bot()


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__("{} (at position {})".format(message, pos))
        self.pos = pos


_TOKEN = re.compile(r"\s*(<->|->|[&|~()\[\]]|[A-Za-z0-9_]+)")
_RESERVED = {"bot", "K"}


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ParseError("unexpected character {!r}".format(rest[0]),
                             len(text) - len(rest))
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    tokens.append((None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, want):
        tok, pos = self.next()
        if tok != want:
            raise ParseError("expected {!r}, got {!r}".format(want, tok), pos)

    def formula(self):
        left = self.implish()
        if self.peek() == "<->":
            self.next()
            return Iff(left, self.formula())
        return left

    def implish(self):
        left = self.orish()
        if self.peek() == "->":
            self.next()
            return Implies(left, self.implish())
        return left

    def orish(self):
        left = self.andish()
        if self.peek() == "|":
            self.next()
            return Or(left, self.orish())
        return left

    def andish(self):
        left = self.unary()
        if self.peek() == "&":
            self.next()
            return And(left, self.andish())
        return left

    def unary(self):
        tok, pos = self.tokens[self.i]
        if tok == "~":
            self.next()
            return Not(self.unary())
        if tok == "K":
            self.next()
            self.expect("[")
            agent, apos = self.next()
            if agent is None or not agent.replace("_", "").isalnum():
                raise ParseError("expected agent name", apos)
            self.expect("]")
            return Knows(agent, self.unary())
        if tok == "[":
            self.next()
            announced = self.formula()
            self.expect("]")
            return Announce(announced, self.unary())
        return self.atomish()

    def atomish(self):
        tok, pos = self.next()
        if tok == "(":
            inner = self.formula()
            self.expect(")")
            return inner
        if tok == "bot":
            return BOT
        if tok is None:
            raise ParseError("unexpected end of input", pos)
        if tok in _RESERVED or not re.fullmatch(r"[A-Za-z0-9_]+", tok):
            raise ParseError("unexpected token {!r}".format(tok), pos)
        return Atom(tok)


def parse(text):
    """Parse concrete syntax into a Formula, keeping sugar nodes."""
    p = _Parser(text)
    node = p.formula()
    tok, pos = p.tokens[p.i]
    if tok is not None:
        raise ParseError("trailing input {!r}".format(tok), pos)
    return node


# -------------------------------------------------------------- rendering

_PREC_IFF, _PREC_IMP, _PREC_OR, _PREC_AND, _PREC_UNARY, _PREC_ATOM = range(6)


def _prec(f):
    if isinstance(f, (Atom, Bot)):
        return _PREC_ATOM
    if isinstance(f, (Not, Knows, Announce)):
        return _PREC_UNARY
    if isinstance(f, And):
        return _PREC_AND
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, Implies):
        return _PREC_IMP
    return _PREC_IFF


def _render(f, floor):
    mine = _prec(f)
    if isinstance(f, Atom):
        s = f.name
    elif isinstance(f, Bot):
        s = "bot"
    elif isinstance(f, Not):
        s = "~" + _render(f.body, _PREC_UNARY)
    elif isinstance(f, Knows):
        s = "K[{}] {}".format(f.agent, _render(f.body, _PREC_UNARY))
    elif isinstance(f, Announce):
        s = "[{}] {}".format(_render(f.announced, _PREC_IFF),
                             _render(f.body, _PREC_UNARY))
    elif isinstance(f, And):
        s = "{} & {}".format(_render(f.left, mine + 1), _render(f.right, mine))
    elif isinstance(f, Or):
        s = "{} | {}".format(_render(f.left, mine + 1), _render(f.right, mine))
    elif isinstance(f, Implies):
        s = "{} -> {}".format(_render(f.left, mine + 1), _render(f.right, mine))
    elif isinstance(f, Iff):
        s = "{} <-> {}".format(_render(f.left, mine + 1), _render(f.right, mine))
    else:
        raise TypeError("not a formula: {!r}".format(f))
    if mine < floor:
        return "(" + s + ")"
    return s


def render(f):
    """Concrete syntax for f with a minimal set of parentheses."""
    return _render(f, _PREC_IFF)


# ------------------------------------------------------------- desugaring

_desugar_memo = {}


def desugar(f):
    """Rewrite f into the five core connectives.  Idempotent."""
    got = _desugar_memo.get(f.fid)
    if got is not None:
        return got
    if isinstance(f, (Atom, Bot)):
        out = f
    elif isinstance(f, Implies):
        out = Implies(desugar(f.left), desugar(f.right))
    elif isinstance(f, Knows):
        out = Knows(f.agent, desugar(f.body))
    elif isinstance(f, Announce):
        out = Announce(desugar(f.announced), desugar(f.body))
    elif isinstance(f, Not):
        out = Implies(desugar(f.body), BOT)
    elif isinstance(f, And):
        out = _conj(desugar(f.left), desugar(f.right))
    elif isinstance(f, Or):
        out = Implies(Implies(desugar(f.left), BOT), desugar(f.right))
    elif isinstance(f, Iff):
        left, right = desugar(f.left), desugar(f.right)
        out = _conj(Implies(left, right), Implies(right, left))
    else:
        raise TypeError("not a formula: {!r}".format(f))
    _desugar_memo[f.fid] = out
    return out


def _conj(f, g):
    """Core encoding of f & g: (((f -> bot) -> bot) -> (g -> bot)) -> bot."""
    return Implies(Implies(Implies(Implies(f, BOT), BOT),
                           Implies(g, BOT)), BOT)


def is_core(f):
    return isinstance(f, (Atom, Bot, Implies, Knows, Announce))


# ------------------------------------------------------------- complexity

_cx_memo = {}


def complexity(f):
    """Termination measure for the announcement-elimination translation.

    Measured on the desugared core: atoms and bot weigh 1, implication is
    1 + max of the sides, knowledge is 1 + body, and an announcement
    multiplies: (2 + weight of announced) * weight of body.
    """
    f = desugar(f)
    got = _cx_memo.get(f.fid)
    if got is not None:
        return got
    if isinstance(f, (Atom, Bot)):
        out = 1
    elif isinstance(f, Implies):
        out = 1 + max(complexity(f.left), complexity(f.right))
    elif isinstance(f, Knows):
        out = 1 + complexity(f.body)
    else:
        out = (2 + complexity(f.announced)) * complexity(f.body)
    _cx_memo[f.fid] = out
    return out


# ------------------------------------------------------------ translation

_tr_memo = {}


def translate(f):
    """Eliminate announcements, yielding an equivalent epistemic formula.

    Rewrites, each strictly decreasing complexity() (asserted):

        [f] p        =>  f -> p          (p an atom)
        [f] bot      =>  f -> bot
        [f] (g -> h) =>  [f] g -> [f] h
        [f] K[a] g   =>  f -> K[a] [f] g
        [f] [g] h    =>  [f & [f] g] h   (& in its core encoding)
    """
    return _translate(desugar(f))


def _translate(f):
    got = _tr_memo.get(f.fid)
    if got is not None:
        return got
    if isinstance(f, (Atom, Bot)):
        out = f
    elif isinstance(f, Implies):
        out = Implies(_translate(f.left), _translate(f.right))
    elif isinstance(f, Knows):
        out = Knows(f.agent, _translate(f.body))
    elif isinstance(f, Announce):
        out = _translate(_announce_step(f))
    else:
        raise TypeError("translate needs a core formula: {!r}".format(f))
    _tr_memo[f.fid] = out
    return out


def _announce_step(f):
    """One announcement rewrite at the root of f, complexity checked."""
    ann, body = f.announced, f.body
    if isinstance(body, (Atom, Bot)):
        out = Implies(ann, body)
    elif isinstance(body, Implies):
        out = Implies(Announce(ann, body.left), Announce(ann, body.right))
    elif isinstance(body, Knows):
        out = Implies(ann, Knows(body.agent, Announce(ann, body.body)))
    else:
        out = Announce(_conj(ann, Announce(ann, body.announced)), body.body)
    assert complexity(out) < complexity(f), (render(f), render(out))
    return out


# ----------------------------------------------------- announcement lists

def compose_delta(announcements):
    """Collapse a sequence of announcements into one formula.

    The empty sequence gives the always-true bot -> bot; a single
    announcement is itself; a longer sequence [f1, f2, ...] becomes
    f1 & [f1](f2 & [f2](...)).
    """
    announcements = list(announcements)
    if not announcements:
        return Implies(BOT, BOT)
    if len(announcements) == 1:
        return announcements[0]
    head = announcements[0]
    return And(head, Announce(head, compose_delta(announcements[1:])))


def atoms_of(f):
    """Set of atom names occurring in f."""
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, Bot):
        return set()
    if isinstance(f, (Not,)):
        return atoms_of(f.body)
    if isinstance(f, Knows):
        return atoms_of(f.body)
    if isinstance(f, Announce):
        return atoms_of(f.announced) | atoms_of(f.body)
    return atoms_of(f.left) | atoms_of(f.right)


def agents_of(f):
    """Set of agent names occurring in f."""
    if isinstance(f, (Atom, Bot)):
        return set()
    if isinstance(f, Not):
        return agents_of(f.body)
    if isinstance(f, Knows):
        return {f.agent} | agents_of(f.body)
    if isinstance(f, Announce):
        return agents_of(f.announced) | agents_of(f.body)
    return agents_of(f.left) | agents_of(f.right)


if __name__ == "__main__":
    for text in ["p -> q -> p",
                 "[~1_a] K[c] (0_a & 1_b & 2_c)",
                 "~K[a] m_a & ~K[b] m_b",
                 "[p] [q] r"]:
        f = parse(text)
        print(text)
        print("  rendered  ", render(f))
        print("  complexity", complexity(f))
        print("  translated", render(translate(f)))
