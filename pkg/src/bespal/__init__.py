"""Dual-semantics toolkit for epistemic logic with public announcements.

Two interchangeable ways to evaluate the same formula language:

- kripke: possible-worlds models, announcement as model restriction;
- base_space / modal_relation / update_engine / support_engine: a
  proof-theoretic reading where worlds are bases (sets of atomic rules)
  and announcement rebuilds the epistemic relations in four stages.

scenarios bundles the worked examples (card deal, muddy children) and
cli exposes everything as the `bespal` command.
"""

from .formula import (
    Announce, And, Atom, BOT, Bot, Formula, Iff, Implies, Knows, Not, Or,
    ParseError, complexity, compose_delta, desugar, parse, render, translate,
)

__all__ = [
    "Announce", "And", "Atom", "BOT", "Bot", "Formula", "Iff", "Implies",
    "Knows", "Not", "Or", "ParseError", "complexity", "compose_delta",
    "desugar", "parse", "render", "translate",
]

__version__ = "0.1.0"
