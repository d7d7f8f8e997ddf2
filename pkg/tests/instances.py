"""Worked instances shared across test modules.

Each is small enough to re-derive by hand; several of them exist because
they separate two support semantics that agree on simpler inputs.
"""

from __future__ import annotations

from negshapley.core import Database, SignedFact, database, fact, negative, positive
from negshapley.query import Query, parse_query

# Five recipes, two restaurants.  The running example everywhere.
RECIPE_DB = database(
    [
        fact("I", "mp", "wine"),
        fact("I", "mp", "meat"),
        fact("I", "mp", "fish"),
        fact("I", "mm", "wine"),
        fact("I", "mm", "fish"),
    ]
)

# "some recipe has fish but no meat"
Q_FISH = parse_query('exists x. I(x,"fish"), !I(x,"meat")')

# Two-disjunct menu query whose drastic scores cancel exactly for I(mp,wine).
Q2 = parse_query(
    'exists x. I(x,"meat"), I(x,"wine") | exists x. I(x,"fish"), !I(x,"wine")'
)

# Directed graph with a 2-cycle and a self-loop; the inequality keeps the
# self-loop from matching trivially.  Nine signed facts, two minimal signed
# supports that overlap in exactly one member.
TRIANGLE_DB = database(
    [fact("E", "a", "b"), fact("E", "b", "a"), fact("E", "b", "c"), fact("E", "c", "c")]
)
Q_TRIANGLE = parse_query("exists x, y, z. E(x,y), E(y,z), !E(z,x), x != z")

TRIANGLE_S1 = frozenset(
    {
        positive(fact("E", "a", "b")),
        positive(fact("E", "b", "c")),
        negative(fact("E", "c", "a")),
    }
)
TRIANGLE_S2 = frozenset(
    {
        positive(fact("E", "b", "c")),
        positive(fact("E", "c", "c")),
        negative(fact("E", "c", "b")),
    }
)

# A path with a satisfying match only at its far end.  Under bounded-domain
# entailment an extra, larger support appears; under plain signed semantics
# it does not.
Q_CHAIN = parse_query("exists x, y. A(x), R(x,y), !A(y)")
ENTAIL_DB = database(
    [fact("A", "b"), fact("R", "b", "c"), fact("A", "c"), fact("R", "c", "d")]
)
ENTAIL_MINIMAL = frozenset(
    {positive(fact("A", "c")), positive(fact("R", "c", "d")), negative(fact("A", "d"))}
)
ENTAIL_EXTRA = frozenset(
    {
        positive(fact("A", "b")),
        positive(fact("R", "b", "c")),
        positive(fact("R", "c", "d")),
        negative(fact("A", "d")),
    }
)

# {A(c), C(c)} is a minimal within-database-monotone support here but not a
# positive support: with B(c) frozen in the context the first disjunct is
# blocked, and the second needs B(c) itself inside the subset.
Q_TWO_BRANCH = parse_query("exists x. A(x), !B(x) | exists x. B(x), C(x)")
ABC_DB = database([fact("A", "c"), fact("B", "c"), fact("C", "c")])

# Ternary self-join: the witnessing assignments of subsets and of the full
# database disagree, splitting D-monotone from positive supports.
Q_TERNARY = parse_query("exists x, y, z, u. R(x,y,y), R(y,z,u), !R(u,x,x)")
TERNARY_DB = database(
    [fact("R", "a", "b", "b"), fact("R", "b", "c", "d"), fact("R", "d", "a", "a")]
)

# R(a,b) is signed-relevant (as +R(a,b)) yet positive-irrelevant: the only
# minimal positive support is {R(a,c)}.
Q_WITNESS = parse_query("exists x, y, z. R(x,y), R(x,z), !A(y), !B(z)")
WITNESS_DB = database([fact("R", "a", "b"), fact("R", "a", "c"), fact("B", "b")])


def entailment_chain(n: int) -> tuple[Database, frozenset[SignedFact], list[str]]:
    """Path database of length n (no A at the last node), its unbounded-size
    entailment support, and the active domain."""
    facts = [fact("A", f"c{i}") for i in range(n)]
    facts += [fact("R", f"c{i}", f"c{i + 1}") for i in range(n)]
    support = {positive(fact("A", "c0")), negative(fact("A", f"c{n}"))}
    support |= {positive(fact("R", f"c{i}", f"c{i + 1}")) for i in range(n)}
    return database(facts), frozenset(support), [f"c{i}" for i in range(n + 1)]


Q_MONOTONE_CHAIN = parse_query(
    "exists x, y. A(x), R(x,y), !A(y) | exists x. A(x), B(x)"
)


def monotone_chain(n: int) -> Database:
    """Fully-labelled path with a B-flag at the end; its minimal
    within-database-monotone supports grow with n."""
    facts = [fact("A", f"c{i}") for i in range(n + 1)]
    facts += [fact("R", f"c{i}", f"c{i + 1}") for i in range(n)]
    facts.append(fact("B", f"c{n}"))
    return database(facts)
