"""Boolean queries: unions of conjuncts with safe negated atoms and inequalities.

Concrete syntax::

    query    :=  disjunct { "|" disjunct }
    disjunct :=  "exists" var {"," var} "." literal {"," literal}
    literal  :=  ["!"] NAME "(" term {"," term} ")"  |  term "!=" term
    term     :=  var  |  '"' constant '"'

Variables are bare identifiers starting with a lowercase letter; constants
are always double-quoted inside queries (so no schema catalog is needed to
tell them apart).  Example::

    exists x. I(x,"fish"), !I(x,"meat")

Every disjunct must contain at least one positive atom, and every variable
of a negated atom or inequality must also occur in a positive atom of the
same disjunct (safe negation).  Queries are Boolean: there are no free
variables, and a disjunct's ``exists`` list must cover every variable it
uses.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

from .core import Database, Relation, SignedDatabase, signed_database
from .errors import ArityError, QuerySyntaxError, SafetyError, SemanticError

_RESERVED = {"exists"}


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: str

    def __str__(self) -> str:
        return f'"{self.value}"'


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    """A relational literal, positive or negated."""

    relation: Relation
    terms: tuple[Term, ...]
    negated: bool = False

    def __post_init__(self) -> None:
        if len(self.terms) != self.relation.arity:
            raise ArityError(
                f"atom over {self.relation.name} has {len(self.terms)} terms "
                f"but arity {self.relation.arity}"
            )

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(t.name for t in self.terms if isinstance(t, Var))

    def __str__(self) -> str:
        body = ",".join(str(t) for t in self.terms)
        return f"{'!' if self.negated else ''}{self.relation.name}({body})"


@dataclass(frozen=True)
class Inequality:
    left: Term
    right: Term

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(t.name for t in (self.left, self.right) if isinstance(t, Var))

    def __str__(self) -> str:
        return f"{self.left} != {self.right}"


Literal = Union[Atom, Inequality]


@dataclass(frozen=True)
class Conjunct:
    """One disjunct: declared variables plus a conjunction of literals."""

    variables: tuple[str, ...]
    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        if not self.literals:
            raise SemanticError("a disjunct needs at least one literal")
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise SemanticError(
                f"duplicate variable in 'exists {', '.join(self.variables)}'"
            )
        used = frozenset(v for lit in self.literals for v in lit.variables)
        undeclared = used - declared
        if undeclared:
            raise SemanticError(
                f"variable {sorted(undeclared)[0]} is used but not declared by 'exists'"
            )
        positive_vars = frozenset(
            v for lit in self.literals if isinstance(lit, Atom) and not lit.negated
            for v in lit.variables
        )
        if not any(isinstance(lit, Atom) and not lit.negated for lit in self.literals):
            raise SafetyError("a disjunct needs at least one positive atom")
        for lit in self.literals:
            if isinstance(lit, Atom) and not lit.negated:
                continue
            for v in sorted(lit.variables - positive_vars):
                raise SafetyError(
                    f"unsafe variable {v} in {lit}: it does not occur "
                    f"in any positive atom of the disjunct"
                )

    @cached_property
    def positive_atoms(self) -> tuple[Atom, ...]:
        return tuple(l for l in self.literals if isinstance(l, Atom) and not l.negated)

    @cached_property
    def negated_atoms(self) -> tuple[Atom, ...]:
        return tuple(l for l in self.literals if isinstance(l, Atom) and l.negated)

    @cached_property
    def inequalities(self) -> tuple[Inequality, ...]:
        return tuple(l for l in self.literals if isinstance(l, Inequality))

    @cached_property
    def used_variables(self) -> frozenset[str]:
        """Variables that actually occur in a literal (assignments bind these)."""
        return frozenset(v for lit in self.literals for v in lit.variables)

    def __str__(self) -> str:
        body = ", ".join(str(lit) for lit in self.literals)
        if not self.variables:
            # Ground conjuncts are constructible through the API but have no
            # quantifier prefix in the surface grammar; show the body alone.
            return body
        return f"exists {', '.join(self.variables)}. {body}"


def conjunct(literals: Iterable[Literal], variables: Iterable[str] | None = None) -> Conjunct:
    """Build a disjunct; without ``variables``, declare them in occurrence order."""
    literals = tuple(literals)
    if variables is None:
        seen: dict[str, None] = {}
        for lit in literals:
            terms = (lit.left, lit.right) if isinstance(lit, Inequality) else lit.terms
            for t in terms:
                if isinstance(t, Var):
                    seen.setdefault(t.name)
        variables = seen
    return Conjunct(tuple(variables), literals)


@dataclass(frozen=True)
class Query:
    """A Boolean union of conjuncts."""

    disjuncts: tuple[Conjunct, ...]

    def __post_init__(self) -> None:
        if not self.disjuncts:
            raise SemanticError("a query needs at least one disjunct")
        arities: dict[str, int] = {}
        for rel in self.relations:
            known = arities.setdefault(rel.name, rel.arity)
            if known != rel.arity:
                raise ArityError(
                    f"relation {rel.name} used with arities {known} and {rel.arity}"
                )

    @cached_property
    def relations(self) -> frozenset[Relation]:
        """Every relation symbol occurring in some atom (negated or not)."""
        return frozenset(
            lit.relation
            for cq in self.disjuncts
            for lit in cq.literals
            if isinstance(lit, Atom)
        )

    def __str__(self) -> str:
        return " | ".join(str(cq) for cq in self.disjuncts)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<neq>!=)
      | (?P<bang>!)
      | (?P<pipe>\|)
      | (?P<dot>\.)
      | (?P<comma>,)
      | (?P<lparen>\()
      | (?P<rparen>\))
      | (?P<quoted>"[A-Za-z0-9_]+")
      | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_VAR_RE = re.compile(r"[a-z][A-Za-z0-9_]*$")


class _Tokens:
    def __init__(self, text: str) -> None:
        self.items: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            match = _TOKEN_RE.match(text, pos)
            if match is None:
                raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
            if match.lastgroup != "ws":
                self.items.append((match.lastgroup, match.group(), pos))
            pos = match.end()
        self.index = 0

    def peek(self, kind: str) -> bool:
        return self.index < len(self.items) and self.items[self.index][0] == kind

    def peek2(self, kind: str) -> bool:
        return self.index + 1 < len(self.items) and self.items[self.index + 1][0] == kind

    def take(self, kind: str, what: str) -> tuple[str, int]:
        if not self.peek(kind):
            got, where = ("end of input", None)
            if self.index < len(self.items):
                got, where = f"{self.items[self.index][1]!r}", self.items[self.index][2]
            raise QuerySyntaxError(f"expected {what}, found {got}", where)
        _, value, pos = self.items[self.index]
        self.index += 1
        return value, pos

    @property
    def exhausted(self) -> bool:
        return self.index >= len(self.items)


def _take_variable(tokens: _Tokens) -> str:
    name, pos = tokens.take("ident", "a variable")
    if name in _RESERVED:
        raise QuerySyntaxError(f"{name!r} is a reserved word", pos)
    if not _VAR_RE.match(name):
        raise QuerySyntaxError(
            f"{name!r} cannot be a variable (variables start lowercase)", pos
        )
    return name


def _parse_term(tokens: _Tokens) -> Term:
    if tokens.peek("quoted"):
        value, _ = tokens.take("quoted", "a constant")
        return Const(value[1:-1])
    return Var(_take_variable(tokens))


def _parse_literal(tokens: _Tokens) -> Literal:
    if tokens.peek("bang"):
        tokens.take("bang", "'!'")
        name, _ = tokens.take("ident", "a relation name")
        terms = _parse_term_list(tokens)
        return Atom(Relation(name, len(terms)), terms, negated=True)
    if tokens.peek("ident") and tokens.peek2("lparen"):
        name, _ = tokens.take("ident", "a relation name")
        terms = _parse_term_list(tokens)
        return Atom(Relation(name, len(terms)), terms)
    left = _parse_term(tokens)
    tokens.take("neq", "'!='")
    right = _parse_term(tokens)
    return Inequality(left, right)


def _parse_term_list(tokens: _Tokens) -> tuple[Term, ...]:
    tokens.take("lparen", "'('")
    terms = [_parse_term(tokens)]
    while tokens.peek("comma"):
        tokens.take("comma", "','")
        terms.append(_parse_term(tokens))
    tokens.take("rparen", "')'")
    return tuple(terms)


def _parse_disjunct(tokens: _Tokens) -> Conjunct:
    keyword, pos = tokens.take("ident", "'exists'")
    if keyword != "exists":
        raise QuerySyntaxError(f"expected 'exists', found {keyword!r}", pos)
    variables = [_take_variable(tokens)]
    while tokens.peek("comma"):
        tokens.take("comma", "','")
        variables.append(_take_variable(tokens))
    tokens.take("dot", "'.'")
    literals = [_parse_literal(tokens)]
    while tokens.peek("comma"):
        tokens.take("comma", "','")
        literals.append(_parse_literal(tokens))
    return Conjunct(tuple(variables), tuple(literals))


def parse_query(text: str) -> Query:
    """Parse the concrete syntax above into a validated :class:`Query`."""
    tokens = _Tokens(text)
    disjuncts = [_parse_disjunct(tokens)]
    while tokens.peek("pipe"):
        tokens.take("pipe", "'|'")
        disjuncts.append(_parse_disjunct(tokens))
    if not tokens.exhausted:
        kind, value, pos = tokens.items[tokens.index]
        raise QuerySyntaxError(f"unexpected {value!r} after the query", pos)
    return Query(tuple(disjuncts))


# ---------------------------------------------------------------------------
# The sign transform and the negated-relation set
# ---------------------------------------------------------------------------


def neg_rels(q: Query) -> frozenset[Relation]:
    """The relations that occur in some negated atom of ``q``."""
    return frozenset(
        atom.relation for cq in q.disjuncts for atom in cq.negated_atoms
    )


def sign_transform(q: Query) -> Query:
    """Rewrite ``q`` over the signed schema.

    Every positive atom ``R(t)`` becomes ``+R(t)`` and every negated atom
    ``!R(t)`` becomes a *positive* atom ``-R(t)``; inequalities are kept.
    The result mentions no negated atoms, so its satisfaction is monotone
    in the supplied set of signed facts.
    """
    disjuncts = []
    for cq in q.disjuncts:
        literals: list[Literal] = []
        for lit in cq.literals:
            if isinstance(lit, Inequality):
                literals.append(lit)
                continue
            prefix = "-" if lit.negated else "+"
            renamed = Relation(prefix + lit.relation.name, lit.relation.arity)
            literals.append(Atom(renamed, lit.terms))
        disjuncts.append(Conjunct(cq.variables, tuple(literals)))
    return Query(tuple(disjuncts))


def signed_database_restricted(db: Database, q: Query, *, cap: int | None = None) -> SignedDatabase:
    """The signed completion of ``db`` with negatives only over ``neg_rels(q)``.

    Relations that ``q`` mentions but ``db`` lacks are added to the schema
    with an empty extension, so their whole tuple space over the active
    domain is negative.
    """
    return signed_database(
        db, restrict_to=neg_rels(q), extra_relations=q.relations, cap=cap
    )


# ---------------------------------------------------------------------------
# Structural analysis
# ---------------------------------------------------------------------------


def mergeable_pairs(cq: Conjunct) -> frozenset[tuple[int, int]]:
    """Index pairs (into ``cq.literals``) of positive atoms that can merge.

    Two positive atoms over the same relation merge when, reading their
    variables apart (a variable named ``x`` in one atom is unrelated to an
    ``x`` in the other), the two term tuples unify position-wise with
    constants rigid.  Equivalently: some database contains a fact that is a
    homomorphic image of both atoms.
    """
    indexed = [
        (i, lit)
        for i, lit in enumerate(cq.literals)
        if isinstance(lit, Atom) and not lit.negated
    ]
    pairs = set()
    for (i, a), (j, b) in itertools.combinations(indexed, 2):
        if a.relation == b.relation and _unify_apart(a, b):
            pairs.add((i, j))
    return frozenset(pairs)


def _unify_apart(a: Atom, b: Atom) -> bool:
    parent: dict[object, object] = {}

    def find(node: object) -> object:
        while parent.get(node, node) != node:
            node = parent[node]
        return node

    def union(left: object, right: object) -> bool:
        left, right = find(left), find(right)
        if left == right:
            return True
        if isinstance(left, str) and isinstance(right, str):
            return False  # two distinct constants
        if isinstance(left, str):
            left, right = right, left  # keep constants as class representatives
        parent[left] = right
        return True

    def node_of(term: Term, side: int) -> object:
        return term.value if isinstance(term, Const) else (side, term.name)

    return all(
        union(node_of(s, 0), node_of(t, 1)) for s, t in zip(a.terms, b.terms)
    )


def self_join_width(cq: Conjunct) -> int:
    """Number of distinct terms appearing in atoms that belong to a mergeable pair."""
    merged_indices = {i for pair in mergeable_pairs(cq) for i in pair}
    terms = {
        t for i in merged_indices for t in cq.literals[i].terms  # type: ignore[union-attr]
    }
    return len(terms)


def is_guarded(cq: Conjunct) -> bool:
    """True when each negated atom's variables fit inside one positive atom."""
    return all(
        any(neg.variables <= pos.variables for pos in cq.positive_atoms)
        for neg in cq.negated_atoms
    )


def gaifman_graph(cq: Conjunct) -> dict[str, frozenset[str]]:
    """Adjacency over the disjunct's variables.

    Two variables are adjacent when they occur together in any literal,
    including negated atoms and inequalities.
    """
    adjacency: dict[str, set[str]] = {v: set() for v in cq.used_variables}
    for lit in cq.literals:
        for u, v in itertools.combinations(sorted(lit.variables), 2):
            adjacency[u].add(v)
            adjacency[v].add(u)
    return {v: frozenset(nbrs) for v, nbrs in adjacency.items()}


def has_non_hierarchical_neg_path(cq: Conjunct) -> bool:
    """Detect the structural obstruction to tractable drastic scoring.

    Holds when there are positive atoms ``ax``, ``ay`` whose relations never
    appear negated in the disjunct, variables ``x`` in ``ax`` but not ``ay``
    and ``y`` in ``ay`` but not ``ax``, and a path from ``x`` to ``y`` in the
    variable co-occurrence graph after deleting every other variable of
    ``ax`` and ``ay``.
    """
    graph = gaifman_graph(cq)
    negated_names = {atom.relation.name for atom in cq.negated_atoms}
    candidates = [
        atom for atom in cq.positive_atoms if atom.relation.name not in negated_names
    ]
    for ax, ay in itertools.combinations(candidates, 2):
        only_x = ax.variables - ay.variables
        only_y = ay.variables - ax.variables
        for x in only_x:
            for y in only_y:
                removed = (ax.variables | ay.variables) - {x, y}
                if _connected(graph, x, y, removed):
                    return True
    return False


def _connected(
    graph: dict[str, frozenset[str]], start: str, goal: str, removed: frozenset[str]
) -> bool:
    frontier, seen = [start], {start}
    while frontier:
        node = frontier.pop()
        if node == goal:
            return True
        for nbr in graph[node]:
            if nbr not in seen and nbr not in removed:
                seen.add(nbr)
                frontier.append(nbr)
    return False


def negative_arity(q: Query) -> int:
    """Largest arity among negated relations, or 0 for purely positive queries."""
    return max((rel.arity for rel in neg_rels(q)), default=0)


@dataclass(frozen=True)
class DisjunctAnalysis:
    mergeable_pairs: tuple[tuple[int, int], ...]
    self_join_width: int
    self_join_free_positive: bool
    self_join_free_all: bool
    guarded: bool
    has_non_hierarchical_neg_path: bool


@dataclass(frozen=True)
class QueryAnalysis:
    """Structural summary; the two self-join-freeness fields differ on whether
    negated atoms count toward relation-name repetition."""

    negative_arity: int
    guarded: bool
    self_join_free_positive: bool
    self_join_free_all: bool
    has_non_hierarchical_neg_path: bool
    disjuncts: tuple[DisjunctAnalysis, ...]


def analyze_disjunct(cq: Conjunct) -> DisjunctAnalysis:
    positive_names = [a.relation.name for a in cq.positive_atoms]
    all_names = positive_names + [a.relation.name for a in cq.negated_atoms]
    return DisjunctAnalysis(
        mergeable_pairs=tuple(sorted(mergeable_pairs(cq))),
        self_join_width=self_join_width(cq),
        self_join_free_positive=len(positive_names) == len(set(positive_names)),
        self_join_free_all=len(all_names) == len(set(all_names)),
        guarded=is_guarded(cq),
        has_non_hierarchical_neg_path=has_non_hierarchical_neg_path(cq),
    )


def analyze_query(q: Query) -> QueryAnalysis:
    parts = tuple(analyze_disjunct(cq) for cq in q.disjuncts)
    return QueryAnalysis(
        negative_arity=negative_arity(q),
        guarded=all(p.guarded for p in parts),
        self_join_free_positive=all(p.self_join_free_positive for p in parts),
        self_join_free_all=all(p.self_join_free_all for p in parts),
        has_non_hierarchical_neg_path=any(p.has_non_hierarchical_neg_path for p in parts),
        disjuncts=parts,
    )
