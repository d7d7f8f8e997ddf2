"""Relational basics: schemas, facts, databases, and signed completions.

A database is a finite set of ground facts over a finite schema.  Its signed
completion marks every present fact with ``+`` and every absent fact over the
active domain with ``-``.  Completions blow up as ``|adom|^arity``, so the
constructor takes a hard cap and most callers restrict the negative side to
the relations a query actually negates.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from .errors import ArityError, CapExceededError, FactSyntaxError

#: Upper bound on the number of signed facts a completion may contain.
DEFAULT_SIGNED_CAP = 10**6


class Relation(NamedTuple):
    """A relation symbol: a name together with a positive arity."""

    name: str
    arity: int


class Sign(IntEnum):
    """Polarity of a signed fact; positive sorts before negative."""

    POSITIVE = 0
    NEGATIVE = 1

    @property
    def symbol(self) -> str:
        return "+" if self is Sign.POSITIVE else "-"


@dataclass(frozen=True, order=True)
class Fact:
    """A ground atom: a relation applied to a tuple of constants.

    Constants are plain strings.  The derived ordering (relation name,
    arity, then the constant tuple) is the canonical order used for all
    deterministic output.
    """

    relation: Relation
    args: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.args) != self.relation.arity:
            raise ArityError(
                f"fact {self.relation.name}({','.join(self.args)}) has "
                f"{len(self.args)} arguments but {self.relation.name} has "
                f"arity {self.relation.arity}"
            )

    def __str__(self) -> str:
        return f"{self.relation.name}({','.join(self.args)})"


def fact(name: str, *args: str) -> Fact:
    """Build a fact, inferring the relation's arity from the arguments."""
    return Fact(Relation(name, len(args)), tuple(args))


@dataclass(frozen=True, order=True)
class SignedFact:
    """A fact together with a polarity, rendered as ``+R(a,b)`` / ``-R(a,b)``."""

    sign: Sign
    fact: Fact

    def __str__(self) -> str:
        return f"{self.sign.symbol}{self.fact}"


def positive(f: Fact) -> SignedFact:
    return SignedFact(Sign.POSITIVE, f)


def negative(f: Fact) -> SignedFact:
    return SignedFact(Sign.NEGATIVE, f)


def _unique_schema(relations: Iterable[Relation]) -> frozenset[Relation]:
    by_name: dict[str, int] = {}
    for rel in relations:
        seen = by_name.setdefault(rel.name, rel.arity)
        if seen != rel.arity:
            raise ArityError(
                f"relation {rel.name} used with arities {seen} and {rel.arity}"
            )
    return frozenset(Relation(name, arity) for name, arity in by_name.items())


@dataclass(frozen=True)
class Database:
    """An immutable set of facts whose relations all belong to the schema."""

    schema: frozenset[Relation]
    facts: frozenset[Fact]

    def __post_init__(self) -> None:
        object.__setattr__(self, "schema", _unique_schema(self.schema))
        object.__setattr__(self, "facts", frozenset(self.facts))
        for f in self.facts:
            if f.relation not in self.schema:
                raise ArityError(
                    f"fact {f} does not match the schema entry for {f.relation.name}"
                )

    @cached_property
    def sorted_facts(self) -> tuple[Fact, ...]:
        return tuple(sorted(self.facts))

    @cached_property
    def active_domain(self) -> frozenset[str]:
        """All constants occurring in some fact."""
        return frozenset(c for f in self.facts for c in f.args)

    def __contains__(self, f: Fact) -> bool:
        return f in self.facts

    def __iter__(self) -> Iterator[Fact]:
        return iter(self.sorted_facts)

    def __len__(self) -> int:
        return len(self.facts)


def database(facts: Iterable[Fact] = (), schema: Iterable[Relation] = ()) -> Database:
    """Build a database, inferring schema entries from the facts themselves."""
    facts = frozenset(facts)
    return Database(frozenset(schema) | {f.relation for f in facts}, facts)


@dataclass(frozen=True)
class SignedDatabase:
    """A completion: the base facts marked ``+`` plus absent facts marked ``-``.

    ``restricted_to`` records, when the negative side was limited to a set of
    relations, which relations those were; ``None`` means the full completion.
    """

    base: Database
    signed_facts: frozenset[SignedFact]
    restricted_to: frozenset[Relation] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "signed_facts", frozenset(self.signed_facts))

    @cached_property
    def sorted_facts(self) -> tuple[SignedFact, ...]:
        return tuple(sorted(self.signed_facts))

    @cached_property
    def positive_part(self) -> frozenset[SignedFact]:
        return frozenset(sf for sf in self.signed_facts if sf.sign is Sign.POSITIVE)

    @cached_property
    def negative_part(self) -> frozenset[SignedFact]:
        return frozenset(sf for sf in self.signed_facts if sf.sign is Sign.NEGATIVE)

    def __contains__(self, sf: SignedFact) -> bool:
        return sf in self.signed_facts

    def __iter__(self) -> Iterator[SignedFact]:
        return iter(self.sorted_facts)

    def __len__(self) -> int:
        return len(self.signed_facts)


def signed_database(
    db: Database,
    *,
    restrict_to: Iterable[Relation] | None = None,
    extra_relations: Iterable[Relation] = (),
    cap: int | None = DEFAULT_SIGNED_CAP,
) -> SignedDatabase:
    """Compute the signed completion of ``db``.

    Negative facts range over all tuples of active-domain constants that are
    absent from ``db``; with ``restrict_to`` only the given relations get a
    negative side.  ``extra_relations`` admits relations that appear in a
    query but have no facts (their whole tuple space is then negative).
    Raises :class:`CapExceededError` if the completion would hold more than
    ``cap`` signed facts (``None`` means the default cap, not "unlimited").
    """
    if cap is None:
        cap = DEFAULT_SIGNED_CAP
    schema = _unique_schema(itertools.chain(db.schema, extra_relations))
    base = db if schema == db.schema else Database(schema, db.facts)
    adom = sorted(base.active_domain)

    if restrict_to is None:
        negated_relations = schema
    else:
        by_name = {rel.name: rel for rel in schema}
        resolved = set()
        for rel in restrict_to:
            known = by_name.get(rel.name)
            if known is None:
                raise ArityError(f"cannot restrict to unknown relation {rel.name}")
            if known.arity != rel.arity:
                raise ArityError(
                    f"relation {rel.name} has arity {known.arity}, not {rel.arity}"
                )
            resolved.add(known)
        negated_relations = frozenset(resolved)

    present: dict[Relation, set[tuple[str, ...]]] = {rel: set() for rel in schema}
    for f in base.facts:
        present[f.relation].add(f.args)

    total = len(base.facts)
    for rel in negated_relations:
        total += len(adom) ** rel.arity - len(present[rel])
    if total > cap:
        raise CapExceededError(
            f"signed completion would hold {total} facts, above the cap of {cap}"
        )

    signed: set[SignedFact] = {positive(f) for f in base.facts}
    for rel in sorted(negated_relations):
        for combo in itertools.product(adom, repeat=rel.arity):
            if combo not in present[rel]:
                signed.add(negative(Fact(rel, combo)))

    restricted = None if restrict_to is None else frozenset(negated_relations)
    return SignedDatabase(base=base, signed_facts=frozenset(signed), restricted_to=restricted)


# ---------------------------------------------------------------------------
# Facts file ingestion.
#
# Format: UTF-8 text; `#` starts a comment; optional `@relation Name/arity`
# header lines declare relations (useful for relations with no facts, which
# otherwise could not contribute a negative side); fact lines hold one or
# more `Rel(c1,c2,...)` entries with bare-identifier constants.
# ---------------------------------------------------------------------------

_HEADER_RE = re.compile(r"@relation\s+([A-Za-z][A-Za-z0-9_]*)\s*/\s*(\d+)\s*$")
_FACT_RE = re.compile(
    r"\s*([A-Za-z][A-Za-z0-9_]*)\s*\(\s*([A-Za-z0-9_]+(?:\s*,\s*[A-Za-z0-9_]+)*)\s*\)\s*"
)


def _parse_fact_line(
    line: str, lineno: int | None, arities: dict[str, int]
) -> list[Fact]:
    facts = []
    pos = 0
    while pos < len(line):
        if line[pos:].strip() == "":
            break
        match = _FACT_RE.match(line, pos)
        if match is None:
            raise FactSyntaxError(f"cannot parse fact near {line[pos:].strip()!r}", lineno)
        name, body = match.group(1), match.group(2)
        args = tuple(part.strip() for part in body.split(","))
        declared = arities.setdefault(name, len(args))
        if declared != len(args):
            raise ArityError(
                f"line {lineno}: relation {name} used with arity {len(args)} "
                f"but previously declared with arity {declared}"
                if lineno is not None
                else f"relation {name} used with arities {declared} and {len(args)}"
            )
        facts.append(Fact(Relation(name, len(args)), args))
        pos = match.end()
    return facts


def load_database(path: str | Path) -> Database:
    """Read a facts file into a :class:`Database` (see module docstring)."""
    text = Path(path).read_text(encoding="utf-8")
    arities: dict[str, int] = {}
    facts: set[Fact] = set()
    declared_only: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            header = _HEADER_RE.match(line)
            if header is None:
                raise FactSyntaxError(f"malformed header {line!r}", lineno)
            name, arity = header.group(1), int(header.group(2))
            if arity < 1:
                raise FactSyntaxError(f"relation {name} declared with arity 0", lineno)
            known = arities.setdefault(name, arity)
            if known != arity:
                raise ArityError(
                    f"line {lineno}: relation {name} declared with arity {arity} "
                    f"but previously used with arity {known}"
                )
            declared_only.add(name)
            continue
        facts.update(_parse_fact_line(line, lineno, arities))
    schema = {Relation(name, arity) for name, arity in arities.items()}
    return Database(frozenset(schema), frozenset(facts))


def parse_fact(text: str) -> Fact:
    """Parse a single ``Rel(c1,...)`` string, e.g. from a command-line flag."""
    facts = _parse_fact_line(text, None, {})
    if len(facts) != 1:
        raise FactSyntaxError(f"expected exactly one fact in {text!r}")
    return facts[0]


def parse_signed_fact(text: str) -> SignedFact:
    """Parse ``+Rel(...)`` or ``-Rel(...)``; a bare fact is taken as positive."""
    stripped = text.strip()
    sign = Sign.POSITIVE
    if stripped.startswith(("+", "-")):
        sign = Sign.POSITIVE if stripped[0] == "+" else Sign.NEGATIVE
        stripped = stripped[1:]
    return SignedFact(sign, parse_fact(stripped))
