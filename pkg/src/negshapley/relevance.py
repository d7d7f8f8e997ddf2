"""Which facts matter: support membership and counterfactual impact.

A signed fact is *signed-relevant* when it occurs in some minimal signed
support, and a database fact is *positive-relevant* when it occurs in some
minimal positive support.  *Impact* is the counterfactual notion: a fact has
impact when adding it to some subset of the remaining database flips the
query's truth value, classified by the direction(s) of the flips observed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .core import Database, Fact, SignedFact, positive
from .errors import CapExceededError, SemanticError
from .query import Query, signed_database_restricted
from .supports import (
    minimal_positive_supports,
    minimal_signed_supports,
    satisfies,
)

#: Impact classification enumerates ``2^(|db|-1)`` subsets per fact.
DEFAULT_IMPACT_CAP = 20


class ImpactKind(str, Enum):
    """Directions in which a fact can flip the query on some subset."""

    NONE = "none"
    POSITIVE_ONLY = "positiveOnly"
    NEGATIVE_ONLY = "negativeOnly"
    BOTH = "both"


def signed_relevant(
    subject: SignedFact | Fact, q: Query, db: Database, *, cap: int | None = None
) -> bool:
    """Whether the signed fact occurs in some minimal signed support.

    A plain fact is taken with positive sign.
    """
    if isinstance(subject, Fact):
        subject = positive(subject)
    return any(
        subject in s.elements for s in minimal_signed_supports(q, db, cap=cap)
    )


def positive_relevant(f: Fact, q: Query, db: Database) -> bool:
    """Whether the fact occurs in some minimal positive support."""
    return any(f in s.elements for s in minimal_positive_supports(q, db))


def impact_relevant(
    f: Fact,
    q: Query,
    db: Database,
    *,
    cap: int = DEFAULT_IMPACT_CAP,
    _memo: dict | None = None,
) -> ImpactKind:
    """Classify how adding ``f`` to subsets of the rest of the database can
    change the query's truth value."""
    if f not in db.facts:
        raise SemanticError(f"{f} is not in the database")
    if len(db.facts) > cap:
        raise CapExceededError(
            f"impact over {len(db.facts)} facts enumerates "
            f"2^{len(db.facts) - 1} subsets (cap {cap})"
        )
    memo = _memo if _memo is not None else {}

    def sat(subset: frozenset[Fact]) -> bool:
        hit = memo.get(subset)
        if hit is None:
            hit = memo[subset] = satisfies(q, subset)
        return hit

    rest = sorted(db.facts - {f})
    upward = downward = False
    for k in range(len(rest) + 1):
        for combo in itertools.combinations(rest, k):
            without = frozenset(combo)
            before, after = sat(without), sat(without | {f})
            upward = upward or (after and not before)
            downward = downward or (before and not after)
            if upward and downward:
                return ImpactKind.BOTH
    if upward:
        return ImpactKind.POSITIVE_ONLY
    if downward:
        return ImpactKind.NEGATIVE_ONLY
    return ImpactKind.NONE


@dataclass(frozen=True)
class RelevanceVerdict:
    """One row of a relevance report.

    ``positive_relevant`` and ``impact`` are ``None`` for negative facts,
    where only the signed notion applies; ``impact`` is also ``None`` when
    its computation was skipped (see ``impact_skipped``).
    """

    subject: SignedFact
    signed_relevant: bool
    positive_relevant: bool | None
    impact: ImpactKind | None
    impact_skipped: bool = False


def relevance_report(
    q: Query,
    db: Database,
    *,
    impact_cap: int = DEFAULT_IMPACT_CAP,
    signed_cap: int | None = None,
) -> list[RelevanceVerdict]:
    """Verdicts for every member of the restricted signed completion.

    Positive facts get all three columns; negative facts only the signed
    one.  When the database is too large for exhaustive impact search the
    impact column is skipped rather than failing the whole report.
    """
    restricted = signed_database_restricted(db, q, cap=signed_cap)
    in_signed = {
        sf
        for support in minimal_signed_supports(q, db, cap=signed_cap)
        for sf in support.elements
    }
    in_positive = {
        f for support in minimal_positive_supports(q, db) for f in support.elements
    }
    skip_impact = len(db.facts) > impact_cap
    memo: dict = {}

    rows = []
    for sf in restricted.sorted_facts:
        if sf.fact in db.facts:
            rows.append(
                RelevanceVerdict(
                    subject=sf,
                    signed_relevant=sf in in_signed,
                    positive_relevant=sf.fact in in_positive,
                    impact=None
                    if skip_impact
                    else impact_relevant(sf.fact, q, db, cap=impact_cap, _memo=memo),
                    impact_skipped=skip_impact,
                )
            )
        else:
            rows.append(
                RelevanceVerdict(
                    subject=sf,
                    signed_relevant=sf in in_signed,
                    positive_relevant=None,
                    impact=None,
                )
            )
    return rows
