# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.candidates - candidate persons for a street
"""

import dataclasses
import typing

import streetperson.truncate


__all__ = ["CandidateSet", "retrieve", "by_link_count"]


@dataclasses.dataclass
class CandidateSet:
    """
    The persons a street may be named after and the truncated name
    term which found them.
    """
    street: object
    term_used: str
    candidates: typing.FrozenSet[str] = frozenset()

    def __len__(self):
        return len(self.candidates)


def by_link_count(person_ids, bundle):
    """
    Return `person_ids` ordered by descending link count, equal counts
    by ascending id.
    """
    return sorted(person_ids,
                  key=lambda person_id: (-bundle.link_count(person_id),
                                         person_id))


def retrieve(street, bundle, affixes=None, union=False, cap=None):
    """
    Return the `CandidateSet` for `street`.

    The truncation candidates of the street name are looked up best
    first; the first term with a non-empty result defines the
    candidates. If no term finds anybody, the candidates are empty and
    `term_used` is the first truncation candidate (or "" if there's
    none).

    With `union` true, the candidates of all terms are merged and
    `term_used` is the first term with a result. `cap`, if not `None`,
    keeps only the `cap` candidates with the highest link counts.
    """
    terms = streetperson.truncate.truncate(street.name, affixes)
    term_used = terms[0] if terms else ""
    candidates = set()
    for term in terms:
        found = bundle.lookup(term)
        if not found:
            continue
        if not candidates:
            term_used = term
        candidates.update(found)
        if not union:
            break
    if cap is not None and len(candidates) > cap:
        candidates = by_link_count(candidates, bundle)[:cap]
    return CandidateSet(street, term_used, frozenset(candidates))
