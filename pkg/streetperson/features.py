# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.features - features of street-candidate pairs

Every pair gets 30 features, in this order:

     0      link_count        raw link count of the person
     1-4    name_full, name_first, name_last, name_alias
                              which name variant occurs in the street name
     5-24   occupation_00 .. occupation_19
                              person holds the i-th vocabulary occupation
    25-29   spatial_born, spatial_died, spatial_buried,
            spatial_educated, spatial_work
                              best containment score per relation kind
"""

import collections
import dataclasses
import logging
import typing

import streetperson.error
import streetperson.tool
import streetperson.truncate


__all__ = ["FEATURE_NAMES", "VOCABULARY_SIZE", "FeatureVector",
           "OccupationVocabulary", "top_occupations", "containment_score",
           "spatial_features", "name_match_features", "extract_features",
           "write_feature_table"]

logger = logging.getLogger(__name__)

VOCABULARY_SIZE = 20

# Vocabulary entries used when there are fewer occupations than
# vocabulary slots. No person holds them.
PLACEHOLDER_OCCUPATION = "~unused-{0:02d}"

NAME_FEATURES = ("name_full", "name_first", "name_last", "name_alias")

# Relation kind -> feature name
SPATIAL_FEATURES = collections.OrderedDict([
  ("born", "spatial_born"),
  ("died", "spatial_died"),
  ("buried", "spatial_buried"),
  ("educated_at", "spatial_educated"),
  ("work_location", "spatial_work"),
])

FEATURE_NAMES = (("link_count",) + NAME_FEATURES +
                 tuple("occupation_{0:02d}".format(index)
                       for index in range(VOCABULARY_SIZE)) +
                 tuple(SPATIAL_FEATURES.values()))


@dataclasses.dataclass(frozen=True)
class FeatureVector:
    """The 30 features of one street-candidate pair."""
    link_count: float = 0.0
    name_full: int = 0
    name_first: int = 0
    name_last: int = 0
    name_alias: int = 0
    occupation_flags: typing.Tuple[int, ...] = (0,) * VOCABULARY_SIZE
    spatial_born: float = 0.0
    spatial_died: float = 0.0
    spatial_buried: float = 0.0
    spatial_educated: float = 0.0
    spatial_work: float = 0.0

    def to_list(self):
        """Return the features as a list of floats in `FEATURE_NAMES` order."""
        values = [float(self.link_count), float(self.name_full),
                  float(self.name_first), float(self.name_last),
                  float(self.name_alias)]
        values.extend(float(flag) for flag in self.occupation_flags)
        values.extend(float(getattr(self, name))
                      for name in SPATIAL_FEATURES.values())
        return values

    @classmethod
    def from_list(cls, values):
        """Return a `FeatureVector` from 30 values in `FEATURE_NAMES` order."""
        if len(values) != len(FEATURE_NAMES):
            raise streetperson.error.InternalError(
                    "expected {0:d} feature values, got {1:d}".format(
                      len(FEATURE_NAMES), len(values)))
        values = list(values)
        flags = tuple(int(value) for value in values[5:5+VOCABULARY_SIZE])
        spatial = dict(zip(SPATIAL_FEATURES.values(),
                           values[5+VOCABULARY_SIZE:]))
        return cls(float(values[0]), int(values[1]), int(values[2]),
                   int(values[3]), int(values[4]), flags, **spatial)


class OccupationVocabulary(object):
    """
    The occupations whose flags are features, in a fixed order.

    `padding` is the number of entries which didn't come from the
    ranking the vocabulary was built from.
    """

    def __init__(self, occupations, padding=0):
        occupations = tuple(occupations)
        if (len(occupations) != VOCABULARY_SIZE or
            len(set(occupations)) != VOCABULARY_SIZE):
            raise streetperson.error.PreconditionError(
                    "occupation vocabulary needs {0:d} distinct entries, "
                    "got {1!r}".format(VOCABULARY_SIZE, occupations))
        self.occupations = occupations
        self.padding = padding

    def flags(self, person_occupations):
        """Return the 0/1 flags for the occupation ids held by a person."""
        held = set(person_occupations)
        return tuple(int(occupation in held)
                     for occupation in self.occupations)

    def __iter__(self):
        return iter(self.occupations)

    def __len__(self):
        return len(self.occupations)

    def __eq__(self, other):
        return (isinstance(other, OccupationVocabulary) and
                self.occupations == other.occupations)

    def __repr__(self):
        return "<OccupationVocabulary {0!r}>".format(list(self.occupations))


def _ranked(counter, exclude=()):
    """Return the keys of `counter` by descending count, then by id."""
    return sorted((key for key in counter if key not in exclude),
                  key=lambda key: (-counter[key], key))


def top_occupations(positives, occupation_index):
    """
    Return the `OccupationVocabulary` of the 20 most frequent
    occupations of the distinct persons in `positives`, a sequence of
    `(street, person_id)` pairs. Equal counts are ordered by id.

    If the positives have fewer than 20 occupations, the vocabulary is
    padded with the most frequent occupations over all persons of
    `occupation_index`, then with placeholder ids. Empty positives
    raise `PreconditionError`.
    """
    person_ids = {person_id for _, person_id in positives}
    if not person_ids:
        raise streetperson.error.PreconditionError(
                "can't build occupation vocabulary without positives")
    counts = collections.Counter()
    for person_id in person_ids:
        counts.update(set(occupation_index.get(person_id, ())))
    occupations = _ranked(counts)[:VOCABULARY_SIZE]
    ranked_size = len(occupations)
    if ranked_size < VOCABULARY_SIZE:
        global_counts = collections.Counter()
        for person_occupations in occupation_index.values():
            global_counts.update(set(person_occupations))
        occupations.extend(_ranked(global_counts, set(occupations))
                             [:VOCABULARY_SIZE - ranked_size])
        placeholder_index = 0
        while len(occupations) < VOCABULARY_SIZE:
            occupations.append(PLACEHOLDER_OCCUPATION.format(
                                 placeholder_index))
            placeholder_index += 1
        logger.warning("positives have only %d distinct occupations; "
                       "padded the vocabulary with %d entries", ranked_size,
                       VOCABULARY_SIZE - ranked_size)
    return OccupationVocabulary(occupations,
                                padding=VOCABULARY_SIZE - ranked_size)


def containment_score(street_chain, location_id, dag):
    """
    Return how far the location `location_id` and the street with the
    containment chain `street_chain` contain each other, in [0, 1].

    The score is the number of regions of the street chain (all
    elements but the street itself) found in the location's chain,
    divided by the length of the street chain. Only the street itself
    scores 1; a location inside the street, such as a building under
    a Wikidata street item, scores at most `(n - 1) / n`. Unknown
    locations and those sharing no region with the street score 0.
    """
    if not street_chain:
        raise streetperson.error.PreconditionError("empty street chain")
    if location_id == street_chain[0]:
        return 1.0
    if location_id not in dag.nodes:
        return 0.0
    shared = set(dag.chain_of(location_id)) & set(street_chain[1:])
    return len(shared) / len(street_chain)


def _street_chain(street):
    return street.chain or [street.osm_id]


def spatial_features(street, person_id, location_index, dag):
    """
    Return the five spatial features of the pair, one per relation
    kind: the highest containment score of the person's locations of
    that kind, 0 if there's none.
    """
    street_chain = _street_chain(street)
    best = dict.fromkeys(SPATIAL_FEATURES, 0.0)
    for kind, location_id in location_index.get(person_id, ()):
        if kind in best:
            best[kind] = max(best[kind],
                             containment_score(street_chain, location_id,
                                               dag))
    return tuple(best[kind] for kind in SPATIAL_FEATURES)


def _occurs(variant_tokens, street_tokens, folded_suffixes):
    """
    Return `True` if `variant_tokens` occur as consecutive tokens of
    `street_tokens`. The last variant token also matches a street
    token made of it and a glued suffix ("wilhelm" in "wilhelmstraße").
    """
    count = len(variant_tokens)
    if count == 0 or count > len(street_tokens):
        return False
    head, last = variant_tokens[:-1], variant_tokens[-1]
    for start in range(len(street_tokens) - count + 1):
        window = street_tokens[start:start+count]
        if window[:-1] != head:
            continue
        token = window[-1]
        if token == last or (token.startswith(last) and
                             token[len(last):] in folded_suffixes):
            return True
    return False


def name_match_features(person, street_name, affixes=None):
    """
    Return the flags `(name_full, name_first, name_last, name_alias)`
    telling which of the person's name variants occur in `street_name`.

    Matching is on normalized tokens; hyphens separate tokens. A
    variant's last token may carry a glued street suffix.
    """
    if affixes is None:
        affixes = streetperson.truncate.default_affixes()
    folded_suffixes = frozenset(streetperson.tool.normalize(suffix)
                                for suffix in affixes.suffixes)
    street_tokens = streetperson.tool.name_tokens(street_name)

    def matches_any(names):
        return int(any(_occurs(streetperson.tool.name_tokens(name),
                               street_tokens, folded_suffixes)
                       for name in names))

    first_tokens = [token for name in person.first_names
                    for token in streetperson.tool.name_tokens(name)]
    last_tokens = [token for name in person.last_names
                   for token in streetperson.tool.name_tokens(name)]
    return (matches_any([person.full_name]),
            matches_any(first_tokens),
            matches_any(last_tokens),
            matches_any(person.aliases))


def extract_features(street, person_id, bundle, vocabulary, affixes=None):
    """
    Return the `FeatureVector` for `street` and the person `person_id`.

    If the person isn't in `bundle`, raise `UnknownPersonError`.
    """
    person = bundle.person(person_id)
    name_flags = name_match_features(person, street.name, affixes)
    spatial = spatial_features(street, person_id, bundle.location_index,
                               bundle.dag)
    return FeatureVector(float(person.link_count), *name_flags,
                         vocabulary.flags(bundle.occupation_index.get(
                                            person_id, ())),
                         *spatial)


def write_feature_table(rows, fobj):
    """
    Write `rows`, an iterable of `(street_id, person_id, FeatureVector)`
    triples, as a TSV table with a header line to the binary file
    object `fobj`. Return the number of rows written.
    """
    header = ("street_id", "person_id") + FEATURE_NAMES
    fobj.write("\t".join(header).encode("utf-8") + b"\n")
    count = 0
    for street_id, person_id, vector in rows:
        fields = [street_id, person_id]
        fields.extend(repr(value) for value in vector.to_list())
        fobj.write("\t".join(fields).encode("utf-8") + b"\n")
        count += 1
    return count
