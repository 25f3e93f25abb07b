# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.index - person name index and spatial dependency DAG

The index bundle holds everything later stages need from the knowledge
graph:

- the person name index (normalized name variant -> person ids),
- the occupation index (person id -> occupation ids),
- the location index (person id -> (relation kind, location id)),
- the spatial dependency DAG of "located in" relations,
- the person records themselves.

Bundles are written as a gzip stream whose first line is the format
header `streetperson-index<TAB><version>`, followed by one JSON
document.
"""

import dataclasses
import gzip
import itertools
import logging
import typing

import orjson

import streetperson.error
import streetperson.file
import streetperson.tool
import streetperson.wikidata


__all__ = ["PersonNameIndex", "SpatialDag", "BuildReport", "IndexBundle",
           "index_key", "build_indexes", "lookup_persons", "chain_of",
           "save_bundle", "load_bundle"]

logger = logging.getLogger(__name__)

BUNDLE_MAGIC = b"streetperson-index"
BUNDLE_FORMAT_VERSION = 1


def index_key(term):
    """
    Return the index key for `term`: case-folded, trimmed, with
    whitespace runs and hyphens collapsed to a single space. Umlauts
    and other diacritics are kept.
    """
    return " ".join(streetperson.tool.name_tokens(term))


class PersonNameIndex(object):
    """Exact-term inverted index from name variants to person ids."""

    def __init__(self, entries=None):
        # Normalized term -> set of person ids
        self._entries = {}
        for term, person_ids in (entries or {}).items():
            self._entries[term] = set(person_ids)

    def add(self, term, person_id):
        """Add `person_id` under the normalized form of `term`."""
        key = index_key(term)
        if key:
            self._entries.setdefault(key, set()).add(person_id)

    def lookup(self, term):
        """
        Return a frozenset of the ids of all persons indexed under
        `term`. Unknown terms give an empty set.
        """
        return frozenset(self._entries.get(index_key(term), ()))

    def terms(self):
        """Return the indexed terms in sorted order."""
        return sorted(self._entries)

    def __len__(self):
        return len(self._entries)

    def as_dict(self):
        return {term: sorted(person_ids)
                for term, person_ids in sorted(self._entries.items())}


def name_variants(person):
    """
    Return the list of name variants of `person` which are indexed:
    full name, first name tokens, last name tokens, aliases and
    "first last" pairs. Each variant is an index key.
    """
    first_names, last_names = [], []
    for name in person.first_names:
        first_names.append(index_key(name))
        first_names.extend(streetperson.tool.name_tokens(name))
    for name in person.last_names:
        last_names.append(index_key(name))
        last_names.extend(streetperson.tool.name_tokens(name))
    variants = [index_key(person.full_name)]
    variants.extend(first_names)
    variants.extend(last_names)
    variants.extend(index_key(alias) for alias in person.aliases)
    variants.extend("{0} {1}".format(first, last) for first, last
                    in itertools.product(person.first_names,
                                         person.last_names))
    return [variant for variant in dict.fromkeys(index_key(variant)
                                                  for variant in variants)
            if variant]


@dataclasses.dataclass
class BuildReport:
    """Counters and anomalies found while building a bundle."""
    persons: int = 0
    terms: int = 0
    locations: int = 0
    edges: int = 0
    duplicate_persons: int = 0
    duplicate_locations: int = 0
    dangling_parents: int = 0
    # (source, target) of every removed edge
    broken_cycles: typing.List[typing.List[str]] = dataclasses.field(
                                                      default_factory=list)

    def as_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def summary(self):
        """Return the report as plain text, one counter per line."""
        lines = ["persons: {0:d}".format(self.persons),
                 "terms: {0:d}".format(self.terms),
                 "locations: {0:d}".format(self.locations),
                 "edges: {0:d}".format(self.edges),
                 "duplicate persons: {0:d}".format(self.duplicate_persons),
                 "duplicate locations: {0:d}".format(
                   self.duplicate_locations),
                 "dangling parents: {0:d}".format(self.dangling_parents),
                 "broken cycles: {0:d}".format(len(self.broken_cycles))]
        lines.extend("  removed edge {0} -> {1}".format(source, target)
                     for source, target in self.broken_cycles)
        return "\n".join(lines) + "\n"


class SpatialDag(object):
    """
    "Located in" relations between locations.

    `nodes` maps location ids to `LocationNode`s, `up_edges` maps each
    location id to its sorted parent ids. Build instances with
    `SpatialDag.build` to get dangling parents removed and cycles
    broken.
    """

    def __init__(self, nodes, up_edges):
        self.nodes = nodes
        self.up_edges = up_edges
        self._canonical_parents = {}
        self._chains = {}

    @classmethod
    def build(cls, locations, report=None):
        """
        Return a `SpatialDag` for the `LocationNode`s `locations`.

        Parents which aren't nodes themselves are dropped, cycles are
        broken by removing, per cycle, the edge leaving the cycle's
        largest id. Both are counted in `report` (a `BuildReport`).
        """
        if report is None:
            report = BuildReport()
        nodes = {}
        for location in locations:
            if location.id in nodes:
                report.duplicate_locations += 1
            nodes[location.id] = location
        up_edges = {}
        for location_id, node in nodes.items():
            parents = set()
            for parent in node.parents:
                if parent == location_id:
                    continue
                if parent not in nodes:
                    report.dangling_parents += 1
                    logger.debug("%s: dropped dangling parent %s",
                                 location_id, parent)
                    continue
                parents.add(parent)
            up_edges[location_id] = sorted(parents)
        while True:
            cycle = _find_cycle(up_edges)
            if cycle is None:
                break
            source = max(cycle)
            target = cycle[(cycle.index(source) + 1) % len(cycle)]
            up_edges[source].remove(target)
            report.broken_cycles.append([source, target])
            logger.debug("broke cycle %s by removing edge %s -> %s",
                         " -> ".join(cycle), source, target)
        if report.dangling_parents:
            logger.warning("dropped %d dangling parent references",
                           report.dangling_parents)
        if report.broken_cycles:
            logger.warning("broke %d cycles in the location hierarchy",
                           len(report.broken_cycles))
        report.locations = len(nodes)
        report.edges = sum(len(parents) for parents in up_edges.values())
        return cls(nodes, up_edges)

    def canonical_parent(self, location_id):
        """
        Return the parent followed by containment chains, or `None` if
        `location_id` has no parents.

        The canonical parent is the administrative parent if exactly
        one parent is administrative. Otherwise it's the smallest id
        among all parents.
        """
        try:
            return self._canonical_parents[location_id]
        except KeyError:
            pass
        parents = self.up_edges.get(location_id, [])
        admin_parents = [parent for parent in parents
                         if self.nodes[parent].admin]
        if len(admin_parents) == 1:
            parent = admin_parents[0]
        elif parents:
            parent = min(parents)
        else:
            parent = None
        self._canonical_parents[location_id] = parent
        return parent

    def chain_of(self, location_id):
        """
        Return the containment chain of `location_id`: the id itself,
        then its canonical parent, grandparent and so on up to the
        most general location. Unknown ids give `[location_id]`.
        """
        if location_id in self._chains:
            return list(self._chains[location_id])
        path = [location_id]
        seen = {location_id}
        current = location_id
        tail = []
        while True:
            parent = self.canonical_parent(current)
            if parent is None or parent in seen:
                break
            if parent in self._chains:
                tail = self._chains[parent]
                break
            path.append(parent)
            seen.add(parent)
            current = parent
        # Fill the cache for every node on the path.
        for position in range(len(path) - 1, -1, -1):
            tail = [path[position]] + tail
            self._chains[path[position]] = tail
        return list(tail)

    def __len__(self):
        return len(self.nodes)


def _find_cycle(up_edges):
    """
    Return a list of ids forming a cycle (each id's successor in the
    list is one of its parents, the last id's parent is the first id),
    or `None` if `up_edges` is acyclic.

    Nodes are visited in sorted order, so the same graph always yields
    the same cycle.
    """
    on_path, done = set(), set()
    for start in sorted(up_edges):
        if start in done:
            continue
        path = [start]
        on_path.add(start)
        stack = [iter(up_edges.get(start, ()))]
        while stack:
            for parent in stack[-1]:
                if parent in on_path:
                    return path[path.index(parent):]
                if parent not in done:
                    path.append(parent)
                    on_path.add(parent)
                    stack.append(iter(up_edges.get(parent, ())))
                    break
            else:
                stack.pop()
                node = path.pop()
                on_path.discard(node)
                done.add(node)
    return None


class IndexBundle(object):
    """
    The persons, the three person indexes and the spatial DAG as one
    loadable unit. Treat bundles as immutable after building.
    """

    def __init__(self, persons, name_index, dag, report=None):
        # Person id -> `PersonRecord`
        self.persons = persons
        self.name_index = name_index
        self.occupation_index = {person_id: list(person.occupations)
                                 for person_id, person in persons.items()}
        self.location_index = {person_id: list(person.locations)
                               for person_id, person in persons.items()}
        self.dag = dag
        self.report = report if report is not None else BuildReport()

    def person(self, person_id):
        """
        Return the `PersonRecord` for `person_id`. If there's no such
        person, raise `UnknownPersonError`.
        """
        try:
            return self.persons[person_id]
        except KeyError:
            raise streetperson.error.UnknownPersonError(person_id)

    def link_count(self, person_id):
        """Return the link count of `person_id`, 0 if unknown."""
        person = self.persons.get(person_id)
        return person.link_count if person is not None else 0

    def lookup(self, term):
        return self.name_index.lookup(term)

    def chain_of(self, location_id):
        return self.dag.chain_of(location_id)


def build_indexes(persons, locations):
    """
    Return an `IndexBundle` for the `PersonRecord`s `persons` and the
    `LocationNode`s `locations`.

    Duplicate ids are allowed; the last record wins. The bundle's
    `report` counts duplicates, dangling parents and broken cycles.
    """
    report = BuildReport()
    persons_by_id = {}
    for person in persons:
        if person.id in persons_by_id:
            report.duplicate_persons += 1
        persons_by_id[person.id] = person
    name_index = PersonNameIndex()
    for person_id, person in persons_by_id.items():
        for variant in name_variants(person):
            name_index.add(variant, person_id)
    dag = SpatialDag.build(locations, report)
    report.persons = len(persons_by_id)
    report.terms = len(name_index)
    logger.info("indexed %d persons under %d terms, %d locations",
                report.persons, report.terms, report.locations)
    return IndexBundle(persons_by_id, name_index, dag, report)


def lookup_persons(bundle, term):
    """
    Return the set of ids of the persons in `bundle` indexed under
    `term`. Unknown terms give an empty set.
    """
    return bundle.lookup(term)


def chain_of(dag, location_id):
    """Return the containment chain of `location_id` in `dag`."""
    return dag.chain_of(location_id)


#
# Persistence
#
def save_bundle(bundle, path):
    """
    Write `bundle` to `path`. Equal bundles give byte-identical files.
    """
    document = {
      "persons": [bundle.persons[person_id].as_dict()
                  for person_id in sorted(bundle.persons)],
      "name_index": bundle.name_index.as_dict(),
      "locations": [dataclasses.replace(bundle.dag.nodes[location_id],
                                        parents=bundle.dag.up_edges[
                                                  location_id]).as_dict()
                    for location_id in sorted(bundle.dag.nodes)],
      "report": bundle.report.as_dict(),
    }
    with streetperson.file.atomic_output(path) as fobj:
        # No file name and a fixed timestamp in the gzip header.
        with gzip.GzipFile(filename="", mode="wb", fileobj=fobj,
                           mtime=0) as gzip_file:
            gzip_file.write(BUNDLE_MAGIC + b"\t" +
                            str(BUNDLE_FORMAT_VERSION).encode("ascii") +
                            b"\n")
            gzip_file.write(orjson.dumps(document,
                                         option=orjson.OPT_SORT_KEYS))
    logger.info("saved index bundle to %s", path)


def load_bundle(path):
    """
    Return the `IndexBundle` stored at `path`.

    Raise `FormatVersionError` if the file has another format version
    and `FormatError` if it's truncated or otherwise corrupt.
    """
    with streetperson.error.source_error_to_format_error("load-bundle",
                                                         path):
        with gzip.open(path, "rb") as fobj:
            header = fobj.readline().rstrip(b"\n")
            magic, _, version = header.partition(b"\t")
            if magic != BUNDLE_MAGIC:
                raise streetperson.error.FormatError(
                        "{0!r} isn't an index bundle".format(path))
            if version != str(BUNDLE_FORMAT_VERSION).encode("ascii"):
                raise streetperson.error.FormatVersionError(
                        "index bundle {0!r} has format version {1}, "
                        "expected {2:d}".format(
                          path, streetperson.tool.as_unicode(version),
                          BUNDLE_FORMAT_VERSION))
            document = orjson.loads(fobj.read())
        persons = {}
        for data in document["persons"]:
            person = streetperson.wikidata.PersonRecord.from_dict(data)
            persons[person.id] = person
        locations = [streetperson.wikidata.LocationNode.from_dict(data)
                     for data in document["locations"]]
        name_index = PersonNameIndex(document["name_index"])
        report = BuildReport.from_dict(document["report"])
    # Stored parents are already cleaned, so this doesn't change them.
    dag = SpatialDag.build(locations)
    logger.info("loaded index bundle %s (%d persons, %d locations)", path,
                len(persons), len(dag))
    return IndexBundle(persons, name_index, dag, report)
