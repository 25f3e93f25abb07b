# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.wikidata - streaming ingestion of Wikidata entity dumps

The dump is a JSON array with one entity document per line:

    [
    {"type":"item","id":"Q1726","labels":{...},"claims":{...}},
    {"type":"item","id":"Q64","labels":{...},"claims":{...}},
    ]

Lines are parsed one at a time, so memory use doesn't depend on the
dump size. Entities become `PersonRecord`s (instances of human),
`LocationNode`s (entities with located-in claims or of a geographic
class) and, for streets with a "named after" claim, ground truth
street records.
"""

import collections
import dataclasses
import functools
import logging
import re
import typing

import orjson

import streetperson.config
import streetperson.error
import streetperson.file
import streetperson.osm
import streetperson.tool


__all__ = ["RawEntity", "PersonRecord", "LocationNode", "DumpParser",
           "LinkCountParser", "Schema", "stream_entities",
           "extract_person", "extract_location", "extract_named_after",
           "load_link_counts", "apply_link_counts", "ingest"]

logger = logging.getLogger(__name__)

RELATION_KINDS = streetperson.config.RELATION_KINDS

# Regnal numbers like "I." or "XIV" are never last names.
_roman_numeral_regex = re.compile(r"^(?:[IVXLC]+\.|[IVX]{1,4})$")


#
# Records
#
@dataclasses.dataclass
class RawEntity:
    """One entity document from the dump, reduced to what we use."""
    id: str
    labels: typing.Dict[str, str] = dataclasses.field(default_factory=dict)
    aliases: typing.Dict[str, typing.List[str]] = dataclasses.field(
                                                    default_factory=dict)
    # Property id -> list of target entity ids or literal strings.
    claims: typing.Dict[str, list] = dataclasses.field(default_factory=dict)
    sitelink_titles: typing.Dict[str, str] = dataclasses.field(
                                               default_factory=dict)

    def targets(self, property_id):
        """
        Return the entity ids among the claim values of `property_id`,
        in claim order.
        """
        return [value for value in self.claims.get(property_id, ())
                if streetperson.tool.is_entity_id(value)]


@dataclasses.dataclass
class PersonRecord:
    """A person from Wikidata with the data the features need."""
    id: str
    full_name: str
    first_names: typing.List[str] = dataclasses.field(default_factory=list)
    last_names: typing.List[str] = dataclasses.field(default_factory=list)
    aliases: typing.List[str] = dataclasses.field(default_factory=list)
    occupations: typing.List[str] = dataclasses.field(default_factory=list)
    # (relation kind, location entity id) pairs
    locations: typing.List[typing.Tuple[str, str]] = dataclasses.field(
                                                       default_factory=list)
    link_count: int = 0

    def as_dict(self):
        data = dataclasses.asdict(self)
        data["locations"] = [list(pair) for pair in self.locations]
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["locations"] = [tuple(pair) for pair in data.get("locations",
                                                               ())]
        return cls(**data)


@dataclasses.dataclass
class LocationNode:
    """A location and its direct "located in" parents."""
    id: str
    label: str
    parents: typing.List[str] = dataclasses.field(default_factory=list)
    # Instance of an administrative territorial entity class
    admin: bool = False

    def as_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


#
# Schema: the Wikidata properties and classes we look at
#
class Schema(object):
    """
    Property ids and class sets from the defaults file, prepared for
    fast membership tests.
    """

    def __init__(self, defaults):
        properties = defaults["properties"]
        self.instance_of = properties["instance_of"]
        self.given_name = properties["given_name"]
        self.family_name = properties["family_name"]
        self.occupation = properties["occupation"]
        self.position_held = properties["position_held"]
        self.located_in = properties["located_in"]
        self.country = properties["country"]
        self.named_after = properties["named_after"]
        # Keep the fixed kind order, whatever the order in the file.
        self.relations = [(kind, defaults["relations"][kind])
                          for kind in RELATION_KINDS]
        self.human_class = defaults["human_class"]
        self.admin_classes = frozenset(defaults["admin_classes"])
        self.geographic_classes = frozenset(defaults["geographic_classes"])
        self.street_classes = frozenset(defaults["street_classes"])
        self.name_classes = frozenset(defaults["given_name_classes"] +
                                      defaults["family_name_classes"])
        self.fallback_language = defaults["fallback_language"]
        self.stop_tokens = frozenset(token.casefold() for token
                                     in defaults["name_stop_tokens"])

    def classes_of(self, raw):
        """Return the set of classes `raw` is an instance of."""
        return set(raw.targets(self.instance_of))


@functools.lru_cache(maxsize=None)
def default_schema():
    """Return the `Schema` for the packaged defaults."""
    return Schema(streetperson.config.load_defaults())


#
# Dump parsing
#
class DumpParser(object):
    """
    Parse the lines of a Wikidata JSON dump into `RawEntity` objects.
    """

    def ignores_line(self, line):
        """
        Return a true value if the line doesn't contain an entity,
        i. e. it's empty or one of the array brackets.
        """
        stripped = line.strip()
        return stripped in (b"", b"[", b"]", "", "[", "]")

    def parse_line(self, line):
        """
        Return a `RawEntity` for the dump line `line` (bytes or str),
        or `None` if the line holds a valid document which isn't an
        item (e. g. a property).

        If the line can't be parsed, raise a `ParserError`.
        """
        text = line.strip()
        # Every line but the last ends with the array separator.
        if text[-1:] in (b",", ","):
            text = text[:-1]
        try:
            document = orjson.loads(text)
        except orjson.JSONDecodeError as exc:
            raise streetperson.error.ParserError(
                    "invalid entity document", original_exception=exc)
        if not isinstance(document, dict):
            raise streetperson.error.ParserError(
                    "entity document isn't an object")
        try:
            return self.entity_from_document(document)
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise streetperson.error.ParserError(
                    "unexpected entity document structure",
                    original_exception=exc)

    def entity_from_document(self, document):
        """
        Return a `RawEntity` from the decoded JSON `document`, or `None`
        if the document isn't an item.
        """
        entity_id = document.get("id")
        if not isinstance(entity_id, str) or not entity_id:
            raise streetperson.error.ParserError("entity without id")
        if not entity_id.startswith("Q"):
            return None
        labels = {language: label["value"] for language, label
                  in document.get("labels", {}).items()}
        aliases = {language: [alias["value"] for alias in alias_list]
                   for language, alias_list
                   in document.get("aliases", {}).items()
                   if alias_list}
        claims = {}
        for property_id, statements in document.get("claims", {}).items():
            values = []
            for statement in statements:
                if statement.get("rank") == "deprecated":
                    continue
                value = self._snak_value(statement.get("mainsnak", {}))
                if value is not None and value not in values:
                    values.append(value)
            # Absent property means absent key, never an empty list.
            if values:
                claims[property_id] = values
        sitelink_titles = {site: sitelink["title"] for site, sitelink
                           in document.get("sitelinks", {}).items()}
        return RawEntity(entity_id, labels, aliases, claims, sitelink_titles)

    @staticmethod
    def _snak_value(snak):
        """
        Return the entity id or literal of a claim's main snak, or
        `None` for "no value"/"unknown value" snaks and unsupported
        data types.
        """
        if snak.get("snaktype") != "value":
            return None
        datavalue = snak["datavalue"]
        value = datavalue["value"]
        value_type = datavalue.get("type")
        if value_type == "wikibase-entityid":
            if "id" in value:
                return value["id"]
            return "Q{0:d}".format(value["numeric-id"])
        elif value_type == "string":
            return value
        elif value_type == "monolingualtext":
            return value["text"]
        elif value_type == "time":
            return value["time"]
        elif value_type == "quantity":
            return value["amount"]
        return None


def _source_name(source):
    return getattr(source, "name", "<stream>")


def stream_entities(dump_source, parser=None, report=None):
    """
    Return an iterator over the `RawEntity` objects in the binary
    stream `dump_source`, in file order.

    Malformed lines are skipped and counted in `report` (a
    `collections.Counter`) under "malformed_lines"; non-item documents
    are counted under "ignored_lines". A source that can't be read
    raises an `IngestError`.
    """
    if parser is None:
        parser = DumpParser()
    if report is None:
        report = collections.Counter()
    source_name = _source_name(dump_source)
    with streetperson.error.source_error_to_ingest_error("ingest-kg",
                                                         source_name):
        for line_number, line in enumerate(dump_source, 1):
            if parser.ignores_line(line):
                continue
            try:
                entity = parser.parse_line(line)
            except streetperson.error.ParserError as exc:
                report["malformed_lines"] += 1
                logger.debug("%s:%d: skipped: %s", source_name, line_number,
                             exc.strerror)
                continue
            if entity is None:
                report["ignored_lines"] += 1
                continue
            report["entities"] += 1
            yield entity
    if report["malformed_lines"]:
        logger.warning("%s: skipped %d malformed lines", source_name,
                       report["malformed_lines"])


#
# Extraction
#
def _label(raw, language, fallback_language):
    return (raw.labels.get(language) or
            raw.labels.get(fallback_language) or "")


def _unique(values):
    """Return `values` without duplicates, keeping the first occurrence."""
    return list(dict.fromkeys(values))


def _is_stop_token(token, stop_tokens):
    return (token.casefold() in stop_tokens or
            bool(_roman_numeral_regex.match(token)))


def split_name(full_name, stop_tokens=None):
    """
    Return a pair `(first_names, last_names)` derived from `full_name`
    by splitting it on whitespace.

    The first token is a first name, the last token the last name and
    the tokens in between additional given names. Particles and
    regnal numbers ("von", "I.") are neither last names nor given
    names, so "Friedrich Wilhelm I." gives (["Friedrich", "Wilhelm"],
    []).
    """
    if stop_tokens is None:
        stop_tokens = default_schema().stop_tokens
    tokens = full_name.split()
    if not tokens:
        return [], []
    first_names = [tokens[0]]
    if len(tokens) == 1:
        return first_names, []
    first_names.extend(token for token in tokens[1:-1]
                       if not _is_stop_token(token, stop_tokens))
    if _is_stop_token(tokens[-1], stop_tokens):
        last_names = []
    else:
        last_names = [tokens[-1]]
    return _unique(first_names), last_names


def extract_person(raw, language="de", schema=None, name_labels=None):
    """
    Return a `PersonRecord` for `raw` if it's an instance of human,
    else `None`.

    The full name is the label in `language`, falling back to the
    fallback language (English). First and last names come from the
    given name and family name claims if `name_labels` (entity id ->
    label) resolves them, else from splitting the full name; middle
    tokens of the full name are always added as given names.
    Occupations merge the occupation and position held claims.
    """
    if schema is None:
        schema = default_schema()
    if schema.human_class not in schema.classes_of(raw):
        return None
    full_name = streetperson.tool.collapse_whitespace(
                  _label(raw, language, schema.fallback_language))
    if not full_name:
        logger.debug("%s: human without usable label", raw.id)
        return None
    split_first_names, split_last_names = split_name(full_name,
                                                     schema.stop_tokens)
    if name_labels is None:
        name_labels = {}
    claimed_first_names = [name_labels[target] for target
                           in raw.targets(schema.given_name)
                           if target in name_labels]
    claimed_last_names = [name_labels[target] for target
                          in raw.targets(schema.family_name)
                          if target in name_labels]
    if claimed_first_names:
        first_names = _unique(claimed_first_names + split_first_names[1:])
    else:
        first_names = split_first_names
    last_names = claimed_last_names or split_last_names
    occupations = _unique(raw.targets(schema.occupation) +
                          raw.targets(schema.position_held))
    locations = []
    for kind, property_id in schema.relations:
        for target in raw.targets(property_id):
            if (kind, target) not in locations:
                locations.append((kind, target))
    return PersonRecord(id=raw.id,
                        full_name=full_name,
                        first_names=first_names,
                        last_names=_unique(last_names),
                        aliases=_unique(streetperson.tool.collapse_whitespace(
                                          alias) for alias
                                        in raw.aliases.get(language, ())),
                        occupations=occupations,
                        locations=locations,
                        link_count=0)


def extract_location(raw, language="de", schema=None):
    """
    Return a `LocationNode` for `raw` if it has located-in claims or is
    an instance of an administrative or geographic class, else `None`.

    Parents are the located-in targets, deduplicated and without the
    entity itself. If there are no located-in claims, the country claim
    is used instead.
    """
    if schema is None:
        schema = default_schema()
    classes = schema.classes_of(raw)
    admin = bool(classes & schema.admin_classes)
    parents = raw.targets(schema.located_in)
    if not parents:
        if not (admin or classes & schema.geographic_classes):
            return None
        parents = raw.targets(schema.country)
    parents = [parent for parent in _unique(parents) if parent != raw.id]
    label = _label(raw, language, schema.fallback_language) or raw.id
    return LocationNode(id=raw.id, label=label, parents=parents,
                        admin=admin)


def extract_named_after(raw, language="de", schema=None):
    """
    Return a pair `(street, targets)` if `raw` is a street with
    "named after" claims, else `None`.

    `street` is a `StreetRecord` whose `osm_id` is the street's entity
    id and whose region is its first located-in target; `targets` are
    the "named after" entity ids. Which target is a person is only
    known after all persons have been read.
    """
    if schema is None:
        schema = default_schema()
    if not schema.classes_of(raw) & schema.street_classes:
        return None
    targets = raw.targets(schema.named_after)
    name = _label(raw, language, schema.fallback_language)
    if not targets or not name:
        return None
    located_in = raw.targets(schema.located_in)
    street = streetperson.osm.StreetRecord(
               osm_id=raw.id, name=name,
               region=located_in[0] if located_in else None)
    return street, targets


def collect_name_labels(entities, language="de", schema=None):
    """
    Return a dictionary mapping the ids of given name and family name
    items among `entities` to their labels.
    """
    if schema is None:
        schema = default_schema()
    name_labels = {}
    for raw in entities:
        if schema.classes_of(raw) & schema.name_classes:
            label = _label(raw, language, schema.fallback_language)
            if label:
                name_labels[raw.id] = label
    return name_labels


#
# Link counts
#
class LinkCountParser(object):
    """Parse lines "<entity id>\\t<count>" of a link count table."""

    def ignores_line(self, line):
        """Return a true value for empty and comment lines."""
        stripped = line.strip()
        return not stripped or stripped.startswith(b"#")

    def parse_line(self, line):
        """
        Return a pair `(entity_id, count)` for `line`.

        If the line doesn't have two fields, or the count isn't a
        non-negative integer, raise a `ParserError`.
        """
        fields = streetperson.tool.as_unicode(line).rstrip("\r\n").split("\t")
        if len(fields) != 2:
            raise streetperson.error.ParserError(
                    "expected 2 fields, got {0:d}".format(len(fields)))
        entity_id, count_string = fields[0].strip(), fields[1].strip()
        if not entity_id:
            raise streetperson.error.ParserError("empty entity id")
        try:
            count = int(count_string)
        except ValueError:
            raise streetperson.error.ParserError(
                    "non-integer count {0!r}".format(count_string))
        if count < 0:
            raise streetperson.error.ParserError(
                    "negative count {0:d}".format(count))
        return entity_id, count


def load_link_counts(table_source, report=None):
    """
    Return a dictionary mapping entity ids to link counts, read from
    the binary stream `table_source` (tab-separated: id, count).

    Duplicate ids keep the maximum count. Malformed lines are skipped
    and counted in `report` under "malformed_link_count_lines".
    """
    if report is None:
        report = collections.Counter()
    parser = LinkCountParser()
    counts = {}
    source_name = _source_name(table_source)
    with streetperson.error.source_error_to_ingest_error("link-counts",
                                                         source_name):
        for line_number, line in enumerate(table_source, 1):
            if parser.ignores_line(line):
                continue
            try:
                entity_id, count = parser.parse_line(line)
            except streetperson.error.ParserError as exc:
                report["malformed_link_count_lines"] += 1
                logger.debug("%s:%d: skipped: %s", source_name, line_number,
                             exc.strerror)
                continue
            if count > counts.get(entity_id, -1):
                counts[entity_id] = count
    if report["malformed_link_count_lines"]:
        logger.warning("%s: skipped %d malformed lines", source_name,
                       report["malformed_link_count_lines"])
    return counts


def apply_link_counts(persons, link_counts):
    """
    Return a list of copies of `persons` with their link counts taken
    from `link_counts`. Persons without an entry get 0.
    """
    return [dataclasses.replace(person,
                                link_count=link_counts.get(person.id, 0))
            for person in persons]


#
# Whole-dump ingestion
#
@dataclasses.dataclass
class Ingestion:
    """Result of `ingest`."""
    persons: typing.List[PersonRecord]
    locations: typing.List[LocationNode]
    ground_truth: list
    report: collections.Counter


def ingest(dump_path, link_counts_path=None, language="de", schema=None):
    """
    Read the dump at `dump_path` (plain or compressed) and return an
    `Ingestion` with persons, locations and "named after" ground truth
    streets.

    The dump is read twice: the first pass collects the labels of
    given name and family name items, the second extracts the records.
    Ground truth streets keep the first "named after" target which is
    a person; streets without one are dropped and counted.
    """
    if schema is None:
        schema = default_schema()
    report = collections.Counter()
    with streetperson.file.open_source(dump_path) as dump_source:
        name_labels = collect_name_labels(
                        stream_entities(dump_source,
                                        report=collections.Counter()),
                        language, schema)
    logger.info("collected %d given/family name labels", len(name_labels))
    persons, locations, named_after = [], [], []
    with streetperson.file.open_source(dump_path) as dump_source:
        for raw in stream_entities(dump_source, report=report):
            person = extract_person(raw, language, schema, name_labels)
            if person is not None:
                persons.append(person)
                continue
            location = extract_location(raw, language, schema)
            if location is not None:
                locations.append(location)
            street = extract_named_after(raw, language, schema)
            if street is not None:
                named_after.append(street)
    if link_counts_path is not None:
        with streetperson.file.open_source(link_counts_path) as table_source:
            link_counts = load_link_counts(table_source, report)
        persons = apply_link_counts(persons, link_counts)
    person_ids = {person.id for person in persons}
    ground_truth = []
    for street, targets in named_after:
        person_targets = [target for target in targets
                          if target in person_ids]
        if person_targets:
            ground_truth.append(dataclasses.replace(
                                  street, etymology_person=person_targets[0]))
        else:
            report["named_after_without_person"] += 1
    report["persons"] = len(persons)
    report["locations"] = len(locations)
    report["ground_truth_streets"] = len(ground_truth)
    logger.info("ingested %d persons, %d locations, %d ground truth streets "
                "(%d malformed lines)", len(persons), len(locations),
                len(ground_truth), report["malformed_lines"])
    return Ingestion(persons, locations, ground_truth, report)
