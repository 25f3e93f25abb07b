# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.osm - named streets and admin boundaries from OSM extracts

Streets are the named `highway` ways of an extract. Each one gets a
representative point, the location of the middle node of the way, and
later a containment chain: the street's own id followed by the chain of
the innermost administrative boundary containing the point.
"""

import collections
import dataclasses
import logging
import os
import typing

import osmium

import streetperson.error
import streetperson.file
import streetperson.geometry
import streetperson.tool


__all__ = ["StreetRecord", "AdminBoundary", "StreetHandler",
           "BoundaryHandler", "extract_streets", "extract_boundaries",
           "load_region_mapping", "assign_chains", "anchor_chain",
           "harvest_etymology", "street_counts", "read_streets",
           "write_streets"]

logger = logging.getLogger(__name__)

ETYMOLOGY_KEY = "name:etymology:wikidata"

# Tags naming the enclosing place of a street, in order of preference.
REGION_NAME_KEYS = ("is_in:city", "addr:city", "is_in")

# `highway` values which aren't streets.
_non_street_highways = frozenset(["platform", "bus_stop", "proposed",
                                  "construction", "abandoned", "razed",
                                  "street_lamp", "elevator"])


@dataclasses.dataclass
class StreetRecord:
    """
    A named street.

    `chain` starts with `osm_id` itself once chains are assigned.
    `region` is the innermost region id the street was anchored at.
    `region_name` is the value of an `is_in`-style tag, used if no
    boundary contains the street.
    """
    osm_id: str
    name: str
    representative_point: typing.Optional[typing.Tuple[float, float]] = None
    chain: typing.List[str] = dataclasses.field(default_factory=list)
    etymology_person: typing.Optional[str] = None
    region: typing.Optional[str] = None
    resolved: bool = False
    region_name: typing.Optional[str] = None

    def as_dict(self):
        data = dataclasses.asdict(self)
        if self.representative_point is not None:
            data["representative_point"] = list(
              self.representative_point)
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if data.get("representative_point") is not None:
            data["representative_point"] = tuple(
              data["representative_point"])
        return cls(**data)


def _closed_ring(points):
    """
    Return `points` as a closed ring (first point repeated at the end),
    or `None` if the ring has fewer than four points after closing.
    """
    ring = [tuple(point) for point in points]
    if ring and ring[0] != ring[-1]:
        ring.append(ring[0])
    if len(ring) < 4:
        return None
    return ring


class AdminBoundary(object):
    """
    An administrative boundary polygon.

    Rings are closed on construction; degenerate rings (fewer than four
    points) are dropped.
    """

    def __init__(self, osm_relation_id, admin_level, rings,
                 wikidata_id=None, name=None):
        self.osm_relation_id = osm_relation_id
        self.admin_level = admin_level
        self.polygon = [ring for ring in map(_closed_ring, rings)
                        if ring is not None]
        self.wikidata_id = wikidata_id
        self.name = name
        self.bounding_box = streetperson.geometry.BoundingBox(self.polygon)

    def contains(self, point):
        """Return `True` if `point` (lat, lon) is inside the boundary."""
        return streetperson.geometry.contains_point(
                 self.polygon, point, self.bounding_box)

    def __repr__(self):
        return ("<AdminBoundary {0} level={1:d} wikidata={2}>".format(
                  self.osm_relation_id, self.admin_level, self.wikidata_id))


def _first_entity_id(value):
    """
    Return the first item id in the semicolon-separated tag value
    `value`, or `None`.
    """
    for part in (value or "").split(";"):
        part = part.strip()
        if streetperson.tool.is_entity_id(part):
            return part
    return None


#
# osmium handlers
#
class StreetHandler(osmium.SimpleHandler):
    """Collect `StreetRecord`s for named highway ways."""

    def __init__(self, report=None):
        super().__init__()
        self.streets = []
        self.report = report if report is not None else collections.Counter()

    def way(self, way):
        tags = way.tags
        highway = tags.get("highway")
        if highway is None or highway in _non_street_highways:
            return
        name = streetperson.tool.collapse_whitespace(tags.get("name", ""))
        if not name:
            return
        self.report["named_ways"] += 1
        nodes = way.nodes
        if len(nodes) == 0:
            self.report["ways_without_location"] += 1
            return
        middle = nodes[len(nodes) // 2]
        if not middle.location.valid():
            self.report["ways_without_location"] += 1
            logger.debug("way/%d: middle node %d has no location", way.id,
                         middle.ref)
            return
        region_name = None
        for key in REGION_NAME_KEYS:
            value = tags.get(key)
            if value:
                # "Mitte, Berlin, Deutschland" -> "Mitte"
                region_name = value.split(",")[0].strip() or None
                break
        self.streets.append(StreetRecord(
          osm_id="way/{0:d}".format(way.id),
          name=name,
          representative_point=(middle.location.lat,
                                middle.location.lon),
          etymology_person=_first_entity_id(tags.get(ETYMOLOGY_KEY)),
          region_name=region_name))


class BoundaryHandler(osmium.SimpleHandler):
    """Collect `AdminBoundary`s from assembled areas."""

    def __init__(self, report=None):
        super().__init__()
        self.boundaries = []
        self.report = report if report is not None else collections.Counter()

    def area(self, area):
        tags = area.tags
        if tags.get("boundary") != "administrative":
            return
        try:
            admin_level = int(tags.get("admin_level", ""))
        except ValueError:
            self.report["boundaries_without_level"] += 1
            return
        rings = []
        for outer_ring in area.outer_rings():
            rings.append([(node.location.lat, node.location.lon)
                          for node in outer_ring if node.location.valid()])
            for inner_ring in area.inner_rings(outer_ring):
                rings.append([(node.location.lat, node.location.lon)
                              for node in inner_ring
                              if node.location.valid()])
        kind = "way" if area.from_way() else "relation"
        boundary = AdminBoundary(
                     "{0}/{1:d}".format(kind, area.orig_id()), admin_level,
                     rings, wikidata_id=_first_entity_id(tags.get("wikidata")),
                     name=tags.get("name"))
        if not boundary.polygon:
            self.report["degenerate_boundaries"] += 1
            return
        self.report["boundaries"] += 1
        self.boundaries.append(boundary)


class StreetAndBoundaryHandler(StreetHandler, BoundaryHandler):
    """Collect streets and boundaries in one pass over an extract."""
    pass


def _apply(handler, path, stage):
    if not os.path.isfile(path):
        raise streetperson.error.IngestError(
                "{0}: can't read {1!r}: no such file".format(stage, path))
    try:
        handler.apply_file(path, locations=True)
    except (RuntimeError, OSError) as exc:
        # osmium reports unreadable and corrupt files as `RuntimeError`.
        raise streetperson.error.IngestError(
                "{0}: can't read {1!r}".format(stage, path),
                original_exception=exc) from exc


def _log_extraction(report, path):
    if report["ways_without_location"]:
        logger.warning("%s: skipped %d named ways without node locations",
                       path, report["ways_without_location"])
    logger.info("%s: extracted %d streets from %d named ways, "
                "%d boundaries", path, report["streets"],
                report["named_ways"], report["boundaries"])


def extract_streets(osm_path, report=None, with_boundaries=False):
    """
    Return a list of `StreetRecord`s, chains unassigned, for the named
    highway ways of the OSM extract `osm_path`.

    If `with_boundaries` is true, return a pair `(streets, boundaries)`
    read in the same pass. An unreadable extract raises `IngestError`.
    """
    if report is None:
        report = collections.Counter()
    if with_boundaries:
        handler = StreetAndBoundaryHandler(report)
    else:
        handler = StreetHandler(report)
    _apply(handler, osm_path, "ingest-osm")
    report["streets"] = len(handler.streets)
    _log_extraction(report, osm_path)
    if with_boundaries:
        return handler.streets, handler.boundaries
    return handler.streets


def extract_boundaries(osm_path, report=None):
    """
    Return a list of the `AdminBoundary`s in the OSM extract `osm_path`.
    """
    if report is None:
        report = collections.Counter()
    handler = BoundaryHandler(report)
    _apply(handler, osm_path, "ingest-osm")
    logger.info("%s: read %d admin boundaries", osm_path,
                report["boundaries"])
    return handler.boundaries


def load_region_mapping(table_source, report=None):
    """
    Return a dictionary mapping normalized region names to entity ids,
    read from the two-column TSV binary stream `table_source`.
    Malformed lines are skipped and counted.
    """
    if report is None:
        report = collections.Counter()
    mapping = {}
    source_name = getattr(table_source, "name", "<stream>")
    with streetperson.error.source_error_to_ingest_error("region-mapping",
                                                         source_name):
        for line in table_source:
            text = streetperson.tool.as_unicode(line).rstrip("\r\n")
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            fields = text.split("\t")
            if (len(fields) != 2 or
                not streetperson.tool.is_entity_id(fields[1].strip())):
                report["malformed_region_mapping_lines"] += 1
                continue
            mapping[streetperson.tool.normalize(fields[0])] = \
              fields[1].strip()
    logger.info("read %d region name mappings", len(mapping))
    return mapping


#
# Chain assignment
#
def anchor_chain(street, anchor_id, dag):
    """
    Return a copy of `street` anchored at the region `anchor_id`: its
    chain is the street id followed by the chain of `anchor_id`. If
    `anchor_id` is `None`, the chain is just the street id.

    The street counts as resolved if the anchor is a node of `dag`.
    """
    if anchor_id is None:
        return dataclasses.replace(street, chain=[street.osm_id],
                                   region=None, resolved=False)
    return dataclasses.replace(street,
                               chain=[street.osm_id] + dag.chain_of(anchor_id),
                               region=anchor_id,
                               resolved=anchor_id in dag.nodes)


def _anchor_for(street, ordered_boundaries, dag, region_mapping):
    if street.representative_point is not None:
        fallback = None
        for boundary, anchor_id in ordered_boundaries:
            if boundary.contains(street.representative_point):
                if anchor_id in dag.nodes:
                    return anchor_id
                if fallback is None:
                    fallback = anchor_id
        if fallback is not None:
            return fallback
    if street.region_name:
        return region_mapping.get(
                 streetperson.tool.normalize(street.region_name))
    return None


def assign_chains(streets, boundaries, dag, region_mapping=None,
                  report=None):
    """
    Return copies of `streets` with containment chains.

    Each street is anchored at the innermost boundary (highest admin
    level) containing its representative point, preferring boundaries
    whose entity id is in `dag`. Boundaries without a `wikidata` tag
    get an id from `region_mapping` (normalized name -> id) if
    possible. Streets in no boundary fall back to their `is_in`-style
    region name, then to the chain `[street]`, flagged unresolved.
    """
    if region_mapping is None:
        region_mapping = {}
    if report is None:
        report = collections.Counter()
    ordered_boundaries = []
    for boundary in boundaries:
        anchor_id = boundary.wikidata_id
        if anchor_id is None and boundary.name:
            anchor_id = region_mapping.get(
                          streetperson.tool.normalize(boundary.name))
        if anchor_id is None:
            report["boundaries_without_id"] += 1
            continue
        ordered_boundaries.append((boundary, anchor_id))
    ordered_boundaries.sort(key=lambda item: (-item[0].admin_level,
                                              item[0].osm_relation_id))
    assigned = []
    for street in streets:
        anchor_id = _anchor_for(street, ordered_boundaries, dag,
                                region_mapping)
        street = anchor_chain(street, anchor_id, dag)
        if not street.resolved:
            report["unresolved_streets"] += 1
            logger.debug("%s (%s): no region found", street.osm_id,
                         street.name)
        assigned.append(street)
    if report["unresolved_streets"]:
        logger.warning("%d of %d streets aren't inside a known region",
                       report["unresolved_streets"], len(assigned))
    return assigned


def harvest_etymology(streets, person_ids, report=None):
    """
    Return a list of `(street, person_id)` pairs for the streets with an
    etymology reference. References to entities which aren't in
    `person_ids` (a container of person ids) are dropped and counted in
    `report` under "etymology_not_person".
    """
    if report is None:
        report = collections.Counter()
    pairs = []
    for street in streets:
        if street.etymology_person is None:
            continue
        if street.etymology_person in person_ids:
            pairs.append((street, street.etymology_person))
        else:
            report["etymology_not_person"] += 1
            logger.debug("%s: etymology %s isn't a known person",
                         street.osm_id, street.etymology_person)
    if report["etymology_not_person"]:
        logger.warning("dropped %d etymology references to non-persons",
                       report["etymology_not_person"])
    return pairs


def street_counts(streets):
    """
    Return a dictionary with the number of named ways ("ways") and of
    merged streets, i. e. distinct (name, region) pairs ("streets").
    """
    streets = list(streets)
    merged = {(streetperson.tool.normalize(street.name), street.region)
              for street in streets}
    return {"ways": len(streets), "streets": len(merged)}


def read_streets(path, stage="read-streets"):
    """Return the list of `StreetRecord`s stored in `path`."""
    return streetperson.file.read_records(path, StreetRecord, stage)


def write_streets(streets, fobj):
    """Write `streets` to the binary file object `fobj`."""
    return streetperson.file.write_records(streets, fobj)
