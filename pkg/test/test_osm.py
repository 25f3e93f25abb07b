# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

import collections
import io
import random

import orjson
import pytest

import streetperson.error
import streetperson.file
import streetperson.osm

from test import test_base


# Mitte and Berlin as closed boundary ways, three named streets and
# two highways which aren't streets.
OSM_EXTRACT = """\
<?xml version="1.0" encoding="UTF-8"?>
<osm version="0.6" generator="streetperson tests">
  <node id="1" version="1" lat="52.5100" lon="13.3825"/>
  <node id="2" version="1" lat="52.5125" lon="13.3825"/>
  <node id="3" version="1" lat="52.5150" lon="13.3825"/>
  <node id="4" version="1" lat="52.4500" lon="13.3000"/>
  <node id="5" version="1" lat="52.4510" lon="13.3010"/>
  <node id="6" version="1" lat="48.0000" lon="11.0000"/>
  <node id="7" version="1" lat="48.0010" lon="11.0010"/>
  <node id="101" version="1" lat="52.5000" lon="13.3600"/>
  <node id="102" version="1" lat="52.5000" lon="13.4100"/>
  <node id="103" version="1" lat="52.5300" lon="13.4100"/>
  <node id="104" version="1" lat="52.5300" lon="13.3600"/>
  <node id="201" version="1" lat="52.3000" lon="13.0000"/>
  <node id="202" version="1" lat="52.3000" lon="13.8000"/>
  <node id="203" version="1" lat="52.7000" lon="13.8000"/>
  <node id="204" version="1" lat="52.7000" lon="13.0000"/>
  <way id="1" version="1">
    <nd ref="1"/><nd ref="2"/><nd ref="3"/>
    <tag k="highway" v="residential"/>
    <tag k="name" v="Wilhelmstraße"/>
    <tag k="name:etymology:wikidata" v="Q9003"/>
  </way>
  <way id="2" version="1">
    <nd ref="4"/><nd ref="5"/>
    <tag k="highway" v="secondary"/>
    <tag k="name" v="  Hauptstraße "/>
  </way>
  <way id="3" version="1">
    <nd ref="6"/><nd ref="7"/>
    <tag k="highway" v="residential"/>
    <tag k="name" v="Adenauerallee"/>
    <tag k="is_in:city" v="Köln, Nordrhein-Westfalen"/>
    <tag k="name:etymology:wikidata" v="garbage;Q9004"/>
  </way>
  <way id="4" version="1">
    <nd ref="4"/><nd ref="5"/>
    <tag k="highway" v="bus_stop"/>
    <tag k="name" v="Haltestelle"/>
  </way>
  <way id="5" version="1">
    <nd ref="6"/><nd ref="7"/>
    <tag k="highway" v="residential"/>
  </way>
  <way id="10" version="1">
    <nd ref="101"/><nd ref="102"/><nd ref="103"/><nd ref="104"/>
    <nd ref="101"/>
    <tag k="boundary" v="administrative"/>
    <tag k="admin_level" v="10"/>
    <tag k="name" v="Mitte"/>
    <tag k="wikidata" v="Q2013767"/>
  </way>
  <way id="20" version="1">
    <nd ref="201"/><nd ref="202"/><nd ref="203"/><nd ref="204"/>
    <nd ref="201"/>
    <tag k="boundary" v="administrative"/>
    <tag k="admin_level" v="4"/>
    <tag k="name" v="Berlin"/>
    <tag k="wikidata" v="Q64"/>
  </way>
</osm>
"""


def write_extract(tmp_path):
    path = str(tmp_path / "berlin.osm")
    with io.open(path, "w", encoding="utf-8") as fobj:
        fobj.write(OSM_EXTRACT)
    return path


def square(min_lat, min_lon, max_lat, max_lon):
    return [(min_lat, min_lon), (min_lat, max_lon), (max_lat, max_lon),
            (max_lat, min_lon)]


MITTE_BOUNDARY = streetperson.osm.AdminBoundary(
                   "way/10", 10, [square(52.50, 13.36, 52.53, 13.41)],
                   wikidata_id=test_base.MITTE, name="Mitte")
BERLIN_BOUNDARY = streetperson.osm.AdminBoundary(
                    "way/20", 4, [square(52.3, 13.0, 52.7, 13.8)],
                    wikidata_id=test_base.BERLIN, name="Berlin")


class TestAdminBoundary(object):

    def test_rings_are_closed(self):
        assert MITTE_BOUNDARY.polygon[0][0] == MITTE_BOUNDARY.polygon[0][-1]
        assert len(MITTE_BOUNDARY.polygon[0]) == 5
        assert MITTE_BOUNDARY.contains((52.5125, 13.3825))
        assert not MITTE_BOUNDARY.contains((52.45, 13.30))

    def test_degenerate_rings_are_dropped(self):
        boundary = streetperson.osm.AdminBoundary(
                     "relation/1", 8, [[(0.0, 0.0), (1.0, 1.0)],
                                       square(0, 0, 1, 1)])
        assert len(boundary.polygon) == 1


class TestExtractStreets(object):

    def test_extract(self, tmp_path):
        path = write_extract(tmp_path)
        report = collections.Counter()
        streets, boundaries = streetperson.osm.extract_streets(
                                path, report, with_boundaries=True)
        streets = {street.osm_id: street for street in streets}
        assert sorted(streets) == ["way/1", "way/2", "way/3"]
        wilhelmstrasse = streets["way/1"]
        assert wilhelmstrasse.name == "Wilhelmstraße"
        # The middle node is the representative point.
        assert wilhelmstrasse.representative_point == pytest.approx(
                 (52.5125, 13.3825))
        assert wilhelmstrasse.etymology_person == test_base.FRIEDRICH_WILHELM
        assert wilhelmstrasse.chain == []
        assert streets["way/2"].name == "Hauptstraße"
        assert streets["way/2"].etymology_person is None
        assert streets["way/3"].region_name == "Köln"
        assert streets["way/3"].etymology_person == test_base.KONRAD_ADENAUER
        assert report["named_ways"] == 3
        assert report["streets"] == 3
        boundaries = {boundary.osm_relation_id: boundary
                      for boundary in boundaries}
        assert sorted(boundaries) == ["way/10", "way/20"]
        assert boundaries["way/10"].admin_level == 10
        assert boundaries["way/10"].wikidata_id == test_base.MITTE
        assert boundaries["way/20"].name == "Berlin"

    def test_extract_boundaries(self, tmp_path):
        path = write_extract(tmp_path)
        boundaries = streetperson.osm.extract_boundaries(path)
        assert sorted(boundary.wikidata_id for boundary in boundaries) == \
               [test_base.MITTE, test_base.BERLIN]

    def test_missing_file(self, tmp_path):
        with pytest.raises(streetperson.error.IngestError):
            streetperson.osm.extract_streets(str(tmp_path / "missing.pbf"))

    def test_corrupt_file(self, tmp_path):
        path = str(tmp_path / "broken.osm.pbf")
        with io.open(path, "wb") as fobj:
            fobj.write(b"\x00\x01 this isn't a PBF file")
        with pytest.raises(streetperson.error.IngestError):
            streetperson.osm.extract_streets(path)


class TestRegionMapping(object):

    def test_load(self):
        table = io.BytesIO("# name\tid\n"
                           "Köln\tQ365\n"
                           "  BERLIN \tQ64\n"
                           "nowhere\n"
                           "Mitte\tnot an id\n".encode("utf-8"))
        report = collections.Counter()
        mapping = streetperson.osm.load_region_mapping(table, report)
        assert mapping == {"köln": test_base.COLOGNE, "berlin": test_base.BERLIN}
        assert report["malformed_region_mapping_lines"] == 2


class TestAssignChains(object):

    def setup_method(self, method):
        self.dag = test_base.figure_bundle().dag
        self.streets = [
          test_base.street("way/1", "Wilhelmstraße",
                           representative_point=(52.5125, 13.3825)),
          test_base.street("way/2", "Hauptstraße",
                           representative_point=(52.45, 13.30)),
          streetperson.osm.StreetRecord("way/3", "Adenauerallee",
                                        representative_point=(48.0, 11.0),
                                        region_name="Köln"),
        ]

    def test_innermost_boundary(self):
        report = collections.Counter()
        streets = streetperson.osm.assign_chains(
                    self.streets, [BERLIN_BOUNDARY, MITTE_BOUNDARY], self.dag,
                    {"köln": test_base.COLOGNE}, report)
        assert [street.chain for street in streets] == [
                 ["way/1", test_base.MITTE, test_base.BERLIN,
                  test_base.GERMANY],
                 ["way/2", test_base.BERLIN, test_base.GERMANY],
                 ["way/3", test_base.COLOGNE, test_base.NRW,
                  test_base.GERMANY]]
        assert [street.region for street in streets] == \
               [test_base.MITTE, test_base.BERLIN, test_base.COLOGNE]
        assert all(street.resolved for street in streets)
        assert report["unresolved_streets"] == 0
        # The input streets are unchanged.
        assert self.streets[0].chain == []

    def test_input_order(self):
        """Chains don't depend on the order of the input streets."""
        boundaries = [BERLIN_BOUNDARY, MITTE_BOUNDARY]
        mapping = {"köln": test_base.COLOGNE}
        expected = {street.osm_id: street.chain for street
                    in streetperson.osm.assign_chains(
                         self.streets, boundaries, self.dag, mapping)}
        rng = random.Random(5)
        for _ in range(10):
            shuffled = list(self.streets)
            rng.shuffle(shuffled)
            streets = streetperson.osm.assign_chains(
                        shuffled, boundaries[::-1], self.dag, mapping)
            assert [street.osm_id for street in streets] == \
                   [street.osm_id for street in shuffled]
            assert {street.osm_id: street.chain for street in streets} == \
                   expected

    def test_unresolved(self):
        report = collections.Counter()
        streets = streetperson.osm.assign_chains(
                    self.streets, [MITTE_BOUNDARY], self.dag, report=report)
        assert streets[1].chain == ["way/2"]
        assert not streets[1].resolved
        assert streets[2].chain == ["way/3"]
        assert report["unresolved_streets"] == 2

    def test_boundary_name_mapping(self):
        """Boundaries without `wikidata` tag are mapped by name."""
        boundary = streetperson.osm.AdminBoundary(
                     "relation/5", 10, [square(52.50, 13.36, 52.53, 13.41)],
                     name="MITTE")
        streets = streetperson.osm.assign_chains(
                    self.streets[:1], [boundary], self.dag,
                    {"mitte": test_base.MITTE})
        assert streets[0].region == test_base.MITTE

    def test_prefer_known_region(self):
        """
        An inner boundary whose id isn't a known location loses against
        an outer one which is known.
        """
        unknown = streetperson.osm.AdminBoundary(
                    "way/11", 11, [square(52.51, 13.38, 52.52, 13.39)],
                    wikidata_id="Q777")
        streets = streetperson.osm.assign_chains(
                    self.streets[:1], [unknown, BERLIN_BOUNDARY], self.dag)
        assert streets[0].region == test_base.BERLIN
        streets = streetperson.osm.assign_chains(self.streets[:1], [unknown],
                                                 self.dag)
        assert streets[0].chain == ["way/1", "Q777"]
        assert not streets[0].resolved

    def test_anchor_chain(self):
        street = streetperson.osm.anchor_chain(self.streets[0],
                                               test_base.MITTE, self.dag)
        assert street.chain == ["way/1", test_base.MITTE, test_base.BERLIN,
                                test_base.GERMANY]
        street = streetperson.osm.anchor_chain(self.streets[0], None,
                                               self.dag)
        assert street.chain == ["way/1"]
        assert street.region is None


class TestEtymology(object):

    def test_harvest(self):
        streets = [test_base.street("way/1", "Wilhelmstraße",
                                    etymology_person=test_base.PAUL_WILHELM),
                   test_base.street("way/2", "Lindenstraße",
                                    etymology_person="Q158746"),
                   test_base.street("way/3", "Hauptstraße")]
        report = collections.Counter()
        pairs = streetperson.osm.harvest_etymology(
                  streets, {test_base.PAUL_WILHELM}, report)
        assert [(street.osm_id, person_id) for street, person_id in pairs] == \
               [("way/1", test_base.PAUL_WILHELM)]
        assert report["etymology_not_person"] == 1


class TestStreetRecords(object):

    def test_street_counts(self):
        streets = [test_base.street("way/1", "Wilhelmstraße",
                                    ["way/1", test_base.MITTE]),
                   test_base.street("way/2", "wilhelmstraße",
                                    ["way/2", test_base.MITTE]),
                   test_base.street("way/3", "Wilhelmstraße",
                                    ["way/3", test_base.COLOGNE])]
        assert streetperson.osm.street_counts(streets) == \
               {"ways": 3, "streets": 2}

    def test_write_and_read(self, tmp_path):
        streets = [test_base.wilhelmstrasse(),
                   streetperson.osm.StreetRecord("way/3", "Adenauerallee",
                                                 region_name="Köln")]
        path = str(tmp_path / "streets.ndjson")
        with streetperson.file.atomic_output(path) as fobj:
            assert streetperson.osm.write_streets(streets, fobj) == 2
        assert streetperson.osm.read_streets(path) == streets

    def test_record_fields(self, tmp_path):
        path = str(tmp_path / "streets.ndjson")
        with streetperson.file.atomic_output(path) as fobj:
            streetperson.osm.write_streets([test_base.wilhelmstrasse()], fobj)
        with open(path, "rb") as fobj:
            record = orjson.loads(fobj.readline())
        assert sorted(record) == ["chain", "etymology_person", "name",
                                  "osm_id", "region", "region_name",
                                  "representative_point", "resolved"]
        assert record["representative_point"] == [52.5125, 13.3825]
