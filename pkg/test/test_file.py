# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

import bz2
import gzip
import io
import lzma
import os

import orjson
import pytest

import streetperson.error
import streetperson.file
import streetperson.wikidata

from test import test_base


class TestOpenSource(object):
    """Test transparent decompression of input files."""

    content = "Wilhelmstraße\n".encode("utf-8")

    def test_plain_and_compressed(self, tmp_path):
        for suffix, opener in [("", io.open), (".gz", gzip.open),
                               (".bz2", bz2.open), (".xz", lzma.open)]:
            path = str(tmp_path / ("streets.txt" + suffix))
            with opener(path, "wb") as fobj:
                fobj.write(self.content)
            with streetperson.file.open_source(path) as fobj:
                assert fobj.read() == self.content

    def test_missing_file(self, tmp_path):
        with pytest.raises(streetperson.error.IngestError):
            streetperson.file.open_source(str(tmp_path / "missing.gz"))


class TestChunks(object):

    def test_chunks(self):
        fobj = io.BytesIO(b"abcdefg")
        assert list(streetperson.file.chunks(fobj, 3)) == \
               [b"abc", b"def", b"g"]

    def test_empty(self):
        assert list(streetperson.file.chunks(io.BytesIO(b""))) == []


class TestAtomicOutput(object):

    def test_complete_write(self, tmp_path):
        path = str(tmp_path / "out" / "persons.ndjson")
        with streetperson.file.atomic_output(path) as fobj:
            fobj.write(b"data")
        with io.open(path, "rb") as fobj:
            assert fobj.read() == b"data"
        assert os.listdir(str(tmp_path / "out")) == ["persons.ndjson"]

    def test_interrupted_write(self, tmp_path):
        """An exception in the `with` block leaves no file behind."""
        path = str(tmp_path / "persons.ndjson")
        with pytest.raises(RuntimeError):
            with streetperson.file.atomic_output(path) as fobj:
                fobj.write(b"partial")
                raise RuntimeError("interrupted")
        assert os.listdir(str(tmp_path)) == []

    def test_interrupted_write_keeps_old_file(self, tmp_path):
        path = str(tmp_path / "persons.ndjson")
        with streetperson.file.atomic_output(path) as fobj:
            fobj.write(b"old")
        with pytest.raises(RuntimeError):
            with streetperson.file.atomic_output(path) as fobj:
                fobj.write(b"new")
                raise RuntimeError("interrupted")
        with io.open(path, "rb") as fobj:
            assert fobj.read() == b"old"


class TestManifest(object):

    def test_manifest(self, tmp_path):
        input_path = str(tmp_path / "dump.json")
        with io.open(input_path, "wb") as fobj:
            fobj.write(b"[]\n")
        output_path = str(tmp_path / "persons.ndjson")
        streetperson.file.write_manifest(output_path, "ingest-kg",
                                         [input_path, input_path], seed=7,
                                         counts={"persons": 3})
        manifest_path = streetperson.file.manifest_path(output_path)
        assert manifest_path.endswith("persons.ndjson.manifest.json")
        with io.open(manifest_path, "rb") as fobj:
            manifest = orjson.loads(fobj.read())
        assert manifest["command"] == "ingest-kg"
        assert manifest["seed"] == 7
        assert manifest["counts"] == {"persons": 3}
        assert len(manifest["inputs"]) == 1
        assert manifest["inputs"][0]["sha256"] == \
               streetperson.file.file_digest(input_path)


class TestRecords(object):

    def test_write_and_read(self, tmp_path):
        persons = test_base.figure_persons()
        path = str(tmp_path / "persons.ndjson")
        with streetperson.file.atomic_output(path) as fobj:
            count = streetperson.file.write_records(persons, fobj)
        assert count == len(persons)
        read = streetperson.file.read_records(
                 path, streetperson.wikidata.PersonRecord)
        assert read == persons

    def test_damaged_file(self, tmp_path):
        path = str(tmp_path / "persons.ndjson")
        with io.open(path, "wb") as fobj:
            fobj.write(b'{"id": "Q1"\n')
        with pytest.raises(streetperson.error.IngestError):
            streetperson.file.read_records(
              path, streetperson.wikidata.PersonRecord)
