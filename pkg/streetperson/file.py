# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
file.py - input sources, atomic outputs and run manifests
"""

import bz2
import contextlib
import gzip
import hashlib
import io
import logging
import lzma
import os
import tempfile

import orjson

import streetperson.error
import streetperson.version


__all__ = ["open_source", "chunks", "file_digest", "atomic_output",
           "write_manifest", "write_records", "read_records"]

logger = logging.getLogger(__name__)

# Maximum size of a chunk read for hashing, in bytes.
MAX_CHUNK_SIZE = 64 * 1024

# File name suffix for the manifest written next to every output.
MANIFEST_SUFFIX = ".manifest.json"

_openers = {".gz": gzip.open, ".bz2": bz2.open, ".xz": lzma.open}

_record_options = orjson.OPT_SORT_KEYS | orjson.OPT_APPEND_NEWLINE


def open_source(path):
    """
    Return a binary file object for `path`. Files ending in ".gz",
    ".bz2" or ".xz" are decompressed transparently.

    If the file can't be opened, raise an `IngestError`.
    """
    extension = os.path.splitext(path)[1].lower()
    opener = _openers.get(extension, io.open)
    with streetperson.error.source_error_to_ingest_error("open", path):
        return opener(path, "rb")


def chunks(fobj, max_chunk_size=MAX_CHUNK_SIZE):
    """
    Return an iterator which yields the contents of the file object.

    For each iteration, at most `max_chunk_size` bytes are read from
    `fobj` and yielded as a byte string. If the file object is
    exhausted, then don't yield any more data but stop the iteration,
    so the client does _not_ get an empty byte string.
    """
    while True:
        chunk = fobj.read(max_chunk_size)
        if not chunk:
            break
        yield chunk


def file_digest(path):
    """Return the hex SHA-256 digest of the content of file `path`."""
    digest = hashlib.sha256()
    with io.open(path, "rb") as fobj:
        for chunk in chunks(fobj):
            digest.update(chunk)
    return digest.hexdigest()


@contextlib.contextmanager
def atomic_output(path, mode="wb"):
    """
    Return a context manager yielding a file object whose content
    appears under `path` only if the `with` block completes.

    The data is written to a temporary file in the target directory
    and renamed over `path` at the end, so an interrupted run never
    leaves a partially-written file under its final name.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(
                      prefix=".{0}.".format(os.path.basename(path)),
                      suffix=".tmp", dir=directory)
    try:
        with io.open(fd, mode) as fobj:
            yield fobj
        os.replace(temp_path, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.remove(temp_path)
        raise


def manifest_path(output_path):
    """Return the path of the manifest belonging to `output_path`."""
    return output_path + MANIFEST_SUFFIX


def write_manifest(output_path, command, inputs, seed=None, counts=None):
    """
    Write the run manifest for `output_path`.

    `inputs` is an iterable of input file paths; each one is recorded
    with its SHA-256 digest. `counts` is a mapping of stage counters.
    """
    manifest = {
      "output": os.path.basename(output_path),
      "command": command,
      "version": streetperson.version.__version__,
      "seed": seed,
      "inputs": [{"path": input_path, "sha256": file_digest(input_path)}
                 for input_path in sorted(set(inputs))],
      "counts": dict(sorted((counts or {}).items())),
    }
    with atomic_output(manifest_path(output_path)) as fobj:
        fobj.write(orjson.dumps(manifest, option=orjson.OPT_INDENT_2 |
                                                 orjson.OPT_SORT_KEYS))
    logger.debug("wrote manifest for %s", output_path)


def write_records(records, fobj):
    """
    Write the dataclass-like `records` (anything with an `as_dict`
    method) to the binary file object `fobj` as newline-delimited
    JSON. Return the number of records written.
    """
    count = 0
    for record in records:
        fobj.write(orjson.dumps(record.as_dict(), option=_record_options))
        count += 1
    return count


def read_records(path, record_class, stage="read"):
    """
    Return a list of `record_class` instances read from the
    newline-delimited JSON file `path`. `record_class` must have a
    `from_dict` class method.

    A damaged file raises an `IngestError` naming `path`.
    """
    records = []
    with open_source(path) as fobj:
        with streetperson.error.source_error_to_ingest_error(stage, path):
            for line in fobj:
                if not line.strip():
                    continue
                records.append(record_class.from_dict(orjson.loads(line)))
    return records
