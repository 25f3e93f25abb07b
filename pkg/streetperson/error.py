# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.error - exception classes and converters
"""

import gzip
import lzma
import zlib

import orjson

import streetperson.tool
import streetperson.version


# You _can_ import these with `from streetperson.error import *`, - but
# it's _not_ recommended.
__all__ = [
  "StreetPersonError",
  "InternalError",
  "UsageError",
  "DataError",
  "IngestError",
  "ParserError",
  "FormatError",
  "FormatVersionError",
  "UnknownPersonError",
  "PreconditionError",
  "TrainingError",
]


class StreetPersonError(Exception):
    """General streetperson error class."""

    # Process exit code used by the command line interface.
    exit_code = 3

    def __init__(self, *args, **kwargs):
        original_exception = kwargs.pop("original_exception", None)
        super().__init__(*args)
        if args:
            # May be a byte string if it comes from a decoded input.
            self.strerror = streetperson.tool.as_unicode(args[0])
        elif original_exception is not None:
            self.strerror = str(original_exception)
        else:
            self.strerror = ""
        if original_exception is not None and args:
            self.strerror = "{0}: {1}".format(self.strerror,
                                              original_exception)
        self.original_exception = original_exception

    def __str__(self):
        return "{0}\nDebugging info: {1}".format(
                 self.strerror, streetperson.version.version_info)


# Internal errors are those that have more to do with the inner
# workings of streetperson than with the data it's given.
class InternalError(StreetPersonError):
    """Internal error."""
    exit_code = 3

class UsageError(StreetPersonError):
    """Raised for invalid command lines or missing required paths."""
    exit_code = 1

class DataError(StreetPersonError):
    """Generic error caused by input data."""
    exit_code = 2

class IngestError(DataError):
    """Raised if an input source can't be read at all."""
    pass

class ParserError(DataError):
    """Raised if a single input line can't be parsed."""
    pass

class FormatError(DataError):
    """Raised if a stored bundle or model is corrupt."""
    pass

class FormatVersionError(FormatError):
    """Raised if a stored bundle or model has an unsupported version."""
    pass

class UnknownPersonError(DataError):
    """Raised if a person id isn't present in the index bundle."""

    def __init__(self, person_id):
        super().__init__("unknown person id {0!r}".format(person_id))
        self.person_id = person_id

class PreconditionError(DataError):
    """Raised if an operation's precondition on its input isn't met."""
    pass

class TrainingError(DataError):
    """Raised if a classifier can't be trained on the given pairs."""
    pass


# Exceptions which indicate an unreadable or damaged input.
_SOURCE_ERRORS = (OSError, EOFError, zlib.error, lzma.LZMAError,
                  gzip.BadGzipFile, UnicodeDecodeError)


class SourceErrorConverter(object):
    """
    Context manager to convert exceptions from reading a source into
    `IngestError` or, for stored artifacts, `FormatError`.

    The converted exception names the pipeline stage and the input,
    for example "ingest-kg: can't read 'dump.json.gz'".
    """

    def __init__(self, stage, source_name, error_class=IngestError):
        self.stage = stage
        self.source_name = source_name
        self.error_class = error_class

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if exc_type is None:
            # No exception
            return
        if isinstance(exc_value, StreetPersonError):
            # Already one of ours; keep it.
            return
        # `bz2` raises `OSError` for invalid data, so it's covered.
        if isinstance(exc_value, _SOURCE_ERRORS + (orjson.JSONDecodeError,
                                                   ValueError, KeyError,
                                                   TypeError)):
            raise self.error_class(
                    "{0}: can't read {1!r}".format(self.stage,
                                                   self.source_name),
                    original_exception=exc_value) from exc_value
        # Let anything else through unchanged.
        return


def source_error_to_ingest_error(stage, source_name):
    """
    Return a context manager that converts read errors for
    `source_name` into `IngestError`.
    """
    return SourceErrorConverter(stage, source_name, IngestError)


def source_error_to_format_error(stage, source_name):
    """
    Return a context manager that converts read errors for the stored
    artifact `source_name` into `FormatError`.
    """
    return SourceErrorConverter(stage, source_name, FormatError)
