# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
tool.py - helper code for strings and names
"""

import re


__all__ = ["as_unicode", "normalize", "collapse_whitespace",
           "name_tokens", "is_entity_id"]


# Encoding of all text inputs (dumps, TSV tables, affix files, OSM
# tags). Undecodable bytes are replaced.
TEXT_ENCODING = "utf-8"

_whitespace_regex = re.compile(r"\s+")

# Separators between name tokens in street names.
_token_separator_regex = re.compile(r"[\s\-]+")

_entity_id_regex = re.compile(r"^Q[1-9][0-9]*$")


def as_unicode(string):
    """
    Return the argument `string` converted to a unicode string if it's
    a byte string. Otherwise just return the string.
    """
    if isinstance(string, (bytes, bytearray)):
        return bytes(string).decode(TEXT_ENCODING, errors="replace")
    else:
        return string


def collapse_whitespace(string):
    """
    Return `string` with leading and trailing whitespace removed and
    inner whitespace runs replaced by a single space.
    """
    return _whitespace_regex.sub(" ", string).strip()


def normalize(term):
    """
    Return the normalized form of `term` as used for all name lookups.

    Normalization is case folding, trimming and collapsing of inner
    whitespace. Umlauts and other diacritics are kept, so "Müller" and
    "Muller" are different terms.
    """
    return collapse_whitespace(as_unicode(term).casefold())


def name_tokens(string):
    """
    Return the list of normalized tokens of `string`. Whitespace and
    hyphens separate tokens.
    """
    normalized = normalize(string)
    return [token for token in _token_separator_regex.split(normalized)
            if token]


def is_entity_id(value):
    """Return `True` if `value` is a Wikidata item id like "Q64"."""
    return isinstance(value, str) and bool(_entity_id_regex.match(value))
