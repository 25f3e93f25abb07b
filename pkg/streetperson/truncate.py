# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.truncate - strip street affixes from street names

"Wilhelmstraße" becomes "Wilhelm", "Konrad-Adenauer-Straße" becomes
"Konrad Adenauer" and "Am Wilhelm-Busch-Weg" becomes "Wilhelm Busch".

Matching ignores case. At most one suffix and one prefix are removed,
longest match first:

- A suffix matches at the end of the name, glued to the preceding word
  ("Wilhelmstraße"), after a space or hyphen ("Große Straße",
  "Konrad-Adenauer-Straße") or as the whole name.
- A prefix matches only as a separate leading word, i. e. followed by a
  space or hyphen or being the whole remainder. "Amalienstraße" keeps
  its "Am".
"""

import functools
import io
import logging
import os

import streetperson.config
import streetperson.error
import streetperson.tool


__all__ = ["AffixSet", "load_affixes", "default_affixes", "truncate"]

logger = logging.getLogger(__name__)

PREFIX_FILE_NAME = "prefixes.txt"
SUFFIX_FILE_NAME = "suffixes.txt"

# Characters separating an affix from the rest of the name
_separators = " -"


def _ordered_affixes(affixes):
    """
    Return `affixes` without empty strings and case-insensitive
    duplicates, longest first, equal lengths in alphabetical order.

    "straße" and "strasse" stay separate entries although they're
    equal after case folding; they match different text lengths.
    """
    unique = {}
    for affix in affixes:
        affix = streetperson.tool.collapse_whitespace(affix)
        if affix:
            unique.setdefault(affix.lower(), affix)
    return sorted(unique.values(), key=lambda affix: (-len(affix),
                                                      affix.lower()))


class AffixSet(object):
    """Street name prefixes and suffixes, ordered for matching."""

    def __init__(self, prefixes=(), suffixes=()):
        self.prefixes = _ordered_affixes(prefixes)
        self.suffixes = _ordered_affixes(suffixes)
        self._folded_prefixes = [(prefix, prefix.casefold())
                                 for prefix in self.prefixes]
        self._folded_suffixes = [(suffix, suffix.casefold())
                                 for suffix in self.suffixes]

    def strip_suffix(self, text):
        """
        Return `text` without its longest matching suffix, or `text`
        unchanged if no suffix matches.
        """
        for suffix, folded_suffix in self._folded_suffixes:
            length = len(suffix)
            if (len(text) >= length and
                text[-length:].casefold() == folded_suffix):
                return text[:-length].rstrip(_separators)
        return text

    def strip_prefix(self, text):
        """
        Return `text` without its longest matching prefix, or `text`
        unchanged if no prefix matches.
        """
        for prefix, folded_prefix in self._folded_prefixes:
            length = len(prefix)
            if (text[:length].casefold() == folded_prefix and
                (len(text) == length or text[length] in _separators)):
                return text[length:].lstrip(_separators)
        return text

    def __len__(self):
        return len(self.prefixes) + len(self.suffixes)

    def __repr__(self):
        return "<AffixSet {0:d} prefixes, {1:d} suffixes>".format(
                 len(self.prefixes), len(self.suffixes))


def _read_affix_file(path):
    if not os.path.isfile(path):
        raise streetperson.error.UsageError(
                "affix file {0!r} doesn't exist".format(path))
    affixes = []
    with streetperson.error.source_error_to_ingest_error("affixes", path):
        with io.open(path, encoding=streetperson.tool.TEXT_ENCODING) as fobj:
            for line in fobj:
                line = line.strip()
                if line and not line.startswith("#"):
                    affixes.append(line)
    return affixes


def load_affixes(directory):
    """
    Return an `AffixSet` read from the files "prefixes.txt" and
    "suffixes.txt" in `directory`. The files have one affix per line;
    empty lines and lines starting with "#" are ignored.
    """
    affixes = AffixSet(
                _read_affix_file(os.path.join(directory, PREFIX_FILE_NAME)),
                _read_affix_file(os.path.join(directory, SUFFIX_FILE_NAME)))
    logger.debug("loaded %r from %s", affixes, directory)
    return affixes


@functools.lru_cache(maxsize=None)
def default_affixes():
    """Return the `AffixSet` of the packaged affix lists."""
    return load_affixes(streetperson.config.DEFAULT_AFFIX_DIR)


def _hyphens_to_spaces(text):
    return streetperson.tool.collapse_whitespace(text.replace("-", " "))


def truncate(name, affixes=None):
    """
    Return the list of candidate terms for the street name `name`,
    best first.

    The first candidate has suffix and prefix removed, followed by the
    suffix-only and prefix-only forms and the unchanged name. Hyphens
    become spaces, duplicates and empty forms are left out. If the
    fully stripped name is empty (the name consists of affixes only),
    return an empty list.
    """
    if affixes is None:
        affixes = default_affixes()
    name = streetperson.tool.collapse_whitespace(name)
    without_suffix = affixes.strip_suffix(name)
    forms = [affixes.strip_prefix(without_suffix),
             without_suffix,
             affixes.strip_prefix(name),
             name]
    forms = [_hyphens_to_spaces(form) for form in forms]
    if not forms[0]:
        return []
    return [form for form in dict.fromkeys(forms) if form]
