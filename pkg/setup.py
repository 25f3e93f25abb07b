#! /usr/bin/env python
# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
setup.py - installation script
"""

import io
import os

import setuptools


_name = "streetperson"
_package = "streetperson"
with io.open("VERSION", encoding="utf-8") as _version_file:
    _version = _version_file.read().strip()


doc_files = [os.path.join("doc", name)
             for name in ["README.txt", "contributors.txt"]]


setuptools.setup(
  # Installation data
  name=_name,
  version=_version,
  packages=[_package],
  package_dir={_package: _package},
  package_data={_package: ["data/wikidata.yaml", "data/affixes/*.txt"]},
  data_files=[("doc/streetperson", doc_files)],
  python_requires=">=3.8",
  install_requires=[
    "numpy",
    "orjson",
    "osmium",
    "PyYAML",
  ],
  entry_points={
    "console_scripts": ["streetperson = streetperson.cli:main"],
  },
  # Metadata
  author="streetperson contributors",
  description="Link street names to the persons they are named after",
  keywords="OpenStreetMap, Wikidata, entity linking, street names",
  license="Open source (revised BSD license)",
  long_description="""\
streetperson links streets from OpenStreetMap to the Wikidata persons they
are named after. Street names are truncated to the part that may be a
person name, candidate persons are looked up in an index built from a
Wikidata dump, and a logistic regression classifier over name, occupation
and spatial containment features picks the best candidate.""",
  classifiers=[
    "Development Status :: 4 - Beta",
    "Environment :: Console",
    "Intended Audience :: Science/Research",
    "License :: OSI Approved :: BSD License",
    "Operating System :: OS Independent",
    "Programming Language :: Python",
    "Programming Language :: Python :: 3",
    "Topic :: Scientific/Engineering :: GIS",
    "Topic :: Text Processing :: Linguistic",
    ]
  )
