# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson - link street names to the persons they are named after

Given a street, for example "Wilhelmstraße" in Berlin-Mitte, find the
person from Wikidata the street is named after.

Pipeline
    Wikidata dump (`streetperson.wikidata`) -> index bundle of persons
    and the "located in" hierarchy (`streetperson.index`) -> streets
    from an OSM extract with containment chains (`streetperson.osm`).

    For a street, the name is truncated ("Wilhelmstraße" -> "Wilhelm",
    `streetperson.truncate`) and looked up in the person index
    (`streetperson.candidates`). Each candidate gets 30 features
    (`streetperson.features`) and a logistic regression classifier
    (`streetperson.model`) picks the most probable one.

    # Example
    bundle = streetperson.load_bundle("bundle.stp")
    model = streetperson.load_model("model.stp")
    decision = streetperson.link_street(street, model, bundle)
    if decision is not None:
        print(decision.person_id, decision.probability)

Evaluation
    `streetperson.evaluate` has k-fold cross-validation, the link count
    baseline and per-region statistics.

The command line interface is `streetperson.cli`, installed as the
`streetperson` command.
"""

from streetperson.index    import build_indexes, load_bundle, save_bundle
from streetperson.model    import link_street, load_model, save_model, train
from streetperson.version  import __version__


__all__ = ["build_indexes", "load_bundle", "save_bundle", "link_street",
           "load_model", "save_model", "train", "__version__"]
