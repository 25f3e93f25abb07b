# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.cli - the `streetperson` command

Subcommands run the pipeline one stage at a time:

    ingest-kg     Wikidata dump -> persons, locations, ground truth
    build-index   persons, locations -> index bundle
    ingest-osm    OSM extract -> streets with containment chains
    train         ground truth streets -> model
    link          streets -> links.tsv
    evaluate      cross-validation and etymology evaluation reports
    stats         per-region statistics of linked streets
    features      feature table of street-candidate pairs

Every output is written atomically, next to a manifest naming the
inputs with their SHA-256 digests. Exit codes: 0 success, 1 usage
error, 2 data error, 3 internal error.
"""

import argparse
import collections
import logging
import os
import sys

import streetperson.candidates
import streetperson.config
import streetperson.error
import streetperson.evaluate
import streetperson.features
import streetperson.file
import streetperson.index
import streetperson.model
import streetperson.osm
import streetperson.tool
import streetperson.truncate
import streetperson.version
import streetperson.wikidata


__all__ = ["main", "build_parser"]

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s: %(message)s"

PERSONS_FILE_NAME = "persons.jsonl"
LOCATIONS_FILE_NAME = "locations.jsonl"
GROUND_TRUTH_FILE_NAME = "ground_truth.jsonl"

LINKS_HEADER = ("osm_id", "street_name", "person_id", "person_label",
                "probability")


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser raising `UsageError` instead of exiting."""

    def error(self, message):
        raise streetperson.error.UsageError(
                "{0}: {1}".format(self.prog, message))


#
# Helpers
#
class Stage(object):
    """
    Resolved paths and settings of one subcommand run.
    """

    def __init__(self, name, flags, run_config, argv):
        self.name = name
        self.flags = flags
        self.run_config = run_config
        self.command = " ".join(["streetperson"] + list(argv))
        self.inputs = []

    def input_path(self, flag_name, required=True):
        """
        Return the existing input file given by flag `flag_name`,
        resolved against the data directory, or `None` for a missing
        optional flag.
        """
        value = getattr(self.flags, flag_name, None)
        if value is None:
            if required:
                raise streetperson.error.UsageError(
                        "{0}: --{1} is required".format(
                          self.name, flag_name.replace("_", "-")))
            return None
        path = self.run_config.data_path(value)
        if not os.path.isfile(path):
            raise streetperson.error.UsageError(
                    "{0}: input file {1!r} doesn't exist".format(self.name,
                                                                 path))
        self.inputs.append(path)
        return path

    def output_path(self, flag_name):
        return self.run_config.data_path(getattr(self.flags, flag_name))

    def write_manifest(self, output_path, counts=None):
        streetperson.file.write_manifest(
          output_path, self.command, self.inputs,
          seed=self.run_config.seed, counts=counts)

    def affixes(self):
        affix_dir = self.run_config.affix_dir
        for name in (streetperson.truncate.PREFIX_FILE_NAME,
                     streetperson.truncate.SUFFIX_FILE_NAME):
            path = os.path.join(affix_dir, name)
            if os.path.isfile(path):
                self.inputs.append(path)
        return streetperson.truncate.load_affixes(affix_dir)


def _ground_truth(path, bundle, report):
    """
    Return the `(street, person_id)` pairs of the ground truth street
    file `path`. Streets without a chain are anchored at their region.
    """
    streets = []
    for street in streetperson.osm.read_streets(path):
        if not street.chain:
            street = streetperson.osm.anchor_chain(street, street.region,
                                                   bundle.dag)
        streets.append(street)
    return streetperson.osm.harvest_etymology(streets, bundle.persons,
                                              report)


def _write_links(outcomes, bundle, fobj):
    fobj.write(("\t".join(LINKS_HEADER) + "\n").encode("utf-8"))
    count = 0
    for outcome in outcomes:
        decision = outcome.decision
        if decision is None:
            continue
        probability = ("" if decision.probability is None
                       else "{0:.6f}".format(decision.probability))
        fields = [outcome.street.osm_id, outcome.street.name,
                  decision.person_id,
                  bundle.person(decision.person_id).full_name, probability]
        fobj.write(("\t".join(fields) + "\n").encode("utf-8"))
        count += 1
    return count


def _read_links(path):
    """Return a dictionary street id -> person id from a links file."""
    links = {}
    with streetperson.file.open_source(path) as fobj:
        with streetperson.error.source_error_to_ingest_error("read-links",
                                                             path):
            header = streetperson.tool.as_unicode(fobj.readline())
            if tuple(header.rstrip("\r\n").split("\t")) != LINKS_HEADER:
                raise streetperson.error.IngestError(
                        "{0!r} isn't a links file".format(path))
            for line in fobj:
                fields = streetperson.tool.as_unicode(line).rstrip(
                           "\r\n").split("\t")
                if len(fields) == len(LINKS_HEADER):
                    links[fields[0]] = fields[2]
    return links


#
# Subcommands
#
def ingest_kg(stage):
    dump_path = stage.input_path("dump")
    link_counts_path = stage.input_path("link_counts", required=False)
    out_dir = stage.output_path("out")
    config_path = stage.run_config.config_path
    schema = streetperson.wikidata.Schema(
               streetperson.config.load_defaults(config_path))
    if config_path is not None:
        stage.inputs.append(config_path)
    ingestion = streetperson.wikidata.ingest(dump_path, link_counts_path,
                                             stage.run_config.language,
                                             schema)
    counts = dict(ingestion.report)
    for file_name, records in ((PERSONS_FILE_NAME, ingestion.persons),
                               (LOCATIONS_FILE_NAME, ingestion.locations),
                               (GROUND_TRUTH_FILE_NAME,
                                ingestion.ground_truth)):
        output_path = os.path.join(out_dir, file_name)
        with streetperson.file.atomic_output(output_path) as fobj:
            streetperson.file.write_records(records, fobj)
        stage.write_manifest(output_path, counts)


def build_index(stage):
    persons_path = stage.input_path("persons")
    locations_path = stage.input_path("locations")
    out_path = stage.output_path("out")
    persons = streetperson.file.read_records(
                persons_path, streetperson.wikidata.PersonRecord, stage.name)
    locations = streetperson.file.read_records(
                  locations_path, streetperson.wikidata.LocationNode,
                  stage.name)
    bundle = streetperson.index.build_indexes(persons, locations)
    streetperson.index.save_bundle(bundle, out_path)
    report = bundle.report.as_dict()
    report["broken_cycles"] = len(bundle.report.broken_cycles)
    stage.write_manifest(out_path, report)
    sys.stdout.write(bundle.report.summary())


def ingest_osm(stage):
    extract_path = stage.input_path("extract")
    bundle_path = stage.input_path("bundle")
    region_mapping_path = stage.input_path("region_mapping", required=False)
    out_path = stage.output_path("out")
    report = collections.Counter()
    if stage.flags.boundaries in (None, "auto"):
        streets, boundaries = streetperson.osm.extract_streets(
                                extract_path, report, with_boundaries=True)
    else:
        boundaries_path = stage.input_path("boundaries")
        streets = streetperson.osm.extract_streets(extract_path, report)
        boundaries = streetperson.osm.extract_boundaries(boundaries_path,
                                                         report)
    region_mapping = {}
    if region_mapping_path is not None:
        with streetperson.file.open_source(region_mapping_path) as fobj:
            region_mapping = streetperson.osm.load_region_mapping(fobj,
                                                                  report)
    bundle = streetperson.index.load_bundle(bundle_path)
    streets = streetperson.osm.assign_chains(streets, boundaries,
                                             bundle.dag, region_mapping,
                                             report)
    street_counts = streetperson.osm.street_counts(streets)
    logger.info("%d named ways, %d merged streets", street_counts["ways"],
                street_counts["streets"])
    report.update({"merged_streets": street_counts["streets"]})
    with streetperson.file.atomic_output(out_path) as fobj:
        streetperson.osm.write_streets(streets, fobj)
    stage.write_manifest(out_path, dict(report))


def train(stage):
    ground_truth_path = stage.input_path("ground_truth")
    bundle_path = stage.input_path("bundle")
    out_path = stage.output_path("out")
    affixes = stage.affixes()
    bundle = streetperson.index.load_bundle(bundle_path)
    report = collections.Counter()
    positives = _ground_truth(ground_truth_path, bundle, report)
    vocabulary = streetperson.features.top_occupations(
                   positives, bundle.occupation_index)
    pairs = streetperson.model.assemble_training_set(
              positives, bundle, affixes, vocabulary, stage.flags.negatives,
              report)
    model = streetperson.model.train(pairs, vocabulary,
                                     stage.run_config.hyperparameters,
                                     stage.run_config.threshold)
    streetperson.model.save_model(model, out_path)
    report["positives"] = len(positives)
    report["vocabulary_padding"] = vocabulary.padding
    stage.write_manifest(out_path, dict(report))


def link(stage):
    streets_path = stage.input_path("streets")
    model_path = stage.input_path("model")
    bundle_path = stage.input_path("bundle")
    out_path = stage.output_path("out")
    affixes = stage.affixes()
    model = streetperson.model.load_model(model_path)
    if stage.flags.threshold is not None:
        model.threshold = stage.run_config.threshold
    bundle = streetperson.index.load_bundle(bundle_path)
    streets = streetperson.osm.read_streets(streets_path, stage.name)
    outcomes = streetperson.model.link_streets(
                 streets, streetperson.model.ModelLinker(model, bundle,
                                                         affixes),
                 stage.run_config.threads)
    with streetperson.file.atomic_output(out_path) as fobj:
        links = _write_links(outcomes, bundle, fobj)
    stage.write_manifest(out_path, {"streets": len(streets),
                                    "links": links})


def evaluate(stage):
    ground_truth_path = stage.input_path("ground_truth")
    bundle_path = stage.input_path("bundle")
    etymology_path = stage.input_path("etymology", required=False)
    model_path = None
    if etymology_path is not None:
        model_path = stage.input_path("model")
    report_path = stage.output_path("report")
    table_path = os.path.splitext(report_path)[0] + ".tsv"
    if os.path.abspath(table_path) == os.path.abspath(report_path):
        raise streetperson.error.UsageError(
                "{0}: the TSV table would overwrite the report {1!r}; "
                "give the report another suffix".format(stage.name,
                                                        report_path))
    affixes = stage.affixes()
    run_config = stage.run_config
    bundle = streetperson.index.load_bundle(bundle_path)
    counts = collections.Counter()
    positives = _ground_truth(ground_truth_path, bundle, counts)
    methods = [streetperson.evaluate.CLASSIFIER]
    if stage.flags.baseline == streetperson.evaluate.POPRANK:
        methods.append(streetperson.evaluate.POPRANK)
    reports = []
    for method in methods:
        reports.append((
          "{0}: {1:d}-fold cross-validation".format(method,
                                                    stage.flags.folds),
          streetperson.evaluate.kfold_cv(
            positives, bundle, affixes, stage.flags.folds, run_config.seed,
            run_config.hyperparameters, run_config.threshold,
            stage.flags.negatives, method, run_config.threads, counts)))
    if etymology_path is not None:
        model = streetperson.model.load_model(model_path)
        streets = streetperson.osm.read_streets(etymology_path, stage.name)
        streets = [street for street in streets
                   if street.etymology_person is not None]
        linkers = [(streetperson.evaluate.CLASSIFIER,
                    streetperson.model.ModelLinker(model, bundle, affixes))]
        if streetperson.evaluate.POPRANK in methods:
            linkers.append((streetperson.evaluate.POPRANK,
                            streetperson.evaluate.PopRankLinker(bundle,
                                                                affixes)))
        for method, linker in linkers:
            outcomes = streetperson.model.link_streets(streets, linker,
                                                       run_config.threads)
            etymology_reports = streetperson.evaluate.evaluate_etymology(
                                  outcomes, bundle.persons)
            for scope, etymology_report in sorted(etymology_reports.items()):
                reports.append(("{0}: etymology, {1}".format(method, scope),
                                etymology_report))
    with streetperson.file.atomic_output(report_path) as fobj:
        fobj.write(streetperson.evaluate.format_report(reports).encode(
                     "utf-8"))
    with streetperson.file.atomic_output(table_path) as fobj:
        streetperson.evaluate.write_report_table(reports, fobj)
    for output_path in (report_path, table_path):
        stage.write_manifest(output_path, dict(counts))


def stats(stage):
    streets_path = stage.input_path("streets")
    bundle_path = stage.input_path("bundle")
    links_path = stage.input_path("links")
    out_path = stage.output_path("out")
    affixes = stage.affixes()
    bundle = streetperson.index.load_bundle(bundle_path)
    streets = streetperson.osm.read_streets(streets_path, stage.name)
    links = _read_links(links_path)
    outcomes = []
    for street in streets:
        candidate_set = streetperson.candidates.retrieve(street, bundle,
                                                         affixes)
        decision = None
        if street.osm_id in links:
            decision = streetperson.model.LinkDecision(
                         street.osm_id, links[street.osm_id], None)
        outcomes.append(streetperson.model.LinkOutcome(
                          street, len(candidate_set.candidates), decision))
    rows = streetperson.evaluate.region_stats(outcomes,
                                              stage.run_config.region_ids)
    with streetperson.file.atomic_output(out_path) as fobj:
        fobj.write(streetperson.evaluate.format_region_table(rows).encode(
                     "utf-8"))
    counts = streetperson.osm.street_counts(streets)
    counts["regions"] = len(rows)
    stage.write_manifest(out_path, counts)


def features(stage):
    streets_path = stage.input_path("streets")
    bundle_path = stage.input_path("bundle")
    model_path = stage.input_path("model", required=False)
    out_path = stage.output_path("out")
    affixes = stage.affixes()
    bundle = streetperson.index.load_bundle(bundle_path)
    streets = []
    for street in streetperson.osm.read_streets(streets_path, stage.name):
        if not street.chain:
            street = streetperson.osm.anchor_chain(street, street.region,
                                                   bundle.dag)
        streets.append(street)
    if model_path is not None:
        vocabulary = streetperson.model.load_model(model_path).vocabulary
    else:
        vocabulary = streetperson.features.top_occupations(
                       streetperson.osm.harvest_etymology(streets,
                                                          bundle.persons),
                       bundle.occupation_index)

    def rows():
        for street in streets:
            candidate_set = streetperson.candidates.retrieve(street, bundle,
                                                             affixes)
            for person_id in sorted(candidate_set.candidates):
                yield (street.osm_id, person_id,
                       streetperson.features.extract_features(
                         street, person_id, bundle, vocabulary, affixes))

    with streetperson.file.atomic_output(out_path) as fobj:
        row_count = streetperson.features.write_feature_table(rows(), fobj)
    stage.write_manifest(out_path, {"streets": len(streets),
                                    "pairs": row_count})


#
# Argument parsing
#
def _common_parser():
    """Return the parser for the flags all subcommands share."""
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("common options")
    group.add_argument("--config", metavar="PATH",
                       help="YAML file with run settings")
    group.add_argument("--data-dir", dest="data_dir", metavar="DIR",
                       help="directory relative paths are resolved "
                            "against (default: {0} or .)".format(
                              streetperson.config.DATA_DIR_ENV_VARIABLE))
    group.add_argument("--language", help="label language (default: de)")
    group.add_argument("--affix-dir", dest="affix_dir", metavar="DIR",
                       help="directory with prefixes.txt and suffixes.txt")
    group.add_argument("--seed", type=int, help="random seed (default: 42)")
    group.add_argument("--threshold", type=float,
                       help="minimum link probability (default: 0.5)")
    group.add_argument("--regions", dest="region_ids", metavar="IDS",
                       help="comma-separated region entity ids")
    group.add_argument("--threads", type=int, metavar="N",
                       help="number of worker processes for linking")
    group.add_argument("--quiet", action="store_const", const=True,
                       help="log warnings and errors only")
    return parser


def _add_training_options(parser):
    parser.add_argument("--learning-rate", dest="learning_rate", type=float)
    parser.add_argument("--l2", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--negatives", type=int,
                        default=streetperson.model.DEFAULT_NEGATIVES,
                        help="negatives per ground truth street "
                             "(default: %(default)s)")


def build_parser():
    """Return the argument parser of the `streetperson` command."""
    common = _common_parser()
    parser = ArgumentParser(
               prog="streetperson",
               description="Link street names to the persons they are "
                           "named after.",
               epilog="Settings precedence: command line flags > "
                      "{0} > --config file > defaults.".format(
                        streetperson.config.DATA_DIR_ENV_VARIABLE))
    parser.add_argument("--version", action="version",
                        version=streetperson.version.version_info)
    subparsers = parser.add_subparsers(dest="stage", metavar="COMMAND")
    subparsers.required = True

    def add(name, function, help_text):
        subparser = subparsers.add_parser(name, parents=[common],
                                          help=help_text,
                                          description=help_text)
        subparser.set_defaults(function=function)
        return subparser

    sub = add("ingest-kg", ingest_kg,
              "extract persons, locations and ground truth from a "
              "Wikidata dump")
    sub.add_argument("--dump", required=True, metavar="PATH")
    sub.add_argument("--link-counts", dest="link_counts", metavar="PATH",
                     help="TSV table: entity id, link count")
    sub.add_argument("--out", required=True, metavar="DIR")

    sub = add("build-index", build_index, "build the index bundle")
    sub.add_argument("--persons", required=True, metavar="PATH")
    sub.add_argument("--locations", required=True, metavar="PATH")
    sub.add_argument("--out", required=True, metavar="PATH")

    sub = add("ingest-osm", ingest_osm,
              "extract streets from an OSM extract and assign chains")
    sub.add_argument("--extract", required=True, metavar="PATH")
    sub.add_argument("--boundaries", default="auto", metavar="PATH|auto",
                     help="OSM file with admin boundaries, or auto to use "
                          "the extract (default)")
    sub.add_argument("--region-mapping", dest="region_mapping",
                     metavar="PATH", help="TSV table: region name, entity id")
    sub.add_argument("--bundle", required=True, metavar="PATH")
    sub.add_argument("--out", required=True, metavar="PATH")

    sub = add("train", train, "train the street-to-person classifier")
    sub.add_argument("--ground-truth", dest="ground_truth", required=True,
                     metavar="PATH")
    sub.add_argument("--bundle", required=True, metavar="PATH")
    sub.add_argument("--out", required=True, metavar="PATH")
    _add_training_options(sub)

    sub = add("link", link, "link streets to persons")
    sub.add_argument("--streets", required=True, metavar="PATH")
    sub.add_argument("--model", required=True, metavar="PATH")
    sub.add_argument("--bundle", required=True, metavar="PATH")
    sub.add_argument("--out", required=True, metavar="PATH")

    sub = add("evaluate", evaluate, "cross-validate the classifier")
    sub.add_argument("--ground-truth", dest="ground_truth", required=True,
                     metavar="PATH")
    sub.add_argument("--bundle", required=True, metavar="PATH")
    sub.add_argument("--baseline", choices=[streetperson.evaluate.POPRANK])
    sub.add_argument("--folds", type=int, default=10)
    sub.add_argument("--etymology", metavar="PATH",
                     help="OSM streets with etymology tags to score "
                          "(needs --model)")
    sub.add_argument("--model", metavar="PATH")
    sub.add_argument("--report", required=True, metavar="PATH")
    _add_training_options(sub)

    sub = add("stats", stats, "per-region statistics of links")
    sub.add_argument("--streets", required=True, metavar="PATH")
    sub.add_argument("--bundle", required=True, metavar="PATH")
    sub.add_argument("--links", required=True, metavar="PATH")
    sub.add_argument("--out", required=True, metavar="PATH")

    sub = add("features", features, "write the feature table of all "
                                    "street-candidate pairs")
    sub.add_argument("--streets", required=True, metavar="PATH")
    sub.add_argument("--bundle", required=True, metavar="PATH")
    sub.add_argument("--model", metavar="PATH",
                     help="take the occupation vocabulary from this model")
    sub.add_argument("--out", required=True, metavar="PATH")
    return parser


def _configure_logging(quiet):
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO,
                        format=LOG_FORMAT)


def main(argv=None):
    """
    Run the `streetperson` command with the arguments `argv` (default:
    `sys.argv[1:]`) and return the exit code.
    """
    if argv is None:
        argv = sys.argv[1:]
    stage_name = "streetperson"
    try:
        flags = build_parser().parse_args(argv)
        stage_name = flags.stage
        _configure_logging(flags.quiet)
        run_config = streetperson.config.resolve(flags)
        if run_config.threads < 1:
            raise streetperson.error.UsageError(
                    "--threads must be at least 1")
        flags.function(Stage(stage_name, flags, run_config, argv))
    except streetperson.error.StreetPersonError as exc:
        sys.stderr.write("{0}: {1}\n".format(stage_name, exc.strerror))
        return exc.exit_code
    except Exception:
        logger.exception("%s: internal error", stage_name)
        sys.stderr.write("{0}: internal error\nDebugging info: {1}\n".format(
                           stage_name, streetperson.version.version_info))
        return streetperson.error.InternalError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
