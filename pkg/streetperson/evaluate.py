# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.evaluate - cross-validation, baseline and statistics

Metric conventions:

- precision = correct / predicted, 0 if nothing was predicted,
- recall = correct / gold streets,
- f1 = 2 * P * R / (P + R), 0 if P + R is 0.

A wrong link lowers precision and recall, a missing link (abstention)
only recall.
"""

import collections
import dataclasses
import io
import logging
import typing

import numpy as np

import streetperson.candidates
import streetperson.error
import streetperson.features
import streetperson.model


__all__ = ["EvalReport", "RegionRow", "score_predictions", "assign_folds",
           "kfold_cv", "pop_rank", "PopRankLinker", "region_stats",
           "format_region_table", "evaluate_etymology", "format_report",
           "write_report_table"]

logger = logging.getLogger(__name__)

CLASSIFIER = "classifier"
POPRANK = "poprank"


@dataclasses.dataclass
class EvalReport:
    """Precision, recall and F1 with the counts they're computed from."""
    precision: float
    recall: float
    f1: float
    streets: int
    predicted: int
    correct: int
    # Per-fold reports of a cross-validation
    folds: typing.List["EvalReport"] = dataclasses.field(default_factory=list)
    # Street id -> predicted person id or `None`
    predictions: typing.Dict[str, typing.Optional[str]] = dataclasses.field(
                                                            default_factory=dict)

    def macro_averages(self):
        """
        Return `(precision, recall, f1)` averaged over the folds, or
        `None` if there are no folds.
        """
        if not self.folds:
            return None
        return (float(np.mean([fold.precision for fold in self.folds])),
                float(np.mean([fold.recall for fold in self.folds])),
                float(np.mean([fold.f1 for fold in self.folds])))


def _metrics(correct, predicted, total):
    precision = correct / predicted if predicted else 0.0
    recall = correct / total if total else 0.0
    if precision + recall > 0.0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    return precision, recall, f1


def score_predictions(predictions, gold):
    """
    Return an `EvalReport` for `predictions` (street id -> person id or
    `None`) against `gold` (street id -> person id). Streets missing
    from `predictions` count as abstentions.

    Raise `PreconditionError` if `gold` is empty or `predictions` has
    streets not in `gold`.
    """
    if not gold:
        raise streetperson.error.PreconditionError(
                "can't score predictions without gold links")
    unknown = set(predictions) - set(gold)
    if unknown:
        raise streetperson.error.PreconditionError(
                "predictions for streets without gold link: {0}".format(
                  ", ".join(sorted(unknown)[:5])))
    predicted = sum(1 for person_id in predictions.values()
                    if person_id is not None)
    correct = sum(1 for street_id, person_id in predictions.items()
                  if person_id is not None and person_id == gold[street_id])
    precision, recall, f1 = _metrics(correct, predicted, len(gold))
    return EvalReport(precision, recall, f1, len(gold), predicted, correct,
                      predictions=dict(predictions))


def assign_folds(street_ids, k, seed):
    """
    Return a dictionary mapping each of `street_ids` to a fold number
    in `range(k)`. The assignment only depends on the set of ids, `k`
    and `seed`; fold sizes differ by at most one.
    """
    ordered = sorted(set(street_ids))
    permutation = np.random.default_rng(seed).permutation(len(ordered))
    return {ordered[index]: position % k
            for position, index in enumerate(permutation.tolist())}


#
# Baseline
#
def pop_rank(street, bundle, affixes=None):
    """
    Return a `LinkDecision` for the candidate of `street` with the
    highest link count (equal counts: smaller id), or `None` if the
    street has no candidates.
    """
    return PopRankLinker(bundle, affixes)(street).decision


class PopRankLinker(object):
    """Link streets to their candidate with the highest link count."""

    def __init__(self, bundle, affixes=None):
        self.bundle = bundle
        self.affixes = affixes

    def __call__(self, street):
        candidate_set = streetperson.candidates.retrieve(
                          street, self.bundle, self.affixes)
        if not candidate_set.candidates:
            return streetperson.model.LinkOutcome(street, 0, None)
        scores = {person_id: float(self.bundle.link_count(person_id))
                  for person_id in candidate_set.candidates}
        best = streetperson.model.select_candidate(scores, self.bundle)
        return streetperson.model.LinkOutcome(
                 street, len(candidate_set.candidates),
                 streetperson.model.LinkDecision(street.osm_id, best, None))


#
# Cross-validation
#
def _predictions(outcomes):
    return {outcome.street.osm_id: (outcome.decision.person_id
                                    if outcome.decision is not None
                                    else None)
            for outcome in outcomes}


def kfold_cv(positives, bundle, affixes=None, k=10, seed=42,
             hyperparameters=None, threshold=0.5,
             negatives=streetperson.model.DEFAULT_NEGATIVES,
             method=CLASSIFIER, threads=1, report=None):
    """
    Return the `EvalReport` of a `k`-fold cross-validation over the
    ground truth `positives`, a sequence of `(street, person_id)`
    pairs with anchored street chains.

    Folds partition the streets. For each fold, the occupation
    vocabulary and the classifier are fit on the other folds and the
    fold's streets are linked. With `method` "poprank", the link count
    baseline is used instead and nothing is trained. Counts are pooled
    over the folds (micro average); fold reports are kept in `folds`.
    """
    if k < 2:
        raise streetperson.error.PreconditionError(
                "cross-validation needs at least 2 folds, got {0!r}".format(k))
    if method not in (CLASSIFIER, POPRANK):
        raise streetperson.error.UsageError(
                "unknown evaluation method {0!r}".format(method))
    if report is None:
        report = collections.Counter()
    # One positive per street; the last one wins.
    by_street = collections.OrderedDict()
    for street, person_id in positives:
        by_street[street.osm_id] = (street, person_id)
    if len(by_street) < k:
        raise streetperson.error.PreconditionError(
                "{0:d} ground truth streets are too few for {1:d} "
                "folds".format(len(by_street), k))
    folds = assign_folds(by_street, k, seed)
    fold_reports = []
    all_predictions = {}
    for fold in range(k):
        training = [pair for street_id, pair in by_street.items()
                    if folds[street_id] != fold]
        held_out = [pair for street_id, pair in by_street.items()
                    if folds[street_id] == fold]
        if method == CLASSIFIER:
            vocabulary = streetperson.features.top_occupations(
                           training, bundle.occupation_index)
            pairs = streetperson.model.assemble_training_set(
                      training, bundle, affixes, vocabulary, negatives,
                      report)
            classifier = streetperson.model.train(pairs, vocabulary,
                                                  hyperparameters, threshold)
            linker = streetperson.model.ModelLinker(classifier, bundle,
                                                    affixes)
        else:
            linker = PopRankLinker(bundle, affixes)
        outcomes = streetperson.model.link_streets(
                     [street for street, _ in held_out], linker, threads)
        predictions = _predictions(outcomes)
        fold_report = score_predictions(
                        predictions, {street.osm_id: person_id
                                      for street, person_id in held_out})
        logger.info("%s fold %d/%d: precision %.4f, recall %.4f, f1 %.4f",
                    method, fold + 1, k, fold_report.precision,
                    fold_report.recall, fold_report.f1)
        fold_reports.append(fold_report)
        all_predictions.update(predictions)
    correct = sum(fold_report.correct for fold_report in fold_reports)
    predicted = sum(fold_report.predicted for fold_report in fold_reports)
    precision, recall, f1 = _metrics(correct, predicted, len(by_street))
    return EvalReport(precision, recall, f1, len(by_street), predicted,
                      correct, folds=fold_reports,
                      predictions=all_predictions)


#
# Region statistics
#
@dataclasses.dataclass
class RegionRow:
    region: str
    streets: int = 0
    streets_with_candidates: int = 0
    candidates: int = 0
    relations: int = 0


ALL_REGIONS = "all"


def region_stats(outcomes, region_ids=()):
    """
    Return a list of `RegionRow`s counting, per region, the streets,
    the streets with candidates, the candidate persons and the linked
    streets among the `LinkOutcome`s `outcomes`.

    A street belongs to a region if the region id is in its chain.
    Without `region_ids`, return a single row "all" for all streets.
    Regions without streets are left out.
    """
    if not region_ids:
        rows = [RegionRow(ALL_REGIONS)]
        selectors = [(rows[0], None)]
    else:
        rows = [RegionRow(region_id) for region_id in region_ids]
        selectors = [(row, row.region) for row in rows]
    for outcome in outcomes:
        chain = set(outcome.street.chain)
        for row, region_id in selectors:
            if region_id is not None and region_id not in chain:
                continue
            row.streets += 1
            if outcome.candidate_count:
                row.streets_with_candidates += 1
                row.candidates += outcome.candidate_count
            if outcome.decision is not None:
                row.relations += 1
    if region_ids:
        rows = [row for row in rows if row.streets]
    return rows


def format_region_table(rows):
    """Return `rows` as TSV text with a header line."""
    lines = ["region\tstreets\tstreets_with_candidates\tcandidates\t"
             "relations"]
    lines.extend("{0}\t{1:d}\t{2:d}\t{3:d}\t{4:d}".format(
                   row.region, row.streets, row.streets_with_candidates,
                   row.candidates, row.relations)
                 for row in rows)
    return "\n".join(lines) + "\n"


#
# Etymology ground truth
#
ETYMOLOGY_KNOWN_PERSONS = "known_persons"
ETYMOLOGY_ALL = "all_references"


def evaluate_etymology(outcomes, person_ids):
    """
    Return a dictionary with two `EvalReport`s for the linked OSM
    streets in `outcomes` against their etymology references: under
    "known_persons" only streets whose reference is in `person_ids`
    (left out if there are none), under "all_references" all streets
    with a reference. Raise `PreconditionError` if no street has one.
    """
    predictions = _predictions(outcomes)
    reports = {}
    gold_all = {outcome.street.osm_id: outcome.street.etymology_person
                for outcome in outcomes
                if outcome.street.etymology_person is not None}
    gold_known = {street_id: person_id for street_id, person_id
                  in gold_all.items() if person_id in person_ids}
    if not gold_all:
        raise streetperson.error.PreconditionError(
                "no linked street has an etymology reference")
    for name, gold in ((ETYMOLOGY_KNOWN_PERSONS, gold_known),
                       (ETYMOLOGY_ALL, gold_all)):
        if not gold:
            continue
        reports[name] = score_predictions(
                          {street_id: predictions[street_id]
                           for street_id in gold}, gold)
    return reports


#
# Reports
#
def format_report(reports):
    """
    Return the plain text report for `reports`, a list of
    `(title, EvalReport)` pairs.
    """
    out = io.StringIO()
    out.write("streetperson evaluation report\n")
    out.write("Wrong links lower precision and recall, "
              "missing links lower recall only.\n")
    for title, report in reports:
        out.write("\n{0}\n".format(title))
        out.write("  precision  {0:.6f}\n".format(report.precision))
        out.write("  recall     {0:.6f}\n".format(report.recall))
        out.write("  f1         {0:.6f}\n".format(report.f1))
        out.write("  streets {0:d}, predicted {1:d}, correct {2:d}\n".format(
                    report.streets, report.predicted, report.correct))
        macro = report.macro_averages()
        if macro is not None:
            out.write("  macro precision {0:.6f}, recall {1:.6f}, "
                      "f1 {2:.6f}\n".format(*macro))
            for number, fold in enumerate(report.folds, 1):
                out.write("  fold {0:2d}: precision {1:.6f}, recall {2:.6f}, "
                          "f1 {3:.6f} ({4:d} streets)\n".format(
                            number, fold.precision, fold.recall, fold.f1,
                            fold.streets))
    return out.getvalue()


def write_report_table(reports, fobj):
    """
    Write `reports` (see `format_report`) as TSV to the binary file
    object `fobj`, one line per report scope (micro, macro, folds).
    """
    lines = ["report\tscope\tprecision\trecall\tf1\tstreets\tpredicted\t"
             "correct"]
    row = "{0}\t{1}\t{2:.6f}\t{3:.6f}\t{4:.6f}\t{5}\t{6}\t{7}"
    for title, report in reports:
        lines.append(row.format(title, "micro", report.precision,
                                report.recall, report.f1, report.streets,
                                report.predicted, report.correct))
        macro = report.macro_averages()
        if macro is not None:
            lines.append(row.format(title, "macro", *macro, "", "", ""))
            for number, fold in enumerate(report.folds, 1):
                lines.append(row.format(title, "fold-{0:d}".format(number),
                                        fold.precision, fold.recall, fold.f1,
                                        fold.streets, fold.predicted,
                                        fold.correct))
    fobj.write(("\n".join(lines) + "\n").encode("utf-8"))
