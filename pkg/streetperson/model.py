# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
streetperson.model - training data, classifier and street linking

The classifier is an L2-regularized logistic regression over the 30
standardized pair features, fit by full-batch gradient descent. For a
street, every candidate is scored and the most probable one is linked
if its probability reaches the model's threshold.
"""

import collections
import dataclasses
import logging
import multiprocessing
import typing

import numpy as np
import orjson

import streetperson.candidates
import streetperson.config
import streetperson.error
import streetperson.features
import streetperson.file


__all__ = ["LabeledPair", "LinkDecision", "LinkOutcome", "Model",
           "assemble_training_set", "loss_and_gradient", "train",
           "select_candidate", "link_street", "ModelLinker", "link_streets",
           "save_model", "load_model"]

logger = logging.getLogger(__name__)

MODEL_FORMAT = "streetperson-model"
MODEL_FORMAT_VERSION = 1

# Maximum number of negatives per positive street
DEFAULT_NEGATIVES = 50

# Standard deviation of the initial weights
INITIAL_WEIGHT_SCALE = 0.01

_largest_probability = np.nextafter(1.0, 0.0)
_smallest_probability = np.finfo(np.float64).tiny


@dataclasses.dataclass(frozen=True)
class LabeledPair:
    street_id: str
    person_id: str
    features: streetperson.features.FeatureVector
    # 1 if the street is named after the person, else 0
    label: int


@dataclasses.dataclass(frozen=True)
class LinkDecision:
    """
    The person a street is linked to. `probability` is `None` for
    decisions not made by the classifier (the link count baseline).
    """
    street_id: str
    person_id: str
    probability: typing.Optional[float]


@dataclasses.dataclass(frozen=True)
class LinkOutcome:
    """Result of linking one street."""
    street: object
    candidate_count: int
    decision: typing.Optional[LinkDecision]


def assemble_training_set(positives, bundle, affixes, vocabulary,
                          k=DEFAULT_NEGATIVES, report=None):
    """
    Return a list of `LabeledPair`s for the ground truth `positives`,
    a sequence of `(street, person_id)` pairs.

    Each positive street contributes one label 1 pair for its person
    and up to `k` label 0 pairs for its other candidates, those with
    the highest link counts first (equal counts by id). Streets
    without candidates are left out and counted in `report` under
    "positives_without_candidates"; if the candidates miss the true
    person, the positive pair is kept and counted under
    "positives_not_retrieved".
    """
    if k < 1:
        raise streetperson.error.PreconditionError(
                "number of negatives per street must be at least 1, "
                "got {0!r}".format(k))
    if report is None:
        report = collections.Counter()
    pairs = []
    for street, person_id in positives:
        candidate_set = streetperson.candidates.retrieve(street, bundle,
                                                         affixes)
        if not candidate_set.candidates:
            report["positives_without_candidates"] += 1
            logger.debug("%s (%s): no candidates for term %r",
                         street.osm_id, street.name, candidate_set.term_used)
            continue
        if person_id not in candidate_set.candidates:
            report["positives_not_retrieved"] += 1
            logger.debug("%s (%s): %s not among the candidates",
                         street.osm_id, street.name, person_id)
        pairs.append(LabeledPair(
                       street.osm_id, person_id,
                       streetperson.features.extract_features(
                         street, person_id, bundle, vocabulary, affixes),
                       1))
        negatives = streetperson.candidates.by_link_count(
                      candidate_set.candidates - {person_id}, bundle)[:k]
        for negative_id in negatives:
            pairs.append(LabeledPair(
                           street.osm_id, negative_id,
                           streetperson.features.extract_features(
                             street, negative_id, bundle, vocabulary,
                             affixes),
                           0))
    if report["positives_without_candidates"]:
        logger.warning("%d ground truth streets have no candidates",
                       report["positives_without_candidates"])
    report["training_pairs"] = len(pairs)
    logger.info("assembled %d training pairs", len(pairs))
    return pairs


#
# Logistic regression
#
def sigmoid(scores):
    """
    Return the logistic function of `scores`, clipped to the open
    interval (0, 1).
    """
    scores = np.asarray(scores, dtype=np.float64)
    probabilities = np.exp(-np.logaddexp(0.0, -scores))
    return np.clip(probabilities, _smallest_probability, _largest_probability)


def loss_and_gradient(weights, bias, matrix, labels, l2):
    """
    Return `(loss, weight_gradient, bias_gradient)` for the mean
    cross-entropy of the standardized feature `matrix` against the 0/1
    `labels` plus `l2 / 2 * |weights|**2`. The bias isn't regularized.
    """
    scores = matrix @ weights + bias
    # log(1 + exp(z)) - y * z is the cross-entropy in terms of the score.
    loss = (np.mean(np.logaddexp(0.0, scores) - labels * scores) +
            0.5 * l2 * float(weights @ weights))
    residuals = sigmoid(scores) - labels
    weight_gradient = matrix.T @ residuals / len(labels) + l2 * weights
    bias_gradient = float(np.mean(residuals))
    return float(loss), weight_gradient, bias_gradient


class Model(object):
    """
    A trained street-to-person classifier.

    Feature vectors are standardized with the training means and
    standard deviations before the linear score is computed.
    """

    def __init__(self, weights, bias, feature_means, feature_stds,
                 vocabulary, threshold=0.5, hyperparameters=None):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = float(bias)
        self.feature_means = np.asarray(feature_means, dtype=np.float64)
        self.feature_stds = np.asarray(feature_stds, dtype=np.float64)
        self.vocabulary = vocabulary
        self.threshold = float(threshold)
        if hyperparameters is None:
            hyperparameters = streetperson.config.Hyperparameters()
        self.hyperparameters = hyperparameters
        # Filled by `train`, not stored with the model
        self.loss_history = []

    def standardize(self, matrix):
        return (np.asarray(matrix, dtype=np.float64) - self.feature_means) / \
               self.feature_stds

    def probabilities(self, vectors):
        """
        Return an array with the probability of each `FeatureVector` in
        `vectors` that its street is named after its person.
        """
        if not vectors:
            return np.zeros(0)
        matrix = np.array([vector.to_list() for vector in vectors],
                          dtype=np.float64)
        return sigmoid(self.standardize(matrix) @ self.weights + self.bias)

    def probability(self, vector):
        return float(self.probabilities([vector])[0])


def _feature_matrix(pairs):
    matrix = np.array([pair.features.to_list() for pair in pairs],
                      dtype=np.float64)
    labels = np.array([pair.label for pair in pairs], dtype=np.float64)
    return matrix, labels


def train(pairs, vocabulary, hyperparameters=None, threshold=0.5):
    """
    Return a `Model` trained on the `LabeledPair`s `pairs`.

    The result only depends on the pairs, their order and the
    hyperparameters (including the seed). If the pairs don't contain
    both labels, raise `TrainingError`.
    """
    if hyperparameters is None:
        hyperparameters = streetperson.config.Hyperparameters()
    pairs = list(pairs)
    labels_present = {pair.label for pair in pairs}
    if labels_present != {0, 1}:
        raise streetperson.error.TrainingError(
                "training pairs need both labels, got {0}".format(
                  sorted(labels_present) or "no pairs"))
    matrix, labels = _feature_matrix(pairs)
    feature_means = matrix.mean(axis=0)
    feature_stds = matrix.std(axis=0)
    # Constant features stay at 0 after centering.
    feature_stds[feature_stds == 0.0] = 1.0
    standardized = (matrix - feature_means) / feature_stds
    rng = np.random.default_rng(hyperparameters.seed)
    weights = rng.normal(0.0, INITIAL_WEIGHT_SCALE, size=matrix.shape[1])
    bias = 0.0
    loss_history = []
    for _ in range(hyperparameters.epochs):
        loss, weight_gradient, bias_gradient = loss_and_gradient(
          weights, bias, standardized, labels, hyperparameters.l2)
        loss_history.append(loss)
        weights = weights - hyperparameters.learning_rate * weight_gradient
        bias = bias - hyperparameters.learning_rate * bias_gradient
    final_loss = loss_and_gradient(weights, bias, standardized, labels,
                                   hyperparameters.l2)[0]
    loss_history.append(final_loss)
    logger.info("trained on %d pairs (%d positive), final loss %.6f",
                len(pairs), int(labels.sum()), final_loss)
    model = Model(weights, bias, feature_means, feature_stds, vocabulary,
                  threshold, hyperparameters)
    model.loss_history = loss_history
    return model


#
# Linking
#
def select_candidate(scores, bundle):
    """
    Return the person id with the highest score in `scores` (person id
    -> score). Equal scores go to the higher link count, then to the
    smaller id.
    """
    return min(scores, key=lambda person_id: (-scores[person_id],
                                              -bundle.link_count(person_id),
                                              person_id))


def link_street(street, model, bundle, affixes=None):
    """
    Return the `LinkDecision` for `street`, or `None` if it has no
    candidates or no candidate reaches the model threshold.
    """
    return ModelLinker(model, bundle, affixes)(street).decision


class ModelLinker(object):
    """Link streets with a trained `Model`."""

    def __init__(self, model, bundle, affixes=None):
        self.model = model
        self.bundle = bundle
        self.affixes = affixes

    def __call__(self, street):
        """Return the `LinkOutcome` for `street`."""
        candidate_set = streetperson.candidates.retrieve(
                          street, self.bundle, self.affixes)
        if not candidate_set.candidates:
            return LinkOutcome(street, 0, None)
        person_ids = sorted(candidate_set.candidates)
        vectors = [streetperson.features.extract_features(
                     street, person_id, self.bundle, self.model.vocabulary,
                     self.affixes)
                   for person_id in person_ids]
        probabilities = self.model.probabilities(vectors)
        scores = {person_id: float(probability) for person_id, probability
                  in zip(person_ids, probabilities)}
        best = select_candidate(scores, self.bundle)
        decision = None
        if scores[best] >= self.model.threshold:
            decision = LinkDecision(street.osm_id, best, scores[best])
        return LinkOutcome(street, len(person_ids), decision)


# Linker of the worker processes, set by `_init_worker`
_worker_linker = None


def _init_worker(linker):
    global _worker_linker
    _worker_linker = linker


def _link_in_worker(street):
    return _worker_linker(street)


def link_streets(streets, linker, threads=1):
    """
    Return a list with the `LinkOutcome` of `linker` for each of
    `streets`, in input order. With `threads` > 1, streets are linked
    by that many worker processes.
    """
    streets = list(streets)
    if threads <= 1 or len(streets) < 2:
        outcomes = [linker(street) for street in streets]
    else:
        chunk_size = max(1, len(streets) // (threads * 4))
        with multiprocessing.Pool(threads, initializer=_init_worker,
                                  initargs=(linker,)) as pool:
            outcomes = list(pool.imap(_link_in_worker, streets, chunk_size))
    linked = sum(1 for outcome in outcomes if outcome.decision is not None)
    logger.info("linked %d of %d streets", linked, len(outcomes))
    return outcomes


#
# Persistence
#
def save_model(model, path):
    """
    Write `model` to `path` as a JSON document. Equal models give
    byte-identical files.
    """
    document = {
      "format": MODEL_FORMAT,
      "format_version": MODEL_FORMAT_VERSION,
      "feature_names": list(streetperson.features.FEATURE_NAMES),
      "weights": model.weights.tolist(),
      "bias": model.bias,
      "feature_means": model.feature_means.tolist(),
      "feature_stds": model.feature_stds.tolist(),
      "vocabulary": list(model.vocabulary.occupations),
      "threshold": model.threshold,
      "hyperparameters": model.hyperparameters.as_dict(),
    }
    with streetperson.file.atomic_output(path) as fobj:
        fobj.write(orjson.dumps(document, option=orjson.OPT_INDENT_2 |
                                                 orjson.OPT_SORT_KEYS))
    logger.info("saved model to %s", path)


def load_model(path):
    """
    Return the `Model` stored at `path`.

    Raise `FormatVersionError` for another format version and
    `FormatError` for a missing, empty or corrupt file.
    """
    with streetperson.error.source_error_to_format_error("load-model", path):
        with open(path, "rb") as fobj:
            document = orjson.loads(fobj.read())
        if (not isinstance(document, dict) or
            document.get("format") != MODEL_FORMAT):
            raise streetperson.error.FormatError(
                    "{0!r} isn't a model file".format(path))
        if document.get("format_version") != MODEL_FORMAT_VERSION:
            raise streetperson.error.FormatVersionError(
                    "model {0!r} has format version {1!r}, expected "
                    "{2:d}".format(path, document.get("format_version"),
                                   MODEL_FORMAT_VERSION))
        feature_count = len(streetperson.features.FEATURE_NAMES)
        for key in ("weights", "feature_means", "feature_stds"):
            if len(document[key]) != feature_count:
                raise streetperson.error.FormatError(
                        "model {0!r}: {1} has {2:d} entries, expected "
                        "{3:d}".format(path, key, len(document[key]),
                                       feature_count))
        if not all(std > 0.0 for std in document["feature_stds"]):
            raise streetperson.error.FormatError(
                    "model {0!r}: non-positive feature standard "
                    "deviation".format(path))
        vocabulary = document["vocabulary"]
        if (len(set(vocabulary)) != streetperson.features.VOCABULARY_SIZE or
            len(vocabulary) != streetperson.features.VOCABULARY_SIZE):
            raise streetperson.error.FormatError(
                    "model {0!r}: invalid occupation vocabulary".format(path))
        model = Model(document["weights"], document["bias"],
                      document["feature_means"], document["feature_stds"],
                      streetperson.features.OccupationVocabulary(vocabulary),
                      document["threshold"],
                      streetperson.config.Hyperparameters.from_dict(
                        document["hyperparameters"]))
    return model
