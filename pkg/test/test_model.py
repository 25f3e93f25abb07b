# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

import collections
import dataclasses
import io

import numpy as np
import orjson
import pytest

import streetperson.config
import streetperson.error
import streetperson.features
import streetperson.index
import streetperson.model

from test import test_base


def figure_vocabulary():
    return streetperson.features.OccupationVocabulary(
             [test_base.MONARCH, test_base.WRITER, test_base.PAINTER,
              test_base.POLITICIAN, test_base.ACTOR] +
             ["~unused-{0:02d}".format(number) for number in range(15)])


class TestAssembleTrainingSet(object):

    def test_figure_pairs(self):
        bundle = test_base.figure_bundle()
        positives = [(test_base.wilhelmstrasse(), test_base.FRIEDRICH_WILHELM)]
        report = collections.Counter()
        pairs = streetperson.model.assemble_training_set(
                  positives, bundle, None, figure_vocabulary(), report=report)
        assert [(pair.person_id, pair.label) for pair in pairs] == \
               [(test_base.FRIEDRICH_WILHELM, 1),
                (test_base.WILHELM_BUSCH, 0),
                (test_base.PAUL_WILHELM, 0)]
        assert report["training_pairs"] == 3

    def test_negative_limit(self):
        """Only the `k` negatives with the highest link counts are kept."""
        bundle = test_base.figure_bundle()
        positives = [(test_base.wilhelmstrasse(), test_base.PAUL_WILHELM)]
        pairs = streetperson.model.assemble_training_set(
                  positives, bundle, None, figure_vocabulary(), k=1)
        assert [(pair.person_id, pair.label) for pair in pairs] == \
               [(test_base.PAUL_WILHELM, 1), (test_base.WILHELM_BUSCH, 0)]

    def test_missing_candidates(self):
        bundle = test_base.figure_bundle()
        positives = [(test_base.street("way/2", "Lindenstraße"),
                      test_base.PAUL_WILHELM),
                     (test_base.street("way/3", "Adenauerallee"),
                      test_base.PAUL_WILHELM)]
        report = collections.Counter()
        pairs = streetperson.model.assemble_training_set(
                  positives, bundle, None, figure_vocabulary(), report=report)
        assert report["positives_without_candidates"] == 1
        assert report["positives_not_retrieved"] == 1
        assert [(pair.person_id, pair.label) for pair in pairs] == \
               [(test_base.PAUL_WILHELM, 1), (test_base.KONRAD_ADENAUER, 0)]

    def test_invalid_k(self):
        with pytest.raises(streetperson.error.PreconditionError):
            streetperson.model.assemble_training_set(
              [], test_base.figure_bundle(), None, figure_vocabulary(), k=0)


class TestLogisticRegression(object):

    def test_sigmoid(self):
        probabilities = streetperson.model.sigmoid([-1000.0, 0.0, 1000.0])
        assert probabilities[1] == pytest.approx(0.5)
        assert 0.0 < probabilities[0] < 1e-300
        assert probabilities[2] < 1.0

    def test_gradient_check(self):
        """Analytic gradient against central finite differences."""
        rng = np.random.default_rng(11)
        matrix = rng.normal(size=(10, 30))
        labels = rng.integers(0, 2, size=10).astype(np.float64)
        weights = rng.normal(scale=0.5, size=30)
        bias = 0.3
        l2 = 1e-2
        _, weight_gradient, bias_gradient = \
          streetperson.model.loss_and_gradient(weights, bias, matrix, labels,
                                               l2)
        epsilon = 1e-5

        def loss(weights, bias):
            return streetperson.model.loss_and_gradient(weights, bias,
                                                        matrix, labels, l2)[0]

        numeric = np.zeros(30)
        for index in range(30):
            step = np.zeros(30)
            step[index] = epsilon
            numeric[index] = (loss(weights + step, bias) -
                              loss(weights - step, bias)) / (2 * epsilon)
        numeric_bias = (loss(weights, bias + epsilon) -
                        loss(weights, bias - epsilon)) / (2 * epsilon)
        analytic = np.append(weight_gradient, bias_gradient)
        numeric = np.append(numeric, numeric_bias)
        relative_error = (np.linalg.norm(analytic - numeric) /
                          max(np.linalg.norm(analytic),
                              np.linalg.norm(numeric)))
        assert relative_error <= 1e-6

    def test_training_needs_both_labels(self):
        vector = streetperson.features.FeatureVector()
        pairs = [streetperson.model.LabeledPair("way/1", "Q1", vector, 1)]
        with pytest.raises(streetperson.error.TrainingError):
            streetperson.model.train(pairs, figure_vocabulary())
        with pytest.raises(streetperson.error.TrainingError):
            streetperson.model.train([], figure_vocabulary())

    def test_separable(self):
        pairs = []
        for number in range(10):
            label = number % 2
            vector = streetperson.features.FeatureVector(
                       link_count=float(number), spatial_born=float(label))
            pairs.append(streetperson.model.LabeledPair(
                           "way/{0:d}".format(number), "Q1", vector, label))
        model = streetperson.model.train(pairs, figure_vocabulary())
        probabilities = model.probabilities([pair.features for pair in pairs])
        predicted = [int(probability >= 0.5) for probability in probabilities]
        assert predicted == [pair.label for pair in pairs]

    def test_identical_vectors(self):
        """Without signal, the probability converges to the class prior."""
        vector = streetperson.features.FeatureVector(link_count=3.0,
                                                     spatial_born=0.5)
        pairs = [streetperson.model.LabeledPair("way/{0:d}".format(number),
                                                "Q1", vector,
                                                int(number < 3))
                 for number in range(10)]
        model = streetperson.model.train(pairs, figure_vocabulary())
        assert abs(model.probability(vector) - 0.3) <= 0.05

    def test_loss_decreases(self):
        model = test_base.synthetic_model()
        assert model.loss_history[-1] < model.loss_history[0]
        assert len(model.loss_history) == \
               streetperson.config.Hyperparameters().epochs + 1

    def test_deterministic(self):
        benchmark = test_base.synthetic_benchmark()
        bundle = test_base.synthetic_bundle(with_figure=True)
        vocabulary = streetperson.features.top_occupations(
                       benchmark.positives, bundle.occupation_index)
        pairs = streetperson.model.assemble_training_set(
                  benchmark.positives[:60], bundle, None, vocabulary)
        hyperparameters = streetperson.config.Hyperparameters(epochs=50)
        first = streetperson.model.train(pairs, vocabulary, hyperparameters)
        second = streetperson.model.train(pairs, vocabulary, hyperparameters)
        assert np.array_equal(first.weights, second.weights)
        assert first.bias == second.bias


class TestLinking(object):

    def test_worked_example(self):
        """The trained model links Wilhelmstraße to Friedrich Wilhelm I."""
        model = test_base.synthetic_model()
        bundle = test_base.synthetic_bundle(with_figure=True)
        decision = streetperson.model.link_street(test_base.wilhelmstrasse(),
                                                  model, bundle)
        assert decision is not None
        assert decision.street_id == test_base.WILHELMSTRASSE
        assert decision.person_id == test_base.FRIEDRICH_WILHELM
        assert decision.probability >= model.threshold

    def test_no_candidates(self):
        model = test_base.synthetic_model()
        bundle = test_base.synthetic_bundle(with_figure=True)
        linker = streetperson.model.ModelLinker(model, bundle)
        outcome = linker(test_base.street("way/7", "Lindenstraße"))
        assert outcome.candidate_count == 0
        assert outcome.decision is None

    def test_threshold(self):
        model = test_base.synthetic_model()
        bundle = test_base.synthetic_bundle(with_figure=True)
        model = streetperson.model.Model(model.weights, model.bias,
                                         model.feature_means,
                                         model.feature_stds, model.vocabulary,
                                         threshold=1.0)
        outcome = streetperson.model.ModelLinker(model, bundle)(
                    test_base.wilhelmstrasse())
        assert outcome.candidate_count == 3
        assert outcome.decision is None

    def test_select_candidate_ties(self):
        bundle = test_base.figure_bundle()
        scores = {test_base.PAUL_WILHELM: 0.7, test_base.WILHELM_BUSCH: 0.7,
                  test_base.FRIEDRICH_WILHELM: 0.6}
        # Equal scores go to the higher link count.
        assert streetperson.model.select_candidate(scores, bundle) == \
               test_base.WILHELM_BUSCH
        scores = {"Q2": 0.5, "Q1": 0.5}
        assert streetperson.model.select_candidate(scores, bundle) == "Q1"

    def test_link_streets_in_order(self):
        model = test_base.synthetic_model()
        bundle = test_base.synthetic_bundle(with_figure=True)
        linker = streetperson.model.ModelLinker(model, bundle)
        streets = test_base.synthetic_benchmark().streets[:20]
        sequential = streetperson.model.link_streets(streets, linker)
        parallel = streetperson.model.link_streets(streets, linker, threads=2)
        assert [outcome.street.osm_id for outcome in parallel] == \
               [street.osm_id for street in streets]
        assert [outcome.decision for outcome in parallel] == \
               [outcome.decision for outcome in sequential]

    def test_link_count_scale(self):
        """
        Multiplying all link counts by a constant and retraining
        doesn't change which persons streets are linked to.
        """
        benchmark = test_base.synthetic_benchmark()
        positives = benchmark.positives[:60]
        streets = [street for street, _ in positives]
        hyperparameters = streetperson.config.Hyperparameters(epochs=100)

        def selections(bundle):
            vocabulary = streetperson.features.top_occupations(
                           positives, bundle.occupation_index)
            pairs = streetperson.model.assemble_training_set(
                      positives, bundle, None, vocabulary)
            model = streetperson.model.train(pairs, vocabulary,
                                             hyperparameters, threshold=0.0)
            linker = streetperson.model.ModelLinker(model, bundle)
            return [outcome.decision and outcome.decision.person_id
                    for outcome in streetperson.model.link_streets(streets,
                                                                   linker)]

        persons = [dataclasses.replace(person,
                                       link_count=7 * person.link_count)
                   for person in benchmark.persons]
        scaled = streetperson.index.build_indexes(persons,
                                                  benchmark.locations)
        expected = selections(test_base.synthetic_bundle())
        assert any(expected)
        assert selections(scaled) == expected


class TestPersistence(object):

    def test_round_trip(self, tmp_path):
        model = test_base.synthetic_model()
        path = str(tmp_path / "model.stp")
        streetperson.model.save_model(model, path)
        loaded = streetperson.model.load_model(path)
        assert np.array_equal(loaded.weights, model.weights)
        assert loaded.bias == model.bias
        assert np.array_equal(loaded.feature_means, model.feature_means)
        assert np.array_equal(loaded.feature_stds, model.feature_stds)
        assert loaded.vocabulary == model.vocabulary
        assert loaded.threshold == model.threshold
        assert loaded.hyperparameters == model.hyperparameters

    def test_byte_identical(self, tmp_path):
        model = test_base.synthetic_model()
        first_path = str(tmp_path / "first.stp")
        second_path = str(tmp_path / "second.stp")
        streetperson.model.save_model(model, first_path)
        streetperson.model.save_model(
          streetperson.model.load_model(first_path), second_path)
        with io.open(first_path, "rb") as first, \
             io.open(second_path, "rb") as second:
            assert first.read() == second.read()

    def save_document(self, tmp_path, **changes):
        path = str(tmp_path / "model.stp")
        streetperson.model.save_model(test_base.synthetic_model(), path)
        with io.open(path, "rb") as fobj:
            document = orjson.loads(fobj.read())
        document.update(changes)
        with io.open(path, "wb") as fobj:
            fobj.write(orjson.dumps(document))
        return path

    def test_wrong_version(self, tmp_path):
        path = self.save_document(tmp_path, format_version=2)
        with pytest.raises(streetperson.error.FormatVersionError):
            streetperson.model.load_model(path)

    def test_corrupt_files(self, tmp_path):
        for changes in [{"format": "something"}, {"weights": [0.0]},
                        {"feature_stds": [0.0] * 30},
                        {"vocabulary": ["Q1"] * 20}]:
            path = self.save_document(tmp_path, **changes)
            with pytest.raises(streetperson.error.FormatError):
                streetperson.model.load_model(path)

    def test_truncated_and_missing(self, tmp_path):
        path = str(tmp_path / "model.stp")
        with io.open(path, "wb") as fobj:
            fobj.write(b'{"format": "streetperson-model", "weig')
        with pytest.raises(streetperson.error.FormatError):
            streetperson.model.load_model(path)
        with pytest.raises(streetperson.error.FormatError):
            streetperson.model.load_model(str(tmp_path / "missing.stp"))
