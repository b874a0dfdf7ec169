import math

import numpy as np
import pytest

from cape.cooccur import build_graph
from cape.errors import ConfigError, DegenerateDataError, UnknownIdError
from cape.ranking import KeywordRanker
from cape.topics import (KernelConfig, TopicCluster, TopicDetector, cosine,
                         cluster_rank, importance_mass,
                         standardize_over_clusters, standardize_over_words,
                         topic_similarity)

from conftest import corpus_from
from oracles import local_maxima


def detector_for(records, min_df=1, bandwidth=None):
    corpus = corpus_from(records)
    ranker = KeywordRanker(corpus, min_df=min_df)
    scores = ranker.all_scores()
    graph = build_graph(corpus, corpus.vocabulary())
    kernel = KernelConfig(bandwidth=bandwidth)
    return TopicDetector(corpus, graph, scores, kernel)


def two_community_records(bridge=False):
    # Word document sets are deliberately distinct within each community so
    # strict density maxima exist (identical sets would tie everywhere).
    records = [
        {"id": "a1", "text": "alpha beta gamma alpha"},
        {"id": "a2", "text": "alpha beta gamma"},
        {"id": "a3", "text": "alpha gamma"},
        {"id": "a4", "text": "alpha beta"},
        {"id": "b1", "text": "delta epsilon zeta delta"},
        {"id": "b2", "text": "delta epsilon zeta"},
        {"id": "b3", "text": "delta zeta"},
        {"id": "b4", "text": "delta epsilon"},
    ]
    if bridge:
        records.append({"id": "x1", "text": "alpha bridgeword beta"})
        records.append({"id": "x2", "text": "delta bridgeword epsilon"})
    return records


class TestDistance:
    def test_partial_overlap(self):
        # D_i = {d1, d2}, D_j = {d2, d3} -> 1 - 1/3
        det = detector_for([
            {"id": "d1", "text": "aa"},
            {"id": "d2", "text": "aa bb"},
            {"id": "d3", "text": "bb"},
        ])
        assert det.term_distance("aa", "bb") == pytest.approx(2 / 3, rel=1e-12)

    def test_identical_doc_sets(self):
        det = detector_for([
            {"id": "d1", "text": "aa bb"},
            {"id": "d2", "text": "aa bb"},
        ])
        assert det.term_distance("aa", "bb") == 0.0

    def test_disjoint_doc_sets(self):
        det = detector_for([
            {"id": "d1", "text": "aa xx"},
            {"id": "d2", "text": "bb xx"},
        ])
        assert det.term_distance("aa", "bb") == 1.0

    def test_self_distance_zero(self):
        det = detector_for([{"id": "d1", "text": "aa bb"}])
        assert det.term_distance("aa", "aa") == 0.0

    def test_unknown_term(self):
        det = detector_for([{"id": "d1", "text": "aa bb"}])
        with pytest.raises(UnknownIdError):
            det.term_distance("aa", "zzz")

    def test_symmetry(self):
        det = detector_for(two_community_records())
        for s in det.terms:
            for t in det.terms:
                assert det.term_distance(s, t) == det.term_distance(t, s)


class TestImportanceMass:
    def test_normalization(self):
        assert importance_mass([2, 1, 1]).tolist() == [0.5, 0.25, 0.25]

    def test_single_term(self):
        assert importance_mass([7.0]).tolist() == [1.0]

    def test_three_to_one(self):
        assert importance_mass([3, 1]).tolist() == [0.75, 0.25]

    def test_all_zero_is_degenerate(self):
        with pytest.raises(DegenerateDataError):
            importance_mass([0.0, 0.0])


class TestDensity:
    def test_two_word_hand_value(self):
        # masses (0.5, 0.5), d = 0.5, h = 0.5 -> 0.5 + 0.5 * exp(-0.5)
        det = detector_for([
            {"id": "d1", "text": "alpha"},
            {"id": "d2", "text": "alpha bravo bravo bravo bravo"},
        ], bandwidth=0.5)
        assert det.term_distance("alpha", "bravo") == 0.5
        np.testing.assert_allclose(det.masses, [0.5, 0.5])
        expected = 0.5 + 0.5 * math.exp(-0.5)
        assert det.accumulate_density("alpha") == pytest.approx(expected, abs=1e-5)
        assert det.accumulate_density("alpha") == pytest.approx(0.80326, abs=1e-5)

    def test_single_word_vocabulary(self):
        det = detector_for([{"id": "d1", "text": "alpha alpha"}])
        assert det.accumulate_density("alpha") == 1.0

    def test_all_distances_zero(self):
        det = detector_for([{"id": "d1", "text": "alpha bravo charlie"}])
        for term in det.terms:
            assert det.accumulate_density(term) == pytest.approx(1.0, abs=1e-12)

    def test_kernel_profile_properties(self):
        kernel = KernelConfig(bandwidth=0.4)
        assert kernel.profile(0.0, 0.4) == 1.0
        grid = np.linspace(0.0, 1.0, 21)
        values = [kernel.profile(d, 0.4) for d in grid]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_kernel_config_validation(self):
        with pytest.raises(ConfigError):
            KernelConfig(bandwidth=0.0)

    def test_self_weight_excluded(self):
        det_in = detector_for([{"id": "d1", "text": "alpha bravo"}])
        corpus = corpus_from([{"id": "d1", "text": "alpha bravo"}])
        scores = KeywordRanker(corpus, min_df=1).all_scores()
        graph = build_graph(corpus, corpus.vocabulary())
        det_out = TopicDetector(corpus, graph, scores,
                                KernelConfig(self_weight_included=False))
        assert det_out.accumulate_density("alpha") < det_in.accumulate_density("alpha")


class TestMedoids:
    def test_path_graph_local_maximum(self):
        det = detector_for([
            {"id": "d1", "text": "aa bb"},
            {"id": "d2", "text": "bb cc"},
        ])
        order = {t: i for i, t in enumerate(det.terms)}
        fake = np.zeros(len(det.terms))
        fake[order["aa"]], fake[order["bb"]], fake[order["cc"]] = 1.0, 3.0, 2.0
        det.densities = lambda: fake
        assert det.find_medoids() == ["bb"]

    def test_isolated_word_is_medoid(self):
        det = detector_for([
            {"id": "d1", "text": "aa bb"},
            {"id": "d2", "text": "loner"},
        ])
        assert "loner" in det.find_medoids()

    def test_plateau_fallback_promotes_global_max(self):
        # identical stats -> equal densities -> no strict maximum anywhere
        det = detector_for([
            {"id": "d1", "text": "xx yy"},
            {"id": "d2", "text": "xx yy"},
        ])
        assert det.find_medoids() == ["xx"]

    def test_matches_brute_force_scan(self):
        det = detector_for(two_community_records(bridge=True))
        f = det.densities()
        density = {t: float(f[i]) for i, t in enumerate(det.terms)}
        adjacency = {t: det.graph.adjacency.get(t, frozenset())
                     for t in det.terms}
        expected = local_maxima(density, adjacency)
        if expected:
            assert set(det.find_medoids()) == expected

    def test_ordered_by_descending_density(self):
        det = detector_for(two_community_records())
        medoids = det.find_medoids()
        f = det.densities()
        densities = [f[det._index[m]] for m in medoids]
        assert densities == sorted(densities, reverse=True)


class TestInitMembership:
    def test_distance_based_shares(self):
        det = detector_for(two_community_records())
        det.distances = np.zeros((len(det.terms), len(det.terms)))
        i = det._index["gamma"]
        det.distances[det._index["alpha"], i] = 0.2
        det.distances[det._index["delta"], i] = 0.6
        member = det.init_membership(["alpha", "delta"])
        assert member[0, i] == pytest.approx(2 / 3, rel=1e-12)
        assert member[1, i] == pytest.approx(1 / 3, rel=1e-12)

    def test_single_cluster_everything_one(self):
        det = detector_for(two_community_records())
        member = det.init_membership(["alpha"])
        np.testing.assert_allclose(member, 1.0)

    def test_equidistant_word_splits_evenly(self):
        det = detector_for([
            {"id": "d1", "text": "aa mid"},
            {"id": "d2", "text": "bb mid"},
            {"id": "d3", "text": "aa"},
            {"id": "d4", "text": "bb"},
        ])
        member = det.init_membership(["aa", "bb"])
        i = det._index["mid"]
        assert member[0, i] == pytest.approx(0.5)
        assert member[1, i] == pytest.approx(0.5)

    def test_unreachable_word_gets_uniform_row(self):
        det = detector_for([
            {"id": "d1", "text": "aa bb"},
            {"id": "d2", "text": "cc dd"},
        ])
        member = det.init_membership(["aa", "bb"])  # medoids in one community
        i = det._index["cc"]
        assert member[0, i] == pytest.approx(0.5)
        assert member[1, i] == pytest.approx(0.5)

    def test_columns_sum_to_one(self):
        det = detector_for(two_community_records(bridge=True))
        member = det.init_membership(det.find_medoids())
        np.testing.assert_allclose(member.sum(axis=0), 1.0, atol=1e-9)

    def test_no_medoids_rejected(self):
        det = detector_for(two_community_records())
        with pytest.raises(ConfigError):
            det.init_membership([])


class TestClusterDensity:
    def test_single_cluster_reduces_to_kernel_sum(self):
        det = detector_for([
            {"id": "d1", "text": "alpha"},
            {"id": "d2", "text": "alpha bravo bravo bravo bravo"},
        ], bandwidth=0.5)
        member = np.ones((1, 2))
        rank = np.ones(1)
        for term in det.terms:
            expected = float(det.kernel_matrix[:, det._index[term]].sum())
            assert det.cluster_density(member, rank, 0, term) == pytest.approx(expected)

    def test_zero_rank_zeroes_density(self):
        det = detector_for([{"id": "d1", "text": "alpha bravo"}])
        member = np.ones((1, 2))
        assert det.cluster_density(member, np.zeros(1), 0, "alpha") == 0.0

    def test_two_word_hand_value(self):
        det = detector_for([
            {"id": "d1", "text": "alpha"},
            {"id": "d2", "text": "alpha bravo bravo bravo bravo"},
        ], bandwidth=0.5)
        # membership (1, 0.5) against kernel row (1, e^-0.5), rank 1
        member = np.array([[1.0, 0.5]])
        idx = det._index["alpha"]
        value = det.cluster_density(member, np.ones(1), 0, "alpha")
        expected = 1.0 + 0.5 * math.exp(-0.5)
        assert value == pytest.approx(expected, rel=1e-12)
        assert value == pytest.approx(1.30327, abs=1e-5)


class TestUpdateRules:
    def test_standardize_over_words(self):
        T = np.array([[3.0, 1.0]])
        got = standardize_over_words(T, np.full((1, 2), 0.5))
        np.testing.assert_allclose(got, [[0.75, 0.25]])

    def test_standardize_over_words_dead_row_keeps_previous(self):
        T = np.array([[0.0, 0.0], [1.0, 1.0]])
        prev = np.array([[0.9, 0.1], [0.5, 0.5]])
        got = standardize_over_words(T, prev)
        np.testing.assert_allclose(got[0], [0.9, 0.1])
        np.testing.assert_allclose(got[1], [0.5, 0.5])

    def test_cluster_rank_hand_value(self):
        member = np.array([[1.0, 0.0]])
        assert cluster_rank(member, np.array([2.0, 5.0]))[0] == pytest.approx(2.0)

    def test_standardize_over_clusters_symmetric(self):
        wg = np.array([[0.5, 0.5], [0.5, 0.5]])
        got = standardize_over_clusters(wg, np.full((2, 2), 0.25))
        np.testing.assert_allclose(got, 0.5)

    def test_standardize_over_clusters_dead_column(self):
        wg = np.array([[0.0, 1.0], [0.0, 0.0]])
        prev = np.array([[0.3, 0.5], [0.7, 0.5]])
        got = standardize_over_clusters(wg, prev)
        np.testing.assert_allclose(got[:, 0], [0.3, 0.7])
        np.testing.assert_allclose(got[:, 1], [1.0, 0.0])


class TestDetectTopics:
    def test_two_communities_recovered(self):
        det = detector_for(two_community_records())
        clusters, report = det.detect_topics()
        assert report.K == 2
        communities = {
            "alpha": {"alpha", "beta", "gamma"},
            "delta": {"delta", "epsilon", "zeta"},
        }
        for cluster in clusters:
            own = communities[cluster.medoid_term]
            for word in own:
                assert cluster.membership_of_word[word] >= 0.9

    def test_one_word_corpus(self):
        det = detector_for([{"id": "d1", "text": "alpha alpha"}])
        clusters, report = det.detect_topics()
        assert report.K == 1
        assert report.converged
        assert report.iterations_run == 1
        assert clusters[0].membership_of_word["alpha"] == 1.0

    def test_deterministic_rerun(self):
        first, _ = detector_for(two_community_records()).detect_topics()
        second, _ = detector_for(two_community_records()).detect_topics()
        for a, b in zip(first, second):
            assert a.membership_of_word == b.membership_of_word
            assert a.word_given_cluster == b.word_given_cluster
            assert a.rank == b.rank

    def test_probability_conservation_each_iteration(self):
        det = detector_for(two_community_records(bridge=True))
        seen = []

        def hook(iteration, member, word_given, rank):
            seen.append(iteration)
            np.testing.assert_allclose(member.sum(axis=0), 1.0, atol=1e-9)
            np.testing.assert_allclose(word_given.sum(axis=1), 1.0, atol=1e-9)

        det.detect_topics(iteration_hook=hook)
        assert seen

    def test_bridge_word_belongs_to_both(self):
        det = detector_for(two_community_records(bridge=True))
        clusters, report = det.detect_topics()
        bridge_members = sorted(
            (c.membership_of_word["bridgeword"] for c in clusters),
            reverse=True)
        assert bridge_members[0] >= 0.1
        assert bridge_members[1] >= 0.1

    def test_convergence_report(self):
        det = detector_for(two_community_records())
        _, report = det.detect_topics(tolerance=1e-6, max_iterations=200)
        assert report.converged
        assert report.max_delta_final <= 1e-6

    def test_non_convergence_flagged(self):
        det = detector_for(two_community_records(bridge=True))
        _, report = det.detect_topics(tolerance=0.0, max_iterations=1)
        assert report.iterations_run == 1
        if report.max_delta_final > 0:
            assert not report.converged

    def test_invalid_arguments(self):
        det = detector_for(two_community_records())
        with pytest.raises(ConfigError):
            det.detect_topics(tolerance=-1.0)
        with pytest.raises(ConfigError):
            det.detect_topics(max_iterations=0)

    def test_empty_vocabulary_rejected(self):
        corpus = corpus_from([{"id": "d1", "text": "alpha"}])
        graph = build_graph(corpus, set())
        with pytest.raises(DegenerateDataError):
            TopicDetector(corpus, graph, {})


class TestSimilarity:
    def make(self, cid, weights):
        return TopicCluster(cluster_id=cid, medoid_term="m",
                            membership_of_word={}, word_given_cluster=weights,
                            rank=1.0)

    def test_identical_clusters(self):
        a = self.make(0, {"x": 0.6, "y": 0.4})
        assert topic_similarity(a, self.make(1, {"x": 0.6, "y": 0.4})) == \
            pytest.approx(1.0)

    def test_disjoint_supports(self):
        a = self.make(0, {"x": 1.0})
        b = self.make(1, {"y": 1.0})
        assert topic_similarity(a, b) == 0.0

    def test_hand_cosine(self):
        a = self.make(0, {"x": 0.8, "y": 0.2, "z": 0.0})
        b = self.make(1, {"x": 0.2, "y": 0.8, "z": 0.0})
        assert topic_similarity(a, b) == pytest.approx(0.32 / 0.68, rel=1e-4)

    def test_zero_vector_rejected(self):
        a = self.make(0, {"x": 0.0})
        with pytest.raises(DegenerateDataError):
            topic_similarity(a, a)

    def test_cosine_symmetric(self):
        va = {"x": 0.5, "y": 0.7}
        vb = {"x": 0.3, "z": 0.9}
        assert cosine(va, vb) == pytest.approx(cosine(vb, va), rel=1e-12)
