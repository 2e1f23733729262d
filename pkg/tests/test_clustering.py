import itertools
from collections import Counter
from fractions import Fraction
from math import comb

import numpy
import pytest

from ReLatent import Clustering
from ReLatent.Clustering import SimilarityMatrix
from ReLatent.Errors import ClusteringError
from ReLatent.NeighbourhoodTree import build_ntree
from ReLatent.Similarity import combined_similarity, core_similarities


def partitions(n):
    """
    All set partitions of n objects as restricted growth strings.
    """
    def grow(prefix, highest):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for label in range(highest + 2):
            yield from grow(prefix + [label], max(highest, label))
    if n == 0:
        yield ()
        return
    yield from grow([0], 0)


def pair_counting_ari(a, b):
    n = len(a)
    if n < 2:
        return 1.0
    index = sum(comb(count, 2) for count in Counter(zip(a, b)).values())
    sum_a = sum(comb(count, 2) for count in Counter(a).values())
    sum_b = sum(comb(count, 2) for count in Counter(b).values())
    expected = Fraction(sum_a * sum_b, comb(n, 2))
    maximum = Fraction(sum_a + sum_b, 2)
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


def clustering(labels):
    return Clustering.Clustering(tuple(f'o{i}' for i in range(len(labels))), tuple(labels))


def block_matrix(sizes, inner=0.9, outer=0.1):
    n = sum(sizes)
    values = numpy.full((n, n), outer)
    start = 0
    for size in sizes:
        values[start:start + size, start:start + size] = inner
        start += size
    numpy.fill_diagonal(values, 1.0)
    return SimilarityMatrix(tuple(f'o{i}' for i in range(n)), values)


def random_matrix(n, seed):
    rng = numpy.random.default_rng(seed)
    values = rng.random((n, n))
    values = (values + values.T) / 2
    numpy.fill_diagonal(values, 1.0)
    return SimilarityMatrix(tuple(f'o{i}' for i in range(n)), values)


class TestSimilarityMatrix:
    def test_matches_scalar_path(self, toy_kb, uniform_interp):
        persons = toy_kb.entities_of_type('Person')
        trees = [build_ntree(toy_kb, person, 2) for person in persons]
        m = Clustering.similarity_matrix(trees, uniform_interp, toy_kb)
        by_root = {tree.root: tree for tree in trees}
        assert m.objects == tuple(sorted(persons))
        for i, a in enumerate(m.objects):
            assert m.values[i, i] == 1.0
            for j, b in enumerate(m.objects):
                if i != j:
                    expected = combined_similarity(core_similarities(by_root[a], by_root[b], toy_kb), uniform_interp)
                    assert m.values[i, j] == pytest.approx(expected)
        assert numpy.array_equal(m.values, m.values.T)

    def test_order_of_trees(self, toy_kb, edges_interp):
        trees = [build_ntree(toy_kb, entity, 1) for entity in sorted(toy_kb.entities)]
        forward = Clustering.similarity_matrix(trees, edges_interp, toy_kb)
        backward = Clustering.similarity_matrix(trees[::-1], edges_interp, toy_kb)
        assert forward.objects == backward.objects
        assert numpy.array_equal(forward.values, backward.values)

    def test_jobs_do_not_change_result(self, toy_kb, uniform_interp):
        trees = [build_ntree(toy_kb, entity, 2) for entity in toy_kb.entities]
        serial = Clustering.similarity_matrix(trees, uniform_interp, toy_kb, n_jobs=1)
        parallel = Clustering.similarity_matrix(trees, uniform_interp, toy_kb, n_jobs=2)
        assert numpy.array_equal(serial.values, parallel.values)

    def test_single_object(self, toy_kb, edges_interp):
        m = Clustering.similarity_matrix([build_ntree(toy_kb, 's1', 1)], edges_interp, toy_kb)
        assert m.values.tolist() == [[1.0]]

    def test_empty(self, toy_kb, edges_interp):
        with pytest.raises(ClusteringError):
            Clustering.similarity_matrix([], edges_interp, toy_kb)

    def test_shape(self):
        with pytest.raises(ClusteringError):
            SimilarityMatrix(('a', 'b'), numpy.ones((3, 3)))
        with pytest.raises(ClusteringError):
            SimilarityMatrix((), numpy.ones((0, 0)))


class TestCluster:
    def test_two_blocks(self):
        result = Clustering.cluster(block_matrix([3, 4]), 2)
        assert result.labels == (0, 0, 0, 1, 1, 1, 1)
        assert result.members() == [['o0', 'o1', 'o2'], ['o3', 'o4', 'o5', 'o6']]

    def test_toy_persons(self, toy_kb, edges_interp):
        trees = [build_ntree(toy_kb, person, 1) for person in toy_kb.entities_of_type('Person')]
        result = Clustering.cluster(Clustering.similarity_matrix(trees, edges_interp, toy_kb), 2)
        assert result.objects == ('profA', 'profB', 'profC', 's1', 's2', 's3', 's4', 's5')
        assert result.labels == (0, 0, 0, 1, 1, 1, 1, 1)

    @pytest.mark.parametrize("n", [1, 2, 5, 9])
    def test_bounds(self, n):
        m = random_matrix(n, seed=n)
        assert Clustering.cluster(m, 1).labels == (0,) * n
        assert Clustering.cluster(m, n).labels == tuple(range(n))
        for k in range(1, n + 1):
            assert Clustering.cluster(m, k).k == k

    @pytest.mark.parametrize("k", [0, 4])
    def test_invalid_k(self, k):
        with pytest.raises(ClusteringError):
            Clustering.cluster(block_matrix([1, 2]), k)

    def test_permutation_invariant(self):
        m = random_matrix(8, seed=3)
        order = numpy.random.default_rng(4).permutation(8)
        permuted = SimilarityMatrix(tuple(m.objects[i] for i in order), m.values[numpy.ix_(order, order)])
        for k in range(1, 9):
            assert Clustering.cluster(permuted, k) == Clustering.cluster(m, k)

    def test_deterministic(self):
        m = random_matrix(10, seed=5)
        assert Clustering.cluster(m, 3, seed=1) == Clustering.cluster(m, 3, seed=2)

    def test_provenance(self):
        provenance = Clustering.Provenance('edges', 1, 'person', Clustering.INSTANCES)
        assert Clustering.cluster(block_matrix([2, 2]), 2, provenance=provenance).provenance == provenance


class TestSelectClusterCount:
    def test_blocks(self):
        assert Clustering.select_cluster_count(block_matrix([4, 4])) == 2

    @pytest.mark.parametrize("n", [1, 2])
    def test_too_small(self, n):
        assert Clustering.select_cluster_count(random_matrix(n, seed=0)) == 1


class TestAdjustedRandIndex:
    @pytest.mark.parametrize("n", range(1, 7))
    def test_exhaustive(self, n):
        for a, b in itertools.product(partitions(n), repeat=2):
            assert Clustering.adjusted_rand_index(clustering(a), clustering(b)) == \
                pytest.approx(pair_counting_ari(a, b), abs=1e-12)

    @pytest.mark.parametrize("n", [7, 8])
    def test_sampled(self, n):
        rng = numpy.random.default_rng(n)
        for _ in range(200):
            a = tuple(int(label) for label in rng.integers(0, 3, n))
            b = tuple(int(label) for label in rng.integers(0, 4, n))
            assert Clustering.adjusted_rand_index(clustering(a), clustering(b)) == \
                pytest.approx(pair_counting_ari(a, b), abs=1e-12)

    def test_symmetric_and_relabelled(self):
        a, b = clustering((0, 0, 1, 1, 2)), clustering((0, 1, 1, 2, 2))
        relabelled = clustering((2, 2, 0, 0, 1))
        assert Clustering.adjusted_rand_index(a, b) == pytest.approx(Clustering.adjusted_rand_index(b, a))
        assert Clustering.adjusted_rand_index(relabelled, b) == pytest.approx(Clustering.adjusted_rand_index(a, b))
        assert Clustering.adjusted_rand_index(a, relabelled) == 1.0

    def test_object_order(self):
        a = Clustering.Clustering(('x', 'y', 'z'), (0, 0, 1))
        b = Clustering.Clustering(('z', 'x', 'y'), (0, 1, 1))
        assert Clustering.adjusted_rand_index(a, b) == 1.0

    def test_different_objects(self):
        with pytest.raises(ClusteringError):
            Clustering.adjusted_rand_index(clustering((0, 1)), clustering((0, 1, 1)))


class TestClusteringRows:
    def test_rows(self):
        assert Clustering.clustering_rows(clustering((0, 1, 0))) == [
            ['object_id', 'cluster_index'], ['o0', '0'], ['o1', '1'], ['o2', '0'],
        ]
