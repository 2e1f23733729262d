"""
Pairwise similarity matrices, average-linkage clustering and the adjusted Rand index.
"""
import logging
import math
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import joblib
import numpy
from scipy.cluster.hierarchy import cut_tree, linkage
from scipy.spatial.distance import squareform
from sklearn.metrics import adjusted_rand_score, silhouette_score

from .Errors import ClusteringError, DepthMismatchError
from .KnowledgeBase import KnowledgeBase
from .NeighbourhoodTree import FrequencyProfile, NeighbourhoodTree, frequency_profile
from .Similarity import CORE_SIMILARITY_COUNT, SimilarityInterpretation, profile_similarities

__all__ = ['INSTANCES', 'RELATION', 'Provenance', 'SimilarityMatrix', 'Clustering', 'core_similarity_tensor',
           'combine_tensor', 'similarity_matrix', 'cluster', 'select_cluster_count', 'adjusted_rand_index',
           'clustering_rows']

logger = logging.getLogger(__name__)

INSTANCES = 'instances'
RELATION = 'relation'


@dataclass(frozen=True)
class Provenance:
    interpretation: str
    depth: int
    object_set: str
    kind: str


@dataclass(frozen=True)
class SimilarityMatrix:
    """
    Symmetric similarity matrix with unit diagonal.

    Attributes:
        objects: Object ids, in the order of the matrix rows.

        values: n x n matrix of similarities in [0, 1].
    """
    objects: Tuple[str, ...]
    values: numpy.ndarray

    def __post_init__(self):
        n = len(self.objects)
        if n == 0:
            raise ClusteringError('similarity matrix without objects')
        if self.values.shape != (n, n):
            raise ClusteringError(f'matrix of shape {self.values.shape} does not match {n} objects')


@dataclass(frozen=True)
class Clustering:
    """
    Partition of an object set.

    Attributes:
        objects: Object ids sorted ascending.

        labels: Cluster index per object. Indices are numbered by first occurrence, so equal partitions have equal
                labels.

        provenance: Where the clustering came from, if it was produced by the learner.
    """
    objects: Tuple[str, ...]
    labels: Tuple[int, ...]
    provenance: Optional[Provenance] = None

    @property
    def k(self) -> int:
        return len(set(self.labels))

    def assignment(self) -> dict:
        return dict(zip(self.objects, self.labels))

    def members(self) -> List[List[str]]:
        clusters = [[] for _ in range(self.k)]
        for obj, label in zip(self.objects, self.labels):
            clusters[label].append(obj)
        return clusters


def _pair_block(profiles: Sequence[FrequencyProfile], ranges, pairs: numpy.ndarray) -> numpy.ndarray:
    return numpy.array([profile_similarities(profiles[i], profiles[j], ranges) for i, j in pairs],
                       dtype=numpy.float64).reshape(-1, CORE_SIMILARITY_COUNT)


def core_similarity_tensor(profiles: Sequence[FrequencyProfile], ranges=None, n_jobs: int = 1) -> numpy.ndarray:
    """
    Core similarities of all pairs of profiles.

    The upper triangle is computed in blocks distributed with joblib and mirrored to the lower triangle.
    The result does not depend on n_jobs.

    Args:
        profiles: Frequency profiles of trees of equal depth.

        ranges: Numeric attribute ranges of the knowledge base.

        n_jobs: Number of joblib workers.

    Returns:
        Array of shape (n, n, 5) with ones on the diagonal.
    """
    n = len(profiles)
    if len({profile.depth for profile in profiles}) > 1:
        raise DepthMismatchError('all trees of one object set need the same depth')
    tensor = numpy.ones((n, n, CORE_SIMILARITY_COUNT), dtype=numpy.float64)
    rows, columns = numpy.triu_indices(n, k=1)
    if len(rows) == 0:
        return tensor

    pairs = numpy.stack([rows, columns], axis=1)
    workers = n_jobs if n_jobs > 0 else (os.cpu_count() or 1)
    blocks = numpy.array_split(pairs, min(len(pairs), 4 * workers))
    results = joblib.Parallel(n_jobs=n_jobs)(
        joblib.delayed(_pair_block)(profiles, ranges, block) for block in blocks
    )
    values = numpy.concatenate(results, axis=0)
    tensor[rows, columns] = values
    tensor[columns, rows] = values
    return tensor


def combine_tensor(objects: Sequence[str], tensor: numpy.ndarray,
                   interp: SimilarityInterpretation) -> SimilarityMatrix:
    values = numpy.minimum(tensor @ interp.as_array(), 1.0)
    numpy.fill_diagonal(values, 1.0)
    return SimilarityMatrix(tuple(objects), values)


def similarity_matrix(trees: Sequence[NeighbourhoodTree], interp: SimilarityInterpretation, kb: KnowledgeBase,
                      n_jobs: int = 1) -> SimilarityMatrix:
    """
    Combined similarity of all pairs of trees under one interpretation.

    Args:
        trees: Trees of equal depth built from kb.

        interp: The similarity interpretation.

        kb: The knowledge base the trees were built from.

        n_jobs: Number of joblib workers.

    Returns:
        The matrix, rows ordered by root id.
    """
    if not trees:
        raise ClusteringError('cannot assemble a similarity matrix without trees')
    trees = sorted(trees, key=lambda tree: tree.root)
    profiles = [frequency_profile(tree, kb) for tree in trees]
    tensor = core_similarity_tensor(profiles, kb.numeric_ranges, n_jobs)
    return combine_tensor([tree.root for tree in trees], tensor, interp)


def _canonical_labels(labels: Sequence[int]) -> Tuple[int, ...]:
    first_seen = {}
    for label in labels:
        first_seen.setdefault(label, len(first_seen))
    return tuple(first_seen[label] for label in labels)


def _distances(m: SimilarityMatrix) -> Tuple[Tuple[str, ...], numpy.ndarray]:
    order = sorted(range(len(m.objects)), key=lambda i: m.objects[i])
    values = m.values[numpy.ix_(order, order)]
    distances = numpy.clip(1.0 - values, 0.0, 1.0)
    distances = (distances + distances.T) / 2
    numpy.fill_diagonal(distances, 0.0)
    return tuple(m.objects[i] for i in order), distances


def cluster(m: SimilarityMatrix, k: int, seed: int = 0, provenance: Optional[Provenance] = None) -> Clustering:
    """
    Partition the objects of a similarity matrix into exactly k clusters.

    Average linkage on the dissimilarity 1 - s, cut at k clusters. Objects are sorted by id first, so the result
    does not depend on the row order of the matrix. The algorithm is deterministic; the seed is recorded only.
    Merges at equal distance follow scipy's linkage order on the id-sorted objects, not the lowest pair of
    cluster indices.

    Args:
        m: The similarity matrix.

        k: Number of clusters, 1 <= k <= number of objects.

        seed: Run seed.

        provenance: Origin recorded with the clustering.

    Returns:
        The clustering.
    """
    n = len(m.objects)
    if not 1 <= k <= n:
        raise ClusteringError(f'cannot split {n} objects into {k} clusters')
    objects, distances = _distances(m)
    if n == 1:
        return Clustering(objects, (0,), provenance)

    tree = linkage(squareform(distances, checks=False), method='average')
    labels = cut_tree(tree, n_clusters=k)[:, 0]
    clustering = Clustering(objects, _canonical_labels(labels), provenance)
    logger.debug('Clustered %d objects into %d clusters (seed %d)', n, clustering.k, seed)
    return clustering


def select_cluster_count(m: SimilarityMatrix) -> int:
    """
    Pick the number of clusters with the best silhouette over k in [2, min(ceil(sqrt(n)), n - 1)].

    Returns:
        The smallest k with the best silhouette, or 1 if the range is empty.
    """
    n = len(m.objects)
    upper = min(math.ceil(math.sqrt(n)), n - 1)
    if upper < 2:
        return 1
    _, distances = _distances(m)
    best_k, best_score = 1, -numpy.inf
    for k in range(2, upper + 1):
        labels = cluster(m, k).labels
        if len(set(labels)) < 2:
            continue
        score = silhouette_score(distances, labels, metric='precomputed')
        logger.debug('Silhouette for k=%d: %f', k, score)
        if score > best_score:
            best_k, best_score = k, score
    logger.info('Selected %d clusters for %d objects', best_k, n)
    return best_k


def adjusted_rand_index(c1: Clustering, c2: Clustering) -> float:
    """
    Adjusted Rand index of two clusterings of the same objects.
    Identical partitions give 1.0 even where the chance correction is undefined.
    """
    if set(c1.objects) != set(c2.objects):
        raise ClusteringError('adjusted Rand index needs clusterings of the same objects')
    other = c2.assignment()
    return float(adjusted_rand_score(c1.labels, [other[obj] for obj in c1.objects]))


def clustering_rows(c: Clustering) -> List[List[str]]:
    """
    Rows `object_id,cluster_index` of a clustering, header first.
    """
    return [['object_id', 'cluster_index']] + [[obj, str(label)] for obj, label in zip(c.objects, c.labels)]
