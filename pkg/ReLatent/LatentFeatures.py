"""
Latent predicates minted from clusterings of entities and relation facts, the overlap filter that rejects redundant
clusterings, and the export of a learned representation as a knowledge base of its own.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy

from .Clustering import INSTANCES, RELATION, Clustering, SimilarityMatrix, adjusted_rand_index, \
    select_cluster_count
from .Errors import ConfigError, UnknownPredicateError
from .KnowledgeBase import KnowledgeBase, Schema
from .NeighbourhoodTree import NeighbourhoodTree, build_ntree
from .Similarity import SimilarityInterpretation, combined_similarity, core_similarities

__all__ = ['UNARY', 'KPolicy', 'LatentPredicate', 'CandidateRecord', 'LatentRepresentation', 'RelationObject',
           'object_set_id', 'fact_id', 'predicate_name', 'relation_objects', 'relation_similarity',
           'relation_similarity_matrix', 'relation_matrix_from_entities', 'filter_candidates', 'mint_predicates',
           'build_representation', 'export_latent_kb']

logger = logging.getLogger(__name__)

UNARY = 'unary'


@dataclass(frozen=True)
class KPolicy:
    """
    How many clusters each candidate clustering gets: a fixed k, or silhouette auto-selection.
    """
    k: Optional[int] = None
    auto: bool = False

    def __post_init__(self):
        if self.auto == (self.k is not None):
            raise ConfigError('choose either a fixed number of clusters or automatic selection')
        if self.k is not None and self.k < 1:
            raise ConfigError(f'number of clusters must be positive, got {self.k}')

    def choose(self, m: SimilarityMatrix) -> int:
        if self.auto:
            return select_cluster_count(m)
        n = len(m.objects)
        if self.k > n:
            logger.info('Clamped k=%d to the %d objects available', self.k, n)
            return n
        return self.k

    def describe(self) -> str:
        return 'auto' if self.auto else str(self.k)


@dataclass(frozen=True)
class LatentPredicate:
    """
    Extensionally defined predicate: its true groundings are exactly the members of one cluster.

    Attributes:
        name: `latent_<objectset>_<interpretation>_<depth>_c<index>`.

        kind: `unary` for clusters of entities, `relation` for clusters of relation facts.

        object_set: Lower-cased entity type or relation name.

        members: Entity ids or relation fact ids of the cluster, sorted.

        interpretation: Name of the similarity interpretation.

        depth: Depth of the neighbourhood trees.

        cluster_index: Index of the cluster in its clustering.

        arg_types: Entity type of each argument.

        groundings: Argument tuples of the true groundings, sorted.
    """
    name: str
    kind: str
    object_set: str
    members: Tuple[str, ...]
    interpretation: str
    depth: int
    cluster_index: int
    arg_types: Tuple[str, ...]
    groundings: Tuple[Tuple[str, ...], ...]


@dataclass(frozen=True)
class CandidateRecord:
    index: int
    object_set: str
    kind: str
    interpretation: str
    depth: int
    k: int
    accepted: bool
    max_ari: Optional[float]
    max_ari_with: Optional[str]

    def as_dict(self) -> dict:
        return {'record': 'candidate', 'index': self.index, 'object_set': self.object_set, 'kind': self.kind,
                'interpretation': self.interpretation, 'depth': self.depth, 'k': self.k,
                'accepted': self.accepted, 'max_ari': self.max_ari, 'max_ari_with': self.max_ari_with}


@dataclass(frozen=True)
class LatentRepresentation:
    accepted: Tuple[Clustering, ...]
    predicates: Tuple[LatentPredicate, ...]
    alpha: float
    log: Tuple[CandidateRecord, ...] = field(default_factory=tuple)

    def predicate(self, name: str) -> LatentPredicate:
        for predicate in self.predicates:
            if predicate.name == name:
                return predicate
        raise UnknownPredicateError(f'unknown latent predicate {name!r}')


@dataclass(frozen=True)
class RelationObject:
    """
    A relation fact as clustering object: its id and the trees of its arguments, in argument order.
    """
    fact_id: str
    relation: str
    args: Tuple[str, ...]
    trees: Tuple[NeighbourhoodTree, ...]


def object_set_id(entity_type: str) -> str:
    return entity_type.lower()


def fact_id(relation: str, args: Sequence[str]) -> str:
    return f'{relation}({",".join(args)})'


def _label(clustering: Clustering) -> str:
    provenance = clustering.provenance
    return f'{provenance.object_set}_{provenance.interpretation}_{provenance.depth}'


def predicate_name(clustering: Clustering, cluster_index: int) -> str:
    return f'latent_{_label(clustering)}_c{cluster_index}'


def relation_objects(kb: KnowledgeBase, r: str, d: int, fan_out: Optional[int] = None) -> List[RelationObject]:
    """
    One clustering object per fact of a relation, sorted by fact id.

    Args:
        kb: The knowledge base.

        r: Relation name.

        d: Depth of the argument trees.

        fan_out: Optional per-vertex branching cap of the trees.

    Returns:
        The relation objects. Empty if the relation has no facts.
    """
    if r not in kb.schema.relation_decls:
        raise UnknownPredicateError(f'unknown relation {r!r}')
    trees = {}
    objects = []
    for args in kb.facts_of(r):
        for entity in args:
            if entity not in trees:
                trees[entity] = build_ntree(kb, entity, d, fan_out)
        objects.append(RelationObject(fact_id(r, args), r, args, tuple(trees[entity] for entity in args)))
    return sorted(objects, key=lambda obj: obj.fact_id)


def relation_similarity(o1: RelationObject, o2: RelationObject, interp: SimilarityInterpretation,
                        kb: KnowledgeBase) -> float:
    """
    Mean over argument positions of the combined similarity of the argument trees.
    """
    values = [combined_similarity(core_similarities(t1, t2, kb), interp) for t1, t2 in zip(o1.trees, o2.trees)]
    return sum(values) / len(values)


def relation_similarity_matrix(objects: Sequence[RelationObject], interp: SimilarityInterpretation,
                               kb: KnowledgeBase) -> SimilarityMatrix:
    """
    Pairwise relation similarities, one tree comparison per pair and position.
    :func:`relation_matrix_from_entities` computes the same matrix from entity matrices.
    """
    objects = sorted(objects, key=lambda obj: obj.fact_id)
    n = len(objects)
    values = numpy.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = relation_similarity(objects[i], objects[j], interp, kb)
    return SimilarityMatrix(tuple(obj.fact_id for obj in objects), values)


def relation_matrix_from_entities(objects: Sequence[RelationObject],
                                  entity_matrices: Sequence[SimilarityMatrix]) -> SimilarityMatrix:
    """
    Pairwise relation similarities by lookup in the entity similarity matrix of each argument position.

    Args:
        objects: The relation objects.

        entity_matrices: Per argument position, a matrix over all entities of that position's type, built with the
                         same interpretation and depth.

    Returns:
        The relation similarity matrix, rows ordered by fact id.
    """
    objects = sorted(objects, key=lambda obj: obj.fact_id)
    values = numpy.zeros((len(objects), len(objects)))
    for position, matrix in enumerate(entity_matrices):
        row_of = {entity: row for row, entity in enumerate(matrix.objects)}
        index = [row_of[obj.args[position]] for obj in objects]
        values += matrix.values[numpy.ix_(index, index)]
    values /= len(entity_matrices)
    numpy.fill_diagonal(values, 1.0)
    return SimilarityMatrix(tuple(obj.fact_id for obj in objects), values)


def filter_candidates(candidates: Sequence[Clustering],
                      alpha: float) -> Tuple[List[Clustering], List[CandidateRecord]]:
    """
    Accept candidates in order, rejecting each one whose adjusted Rand index with an already accepted clustering of
    the same object set exceeds alpha.

    Args:
        candidates: Candidate clusterings in production order. All need a provenance.

        alpha: Overlap threshold in [0, 1].

    Returns:
        The accepted clusterings and one record per candidate.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f'alpha must lie in [0, 1], got {alpha}')
    accepted: List[Clustering] = []
    accepted_by_set: Dict[str, List[Clustering]] = {}
    log = []
    for index, candidate in enumerate(candidates):
        provenance = candidate.provenance
        max_ari, max_with = None, None
        for previous in accepted_by_set.get(provenance.object_set, []):
            ari = adjusted_rand_index(candidate, previous)
            if max_ari is None or ari > max_ari:
                max_ari, max_with = ari, _label(previous)
        keep = max_ari is None or max_ari <= alpha
        if keep:
            accepted.append(candidate)
            accepted_by_set.setdefault(provenance.object_set, []).append(candidate)
        log.append(CandidateRecord(index, provenance.object_set, provenance.kind, provenance.interpretation,
                                   provenance.depth, candidate.k, keep, max_ari, max_with))
        logger.info('%s %s (k=%d, max ARI %s)', 'Accepted' if keep else 'Rejected', _label(candidate), candidate.k,
                    'n/a' if max_ari is None else f'{max_ari:.4f}')
    return accepted, log


def mint_predicates(kb: KnowledgeBase, clusterings: Sequence[Clustering]) -> List[LatentPredicate]:
    """
    One latent predicate per cluster of every clustering.
    """
    types_by_set = {object_set_id(t): t for t in kb.schema.entity_types}
    predicates = []
    for clustering in clusterings:
        provenance = clustering.provenance
        if provenance.kind == INSTANCES:
            arg_types = (types_by_set[provenance.object_set],)
            args_of = {entity: (entity,) for entity in clustering.objects}
        else:
            arg_types = tuple(kb.schema.relation_decls[provenance.object_set])
            args_of = {fact_id(provenance.object_set, args): args for args in kb.facts_of(provenance.object_set)}
        for index, members in enumerate(clustering.members()):
            predicates.append(LatentPredicate(
                name=predicate_name(clustering, index),
                kind=UNARY if provenance.kind == INSTANCES else RELATION,
                object_set=provenance.object_set,
                members=tuple(sorted(members)),
                interpretation=provenance.interpretation,
                depth=provenance.depth,
                cluster_index=index,
                arg_types=arg_types,
                groundings=tuple(sorted(args_of[member] for member in members)),
            ))
    return predicates


def build_representation(kb: KnowledgeBase, candidates: Sequence[Clustering], alpha: float) -> LatentRepresentation:
    accepted, log = filter_candidates(candidates, alpha)
    predicates = mint_predicates(kb, accepted)
    logger.info('Accepted %d of %d candidate clusterings at alpha=%s, %d latent predicates',
                len(accepted), len(candidates), alpha, len(predicates))
    return LatentRepresentation(tuple(accepted), tuple(predicates), alpha, tuple(log))


def export_latent_kb(kb: KnowledgeBase, rep: LatentRepresentation) -> KnowledgeBase:
    """
    Knowledge base whose predicates are the latent predicates of a representation.

    Entity types, entities and labels are kept; original attribute and relation facts are not.

    Args:
        kb: The knowledge base the representation was learned from.

        rep: The learned representation.

    Returns:
        The latent knowledge base.
    """
    features: Mapping[str, str] = {p.name: p.arg_types[0] for p in rep.predicates if p.kind == UNARY}
    relations = {p.name: p.arg_types for p in rep.predicates if p.kind == RELATION}
    schema = Schema(kb.schema.entity_types, {}, relations, features, kb.schema.label_type)
    unary_facts = frozenset((p.name, args[0]) for p in rep.predicates if p.kind == UNARY for args in p.groundings)
    rel_facts = frozenset((p.name, args) for p in rep.predicates if p.kind == RELATION for args in p.groundings)
    return KnowledgeBase(schema, dict(kb.entities), frozenset(), rel_facts, unary_facts, dict(kb.labels))
