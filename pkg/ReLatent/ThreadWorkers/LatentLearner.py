import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy

from ReLatent.Clustering import INSTANCES, RELATION, Clustering, Provenance, SimilarityMatrix, cluster, \
    combine_tensor, core_similarity_tensor
from ReLatent.Errors import ConfigError
from ReLatent.KnowledgeBase import KnowledgeBase
from ReLatent.LatentFeatures import KPolicy, LatentRepresentation, RelationObject, build_representation, fact_id, \
    object_set_id, relation_matrix_from_entities
from ReLatent.NeighbourhoodTree import NeighbourhoodTree, build_ntree, frequency_profile
from ReLatent.Similarity import SimilarityInterpretation

__all__ = ['LatentLearnerWorker', 'learn_latent']

logger = logging.getLogger(__name__)


class LatentLearnerWorker:
    """
    Worker that learns a latent representation of a knowledge base.
    Clusters the entities of every type and the facts of every relation once per interpretation and depth, then
    filters the candidate clusterings with the overlap parameter alpha.
    """
    def __init__(self, kb: KnowledgeBase, interpretations: Sequence[SimilarityInterpretation],
                 depths: Sequence[int], alpha: float, k_policy: KPolicy, seed: int = 0,
                 fan_out: Optional[int] = None, n_jobs: int = 1,
                 current_step: Optional[Callable[[str], None]] = None):
        """
        Initialize the worker.

        Args:
            kb: The knowledge base.

            interpretations: Similarity interpretations, in the order candidates are produced.

            depths: Neighbourhood tree depths.

            alpha: Overlap threshold in [0, 1].

            k_policy: Number of clusters per candidate.

            seed: Run seed.

            fan_out: Optional per-vertex branching cap of the trees.

            n_jobs: Number of joblib workers for the similarity tensors.

            current_step: Receives a message for every step. Defaults to the module logger.
        """
        self.kb = kb
        self.interpretations = list(interpretations)
        self.depths = sorted(set(depths))
        self.alpha = alpha
        self.k_policy = k_policy
        self.seed = seed
        self.fan_out = fan_out
        self.n_jobs = n_jobs
        self.current_step = current_step or logger.info

        self.trees: Dict[Tuple[str, int], NeighbourhoodTree] = {}
        self.tensors: Dict[Tuple[str, int], Tuple[List[str], numpy.ndarray]] = {}
        self._entity_matrices: Dict[Tuple[str, int, str], SimilarityMatrix] = {}

    def validate(self) -> None:
        if not self.interpretations:
            raise ConfigError('at least one similarity interpretation is required')
        if not self.depths or min(self.depths) < 0:
            raise ConfigError('depths must be a non-empty list of non-negative integers')
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f'alpha must lie in [0, 1], got {self.alpha}')
        if not self.kb.entities:
            raise ConfigError('cannot learn latent features of an empty knowledge base')
        if len({interp.name for interp in self.interpretations}) != len(self.interpretations):
            raise ConfigError('interpretation names must be unique')
        if self.n_jobs == 0:
            raise ConfigError('n_jobs must be non-zero')

    def build_trees(self) -> None:
        for depth in self.depths:
            self.current_step(f'Building neighbourhood trees of depth {depth}...')
            for entity in sorted(self.kb.entities):
                self.trees[(entity, depth)] = build_ntree(self.kb, entity, depth, self.fan_out)

    def assemble_tensors(self) -> None:
        for entity_type in sorted(self.kb.schema.entity_types):
            entities = self.kb.entities_of_type(entity_type)
            if not entities:
                continue
            for depth in self.depths:
                self.current_step(f'Computing core similarities of {len(entities)} {entity_type} entities '
                                  f'at depth {depth}...')
                profiles = [frequency_profile(self.trees[(entity, depth)], self.kb) for entity in entities]
                tensor = core_similarity_tensor(profiles, self.kb.numeric_ranges, self.n_jobs)
                self.tensors[(entity_type, depth)] = (entities, tensor)

    def entity_matrix(self, entity_type: str, depth: int, interp: SimilarityInterpretation) -> SimilarityMatrix:
        key = (entity_type, depth, interp.name)
        if key not in self._entity_matrices:
            entities, tensor = self.tensors[(entity_type, depth)]
            self._entity_matrices[key] = combine_tensor(entities, tensor, interp)
        return self._entity_matrices[key]

    def relation_matrix(self, relation: str, depth: int, interp: SimilarityInterpretation) -> SimilarityMatrix:
        arg_types = self.kb.schema.relation_decls[relation]
        objects = [RelationObject(fact_id(relation, args), relation, args,
                                  tuple(self.trees[(entity, depth)] for entity in args))
                   for args in self.kb.facts_of(relation)]
        matrices = [self.entity_matrix(arg_type, depth, interp) for arg_type in arg_types]
        return relation_matrix_from_entities(objects, matrices)

    def object_sets(self) -> List[Tuple[str, str, str]]:
        """
        (object set id, kind, type or relation name) of every non-empty object set, sorted by id.
        """
        sets = [(object_set_id(t), INSTANCES, t) for t in self.kb.schema.entity_types
                if self.kb.entities_of_type(t)]
        for relation in self.kb.schema.relation_decls:
            if self.kb.facts_of(relation):
                sets.append((relation, RELATION, relation))
            else:
                logger.info('Relation %s has no facts, not clustered', relation)
        return sorted(sets)

    def generate_candidates(self) -> List[Clustering]:
        """
        Produce one candidate clustering per object set, interpretation and depth, in that order.
        """
        self.validate()
        if not self.tensors:
            self.build_trees()
            self.assemble_tensors()

        candidates = []
        for object_set, kind, name in self.object_sets():
            for interp in self.interpretations:
                for depth in self.depths:
                    if kind == INSTANCES:
                        matrix = self.entity_matrix(name, depth, interp)
                    else:
                        matrix = self.relation_matrix(name, depth, interp)
                    k = self.k_policy.choose(matrix)
                    self.current_step(f'Clustering {object_set} with {interp.name} at depth {depth} into {k} '
                                      f'clusters...')
                    provenance = Provenance(interp.name, depth, object_set, kind)
                    candidates.append(cluster(matrix, k, self.seed, provenance))
        return candidates

    def process(self) -> LatentRepresentation:
        """
        Learn the latent representation.

        Returns:
            The representation with every candidate's accept/reject record.
        """
        candidates = self.generate_candidates()
        self.current_step(f'Filtering {len(candidates)} candidate clusterings with alpha={self.alpha}...')
        return build_representation(self.kb, candidates, self.alpha)


def learn_latent(kb: KnowledgeBase, interps: Sequence[SimilarityInterpretation], depths: Sequence[int],
                 alpha: float, k_policy: KPolicy, seed: int = 0, **kwargs) -> LatentRepresentation:
    return LatentLearnerWorker(kb, interps, depths, alpha, k_policy, seed, **kwargs).process()
