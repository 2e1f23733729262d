import logging
from typing import Callable, List, Optional, Sequence, Tuple

from sklearn.model_selection import train_test_split

from ReLatent.Analytics import SweepRow, propositionalize, sweep_ratio, train_tree
from ReLatent.Errors import ConfigError
from ReLatent.KnowledgeBase import KnowledgeBase
from ReLatent.LatentFeatures import KPolicy, LatentRepresentation, build_representation, export_latent_kb
from ReLatent.Similarity import SimilarityInterpretation
from ReLatent.ThreadWorkers.LatentLearner import LatentLearnerWorker

__all__ = ['RedundancySweepWorker', 'redundancy_sweep']

logger = logging.getLogger(__name__)

BASELINE_ALPHA = 1.0
TEST_SIZE = 0.2


class RedundancySweepWorker:
    """
    Worker that measures how the overlap parameter alpha trades the size of a latent representation against the
    accuracy of a decision tree trained on it.
    The candidate clusterings are produced once; every alpha filters the same pool.
    """
    def __init__(self, kb: KnowledgeBase, interpretations: Sequence[SimilarityInterpretation],
                 depths: Sequence[int], alphas: Sequence[float], k_policy: KPolicy, seed: int = 0,
                 max_tree_depth: int = 5, fan_out: Optional[int] = None, n_jobs: int = 1,
                 current_step: Optional[Callable[[str], None]] = None):
        """
        Initialize the worker.

        Args:
            kb: Labeled knowledge base.

            interpretations: Similarity interpretations.

            depths: Neighbourhood tree depths.

            alphas: Overlap thresholds to evaluate. The baseline alpha = 1.0 is always evaluated first.

            k_policy: Number of clusters per candidate.

            seed: Seed of the train/test split and the decision tree.

            max_tree_depth: Maximal depth of the decision trees.

            fan_out: Optional per-vertex branching cap of the trees.

            n_jobs: Number of joblib workers.

            current_step: Receives a message for every step. Defaults to the module logger.
        """
        self.kb = kb
        self.alphas = list(alphas)
        self.seed = seed
        self.max_tree_depth = max_tree_depth
        self.current_step = current_step or logger.info
        self.learner = LatentLearnerWorker(kb, interpretations, depths, BASELINE_ALPHA, k_policy, seed,
                                           fan_out, n_jobs, self.current_step)
        self.train_entities: List[str] = []
        self.test_entities: List[str] = []

    def validate(self) -> None:
        if not self.alphas:
            raise ConfigError('the sweep needs at least one alpha')
        for alpha in self.alphas:
            if not 0.0 <= alpha <= 1.0:
                raise ConfigError(f'alpha must lie in [0, 1], got {alpha}')
        if len(self.kb.labeled_entities()) < 2:
            raise ConfigError('the sweep needs at least two labeled entities')

    def split(self) -> None:
        self.current_step('Splitting labeled entities into training and test set...')
        entities = self.kb.labeled_entities()
        labels = [self.kb.labels[entity] for entity in entities]
        try:
            train, test = train_test_split(entities, test_size=TEST_SIZE, random_state=self.seed, stratify=labels)
        except ValueError:
            logger.info('Stratified split impossible, falling back to a random split')
            train, test = train_test_split(entities, test_size=TEST_SIZE, random_state=self.seed)
        self.train_entities, self.test_entities = sorted(train), sorted(test)

    def evaluate(self, rep: LatentRepresentation) -> Tuple[int, int, float]:
        latent_kb = export_latent_kb(self.kb, rep)
        train_features, names = propositionalize(latent_kb, self.train_entities)
        test_features, _ = propositionalize(latent_kb, self.test_entities)
        tree = train_tree(train_features, [self.kb.labels[e] for e in self.train_entities], self.max_tree_depth,
                          self.seed, names)
        accuracy = tree.accuracy(test_features, [self.kb.labels[e] for e in self.test_entities])
        fact_count = sum(len(predicate.groundings) for predicate in rep.predicates)
        return len(rep.predicates), fact_count, accuracy

    def process(self) -> List[SweepRow]:
        """
        Run the sweep.

        Returns:
            One row per alpha, the baseline row first.
        """
        self.validate()
        candidates = self.learner.generate_candidates()
        self.split()

        alphas = [BASELINE_ALPHA] + [alpha for alpha in self.alphas if alpha != BASELINE_ALPHA]
        rows = []
        baseline = None
        for alpha in alphas:
            self.current_step(f'Evaluating alpha={alpha}...')
            features, facts, accuracy = self.evaluate(build_representation(self.kb, candidates, alpha))
            if baseline is None:
                baseline = (features, facts)
            rows.append(SweepRow(alpha, features, facts, accuracy, sweep_ratio(features, baseline[0]),
                                 sweep_ratio(facts, baseline[1])))
        return rows


def redundancy_sweep(kb: KnowledgeBase, interps: Sequence[SimilarityInterpretation], depths: Sequence[int],
                     alphas: Sequence[float], k_policy: KPolicy, seed: int = 0, **kwargs) -> List[SweepRow]:
    return RedundancySweepWorker(kb, interps, depths, alphas, k_policy, seed, **kwargs).process()
