"""
Explanations of latent features: per-cluster statistics of the relative frequencies of tree elements and the
selection of the theta-confident ones, i.e. elements with standard deviation sigma <= theta * mu.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy

from .Errors import ClusteringError, ConfigError, DepthMismatchError
from .KnowledgeBase import KnowledgeBase
from .LatentFeatures import LatentPredicate, LatentRepresentation
from .NeighbourhoodTree import DISCRETE_VALUE, EDGE_TYPE, NUMERIC_MEAN, VERTEX_IDENTITY, ElementKey, \
    NeighbourhoodTree, build_ntree, frequency_profile
from .Similarity import SimilarityInterpretation

__all__ = ['ElementStats', 'Explanation', 'admitted_categories', 'cluster_element_stats', 'theta_confident',
           'explain_feature', 'explain_representation', 'render_explanations', 'explanation_records']

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ElementStats:
    key: ElementKey
    mu: float
    sigma: float
    argument: Optional[int] = None

    def is_confident(self, theta: float) -> bool:
        return self.mu > 0 and self.sigma <= theta * self.mu


@dataclass(frozen=True)
class Explanation:
    """
    Theta-confident elements of one latent predicate.

    Attributes:
        predicate: Name of the explained predicate.

        theta: Confidence threshold.

        selected: Elements with mu > 0 and sigma <= theta * mu, sorted by argument, level, vertex type and name.

        stats: All element statistics the selection was made from.

        members: Number of cluster members.
    """
    predicate: str
    theta: float
    selected: Tuple[ElementStats, ...]
    stats: Tuple[ElementStats, ...] = ()
    members: int = 0


def admitted_categories(interp: SimilarityInterpretation) -> Dict[str, bool]:
    """
    Element categories an interpretation looks at, keyed 'root', 'neighbour', 'identity' and 'edge'.
    """
    w1, w2, w3, w4, w5 = interp.weights
    return {'root': w1 > 0, 'neighbour': w2 > 0, 'identity': w3 > 0 or w4 > 0, 'edge': w5 > 0}


def _admitted(key: ElementKey, admitted: Mapping[str, bool]) -> bool:
    if key.category in (DISCRETE_VALUE, NUMERIC_MEAN):
        return admitted['root'] if key.level == 0 else admitted['neighbour']
    if key.category == VERTEX_IDENTITY:
        return admitted['identity']
    return admitted['edge']


def _sort_key(stats: ElementStats):
    return (-1 if stats.argument is None else stats.argument, stats.key.level, stats.key.vertex_type,
            stats.key.category, stats.key.name)


def cluster_element_stats(trees: Sequence[NeighbourhoodTree], interp: SimilarityInterpretation,
                          kb: Optional[KnowledgeBase] = None, argument: Optional[int] = None) -> List[ElementStats]:
    """
    Mean and population standard deviation of every element's relative frequency over the trees of a cluster.

    An element missing from a tree counts with frequency 0 for that tree. Only categories the interpretation weights
    positively are reported.

    Args:
        trees: Trees of the cluster members, all of one depth.

        interp: Interpretation the cluster was obtained with.

        kb: Knowledge base the trees were built from.

        argument: Argument position the trees belong to, for relation clusters.

    Returns:
        One record per element, sorted.
    """
    if not trees:
        raise ClusteringError('cannot explain an empty cluster')
    if len({tree.depth for tree in trees}) > 1:
        raise DepthMismatchError('all trees of one cluster need the same depth')

    admitted = admitted_categories(interp)
    per_tree = [frequency_profile(tree, kb).elements() for tree in trees]
    keys = sorted({key for elements in per_tree for key in elements if _admitted(key, admitted)})

    stats = []
    for key in keys:
        values = numpy.array([elements.get(key, 0.0) for elements in per_tree])
        mu = float(values.mean())
        sigma = 0.0 if numpy.all(values == values[0]) else float(values.std())
        stats.append(ElementStats(key, mu, sigma, argument))
    return stats


def theta_confident(stats: Sequence[ElementStats], theta: float, predicate: str = '',
                    members: int = 0) -> Explanation:
    if theta < 0:
        raise ConfigError(f'theta must be non-negative, got {theta}')
    selected = tuple(sorted((s for s in stats if s.is_confident(theta)), key=_sort_key))
    return Explanation(predicate, theta, selected, tuple(sorted(stats, key=_sort_key)), members)


def explain_feature(kb: KnowledgeBase, p: LatentPredicate, theta: float, interp: SimilarityInterpretation,
                    d: Optional[int] = None, fan_out: Optional[int] = None) -> Explanation:
    """
    Explain one latent predicate.

    Args:
        kb: The knowledge base the predicate was learned from.

        p: The latent predicate.

        theta: Confidence threshold.

        interp: The interpretation named in the predicate's provenance.

        d: Tree depth. Defaults to the depth the predicate was learned with.

        fan_out: Per-vertex branching cap, as used while learning.

    Returns:
        The explanation. Relation predicates are explained per argument position.
    """
    depth = p.depth if d is None else d
    stats = []
    arguments = [None] if len(p.arg_types) == 1 else list(range(len(p.arg_types)))
    for argument in arguments:
        position = 0 if argument is None else argument
        trees = [build_ntree(kb, args[position], depth, fan_out) for args in p.groundings]
        stats += cluster_element_stats(trees, interp, kb, argument)
    explanation = theta_confident(stats, theta, p.name, len(p.members))
    logger.debug('Explained %s: %d of %d elements selected', p.name, len(explanation.selected), len(stats))
    return explanation


def explain_representation(kb: KnowledgeBase, rep: LatentRepresentation, theta: float,
                           interps: Sequence[SimilarityInterpretation], names: Optional[Sequence[str]] = None,
                           fan_out: Optional[int] = None) -> List[Explanation]:
    """
    Explain all latent predicates of a representation, or only the named ones.
    Unknown names raise :class:`UnknownPredicateError`.
    """
    by_name = {interp.name: interp for interp in interps}
    predicates = rep.predicates if names is None else [rep.predicate(name) for name in names]
    explanations = []
    for predicate in predicates:
        interp = by_name.get(predicate.interpretation)
        if interp is None:
            raise ConfigError(f'interpretation {predicate.interpretation!r} of {predicate.name} is not available')
        explanations.append(explain_feature(kb, predicate, theta, interp, fan_out=fan_out))
    return explanations


def _element_text(stats: ElementStats) -> str:
    key = stats.key
    where = 'edge' if key.category == EDGE_TYPE else f'{key.vertex_type} {key.category}'
    return f'{where} {key.name}: mu={stats.mu:.2f} sigma={stats.sigma:.2f}'


def render_explanations(explanations: Sequence[Explanation]) -> str:
    """
    Human-readable explanation blocks, theta-confident elements listed per level as in a mean neighbourhood tree.
    """
    lines = []
    for explanation in explanations:
        lines.append(f'{explanation.predicate} (theta={explanation.theta}, {explanation.members} members)')
        if not explanation.selected:
            lines.append('  no theta-confident elements')
        groups = defaultdict(list)
        for stats in explanation.selected:
            groups[(stats.argument, stats.key.level)].append(stats)
        for (argument, level), group in groups.items():
            heading = f'level {level}' if argument is None else f'argument {argument}, level {level}'
            lines.append(f'  {heading}')
            lines += [f'    {_element_text(stats)}' for stats in group]
    return ''.join(line + '\n' for line in lines)


def explanation_records(explanations: Sequence[Explanation]) -> List[dict]:
    records = []
    for explanation in explanations:
        selected = set(explanation.selected)
        for stats in explanation.stats:
            records.append({'record': 'element', 'predicate': explanation.predicate, 'argument': stats.argument,
                            'level': stats.key.level, 'vertex_type': stats.key.vertex_type,
                            'category': stats.key.category, 'element': stats.key.name, 'mu': stats.mu,
                            'sigma': stats.sigma, 'selected': stats in selected})
    return records
