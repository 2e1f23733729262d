"""
Quality measures of predicates and representations: label entropy, sparsity, the diagnostics table, a propositional
decision tree for accuracy and complexity comparisons, and the rows of the redundancy sweep.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy
from scipy.stats import entropy

from .Errors import ConfigError, UndefinedEntropyError
from .KnowledgeBase import DISCRETE, KnowledgeBase, groundings

__all__ = ['ORIGINAL', 'LATENT', 'PredicateDiagnostics', 'SweepRow', 'TreeNode', 'DecisionTree',
           'ComplexityComparison', 'label_entropy', 'sparsity', 'diagnostics_table', 'propositionalize',
           'train_tree', 'compare_complexity', 'sweep_ratio']

logger = logging.getLogger(__name__)

ORIGINAL = 'original'
LATENT = 'latent'


@dataclass(frozen=True)
class PredicateDiagnostics:
    predicate: str
    origin: str
    grounding_count: int
    label_entropy: Optional[float]


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    feature_count: int
    fact_count: int
    accuracy: float
    feature_ratio: float
    fact_ratio: float


def label_entropy(kb: KnowledgeBase, p: str) -> float:
    """
    Shannon entropy in bits of the labels of the labeled entities occurring in the groundings of a predicate.
    Every entity counts once, whatever position it occurs in.

    Args:
        kb: The knowledge base.

        p: Predicate name.

    Returns:
        The entropy, 0 for a label-pure predicate.
    """
    entities = {arg for grounding in groundings(kb, p) for arg in grounding.args if arg in kb.labels}
    if not entities:
        raise UndefinedEntropyError(f'{p} has no grounding with a labeled entity')
    counts = Counter(kb.labels[entity] for entity in entities)
    if len(counts) == 1:
        return 0.0
    return float(entropy(sorted(counts.values()), base=2))


def sparsity(kb: KnowledgeBase, p: str) -> int:
    return len(groundings(kb, p))


def diagnostics_table(kb_original: KnowledgeBase, kb_latent: KnowledgeBase) -> List[PredicateDiagnostics]:
    """
    Grounding count and label entropy of every predicate of both knowledge bases, originals first.
    Undefined entropies are reported as None.
    """
    rows = []
    for origin, kb in ((ORIGINAL, kb_original), (LATENT, kb_latent)):
        for predicate in kb.schema.predicates:
            try:
                value = label_entropy(kb, predicate)
            except UndefinedEntropyError as e:
                logger.info('Label entropy undefined: %s', e)
                value = None
            rows.append(PredicateDiagnostics(predicate, origin, sparsity(kb, predicate), value))
    return rows


def propositionalize(kb: KnowledgeBase, entities: Sequence[str]) -> Tuple[numpy.ndarray, List[str]]:
    """
    Boolean features of entities: one per discrete attribute value, unary feature and relation.
    A relation feature is true if the entity takes part in any argument position. Numeric attributes are skipped.

    Args:
        kb: Original or latent knowledge base.

        entities: Entities to describe, one row each.

    Returns:
        The (entities x features) matrix and the feature names.
    """
    columns = {}
    for attribute, (_, kind) in sorted(kb.schema.attribute_decls.items()):
        if kind != DISCRETE:
            continue
        for entity, value in kb.facts_of(attribute):
            columns.setdefault(f'{attribute}={value}', set()).add(entity)
    for feature in sorted(kb.schema.feature_decls):
        columns[feature] = {args[0] for args in kb.facts_of(feature)}
    for relation in sorted(kb.schema.relation_decls):
        columns[relation] = {arg for args in kb.facts_of(relation) for arg in args}

    names = sorted(columns)
    matrix = numpy.zeros((len(entities), len(names)), dtype=bool)
    for column, name in enumerate(names):
        matrix[:, column] = [entity in columns[name] for entity in entities]
    return matrix, names


@dataclass
class TreeNode:
    prediction: str
    feature: Optional[int] = None
    present: Optional['TreeNode'] = None
    absent: Optional['TreeNode'] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class DecisionTree:
    """
    Binary decision tree over boolean features.

    Attributes:
        root: Root node.

        feature_names: Names of the feature columns the tree was trained on.
    """
    root: TreeNode
    feature_names: Tuple[str, ...] = ()

    @property
    def node_count(self) -> int:
        """
        Number of internal (test) nodes.
        """
        count, stack = 0, [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                count += 1
                stack += [node.present, node.absent]
        return count

    def predict(self, features: numpy.ndarray) -> List[str]:
        predictions = []
        for row in numpy.asarray(features, dtype=bool):
            node = self.root
            while not node.is_leaf:
                node = node.present if row[node.feature] else node.absent
            predictions.append(node.prediction)
        return predictions

    def accuracy(self, features: numpy.ndarray, labels: Sequence[str]) -> float:
        if len(labels) == 0:
            return 0.0
        return sum(p == label for p, label in zip(self.predict(features), labels)) / len(labels)

    def describe(self) -> str:
        lines = []

        def visit(node: TreeNode, indent: str) -> None:
            if node.is_leaf:
                lines.append(f'{indent}-> {node.prediction}')
                return
            name = self.feature_names[node.feature] if self.feature_names else f'f{node.feature}'
            lines.append(f'{indent}{name}?')
            visit(node.present, indent + '  yes ')
            visit(node.absent, indent + '  no  ')

        visit(self.root, '')
        return ''.join(line + '\n' for line in lines)


def _majority(labels: Sequence[str]) -> str:
    counts = Counter(labels)
    return min(counts, key=lambda label: (-counts[label], label))


def _entropy(labels: Sequence[str]) -> float:
    counts = list(Counter(labels).values())
    return float(entropy(counts, base=2)) if len(counts) > 1 else 0.0


def _grow(features: numpy.ndarray, labels: numpy.ndarray, order: Sequence[int], depth: int,
          max_depth: int) -> TreeNode:
    node = TreeNode(_majority(labels))
    parent_entropy = _entropy(labels)
    if parent_entropy == 0.0 or depth >= max_depth:
        return node

    best_feature, best_gain = None, -numpy.inf
    for feature in order:
        mask = features[:, feature]
        present = int(mask.sum())
        if present == 0 or present == len(labels):
            continue
        children = (present * _entropy(labels[mask]) + (len(labels) - present) * _entropy(labels[~mask]))
        gain = parent_entropy - children / len(labels)
        if gain > best_gain + 1e-12:
            best_feature, best_gain = feature, gain
    if best_feature is None:
        return node

    mask = features[:, best_feature]
    node.feature = best_feature
    node.present = _grow(features[mask], labels[mask], order, depth + 1, max_depth)
    node.absent = _grow(features[~mask], labels[~mask], order, depth + 1, max_depth)
    if node.present.is_leaf and node.absent.is_leaf and node.present.prediction == node.absent.prediction:
        return TreeNode(node.present.prediction)
    return node


def train_tree(features: numpy.ndarray, labels: Sequence[str], max_depth: int, seed: int = 0,
               feature_names: Optional[Sequence[str]] = None) -> DecisionTree:
    """
    Grow a decision tree greedily by information gain.

    Features are scanned in a seed-derived order and ties go to the earlier feature in that order. Splits without
    gain are allowed while a node is impure, which lets the tree learn XOR-like concepts.

    Args:
        features: Boolean matrix (examples x features).

        labels: Label of every example.

        max_depth: Maximal number of tests on a path.

        seed: Seed of the feature order.

        feature_names: Optional column names.

    Returns:
        The trained tree. Without features it is a single majority leaf.
    """
    features = numpy.asarray(features, dtype=bool)
    labels = numpy.asarray(labels, dtype=object)
    if len(labels) == 0:
        raise ConfigError('cannot train a decision tree without examples')
    if features.ndim != 2 or features.shape[0] != len(labels):
        raise ConfigError(f'feature matrix of shape {features.shape} does not match {len(labels)} labels')
    order = numpy.random.default_rng(seed).permutation(features.shape[1])
    root = _grow(features, labels, order, 0, max_depth)
    return DecisionTree(root, tuple(feature_names or ()))


@dataclass(frozen=True)
class ComplexityComparison:
    examples: int
    original_nodes: int
    original_accuracy: float
    latent_nodes: int
    latent_accuracy: float


def compare_complexity(kb: KnowledgeBase, latent_kb: KnowledgeBase, max_depth: int,
                       seed: int = 0) -> ComplexityComparison:
    """
    Train one tree on the original and one on the latent features of all labeled entities and compare their size
    and training accuracy.
    """
    entities = kb.labeled_entities()
    if not entities:
        raise ConfigError('comparing decision trees requires labeled entities')
    labels = [kb.labels[entity] for entity in entities]
    results = []
    for source in (kb, latent_kb):
        features, names = propositionalize(source, entities)
        tree = train_tree(features, labels, max_depth, seed, names)
        results.append((tree.node_count, tree.accuracy(features, labels)))
    comparison = ComplexityComparison(len(entities), *results[0], *results[1])
    logger.info('Decision tree on original features: %d nodes, accuracy %.4f; on latent features: %d nodes, '
                'accuracy %.4f', *results[0], *results[1])
    return comparison


def sweep_ratio(count: int, baseline: int) -> float:
    if baseline == 0:
        return 1.0 if count == 0 else float('inf')
    return count / baseline
