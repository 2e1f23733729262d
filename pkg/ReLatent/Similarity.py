"""
Core similarities between neighbourhood trees and their weighted combination.

The five core similarities compare
    1. the attributes of the roots,
    2. the attributes of the neighbours, level by level and per vertex type,
    3. the connectivity between the two roots,
    4. the identities of the vertices in both trees,
    5. the edge types in both trees.
Every core similarity lies in [0, 1] and is symmetric. A similarity interpretation is a normalised weight vector over
the five of them.
"""
import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy

from .Errors import ConfigError, DepthMismatchError, KBParseError
from .KnowledgeBase import KnowledgeBase, read_text
from .NeighbourhoodTree import FrequencyProfile, NeighbourhoodTree, TypeProfile, frequency_profile

__all__ = ['CORE_SIMILARITY_COUNT', 'SimilarityInterpretation', 'CoreSimVector', 'profile_similarities',
           'core_similarities', 'combined_similarity', 'parse_interpretations', 'read_interpretations']

logger = logging.getLogger(__name__)

CORE_SIMILARITY_COUNT = 5
_NAME = re.compile(r'[A-Za-z0-9]+')


@dataclass(frozen=True)
class SimilarityInterpretation:
    """
    Named, normalised weights w1..w5 of the core similarities.
    Use :meth:`from_weights` to build one from arbitrary non-negative weights.
    """
    name: str
    weights: Tuple[float, float, float, float, float]

    @classmethod
    def from_weights(cls, name: str, weights: Sequence[float]) -> 'SimilarityInterpretation':
        if not _NAME.fullmatch(name):
            raise ConfigError(f'interpretation name {name!r} must be alphanumeric')
        if len(weights) != CORE_SIMILARITY_COUNT:
            raise ConfigError(f'interpretation {name!r} needs {CORE_SIMILARITY_COUNT} weights, got {len(weights)}')
        weights = [float(w) for w in weights]
        if any(not numpy.isfinite(w) or w < 0 for w in weights):
            raise ConfigError(f'interpretation {name!r} has negative or non-finite weights')
        total = sum(weights)
        if total == 0:
            raise ConfigError(f'interpretation {name!r} has only zero weights')
        return cls(name, tuple(w / total for w in weights))

    def as_array(self) -> numpy.ndarray:
        return numpy.asarray(self.weights, dtype=numpy.float64)


class CoreSimVector(NamedTuple):
    s1: float
    s2: float
    s3: float
    s4: float
    s5: float


def _total_variation(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    return 0.5 * sum(abs(p.get(key, 0.0) - q.get(key, 0.0)) for key in set(p) | set(q))


def _attribute_similarity(a: TypeProfile, b: TypeProfile, ranges: Mapping[str, float]) -> float:
    names = set(a.discrete) | set(a.numeric) | set(b.discrete) | set(b.numeric)
    if not names:
        return 1.0
    total = 0.0
    for name in names:
        if name in a.discrete and name in b.discrete:
            total += 1.0 - _total_variation(a.discrete[name], b.discrete[name])
        elif name in a.numeric and name in b.numeric:
            value_range = ranges.get(name, 0.0)
            if value_range > 0:
                total += 1.0 - min(1.0, abs(a.numeric[name] - b.numeric[name]) / value_range)
            else:
                total += 1.0
        # Attributes present on one side only contribute 0
    return total / len(names)


def _levelwise(p1: FrequencyProfile, p2: FrequencyProfile, compare, weighted: bool = False) -> float:
    values, weights = [], []
    for level in range(1, p1.depth + 1):
        a, b = p1.levels[level], p2.levels[level]
        if a.size == 0 and b.size == 0:
            value = 1.0
        elif a.size == 0 or b.size == 0:
            value = 0.0
        else:
            value = compare(a, b)
        values.append(value)
        weights.append(1.0 / level if weighted else 1.0)
    return float(numpy.average(values, weights=weights))


def _neighbour_attributes(ranges: Mapping[str, float]):
    def compare(a, b) -> float:
        vertex_types = set(a.vertex_types) | set(b.vertex_types)
        total = 0.0
        for vertex_type in vertex_types:
            if vertex_type in a.vertex_types and vertex_type in b.vertex_types:
                total += _attribute_similarity(a.vertex_types[vertex_type], b.vertex_types[vertex_type], ranges)
        return total / len(vertex_types)
    return compare


def _identity_jaccard(a, b) -> float:
    keys = set(a.identity_counts) | set(b.identity_counts)
    shared = sum(min(a.identity_counts.get(key, 0), b.identity_counts.get(key, 0)) for key in keys)
    union = sum(max(a.identity_counts.get(key, 0), b.identity_counts.get(key, 0)) for key in keys)
    return shared / union


def _edge_types(a, b) -> float:
    return 1.0 - _total_variation(a.edge_types, b.edge_types)


def profile_similarities(p1: FrequencyProfile, p2: FrequencyProfile,
                         ranges: Optional[Mapping[str, float]] = None) -> CoreSimVector:
    """
    Core similarities of two frequency profiles.

    Args:
        p1: Profile of the first tree.

        p2: Profile of the second tree.

        ranges: Numeric attribute -> value range in the knowledge base. Attributes without a positive range compare
                as equal.

    Returns:
        The five core similarities.
    """
    if p1.depth != p2.depth:
        raise DepthMismatchError(f'cannot compare trees of depth {p1.depth} and {p2.depth}')
    ranges = ranges or {}
    same_root = p1.root == p2.root

    root1 = p1.levels[0].vertex_types[p1.root_type]
    root2 = p2.levels[0].vertex_types[p2.root_type]
    s1 = _attribute_similarity(root1, root2, ranges)

    if p1.depth == 0:
        return CoreSimVector(s1, 1.0, 1.0 if same_root else 0.0, 1.0 if same_root else 0.0, 1.0)

    s2 = _levelwise(p1, p2, _neighbour_attributes(ranges), weighted=True)
    if same_root:
        s3 = 1.0
    else:
        s3 = (p1.neighbour_frequency(p2.root) + p2.neighbour_frequency(p1.root)) / 2
    s4 = _levelwise(p1, p2, _identity_jaccard)
    s5 = _levelwise(p1, p2, _edge_types)
    return CoreSimVector(s1, s2, s3, s4, s5)


def core_similarities(t1: NeighbourhoodTree, t2: NeighbourhoodTree, kb: KnowledgeBase) -> CoreSimVector:
    """
    Core similarities of two neighbourhood trees built from the same knowledge base.
    """
    if t1.depth != t2.depth:
        raise DepthMismatchError(f'cannot compare trees of depth {t1.depth} and {t2.depth}')
    return profile_similarities(frequency_profile(t1, kb), frequency_profile(t2, kb), kb.numeric_ranges)


def combined_similarity(v: Sequence[float], interp: SimilarityInterpretation) -> float:
    """
    Weighted sum of the core similarities, clipped to 1 against rounding.
    """
    return min(1.0, sum(w * s for w, s in zip(interp.weights, v)))


def parse_interpretations(text: str) -> List[SimilarityInterpretation]:
    """
    Parse interpretation lines `interp <name> <w1> <w2> <w3> <w4> <w5>`.
    Blank lines and lines starting with `%` or `#` are ignored. The order of the lines is kept.

    Args:
        text: Content of an interpretation file.

    Returns:
        The normalised interpretations.
    """
    interpretations: Dict[str, SimilarityInterpretation] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line[0] in '%#':
            continue
        fields = line.split()
        if fields[0] != 'interp' or len(fields) != CORE_SIMILARITY_COUNT + 2:
            raise ConfigError(f'line {line_number}: expected "interp <name> <w1> .. <w5>", got {line!r}')
        name = fields[1]
        if name in interpretations:
            raise ConfigError(f'line {line_number}: interpretation {name!r} defined twice')
        try:
            weights = [float(field) for field in fields[2:]]
        except ValueError:
            raise ConfigError(f'line {line_number}: weights must be numbers') from None
        interpretations[name] = SimilarityInterpretation.from_weights(name, weights)
    if not interpretations:
        raise ConfigError('no interpretation defined')
    return list(interpretations.values())


def read_interpretations(path: str) -> List[SimilarityInterpretation]:
    try:
        text = read_text(path)
    except KBParseError as e:
        raise ConfigError(str(e)) from None
    interpretations = parse_interpretations(text)
    logger.info('Loaded %d interpretations from %s', len(interpretations), path)
    return interpretations
