"""
Depth-bounded neighbourhood trees and the per-level relative-frequency profiles of their elements.

A neighbourhood tree summarises all paths of length <= d that start in its root. Paths may return to vertices they
already visited, so a vertex reached over several paths appears once per path.
"""
import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Tuple

from .Errors import ConfigError, UnknownEntityError
from .KnowledgeBase import KnowledgeBase, NUMERIC, Value, format_value

__all__ = ['DISCRETE_VALUE', 'NUMERIC_MEAN', 'EDGE_TYPE', 'VERTEX_IDENTITY', 'ANY_TYPE', 'ElementKey', 'TreeVertex',
           'NeighbourhoodTree', 'TypeProfile', 'LevelProfile', 'FrequencyProfile', 'build_ntree',
           'frequency_profile', 'dump_tree']

logger = logging.getLogger(__name__)

DISCRETE_VALUE = 'discrete'
NUMERIC_MEAN = 'numeric'
EDGE_TYPE = 'edge'
VERTEX_IDENTITY = 'identity'
# Edge types are counted per level, not per vertex type
ANY_TYPE = '*'


class ElementKey(NamedTuple):
    level: int
    vertex_type: str
    category: str
    name: str


@dataclass(frozen=True)
class TreeVertex:
    entity: str
    entity_type: str
    edge_type: Optional[str]
    parent: Optional[int]
    attributes: Tuple[Tuple[str, Value], ...]


@dataclass(frozen=True)
class NeighbourhoodTree:
    """
    Rooted summary of one entity's relational context.

    Attributes:
        root: Entity id of the root.

        depth: Maximal path length d.

        levels: d + 1 tuples of vertices. Level 0 holds the root only; every vertex of level k + 1 keeps the index
                of its parent in level k and the relation (edge type) that connects them.
    """
    root: str
    depth: int
    levels: Tuple[Tuple[TreeVertex, ...], ...]

    @property
    def root_type(self) -> str:
        return self.levels[0][0].entity_type

    def size(self) -> int:
        return sum(len(level) for level in self.levels)


def _vertex(kb: KnowledgeBase, entity: str, edge_type: Optional[str], parent: Optional[int]) -> TreeVertex:
    return TreeVertex(entity, kb.entities[entity], edge_type, parent, kb.attributes_of(entity))


def _neighbours(kb: KnowledgeBase, entity: str) -> Iterator[Tuple[str, str]]:
    for relation, args, position in kb.incidences(entity):
        for other_position, other in enumerate(args):
            if other_position != position:
                yield relation, other


def build_ntree(kb: KnowledgeBase, root: str, d: int, fan_out: Optional[int] = None) -> NeighbourhoodTree:
    """
    Build the neighbourhood tree of an entity.

    Args:
        kb: The knowledge base.

        root: Entity id of the root.

        d: Depth of the tree (maximal path length).

        fan_out: Optional cap on the number of children per vertex. Children are taken in the sorted incidence
                 order of the knowledge base, so the cap is deterministic.

    Returns:
        The neighbourhood tree.
    """
    if root not in kb.entities:
        raise UnknownEntityError(f'unknown root entity {root!r}')
    if d < 0:
        raise ConfigError(f'tree depth must be non-negative, got {d}')

    levels = [(_vertex(kb, root, None, None),)]
    for _ in range(d):
        next_level = []
        for index, vertex in enumerate(levels[-1]):
            neighbours = _neighbours(kb, vertex.entity)
            if fan_out is not None:
                neighbours = itertools.islice(neighbours, fan_out)
            next_level += [_vertex(kb, entity, relation, index) for relation, entity in neighbours]
        levels.append(tuple(next_level))
    return NeighbourhoodTree(root, d, tuple(levels))


@dataclass(frozen=True)
class TypeProfile:
    """
    Relative frequencies of the elements of one vertex type at one level.

    Attributes:
        count: Number of vertices of this type at the level.

        discrete: Discrete attribute -> value -> relative frequency.

        numeric: Numeric attribute -> mean value.

        identities: Entity id -> relative frequency among the vertices of this type.
    """
    count: int
    discrete: Mapping[str, Mapping[str, float]]
    numeric: Mapping[str, float]
    identities: Mapping[str, float]


@dataclass(frozen=True)
class LevelProfile:
    size: int
    edge_types: Mapping[str, float]
    identity_counts: Mapping[str, int]
    vertex_types: Mapping[str, TypeProfile]


@dataclass(frozen=True)
class FrequencyProfile:
    root: str
    root_type: str
    depth: int
    levels: Tuple[LevelProfile, ...]

    def neighbour_frequency(self, entity: str) -> float:
        """
        Relative frequency of an entity among all non-root vertices of the tree.
        """
        total = sum(level.size for level in self.levels[1:])
        if total == 0:
            return 0.0
        return sum(level.identity_counts.get(entity, 0) for level in self.levels[1:]) / total

    def elements(self) -> Dict[ElementKey, float]:
        """
        Flatten the profile into element -> relative frequency (numeric attributes map to their mean).
        """
        elements = {}
        for level_index, level in enumerate(self.levels):
            for edge_type, frequency in level.edge_types.items():
                elements[ElementKey(level_index, ANY_TYPE, EDGE_TYPE, edge_type)] = frequency
            for vertex_type, profile in level.vertex_types.items():
                for attribute, distribution in profile.discrete.items():
                    for value, frequency in distribution.items():
                        key = ElementKey(level_index, vertex_type, DISCRETE_VALUE, f'{attribute}={value}')
                        elements[key] = frequency
                for attribute, mean in profile.numeric.items():
                    elements[ElementKey(level_index, vertex_type, NUMERIC_MEAN, attribute)] = mean
                for entity, frequency in profile.identities.items():
                    elements[ElementKey(level_index, vertex_type, VERTEX_IDENTITY, entity)] = frequency
        return elements


def _distribution(counts: Counter) -> Dict[str, float]:
    total = sum(counts.values())
    return {key: counts[key] / total for key in sorted(counts)}


def _type_profile(vertices: List[TreeVertex], numeric_attributes) -> TypeProfile:
    value_counts = defaultdict(Counter)
    numeric_values = defaultdict(list)
    for vertex in vertices:
        for attribute, value in vertex.attributes:
            if attribute in numeric_attributes:
                numeric_values[attribute].append(value)
            else:
                value_counts[attribute][value] += 1
    return TypeProfile(
        count=len(vertices),
        discrete={attribute: _distribution(counts) for attribute, counts in sorted(value_counts.items())},
        numeric={attribute: sum(values) / len(values) for attribute, values in sorted(numeric_values.items())},
        identities=_distribution(Counter(vertex.entity for vertex in vertices)),
    )


def frequency_profile(t: NeighbourhoodTree, kb: Optional[KnowledgeBase] = None) -> FrequencyProfile:
    """
    Compute the relative frequencies of all elements of a tree per level and vertex type.

    Edge-type frequencies at level k are the share of each relation among all edges entering level k.
    Discrete attributes yield a value distribution, numeric attributes their mean value.

    Args:
        t: The neighbourhood tree.

        kb: Knowledge base the tree was built from. Only needed to tell numeric from discrete attributes when
            numeric values could be mistaken for strings; floats are recognised without it.

    Returns:
        The frequency profile.
    """
    if kb is not None:
        numeric_attributes = {name for name, (_, kind) in kb.schema.attribute_decls.items() if kind == NUMERIC}
    else:
        numeric_attributes = {attribute for level in t.levels for vertex in level
                              for attribute, value in vertex.attributes if isinstance(value, float)}

    levels = []
    for level in t.levels:
        by_type = defaultdict(list)
        for vertex in level:
            by_type[vertex.entity_type].append(vertex)
        edge_counts = Counter(vertex.edge_type for vertex in level if vertex.edge_type is not None)
        levels.append(LevelProfile(
            size=len(level),
            edge_types=_distribution(edge_counts),
            identity_counts=dict(sorted(Counter(vertex.entity for vertex in level).items())),
            vertex_types={vertex_type: _type_profile(vertices, numeric_attributes)
                          for vertex_type, vertices in sorted(by_type.items())},
        ))
    return FrequencyProfile(t.root, t.root_type, t.depth, tuple(levels))


def dump_tree(t: NeighbourhoodTree) -> str:
    """
    Render a tree as indented text, one vertex per line, children below their parent.
    """
    children = [defaultdict(list) for _ in t.levels]
    for level_index, level in enumerate(t.levels[1:], start=1):
        for index, vertex in enumerate(level):
            children[level_index - 1][vertex.parent].append(index)

    lines = []

    def visit(level_index: int, index: int) -> None:
        vertex = t.levels[level_index][index]
        text = '  ' * level_index
        if vertex.edge_type is not None:
            text += f'{vertex.edge_type} '
        text += f'{vertex.entity} [{vertex.entity_type}]'
        if vertex.attributes:
            text += ' {' + ','.join(f'{name}={format_value(value)}' for name, value in vertex.attributes) + '}'
        lines.append(text)
        for child in children[level_index].get(index, ()):
            visit(level_index + 1, child)

    visit(0, 0)
    return ''.join(line + '\n' for line in lines)
