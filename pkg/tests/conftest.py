import os

import pytest

import ReLatent
from ReLatent.KnowledgeBase import parse_kb, read_kb
from ReLatent.Similarity import SimilarityInterpretation

DATA = os.path.join(os.path.dirname(ReLatent.__file__), 'data')
TOY_SCHEMA = os.path.join(DATA, 'toy_schema.txt')
TOY_FACTS = os.path.join(DATA, 'toy_facts.txt')
INTERPRETATIONS = os.path.join(DATA, 'interpretations.txt')

CHAIN_SCHEMA = """
type Node.
attribute colour(Node, discrete).
attribute weight(Node, numeric).
relation edge(Node, Node).
"""


@pytest.fixture
def toy_kb():
    return read_kb(TOY_SCHEMA, TOY_FACTS)


@pytest.fixture
def chain_kb():
    return parse_kb(CHAIN_SCHEMA, 'edge(a, b).\nedge(b, c).\n')


@pytest.fixture
def node_kb():
    """
    Factory for knowledge bases over the chain schema.
    """
    def build(facts: str):
        return parse_kb(CHAIN_SCHEMA, facts)
    return build


@pytest.fixture
def edges_interp():
    return SimilarityInterpretation.from_weights('edges', [0, 0, 0, 0, 1])


@pytest.fixture
def uniform_interp():
    return SimilarityInterpretation.from_weights('uniform', [1, 1, 1, 1, 1])
