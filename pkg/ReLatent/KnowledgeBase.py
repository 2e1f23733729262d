"""
Typed relational knowledge bases: schema and fact parsing, indexing, groundings and the canonical text form.

A knowledge base is a hypergraph whose vertices are typed entities and whose hyperedges are relation facts.
Attribute facts attach discrete or numeric values to single entities.
"""
import logging
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Tuple, Union

import pyparsing as pp

from .Errors import ArityError, DuplicateEntityError, FactValueError, KBParseError, UnknownNameError, \
    UnknownPredicateError

__all__ = ['DISCRETE', 'NUMERIC', 'Schema', 'KnowledgeBase', 'Grounding', 'parse_schema', 'parse_facts',
           'parse_kb', 'read_kb', 'read_text', 'groundings', 'serialize_schema', 'serialize_facts', 'format_value']

logger = logging.getLogger(__name__)

DISCRETE = 'discrete'
NUMERIC = 'numeric'
LABEL_PREDICATE = 'label'

Value = Union[str, float]


class Grounding(NamedTuple):
    predicate: str
    args: Tuple[str, ...]


class _Statement(NamedTuple):
    keyword: str
    name: str
    args: Tuple[str, ...]
    line: int
    column: int


@dataclass(frozen=True)
class Schema:
    """
    Declared entity types, attributes, relations and unary features of a knowledge base.

    Attributes:
        entity_types: Names of the entity types.

        attribute_decls: Attribute name -> (subject entity type, value kind).

        relation_decls: Relation name -> argument entity types (arity >= 2).

        feature_decls: Unary predicate name -> entity type.

        label_type: Entity type carrying labels, if any.
    """
    entity_types: FrozenSet[str]
    attribute_decls: Mapping[str, Tuple[str, str]]
    relation_decls: Mapping[str, Tuple[str, ...]]
    feature_decls: Mapping[str, str] = field(default_factory=dict)
    label_type: Optional[str] = None

    def __post_init__(self):
        problem = self.find_problem()
        if problem is not None:
            raise KBParseError(problem)

    def find_problem(self) -> Optional[str]:
        """
        Check the schema invariants.

        Returns:
            A description of the first violated invariant or None.
        """
        names = [t.lower() for t in self.entity_types] + [LABEL_PREDICATE]
        for attribute, (subject, kind) in self.attribute_decls.items():
            if subject not in self.entity_types:
                return f'attribute {attribute!r} references unknown type {subject!r}'
            if kind not in (DISCRETE, NUMERIC):
                return f'attribute {attribute!r} has unknown value kind {kind!r}'
        for relation, arg_types in self.relation_decls.items():
            if len(arg_types) < 2:
                return f'relation {relation!r} must have at least two arguments'
            for arg_type in arg_types:
                if arg_type not in self.entity_types:
                    return f'relation {relation!r} references unknown type {arg_type!r}'
        for feature, subject in self.feature_decls.items():
            if subject not in self.entity_types:
                return f'feature {feature!r} references unknown type {subject!r}'
        names += list(self.attribute_decls) + list(self.relation_decls) + list(self.feature_decls)
        seen = set()
        for name in names:
            if name in seen:
                return f'name {name!r} is declared more than once'
            seen.add(name)
        if self.label_type is not None and self.label_type not in self.entity_types:
            return f'label references unknown type {self.label_type!r}'
        return None

    @cached_property
    def type_by_declaration(self) -> Dict[str, str]:
        return {entity_type.lower(): entity_type for entity_type in self.entity_types}

    @property
    def predicates(self) -> List[str]:
        """
        All attribute, relation and feature names, sorted.
        """
        return sorted(list(self.attribute_decls) + list(self.relation_decls) + list(self.feature_decls))

    def arity(self, predicate: str) -> int:
        if predicate in self.relation_decls:
            return len(self.relation_decls[predicate])
        if predicate in self.attribute_decls:
            return 2
        if predicate in self.feature_decls:
            return 1
        raise UnknownPredicateError(f'unknown predicate {predicate!r}')


@dataclass(frozen=True)
class KnowledgeBase:
    """
    Immutable, indexed knowledge base. Safe to share between workers.

    Attributes:
        schema: The schema the facts were checked against.

        entities: Entity id -> entity type.

        attr_facts: Set of (entity, attribute, value). Numeric values are floats.

        rel_facts: Set of (relation, argument tuple).

        unary_facts: Set of (feature, entity).

        labels: Entity id -> label name.
    """
    schema: Schema
    entities: Mapping[str, str]
    attr_facts: FrozenSet[Tuple[str, str, Value]] = frozenset()
    rel_facts: FrozenSet[Tuple[str, Tuple[str, ...]]] = frozenset()
    unary_facts: FrozenSet[Tuple[str, str]] = frozenset()
    labels: Mapping[str, str] = field(default_factory=dict)

    @cached_property
    def adjacency(self) -> Dict[str, Tuple[Tuple[str, Tuple[str, ...], int], ...]]:
        """
        Entity -> sorted incidences (relation, arguments, argument position).
        """
        incidences = defaultdict(list)
        for relation, args in self.rel_facts:
            for position, entity in enumerate(args):
                incidences[entity].append((relation, args, position))
        return {entity: tuple(sorted(items)) for entity, items in incidences.items()}

    @cached_property
    def attributes(self) -> Dict[str, Tuple[Tuple[str, Value], ...]]:
        """
        Entity -> sorted (attribute, value) pairs.
        """
        values = defaultdict(list)
        for entity, attribute, value in self.attr_facts:
            values[entity].append((attribute, value))
        return {entity: tuple(sorted(items, key=lambda item: (item[0], _value_text(item[1]))))
                for entity, items in values.items()}

    @cached_property
    def numeric_ranges(self) -> Dict[str, float]:
        """
        Numeric attribute -> max - min of its values in the knowledge base.
        """
        bounds = {}
        for _, attribute, value in self.attr_facts:
            if self.schema.attribute_decls[attribute][1] != NUMERIC:
                continue
            low, high = bounds.get(attribute, (value, value))
            bounds[attribute] = (min(low, value), max(high, value))
        return {attribute: high - low for attribute, (low, high) in bounds.items()}

    @cached_property
    def _facts_by_predicate(self) -> Dict[str, List[Tuple[str, ...]]]:
        facts = defaultdict(list)
        for relation, args in self.rel_facts:
            facts[relation].append(args)
        for feature, entity in self.unary_facts:
            facts[feature].append((entity,))
        for entity, attribute, value in self.attr_facts:
            facts[attribute].append((entity, _value_text(value)))
        return {predicate: sorted(args) for predicate, args in facts.items()}

    def incidences(self, entity: str) -> Tuple[Tuple[str, Tuple[str, ...], int], ...]:
        return self.adjacency.get(entity, ())

    def attributes_of(self, entity: str) -> Tuple[Tuple[str, Value], ...]:
        return self.attributes.get(entity, ())

    def entities_of_type(self, entity_type: str) -> List[str]:
        return sorted(entity for entity, t in self.entities.items() if t == entity_type)

    def facts_of(self, predicate: str) -> List[Tuple[str, ...]]:
        """
        Sorted argument tuples of all true groundings of a declared predicate.
        """
        self.schema.arity(predicate)
        return self._facts_by_predicate.get(predicate, [])

    def labeled_entities(self) -> List[str]:
        return sorted(self.labels)


def groundings(kb: KnowledgeBase, predicate: str) -> List[Grounding]:
    """
    List the true groundings of a predicate in lexicographic order of their arguments.

    Args:
        kb: The knowledge base.

        predicate: Attribute, relation or unary feature name.

    Returns:
        The groundings. Duplicated fact lines appear once.
    """
    return [Grounding(predicate, args) for args in kb.facts_of(predicate)]


# Grammar

_IDENT = pp.Regex(r'[^\W\d]\w*')
_BARE_VALUE = re.compile(r'[\w+\-.]+')
_VALUE = pp.QuotedString('"', esc_char='\\') | pp.Regex(_BARE_VALUE.pattern)
_LPAR, _RPAR, _COMMA, _PERIOD = map(pp.Suppress, '(),.')
_COMMENT = pp.Regex(r'%[^\n]*')


def _located(keyword: str, expr: pp.ParserElement) -> pp.ParserElement:
    def to_statement(text, loc, tokens):
        return _Statement(keyword, tokens[0], tuple(tokens[1:]), pp.lineno(loc, text), pp.col(loc, text))
    return expr.set_parse_action(to_statement)


def _schema_grammar() -> pp.ParserElement:
    # `-` disables backtracking after the keyword
    type_decl = _located('type', pp.Keyword('type').suppress() - _IDENT + _PERIOD)
    attribute_decl = _located('attribute', pp.Keyword('attribute').suppress() - _IDENT + _LPAR + _IDENT + _COMMA +
                              (pp.Keyword(DISCRETE) | pp.Keyword(NUMERIC)) + _RPAR + _PERIOD)
    relation_decl = _located('relation', pp.Keyword('relation').suppress() - _IDENT + _LPAR + _IDENT +
                             pp.ZeroOrMore(_COMMA + _IDENT) + _RPAR + _PERIOD)
    feature_decl = _located('feature', pp.Keyword('feature').suppress() - _IDENT + _LPAR + _IDENT + _RPAR + _PERIOD)
    label_decl = _located('label', pp.Keyword(LABEL_PREDICATE).suppress() - _IDENT + _PERIOD)
    grammar = pp.ZeroOrMore(type_decl | attribute_decl | relation_decl | feature_decl | label_decl)
    grammar.ignore(_COMMENT)
    return grammar


def _fact_grammar() -> pp.ParserElement:
    fact = _located('fact', _IDENT + _LPAR - _VALUE + pp.ZeroOrMore(_COMMA + _VALUE) + _RPAR + _PERIOD)
    grammar = pp.ZeroOrMore(fact)
    grammar.ignore(_COMMENT)
    return grammar


_SCHEMA_GRAMMAR = _schema_grammar()
_FACT_GRAMMAR = _fact_grammar()


def _parse_statements(grammar: pp.ParserElement, text: str) -> List[_Statement]:
    try:
        return list(grammar.parse_string(text, parse_all=True))
    except pp.ParseBaseException as e:
        raise KBParseError(f'syntax error: {e.msg}', e.lineno, e.col) from None


# Parsing

def parse_schema(schema_text: str) -> Schema:
    """
    Parse a schema text.

    Args:
        schema_text: Statements `type T.`, `attribute a(T, discrete|numeric).`, `relation r(T1, T2).`,
                     `feature f(T).` and `label T.`

    Returns:
        The validated schema.
    """
    statements = _parse_statements(_SCHEMA_GRAMMAR, schema_text)
    entity_types = set()
    for statement in statements:
        if statement.keyword == 'type':
            entity_types.add(statement.name)

    attributes, relations, features = {}, {}, {}
    label_type = None
    used_names = {t.lower() for t in entity_types} | {LABEL_PREDICATE}
    for statement in statements:
        if statement.keyword == 'type':
            continue
        if statement.keyword == 'label':
            if statement.name not in entity_types:
                raise UnknownNameError(f'unknown type {statement.name!r}', statement.line, statement.column)
            label_type = statement.name
            continue

        if statement.name in used_names:
            raise KBParseError(f'name {statement.name!r} is declared more than once',
                               statement.line, statement.column)
        used_names.add(statement.name)
        arg_types = statement.args[:-1] if statement.keyword == 'attribute' else statement.args
        for arg_type in arg_types:
            if arg_type not in entity_types:
                raise UnknownNameError(f'unknown type {arg_type!r}', statement.line, statement.column)

        if statement.keyword == 'attribute':
            attributes[statement.name] = (statement.args[0], statement.args[1])
        elif statement.keyword == 'relation':
            if len(statement.args) < 2:
                raise ArityError(f'relation {statement.name!r} needs at least two arguments',
                                 statement.line, statement.column)
            relations[statement.name] = tuple(statement.args)
        else:
            features[statement.name] = statement.args[0]

    return Schema(frozenset(entity_types), attributes, relations, features, label_type)


def _check_entity(entities: Dict[str, str], entity: str, expected_type: str, statement: _Statement) -> None:
    # Entities used before (or without) an explicit declaration take the type of their first position
    if entities.setdefault(entity, expected_type) != expected_type:
        raise KBParseError(f'{statement.name}: entity {entity!r} has type {entities[entity]!r}, '
                           f'expected {expected_type!r}', statement.line, statement.column)


def _check_arity(statement: _Statement, arity: int) -> None:
    if len(statement.args) != arity:
        raise ArityError(f'{statement.name} expects {arity} argument(s), got {len(statement.args)}',
                         statement.line, statement.column)


def parse_facts(schema: Schema, facts_text: str) -> KnowledgeBase:
    """
    Parse and type-check a fact text against a schema.

    Args:
        schema: Parsed schema.

        facts_text: Entity declarations (`person(profA).`), attribute, relation, feature and label facts.

    Returns:
        The indexed knowledge base.
    """
    statements = _parse_statements(_FACT_GRAMMAR, facts_text)

    # Entity declarations may appear anywhere in the file
    entities = {}
    for statement in statements:
        entity_type = schema.type_by_declaration.get(statement.name)
        if entity_type is None:
            continue
        _check_arity(statement, 1)
        entity = statement.args[0]
        if entities.get(entity, entity_type) != entity_type:
            raise DuplicateEntityError(f'entity {entity!r} already declared with type {entities[entity]!r}',
                                       statement.line, statement.column)
        entities[entity] = entity_type

    attr_facts, rel_facts, unary_facts = set(), set(), set()
    numeric_values, labels = {}, {}
    for statement in statements:
        name = statement.name
        if name in schema.type_by_declaration:
            continue
        if name == LABEL_PREDICATE:
            if schema.label_type is None:
                raise UnknownNameError('label facts require a `label` declaration in the schema',
                                       statement.line, statement.column)
            _check_arity(statement, 2)
            entity, label = statement.args
            _check_entity(entities, entity, schema.label_type, statement)
            if labels.get(entity, label) != label:
                raise FactValueError(f'entity {entity!r} has conflicting labels', statement.line, statement.column)
            labels[entity] = label
        elif name in schema.attribute_decls:
            _check_arity(statement, 2)
            subject_type, kind = schema.attribute_decls[name]
            entity, value = statement.args
            _check_entity(entities, entity, subject_type, statement)
            if kind == NUMERIC:
                try:
                    value = float(value)
                except ValueError:
                    raise FactValueError(f'{name}: {value!r} is not a number', statement.line,
                                         statement.column) from None
                if not math.isfinite(value):
                    raise FactValueError(f'{name}: {value!r} is not finite', statement.line, statement.column)
                if numeric_values.get((entity, name), value) != value:
                    raise FactValueError(f'{name}: entity {entity!r} has more than one value',
                                         statement.line, statement.column)
                numeric_values[(entity, name)] = value
            attr_facts.add((entity, name, value))
        elif name in schema.relation_decls:
            arg_types = schema.relation_decls[name]
            _check_arity(statement, len(arg_types))
            for entity, arg_type in zip(statement.args, arg_types):
                _check_entity(entities, entity, arg_type, statement)
            rel_facts.add((name, tuple(statement.args)))
        elif name in schema.feature_decls:
            _check_arity(statement, 1)
            _check_entity(entities, statement.args[0], schema.feature_decls[name], statement)
            unary_facts.add((name, statement.args[0]))
        else:
            raise UnknownNameError(f'unknown predicate {name!r}', statement.line, statement.column)

    kb = KnowledgeBase(schema, entities, frozenset(attr_facts), frozenset(rel_facts), frozenset(unary_facts), labels)
    logger.debug('Parsed knowledge base: %d entities, %d attribute facts, %d relation facts, %d labels',
                 len(entities), len(attr_facts), len(rel_facts), len(labels))
    return kb


def parse_kb(schema_text: str, facts_text: str) -> KnowledgeBase:
    """
    Parse a schema and a fact text into a knowledge base.

    Args:
        schema_text: Schema statements.

        facts_text: Fact statements.

    Returns:
        The indexed knowledge base.
    """
    return parse_facts(parse_schema(schema_text), facts_text)


def read_text(path: str) -> str:
    """
    Read a UTF-8 file. Undecodable bytes raise `KBParseError` with their line and column.
    """
    with open(path, 'rb') as file:
        data = file.read()
    try:
        return data.decode('utf-8')
    except UnicodeDecodeError as e:
        line = data.count(b'\n', 0, e.start) + 1
        column = e.start - data.rfind(b'\n', 0, e.start)
        raise KBParseError(f'{path}: invalid UTF-8 byte 0x{data[e.start]:02x}', line, column) from None


def read_kb(schema_path: str, facts_path: str) -> KnowledgeBase:
    kb = parse_kb(read_text(schema_path), read_text(facts_path))
    logger.info('Loaded %s: %d entities, %d relation facts', facts_path, len(kb.entities), len(kb.rel_facts))
    return kb


# Canonical text form

def _value_text(value: Value) -> str:
    return repr(value) if isinstance(value, float) else value


def format_value(value: Value) -> str:
    """
    Render an argument the way the fact grammar reads it back.
    """
    value = _value_text(value)
    if _BARE_VALUE.fullmatch(value):
        return value
    escaped = value.replace('\\', '\\\\').replace('"', '\\"')
    return f'"{escaped}"'


def _fact_line(predicate: str, args) -> str:
    return f'{predicate}({", ".join(format_value(arg) for arg in args)}).'


def serialize_schema(schema: Schema) -> str:
    lines = [f'type {entity_type}.' for entity_type in sorted(schema.entity_types)]
    lines += [f'attribute {name}({subject}, {kind}).'
              for name, (subject, kind) in sorted(schema.attribute_decls.items())]
    lines += [f'relation {name}({", ".join(arg_types)}).' for name, arg_types in sorted(schema.relation_decls.items())]
    lines += [f'feature {name}({subject}).' for name, subject in sorted(schema.feature_decls.items())]
    if schema.label_type is not None:
        lines.append(f'{LABEL_PREDICATE} {schema.label_type}.')
    return ''.join(line + '\n' for line in lines)


def serialize_facts(kb: KnowledgeBase) -> str:
    lines = [_fact_line(entity_type.lower(), (entity,))
             for entity, entity_type in sorted(kb.entities.items(), key=lambda item: (item[1], item[0]))]
    for predicate in kb.schema.predicates:
        lines += [_fact_line(predicate, args) for args in kb.facts_of(predicate)]
    lines += [_fact_line(LABEL_PREDICATE, (entity, label)) for entity, label in sorted(kb.labels.items())]
    return ''.join(line + '\n' for line in lines)
