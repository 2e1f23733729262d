import pytest

from ReLatent import KnowledgeBase
from ReLatent.Errors import ArityError, DuplicateEntityError, FactValueError, KBParseError, UnknownNameError, \
    UnknownPredicateError

UNIVERSITY = """
% comment
type Person.
type Course.
attribute position(Person, discrete).
attribute years(Person, numeric).
relation advisedBy(Person, Person).
relation teaches(Person, Course).
feature tenured(Person).
label Person.
"""


class TestKnowledgeBase:
    def test_parse_toy(self, toy_kb):
        assert len(toy_kb.entities) == 12
        assert len(toy_kb.labels) == 8
        assert toy_kb.entities['profA'] == 'Person'
        assert toy_kb.entities['c1'] == 'Course'
        assert toy_kb.schema.label_type == 'Person'

    def test_implicit_entities(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, 'advisedBy(profA,stuB).')
        assert kb.entities == {'profA': 'Person', 'stuB': 'Person'}
        assert kb.rel_facts == {('advisedBy', ('profA', 'stuB'))}

    def test_empty_fact_text(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, '')
        assert kb.entities == {}

    def test_duplicate_facts_collapse(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, 'teaches(p, c).\nteaches(p, c).\nteaches(q, c).\n')
        assert KnowledgeBase.groundings(kb, 'teaches') == [
            KnowledgeBase.Grounding('teaches', ('p', 'c')),
            KnowledgeBase.Grounding('teaches', ('q', 'c')),
        ]

    def test_syntax_error_position(self):
        with pytest.raises(KBParseError) as error:
            KnowledgeBase.parse_kb(UNIVERSITY, 'person(p).\nteaches(p c).\n')
        assert error.value.line == 2
        assert error.value.column == 11
        assert 'line 2' in str(error.value)

    def test_schema_error_position(self):
        with pytest.raises(KBParseError) as error:
            KnowledgeBase.parse_schema('type A.\nattribute a(A, ordinal).\n')
        assert (error.value.line, error.value.column) == (2, 16)

    def test_unicode_names(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, 'advisedBy(josé, zoë).\nposition(zoë, profesoră).\n')
        assert kb.entities == {'josé': 'Person', 'zoë': 'Person'}
        assert KnowledgeBase.format_value('zoë') == 'zoë'
        assert KnowledgeBase.parse_kb(KnowledgeBase.serialize_schema(kb.schema),
                                      KnowledgeBase.serialize_facts(kb)).attr_facts == kb.attr_facts

    def test_invalid_utf8(self, tmp_path):
        path = tmp_path / 'facts.txt'
        path.write_bytes(b'person(a).\nperson(b\xff).\n')
        with pytest.raises(KBParseError) as error:
            KnowledgeBase.read_text(str(path))
        assert (error.value.line, error.value.column) == (2, 9)

    def test_unknown_predicate(self):
        with pytest.raises(UnknownNameError):
            KnowledgeBase.parse_kb(UNIVERSITY, 'likes(p, q).')

    def test_arity(self):
        with pytest.raises(ArityError):
            KnowledgeBase.parse_kb(UNIVERSITY, 'advisedBy(p, q, r).')

    def test_type_mismatch(self):
        with pytest.raises(KBParseError):
            KnowledgeBase.parse_kb(UNIVERSITY, 'teaches(p, c).\nteaches(c, p).\n')

    def test_duplicate_entity(self):
        with pytest.raises(DuplicateEntityError):
            KnowledgeBase.parse_kb(UNIVERSITY, 'person(x).\ncourse(x).\n')

    def test_redeclaration_same_type(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, 'person(x).\nperson(x).\n')
        assert kb.entities == {'x': 'Person'}

    @pytest.mark.parametrize("facts", ['years(p, inf).', 'years(p, abc).', 'years(p, 1).\nyears(p, 2).'])
    def test_invalid_numeric(self, facts):
        with pytest.raises(FactValueError):
            KnowledgeBase.parse_kb(UNIVERSITY, facts)

    def test_conflicting_labels(self):
        with pytest.raises(FactValueError):
            KnowledgeBase.parse_kb(UNIVERSITY, 'label(p, a).\nlabel(p, b).\n')

    def test_label_requires_declaration(self):
        schema = 'type Person.\n'
        with pytest.raises(UnknownNameError):
            KnowledgeBase.parse_kb(schema, 'label(p, a).')

    def test_discrete_attribute_may_repeat(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, 'position(p, faculty).\nposition(p, dean).\n')
        assert kb.attributes_of('p') == (('position', 'dean'), ('position', 'faculty'))

    def test_numeric_values_are_floats(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, 'years(p, 3).\nyears(q, 7).\n')
        assert kb.attributes_of('p') == (('years', 3.0),)
        assert kb.numeric_ranges == {'years': 4.0}

    def test_feature_facts(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, 'tenured(p).')
        assert kb.facts_of('tenured') == [('p',)]
        assert kb.schema.arity('tenured') == 1

    def test_unknown_groundings(self, toy_kb):
        with pytest.raises(UnknownPredicateError):
            KnowledgeBase.groundings(toy_kb, 'likes')

    def test_incidences_sorted(self, toy_kb):
        assert toy_kb.incidences('profA') == (
            ('advisedBy', ('s1', 'profA'), 1),
            ('advisedBy', ('s2', 'profA'), 1),
            ('teaches', ('profA', 'c1'), 0),
        )
        assert toy_kb.incidences('nobody') == ()

    @pytest.mark.parametrize("schema", [
        'type A.\nrelation r(A).\n',
        'type A.\nattribute a(A, discrete).\nrelation a(A, A).\n',
        'type A.\nattribute a(A, ordinal).\n',
        'type A.\nrelation r(A, B).\n',
        'type A.\nrelation a(A, A).\n',
    ])
    def test_invalid_schema(self, schema):
        with pytest.raises(KBParseError):
            KnowledgeBase.parse_schema(schema)

    def test_serialize_round_trip(self, toy_kb):
        schema_text = KnowledgeBase.serialize_schema(toy_kb.schema)
        facts_text = KnowledgeBase.serialize_facts(toy_kb)
        parsed = KnowledgeBase.parse_kb(schema_text, facts_text)
        assert parsed.entities == toy_kb.entities
        assert parsed.labels == toy_kb.labels
        for predicate in toy_kb.schema.predicates:
            assert KnowledgeBase.groundings(parsed, predicate) == KnowledgeBase.groundings(toy_kb, predicate)
        assert KnowledgeBase.serialize_facts(parsed) == facts_text

    def test_quoted_values(self):
        kb = KnowledgeBase.parse_kb(UNIVERSITY, 'position(p, "full professor").\nyears(p, 2.5).\n')
        text = KnowledgeBase.serialize_facts(kb)
        assert 'position(p, "full professor").' in text
        assert 'years(p, 2.5).' in text
        assert KnowledgeBase.parse_kb(UNIVERSITY, text).attr_facts == kb.attr_facts

    def test_format_value(self):
        assert KnowledgeBase.format_value('faculty') == 'faculty'
        assert KnowledgeBase.format_value(3.0) == '3.0'
        assert KnowledgeBase.format_value('a "b"') == '"a \\"b\\""'
