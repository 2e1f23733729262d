"""
Deterministic generator of labeled university knowledge bases with professors, students and the courses they teach.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy

from .Errors import ConfigError
from .KnowledgeBase import DISCRETE, NUMERIC, KnowledgeBase, Schema, serialize_facts, serialize_schema

__all__ = ['SyntheticSpec', 'synthetic_kb', 'generate_synthetic']

logger = logging.getLogger(__name__)

PERSON = 'Person'
COURSE = 'Course'
PROFESSOR = 'professor'
STUDENT = 'student'


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Settings of the generator.

    Attributes:
        professors: Number of professors.

        students: Number of students. Student j is advised by professor j mod professors.

        courses: Number of courses. Course c is taught by professor c mod professors.

        ta_rate: Probability that a student teaches (assists) course j mod courses.

        noise: Share of persons whose label is flipped, in [0, 1).

        seed: Seed of all random draws.
    """
    professors: int
    students: int
    courses: int
    ta_rate: float = 1.0
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.professors, self.students, self.courses) < 1:
            raise ConfigError('professors, students and courses must be at least 1')
        if not 0.0 <= self.noise < 1.0:
            raise ConfigError(f'noise must lie in [0, 1), got {self.noise}')
        if not 0.0 <= self.ta_rate <= 1.0:
            raise ConfigError(f'ta_rate must lie in [0, 1], got {self.ta_rate}')


def _schema() -> Schema:
    return Schema(
        entity_types=frozenset({PERSON, COURSE}),
        attribute_decls={'position': (PERSON, DISCRETE), 'phase': (PERSON, DISCRETE), 'years': (PERSON, NUMERIC)},
        relation_decls={'advisedBy': (PERSON, PERSON), 'teaches': (PERSON, COURSE)},
        label_type=PERSON,
    )


def synthetic_kb(spec: SyntheticSpec) -> KnowledgeBase:
    rng = numpy.random.default_rng(spec.seed)
    professors = [f'prof{i}' for i in range(spec.professors)]
    students = [f'stud{j}' for j in range(spec.students)]
    courses = [f'course{c}' for c in range(spec.courses)]

    entities = {**{p: PERSON for p in professors + students}, **{c: COURSE for c in courses}}
    attr_facts = set()
    rel_facts = set()
    for i, professor in enumerate(professors):
        attr_facts.add((professor, 'position', 'faculty_adjunct' if i % 3 == 2 else 'faculty'))
    years = rng.integers(1, 7, size=spec.students)
    assists = rng.random(spec.students) < spec.ta_rate
    for j, student in enumerate(students):
        attr_facts.add((student, 'phase', 'pre_quals' if j % 2 == 0 else 'post_quals'))
        attr_facts.add((student, 'years', float(years[j])))
        rel_facts.add(('advisedBy', (student, professors[j % spec.professors])))
        if assists[j]:
            rel_facts.add(('teaches', (student, courses[j % spec.courses])))
    for c, course in enumerate(courses):
        rel_facts.add(('teaches', (professors[c % spec.professors], course)))

    labels = {**{p: PROFESSOR for p in professors}, **{s: STUDENT for s in students}}
    persons = professors + students
    flipped = rng.choice(len(persons), size=round(spec.noise * len(persons)), replace=False)
    for index in sorted(flipped):
        person = persons[index]
        labels[person] = STUDENT if labels[person] == PROFESSOR else PROFESSOR

    kb = KnowledgeBase(_schema(), entities, frozenset(attr_facts), frozenset(rel_facts), frozenset(), labels)
    logger.info('Generated %d professors, %d students and %d courses, %d flipped labels', spec.professors,
                spec.students, spec.courses, len(flipped))
    return kb


def generate_synthetic(spec: SyntheticSpec) -> Tuple[str, str]:
    """
    Generate a knowledge base and return its schema and fact texts.
    """
    kb = synthetic_kb(spec)
    return serialize_schema(kb.schema), serialize_facts(kb)
