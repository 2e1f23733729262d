import csv
import json
import os

import pytest

from ReLatent._cmd import main as cmd
from ReLatent.Analytics import label_entropy
from ReLatent.KnowledgeBase import read_kb

from .conftest import INTERPRETATIONS, TOY_FACTS, TOY_SCHEMA


def learning_arguments(command, out, *extra):
    return [command, '--out', str(out), '--schema', TOY_SCHEMA, '--facts', TOY_FACTS, '--interps', INTERPRETATIONS,
            '--depths', '1', '--k', '2', *extra]


def csv_rows(path):
    with open(path, encoding='utf-8') as file:
        lines = file.read().splitlines()
    assert lines[0].startswith('# relatent ')
    return list(csv.reader(lines[1:]))


def first_line(path):
    with open(path, encoding='utf-8') as file:
        return file.readline()


class TestArgumentParser:
    def test_missing_k(self, tmp_path):
        arguments = learning_arguments('learn', tmp_path)
        arguments.remove('--k')
        arguments.remove('2')
        with pytest.raises(SystemExit):
            cmd.main(arguments)

    def test_exclusive_k(self, tmp_path):
        with pytest.raises(SystemExit):
            cmd.main(learning_arguments('learn', tmp_path, '--auto-k'))

    def test_no_abbreviations(self, tmp_path):
        with pytest.raises(SystemExit):
            cmd.main(['generate', '--out', str(tmp_path), '--prof', '2'])

    def test_config(self):
        arguments = cmd.create_argument_parser().parse_args(
            ['explain', '--out', 'o', '--schema', 's', '--facts', 'f', '--interps', 'i', '--depths', '1,2', '--k', '3',
             '--predicate', 'a', '--predicate', 'b'])
        config = cmd.config_from_arguments(arguments)
        assert config.depths == (1, 2)
        assert config.predicates == ('a', 'b')
        assert config.k_policy.k == 3


class TestLearn:
    def test_artifacts(self, tmp_path):
        assert cmd.main(learning_arguments('learn', tmp_path)) == cmd.EXIT_OK
        latent = read_kb(str(tmp_path / 'latent_schema.txt'), str(tmp_path / 'latent_facts.txt'))
        assert latent.facts_of('latent_person_edges_1_c0') == [('profA',), ('profB',), ('profC',)]
        assert os.path.exists(tmp_path / 'clustering_person_edges_1.csv')
        assert csv_rows(tmp_path / 'clustering_person_edges_1.csv')[0] == ['object_id', 'cluster_index']

        with open(tmp_path / 'provenance.jsonl', encoding='utf-8') as file:
            records = [json.loads(line) for line in file]
        assert records[0]['record'] == 'header'
        assert records[0]['command'] == 'learn'
        candidates = [record for record in records if record['record'] == 'candidate']
        predicates = [record for record in records if record['record'] == 'predicate']
        assert all(record['accepted'] for record in candidates)
        assert len(predicates) == len(latent.schema.predicates)

    @pytest.mark.parametrize("command", ['learn', 'explain', 'analyze', 'sweep', 'generate'])
    def test_reproducible(self, tmp_path, command):
        first, second = tmp_path / 'first', tmp_path / 'second'
        if command == 'generate':
            sizes = ['--professors', '2', '--students', '4', '--courses', '2']
            arguments = [['generate', '--out', str(out), *sizes] for out in (first, second)]
        else:
            arguments = [learning_arguments(command, first), learning_arguments(command, second, '--jobs', '2')]
        assert cmd.main(arguments[0]) == cmd.EXIT_OK
        assert cmd.main(arguments[1]) == cmd.EXIT_OK
        names = sorted(os.listdir(first))
        assert names == sorted(os.listdir(second))
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_one_configuration_hash(self, tmp_path):
        cmd.main(learning_arguments('learn', tmp_path))
        hashes = set()
        for name in os.listdir(tmp_path):
            line = first_line(tmp_path / name)
            if name.endswith('.jsonl'):
                hashes.add(json.loads(line)['config'])
            else:
                hashes.add(line.split('config=')[1].strip())
        assert len(hashes) == 1

    def test_seed_changes_hash(self, tmp_path):
        cmd.main(learning_arguments('learn', tmp_path / 'a'))
        cmd.main(learning_arguments('learn', tmp_path / 'b', '--seed', '1'))
        assert first_line(tmp_path / 'a' / 'latent_facts.txt') != first_line(tmp_path / 'b' / 'latent_facts.txt')


class TestExplain:
    @pytest.mark.parametrize("theta", ['0.3', '0.5'])
    def test_print(self, tmp_path, capsys, theta):
        code = cmd.main(learning_arguments('explain', tmp_path, '--theta', theta, '--predicate',
                                           'latent_person_edges_1_c0', '--print'))
        assert code == cmd.EXIT_OK
        output = capsys.readouterr().out
        assert 'edge advisedBy' in output
        assert 'edge teaches' in output
        assert 'edge member' not in output
        with open(tmp_path / 'explanations.txt', encoding='utf-8') as file:
            assert file.read().split('\n', 1)[1] == output

    def test_unknown_predicate(self, tmp_path):
        code = cmd.main(learning_arguments('explain', tmp_path, '--predicate', 'latent_nothing'))
        assert code == cmd.EXIT_RUNTIME


class TestAnalyze:
    def test_diagnostics(self, tmp_path, toy_kb):
        assert cmd.main(learning_arguments('analyze', tmp_path)) == cmd.EXIT_OK
        rows = csv_rows(tmp_path / 'diagnostics.csv')
        assert rows[0] == ['predicate', 'origin', 'groundings', 'entropy']
        advised = next(row for row in rows if row[:2] == ['advisedBy', 'original'])
        assert advised[2] == '5'
        assert float(advised[3]) == label_entropy(toy_kb, 'advisedBy')
        complexity = csv_rows(tmp_path / 'complexity.csv')
        assert [row[0] for row in complexity] == ['representation', 'original', 'latent']
        assert complexity[1][1] == '8'


class TestSweep:
    def test_rows(self, tmp_path):
        arguments = learning_arguments('sweep', tmp_path, '--alphas', '0.5')
        assert cmd.main(arguments) == cmd.EXIT_OK
        rows = csv_rows(tmp_path / 'sweep.csv')
        assert rows[0] == ['alpha', 'features', 'facts', 'accuracy', 'feature_ratio', 'fact_ratio']
        assert [row[0] for row in rows[1:]] == ['1.0', '0.5']
        assert rows[1][4:] == ['1.0', '1.0']


class TestGenerate:
    def test_generate(self, tmp_path):
        code = cmd.main(['generate', '--out', str(tmp_path), '--professors', '2', '--students', '4', '--courses', '2'])
        assert code == cmd.EXIT_OK
        kb = read_kb(str(tmp_path / 'schema.txt'), str(tmp_path / 'facts.txt'))
        assert len(kb.entities) == 8
        assert len(kb.labels) == 6

    def test_invalid(self, tmp_path):
        assert cmd.main(['generate', '--out', str(tmp_path), '--professors', '0']) == cmd.EXIT_CONFIG


class TestExitCodes:
    def test_config_error(self, tmp_path):
        assert cmd.main(learning_arguments('explain', tmp_path, '--theta', '-1')) == cmd.EXIT_CONFIG

    def test_bad_interpretations(self, tmp_path):
        interps = tmp_path / 'interps.txt'
        interps.write_text('interp broken 1 2\n')
        arguments = learning_arguments('learn', tmp_path / 'out')
        arguments[arguments.index(INTERPRETATIONS)] = str(interps)
        assert cmd.main(arguments) == cmd.EXIT_CONFIG

    def test_parse_error(self, tmp_path):
        facts = tmp_path / 'facts.txt'
        facts.write_text('advisedBy(s1 profA).\n')
        arguments = learning_arguments('learn', tmp_path / 'out')
        arguments[arguments.index(TOY_FACTS)] = str(facts)
        assert cmd.main(arguments) == cmd.EXIT_PARSE

    def test_missing_file(self, tmp_path):
        arguments = learning_arguments('learn', tmp_path / 'out')
        arguments[arguments.index(TOY_SCHEMA)] = str(tmp_path / 'missing.txt')
        assert cmd.main(arguments) == cmd.EXIT_RUNTIME

    def test_zero_jobs(self, tmp_path):
        assert cmd.main(learning_arguments('learn', tmp_path, '--jobs', '0')) == cmd.EXIT_CONFIG

    @pytest.mark.parametrize("replaced", [TOY_SCHEMA, TOY_FACTS])
    def test_invalid_utf8(self, tmp_path, replaced):
        broken = tmp_path / 'broken.txt'
        broken.write_bytes(b'% comment\nperson(prof\xff).\n')
        arguments = learning_arguments('learn', tmp_path / 'out')
        arguments[arguments.index(replaced)] = str(broken)
        assert cmd.main(arguments) == cmd.EXIT_PARSE

    def test_invalid_utf8_interpretations(self, tmp_path):
        broken = tmp_path / 'interps.txt'
        broken.write_bytes(b'interp caf\xe9 1 1 1 1 1\n')
        arguments = learning_arguments('learn', tmp_path / 'out')
        arguments[arguments.index(INTERPRETATIONS)] = str(broken)
        assert cmd.main(arguments) == cmd.EXIT_CONFIG
