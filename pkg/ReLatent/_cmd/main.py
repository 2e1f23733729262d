import argparse
import dataclasses
import hashlib
import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from ReLatent import __version__
from ReLatent.Analytics import compare_complexity, diagnostics_table
from ReLatent.Artifacts import config_hash, provenance_header, write_csv_artifact, write_jsonl_artifact, \
    write_text_artifact
from ReLatent.Clustering import clustering_rows
from ReLatent.Errors import ConfigError, KBParseError, ReLatentError
from ReLatent.Explanation import explain_representation, explanation_records, render_explanations
from ReLatent.KnowledgeBase import KnowledgeBase, read_kb, serialize_facts, serialize_schema
from ReLatent.LatentFeatures import KPolicy, LatentRepresentation, export_latent_kb
from ReLatent.Similarity import read_interpretations
from ReLatent.Synthetic import SyntheticSpec, generate_synthetic
from ReLatent.ThreadWorkers.LatentLearner import LatentLearnerWorker
from ReLatent.ThreadWorkers.RedundancySweep import RedundancySweepWorker

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_RUNTIME = 4

DEFAULT_THETA = 0.3
DEFAULT_ALPHAS = '0.9,0.8,0.7,0.6,0.5'


@dataclass(frozen=True)
class RunConfig:
    """
    Validated settings of one command.
    """
    command: str
    out: str
    seed: int = 0
    schema: Optional[str] = None
    facts: Optional[str] = None
    interps: Optional[str] = None
    depths: Tuple[int, ...] = ()
    k: Optional[int] = None
    auto_k: bool = False
    theta: float = DEFAULT_THETA
    alpha: float = 1.0
    alphas: Tuple[float, ...] = ()
    fan_out: Optional[int] = None
    jobs: int = 1
    max_tree_depth: int = 5
    predicates: Tuple[str, ...] = ()
    print: bool = False
    professors: int = 20
    students: int = 160
    courses: int = 20
    ta_rate: float = 1.0
    noise: float = 0.0

    def __post_init__(self):
        if self.theta < 0:
            raise ConfigError(f'--theta must be non-negative, got {self.theta}')
        for alpha in (self.alpha,) + self.alphas:
            if not 0.0 <= alpha <= 1.0:
                raise ConfigError(f'alpha values must lie in [0, 1], got {alpha}')
        if self.command != 'generate':
            if not self.depths:
                raise ConfigError('--depths is required')
            if min(self.depths) < 0:
                raise ConfigError('--depths must be non-negative')
            if self.k is None and not self.auto_k:
                raise ConfigError('one of --k or --auto-k is required')
        if self.fan_out is not None and self.fan_out < 1:
            raise ConfigError('--fan-out must be positive')
        if self.max_tree_depth < 0:
            raise ConfigError('--max-tree-depth must be non-negative')
        if self.jobs == 0:
            raise ConfigError('--jobs must be non-zero; negative values count back from all CPUs')

    @property
    def k_policy(self) -> KPolicy:
        return KPolicy(auto=True) if self.auto_k else KPolicy(k=self.k)

    def result_settings(self) -> dict:
        """
        Settings that determine the results. Input files enter with the digest of their content.
        """
        settings = dataclasses.asdict(self)
        for name in ('schema', 'facts', 'interps'):
            path = settings[name]
            if path is not None:
                with open(path, 'rb') as file:
                    settings[name] = hashlib.sha256(file.read()).hexdigest()
        settings['depths'] = list(self.depths)
        settings['alphas'] = list(self.alphas)
        settings['predicates'] = list(self.predicates)
        return settings


def _int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(value) for value in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma separated integers, got {text!r}') from None


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(value) for value in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma separated numbers, got {text!r}') from None


def create_argument_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument('--out', required=True, help='Output directory.')
    common.add_argument('--seed', type=int, default=0, help='Seed recorded in every artifact.')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='Log debug messages and tracebacks.')
    verbosity.add_argument('--quiet', action='store_true', help='Log warnings and errors only.')

    learning = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    learning.add_argument('--schema', required=True, help='Schema file.')
    learning.add_argument('--facts', required=True, help='Fact file.')
    learning.add_argument('--interps', required=True, help='Interpretation file.')
    learning.add_argument('--depths', type=_int_list, required=True, help='Neighbourhood tree depths, e.g. 1,2.')
    k_group = learning.add_mutually_exclusive_group(required=True)
    k_group.add_argument('--k', type=int, help='Number of clusters per clustering.')
    k_group.add_argument('--auto-k', action='store_true', help='Choose the number of clusters by silhouette.')
    learning.add_argument('--fan-out', type=int, help='Maximal number of children per tree vertex.')
    learning.add_argument('--jobs', type=int, default=1, help='Workers for the similarity computation.')

    parser = argparse.ArgumentParser(prog='relatent', allow_abbrev=False,
                                     description='Learn interpretable latent features of relational data by '
                                                 'clustering entities and relations.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    learn = commands.add_parser('learn', parents=[common, learning], allow_abbrev=False,
                                help='Learn a latent representation.')
    learn.add_argument('--alpha', type=float, default=1.0, help='Overlap threshold.')

    explain = commands.add_parser('explain', parents=[common, learning], allow_abbrev=False,
                                  help='Learn and explain latent features.')
    explain.add_argument('--alpha', type=float, default=1.0, help='Overlap threshold.')
    explain.add_argument('--theta', type=float, default=DEFAULT_THETA, help='Confidence threshold.')
    explain.add_argument('--predicate', action='append', default=[], help='Explain only this predicate.')
    explain.add_argument('--print', action='store_true', help='Also print the explanations.')

    analyze = commands.add_parser('analyze', parents=[common, learning], allow_abbrev=False,
                                  help='Learn and compute predicate diagnostics.')
    analyze.add_argument('--alpha', type=float, default=1.0, help='Overlap threshold.')
    analyze.add_argument('--max-tree-depth', type=int, default=5, help='Depth of the decision trees.')

    sweep = commands.add_parser('sweep', parents=[common, learning], allow_abbrev=False,
                                help='Evaluate a range of overlap thresholds.')
    sweep.add_argument('--alphas', type=_float_list, default=_float_list(DEFAULT_ALPHAS),
                       help='Overlap thresholds.')
    sweep.add_argument('--max-tree-depth', type=int, default=5, help='Depth of the decision trees.')

    generate = commands.add_parser('generate', parents=[common], allow_abbrev=False,
                                   help='Generate a synthetic university knowledge base.')
    generate.add_argument('--professors', type=int, default=20)
    generate.add_argument('--students', type=int, default=160)
    generate.add_argument('--courses', type=int, default=20)
    generate.add_argument('--ta-rate', type=float, default=1.0)
    generate.add_argument('--noise', type=float, default=0.0)
    return parser


def config_from_arguments(arguments: argparse.Namespace) -> RunConfig:
    values = vars(arguments)
    fields = {field.name for field in dataclasses.fields(RunConfig)}
    settings = {name: value for name, value in values.items() if name in fields and value is not None}
    settings['predicates'] = tuple(values.get('predicate', []))
    return RunConfig(**settings)


class Run:
    """
    One command invocation: reads inputs, runs the pipeline and writes the artifacts.
    """
    def __init__(self, config: RunConfig):
        self.config = config
        self.hash = config_hash(config.result_settings())
        self.header = provenance_header(__version__, config.command, config.seed, self.hash)

    def path(self, name: str) -> str:
        return os.path.join(self.config.out, name)

    def header_record(self) -> dict:
        return {'version': __version__, 'command': self.config.command, 'seed': self.config.seed,
                'config': self.hash}

    def load(self):
        config = self.config
        return read_kb(config.schema, config.facts), read_interpretations(config.interps)

    def learn(self, kb: KnowledgeBase, interps) -> LatentRepresentation:
        config = self.config
        worker = LatentLearnerWorker(kb, interps, config.depths, config.alpha, config.k_policy, config.seed,
                                     config.fan_out, config.jobs)
        rep = worker.process()
        latent_kb = export_latent_kb(kb, rep)
        write_text_artifact(self.path('latent_schema.txt'), self.header, serialize_schema(latent_kb.schema))
        write_text_artifact(self.path('latent_facts.txt'), self.header, serialize_facts(latent_kb))
        records = [record.as_dict() for record in rep.log]
        records += [{'record': 'predicate', 'name': p.name, 'kind': p.kind, 'object_set': p.object_set,
                     'interpretation': p.interpretation, 'depth': p.depth, 'cluster_index': p.cluster_index,
                     'members': len(p.members)} for p in rep.predicates]
        write_jsonl_artifact(self.path('provenance.jsonl'), self.header_record(), records)
        for clustering in rep.accepted:
            provenance = clustering.provenance
            name = f'clustering_{provenance.object_set}_{provenance.interpretation}_{provenance.depth}.csv'
            write_csv_artifact(self.path(name), self.header, clustering_rows(clustering))
        return rep

    def run_learn(self) -> None:
        kb, interps = self.load()
        self.learn(kb, interps)

    def run_explain(self) -> None:
        kb, interps = self.load()
        rep = self.learn(kb, interps)
        config = self.config
        explanations = explain_representation(kb, rep, config.theta, interps, config.predicates or None,
                                              config.fan_out)
        text = render_explanations(explanations)
        write_text_artifact(self.path('explanations.txt'), self.header, text)
        write_jsonl_artifact(self.path('explanations.jsonl'), self.header_record(), explanation_records(explanations))
        if config.print:
            sys.stdout.write(text)

    def run_analyze(self) -> None:
        kb, interps = self.load()
        rep = self.learn(kb, interps)
        latent_kb = export_latent_kb(kb, rep)
        rows = [['predicate', 'origin', 'groundings', 'entropy']]
        rows += [[row.predicate, row.origin, row.grounding_count, row.label_entropy]
                 for row in diagnostics_table(kb, latent_kb)]
        write_csv_artifact(self.path('diagnostics.csv'), self.header, rows)
        comparison = compare_complexity(kb, latent_kb, self.config.max_tree_depth, self.config.seed)
        write_csv_artifact(self.path('complexity.csv'), self.header, [
            ['representation', 'examples', 'internal_nodes', 'accuracy'],
            ['original', comparison.examples, comparison.original_nodes, comparison.original_accuracy],
            ['latent', comparison.examples, comparison.latent_nodes, comparison.latent_accuracy],
        ])

    def run_sweep(self) -> None:
        kb, interps = self.load()
        config = self.config
        rows = RedundancySweepWorker(kb, interps, config.depths, config.alphas, config.k_policy, config.seed,
                                     config.max_tree_depth, config.fan_out, config.jobs).process()
        write_csv_artifact(self.path('sweep.csv'), self.header, [
            ['alpha', 'features', 'facts', 'accuracy', 'feature_ratio', 'fact_ratio']
        ] + [[row.alpha, row.feature_count, row.fact_count, row.accuracy, row.feature_ratio, row.fact_ratio]
             for row in rows])

    def run_generate(self) -> None:
        config = self.config
        schema_text, facts_text = generate_synthetic(SyntheticSpec(config.professors, config.students,
                                                                   config.courses, config.ta_rate, config.noise,
                                                                   config.seed))
        write_text_artifact(self.path('schema.txt'), self.header, schema_text)
        write_text_artifact(self.path('facts.txt'), self.header, facts_text)

    def run(self) -> None:
        getattr(self, f'run_{self.config.command}')()


def main(argv: Optional[Sequence[str]] = None) -> int:
    arguments = create_argument_parser().parse_args(argv)
    level = logging.DEBUG if arguments.verbose else logging.WARNING if arguments.quiet else logging.INFO
    logging.basicConfig(format='%(asctime)s - %(levelname)s: %(message)s', level=level)

    try:
        Run(config_from_arguments(arguments)).run()
    except ConfigError as e:
        logger.error('Configuration error: %s', e, exc_info=arguments.verbose)
        return EXIT_CONFIG
    except KBParseError as e:
        logger.error('Parse error: %s', e, exc_info=arguments.verbose)
        return EXIT_PARSE
    except (ReLatentError, OSError) as e:
        logger.error('%s', e, exc_info=arguments.verbose)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
