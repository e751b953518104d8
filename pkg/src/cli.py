"""
Command-line entry point

Usage:
    python3 -m src.cli ingest-check -c config/examples/multiclaim_dev.json
    python3 -m src.cli predict      -c config/examples/multiclaim_dev.json [--split test] [--out PATH]
    python3 -m src.cli evaluate     -c config/examples/multiclaim_dev.json [--predictions PATH]
    python3 -m src.cli sweep        -c config/examples/multiclaim_dev.json --grid config/sweeps/tfidf_grid.json

Flags override values from the config file. Exit codes: 0 success,
1 usage/configuration error, 2 data error, 3 internal error.
"""

import sys
import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import SimpleNamespace
from typing import Callable, Dict, List, Optional, Sequence

from .analysis.evaluation import evaluate_predictions, load_grid, sweep
from .preprocessing.corpus_ingest import SPLITS, load_corpus, load_pairs, load_task_config
from .retrieval.predict import IndexSettings, generate_predictions, load_predictions, write_predictions
from .utils.errors import ConfigError, DataError
from .utils.helpers import (load_config, log_banner, resolve_path, setup_logging, summarize_predictions,
                            write_json_atomic, write_text_atomic)
from .utils.multiclaim_connector import MultiClaimConnector

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

PATH_KEYS = ('data_dir', 'tasks_path', 'output_dir', 'output_path', 'load_report_path',
             'eval_report_path', 'index_dir', 'grid_path', 'predictions_path', 'pairs_path')


@dataclass
class EngineConfig:
    """Validated settings for one command run"""
    data_dir: Path
    tasks_path: Path
    output_dir: Path = Path("output")
    output_path: Optional[Path] = None
    load_report_path: Optional[Path] = None
    eval_report_path: Optional[Path] = None
    index_dir: Optional[Path] = None
    grid_path: Optional[Path] = None
    predictions_path: Optional[Path] = None
    pairs_path: Optional[Path] = None
    split: str = 'dev'
    settings: IndexSettings = field(default_factory=IndexSettings)
    k: int = 10
    parallelism: int = 1
    wrap_key: Optional[str] = None
    extra_text_columns: List[str] = field(default_factory=list)
    column_aliases: Dict[str, Dict[str, List[str]]] = field(default_factory=dict)
    show_progress: bool = False

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ConfigError(f"split must be one of {', '.join(SPLITS)}, got '{self.split}'")
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise ConfigError(f"k must be an integer >= 1, got {self.k!r}")
        if isinstance(self.parallelism, bool) or not isinstance(self.parallelism, int) or self.parallelism < 1:
            raise ConfigError(f"parallelism must be an integer >= 1, got {self.parallelism!r}")

        self.output_path = self.output_path or self.output_dir / "monolingual_predictions.json"
        self.load_report_path = self.load_report_path or self.output_dir / "load_report.json"
        self.eval_report_path = self.eval_report_path or self.output_dir / "eval_report.json"
        self.predictions_path = self.predictions_path or self.output_path

    @classmethod
    def from_namespace(cls, config: SimpleNamespace, overrides: Optional[Dict] = None) -> 'EngineConfig':
        """
        Build from a loaded config file plus command-line overrides

        Relative paths from the file are resolved against its directory;
        relative paths given as flags are taken as they are.
        """
        values = dict(vars(config))
        config_dir = Path(values.pop('config_dir', '.'))
        for key in PATH_KEYS:
            if values.get(key) is not None:
                values[key] = resolve_path(config_dir, values[key])

        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = Path(value) if key in PATH_KEYS else value

        for key in ('data_dir', 'tasks_path'):
            if values.get(key) is None:
                raise ConfigError(f"'{key}' must be set in the config file or on the command line")

        settings = IndexSettings.from_dict({
            'analyzer': values.get('analyzer', 'word'),
            'ngram': values.get('ngram', [1, 1]),
            'lowercase': values.get('lowercase', True),
            'max_features': values.get('max_features'),
            'fit_corpus_policy': values.get('fit_corpus_policy', 'fact_checks_only'),
        })

        return cls(
            data_dir=values['data_dir'],
            tasks_path=values['tasks_path'],
            output_dir=values.get('output_dir') or Path("output"),
            output_path=values.get('output_path'),
            load_report_path=values.get('load_report_path'),
            eval_report_path=values.get('eval_report_path'),
            index_dir=values.get('index_dir'),
            grid_path=values.get('grid_path'),
            predictions_path=values.get('predictions_path'),
            pairs_path=values.get('pairs_path'),
            split=values.get('split', 'dev'),
            settings=settings,
            k=values.get('k', 10),
            parallelism=values.get('parallelism', 1),
            wrap_key=values.get('wrap_key'),
            extra_text_columns=list(values.get('extra_text_columns') or []),
            column_aliases=dict(values.get('column_aliases') or {}),
            show_progress=bool(values.get('show_progress', False)),
        )

    def require_inputs(self, need_data_dir: bool = True):
        """Data directory and task file must exist when a command starts"""
        if need_data_dir and not self.data_dir.is_dir():
            raise ConfigError(f"Data directory not found: {self.data_dir}")
        if not self.tasks_path.is_file():
            raise ConfigError(f"Task configuration not found: {self.tasks_path}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _load_corpus(cfg: EngineConfig):
    cfg.require_inputs()
    corpus = load_corpus(cfg.data_dir, cfg.tasks_path, cfg.extra_text_columns, cfg.column_aliases)
    write_json_atomic(corpus.load_report(), cfg.load_report_path, indent=2)
    return corpus


def ingest_check_command(cfg: EngineConfig) -> int:
    """Load the corpus and write the load report only"""
    log_banner("Ingest check")
    corpus = _load_corpus(cfg)

    logger.info(f"Fact checks: {len(corpus.fact_checks):,}")
    logger.info(f"Posts: {len(corpus.posts):,}")
    logger.info(f"Pairs: {len(corpus.pairs):,} valid, {len(corpus.dangling_pairs):,} dangling")
    for language, task in corpus.task.tasks.items():
        logger.info(f"  - {language}: {len(task.fact_check_ids):,} fact checks, "
                    f"{len(task.post_ids_dev):,} dev / {len(task.post_ids_test):,} test posts")
    return EXIT_OK


def predict_command(cfg: EngineConfig) -> int:
    """Build per-language indexes and write monolingual_predictions.json"""
    log_banner(f"Predict ({cfg.split} split)")
    corpus = _load_corpus(cfg)

    predictions, _ = generate_predictions(
        corpus, cfg.split, cfg.settings, k=cfg.k, parallelism=cfg.parallelism,
        show_progress=cfg.show_progress, index_dir=cfg.index_dir,
    )
    write_predictions(predictions, cfg.output_path, wrap_key=cfg.wrap_key)
    summarize_predictions(predictions, corpus.task.split_post_ids(cfg.split))
    return EXIT_OK


def evaluate_command(cfg: EngineConfig) -> int:
    """Score a prediction file against the gold pairs of the split"""
    log_banner(f"Evaluate ({cfg.split} split, S@{cfg.k})")

    # gold pairs come from the data directory unless given explicitly
    cfg.require_inputs(need_data_dir=cfg.pairs_path is None)
    pairs_path = cfg.pairs_path or MultiClaimConnector(cfg.data_dir).path('pairs')
    pairs, _ = load_pairs(pairs_path, cfg.column_aliases.get('pairs'))
    task = load_task_config(cfg.tasks_path)
    predictions = load_predictions(cfg.predictions_path, wrap_key=cfg.wrap_key)

    report = evaluate_predictions(predictions, pairs, task, cfg.split, cfg.k)
    report.print_summary()
    print(report.to_table())
    write_json_atomic(report.to_dict(), cfg.eval_report_path, indent=2)
    return EXIT_OK


def sweep_command(cfg: EngineConfig) -> int:
    """Evaluate every row of a grid file and export the table"""
    if cfg.grid_path is None:
        raise ConfigError("sweep needs a grid file (--grid or 'grid_path' in the config)")
    grid = load_grid(cfg.grid_path)

    log_banner(f"Sweep ({len(grid)} configurations, {cfg.split} split)")
    corpus = _load_corpus(cfg)

    result = sweep(corpus, grid, k=cfg.k, split=cfg.split,
                   parallelism=cfg.parallelism, show_progress=cfg.show_progress)

    table = result.to_table()
    print(table)
    write_text_atomic(table + "\n", cfg.output_dir / "sweep_table.txt")
    write_json_atomic(result.to_dict(), cfg.output_dir / "sweep_results.json", indent=2)
    return EXIT_DATA if result.failed else EXIT_OK


COMMANDS: Dict[str, Callable[[EngineConfig], int]] = {
    'ingest-check': ingest_check_command,
    'predict': predict_command,
    'evaluate': evaluate_command,
    'sweep': sweep_command,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _parse_ngram(value: str) -> List[int]:
    parts = value.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected MIN,MAX, got '{value}'")
    try:
        return [int(parts[0]), int(parts[1])]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers, got '{value}'") from None


def _parse_max_features(value: str):
    if value.lower() in ('none', 'null', 'all'):
        return 'none'
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'none', got '{value}'") from None


def _parse_fit_corpus(value: str) -> str:
    aliases = {'fact-checks': 'fact_checks_only', 'fact-checks+posts': 'fact_checks_and_posts'}
    if value not in aliases and value not in aliases.values():
        raise argparse.ArgumentTypeError("expected fact-checks or fact-checks+posts")
    return aliases.get(value, value)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="Path to configuration JSON file")
    common.add_argument("--data-dir", dest="data_dir", help="Directory with fact_checks.csv, posts.csv, pairs.csv")
    common.add_argument("--tasks", dest="tasks_path", help="tasks.json")
    common.add_argument("--split", choices=SPLITS, help="Task split (default: dev)")
    common.add_argument("--analyzer", help="word, char or char_wb")
    common.add_argument("--ngram", type=_parse_ngram, help="n-gram range as MIN,MAX")
    common.add_argument("--max-features", dest="max_features", type=_parse_max_features,
                        help="Vocabulary cap (or 'none')")
    common.add_argument("--k", type=int, help="Results per post (default: 10)")
    common.add_argument("--out", dest="output_path", help="Prediction file path")
    common.add_argument("--fit-corpus", dest="fit_corpus_policy", type=_parse_fit_corpus,
                        help="fact-checks or fact-checks+posts")
    common.add_argument("--wrap-key", dest="wrap_key", help="Nest the prediction map under this key")
    common.add_argument("--jobs", dest="parallelism", type=int, help="Parallel workers")
    common.add_argument("--log-level", dest="log_level", default="INFO", help="Logging level (default: INFO)")

    parser = argparse.ArgumentParser(prog="python3 -m src.cli",
                                     description="Monolingual fact-checked claim retrieval with TF-IDF")
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser("ingest-check", parents=[common], help="Load the data and write a load report")
    subparsers.add_parser("predict", parents=[common], help="Write monolingual_predictions.json")

    evaluate = subparsers.add_parser("evaluate", parents=[common], help="Score predictions with success@K")
    evaluate.add_argument("--predictions", dest="predictions_path", help="Prediction file (default: --out)")
    evaluate.add_argument("--pairs", dest="pairs_path", help="Gold pairs CSV (default: <data-dir>/pairs.csv)")

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Evaluate a grid of configurations")
    sweep_parser.add_argument("--grid", dest="grid_path", help="Sweep grid JSON")

    return parser


def load_engine_config(args: argparse.Namespace) -> EngineConfig:
    config = load_config(args.config) if args.config else SimpleNamespace(config_dir=str(Path.cwd()))
    overrides = {key: value for key, value in vars(args).items()
                 if key not in ('command', 'config', 'log_level')}
    # None means "flag not given", so an explicit uncapped vocabulary goes straight to the config
    if overrides.get('max_features') == 'none':
        config.max_features = None
        del overrides['max_features']
    return EngineConfig.from_namespace(config, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        setup_logging(args.log_level)
        cfg = load_engine_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as e:
        logger.error(f"Data error ({type(e).__name__}): {e}")
        return EXIT_DATA
    except Exception:
        logger.exception("Internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
