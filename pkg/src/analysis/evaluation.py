"""
Evaluation: success@K per language, unweighted averaging, sweeps

Each post counts once: a hit when at least one of its gold fact checks is
among its top-K predictions. The leaderboard number is the unweighted mean
of the per-language scores.
"""

import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Union

import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from ..preprocessing.corpus_ingest import Corpus, Pair, TaskConfig
from ..retrieval.predict import IndexSettings, generate_predictions
from ..utils.errors import ConfigError, EmptyReport, MissingPrediction, RetrievalEngineError, SchemaError

logger = logging.getLogger(__name__)

SCORE_FORMAT = "{:.4f}"


@dataclass(frozen=True)
class GoldStandard:
    """Map post_id -> nonempty set of relevant fact-check IDs"""
    relevant: Dict[int, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        empty = [post_id for post_id, ids in self.relevant.items() if not ids]
        if empty:
            raise ValueError(f"Gold sets must be nonempty (posts {empty[:5]})")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair], post_ids: Optional[Iterable[int]] = None) -> 'GoldStandard':
        """
        Deduplicate pairs into gold sets, optionally keeping only the given posts
        """
        keep = None if post_ids is None else set(post_ids)
        relevant: Dict[int, set] = {}
        for pair in pairs:
            if keep is None or pair.post_id in keep:
                relevant.setdefault(pair.post_id, set()).add(pair.fact_check_id)
        return cls({post_id: frozenset(ids) for post_id, ids in relevant.items()})

    @property
    def post_ids(self) -> List[int]:
        return sorted(self.relevant)

    def __len__(self) -> int:
        return len(self.relevant)


def success_at_k(predictions: Mapping[int, Sequence[int]], gold: GoldStandard,
                 k: Optional[int] = 10) -> float:
    """
    Fraction of gold posts with a relevant fact check in their top-k predictions

    Args:
        predictions: Map post_id -> ranked fact-check IDs
        gold: Gold standard
        k: Cutoff; None uses the full prediction lists

    Returns:
        Score in [0, 1]

    Raises:
        MissingPrediction: a gold post has no prediction list
        EmptyReport: the gold standard holds no posts
    """
    if k is not None and k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if len(gold) == 0:
        raise EmptyReport("No gold posts to score")

    hits = 0
    for post_id in gold.post_ids:
        if post_id not in predictions:
            raise MissingPrediction(post_id)
        ranked = predictions[post_id]
        top = ranked if k is None else ranked[:k]
        if gold.relevant[post_id].intersection(top):
            hits += 1
    return hits / len(gold)


def aggregate(per_language: Mapping[str, float]) -> float:
    """Unweighted mean over languages"""
    if not per_language:
        raise EmptyReport("Cannot average an empty set of languages")
    return math.fsum(per_language.values()) / len(per_language)


@dataclass
class EvalReport:
    per_language: Dict[str, float]
    average: float
    k: int
    n_posts: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_scores(cls, per_language: Mapping[str, float], k: int,
                    n_posts: Optional[Mapping[str, int]] = None) -> 'EvalReport':
        return cls(dict(per_language), aggregate(per_language), k, dict(n_posts or {}))

    def to_dict(self) -> Dict:
        """{language: score, ..., "avg": average, "k": k}"""
        return {**self.per_language, 'avg': self.average, 'k': self.k}

    def to_frame(self) -> pd.DataFrame:
        """One row: languages as columns, then avg"""
        return pd.DataFrame([{**self.per_language, 'avg': self.average}], index=[f"S@{self.k}"])

    def to_table(self) -> str:
        """Aligned plain-text table with 4-decimal scores"""
        return self.to_frame().to_string(float_format=SCORE_FORMAT.format)

    def print_summary(self):
        logger.info(f"Success@{self.k} per language:")
        for language, score in self.per_language.items():
            posts = self.n_posts.get(language)
            suffix = f" ({posts:,} posts)" if posts is not None else ""
            logger.info(f"  - {language}: {SCORE_FORMAT.format(score)}{suffix}")
        logger.info(f"  - avg: {SCORE_FORMAT.format(self.average)}")


def evaluate_predictions(predictions: Mapping[int, Sequence[int]], pairs: Iterable[Pair],
                         task: TaskConfig, split: str, k: int = 10) -> EvalReport:
    """
    Score a prediction map per language of a task split

    Gold posts of a language are the split's post IDs that have at least
    one pair; languages without any are left out of the report.

    Args:
        predictions: Map post_id -> ranked fact-check IDs
        pairs: Gold pairs
        task: Task configuration
        split: dev, test or train
        k: Cutoff

    Returns:
        EvalReport over the languages that have gold posts
    """
    pairs = list(pairs)
    scores: Dict[str, float] = {}
    n_posts: Dict[str, int] = {}

    for language, language_task in task.tasks.items():
        gold = GoldStandard.from_pairs(pairs, post_ids=language_task.post_ids(split))
        if len(gold) == 0:
            logger.warning(f"'{language}': no gold pairs for the {split} split, not scored")
            continue
        scores[language] = success_at_k(predictions, gold, k)
        n_posts[language] = len(gold)

    return EvalReport.from_scores(scores, k, n_posts)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridCell:
    name: str
    settings: IndexSettings


@dataclass
class SweepRow:
    name: str
    settings: IndexSettings
    report: Optional[EvalReport] = None
    error: Optional[str] = None

    @property
    def status(self) -> str:
        return "ok" if self.error is None else "failed"


def load_grid(grid_path: Union[str, Path]) -> List[GridCell]:
    """
    Read a sweep grid

    The file holds a list of rows, or {"rows": [...]}. Each row names an
    analyzer and optionally "name", "ngram", "lowercase", "max_features"
    and "fit_corpus_policy".

    Raises:
        SchemaError: the file or a row has the wrong shape
        ConfigError: a row holds an invalid value (message names the row)
    """
    grid_path = Path(grid_path)
    if not grid_path.exists():
        raise FileNotFoundError(f"Sweep grid not found: {grid_path}")

    with open(grid_path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError("$", f"{grid_path.name} is not valid JSON: {e}") from e

    prefix = "$"
    if isinstance(data, dict):
        data, prefix = data.get('rows'), "$.rows"
    if not isinstance(data, list):
        raise SchemaError(prefix, f"{grid_path.name}: list of grid rows expected at {prefix}")

    cells = []
    for i, row in enumerate(data):
        key_path = f"{prefix}[{i}]"
        if not isinstance(row, dict):
            raise SchemaError(key_path, f"{key_path}: grid row must be an object")
        if 'analyzer' not in row:
            raise SchemaError(f"{key_path}.analyzer")
        try:
            settings = IndexSettings.from_dict(row)
        except ConfigError as e:
            raise ConfigError(f"Grid row {i + 1} ({row.get('name', 'unnamed')}): {e}") from e
        cells.append(GridCell(name=str(row.get('name', settings.label())), settings=settings))

    logger.info(f"Loaded {len(cells)} grid rows from {grid_path.name}")
    return cells


def _evaluate_cell(cell: GridCell, corpus: Corpus, split: str, k: int) -> SweepRow:
    try:
        predictions, _ = generate_predictions(corpus, split, cell.settings, k=k)
        report = evaluate_predictions(predictions, corpus.pairs, corpus.task, split, k)
    except RetrievalEngineError as e:
        logger.error(f"Grid row '{cell.name}' failed: {e}")
        return SweepRow(cell.name, cell.settings, error=f"{type(e).__name__}: {e}")
    return SweepRow(cell.name, cell.settings, report=report)


class SweepResult:
    """Rows of a sweep, in grid order"""

    def __init__(self, rows: Sequence[SweepRow], languages: Sequence[str], k: int):
        self.rows = list(rows)
        self.languages = list(languages)
        self.k = k

    def to_frame(self) -> pd.DataFrame:
        """Configurations as rows; languages, avg and status as columns"""
        columns = ['name', 'config', *self.languages, 'avg', 'status']
        records = []
        for row in self.rows:
            record = {'name': row.name, 'config': row.settings.label(), 'status': row.status}
            if row.report is not None:
                record.update(row.report.per_language)
                record['avg'] = row.report.average
            records.append(record)
        return pd.DataFrame(records, columns=columns)

    def to_table(self) -> str:
        frame = self.to_frame()
        if frame.empty:
            return "(empty sweep)"
        return frame.to_string(index=False, float_format=SCORE_FORMAT.format, na_rep="-")

    def to_dict(self) -> Dict:
        return {
            'k': self.k,
            'languages': self.languages,
            'rows': [
                {
                    'name': row.name,
                    'config': row.settings.to_dict(),
                    'status': row.status,
                    'error': row.error,
                    'report': None if row.report is None else row.report.to_dict(),
                }
                for row in self.rows
            ],
        }

    @property
    def failed(self) -> List[SweepRow]:
        return [row for row in self.rows if row.error is not None]

    def __len__(self) -> int:
        return len(self.rows)


def sweep(corpus: Corpus, grid: Sequence[GridCell], k: int = 10, split: str = 'dev',
          parallelism: int = 1, show_progress: bool = False) -> SweepResult:
    """
    Evaluate every grid cell on a split

    Each cell builds fresh per-language indexes, predicts and scores. A cell
    that fails is kept as a failed row.

    Args:
        corpus: Loaded corpus with gold pairs
        grid: Grid cells (name + index settings)
        k: Cutoff
        split: Split to predict and score (dev by default)
        parallelism: Maximum number of cells evaluated at once
        show_progress: Show a progress bar over cells

    Returns:
        SweepResult in grid order
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")

    logger.info(f"Sweeping {len(grid)} configurations on the {split} split (k={k}, jobs={parallelism})")
    rows = Parallel(n_jobs=parallelism)(
        delayed(_evaluate_cell)(cell, corpus, split, k)
        for cell in tqdm(grid, desc="grid", disable=not show_progress)
    )

    languages = [
        lang for lang in corpus.task.languages
        if any(row.report is not None and lang in row.report.per_language for row in rows)
    ]
    result = SweepResult(rows, languages, k)
    if result.failed:
        logger.warning(f"{len(result.failed)} of {len(result):,} grid rows failed")
    return result
