"""
Batch prediction: top-k fact checks for every post of a task split

Each language is independent (monolingual track), so languages are built
and queried in parallel with joblib; merging into one prediction map is
done in the calling process.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from joblib import Parallel, delayed
from tqdm import tqdm

from .index import FitCorpusPolicy, RetrievalIndex, build_index
from ..preprocessing.analyzers import AnalyzerConfig
from ..preprocessing.corpus_ingest import Corpus, FactCheck, Post, TaskConfig, post_text
from ..utils.errors import ConfigError, MissingLanguageIndex, MissingPost, SchemaError
from ..utils.helpers import write_json_atomic

logger = logging.getLogger(__name__)

Predictions = Dict[int, List[int]]


@dataclass(frozen=True)
class IndexSettings:
    """Everything that determines how a language index is fitted"""
    analyzer_cfg: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    max_features: Optional[int] = None
    fit_corpus_policy: FitCorpusPolicy = FitCorpusPolicy.FACT_CHECKS_ONLY

    @classmethod
    def from_dict(cls, d: Dict) -> 'IndexSettings':
        """Keys: analyzer, ngram, lowercase, max_features, fit_corpus_policy"""
        max_features = d.get('max_features')
        if max_features is not None and (isinstance(max_features, bool) or
                                         not isinstance(max_features, int) or max_features < 1):
            raise ConfigError(f"max_features must be a positive integer or null, got {max_features!r}")
        return cls(
            analyzer_cfg=AnalyzerConfig.from_dict(d),
            max_features=max_features,
            fit_corpus_policy=FitCorpusPolicy.parse(d.get('fit_corpus_policy', FitCorpusPolicy.FACT_CHECKS_ONLY)),
        )

    def to_dict(self) -> Dict:
        return {
            **self.analyzer_cfg.to_dict(),
            'max_features': self.max_features,
            'fit_corpus_policy': self.fit_corpus_policy.value,
        }

    def label(self) -> str:
        limit = "all" if self.max_features is None else f"{self.max_features:,}"
        return f"{self.analyzer_cfg.label()}, max_features={limit}"


def _resolve_posts(post_ids: Sequence[int], posts: Mapping[int, Post]) -> List[Post]:
    resolved = []
    for post_id in post_ids:
        if post_id not in posts:
            raise MissingPost(post_id)
        resolved.append(posts[post_id])
    return resolved


def _as_post_map(posts: Union[Mapping[int, Post], Sequence[Post]]) -> Mapping[int, Post]:
    if isinstance(posts, Mapping):
        return posts
    return {p.post_id: p for p in posts}


def predict_language(index: RetrievalIndex, posts: Sequence[Post], k: int = 10,
                     batch_size: int = 256) -> Predictions:
    """Map post_id -> top-k fact-check IDs for posts of one language"""
    ranked = index.query_texts([post_text(p) for p in posts], k=k, batch_size=batch_size)
    return {post.post_id: [r.fact_check_id for r in results] for post, results in zip(posts, ranked)}


def _merge(predictions: Predictions, language: str, language_predictions: Predictions):
    overlap = predictions.keys() & language_predictions.keys()
    if overlap:
        logger.warning(f"'{language}': {len(overlap):,} posts also appear in another language; "
                       f"keeping the '{language}' predictions")
    predictions.update(language_predictions)


def predict_all(indexes: Mapping[str, RetrievalIndex], task: TaskConfig,
                posts: Union[Mapping[int, Post], Sequence[Post]], split: str,
                k: int = 10) -> Predictions:
    """
    Predict every post of a split with prebuilt indexes

    Args:
        indexes: Map language -> RetrievalIndex
        task: Task configuration
        posts: Loaded posts (map by ID or sequence)
        split: dev, test or train
        k: Results per post

    Returns:
        Map post_id -> ranked fact-check IDs (min(k, index size) each)

    Raises:
        MissingPost, MissingLanguageIndex
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    post_map = _as_post_map(posts)

    predictions: Predictions = {}
    for language, language_task in task.tasks.items():
        split_posts = _resolve_posts(language_task.post_ids(split), post_map)
        if not split_posts:
            continue
        if language not in indexes:
            raise MissingLanguageIndex(language)
        _merge(predictions, language, predict_language(indexes[language], split_posts, k))
    return predictions


def _language_job(language: str, fact_checks: List[FactCheck], posts: List[Post],
                  settings: IndexSettings, k: int) -> Tuple[str, RetrievalIndex, Predictions]:
    index = build_index(fact_checks, language, settings.analyzer_cfg, settings.max_features,
                        settings.fit_corpus_policy, posts)
    return language, index, predict_language(index, posts, k)


def generate_predictions(corpus: Corpus, split: str, settings: IndexSettings, k: int = 10,
                         parallelism: int = 1, show_progress: bool = False,
                         index_dir: Optional[Union[str, Path]] = None
                         ) -> Tuple[Predictions, Dict[str, RetrievalIndex]]:
    """
    Build one index per language and predict all posts of the split

    Under fact_checks_and_posts, the posts of the language's split are
    added to its fitting corpus.

    Args:
        corpus: Loaded corpus and task configuration
        split: dev, test or train
        settings: Index settings shared by all languages
        k: Results per post
        parallelism: Maximum number of languages processed at once
        show_progress: Show a progress bar over languages
        index_dir: Optional directory where the built indexes are saved

    Returns:
        Tuple of (map post_id -> ranked fact-check IDs, map language -> index)
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")

    jobs = []
    for language, language_task in corpus.task.tasks.items():
        split_posts = _resolve_posts(language_task.post_ids(split), corpus.posts)
        if not split_posts:
            logger.info(f"'{language}': no posts in the {split} split, skipping")
            continue
        jobs.append((language, corpus.language_fact_checks(language), split_posts))

    logger.info(f"Processing {len(jobs)} languages ({settings.label()}, k={k}, jobs={parallelism})")

    results = Parallel(n_jobs=parallelism)(
        delayed(_language_job)(language, fact_checks, posts, settings, k)
        for language, fact_checks, posts in tqdm(jobs, desc="languages", disable=not show_progress)
    )

    predictions: Predictions = {}
    indexes: Dict[str, RetrievalIndex] = {}
    for language, index, language_predictions in results:
        indexes[language] = index
        _merge(predictions, language, language_predictions)
        logger.info(f"'{language}': {len(language_predictions):,} posts predicted")
        if index_dir is not None:
            index.save(index_dir)

    return predictions, indexes


def prediction_document(predictions: Mapping[int, Sequence[int]], wrap_key: Optional[str] = None) -> Dict:
    """
    JSON-ready prediction object: decimal-string post IDs in ascending
    numeric order, each mapped to its ranked fact-check IDs
    """
    flat = {str(post_id): [int(i) for i in predictions[post_id]] for post_id in sorted(predictions)}
    return {wrap_key: flat} if wrap_key else flat


def write_predictions(predictions: Mapping[int, Sequence[int]], output_path: Union[str, Path],
                      wrap_key: Optional[str] = None):
    """Write monolingual_predictions.json atomically"""
    write_json_atomic(prediction_document(predictions, wrap_key), output_path)
    logger.info(f"Wrote predictions for {len(predictions):,} posts")


def _as_id(value, key_path: str) -> int:
    if isinstance(value, bool):
        raise SchemaError(key_path, f"{key_path}: integer ID expected, got {value!r}")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise SchemaError(key_path, f"{key_path}: integer ID expected, got {value!r}") from None


def load_predictions(path: Union[str, Path], wrap_key: Optional[str] = None) -> Predictions:
    """
    Read a prediction file

    Keys may be decimal strings or integers. The map may be flat or nested
    under wrap_key; without wrap_key, an object with a single object-valued
    key is unwrapped.

    Args:
        path: Prediction JSON file
        wrap_key: Optional key the map is nested under

    Returns:
        Map post_id -> ranked fact-check IDs
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Predictions not found: {path}")

    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError("$", f"{path.name} is not valid JSON: {e}") from e

    prefix = "$"
    if wrap_key:
        if not isinstance(data, dict) or not isinstance(data.get(wrap_key), dict):
            raise SchemaError(f"$.{wrap_key}")
        data, prefix = data[wrap_key], f"$.{wrap_key}"
    elif isinstance(data, dict) and len(data) == 1:
        (key, value), = data.items()
        if isinstance(value, dict):
            data, prefix = value, f"$.{key}"

    if not isinstance(data, dict):
        raise SchemaError(prefix, f"{path.name}: prediction object expected at {prefix}")

    predictions: Predictions = {}
    for key, ids in data.items():
        key_path = f"{prefix}.{key}"
        if not isinstance(ids, list):
            raise SchemaError(key_path, f"{key_path}: list of fact-check IDs expected")
        predictions[_as_id(key, key_path)] = [_as_id(i, key_path) for i in ids]

    logger.info(f"Loaded predictions for {len(predictions):,} posts from {path.name}")
    return predictions
