"""
Helper functions for configuration, output files and run summaries
"""

import os
import json
import logging
import tempfile
from pathlib import Path
from types import SimpleNamespace
from typing import Any, Dict, Iterable, Optional, Union

from .errors import ConfigError

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str = "INFO"):
    """
    Configure the root logger once for a command-line run

    Args:
        level: Logging level name (DEBUG, INFO, WARNING, ...)
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ConfigError(f"Unknown log level: {level}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)


def load_config(config_path: Union[str, Path]) -> SimpleNamespace:
    """
    Load configuration from JSON file

    Args:
        config_path: Path to configuration JSON file

    Returns:
        SimpleNamespace with one attribute per top-level key, plus
        `config_dir` (directory used to resolve relative paths)
    """
    config_path = Path(config_path)
    if not config_path.exists():
        raise ConfigError(f"Configuration file not found: {config_path}")

    with open(config_path, 'r', encoding='utf-8') as f:
        try:
            config_dict = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Configuration file is not valid JSON: {config_path} ({e})") from e

    if not isinstance(config_dict, dict):
        raise ConfigError(f"Configuration must be a JSON object: {config_path}")

    config_dict.setdefault('config_dir', str(config_path.resolve().parent))
    return SimpleNamespace(**config_dict)


def resolve_path(base: Union[str, Path], relative_or_absolute: Optional[str]) -> Optional[Path]:
    """Resolve a path that may be relative (to base) or absolute."""
    if relative_or_absolute is None:
        return None
    candidate = Path(relative_or_absolute)
    if not candidate.is_absolute():
        candidate = Path(base) / candidate
    return candidate


def write_json_atomic(obj: Any, output_path: Union[str, Path], indent: Optional[int] = None):
    """
    Write JSON to a temporary file next to output_path, then rename it

    A failed write never leaves a partial file at output_path.

    Args:
        obj: JSON-serializable object (dict key order is preserved)
        output_path: Destination file
        indent: Optional indentation passed to json.dump
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_path = tempfile.mkstemp(prefix=f".{output_path.name}.", suffix=".tmp",
                                    dir=str(output_path.parent))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            json.dump(obj, f, ensure_ascii=False, indent=indent)
            f.write("\n")
        os.replace(tmp_path, output_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise

    logger.info(f"Saved {output_path}")


def write_text_atomic(text: str, output_path: Union[str, Path]):
    """Write a text file through a temporary file and rename."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_path = tempfile.mkstemp(prefix=f".{output_path.name}.", suffix=".tmp",
                                    dir=str(output_path.parent))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.replace(tmp_path, output_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def log_banner(title: str):
    """Log a step title between two separator lines"""
    logger.info("=" * 80)
    logger.info(title.upper())
    logger.info("=" * 80)


def summarize_predictions(predictions: Dict[int, list],
                          language_posts: Optional[Dict[str, Iterable[int]]] = None,
                          print_summary: bool = True) -> Dict:
    """
    Generate summary statistics for a prediction map

    Args:
        predictions: Map post_id -> ranked fact-check IDs
        language_posts: Optional map language -> post IDs for a per-language breakdown
        print_summary: Whether to log the summary

    Returns:
        Dictionary with summary statistics
    """
    n_posts = len(predictions)
    n_ids = sum(len(ids) for ids in predictions.values())

    summary = {
        'n_posts': n_posts,
        'n_predicted_ids': n_ids,
        'ids_per_post': n_ids / n_posts if n_posts > 0 else 0,
    }
    if language_posts is not None:
        summary['posts_per_language'] = {
            lang: sum(1 for pid in post_ids if pid in predictions)
            for lang, post_ids in language_posts.items()
        }

    if print_summary:
        logger.info("Prediction Summary:")
        logger.info(f"  - Posts: {n_posts:,}")
        logger.info(f"  - Predicted IDs: {n_ids:,}")
        logger.info(f"  - IDs per post: {summary['ids_per_post']:.2f}")
        for lang, count in summary.get('posts_per_language', {}).items():
            logger.info(f"  - {lang}: {count:,} posts")

    return summary
