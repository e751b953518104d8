"""
Corpus Ingest: load fact_checks.csv, posts.csv, pairs.csv and tasks.json into typed records

Literal-expression cells are normalized (raw newlines escaped) and parsed
with the literal grammar. Loading is tolerant: a row that cannot be turned
into a record is reported as a MalformedRow and skipped, so that
loaded + malformed == total data rows for every file.

Records are frozen dataclasses holding tuples; they are immutable after
load and can be shared across threads.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from ..utils.errors import DataError, SchemaError
from ..utils.literal_parser import normalize_csv_field, parse_literal
from ..utils.multiclaim_connector import MultiClaimConnector, find_column, has_decoding_errors, read_csv_cells

logger = logging.getLogger(__name__)

LanguageScore = Tuple[str, float]
Instance = Tuple[Optional[float], str]

# Accepted header names per field, first match wins
FACT_CHECK_COLUMNS: Dict[str, List[str]] = {
    'fact_check_id': ['fact_check_id', 'factcheck_id', 'id'],
    'claim': ['claim', 'claims'],
    'instances': ['instances', 'instance'],
    'title': ['title'],
}

POST_COLUMNS: Dict[str, List[str]] = {
    'post_id': ['post_id', 'id'],
    'instances': ['instances', 'instance'],
    'ocr': ['ocr'],
    'verdicts': ['verdicts', 'verdict'],
    'text': ['text', 'post_text'],
}

PAIR_COLUMNS: Dict[str, List[str]] = {
    'fact_check_id': ['fact_check_id', 'factcheck_id'],
    'post_id': ['post_id'],
}

SPLITS = ('train', 'dev', 'test')


@dataclass(frozen=True)
class FactCheck:
    fact_check_id: int
    claim_original: str = ""
    claim_english: str = ""
    claim_languages: Tuple[LanguageScore, ...] = ()
    instances: Tuple[Instance, ...] = ()
    title: str = ""


@dataclass(frozen=True)
class Post:
    post_id: int
    instances: Tuple[Instance, ...] = ()
    text_fields: Tuple[str, ...] = ()
    verdicts: Tuple[str, ...] = ()
    text_languages: Tuple[LanguageScore, ...] = ()


@dataclass(frozen=True)
class Pair:
    fact_check_id: int
    post_id: int


@dataclass(frozen=True)
class MalformedRow:
    """A data row that could not be loaded; row is 1-based over data rows (None if unknown)"""
    row: Optional[int]
    cause: str


@dataclass
class LoadReport:
    """Outcome of loading one file"""
    file: str
    total_rows: int = 0
    loaded: int = 0
    malformed: List[MalformedRow] = field(default_factory=list)

    def add_malformed(self, row: Optional[int], cause: str):
        self.malformed.append(MalformedRow(row, cause))

    def to_dict(self) -> Dict:
        return {
            'file': self.file,
            'total_rows': self.total_rows,
            'loaded': self.loaded,
            'malformed_count': len(self.malformed),
            'malformed': [{'row': m.row, 'cause': m.cause} for m in self.malformed],
        }


@dataclass(frozen=True)
class LanguageTask:
    """Fact-check IDs and post-ID splits of one monolingual sub-task"""
    fact_check_ids: Tuple[int, ...] = ()
    post_ids_train: Tuple[int, ...] = ()
    post_ids_dev: Tuple[int, ...] = ()
    post_ids_test: Tuple[int, ...] = ()

    def post_ids(self, split: str) -> Tuple[int, ...]:
        if split not in SPLITS:
            raise ValueError(f"Unknown split: {split}")
        return getattr(self, f"post_ids_{split}")


@dataclass(frozen=True)
class TaskConfig:
    tasks: Dict[str, LanguageTask] = field(default_factory=dict)

    @property
    def languages(self) -> List[str]:
        return list(self.tasks)

    def split_post_ids(self, split: str) -> Dict[str, Tuple[int, ...]]:
        """Map language -> post IDs of the split"""
        return {lang: task.post_ids(split) for lang, task in self.tasks.items()}


class RowError(Exception):
    """Internal signal: the current row cannot be converted"""


# ---------------------------------------------------------------------------
# Cell conversion
# ---------------------------------------------------------------------------

def _cell(row: pd.Series, column: Optional[str]) -> str:
    if column is None:
        return ""
    value = row.get(column, "")
    return value if isinstance(value, str) else ""


def _check_row(row: pd.Series, n_columns: int):
    if row.isna().any():
        missing = int(row.isna().sum())
        raise RowError(f"wrong field count ({n_columns - missing} of {n_columns} fields)")
    if has_decoding_errors(row.tolist()):
        raise RowError("invalid UTF-8")


def _parse_cell(text: str, column: str):
    if not text.strip():
        return None
    try:
        return parse_literal(normalize_csv_field(text))
    except DataError as e:
        raise RowError(f"{column}: {e}") from e


def _parse_id(text: str, column: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise RowError(f"{column}: not an integer ({text!r})")


def _as_languages(value, column: str) -> Tuple[LanguageScore, ...]:
    if value is None:
        return ()
    if not isinstance(value, (list, tuple)):
        raise RowError(f"{column}: language list expected")

    languages = []
    for entry in value:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2 or not isinstance(entry[0], str):
            raise RowError(f"{column}: (language, confidence) pair expected, got {entry!r}")
        code, confidence = entry
        if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
            raise RowError(f"{column}: confidence must be a number, got {confidence!r}")
        if not 0.0 <= confidence <= 1.0:
            raise RowError(f"{column}: confidence {confidence} outside [0, 1]")
        languages.append((code, float(confidence)))
    return tuple(languages)


def _as_text_tuple(value, column: str) -> Tuple[str, str, Tuple[LanguageScore, ...]]:
    """(original, english, languages) from a parsed cell; plain strings are originals"""
    if value is None:
        return "", "", ()
    if isinstance(value, str):
        return value, "", ()
    if isinstance(value, (list, tuple)) and 2 <= len(value) <= 3:
        original, english = value[0], value[1]
        if not isinstance(original, str) or not isinstance(english, str):
            raise RowError(f"{column}: text renditions must be strings")
        languages = _as_languages(value[2], column) if len(value) == 3 else ()
        return original, english, languages
    raise RowError(f"{column}: (original, english, languages) tuple expected")


def _as_instances(value, column: str) -> Tuple[Instance, ...]:
    if value is None:
        return ()
    if not isinstance(value, (list, tuple)):
        raise RowError(f"{column}: instance list expected")

    instances = []
    for entry in value:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise RowError(f"{column}: (timestamp, source) pair expected, got {entry!r}")
        timestamp, source = entry
        if timestamp is not None and (isinstance(timestamp, bool) or not isinstance(timestamp, (int, float))):
            raise RowError(f"{column}: timestamp must be a number or None")
        if not isinstance(source, str):
            raise RowError(f"{column}: source must be text")
        instances.append((None if timestamp is None else float(timestamp), source))
    return tuple(instances)


def _as_strings(value, column: str) -> Tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,)
    if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
        return tuple(value)
    raise RowError(f"{column}: list of strings expected")


def _title_text(text: str) -> str:
    """Titles are either plain text or an (original, english, languages) tuple"""
    stripped = text.strip()
    if stripped.startswith("("):
        try:
            original, _, _ = _as_text_tuple(_parse_cell(text, 'title'), 'title')
            return original
        except RowError:
            pass
    return text


def _require_columns(df: pd.DataFrame, aliases: Dict[str, List[str]], required: Sequence[str],
                     file_name: str) -> Dict[str, Optional[str]]:
    columns = {name: find_column(df, names) for name, names in aliases.items()}
    if df.columns.size == 0:
        return columns
    for name in required:
        if columns[name] is None:
            raise SchemaError(f"{file_name}:{name}",
                              f"{file_name} has no column for '{name}' (accepted: {aliases[name]})")
    return columns


def _start_report(path: Path, df: pd.DataFrame, bad_lines: List[List[str]]) -> LoadReport:
    report = LoadReport(file=str(path), total_rows=len(df) + len(bad_lines))
    for bad_line in bad_lines:
        report.add_malformed(None, f"wrong field count ({len(bad_line)} fields)")
    return report


def _merge_aliases(defaults: Dict[str, List[str]], overrides: Optional[Dict[str, List[str]]]):
    merged = {name: list(names) for name, names in defaults.items()}
    for name, names in (overrides or {}).items():
        if name in merged:
            merged[name] = list(names) + [n for n in merged[name] if n not in names]
    return merged


# ---------------------------------------------------------------------------
# Loaders
# ---------------------------------------------------------------------------

def load_fact_checks(path: Union[str, Path],
                     column_aliases: Optional[Dict[str, List[str]]] = None
                     ) -> Tuple[List[FactCheck], LoadReport]:
    """
    Load fact_checks.csv

    Args:
        path: CSV file with a header row
        column_aliases: Optional per-field alias lists tried before the defaults

    Returns:
        Tuple of (fact checks in row order, load report)
    """
    path = Path(path)
    df, bad_lines = read_csv_cells(path)
    report = _start_report(path, df, bad_lines)
    aliases = _merge_aliases(FACT_CHECK_COLUMNS, column_aliases)
    columns = _require_columns(df, aliases, ['fact_check_id', 'claim'], path.name)

    fact_checks: List[FactCheck] = []
    seen_ids = set()

    for position, (_, row) in enumerate(df.iterrows(), start=1):
        try:
            _check_row(row, len(df.columns))
            fact_check_id = _parse_id(_cell(row, columns['fact_check_id']), 'fact_check_id')
            if fact_check_id in seen_ids:
                raise RowError(f"duplicate fact_check_id {fact_check_id}")
            original, english, languages = _as_text_tuple(
                _parse_cell(_cell(row, columns['claim']), 'claim'), 'claim')
            instances = _as_instances(
                _parse_cell(_cell(row, columns['instances']), 'instances'), 'instances')
            title = _title_text(_cell(row, columns['title']))
        except RowError as e:
            report.add_malformed(position, str(e))
            continue

        seen_ids.add(fact_check_id)
        fact_checks.append(FactCheck(
            fact_check_id=fact_check_id,
            claim_original=original,
            claim_english=english,
            claim_languages=languages,
            instances=instances,
            title=title,
        ))

    report.loaded = len(fact_checks)
    _log_report(report)
    return fact_checks, report


def load_posts(path: Union[str, Path],
               extra_text_columns: Iterable[str] = (),
               column_aliases: Optional[Dict[str, List[str]]] = None
               ) -> Tuple[List[Post], LoadReport]:
    """
    Load posts.csv

    text_fields holds, in column order, the original and English rendition
    of every OCR entry, then those of the text column (empty strings when
    the cell is empty), then one entry per whitelisted extra column.

    Args:
        path: CSV file with a header row
        extra_text_columns: Additional raw text columns appended to text_fields
        column_aliases: Optional per-field alias lists tried before the defaults

    Returns:
        Tuple of (posts in row order, load report)
    """
    path = Path(path)
    df, bad_lines = read_csv_cells(path)
    report = _start_report(path, df, bad_lines)
    aliases = _merge_aliases(POST_COLUMNS, column_aliases)
    columns = _require_columns(df, aliases, ['post_id'], path.name)
    extra_columns = [c.lower() for c in extra_text_columns]

    missing_extra = [c for c in extra_columns if df.columns.size and c not in df.columns]
    if missing_extra:
        logger.warning(f"{path.name}: whitelisted text columns not present: {missing_extra}")

    posts: List[Post] = []
    seen_ids = set()

    for position, (_, row) in enumerate(df.iterrows(), start=1):
        try:
            _check_row(row, len(df.columns))
            post_id = _parse_id(_cell(row, columns['post_id']), 'post_id')
            if post_id in seen_ids:
                raise RowError(f"duplicate post_id {post_id}")
            instances = _as_instances(
                _parse_cell(_cell(row, columns['instances']), 'instances'), 'instances')
            verdicts = _as_strings(
                _parse_cell(_cell(row, columns['verdicts']), 'verdicts'), 'verdicts')

            text_fields: List[str] = []
            languages: List[LanguageScore] = []

            ocr_value = _parse_cell(_cell(row, columns['ocr']), 'ocr')
            if ocr_value is not None:
                single = isinstance(ocr_value, str) or (
                    isinstance(ocr_value, tuple) and ocr_value and isinstance(ocr_value[0], str))
                entries = [ocr_value] if single else ocr_value
                if not isinstance(entries, (list, tuple)):
                    raise RowError("ocr: list of text tuples expected")
                for entry in entries:
                    original, english, langs = _as_text_tuple(entry, 'ocr')
                    text_fields.extend([original, english])
                    languages.extend(langs)

            original, english, langs = _as_text_tuple(
                _parse_cell(_cell(row, columns['text']), 'text'), 'text')
            text_fields.extend([original, english])
            languages.extend(langs)

            for column in extra_columns:
                text_fields.append(_cell(row, column))
        except RowError as e:
            report.add_malformed(position, str(e))
            continue

        seen_ids.add(post_id)
        posts.append(Post(
            post_id=post_id,
            instances=instances,
            text_fields=tuple(text_fields),
            verdicts=verdicts,
            text_languages=tuple(languages),
        ))

    report.loaded = len(posts)
    _log_report(report)
    return posts, report


def load_pairs(path: Union[str, Path],
               column_aliases: Optional[Dict[str, List[str]]] = None
               ) -> Tuple[List[Pair], LoadReport]:
    """
    Load pairs.csv; duplicate rows are kept

    Args:
        path: CSV file with fact_check_id and post_id columns
        column_aliases: Optional per-field alias lists tried before the defaults

    Returns:
        Tuple of (pairs in row order, load report)
    """
    path = Path(path)
    df, bad_lines = read_csv_cells(path)
    report = _start_report(path, df, bad_lines)
    aliases = _merge_aliases(PAIR_COLUMNS, column_aliases)
    columns = _require_columns(df, aliases, ['fact_check_id', 'post_id'], path.name)

    pairs: List[Pair] = []
    for position, (_, row) in enumerate(df.iterrows(), start=1):
        try:
            _check_row(row, len(df.columns))
            pairs.append(Pair(
                fact_check_id=_parse_id(_cell(row, columns['fact_check_id']), 'fact_check_id'),
                post_id=_parse_id(_cell(row, columns['post_id']), 'post_id'),
            ))
        except RowError as e:
            report.add_malformed(position, str(e))

    report.loaded = len(pairs)
    _log_report(report)
    return pairs, report


def check_pairs(pairs: Iterable[Pair],
                fact_checks: Iterable[FactCheck],
                posts: Iterable[Post]) -> Tuple[List[Pair], List[Pair]]:
    """
    Split pairs into those referencing loaded records and dangling ones

    Returns:
        Tuple of (valid pairs, dangling pairs), both in input order
    """
    fact_check_ids = {fc.fact_check_id for fc in fact_checks}
    post_ids = {p.post_id for p in posts}

    valid, dangling = [], []
    for pair in pairs:
        if pair.fact_check_id in fact_check_ids and pair.post_id in post_ids:
            valid.append(pair)
        else:
            dangling.append(pair)

    if dangling:
        logger.warning(f"{len(dangling):,} pairs reference fact checks or posts that were not loaded")
    return valid, dangling


def _id_list(value, key_path: str) -> Tuple[int, ...]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise SchemaError(key_path, f"{key_path} must be a list of integers")
    return tuple(value)


def load_task_config(path: Union[str, Path]) -> TaskConfig:
    """
    Load tasks.json

    Accepts a flat {language: {...}} map or the organisers' nesting under a
    "monolingual" key (other tracks are ignored). Each language entry needs
    "fact_checks"; "posts_train", "posts_dev" and "posts_test" are optional.

    Args:
        path: UTF-8 JSON file

    Returns:
        TaskConfig with one entry per monolingual language sub-task
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Task configuration not found: {path}")

    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError("$", f"{path.name} is not valid JSON: {e}") from e

    if not isinstance(data, dict):
        raise SchemaError("$", f"{path.name} must hold a JSON object")

    prefix = "$"
    if 'monolingual' in data:
        data = data['monolingual']
        prefix = "$.monolingual"
        if not isinstance(data, dict):
            raise SchemaError(prefix)

    tasks: Dict[str, LanguageTask] = {}
    for language, entry in data.items():
        key_path = f"{prefix}.{language}"
        if not isinstance(entry, dict):
            raise SchemaError(key_path, f"{key_path} must be an object")
        if 'fact_checks' not in entry:
            raise SchemaError(f"{key_path}.fact_checks")

        task = LanguageTask(
            fact_check_ids=_id_list(entry['fact_checks'], f"{key_path}.fact_checks"),
            post_ids_train=_id_list(entry.get('posts_train', []), f"{key_path}.posts_train"),
            post_ids_dev=_id_list(entry.get('posts_dev', []), f"{key_path}.posts_dev"),
            post_ids_test=_id_list(entry.get('posts_test', []), f"{key_path}.posts_test"),
        )
        overlap = set(task.post_ids_dev) & set(task.post_ids_test)
        if overlap:
            raise SchemaError(key_path, f"{key_path}: {len(overlap)} post IDs appear in both dev and test "
                                        f"(e.g. {sorted(overlap)[:5]})")
        tasks[language] = task

    logger.info(f"Loaded task configuration with {len(tasks)} languages: {', '.join(tasks)}")
    return TaskConfig(tasks=tasks)


@dataclass
class Corpus:
    """Everything loaded for one run, indexed by ID"""
    fact_checks: Dict[int, FactCheck]
    posts: Dict[int, Post]
    pairs: List[Pair]
    dangling_pairs: List[Pair]
    task: TaskConfig
    reports: Dict[str, LoadReport]

    def language_fact_checks(self, language: str) -> List[FactCheck]:
        """Fact checks listed for a language, in task order, skipping IDs that were not loaded"""
        ids = self.task.tasks[language].fact_check_ids
        missing = [i for i in ids if i not in self.fact_checks]
        if missing:
            logger.warning(f"'{language}': {len(missing):,} of {len(ids):,} listed fact checks were not loaded")
        return [self.fact_checks[i] for i in ids if i in self.fact_checks]

    def load_report(self) -> Dict:
        """JSON-ready summary: per-file counts, malformed rows, dangling pairs, task splits"""
        return {
            'files': {name: report.to_dict() for name, report in self.reports.items()},
            'pairs_valid': len(self.pairs),
            'pairs_dangling': [
                {'fact_check_id': p.fact_check_id, 'post_id': p.post_id} for p in self.dangling_pairs
            ],
            'task': {
                lang: {
                    'fact_checks': len(task.fact_check_ids),
                    **{f"posts_{split}": len(task.post_ids(split)) for split in SPLITS},
                }
                for lang, task in self.task.tasks.items()
            },
        }


def load_corpus(data_dir: Union[str, Path], tasks_path: Union[str, Path],
                extra_text_columns: Iterable[str] = (),
                column_aliases: Optional[Dict[str, Dict[str, List[str]]]] = None) -> Corpus:
    """
    Load the three task CSVs of a data directory and the task configuration

    Args:
        data_dir: Directory holding fact_checks.csv, posts.csv and pairs.csv
        tasks_path: tasks.json
        extra_text_columns: Whitelisted post columns appended to text_fields
        column_aliases: Optional {"fact_checks"|"posts"|"pairs": {field: [aliases]}}

    Returns:
        Corpus with pairs split into valid and dangling
    """
    column_aliases = column_aliases or {}
    connector = MultiClaimConnector(data_dir)

    fact_checks, fc_report = load_fact_checks(connector.path('fact_checks'), column_aliases.get('fact_checks'))
    posts, post_report = load_posts(connector.path('posts'), extra_text_columns, column_aliases.get('posts'))
    pairs, pair_report = load_pairs(connector.path('pairs'), column_aliases.get('pairs'))
    task = load_task_config(tasks_path)

    valid, dangling = check_pairs(pairs, fact_checks, posts)

    return Corpus(
        fact_checks={fc.fact_check_id: fc for fc in fact_checks},
        posts={p.post_id: p for p in posts},
        pairs=valid,
        dangling_pairs=dangling,
        task=task,
        reports={'fact_checks': fc_report, 'posts': post_report, 'pairs': pair_report},
    )


# ---------------------------------------------------------------------------
# Text assembly
# ---------------------------------------------------------------------------

def post_text(post: Post) -> str:
    """Non-empty text fields then verdicts, joined by single spaces"""
    return " ".join(part for part in (*post.text_fields, *post.verdicts) if part)


def claim_text(fc: FactCheck) -> str:
    """Original claim, English claim and title, joined by single spaces, skipping empty parts"""
    return " ".join(part for part in (fc.claim_original, fc.claim_english, fc.title) if part)


def _log_report(report: LoadReport):
    logger.info(f"Loaded {report.loaded:,} of {report.total_rows:,} rows from {Path(report.file).name}")
    if report.malformed:
        logger.warning(f"  {len(report.malformed):,} malformed rows in {Path(report.file).name}:")
        for malformed in report.malformed[:5]:
            logger.warning(f"    row {malformed.row}: {malformed.cause}")
