"""
MultiClaim Connector: file discovery and tolerant CSV reading for a MultiClaim data directory

Task dumps are not always named consistently (e.g. `fact_checks.csv` vs
`semeval_fact_checks.csv`), so tables are discovered by exact name first
and by suffix second.
"""

import re
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

logger = logging.getLogger(__name__)

MULTICLAIM_TABLES = ['fact_checks', 'posts', 'pairs']

# surrogateescape decodes each invalid byte to one of these; valid UTF-8 never does
UNDECODABLE_BYTE = re.compile("[\udc80-\udcff]")


def read_csv_cells(path: Union[str, Path]) -> Tuple[pd.DataFrame, List[List[str]]]:
    """
    Read an RFC-4180 CSV file as strings without aborting on bad lines

    Every cell is kept as text and empty cells become "". Lines with too
    many fields are collected as bad lines; lines with too few are padded
    with NaN, which therefore only ever marks a truncated row. Undecodable
    bytes are kept as lone surrogates so the affected rows can be reported
    individually instead of failing the whole file.

    Args:
        path: CSV file with a header row

    Returns:
        Tuple of (DataFrame of cells, list of structurally bad lines)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Data file not found: {path}")

    bad_lines: List[List[str]] = []

    def _collect(bad_line: List[str]):
        bad_lines.append(bad_line)
        return None

    try:
        df = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding='utf-8',
            encoding_errors='surrogateescape',
            engine='python',
            on_bad_lines=_collect,
        )
    except pd.errors.EmptyDataError:
        logger.warning(f"{path} is empty")
        df = pd.DataFrame()

    df.columns = [str(c).strip().lower() for c in df.columns]

    if bad_lines:
        logger.warning(f"{path.name}: {len(bad_lines):,} lines with a wrong field count were skipped")

    return df, bad_lines


def has_decoding_errors(cells) -> bool:
    """True if any cell holds bytes that were not valid UTF-8"""
    return any(UNDECODABLE_BYTE.search(cell) for cell in cells)


def find_column(df: pd.DataFrame, aliases: List[str]) -> Optional[str]:
    """Return the first alias present among the DataFrame's (lower-cased) columns"""
    for alias in aliases:
        if alias.lower() in df.columns:
            return alias.lower()
    return None


class MultiClaimConnector:
    """
    Locates the MultiClaim tables inside a data directory
    """

    def __init__(self, data_dir: Union[str, Path]):
        """
        Initialize MultiClaim Connector

        Args:
            data_dir: Path to directory containing the task CSV files
        """
        self.data_dir = Path(data_dir)
        if not self.data_dir.is_dir():
            raise FileNotFoundError(f"Data directory not found: {self.data_dir}")

        self.table_paths: Dict[str, Path] = {}
        self._discover_tables()

        logger.info(f"MultiClaimConnector initialized with data directory: {data_dir}")
        logger.info(f"Found {len(self.table_paths)} MultiClaim tables")

    def _discover_tables(self):
        """Discover available MultiClaim tables in the data directory"""
        files = sorted(f.name for f in self.data_dir.glob("*.csv"))

        for table in MULTICLAIM_TABLES:
            # 1. Exact match
            if f"{table}.csv" in files:
                self.table_paths[table] = self.data_dir / f"{table}.csv"
                logger.debug(f"Found table: {table} (exact)")
                continue

            # 2. Prefix match (e.g. trial_fact_checks.csv)
            matches = [f for f in files if f.endswith(f"_{table}.csv")]
            if matches:
                if len(matches) > 1:
                    logger.warning(f"Several candidates for {table}: {matches}; using {matches[0]}")
                self.table_paths[table] = self.data_dir / matches[0]
                logger.debug(f"Found table: {table} (prefix match: {matches[0]})")

    def path(self, table_name: str) -> Path:
        """
        Path of a discovered table

        Args:
            table_name: One of fact_checks, posts, pairs

        Returns:
            Path to the CSV file
        """
        if table_name not in self.table_paths:
            raise FileNotFoundError(f"Table {table_name} not found in data directory {self.data_dir}")
        return self.table_paths[table_name]

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(data_dir={str(self.data_dir)!r}, tables={sorted(self.table_paths)})"
