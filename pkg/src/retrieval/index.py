"""
Retrieval Index: per-language TF-IDF index over fact-check claims

Scoring is exhaustive cosine similarity (dot product of L2-normalized
sparse vectors). Rankings order by score descending, then fact_check_id
ascending, so prediction files are reproducible when scores tie.
"""

import json
import math
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from ..preprocessing.analyzers import AnalyzerConfig
from ..preprocessing.corpus_ingest import FactCheck, Post, claim_text, post_text
from ..preprocessing.tfidf import SparseVector, TfidfModel, fit
from ..utils.errors import ConfigError, DataError, ModelFormatError

logger = logging.getLogger(__name__)

INDEX_FORMAT_VERSION = 1


class FitCorpusPolicy(str, Enum):
    FACT_CHECKS_ONLY = 'fact_checks_only'
    FACT_CHECKS_AND_POSTS = 'fact_checks_and_posts'

    @classmethod
    def parse(cls, value: Union[str, 'FitCorpusPolicy']) -> 'FitCorpusPolicy':
        if isinstance(value, cls):
            return value
        aliases = {
            'fact-checks': cls.FACT_CHECKS_ONLY,
            'fact-checks+posts': cls.FACT_CHECKS_AND_POSTS,
        }
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise ConfigError(f"Unknown fit corpus policy '{value}' "
                              f"(expected fact-checks or fact-checks+posts)") from None


@dataclass(frozen=True)
class RankedResult:
    fact_check_id: int
    score: float


def cosine(a: SparseVector, b: SparseVector) -> float:
    """
    Dot product over shared indices of two normalized vectors; 0 if either is empty
    """
    if a.is_empty() or b.is_empty():
        return 0.0
    i = j = 0
    products = []
    while i < len(a.indices) and j < len(b.indices):
        if a.indices[i] == b.indices[j]:
            products.append(a.weights[i] * b.weights[j])
            i += 1
            j += 1
        elif a.indices[i] < b.indices[j]:
            i += 1
        else:
            j += 1
    return math.fsum(products)


def top_k_positions(scores: np.ndarray, ids: np.ndarray, k: int) -> np.ndarray:
    """
    Positions of the k best entries: score descending, then id ascending

    Equivalent to a full sort under the same rule, but only the entries
    scoring at least the k-th best score are sorted.
    """
    n = len(scores)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    if k >= n:
        candidates = np.arange(n)
    else:
        threshold = np.partition(scores, n - k)[n - k]
        candidates = np.flatnonzero(scores >= threshold)
    order = np.lexsort((ids[candidates], -scores[candidates]))
    return candidates[order[:k]]


class RetrievalIndex:
    """
    Fact-check vectors of one language, aligned with their IDs
    """

    def __init__(self, language: str, model: TfidfModel,
                 fact_check_ids: Sequence[int], matrix: sp.csr_matrix):
        ids = np.asarray(fact_check_ids, dtype=np.int64)
        if matrix.shape[0] != len(ids):
            raise ValueError(f"{matrix.shape[0]} vectors for {len(ids)} fact-check IDs")
        if len(np.unique(ids)) != len(ids):
            raise DataError(f"Duplicate fact-check IDs in index for '{language}'")
        ids.setflags(write=False)

        self.language = language
        self.model = model
        self.fact_check_ids = ids
        self.matrix = sp.csr_matrix(matrix)
        self._matrix_t = self.matrix.T.tocsr()

    def __len__(self) -> int:
        return len(self.fact_check_ids)

    def vector(self, row: int) -> SparseVector:
        return SparseVector.from_csr_row(self.matrix, row)

    @property
    def vectors(self) -> List[SparseVector]:
        return [self.vector(i) for i in range(len(self))]

    def score_queries(self, queries: sp.csr_matrix) -> np.ndarray:
        """Dense (n_queries x n_fact_checks) cosine scores for normalized query rows"""
        return np.asarray((queries @ self._matrix_t).toarray())

    def rank(self, scores: np.ndarray, k: int) -> List[RankedResult]:
        """Turn one row of scores into the k best results"""
        positions = top_k_positions(scores, self.fact_check_ids, k)
        return [RankedResult(int(self.fact_check_ids[p]), float(scores[p])) for p in positions]

    def query_texts(self, texts: Sequence[str], k: int = 10, batch_size: int = 256) -> List[List[RankedResult]]:
        """
        Top-k results for many query texts

        Args:
            texts: Query texts
            k: Results per query
            batch_size: Queries scored per sparse product

        Returns:
            One ranked result list per text, in input order
        """
        if k < 1:
            raise ConfigError(f"k must be >= 1, got {k}")
        results: List[List[RankedResult]] = []
        for start in range(0, len(texts), batch_size):
            batch = texts[start:start + batch_size]
            scores = self.score_queries(self.model.transform_matrix(batch))
            results.extend(self.rank(row, k) for row in scores)
        return results

    def save(self, directory: Union[str, Path]):
        """
        Persist as <language>.model.json (the TF-IDF container) plus
        <language>.vectors.npz (fact-check IDs and CSR vectors)
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.model.save(directory / f"{self.language}.model.json")
        np.savez_compressed(
            directory / f"{self.language}.vectors.npz",
            format_version=np.array(INDEX_FORMAT_VERSION),
            language=np.array(self.language),
            fact_check_ids=np.asarray(self.fact_check_ids),
            data=self.matrix.data,
            indices=self.matrix.indices,
            indptr=self.matrix.indptr,
            shape=np.array(self.matrix.shape),
        )
        logger.info(f"Saved index for '{self.language}' ({len(self):,} fact checks) to {directory}")

    @classmethod
    def load(cls, directory: Union[str, Path], language: str) -> 'RetrievalIndex':
        directory = Path(directory)
        model = TfidfModel.load(directory / f"{language}.model.json")
        with np.load(directory / f"{language}.vectors.npz", allow_pickle=False) as section:
            version = int(section['format_version'])
            if version != INDEX_FORMAT_VERSION:
                raise ModelFormatError(f"Unsupported index format version {version}")
            shape = tuple(int(s) for s in section['shape'])
            if shape[1] != model.n_features:
                raise ModelFormatError(f"Vector width {shape[1]} does not match model ({model.n_features})")
            matrix = sp.csr_matrix((section['data'], section['indices'], section['indptr']), shape=shape)
            ids = section['fact_check_ids']
        return cls(language, model, ids, matrix)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(language={self.language!r}, size={len(self)}, model={self.model!r})"


def build_index(fact_checks: Sequence[FactCheck], language: str,
                analyzer_cfg: AnalyzerConfig, max_features: Optional[int] = None,
                fit_corpus_policy: Union[str, FitCorpusPolicy] = FitCorpusPolicy.FACT_CHECKS_ONLY,
                posts: Optional[Iterable[Post]] = None) -> RetrievalIndex:
    """
    Fit a model for one language and vectorize its fact checks

    Args:
        fact_checks: Fact checks of the language sub-task
        language: Language code
        analyzer_cfg: Tokenization settings
        max_features: Optional vocabulary cap
        fit_corpus_policy: Fit on claim texts only, or on claims plus post texts
        posts: Posts added to the fitting corpus under fact_checks_and_posts

    Returns:
        RetrievalIndex with vectors aligned to fact-check IDs
    """
    policy = FitCorpusPolicy.parse(fit_corpus_policy)
    texts = [claim_text(fc) for fc in fact_checks]

    fit_corpus = list(texts)
    if policy is FitCorpusPolicy.FACT_CHECKS_AND_POSTS and posts is not None:
        fit_corpus.extend(post_text(p) for p in posts)

    model = fit(fit_corpus, analyzer_cfg, max_features)
    matrix = model.transform_matrix(texts)

    index = RetrievalIndex(language, model, [fc.fact_check_id for fc in fact_checks], matrix)
    logger.info(f"Built index for '{language}': {len(index):,} fact checks, "
                f"{model.n_features:,} features ({analyzer_cfg.label()}, policy={policy.value})")
    return index


def query_top_k(index: RetrievalIndex, post: Post, k: int = 10) -> List[RankedResult]:
    """
    The k most similar fact checks for a post

    Fully out-of-vocabulary posts score 0 everywhere and get the k
    smallest fact-check IDs.
    """
    return index.query_texts([post_text(post)], k=k)[0]
