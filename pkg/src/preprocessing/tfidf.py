"""
TF-IDF: vocabulary selection, smoothed idf and L2-normalized sparse vectors

Variant: raw term counts, idf = ln((1 + n) / (1 + df)) + 1, L2 row
normalization. With max_features, the retained terms are the top terms
by total corpus count, ties broken by term (ascending), so vocabularies
nest as the limit grows. Indices follow lexicographic term order.
"""

import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.preprocessing import normalize

from .analyzers import AnalyzerConfig, get_analyzer
from ..utils.errors import ConfigError, EmptyVocabulary, ModelFormatError
from ..utils.helpers import write_json_atomic

logger = logging.getLogger(__name__)

MODEL_FORMAT = "multiclaim-tfidf"
MODEL_FORMAT_VERSION = 1


def idf_weight(df: int, n: int) -> float:
    """
    Smoothed inverse document frequency

    Args:
        df: Document frequency, 0 <= df <= n
        n: Corpus size, n >= 1

    Returns:
        ln((1 + n) / (1 + df)) + 1
    """
    if n < 1:
        raise ValueError(f"Corpus size must be >= 1, got {n}")
    if df < 0 or df > n:
        raise ValueError(f"Document frequency {df} outside [0, {n}]")
    return math.log((1 + n) / (1 + df)) + 1


@dataclass(frozen=True)
class SparseVector:
    """(index, weight) entries, strictly increasing by index, no zero weights"""
    indices: Tuple[int, ...] = ()
    weights: Tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.indices) != len(self.weights):
            raise ValueError("indices and weights must have the same length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(w == 0.0 for w in self.weights):
            raise ValueError("zero weights are not stored")

    @classmethod
    def from_entries(cls, entries: Iterable[Tuple[int, float]]) -> 'SparseVector':
        entries = list(entries)
        return cls(tuple(int(i) for i, _ in entries), tuple(float(w) for _, w in entries))

    @classmethod
    def from_csr_row(cls, matrix: sp.csr_matrix, row: int) -> 'SparseVector':
        start, end = matrix.indptr[row], matrix.indptr[row + 1]
        indices = matrix.indices[start:end]
        weights = matrix.data[start:end]
        order = np.argsort(indices, kind='stable')
        keep = weights[order] != 0.0
        return cls(tuple(int(i) for i in indices[order][keep]),
                   tuple(float(w) for w in weights[order][keep]))

    @property
    def entries(self) -> List[Tuple[int, float]]:
        return list(zip(self.indices, self.weights))

    def norm(self) -> float:
        return math.sqrt(math.fsum(w * w for w in self.weights))

    def is_empty(self) -> bool:
        return not self.indices

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class Vocabulary:
    """Retained terms in index order with their total corpus counts"""
    terms: Tuple[str, ...]
    term_counts: Tuple[int, ...]
    term_to_index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.terms) != len(self.term_counts):
            raise ValueError("terms and term_counts must have the same length")
        object.__setattr__(self, 'term_to_index', {t: i for i, t in enumerate(self.terms)})
        if len(self.term_to_index) != len(self.terms):
            raise ValueError("duplicate terms in vocabulary")

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index


class TfidfModel:
    """
    Fitted vocabulary + idf weights + analyzer configuration

    Immutable after construction; transform may be called from many threads.
    """

    def __init__(self, vocabulary: Vocabulary, idf: Sequence[float],
                 analyzer_cfg: AnalyzerConfig, max_features: Optional[int] = None,
                 n_documents: int = 0):
        idf = np.asarray(idf, dtype=np.float64)
        if idf.shape != (len(vocabulary),):
            raise ValueError(f"idf has shape {idf.shape}, expected ({len(vocabulary)},)")
        idf.setflags(write=False)

        self.vocabulary = vocabulary
        self.idf = idf
        self.analyzer_cfg = analyzer_cfg
        self.max_features = max_features
        self.n_documents = n_documents
        self._idf_diag = sp.diags(idf, format='csr')
        self._counter: Optional[CountVectorizer] = None

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)

    def _count_vectorizer(self) -> CountVectorizer:
        if self._counter is None:
            self._counter = CountVectorizer(
                analyzer=get_analyzer(self.analyzer_cfg),
                lowercase=False,
                token_pattern=None,
                vocabulary=self.vocabulary.term_to_index,
            )
        return self._counter

    def transform_matrix(self, docs: Sequence[str]) -> sp.csr_matrix:
        """
        Transform many documents at once

        Returns:
            CSR matrix (len(docs) x V) with L2-normalized rows; documents
            without in-vocabulary tokens are empty rows
        """
        if len(docs) == 0 or self.n_features == 0:
            return sp.csr_matrix((len(docs), self.n_features), dtype=np.float64)

        counts = self._count_vectorizer().transform(list(docs)).astype(np.float64)
        weighted = sp.csr_matrix(counts @ self._idf_diag)
        weighted = normalize(weighted, norm='l2', copy=False)
        weighted.eliminate_zeros()
        weighted.sort_indices()
        return weighted

    def transform(self, doc: str) -> SparseVector:
        """Transform one document into an L2-normalized sparse vector"""
        return SparseVector.from_csr_row(self.transform_matrix([doc]), 0)

    def to_dict(self) -> Dict:
        return {
            'format': MODEL_FORMAT,
            'format_version': MODEL_FORMAT_VERSION,
            'analyzer': self.analyzer_cfg.to_dict(),
            'max_features': self.max_features,
            'n_documents': self.n_documents,
            'terms': list(self.vocabulary.terms),
            'term_counts': [int(c) for c in self.vocabulary.term_counts],
            'idf': [float(w) for w in self.idf],
        }

    @classmethod
    def from_dict(cls, d: Dict) -> 'TfidfModel':
        if d.get('format') != MODEL_FORMAT:
            raise ModelFormatError(f"Not a TF-IDF model file (format={d.get('format')!r})")
        if d.get('format_version') != MODEL_FORMAT_VERSION:
            raise ModelFormatError(
                f"Unsupported model format version {d.get('format_version')!r} "
                f"(this build reads version {MODEL_FORMAT_VERSION})")
        try:
            vocabulary = Vocabulary(tuple(d['terms']), tuple(int(c) for c in d['term_counts']))
            return cls(
                vocabulary=vocabulary,
                idf=d['idf'],
                analyzer_cfg=AnalyzerConfig.from_dict(d['analyzer']),
                max_features=d.get('max_features'),
                n_documents=int(d.get('n_documents', 0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(f"Malformed model file: {e}") from e

    def save(self, path: Union[str, Path]):
        """Write the model as one self-describing JSON file"""
        write_json_atomic(self.to_dict(), path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'TfidfModel':
        with open(path, 'r', encoding='utf-8') as f:
            try:
                return cls.from_dict(json.load(f))
            except json.JSONDecodeError as e:
                raise ModelFormatError(f"Model file is not valid JSON: {path}") from e

    def __repr__(self) -> str:
        return (f"{self.__class__.__name__}(analyzer={self.analyzer_cfg.label()}, "
                f"max_features={self.max_features}, n_features={self.n_features}, "
                f"n_documents={self.n_documents})")


def fit(corpus: Sequence[str], analyzer_cfg: AnalyzerConfig,
        max_features: Optional[int] = None) -> TfidfModel:
    """
    Fit a TF-IDF model

    Args:
        corpus: Nonempty list of documents
        analyzer_cfg: Tokenization settings
        max_features: Optional vocabulary cap (top terms by total corpus count)

    Returns:
        Fitted TfidfModel

    Raises:
        EmptyVocabulary: if no document yields a token
    """
    if len(corpus) == 0:
        raise EmptyVocabulary("Cannot fit a TF-IDF model on an empty corpus")
    if max_features is not None and (isinstance(max_features, bool) or
                                     not isinstance(max_features, int) or max_features < 1):
        raise ConfigError(f"max_features must be a positive integer, got {max_features!r}")

    counter = CountVectorizer(analyzer=get_analyzer(analyzer_cfg), lowercase=False, token_pattern=None)
    try:
        counts = counter.fit_transform(list(corpus))
    except ValueError as e:
        raise EmptyVocabulary(f"No document produced a token under {analyzer_cfg.label()}: {e}") from e

    counts = sp.csr_matrix(counts)
    terms = counter.get_feature_names_out()
    term_counts = np.asarray(counts.sum(axis=0)).ravel().astype(np.int64)
    doc_freq = np.bincount(counts.indices, minlength=counts.shape[1])

    if max_features is not None and len(terms) > max_features:
        # count descending, then term ascending (columns are already in term order)
        order = np.lexsort((np.arange(len(terms)), -term_counts))
        keep = np.sort(order[:max_features])
        logger.debug(f"Truncated vocabulary from {len(terms):,} to {max_features:,} terms")
        terms, term_counts, doc_freq = terms[keep], term_counts[keep], doc_freq[keep]

    n = len(corpus)
    idf = np.log((1.0 + n) / (1.0 + doc_freq)) + 1.0

    vocabulary = Vocabulary(tuple(str(t) for t in terms), tuple(int(c) for c in term_counts))
    model = TfidfModel(vocabulary, idf, analyzer_cfg, max_features=max_features, n_documents=n)
    logger.debug(f"Fitted {model!r}")
    return model


def transform(model: TfidfModel, doc: str) -> SparseVector:
    """Transform one document with a fitted model"""
    return model.transform(doc)
