"""
Retrieval: per-language TF-IDF indexes, top-k queries and batch prediction
"""

from .index import FitCorpusPolicy, RankedResult, RetrievalIndex, build_index, cosine, query_top_k
from .predict import IndexSettings, generate_predictions, load_predictions, predict_all, write_predictions

__all__ = [
    'FitCorpusPolicy',
    'RankedResult',
    'RetrievalIndex',
    'build_index',
    'cosine',
    'query_top_k',
    'IndexSettings',
    'generate_predictions',
    'predict_all',
    'load_predictions',
    'write_predictions',
]
