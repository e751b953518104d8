"""
Preprocessing: corpus ingestion, text analyzers and TF-IDF vectorization
"""

__all__ = [
    'corpus_ingest',
    'analyzers',
    'tfidf',
]
