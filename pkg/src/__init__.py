"""
Monolingual fact-checked claim retrieval with TF-IDF

Ingests MultiClaim-format data (fact_checks.csv, posts.csv, pairs.csv,
tasks.json), builds one TF-IDF index per language, predicts the top-10
fact checks for every post and scores the predictions with success@K.
"""

__version__ = "1.0.0"
__license__ = "MIT"

from . import utils
from . import preprocessing
from . import retrieval
from . import analysis

__all__ = ['utils', 'preprocessing', 'retrieval', 'analysis']
