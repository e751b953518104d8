"""
Analyzers: text -> token stream for the TF-IDF vectorizer

Three modes, as swept in the TF-IDF experiments:
- word:    runs of two or more word characters, optionally word n-grams
- char:    character n-grams over the whole (whitespace-collapsed) text
- char_wb: character n-grams inside space-padded words only

The n-gram machinery is scikit-learn's; this module fixes the
preprocessing (lowercasing, NFC normalization, whitespace handling).
"""

import re
import unicodedata
from dataclasses import asdict, dataclass
from functools import lru_cache, partial
from typing import Callable, Dict, List

from sklearn.feature_extraction.text import CountVectorizer

from ..utils.errors import ConfigError

Token = str

ANALYZER_MODES = ('word', 'char', 'char_wb')
MODE_ALIASES = {'charwb': 'char_wb', 'char-wb': 'char_wb'}

WORD_TOKEN_PATTERN = r"(?u)\b\w\w+\b"

_WHITESPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class AnalyzerConfig:
    mode: str = 'word'
    ngram_min: int = 1
    ngram_max: int = 1
    lowercase: bool = True

    def __post_init__(self):
        mode = MODE_ALIASES.get(self.mode, self.mode)
        if mode not in ANALYZER_MODES:
            raise ConfigError(f"Unknown analyzer '{self.mode}' (expected one of {', '.join(ANALYZER_MODES)})")
        object.__setattr__(self, 'mode', mode)

        if isinstance(self.ngram_min, bool) or not isinstance(self.ngram_min, int) or self.ngram_min < 1:
            raise ConfigError(f"ngram_min must be an integer >= 1, got {self.ngram_min!r}")
        if isinstance(self.ngram_max, bool) or not isinstance(self.ngram_max, int) or self.ngram_max < self.ngram_min:
            raise ConfigError(f"ngram_max must be an integer >= ngram_min, got {self.ngram_max!r}")

    @classmethod
    def from_dict(cls, d: Dict) -> 'AnalyzerConfig':
        ngram = d.get('ngram', [1, 1])
        if not isinstance(ngram, (list, tuple)) or len(ngram) != 2:
            raise ConfigError(f"ngram must be [min, max], got {ngram!r}")
        return cls(
            mode=d.get('analyzer', d.get('mode', 'word')),
            ngram_min=ngram[0],
            ngram_max=ngram[1],
            lowercase=bool(d.get('lowercase', True)),
        )

    def to_dict(self) -> Dict:
        d = asdict(self)
        return {
            'analyzer': d['mode'],
            'ngram': [d['ngram_min'], d['ngram_max']],
            'lowercase': d['lowercase'],
        }

    def label(self) -> str:
        return f"{self.mode}({self.ngram_min},{self.ngram_max})"


def preprocess(text: str, cfg: AnalyzerConfig) -> str:
    """
    Normalization shared by all analyzers

    Lowercases when cfg.lowercase is set, then composes to Unicode NFC.
    No accent stripping.
    """
    if cfg.lowercase:
        text = text.lower()
    return unicodedata.normalize('NFC', text)


def _prepare(text: str, cfg: AnalyzerConfig) -> str:
    text = preprocess(text, cfg)
    if cfg.mode == 'char':
        text = _WHITESPACE.sub(" ", text)
    return text


@lru_cache(maxsize=None)
def get_analyzer(cfg: AnalyzerConfig) -> Callable[[str], List[Token]]:
    """
    Build (once per configuration) the callable mapping text to tokens

    The callable is picklable, so it can be shipped to joblib workers.
    """
    params = dict(
        analyzer=cfg.mode,
        ngram_range=(cfg.ngram_min, cfg.ngram_max),
        lowercase=False,
        preprocessor=partial(_prepare, cfg=cfg),
    )
    if cfg.mode == 'word':
        params['token_pattern'] = WORD_TOKEN_PATTERN
    return CountVectorizer(**params).build_analyzer()


def analyze(text: str, cfg: AnalyzerConfig) -> List[Token]:
    """
    Tokenize text under cfg

    word mode emits unigrams first, then each longer n-gram size in turn
    (words joined by single spaces); char modes emit n-grams grouped by
    length. Empty text yields an empty list.
    """
    if not text:
        return []
    return list(get_analyzer(cfg)(text))
