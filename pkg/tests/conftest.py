"""
Shared fixtures: a deterministic synthetic MultiClaim directory

Three languages, 100 fact checks and 20 posts each (4 train, 10 dev,
6 test). Every post quotes part of one fact check, which is its gold pair.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd
import pytest

from src.utils.literal_parser import render_literal

LANGUAGES = {
    'eng': "abcdefghijklmnopqrstuvwxyz",
    'spa': "abcdefghijklmnopqrstuvwxyzñáéíóú",
    'deu': "abcdefghijklmnopqrstuvwxyzäöüß",
}
FACT_CHECKS_PER_LANGUAGE = 100
POSTS_PER_LANGUAGE = 20
SPLIT_SIZES = {'train': 4, 'dev': 10, 'test': 6}


@dataclass
class SyntheticMultiClaim:
    data_dir: Path
    tasks_path: Path
    languages: List[str]
    gold: Dict[int, int] = field(default_factory=dict)
    splits: Dict[str, Dict[str, List[int]]] = field(default_factory=dict)

    def split_post_ids(self, split: str) -> List[int]:
        return sorted(pid for lang in self.languages for pid in self.splits[lang][split])


def _vocabulary(rng: np.random.Generator, alphabet: str, size: int = 400) -> List[str]:
    words = set()
    while len(words) < size:
        length = int(rng.integers(3, 9))
        words.add("".join(rng.choice(list(alphabet), size=length)))
    return sorted(words)


def _sentence(rng: np.random.Generator, vocabulary: List[str], n_words: int) -> List[str]:
    ranks = np.arange(1, len(vocabulary) + 1)
    p = (1.0 / ranks) / np.sum(1.0 / ranks)
    return [vocabulary[i] for i in rng.choice(len(vocabulary), size=n_words, p=p)]


def build_synthetic_multiclaim(root: Path, seed: int = 13) -> SyntheticMultiClaim:
    rng = np.random.default_rng(seed)
    data_dir = root / "multiclaim"
    data_dir.mkdir(parents=True, exist_ok=True)

    fact_check_rows, post_rows, pair_rows = [], [], []
    tasks = {}
    dataset = SyntheticMultiClaim(data_dir, data_dir / "tasks.json", list(LANGUAGES))

    for lang_no, (lang, alphabet) in enumerate(LANGUAGES.items()):
        vocabulary = _vocabulary(rng, alphabet)
        claims = {}

        for i in range(FACT_CHECKS_PER_LANGUAGE):
            fact_check_id = lang_no * 1000 + i
            words = _sentence(rng, vocabulary, int(rng.integers(8, 15)))
            claims[fact_check_id] = words
            text = " ".join(words) + "?"
            title = " ".join(words[:3]) if i % 3 == 0 else ""
            fact_check_rows.append({
                'fact_check_id': fact_check_id,
                'claim': render_literal((text, text, [(lang, 1.0)])),
                'instances': render_literal([(1525826671.0 + i, f"https://factcheck.example/{lang}/{i}")]),
                'title': title,
            })

        post_ids = []
        for j in range(POSTS_PER_LANGUAGE):
            post_id = lang_no * 1000 + 500 + j
            source = lang_no * 1000 + int(rng.integers(0, FACT_CHECKS_PER_LANGUAGE))
            quoted = list(rng.choice(claims[source], size=5, replace=False))
            body = " ".join(quoted + _sentence(rng, vocabulary, 4))
            ocr = [] if j % 2 else [(f"{quoted[0]}\n{quoted[1]}", f"{quoted[0]} {quoted[1]}", [(lang, 0.9)])]
            post_rows.append({
                'post_id': post_id,
                'instances': render_literal([(1600000000.0 + j, 'fb')]),
                # real line break inside the OCR literal, as in the raw dumps
                'ocr': render_literal(ocr).replace("\\n", "\n"),
                'verdicts': render_literal(['False information'] if j % 4 == 0 else []),
                'text': render_literal((body, body, [(lang, 1.0)])),
            })
            pair_rows.append({'fact_check_id': source, 'post_id': post_id})
            dataset.gold[post_id] = source
            post_ids.append(post_id)

        train, dev = SPLIT_SIZES['train'], SPLIT_SIZES['dev']
        dataset.splits[lang] = {
            'train': post_ids[:train],
            'dev': post_ids[train:train + dev],
            'test': post_ids[train + dev:],
        }
        tasks[lang] = {
            'fact_checks': sorted(claims),
            'posts_train': dataset.splits[lang]['train'],
            'posts_dev': dataset.splits[lang]['dev'],
            'posts_test': dataset.splits[lang]['test'],
        }

    pd.DataFrame(fact_check_rows).to_csv(data_dir / "fact_checks.csv", index=False)
    pd.DataFrame(post_rows).to_csv(data_dir / "posts.csv", index=False)
    pd.DataFrame(pair_rows).to_csv(data_dir / "pairs.csv", index=False)
    with open(dataset.tasks_path, 'w', encoding='utf-8') as f:
        json.dump({'monolingual': tasks, 'crosslingual': {}}, f, ensure_ascii=False)

    return dataset


@pytest.fixture
def multiclaim(tmp_path) -> SyntheticMultiClaim:
    """Synthetic 3-language MultiClaim directory under tmp_path"""
    return build_synthetic_multiclaim(tmp_path)


@pytest.fixture
def engine_config_path(multiclaim, tmp_path) -> Path:
    """Engine config file pointing at the synthetic data"""
    config = {
        'data_dir': str(multiclaim.data_dir),
        'tasks_path': str(multiclaim.tasks_path),
        'output_dir': str(tmp_path / "output"),
        'split': 'dev',
        'analyzer': 'word',
        'ngram': [1, 1],
        'max_features': 15000,
        'k': 10,
        'parallelism': 1,
    }
    path = tmp_path / "engine.json"
    path.write_text(json.dumps(config), encoding='utf-8')
    return path

