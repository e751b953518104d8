import json
import logging
from pathlib import Path

import pytest

from src.utils.errors import ConfigError
from src.utils.helpers import (load_config, resolve_path, setup_logging, summarize_predictions,
                               write_json_atomic)
from src.utils.multiclaim_connector import MultiClaimConnector, find_column, read_csv_cells


class TestLoadConfig:

    def test_attributes_and_config_dir(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"split": "test", "k": 5}), encoding='utf-8')

        config = load_config(path)
        assert config.split == "test"
        assert config.k == 5
        assert Path(config.config_dir) == tmp_path.resolve()

    def test_missing(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")

    @pytest.mark.parametrize("content", ["{not json", "[1, 2]"])
    def test_invalid(self, tmp_path, content):
        path = tmp_path / "run.json"
        path.write_text(content, encoding='utf-8')
        with pytest.raises(ConfigError):
            load_config(path)


def test_resolve_path(tmp_path):
    assert resolve_path(tmp_path, "data") == tmp_path / "data"
    assert resolve_path(tmp_path, str(tmp_path / "abs")) == tmp_path / "abs"
    assert resolve_path(tmp_path, None) is None


def test_setup_logging_rejects_unknown_level():
    with pytest.raises(ConfigError):
        setup_logging("CHATTY")
    setup_logging("warning")
    assert logging.getLogger().level == logging.WARNING


class TestWriteJsonAtomic:

    def test_writes_and_leaves_no_temp_files(self, tmp_path):
        target = tmp_path / "nested" / "out.json"
        write_json_atomic({"b": 1, "a": "é"}, target)

        assert json.loads(target.read_text(encoding='utf-8')) == {"b": 1, "a": "é"}
        assert [p.name for p in target.parent.iterdir()] == ["out.json"]

    def test_failed_write_keeps_previous_file(self, tmp_path):
        target = tmp_path / "out.json"
        write_json_atomic({"ok": True}, target)
        with pytest.raises(TypeError):
            write_json_atomic({"bad": object()}, target)

        assert json.loads(target.read_text(encoding='utf-8')) == {"ok": True}
        assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


def test_summarize_predictions():
    summary = summarize_predictions({1: [1, 2], 2: [3, 4]}, {'eng': [1], 'spa': [2, 9]}, print_summary=False)
    assert summary['n_posts'] == 2
    assert summary['ids_per_post'] == 2.0
    assert summary['posts_per_language'] == {'eng': 1, 'spa': 1}


class TestMultiClaimConnector:

    def test_exact_and_prefixed_names(self, tmp_path):
        for name in ("fact_checks.csv", "trial_posts.csv", "trial_pairs.csv"):
            (tmp_path / name).write_text("id\n1\n", encoding='utf-8')

        connector = MultiClaimConnector(tmp_path)
        assert connector.path('fact_checks').name == "fact_checks.csv"
        assert connector.path('posts').name == "trial_posts.csv"

    def test_missing_table(self, tmp_path):
        connector = MultiClaimConnector(tmp_path)
        with pytest.raises(FileNotFoundError):
            connector.path('pairs')

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            MultiClaimConnector(tmp_path / "nowhere")


class TestReadCsvCells:

    def test_quoted_newlines_and_empty_cells(self, tmp_path):
        path = tmp_path / "posts.csv"
        path.write_text('Post_ID,text\n1,"line one\nline ""two"""\n2,\n', encoding='utf-8')

        df, bad_lines = read_csv_cells(path)
        assert list(df.columns) == ["post_id", "text"]
        assert df.loc[0, "text"] == 'line one\nline "two"'
        assert df.loc[1, "text"] == ""
        assert bad_lines == []

    def test_collects_bad_lines(self, tmp_path):
        path = tmp_path / "pairs.csv"
        path.write_text("fact_check_id,post_id\n1,2\n3,4,5\n6,7\n", encoding='utf-8')

        df, bad_lines = read_csv_cells(path)
        assert len(df) == 2
        assert bad_lines == [["3", "4", "5"]]

    def test_find_column(self, tmp_path):
        path = tmp_path / "pairs.csv"
        path.write_text("FC_ID,post_id\n1,2\n", encoding='utf-8')
        df, _ = read_csv_cells(path)
        assert find_column(df, ["fact_check_id", "fc_id"]) == "fc_id"
        assert find_column(df, ["claim_id"]) is None


def test_utils_reexports_only_error_classes():
    import src.utils as utils
    from src.utils import errors

    assert set(errors.__all__) <= set(vars(utils))
    assert all(issubclass(getattr(errors, name), errors.RetrievalEngineError) for name in errors.__all__)
    assert not hasattr(utils, 'Optional')
