import json

import pytest

from src.preprocessing.corpus_ingest import (FactCheck, Pair, Post, check_pairs, claim_text, load_corpus,
                                             load_fact_checks, load_pairs, load_posts, load_task_config,
                                             post_text)
from src.utils.errors import SchemaError

AVOCADO_ROW = (
    '1,"(\' Are avocados good for you?\', \' Are avocados good for you?\', [(\'eng\', 1.0)])",'
    '"[(1525653998.0, \'https://www.snopes.com/fact-check/avocado/\')]",\n'
)

BELL_PEPPER_TEXT = "Flip the bell peppers over and look at the bottom"


def write(path, text):
    path.write_text(text, encoding='utf-8')
    return path


class TestLoadFactChecks:

    def test_claim_tuple_and_empty_title(self, tmp_path):
        path = write(tmp_path / "fact_checks.csv", "fact_check_id,claim,instances,title\n" + AVOCADO_ROW)
        fact_checks, report = load_fact_checks(path)

        assert len(fact_checks) == 1
        fc = fact_checks[0]
        assert fc.fact_check_id == 1
        assert fc.claim_original == " Are avocados good for you?"
        assert fc.claim_english == " Are avocados good for you?"
        assert fc.claim_languages == (("eng", 1.0),)
        assert fc.instances == ((1525653998.0, "https://www.snopes.com/fact-check/avocado/"),)
        assert fc.title == ""
        assert report.loaded == 1 and report.total_rows == 1 and not report.malformed

    def test_title_tuple_uses_original(self, tmp_path):
        path = write(tmp_path / "fact_checks.csv",
                     "fact_check_id,claim,instances,title\n"
                     "5,\"('x', 'y', [])\",[],\"('Titre', 'Title', [('fra', 1.0)])\"\n")
        fact_checks, _ = load_fact_checks(path)
        assert fact_checks[0].title == "Titre"

    def test_header_only(self, tmp_path):
        path = write(tmp_path / "fact_checks.csv", "fact_check_id,claim,instances,title\n")
        fact_checks, report = load_fact_checks(path)
        assert fact_checks == []
        assert report.total_rows == 0

    def test_malformed_rows_are_reported_and_skipped(self, tmp_path):
        path = write(tmp_path / "fact_checks.csv",
                     "fact_check_id,claim,instances,title\n"
                     + AVOCADO_ROW
                     + "2,\"('unclosed\",[],\n"
                     + "x3,\"('a', 'b', [])\",[],\n"
                     + "1,\"('dup', 'dup', [])\",[],\n"
                     + "4,\"('a', 'b', [('eng', 1.5)])\",[],\n"
                     + "5,\"('fine', 'fine', [('eng', 0.5)])\",[],\n")
        fact_checks, report = load_fact_checks(path)

        assert [fc.fact_check_id for fc in fact_checks] == [1, 5]
        assert [m.row for m in report.malformed] == [2, 3, 4, 5]
        assert report.loaded + len(report.malformed) == report.total_rows == 6
        assert "duplicate" in report.malformed[2].cause
        assert "confidence" in report.malformed[3].cause

    def test_invalid_utf8_is_malformed(self, tmp_path):
        path = tmp_path / "fact_checks.csv"
        path.write_bytes(b"fact_check_id,claim,instances,title\n"
                         b"1,\"('ok', 'ok', [])\",[],\n"
                         b"2,\"('bad \xff byte', 'x', [])\",[],\n")
        fact_checks, report = load_fact_checks(path)
        assert [fc.fact_check_id for fc in fact_checks] == [1]
        assert report.malformed[0].row == 2
        assert "UTF-8" in report.malformed[0].cause

    def test_header_aliases(self, tmp_path):
        path = write(tmp_path / "fact_checks.csv", "ID,Claims\n7,\"('a', 'b', [])\"\n")
        fact_checks, _ = load_fact_checks(path)
        assert fact_checks[0] == FactCheck(7, "a", "b")

    def test_missing_claim_column(self, tmp_path):
        path = write(tmp_path / "fact_checks.csv", "fact_check_id,title\n1,t\n")
        with pytest.raises(SchemaError) as excinfo:
            load_fact_checks(path)
        assert excinfo.value.key_path == "fact_checks.csv:claim"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_fact_checks(tmp_path / "nope.csv")


class TestLoadPosts:
    HEADER = "post_id,instances,ocr,verdicts,text\n"

    def test_verdicts_and_repeated_text(self, tmp_path):
        text = f"(\'{BELL_PEPPER_TEXT}\', \'{BELL_PEPPER_TEXT}\', [(\'eng\', 1.0)])"
        path = write(tmp_path / "posts.csv",
                     self.HEADER + f"2,\"[(1608571882.0, 'fb')]\",[],['False information'],\"{text}\"\n")
        posts, report = load_posts(path)

        post = posts[0]
        assert post.verdicts == ("False information",)
        assert post.text_fields == (BELL_PEPPER_TEXT, BELL_PEPPER_TEXT)
        assert post.text_languages == (("eng", 1.0),)
        assert post.instances == ((1608571882.0, "fb"),)
        assert report.loaded == 1

    def test_all_text_cells_empty(self, tmp_path):
        path = write(tmp_path / "posts.csv", self.HEADER + "3,,,,\n")
        posts, _ = load_posts(path)
        assert posts[0].text_fields == ("", "")
        assert all(field == "" for field in posts[0].text_fields)
        assert posts[0].verdicts == ()

    def test_ocr_entries_come_first(self, tmp_path):
        ocr = "[('ocr one', 'ocr one en', [('spa', 0.9)]), ('ocr two', 'ocr two en', [])]"
        path = write(tmp_path / "posts.csv",
                     self.HEADER + f"4,[],\"{ocr}\",[],\"('body', 'body en', [('spa', 1.0)])\"\n")
        posts, _ = load_posts(path)
        assert posts[0].text_fields == ("ocr one", "ocr one en", "ocr two", "ocr two en", "body", "body en")
        assert posts[0].text_languages == (("spa", 0.9), ("spa", 1.0))

    def test_newline_inside_quoted_cell(self, tmp_path):
        path = write(tmp_path / "posts.csv",
                     self.HEADER + "5,[],\"[('first\nsecond', 'first second', [])]\",[],\n")
        posts, report = load_posts(path)
        assert report.loaded == 1
        assert posts[0].text_fields[0] == "first\nsecond"

    def test_whitelisted_extra_column(self, tmp_path):
        path = write(tmp_path / "posts.csv", "post_id,text,caption,internal\n6,,a caption,secret\n")
        posts, _ = load_posts(path, extra_text_columns=["caption"])
        assert posts[0].text_fields == ("", "", "a caption")

    def test_bad_post_id(self, tmp_path):
        path = write(tmp_path / "posts.csv", self.HEADER + "abc,[],[],[],\n7,[],[],[],\n")
        posts, report = load_posts(path)
        assert [p.post_id for p in posts] == [7]
        assert report.malformed[0].row == 1

    def test_replacement_character_is_valid_text(self, tmp_path):
        path = write(tmp_path / "posts.csv",
                     self.HEADER + "8,[],[],[],\"('bad glyph � here', 'x', [('eng', 1.0)])\"\n")
        posts, report = load_posts(path)
        assert report.loaded == 1 and not report.malformed
        assert posts[0].text_fields == ("bad glyph � here", "x")

    def test_undecodable_bytes_next_to_replacement_character(self, tmp_path):
        path = tmp_path / "posts.csv"
        path.write_bytes(self.HEADER.encode('utf-8')
                         + "1,[],[],[],\"('�', '', [])\"\n".encode('utf-8')
                         + b"2,[],[],[],\"('\xfe\xff', '', [])\"\n")
        posts, report = load_posts(path)
        assert [p.post_id for p in posts] == [1]
        assert [(m.row, m.cause) for m in report.malformed] == [(2, "invalid UTF-8")]

    def test_truncated_row_is_malformed(self, tmp_path):
        path = write(tmp_path / "posts.csv",
                     self.HEADER + "1,[],[],[],\"('full', 'full', [])\"\n2\n")
        posts, report = load_posts(path)

        assert [p.post_id for p in posts] == [1]
        assert report.total_rows == 2
        assert report.malformed[0].row == 2
        assert "wrong field count" in report.malformed[0].cause


class TestLoadPairs:

    def test_rows(self, tmp_path):
        path = write(tmp_path / "pairs.csv", "fact_check_id,post_id\n12,7\n12,7\n")
        pairs, report = load_pairs(path)
        assert pairs == [Pair(12, 7), Pair(12, 7)]
        assert report.loaded == 2

    def test_non_integer_id(self, tmp_path):
        path = write(tmp_path / "pairs.csv", "fact_check_id,post_id\n12,seven\n1,2\n")
        pairs, report = load_pairs(path)
        assert pairs == [Pair(1, 2)]
        assert len(report.malformed) == 1
        assert report.loaded + len(report.malformed) == report.total_rows

    def test_short_and_long_rows(self, tmp_path):
        path = write(tmp_path / "pairs.csv", "fact_check_id,post_id\n1,2\n3\n4,5,6\n7,8\n")
        pairs, report = load_pairs(path)
        assert pairs == [Pair(1, 2), Pair(7, 8)]
        assert sorted(m.cause for m in report.malformed) == [
            "wrong field count (1 of 2 fields)", "wrong field count (3 fields)"]
        assert report.loaded + len(report.malformed) == report.total_rows == 4

    def test_check_pairs(self):
        fact_checks = [FactCheck(1), FactCheck(2)]
        posts = [Post(10), Post(11)]
        valid, dangling = check_pairs([Pair(1, 10), Pair(3, 10), Pair(2, 99), Pair(2, 11)], fact_checks, posts)
        assert valid == [Pair(1, 10), Pair(2, 11)]
        assert dangling == [Pair(3, 10), Pair(2, 99)]


class TestLoadTaskConfig:

    def write_json(self, tmp_path, data):
        path = tmp_path / "tasks.json"
        path.write_text(json.dumps(data), encoding='utf-8')
        return path

    def test_minimal(self, tmp_path):
        task = load_task_config(self.write_json(
            tmp_path, {"eng": {"fact_checks": [1, 2], "posts_dev": [10], "posts_test": [11]}}))
        assert task.languages == ["eng"]
        assert task.tasks["eng"].fact_check_ids == (1, 2)
        assert task.tasks["eng"].post_ids("dev") == (10,)
        assert task.tasks["eng"].post_ids("test") == (11,)
        assert task.tasks["eng"].post_ids("train") == ()

    def test_monolingual_nesting(self, tmp_path):
        languages = ["ara", "deu", "eng", "fra", "msa", "pol", "por", "spa", "tha", "tur"]
        data = {
            "monolingual": {lang: {"fact_checks": [i], "posts_test": [100 + i]} for i, lang in enumerate(languages)},
            "crosslingual": {"fact_checks": [1], "posts_test": [2]},
        }
        task = load_task_config(self.write_json(tmp_path, data))
        assert len(task.tasks) == 10
        assert task.split_post_ids("test")["tur"] == (109,)

    def test_empty(self, tmp_path):
        assert load_task_config(self.write_json(tmp_path, {})).tasks == {}

    def test_missing_fact_checks(self, tmp_path):
        with pytest.raises(SchemaError) as excinfo:
            load_task_config(self.write_json(tmp_path, {"eng": {"posts_dev": [1]}}))
        assert excinfo.value.key_path == "$.eng.fact_checks"

    def test_dev_test_overlap(self, tmp_path):
        with pytest.raises(SchemaError):
            load_task_config(self.write_json(
                tmp_path, {"eng": {"fact_checks": [1], "posts_dev": [5, 6], "posts_test": [6]}}))

    def test_ids_must_be_integers(self, tmp_path):
        with pytest.raises(SchemaError):
            load_task_config(self.write_json(tmp_path, {"eng": {"fact_checks": ["1"]}}))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_task_config(tmp_path / "tasks.json")


class TestTextAssembly:

    @pytest.mark.parametrize("text_fields, verdicts, expected", [
        (("a", "", "b"), ("False information",), "a b False information"),
        (("", ""), (), ""),
        (("x",), (), "x"),
    ])
    def test_post_text(self, text_fields, verdicts, expected):
        assert post_text(Post(1, text_fields=text_fields, verdicts=verdicts)) == expected

    @pytest.mark.parametrize("original, english, title, expected", [
        ("x", "x", "", "x x"),
        ("", "", "", ""),
        ("a", "b", "t", "a b t"),
    ])
    def test_claim_text(self, original, english, title, expected):
        assert claim_text(FactCheck(1, original, english, title=title)) == expected


class TestLoadCorpus:

    def test_synthetic_directory(self, multiclaim):
        corpus = load_corpus(multiclaim.data_dir, multiclaim.tasks_path)

        assert len(corpus.fact_checks) == 300
        assert len(corpus.posts) == 60
        assert len(corpus.pairs) == 60 and corpus.dangling_pairs == []
        assert corpus.task.languages == ["eng", "spa", "deu"]

        for pair in corpus.pairs:
            assert pair.fact_check_id in corpus.fact_checks
            assert pair.post_id in corpus.posts

        report = corpus.load_report()
        assert report['files']['posts']['loaded'] == 60
        assert report['files']['fact_checks']['malformed_count'] == 0
        assert report['task']['eng'] == {'fact_checks': 100, 'posts_train': 4, 'posts_dev': 10, 'posts_test': 6}

    def test_multiline_ocr_cells_survive(self, multiclaim):
        corpus = load_corpus(multiclaim.data_dir, multiclaim.tasks_path)
        with_ocr = [p for p in corpus.posts.values() if len(p.text_fields) == 4]
        assert with_ocr
        assert all("\n" in p.text_fields[0] for p in with_ocr)

    def test_language_fact_checks_skip_unloaded(self, multiclaim):
        tasks = json.loads(multiclaim.tasks_path.read_text(encoding='utf-8'))
        tasks['monolingual']['eng']['fact_checks'].append(99999)
        multiclaim.tasks_path.write_text(json.dumps(tasks), encoding='utf-8')

        corpus = load_corpus(multiclaim.data_dir, multiclaim.tasks_path)
        assert len(corpus.language_fact_checks('eng')) == 100
