import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypoforge import (
    Corpus,
    CorpusError,
    InspirationCandidate,
    build_eval_corpus,
    gt_window_collisions,
    load_corpus,
    partition_windows,
    save_corpus,
)
from hypoforge.corpus import write_eval_corpus

from conftest import make_corpus


def _write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


class TestLoadCorpus:
    def test_preserves_order(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [
            {"id": "a", "title": "A", "abstract": "x"},
            {"id": "b", "title": "B", "abstract": "y"},
            {"id": "c", "title": "C", "abstract": "z"},
        ])
        corpus = load_corpus(path)
        assert corpus.ids() == ["a", "b", "c"]

    def test_duplicate_id_names_offender(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a", "title": "A"}, {"id": "a", "title": "A2"}])
        with pytest.raises(CorpusError, match=r"'a'"):
            load_corpus(path)

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "a", "title": "A"}\nnot json\n', encoding="utf-8")
        with pytest.raises(CorpusError, match=r":2:"):
            load_corpus(path)

    def test_empty_file_is_empty_corpus(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text("", encoding="utf-8")
        assert len(load_corpus(path)) == 0

    def test_unknown_fields_ignored(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a", "title": "A", "year": 2024, "doi": "x"}])
        assert load_corpus(path).ids() == ["a"]

    def test_missing_title_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a"}])
        with pytest.raises(CorpusError, match="title"):
            load_corpus(path)

    def test_save_load_roundtrip(self, tmp_path):
        corpus = make_corpus(7)
        path = tmp_path / "c.jsonl"
        save_corpus(corpus, path)
        assert load_corpus(path).entries == corpus.entries


def _pool(n, prefix):
    return [
        InspirationCandidate(id=f"{prefix}{i}", title=f"{prefix} title {i}", abstract="a")
        for i in range(n)
    ]


class TestBuildEvalCorpus:
    def test_contains_all_gt(self):
        gt = _pool(4, "gt")
        distractors = _pool(200, "d")
        corpus = build_eval_corpus(gt, distractors, target_size=150, seed=7)
        assert len(corpus) == 150
        assert {c.id for c in gt} <= set(corpus.ids())
        assert corpus.seed == 7

    def test_deterministic_for_fixed_seed(self):
        gt = _pool(4, "gt")
        distractors = _pool(300, "d")
        first = build_eval_corpus(gt, distractors, 150, seed=11)
        second = build_eval_corpus(gt, distractors, 150, seed=11)
        assert first.ids() == second.ids()

    def test_different_seed_changes_order(self):
        gt = _pool(4, "gt")
        distractors = _pool(300, "d")
        assert (
            build_eval_corpus(gt, distractors, 150, seed=1).ids()
            != build_eval_corpus(gt, distractors, 150, seed=2).ids()
        )

    @pytest.mark.parametrize("target", [150, 300, 1000, 3000])
    def test_paper_corpus_sizes_constructible(self, target):
        gt = _pool(4, "gt")
        distractors = _pool(3000, "d")
        corpus = build_eval_corpus(gt, distractors, target, seed=3)
        assert len(corpus) == target
        assert {c.id for c in gt} <= set(corpus.ids())

    def test_insufficient_distractors(self):
        with pytest.raises(CorpusError, match="distractors"):
            build_eval_corpus(_pool(2, "gt"), _pool(5, "d"), 10, seed=0)

    def test_overlapping_ids(self):
        gt = _pool(2, "x")
        with pytest.raises(CorpusError, match="overlap"):
            build_eval_corpus(gt, gt + _pool(5, "d"), 6, seed=0)

    def test_target_smaller_than_gt(self):
        with pytest.raises(CorpusError):
            build_eval_corpus(_pool(5, "gt"), _pool(10, "d"), 3, seed=0)

    @settings(max_examples=30)
    @given(n_gt=st.integers(1, 8), extra=st.integers(0, 20), seed=st.integers(0, 2**16))
    def test_gt_always_contained(self, n_gt, extra, seed):
        gt = _pool(n_gt, "gt")
        distractors = _pool(n_gt + extra + 5, "d")
        corpus = build_eval_corpus(gt, distractors, n_gt + extra, seed=seed)
        assert {c.id for c in gt} <= set(corpus.ids())

    def test_serialized_determinism(self, tmp_path):
        gt = _pool(3, "gt")
        distractors = _pool(60, "d")
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_corpus(build_eval_corpus(gt, distractors, 40, seed=5), a)
        save_corpus(build_eval_corpus(gt, distractors, 40, seed=5), b)
        assert a.read_bytes() == b.read_bytes()

    def test_sidecar_metadata(self, tmp_path):
        gt = _pool(3, "gt")
        corpus = build_eval_corpus(gt, _pool(30, "d"), 20, seed=9)
        out = tmp_path / "eval.jsonl"
        sidecar = write_eval_corpus(corpus, [c.id for c in gt], 20, out)
        meta = json.loads(sidecar.read_text())
        assert meta == {"seed": 9, "gt_ids": ["gt0", "gt1", "gt2"], "target_size": 20}


class TestPartitionWindows:
    def test_exact_division(self):
        windows = partition_windows(make_corpus(300), 15)
        assert len(windows) == 20
        assert all(len(w) == 15 for w in windows)

    def test_ragged_final_window(self):
        windows = partition_windows(make_corpus(310), 15)
        assert len(windows) == 21
        assert [len(w) for w in windows[:-1]] == [15] * 20
        assert len(windows[-1]) == 10

    def test_single_short_window(self):
        windows = partition_windows(make_corpus(10), 15)
        assert len(windows) == 1 and len(windows[0]) == 10

    def test_window_size_must_be_positive(self):
        with pytest.raises(ValueError):
            partition_windows(make_corpus(5), 0)

    @settings(max_examples=40)
    @given(n=st.integers(0, 80), size=st.integers(1, 20))
    def test_concatenation_reproduces_corpus(self, n, size):
        corpus = make_corpus(n)
        windows = partition_windows(corpus, size)
        flattened = tuple(p for w in windows for p in w.papers)
        assert flattened == corpus.entries
        assert [w.index for w in windows] == list(range(len(windows)))


class TestCorpusInvariants:
    def test_duplicate_ids_rejected(self):
        paper = InspirationCandidate(id="a", title="A")
        with pytest.raises(CorpusError):
            Corpus((paper, paper))

    def test_without_ids(self):
        corpus = make_corpus(5)
        trimmed = corpus.without_ids(["P0001", "P0003"])
        assert trimmed.ids() == ["P0000", "P0002", "P0004"]

    def test_gt_window_collisions(self):
        corpus = make_corpus(30)
        # two gt papers inside window 0, one in window 1
        assert gt_window_collisions(corpus, ["P0000", "P0005", "P0020"], 15) == [0]
        assert gt_window_collisions(corpus, ["P0000", "P0020"], 15) == []
