import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypoforge import (
    AspectScores,
    BenchmarkError,
    Hypothesis,
    MatchedScore,
    RankedEntry,
    RankedList,
    ResponseParseError,
    ScriptedProvider,
    aggregate_ms,
    count_matched_inspirations,
    hit_ratio,
    hit_ratio_report,
    load_benchmark,
    matched_score,
    rank_ratio,
    rank_ratio_report,
)

from conftest import make_gateway


def _benchmark_record(**overrides):
    record = {
        "background_question": "q",
        "background_question_strict": "qs",
        "background_survey": "s",
        "background_survey_strict": "ss",
        "inspirations": [
            {"title": "Insp A", "reason": "ra"},
            {"title": "Insp B", "reason": "rb"},
        ],
        "hypothesis": "h",
        "experiments": "e",
        "reasoning_process": "rp",
        "summary_of_inspirations": "si",
    }
    record.update(overrides)
    return record


class TestLoadBenchmark:
    def test_valid_entries(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text(
            json.dumps(_benchmark_record()) + "\n" + json.dumps(_benchmark_record()) + "\n"
        )
        entries = load_benchmark(path)
        assert len(entries) == 2
        assert len(entries[0].inspirations) == 2

    def test_four_inspirations_rejected(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        record = _benchmark_record(
            inspirations=[{"title": f"I{i}"} for i in range(4)]
        )
        path.write_text(json.dumps(record) + "\n")
        with pytest.raises(BenchmarkError, match="1 to 3"):
            load_benchmark(path)

    def test_missing_hypothesis_rejected(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text(json.dumps(_benchmark_record(hypothesis="")) + "\n")
        with pytest.raises(BenchmarkError, match="hypothesis"):
            load_benchmark(path)

    def test_error_names_line(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text(json.dumps(_benchmark_record()) + "\nnot json\n")
        with pytest.raises(BenchmarkError, match=":2:"):
            load_benchmark(path)

    def test_string_inspirations_accepted(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        path.write_text(json.dumps(_benchmark_record(inspirations=["Just A Title"])) + "\n")
        entries = load_benchmark(path)
        assert entries[0].inspirations[0].title == "Just A Title"

    def test_strict_fields_must_not_leak_inspirations(self, tmp_path):
        path = tmp_path / "bench.jsonl"
        record = _benchmark_record(
            background_question_strict="How does the Nitrogen-Doped Electrode Trick help?",
            inspirations=[{"title": "Nitrogen-Doped Electrode Trick", "reason": "r"}],
        )
        path.write_text(json.dumps(record) + "\n")
        with pytest.raises(BenchmarkError, match="contains inspiration title"):
            load_benchmark(path)

    def test_loose_fields_may_mention_inspirations(self, tmp_path):
        # only the strict variants carry the leak rule
        path = tmp_path / "bench.jsonl"
        record = _benchmark_record(
            background_survey="Prior art: Nitrogen-Doped Electrode Trick works.",
            inspirations=[{"title": "Nitrogen-Doped Electrode Trick", "reason": "r"}],
        )
        path.write_text(json.dumps(record) + "\n")
        assert len(load_benchmark(path)) == 1


class TestHitRatio:
    def test_three_of_four(self):
        assert hit_ratio({"A", "B", "C"}, {"A", "B", "C", "D"}) == 0.75

    def test_nothing_selected(self):
        assert hit_ratio(set(), {"A", "B"}) == 0.0

    def test_superset_is_one(self):
        assert hit_ratio({"A", "B", "X"}, {"A", "B"}) == 1.0

    def test_one_of_three(self):
        assert hit_ratio({"c"}, {"a", "b", "c"}) == pytest.approx(1 / 3)

    def test_partial_overlap(self):
        assert hit_ratio({"b", "x", "y"}, {"a", "b"}) == 0.5

    def test_title_normalization(self):
        assert hit_ratio(["the title"], ["  The Title. "]) == 1.0

    def test_empty_gt_rejected(self):
        with pytest.raises(ValueError):
            hit_ratio({"a"}, set())

    @settings(max_examples=40)
    @given(
        gt=st.sets(st.text(min_size=1, max_size=5), min_size=1, max_size=8),
        selected=st.sets(st.text(min_size=1, max_size=5), max_size=8),
        extra=st.sets(st.text(min_size=1, max_size=5), max_size=4),
    )
    def test_monotone_in_selections(self, gt, selected, extra):
        assert hit_ratio(selected | extra, gt, normalize=False) >= hit_ratio(
            selected, gt, normalize=False
        )

    def test_report_mean(self):
        report = hit_ratio_report([({"a"}, {"a", "b"}), ({"x", "y"}, {"x", "y"})])
        assert [e.ratio for e in report.entries] == [0.5, 1.0]
        assert report.mean_ratio == 0.75


class TestMatchedScore:
    def test_scripted_judge(self, background):
        gateway = make_gateway(ScriptedProvider(lambda *_: "score: 3"))
        result = matched_score(gateway, "generated", "reference", "key points")
        assert result.value == 3 and result.used_gt_inspiration

    def test_sentinel_flag_passthrough(self):
        gateway = make_gateway(ScriptedProvider(lambda *_: "score: 4"))
        result = matched_score(
            gateway, "generated", "reference", "kp", used_gt_inspiration=False
        )
        assert result.display == -1 and result.value == 4

    def test_out_of_range_judge_errors(self):
        provider = ScriptedProvider(lambda *_: "score: 7")
        gateway = make_gateway(provider)
        with pytest.raises(ResponseParseError):
            matched_score(gateway, "g", "r", "kp")
        assert provider.calls == 3  # re-sampled before giving up

    def test_empty_inputs_rejected(self, offline_gateway):
        with pytest.raises(ValueError, match="key_points"):
            matched_score(offline_gateway, "g", "r", "  ")

    def test_inputs_reach_judge_prompt(self):
        captured = []

        def spy(prompt, params):
            captured.append(prompt)
            return "score: 2"

        matched_score(make_gateway(ScriptedProvider(spy)), "GEN-X", "REF-Y", "KP-Z")
        assert "GEN-X" in captured[0] and "REF-Y" in captured[0] and "KP-Z" in captured[0]


class TestAggregateMs:
    def test_basic(self):
        top, avg = aggregate_ms([MatchedScore(3), MatchedScore(5), MatchedScore(2)])
        assert top == 5 and avg == pytest.approx(10 / 3)

    def test_single_zero(self):
        assert aggregate_ms([MatchedScore(0)]) == (0, 0.0)

    def test_all_fives(self):
        assert aggregate_ms([MatchedScore(5), MatchedScore(5)]) == (5, 5.0)

    def test_full_range(self):
        scores = [MatchedScore(v) for v in (1, 2, 3, 4, 5)]
        assert aggregate_ms(scores) == (5, 3.0)

    def test_two_two_four(self):
        top, avg = aggregate_ms([MatchedScore(2), MatchedScore(2), MatchedScore(4)])
        assert top == 4 and avg == pytest.approx(8 / 3)

    def test_sentinels_excluded(self):
        scores = [MatchedScore(3), MatchedScore(5, used_gt_inspiration=False)]
        assert aggregate_ms(scores) == (3, 3.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_ms([])
        with pytest.raises(ValueError, match="ground-truth"):
            aggregate_ms([MatchedScore(4, used_gt_inspiration=False)])

    @settings(max_examples=40)
    @given(st.lists(st.integers(0, 5), min_size=1, max_size=20))
    def test_top_at_least_average(self, values):
        top, avg = aggregate_ms([MatchedScore(v) for v in values])
        assert top >= avg


class TestCountMatchedInspirations:
    GT = {"Insp A", "Insp B", "Insp C"}

    def _h(self, lineage):
        return Hypothesis(id="h", text="t", round=len(lineage), lineage=lineage)

    def test_both_matched(self):
        assert count_matched_inspirations(self._h(("Insp A", "Insp B")), self.GT) == 2

    def test_none_matched(self):
        assert count_matched_inspirations(self._h(("X", "Y", "Z")), self.GT) == 0

    def test_mixed(self):
        assert count_matched_inspirations(self._h(("X", "insp c.")), self.GT) == 1

    def test_benchmark_range(self):
        # benchmark entries allow up to three matches
        assert count_matched_inspirations(
            self._h(("Insp A", "Insp B", "Insp C")), self.GT
        ) == 3


def _ranked(n, seed=0):
    rng = random.Random(seed)
    entries = []
    for i in range(1, n + 1):
        h = Hypothesis(id=f"h{i:05d}", text="t", round=1, lineage=(f"i{i}",))
        scores = AspectScores(
            rng.randint(1, 5), rng.randint(1, 5), rng.randint(1, 5), rng.randint(1, 5)
        )
        entries.append(RankedEntry(hypothesis=h, scores=scores, rank=i))
    return RankedList(tuple(entries))


class TestRankRatio:
    def test_three_of_ten(self):
        assert rank_ratio(3, 10) == 0.3

    def test_one_of_one_degenerate(self):
        assert rank_ratio(1, 1) == 1.0
        report = rank_ratio_report(_ranked(1), {"h00001": 0})
        assert report.degenerate is True

    def test_zero_based_variant(self):
        assert rank_ratio(1, 5, zero_based=True) == 0.0
        assert rank_ratio(5, 5, zero_based=True) == 1.0
        assert rank_ratio(1, 1, zero_based=True) == 0.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            rank_ratio(0, 5)
        with pytest.raises(ValueError):
            rank_ratio(6, 5)

    def test_bucket_means_hand_computed(self):
        ranked = _ranked(4)
        annotations = {"h00001": 1, "h00002": 1, "h00003": 0, "h00004": 0}
        report = rank_ratio_report(ranked, annotations)
        assert report.buckets[1].mean_rank_ratio == pytest.approx((0.25 + 0.5) / 2)
        assert report.buckets[0].mean_rank_ratio == pytest.approx((0.75 + 1.0) / 2)
        assert report.buckets[1].size == 2 and report.buckets[0].size == 2

    def test_bucket_sizes_partition_population(self):
        ranked = _ranked(10)
        annotations = {e.hypothesis.id: e.rank % 3 for e in ranked}
        report = rank_ratio_report(ranked, annotations)
        assert sum(b.size for b in report.buckets.values()) == 10

    def test_sentinel_bucket_key(self):
        ranked = _ranked(2)
        report = rank_ratio_report(ranked, {"h00001": -1, "h00002": 3})
        assert set(report.buckets) == {-1, 3}

    def test_missing_annotation_rejected(self):
        with pytest.raises(ValueError, match="missing annotation"):
            rank_ratio_report(_ranked(2), {"h00001": 1})

    def test_monte_carlo_uniform_annotations(self):
        # oracle: with annotations independent of rank, each bucket's mean
        # rank ratio estimates E[rank/n] = (n+1)/2n ~ 0.5
        n = 10_000
        ranked = _ranked(n, seed=1)
        rng = random.Random(424242)
        annotations = {e.hypothesis.id: rng.randint(0, 3) for e in ranked}
        report = rank_ratio_report(ranked, annotations)
        assert set(report.buckets) == {0, 1, 2, 3}
        for bucket in report.buckets.values():
            assert abs(bucket.mean_rank_ratio - 0.5) < 0.05
