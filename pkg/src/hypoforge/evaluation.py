"""Evaluation harness: benchmark loading, hit ratio, matched-score judging,
top/average aggregation, matched-inspiration counting, and rank-ratio reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .domain import (
    BenchmarkEntry,
    GroundTruthInspiration,
    Hypothesis,
    MatchedScore,
    normalize_title,
)
from .gateway import LlmGateway
from .parsing import ResponseParseError, parse_matched_score
from .prompts import render_judge_prompt
from .ranking import RankedList

PARSE_ATTEMPTS = 3


class BenchmarkError(ValueError):
    """Benchmark file failed schema validation."""


_FIELDS = (
    "background_question",
    "background_question_strict",
    "background_survey",
    "background_survey_strict",
    "hypothesis",
    "experiments",
    "reasoning_process",
    "summary_of_inspirations",
)


def _entry_from_record(record: dict, where: str) -> BenchmarkEntry:
    missing = [name for name in _FIELDS if not str(record.get(name, "")).strip()]
    if missing:
        raise BenchmarkError(f"{where}: missing or empty field(s): {', '.join(missing)}")
    raw_inspirations = record.get("inspirations")
    if not isinstance(raw_inspirations, list) or not raw_inspirations:
        raise BenchmarkError(f"{where}: 'inspirations' must be a non-empty list")
    inspirations = []
    for i, item in enumerate(raw_inspirations):
        if isinstance(item, str):
            item = {"title": item}
        if not isinstance(item, dict) or not str(item.get("title", "")).strip():
            raise BenchmarkError(f"{where}: inspiration {i} needs a non-empty title")
        inspirations.append(
            GroundTruthInspiration(
                title=str(item["title"]), reason=str(item.get("reason", ""))
            )
        )
    try:
        entry = BenchmarkEntry(
            background_question=str(record["background_question"]),
            background_question_strict=str(record["background_question_strict"]),
            background_survey=str(record["background_survey"]),
            background_survey_strict=str(record["background_survey_strict"]),
            inspirations=tuple(inspirations),
            hypothesis=str(record["hypothesis"]),
            experiments=str(record["experiments"]),
            reasoning_process=str(record["reasoning_process"]),
            summary_of_inspirations=str(record["summary_of_inspirations"]),
        )
    except ValueError as exc:
        raise BenchmarkError(f"{where}: {exc}") from exc
    _check_strict_fields_clean(entry, where)
    return entry


def _check_strict_fields_clean(entry: BenchmarkEntry, where: str) -> None:
    """Strict background variants must not leak inspiration text.

    Mechanical approximation of the annotation rule: no inspiration title may
    appear verbatim (after normalization) inside a strict field. Very short
    titles are skipped to avoid incidental-word matches.
    """
    strict_fields = {
        "background_question_strict": normalize_title(entry.background_question_strict),
        "background_survey_strict": normalize_title(entry.background_survey_strict),
    }
    for inspiration in entry.inspirations:
        needle = normalize_title(inspiration.title)
        if len(needle) < 10:
            continue
        for name, haystack in strict_fields.items():
            if needle in haystack:
                raise BenchmarkError(
                    f"{where}: {name} contains inspiration title {inspiration.title!r}"
                )


def load_benchmark(path: str | Path) -> list[BenchmarkEntry]:
    """Load a line-delimited benchmark file, validating every entry."""
    path = Path(path)
    entries: list[BenchmarkEntry] = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BenchmarkError(f"{path}:{lineno}: invalid record: {exc.msg}") from exc
            entries.append(_entry_from_record(record, f"{path}:{lineno}"))
    return entries


def hit_ratio(selected: Iterable[str], gt: Iterable[str], normalize: bool = True) -> float:
    """Selected ground-truth papers over all ground-truth papers.

    When ids are titles, comparison goes through title normalization so byte
    drift in model output does not lose hits.
    """
    norm = normalize_title if normalize else lambda x: x
    gt_set = {norm(g) for g in gt}
    if not gt_set:
        raise ValueError("ground-truth set must be non-empty")
    selected_set = {norm(s) for s in selected}
    return len(selected_set & gt_set) / len(gt_set)


@dataclass(frozen=True)
class HitRatioEntry:
    gt_count: int
    selected_gt_count: int
    ratio: float


@dataclass
class HitRatioReport:
    entries: list[HitRatioEntry] = field(default_factory=list)

    @property
    def mean_ratio(self) -> float:
        if not self.entries:
            raise ValueError("hit-ratio report has no entries")
        return sum(e.ratio for e in self.entries) / len(self.entries)

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"gt_count": e.gt_count, "selected_gt_count": e.selected_gt_count, "ratio": e.ratio}
                for e in self.entries
            ],
            "mean_ratio": self.mean_ratio,
        }


def hit_ratio_report(
    runs: Iterable[tuple[Iterable[str], Iterable[str]]],
    normalize: bool = True,
) -> HitRatioReport:
    """Per-entry hit ratios plus the across-entry mean, from (selected, gt)
    pairs."""
    report = HitRatioReport()
    norm = normalize_title if normalize else lambda x: x
    for selected, gt in runs:
        gt_set = {norm(g) for g in gt}
        if not gt_set:
            raise ValueError("ground-truth set must be non-empty")
        hits = len({norm(s) for s in selected} & gt_set)
        report.entries.append(
            HitRatioEntry(gt_count=len(gt_set), selected_gt_count=hits, ratio=hits / len(gt_set))
        )
    return report


def matched_score(
    gateway: LlmGateway,
    generated: str,
    gt_hypothesis: str,
    key_points: str,
    used_gt_inspiration: bool = True,
) -> MatchedScore:
    """Judge a generated hypothesis against the reference with the fixed
    matched-score rubric; re-samples a few times on unparsable output."""
    for name, value in (
        ("generated", generated),
        ("gt_hypothesis", gt_hypothesis),
        ("key_points", key_points),
    ):
        if not value.strip():
            raise ValueError(f"{name} must be non-empty")
    prompt = render_judge_prompt(generated, gt_hypothesis, key_points)
    last: ResponseParseError | None = None
    for attempt in range(PARSE_ATTEMPTS):
        response = gateway.complete(prompt, attempt=attempt)
        try:
            return MatchedScore(
                value=parse_matched_score(response),
                used_gt_inspiration=used_gt_inspiration,
            )
        except ResponseParseError as exc:
            last = exc
    raise last  # type: ignore[misc]


def aggregate_ms(scores: Sequence[MatchedScore]) -> tuple[int, float]:
    """Top (max) and average matched score for one background's hypotheses.

    Sentinel entries (no ground-truth inspiration used) are excluded; they
    are reported as -1 rows elsewhere, never averaged.
    """
    if not scores:
        raise ValueError("cannot aggregate an empty score list")
    counted = [s.value for s in scores if s.used_gt_inspiration]
    if not counted:
        raise ValueError("no scores with ground-truth inspirations to aggregate")
    return max(counted), sum(counted) / len(counted)


def count_matched_inspirations(hypothesis: Hypothesis, gt_titles: Iterable[str]) -> int:
    """How many of the hypothesis's consumed inspirations are ground truth.

    Lineage entries are compared against the given titles (or ids) after
    title normalization; counting uses recorded lineage, never text matching.
    """
    gt = {normalize_title(t) for t in gt_titles}
    return sum(1 for entry in hypothesis.lineage if normalize_title(entry) in gt)


@dataclass(frozen=True)
class RankRatioBucket:
    key: int
    mean_rank_ratio: float
    size: int


@dataclass
class RankRatioReport:
    buckets: dict[int, RankRatioBucket]
    population: int
    degenerate: bool = False  # population of 1: every ratio is 1.0

    def to_dict(self) -> dict:
        return {
            "population": self.population,
            "degenerate": self.degenerate,
            "buckets": {
                str(key): {"mean_rank_ratio": b.mean_rank_ratio, "size": b.size}
                for key, b in sorted(self.buckets.items(), reverse=True)
            },
        }


def rank_ratio(rank_position: int, population: int, zero_based: bool = False) -> float:
    """rank / population by default (1-based); optionally (rank-1)/(n-1)."""
    if population < 1:
        raise ValueError("population must be >= 1")
    if not 1 <= rank_position <= population:
        raise ValueError(f"rank {rank_position} outside [1, {population}]")
    if zero_based:
        if population == 1:
            return 0.0
        return (rank_position - 1) / (population - 1)
    return rank_position / population


def bucket_rank_ratios(
    pairs: Iterable[tuple[int, int]],
    population: int,
    zero_based: bool = False,
) -> RankRatioReport:
    """Mean rank ratio per bucket from (rank, bucket-key) pairs."""
    sums: dict[int, float] = {}
    sizes: dict[int, int] = {}
    total = 0
    for rank_position, key in pairs:
        key = int(key)
        sums[key] = sums.get(key, 0.0) + rank_ratio(rank_position, population, zero_based)
        sizes[key] = sizes.get(key, 0) + 1
        total += 1
    if total != population:
        raise ValueError(f"{total} annotated ranks do not cover population {population}")
    buckets = {
        key: RankRatioBucket(key=key, mean_rank_ratio=sums[key] / sizes[key], size=sizes[key])
        for key in sums
    }
    return RankRatioReport(buckets=buckets, population=population, degenerate=population == 1)


def rank_ratio_report(
    ranked: RankedList,
    annotations: Mapping[str, int],
    zero_based: bool = False,
) -> RankRatioReport:
    """Bucket rank ratios by an integer annotation (matched-inspiration count
    or matched score; -1 is a legal sentinel bucket). Every ranked hypothesis
    must be annotated."""
    pairs = []
    for entry in ranked.entries:
        hid = entry.hypothesis.id
        if hid not in annotations:
            raise ValueError(f"missing annotation for hypothesis {hid!r}")
        pairs.append((entry.rank, int(annotations[hid])))
    return bucket_rank_ratios(pairs, len(ranked), zero_based)
