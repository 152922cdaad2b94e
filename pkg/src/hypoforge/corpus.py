"""Literature corpora: loading, evaluation-corpus construction, and windowing."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .domain import InspirationCandidate


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid corpus construction."""


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of candidate papers. Order matters: screening
    windows are positional slices."""

    entries: tuple[InspirationCandidate, ...]
    seed: int | None = None

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for entry in self.entries:
            if entry.id in seen:
                raise CorpusError(f"duplicate candidate id {entry.id!r} in corpus")
            seen.add(entry.id)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def without_ids(self, excluded: Iterable[str]) -> "Corpus":
        """Corpus minus the given ids, original order preserved."""
        drop = set(excluded)
        return Corpus(tuple(e for e in self.entries if e.id not in drop), seed=self.seed)


@dataclass(frozen=True)
class Window:
    """One contiguous screening slice of a corpus."""

    index: int
    papers: tuple[InspirationCandidate, ...]

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("window index must be >= 0")
        if not self.papers:
            raise ValueError("window must be non-empty")

    def __len__(self) -> int:
        return len(self.papers)


def _candidate_from_record(record: dict, where: str) -> InspirationCandidate:
    for field in ("id", "title"):
        if field not in record:
            raise CorpusError(f"{where}: missing field {field!r}")
    return InspirationCandidate(
        id=str(record["id"]),
        title=str(record["title"]),
        abstract=str(record.get("abstract", "")),
    )


def load_corpus(path: str | Path) -> Corpus:
    """Load a line-delimited corpus file ({id, title, abstract} per line).

    Unknown fields are ignored. Raises CorpusError with the offending line
    number on parse failures and names the id on duplicates.
    """
    path = Path(path)
    entries: list[InspirationCandidate] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid record: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: record must be an object")
            try:
                candidate = _candidate_from_record(record, f"{path}:{lineno}")
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            if candidate.id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate candidate id {candidate.id!r}")
            seen.add(candidate.id)
            entries.append(candidate)
    return Corpus(tuple(entries))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for entry in corpus.entries:
            handle.write(
                json.dumps(
                    {"id": entry.id, "title": entry.title, "abstract": entry.abstract},
                    ensure_ascii=False,
                )
                + "\n"
            )


def build_eval_corpus(
    gt: Sequence[InspirationCandidate],
    distractors: Sequence[InspirationCandidate],
    target_size: int,
    seed: int,
) -> Corpus:
    """Build a shuffled evaluation corpus: all ground-truth papers plus
    enough seeded-random distractors to reach ``target_size``.

    Deterministic for fixed inputs and seed; the seed is recorded on the
    returned corpus.
    """
    if target_size < len(gt):
        raise CorpusError(
            f"target size {target_size} is smaller than the {len(gt)} ground-truth papers"
        )
    gt_ids = {c.id for c in gt}
    if len(gt_ids) != len(gt):
        raise CorpusError("ground-truth papers contain duplicate ids")
    overlap = gt_ids.intersection(c.id for c in distractors)
    if overlap:
        raise CorpusError(f"ground-truth and distractor ids overlap: {sorted(overlap)}")
    needed = target_size - len(gt)
    if needed > len(distractors):
        raise CorpusError(
            f"need {needed} distractors to reach size {target_size}, only {len(distractors)} available"
        )
    rng = random.Random(seed)
    sampled = rng.sample(list(distractors), needed)
    combined = list(gt) + sampled
    rng.shuffle(combined)
    return Corpus(tuple(combined), seed=seed)


def write_eval_corpus(
    corpus: Corpus,
    gt_ids: Sequence[str],
    target_size: int,
    path: str | Path,
) -> Path:
    """Persist an evaluation corpus plus its sidecar metadata record.

    The sidecar ``<path>.meta.json`` captures {seed, gt_ids, target_size}
    so a run can be reproduced from files alone.
    """
    path = Path(path)
    save_corpus(corpus, path)
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(
        json.dumps(
            {"seed": corpus.seed, "gt_ids": list(gt_ids), "target_size": target_size},
            ensure_ascii=False,
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return sidecar


def partition_windows(corpus: Corpus, window_size: int) -> list[Window]:
    """Cut the corpus into contiguous positional windows. All windows except
    possibly the last are exactly ``window_size`` long; nothing is padded."""
    if window_size < 1:
        raise ValueError(f"window size must be >= 1, got {window_size}")
    windows: list[Window] = []
    for index, start in enumerate(range(0, len(corpus.entries), window_size)):
        windows.append(Window(index=index, papers=corpus.entries[start : start + window_size]))
    return windows


def gt_window_collisions(corpus: Corpus, gt_ids: Iterable[str], window_size: int) -> list[int]:
    """Indexes of windows holding more than one ground-truth paper.

    Shuffling can co-locate ground-truth papers inside one window, which caps
    how many of them a single screening call can keep; reports surface this
    rather than the builder preventing it.
    """
    gt = set(gt_ids)
    collisions: list[int] = []
    for window in partition_windows(corpus, window_size):
        if sum(1 for p in window.papers if p.id in gt) > 1:
            collisions.append(window.index)
    return collisions
