"""Shared vocabulary: value types for backgrounds, papers, hypotheses, and scores.

Everything here is an immutable value object, safe to share across threads.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, replace

BRANCH_DIRECT = "direct"
BRANCH_MUTATION = "mutation"
BRANCH_RECOMBINATION = "recombination"
BRANCHES = (BRANCH_DIRECT, BRANCH_MUTATION, BRANCH_RECOMBINATION)

SEED_ID = "h0"

_WS_RE = re.compile(r"\s+")


def normalize_title(raw: str) -> str:
    """Normalize a paper title for matching: casefold, collapse whitespace,
    strip surrounding punctuation. Interior punctuation is preserved.

    Idempotent and total; empty input yields empty output.
    """
    text = unicodedata.normalize("NFC", raw)
    text = _WS_RE.sub(" ", text).strip()
    text = text.casefold()
    # strip punctuation only at the outer edges, never inside
    text = text.strip(" \t\"'`.,;:!?()[]{}<>*_-–—|/\\")
    return _WS_RE.sub(" ", text).strip()


def titles_match(a: str, b: str) -> bool:
    return normalize_title(a) == normalize_title(b)


@dataclass(frozen=True)
class AspectScores:
    """Four 1-5 integer review aspects for one hypothesis."""

    validness: int
    novelty: int
    significance: int
    potential: int

    def __post_init__(self) -> None:
        for name in ("validness", "novelty", "significance", "potential"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if not 1 <= value <= 5:
                raise ValueError(f"{name} must be in [1, 5], got {value}")

    @property
    def average(self) -> float:
        # quarters are exact in binary floating point, so no rounding happens
        return (self.validness + self.novelty + self.significance + self.potential) / 4

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.validness, self.novelty, self.significance, self.potential)

    def to_dict(self) -> dict:
        return {
            "validness": self.validness,
            "novelty": self.novelty,
            "significance": self.significance,
            "potential": self.potential,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AspectScores":
        return cls(
            validness=data["validness"],
            novelty=data["novelty"],
            significance=data["significance"],
            potential=data["potential"],
        )


@dataclass(frozen=True)
class MatchedScore:
    """0-5 similarity judgement against a ground-truth hypothesis.

    ``used_gt_inspiration`` is a reporting sentinel: hypotheses that never
    consumed a ground-truth inspiration keep their judged value but are
    displayed as -1 and excluded from aggregation.
    """

    value: int
    used_gt_inspiration: bool = True

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            raise ValueError(f"matched score must be an integer, got {self.value!r}")
        if not 0 <= self.value <= 5:
            raise ValueError(f"matched score must be in [0, 5], got {self.value}")

    @property
    def display(self) -> int:
        return self.value if self.used_gt_inspiration else -1


@dataclass(frozen=True)
class InspirationCandidate:
    """One literature item: a stable id plus title and abstract."""

    id: str
    title: str
    abstract: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("inspiration candidate id must be non-empty")
        if not self.title.strip():
            raise ValueError(f"inspiration candidate {self.id!r} has an empty title")


@dataclass(frozen=True)
class ResearchBackground:
    """The user-facing research background: a question, an optional survey,
    and optional strict variants that deliberately withhold hints.

    ``use_strict`` selects the strict variants when present; ``use_survey``
    controls whether any survey text is exposed at all.
    """

    question: str
    survey: str | None = None
    question_strict: str | None = None
    survey_strict: str | None = None
    use_strict: bool = False
    use_survey: bool = False

    def __post_init__(self) -> None:
        if not self.question.strip():
            raise ValueError("background question must be non-empty")
        if self.use_survey and not (self.selected_survey() or "").strip():
            raise ValueError("use_survey is set but the selected survey variant is empty")

    def selected_question(self) -> str:
        if self.use_strict and self.question_strict:
            return self.question_strict
        return self.question

    def selected_survey(self) -> str | None:
        if not self.use_survey:
            return None
        if self.use_strict and self.survey_strict:
            return self.survey_strict
        return self.survey

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "survey": self.survey,
            "question_strict": self.question_strict,
            "survey_strict": self.survey_strict,
            "use_strict": self.use_strict,
            "use_survey": self.use_survey,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResearchBackground":
        return cls(
            question=data["question"],
            survey=data.get("survey"),
            question_strict=data.get("question_strict"),
            survey_strict=data.get("survey_strict"),
            use_strict=bool(data.get("use_strict", False)),
            use_survey=bool(data.get("use_survey", "survey" in data and bool(data.get("survey")))),
        )


@dataclass(frozen=True)
class Hypothesis:
    """A generated hypothesis, carrying the inspirations it consumed.

    ``round`` counts how many inspirations went in; ``lineage`` lists their
    ids in consumption order. Round 0 exists only as the empty seed.
    """

    id: str
    text: str
    round: int
    lineage: tuple[str, ...] = ()
    branch: str = BRANCH_DIRECT
    parent_id: str | None = None
    scores: AspectScores | None = None

    def __post_init__(self) -> None:
        if self.round < 0:
            raise ValueError("round must be >= 0")
        if self.branch not in BRANCHES:
            raise ValueError(f"unknown branch {self.branch!r}")
        if len(self.lineage) != self.round:
            raise ValueError(
                f"hypothesis {self.id}: lineage length {len(self.lineage)} != round {self.round}"
            )
        if len(set(self.lineage)) != len(self.lineage):
            raise ValueError(f"hypothesis {self.id}: lineage contains duplicate ids")
        if self.round == 0:
            if self.text:
                raise ValueError("round-0 hypothesis must be the empty seed")
        elif not self.text.strip():
            raise ValueError(f"hypothesis {self.id}: text must be non-empty")

    @classmethod
    def seed(cls) -> "Hypothesis":
        """The empty starting point every run grows from."""
        return cls(id=SEED_ID, text="", round=0)

    @property
    def is_seed(self) -> bool:
        return self.round == 0

    def with_scores(self, scores: AspectScores) -> "Hypothesis":
        return replace(self, scores=scores)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "round": self.round,
            "lineage": list(self.lineage),
            "branch": self.branch,
            "parent_id": self.parent_id,
            "scores": self.scores.to_dict() if self.scores else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Hypothesis":
        scores = data.get("scores")
        return cls(
            id=data["id"],
            text=data.get("text", ""),
            round=data["round"],
            lineage=tuple(data.get("lineage", ())),
            branch=data.get("branch", BRANCH_DIRECT),
            parent_id=data.get("parent_id"),
            scores=AspectScores.from_dict(scores) if scores else None,
        )


@dataclass(frozen=True)
class GroundTruthInspiration:
    title: str
    reason: str = ""

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValueError("inspiration title must be non-empty")


@dataclass(frozen=True)
class BenchmarkEntry:
    """One annotated benchmark record: background variants, one to three
    ground-truth inspirations, and the reference hypothesis with its
    supporting prose fields."""

    background_question: str
    background_question_strict: str
    background_survey: str
    background_survey_strict: str
    inspirations: tuple[GroundTruthInspiration, ...]
    hypothesis: str
    experiments: str
    reasoning_process: str
    summary_of_inspirations: str

    def __post_init__(self) -> None:
        mandatory = {
            "background_question": self.background_question,
            "background_question_strict": self.background_question_strict,
            "background_survey": self.background_survey,
            "background_survey_strict": self.background_survey_strict,
            "hypothesis": self.hypothesis,
            "experiments": self.experiments,
            "reasoning_process": self.reasoning_process,
            "summary_of_inspirations": self.summary_of_inspirations,
        }
        for name, value in mandatory.items():
            if not value.strip():
                raise ValueError(f"benchmark entry field {name!r} must be non-empty")
        if not 1 <= len(self.inspirations) <= 3:
            raise ValueError(
                f"benchmark entry must carry 1 to 3 inspirations, got {len(self.inspirations)}"
            )

    def background(self, use_strict: bool = True, use_survey: bool = True) -> ResearchBackground:
        return ResearchBackground(
            question=self.background_question,
            survey=self.background_survey,
            question_strict=self.background_question_strict,
            survey_strict=self.background_survey_strict,
            use_strict=use_strict,
            use_survey=use_survey,
        )

    def gt_titles(self) -> set[str]:
        return {normalize_title(i.title) for i in self.inspirations}


def average_score(scores: AspectScores) -> float:
    """Arithmetic mean of the four aspects, exact (multiples of 0.25)."""
    return scores.average
