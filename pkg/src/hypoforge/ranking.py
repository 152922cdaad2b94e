"""Four-aspect rating, deterministic ranking, and beam selection."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .domain import AspectScores, Hypothesis
from .gateway import LlmGateway
from .parsing import ResponseParseError, parse_aspect_scores
from .prompts import render_review_prompt

PARSE_ATTEMPTS = 3


@dataclass(frozen=True)
class RankedEntry:
    hypothesis: Hypothesis
    scores: AspectScores
    rank: int  # 1-based

    def to_dict(self) -> dict:
        record = self.hypothesis.to_dict()
        record.pop("scores", None)
        record.update(self.scores.to_dict())
        record["rank"] = self.rank
        record["average"] = self.scores.average
        return record


@dataclass(frozen=True)
class RankedList:
    entries: tuple[RankedEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def hypotheses(self) -> list[Hypothesis]:
        return [entry.hypothesis for entry in self.entries]

    def to_records(self) -> list[dict]:
        return [entry.to_dict() for entry in self.entries]


def rate(gateway: LlmGateway, hypothesis: Hypothesis) -> AspectScores:
    """Score one hypothesis with the fixed reviewer rubric.

    Works on any non-empty text, generated or ground truth. Unparsable
    responses are re-sampled a few times before giving up.
    """
    if not hypothesis.text.strip():
        raise ValueError("cannot rate an empty hypothesis")
    prompt = render_review_prompt(hypothesis.text)
    last: ResponseParseError | None = None
    for attempt in range(PARSE_ATTEMPTS):
        response = gateway.complete(prompt, attempt=attempt)
        try:
            return parse_aspect_scores(response)
        except ResponseParseError as exc:
            last = exc
    raise last  # type: ignore[misc]


def rate_text(gateway: LlmGateway, text: str, hypothesis_id: str = "adhoc") -> AspectScores:
    """Rate arbitrary prose, e.g. a ground-truth hypothesis mixed into a pool."""
    return rate(gateway, Hypothesis(id=hypothesis_id, text=text, round=1, lineage=("adhoc",)))


def rate_many(
    gateway: LlmGateway,
    hypotheses: list[Hypothesis],
    max_workers: int = 1,
) -> list[AspectScores]:
    """Rate a batch; results keep input order regardless of execution order."""
    if max_workers > 1 and len(hypotheses) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda h: rate(gateway, h), hypotheses))
    return [rate(gateway, h) for h in hypotheses]


def _sort_key(pair: tuple[Hypothesis, AspectScores]):
    hypothesis, scores = pair
    # ties: higher validness first, then hypothesis id for full determinism
    return (-scores.average, -scores.validness, hypothesis.id)


def rank(pairs: list[tuple[Hypothesis, AspectScores]]) -> RankedList:
    """Sort by average aspect score, descending; input order never matters."""
    ordered = sorted(pairs, key=_sort_key)
    return RankedList(
        tuple(
            RankedEntry(hypothesis=h, scores=s, rank=i)
            for i, (h, s) in enumerate(ordered, start=1)
        )
    )


def beam_select(ranked: RankedList, beam: int) -> list[Hypothesis]:
    """Keep the top min(beam, n) hypotheses."""
    if beam < 1:
        raise ValueError("beam must be >= 1")
    return [entry.hypothesis for entry in ranked.entries[:beam]]
