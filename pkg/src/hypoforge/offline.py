"""Deterministic, network-free provider that answers every pipeline prompt.

It recognises each prompt kind by its template markers and fabricates
well-formed responses whose content depends only on the prompt text, so full
runs are reproducible bit-for-bit. Used by tests, demos, and the ``offline``
provider type in the CLI.
"""

from __future__ import annotations

import hashlib
import re
from typing import Iterable

from .domain import normalize_title
from .gateway import DecodingParams, ProviderError

_CANDIDATE_RE = re.compile(r"(?m)^\s*\d+\.\s*Title:\s*(.+)$")
_KEEP_RE = re.compile(r"Pick the (\d+) candidates")
_QUESTION_RE = re.compile(r"(?m)^Research question:\s*(.+)$")
_INSPIRATION_RE = re.compile(r"Inspiration paper:\nTitle:\s*(.+)")
_DRAFT_RE = re.compile(r"(?m)^- (.+)$")
_ASPECT_LIST_RE = re.compile(r"(?m)^Aspects:\s*(.+)$")
_CRITIQUE_DRAFT_RE = re.compile(r"(?m)^Draft hypothesis:\s*(.+)$")


def _digest(text: str) -> bytes:
    return hashlib.sha256(text.encode("utf-8")).digest()


def _short(text: str) -> str:
    return _digest(text).hex()[:6]


class OfflineProvider:
    """Rule-based stand-in for a live model.

    ``prefer_titles`` biases screening selections towards the given titles
    (matched after normalization), which makes planted ground-truth papers
    retrievable in simulations. ``seed_salt`` perturbs all fabricated text,
    giving cheaply distinguishable "models".
    """

    def __init__(
        self,
        prefer_titles: Iterable[str] | None = None,
        seed_salt: str = "",
        fixed_scores: tuple[int, int, int, int] | None = None,
        fixed_matched_score: int | None = None,
    ):
        self.prefer = {normalize_title(t) for t in prefer_titles} if prefer_titles else set()
        self.seed_salt = seed_salt
        self.fixed_scores = fixed_scores
        self.fixed_matched_score = fixed_matched_score
        self.name = "offline" + (f"+{seed_salt}" if seed_salt else "")

    # one completion entry point, dispatched on template markers
    def complete(self, prompt: str, params: DecodingParams) -> str:
        if "diligent and harsh reviewer" in prompt:
            return self._review(prompt)
        if "6-point Likert scale (from 5 to 0)" in prompt:
            return self._judge(prompt)
        if "screen a batch of papers" in prompt:
            return self._screen(prompt)
        if "Give focused feedback on each aspect" in prompt:
            return self._critique(prompt)
        if "merging several candidate research hypotheses" in prompt:
            return self._recombine(prompt)
        if "revising a draft research hypothesis" in prompt:
            return self._refine(prompt)
        if "none of the earlier drafts uses" in prompt:
            return self._mutate(prompt)
        if "Write one concrete, testable research hypothesis" in prompt:
            return self._compose(prompt)
        raise ValueError(f"offline provider cannot classify prompt: {prompt[:80]!r}")

    def _salted(self, prompt: str) -> str:
        return self.seed_salt + prompt

    def _screen(self, prompt: str) -> str:
        titles = _CANDIDATE_RE.findall(prompt)
        keep_match = _KEEP_RE.search(prompt)
        keep = int(keep_match.group(1)) if keep_match else 3
        preferred = [t for t in titles if normalize_title(t) in self.prefer]
        rest = [t for t in titles if normalize_title(t) not in self.prefer]
        picks = (preferred + rest)[:keep]
        lines = [
            f"Title: {title} | Reason: could recombine with the question in an unexplored way."
            for title in picks
        ]
        return "\n".join(lines)

    def _question(self, prompt: str) -> str:
        match = _QUESTION_RE.search(prompt)
        return match.group(1).strip() if match else "the stated question"

    def _inspiration(self, prompt: str) -> str:
        match = _INSPIRATION_RE.search(prompt)
        return match.group(1).strip() if match else "the inspiration"

    def _compose(self, prompt: str) -> str:
        tag = _short(self._salted(prompt))
        return (
            f"Hypothesis: Adapting the approach of '{self._inspiration(prompt)}' could resolve "
            f"{self._question(prompt)} (draft {tag})."
        )

    def _mutate(self, prompt: str) -> str:
        tag = _short(self._salted(prompt))
        n_prior = sum(1 for d in _DRAFT_RE.findall(prompt) if d != "(none yet)")
        return (
            f"Hypothesis: A distinct route {n_prior + 1}: combine '{self._inspiration(prompt)}' "
            f"with {self._question(prompt)} via mechanism {tag}."
        )

    def _critique(self, prompt: str) -> str:
        match = _ASPECT_LIST_RE.search(prompt)
        aspects = [a.strip() for a in match.group(1).split(",")] if match else []
        tag = _short(self._salted(prompt))
        return "\n".join(
            f"{aspect.capitalize()}: the draft could be sharper here ({tag})." for aspect in aspects
        )

    def _refine(self, prompt: str) -> str:
        match = _CRITIQUE_DRAFT_RE.search(prompt)
        draft = match.group(1).strip() if match else "the draft"
        tag = _short(self._salted(prompt))
        return f"Hypothesis: {draft} Strengthened per feedback ({tag})."

    def _recombine(self, prompt: str) -> str:
        tag = _short(self._salted(prompt))
        n = len(re.findall(r"(?m)^\d+\. ", prompt))
        return (
            f"Hypothesis: A synthesis of {n} candidate routes for {self._question(prompt)}, "
            f"keeping the strongest elements of each (merge {tag})."
        )

    def _review(self, prompt: str) -> str:
        if self.fixed_scores is not None:
            v, n, s, p = self.fixed_scores
        else:
            raw = _digest(self._salted(prompt))
            v, n, s, p = (1 + raw[i] % 5 for i in range(4))
        return (
            f"Validness: {v}\nNovelty: {n}\nSignificance: {s}\nPotential: {p}\n"
            "Overall the hypothesis was weighed against each rubric."
        )

    def _judge(self, prompt: str) -> str:
        if self.fixed_matched_score is not None:
            value = self.fixed_matched_score
        else:
            value = _digest(self._salted(prompt))[0] % 6
        return f"After comparing key points, the matched score: {value}"


class FlakyProvider:
    """Wraps a provider, failing the first ``failures`` calls per prompt.

    Fault-injection helper for exercising retry behaviour.
    """

    def __init__(self, inner, failures: int = 2):
        self._inner = inner
        self._failures = failures
        self._seen: dict[str, int] = {}
        self.name = f"flaky({inner.name})"

    def complete(self, prompt: str, params: DecodingParams) -> str:
        count = self._seen.get(prompt, 0)
        self._seen[prompt] = count + 1
        if count < self._failures:
            raise ProviderError(f"injected failure {count + 1}")
        return self._inner.complete(prompt, params)
