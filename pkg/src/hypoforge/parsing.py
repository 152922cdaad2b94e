"""Parsers turning free-text model output into typed results.

Label-keyed and tolerant of surrounding prose, strict on values: a score that
is missing, non-integer, or out of range is an error, never clamped.
"""

from __future__ import annotations

import re
from typing import Sequence

from .corpus import Window
from .domain import AspectScores, InspirationCandidate, normalize_title

ASPECTS = ("validness", "novelty", "significance", "potential")
CRITIQUE_ASPECTS = ("validness", "novelty", "clarity", "significance")


class ResponseParseError(ValueError):
    """Model output did not contain the required structure."""


_TITLE_LINE_RE = re.compile(
    r"(?i)\btitle\s*:\s*(?P<title>.+?)(?:\s*\|\s*reason\s*:\s*(?P<reason>.*))?$"
)
_LIST_MARKER_RE = re.compile(r"^\s*(?:\d+[.)]\s*|[-*•]\s*)")


def parse_selected_titles(
    response: str,
    window: Window,
    keep_count: int,
) -> tuple[list[tuple[InspirationCandidate, str]], list[str]]:
    """Resolve titles named in ``response`` against the window's papers.

    Returns at most ``keep_count`` (candidate, reason) pairs in response
    order, plus warnings for titles that resolve to nothing. Matching uses
    normalized-title equality, so casing and outer punctuation drift are
    tolerated. Zero resolvable titles is a warning, not an error.
    """
    if keep_count < 1:
        raise ValueError("keep_count must be >= 1")
    lookup = {normalize_title(p.title): p for p in window.papers}

    labelled: list[tuple[str, str]] = []
    marked: list[tuple[str, str]] = []
    bare: list[tuple[str, str]] = []
    for line in response.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        match = _TITLE_LINE_RE.search(stripped)
        if match:
            labelled.append((match.group("title").strip(), (match.group("reason") or "").strip()))
            continue
        without_marker = _LIST_MARKER_RE.sub("", stripped)
        if without_marker != stripped:
            marked.append((without_marker.strip(), ""))
        else:
            bare.append((stripped, ""))

    candidates = labelled or marked or bare
    selections: list[tuple[InspirationCandidate, str]] = []
    warnings: list[str] = []
    chosen: set[str] = set()
    for raw_title, reason in candidates:
        if len(selections) >= keep_count:
            break
        resolved = lookup.get(normalize_title(raw_title))
        if resolved is None:
            warnings.append(f"unresolved title in response: {raw_title!r}")
            continue
        if resolved.id in chosen:
            warnings.append(f"duplicate selection ignored: {resolved.title!r}")
            continue
        chosen.add(resolved.id)
        selections.append((resolved, reason))
    if not selections:
        warnings.append("no selectable titles parsed from response")
    return selections, warnings


def _aspect_value(response: str, label: str) -> int:
    pattern = re.compile(
        rf"(?im)^[^\w]*(?:aspect\s*\d+\s*[:.]?\s*)?{label}\b[^:\n]*:\s*\**\s*(?P<value>-?[\d.]+)"
    )
    matches = list(pattern.finditer(response))
    if not matches:
        raise ResponseParseError(f"missing aspect {label!r} in response")
    token = matches[-1].group("value")
    if "." in token:
        raise ResponseParseError(f"aspect {label!r} must be an integer, got {token!r}")
    value = int(token)
    if not 1 <= value <= 5:
        raise ResponseParseError(f"aspect {label!r} out of range [1, 5]: {value}")
    return value


def parse_aspect_scores(response: str) -> AspectScores:
    """Extract the four labelled aspect integers, in any order."""
    values = {label: _aspect_value(response, label) for label in ASPECTS}
    return AspectScores(
        validness=values["validness"],
        novelty=values["novelty"],
        significance=values["significance"],
        potential=values["potential"],
    )


def render_aspect_scores(scores: AspectScores) -> str:
    """Canonical labelled form; parse_aspect_scores inverts this exactly."""
    return (
        f"Validness: {scores.validness}\n"
        f"Novelty: {scores.novelty}\n"
        f"Significance: {scores.significance}\n"
        f"Potential: {scores.potential}"
    )


_SCORE_RE = re.compile(r"(?i)\bmatched\s*score\b[^-\d]{0,20}(-?\d+)|\bscore\b[^-\d]{0,20}(-?\d+)")


def parse_matched_score(response: str) -> int:
    """Extract the judge's 0-5 matched score; the last stated score wins."""
    matches = list(_SCORE_RE.finditer(response))
    if matches:
        groups = matches[-1].groups()
        value = int(next(g for g in groups if g is not None))
    else:
        stripped = response.strip()
        if re.fullmatch(r"-?\d+", stripped):
            value = int(stripped)
        else:
            raise ResponseParseError("no matched score found in response")
    if not 0 <= value <= 5:
        raise ResponseParseError(f"matched score out of range [0, 5]: {value}")
    return value


_HYPOTHESIS_RE = re.compile(r"(?im)^\s*(?:refined |revised |final |merged |new )?hypothesis\s*:\s*")


def parse_hypothesis_text(response: str) -> str:
    """Extract hypothesis prose: everything after the last 'Hypothesis:' label,
    or the whole response when no label is present."""
    matches = list(_HYPOTHESIS_RE.finditer(response))
    text = response[matches[-1].end():] if matches else response
    text = text.strip()
    if not text:
        raise ResponseParseError("empty hypothesis text in response")
    return text


def parse_critique(response: str, aspects: Sequence[str]) -> dict[str, str]:
    """Split labelled per-aspect commentary out of the response.

    Every requested aspect gets a commentary: aspects the model did not label
    fall back to the full response text. Labels outside ``aspects`` are
    ignored.
    """
    label_re = re.compile(
        rf"(?im)^\s*\**({'|'.join(re.escape(a) for a in aspects)})\**\s*:\s*", re.IGNORECASE
    )
    found: dict[str, str] = {}
    matches = list(label_re.finditer(response))
    for i, match in enumerate(matches):
        start = match.end()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(response)
        found[match.group(1).lower()] = response[start:end].strip()
    fallback = response.strip()
    return {aspect: found.get(aspect, fallback) for aspect in aspects}
