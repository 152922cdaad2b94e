"""Windowed inspiration screening: show the model one corpus slice at a time,
keep a few candidates per slice, optionally repeat in passes so the retained
fraction shrinks geometrically (15-wide windows keeping 3 leave 20% per pass).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .corpus import Corpus, Window, partition_windows
from .domain import Hypothesis, InspirationCandidate, ResearchBackground
from .gateway import LlmGateway, ProviderError
from .parsing import ResponseParseError, parse_selected_titles
from .prompts import render_screen_prompt

logger = logging.getLogger(__name__)

Selection = tuple[InspirationCandidate, str]


@dataclass(frozen=True)
class ScreeningConfig:
    window_size: int = 15
    keep_per_window: int = 3
    passes: int = 1

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if not 1 <= self.keep_per_window <= self.window_size:
            raise ValueError("keep_per_window must be in [1, window_size]")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")

    def to_dict(self) -> dict:
        return {
            "window_size": self.window_size,
            "keep_per_window": self.keep_per_window,
            "passes": self.passes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScreeningConfig":
        return cls(
            window_size=int(data.get("window_size", 15)),
            keep_per_window=int(data.get("keep_per_window", 3)),
            passes=int(data.get("passes", 1)),
        )


@dataclass
class ScreeningResult:
    selected: list[Selection] = field(default_factory=list)
    per_pass_counts: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    calls_made: int = 0
    provider_failures: int = 0

    @property
    def selected_ids(self) -> list[str]:
        return [candidate.id for candidate, _ in self.selected]


def retention_bound(n: int, cfg: ScreeningConfig, passes: int | None = None) -> int:
    """Upper bound on survivors: keep_per_window per window, applied per pass."""
    passes = cfg.passes if passes is None else passes
    remaining = n
    for _ in range(passes):
        if remaining == 0:
            break
        full, ragged = divmod(remaining, cfg.window_size)
        bound = full * cfg.keep_per_window + min(cfg.keep_per_window, ragged)
        remaining = min(remaining, bound)
    return remaining


def screen_window(
    gateway: LlmGateway,
    background: ResearchBackground,
    prev: Hypothesis,
    window: Window,
    cfg: ScreeningConfig,
) -> tuple[list[Selection], list[str]]:
    """Ask the model to keep up to keep_per_window papers from one window."""
    prompt = render_screen_prompt(background, prev, window.papers, cfg.keep_per_window)
    response = gateway.complete(prompt)
    try:
        return parse_selected_titles(response, window, cfg.keep_per_window)
    except ResponseParseError as exc:
        return [], [f"window {window.index}: {exc}"]


def screen_pass(
    gateway: LlmGateway,
    background: ResearchBackground,
    prev: Hypothesis,
    corpus: Corpus,
    cfg: ScreeningConfig,
    max_workers: int = 1,
    max_calls: int | None = None,
) -> ScreeningResult:
    """One sweep over the corpus. Windows are screened independently (possibly
    concurrently) and merged in window-index order, so execution order never
    changes the result. Window failures are retained as warnings, not raised.
    """
    result = ScreeningResult()
    if len(corpus) == 0:
        result.per_pass_counts.append(0)
        return result
    windows = partition_windows(corpus, cfg.window_size)
    if max_calls is not None and max_calls < len(windows):
        skipped = len(windows) - max(max_calls, 0)
        windows = windows[: max(max_calls, 0)]
        result.warnings.append(
            f"screening budget exhausted: {skipped} window(s) left unscreened"
        )

    def one(window: Window) -> tuple[list[Selection], list[str], bool]:
        try:
            selections, warnings = screen_window(gateway, background, prev, window, cfg)
            return selections, warnings, False
        except ProviderError as exc:
            logger.warning("window %d screening failed: %s", window.index, exc)
            return [], [f"window {window.index}: provider error: {exc}"], True

    if max_workers > 1 and len(windows) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(one, windows))
    else:
        outcomes = [one(w) for w in windows]

    for selections, warnings, failed in outcomes:
        result.selected.extend(selections)
        result.warnings.extend(warnings)
        result.provider_failures += int(failed)
    result.calls_made = len(windows)
    result.per_pass_counts.append(len(result.selected))
    return result


def screen_multi_pass(
    gateway: LlmGateway,
    background: ResearchBackground,
    prev: Hypothesis,
    corpus: Corpus,
    cfg: ScreeningConfig,
    max_workers: int = 1,
    max_calls: int | None = None,
) -> ScreeningResult:
    """Repeated screening: each pass re-windows the previous pass's survivors
    in their retained order. Papers already consumed by ``prev``'s lineage are
    excluded up front, so no selection can repeat an inspiration.
    """
    remaining = corpus.without_ids(prev.lineage)
    combined = ScreeningResult()
    reasons: dict[str, str] = {}
    calls_left = max_calls
    for _ in range(cfg.passes):
        outcome = screen_pass(
            gateway, background, prev, remaining, cfg,
            max_workers=max_workers, max_calls=calls_left,
        )
        combined.warnings.extend(outcome.warnings)
        combined.per_pass_counts.append(len(outcome.selected))
        combined.calls_made += outcome.calls_made
        combined.provider_failures += outcome.provider_failures
        if calls_left is not None:
            calls_left = max(calls_left - outcome.calls_made, 0)
        for candidate, reason in outcome.selected:
            reasons[candidate.id] = reason
        remaining = Corpus(tuple(c for c, _ in outcome.selected), seed=corpus.seed)
        if len(remaining) == 0:
            break
    combined.selected = [(candidate, reasons[candidate.id]) for candidate in remaining]
    return combined
