"""Hypothesis composition for one (parent, inspiration) pair.

Two routes: a single-shot direct draft, and the evolutionary unit, which
generates several distinct "mutation" drafts, critiques and refines each one
(the refined child replaces its parent), then recombines the survivors into
one merged hypothesis.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass

from .domain import (
    BRANCH_DIRECT,
    BRANCH_MUTATION,
    BRANCH_RECOMBINATION,
    Hypothesis,
    InspirationCandidate,
    ResearchBackground,
)
from .gateway import LlmGateway, ProviderError
from .parsing import CRITIQUE_ASPECTS, ResponseParseError, parse_critique, parse_hypothesis_text
from .prompts import (
    render_compose_prompt,
    render_critique_prompt,
    render_mutation_prompt,
    render_recombine_prompt,
    render_refine_prompt,
)

logger = logging.getLogger(__name__)

PARSE_ATTEMPTS = 3


@dataclass(frozen=True)
class EvolutionConfig:
    mutation_count: int = 3
    refine_iterations: int = 1
    critique_aspects: tuple[str, ...] = CRITIQUE_ASPECTS
    enable_eu: bool = True
    enable_direct_branch: bool = True

    def __post_init__(self) -> None:
        if self.enable_eu and self.mutation_count < 1:
            raise ValueError("mutation_count must be >= 1 when the evolutionary unit is enabled")
        if self.refine_iterations < 0:
            raise ValueError("refine_iterations must be >= 0")
        if not self.critique_aspects:
            raise ValueError("critique_aspects must be non-empty")
        unknown = set(self.critique_aspects) - set(CRITIQUE_ASPECTS)
        if unknown:
            raise ValueError(f"unknown critique aspects: {sorted(unknown)}")
        if not (self.enable_eu or self.enable_direct_branch):
            raise ValueError("at least one of the direct branch and the EU must be enabled")

    @property
    def outputs_per_pair(self) -> int:
        """Hypotheses per (parent, inspiration) pair when nothing fails."""
        return int(self.enable_direct_branch) + (
            self.mutation_count + 1 if self.enable_eu else 0
        )

    def to_dict(self) -> dict:
        return {
            "mutation_count": self.mutation_count,
            "refine_iterations": self.refine_iterations,
            "critique_aspects": list(self.critique_aspects),
            "enable_eu": self.enable_eu,
            "enable_direct_branch": self.enable_direct_branch,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvolutionConfig":
        return cls(
            mutation_count=int(data.get("mutation_count", 3)),
            refine_iterations=int(data.get("refine_iterations", 1)),
            critique_aspects=tuple(data.get("critique_aspects", CRITIQUE_ASPECTS)),
            enable_eu=bool(data.get("enable_eu", True)),
            enable_direct_branch=bool(data.get("enable_direct_branch", True)),
        )


@dataclass(frozen=True)
class Critique:
    comments: tuple[tuple[str, str], ...]

    def as_dict(self) -> dict[str, str]:
        return dict(self.comments)


def _child_id(*parts: str) -> str:
    return hashlib.sha1("|".join(parts).encode("utf-8")).hexdigest()[:12]


def _completed_text(gateway: LlmGateway, prompt: str) -> str:
    """Complete and parse hypothesis prose, re-sampling on parse failures."""
    last: ResponseParseError | None = None
    for attempt in range(PARSE_ATTEMPTS):
        response = gateway.complete(prompt, attempt=attempt)
        try:
            return parse_hypothesis_text(response)
        except ResponseParseError as exc:
            last = exc
    raise last  # type: ignore[misc]


def _check_new_inspiration(inspiration: InspirationCandidate, prev: Hypothesis) -> None:
    if inspiration.id in prev.lineage:
        raise ValueError(
            f"inspiration {inspiration.id!r} already consumed by hypothesis {prev.id}"
        )


def compose_direct(
    gateway: LlmGateway,
    background: ResearchBackground,
    inspiration: InspirationCandidate,
    prev: Hypothesis,
) -> Hypothesis:
    """Single-shot draft combining the background, the inspiration, and the
    previous hypothesis (when not the seed)."""
    _check_new_inspiration(inspiration, prev)
    text = _completed_text(gateway, render_compose_prompt(background, inspiration, prev))
    return Hypothesis(
        id=_child_id(prev.id, inspiration.id, BRANCH_DIRECT, "0"),
        text=text,
        round=prev.round + 1,
        lineage=prev.lineage + (inspiration.id,),
        branch=BRANCH_DIRECT,
        parent_id=None if prev.is_seed else prev.id,
    )


_DUP_WS_RE = re.compile(r"\s+")


def _text_key(text: str) -> str:
    return _DUP_WS_RE.sub(" ", text).strip().casefold()


def generate_mutations(
    gateway: LlmGateway,
    background: ResearchBackground,
    inspiration: InspirationCandidate,
    prev: Hypothesis,
    cfg: EvolutionConfig,
) -> tuple[list[Hypothesis], list[str]]:
    """Generate mutation drafts one after another; each prompt shows the
    earlier drafts and asks for a different association. Failed drafts are
    dropped with a warning; zero successes is an error.
    """
    _check_new_inspiration(inspiration, prev)
    mutations: list[Hypothesis] = []
    warnings: list[str] = []
    for serial in range(cfg.mutation_count):
        prompt = render_mutation_prompt(
            background, inspiration, prev, [m.text for m in mutations]
        )
        try:
            text = _completed_text(gateway, prompt)
        except (ResponseParseError, ProviderError) as exc:
            warnings.append(f"mutation {serial} failed: {exc}")
            continue
        mutations.append(
            Hypothesis(
                id=_child_id(prev.id, inspiration.id, BRANCH_MUTATION, str(serial)),
                text=text,
                round=prev.round + 1,
                lineage=prev.lineage + (inspiration.id,),
                branch=BRANCH_MUTATION,
                parent_id=None if prev.is_seed else prev.id,
            )
        )
    if not mutations:
        raise ProviderError(f"all {cfg.mutation_count} mutations failed: {warnings}")
    keys = [_text_key(m.text) for m in mutations]
    if len(set(keys)) != len(keys):
        warnings.append("duplicate mutation texts generated")
    return mutations, warnings


def critique(gateway: LlmGateway, hypothesis: Hypothesis, cfg: EvolutionConfig) -> Critique:
    """One call covering every configured aspect."""
    if not hypothesis.text.strip():
        raise ValueError("cannot critique an empty hypothesis")
    response = gateway.complete(render_critique_prompt(hypothesis, cfg.critique_aspects))
    comments = parse_critique(response, cfg.critique_aspects)
    return Critique(comments=tuple((a, comments[a]) for a in cfg.critique_aspects))


def refine(gateway: LlmGateway, hypothesis: Hypothesis, feedback: Critique) -> Hypothesis:
    """Rewrite a hypothesis per critique; the child keeps branch, lineage and
    round, and records its parent."""
    text = _completed_text(gateway, render_refine_prompt(hypothesis, feedback.as_dict()))
    return Hypothesis(
        id=_child_id(hypothesis.id, "refine"),
        text=text,
        round=hypothesis.round,
        lineage=hypothesis.lineage,
        branch=hypothesis.branch,
        parent_id=hypothesis.id,
    )


def _refine_chain(
    gateway: LlmGateway,
    hypothesis: Hypothesis,
    cfg: EvolutionConfig,
) -> tuple[Hypothesis, list[str]]:
    """critique -> refine, ``refine_iterations`` times. The refined child
    replaces its parent each iteration; on failure the latest survivor stays.
    """
    survivor = hypothesis
    warnings: list[str] = []
    for iteration in range(cfg.refine_iterations):
        try:
            feedback = critique(gateway, survivor, cfg)
            survivor = refine(gateway, survivor, feedback)
        except (ResponseParseError, ProviderError) as exc:
            logger.warning("refinement of %s stopped at iteration %d: %s",
                           survivor.id, iteration + 1, exc)
            warnings.append(
                f"refine iteration {iteration + 1} of {survivor.id} failed, keeping parent: {exc}"
            )
            break
    return survivor, warnings


def recombine(
    gateway: LlmGateway,
    background: ResearchBackground,
    inspiration: InspirationCandidate,
    survivors: list[Hypothesis],
) -> Hypothesis:
    """Merge the surviving drafts into one hypothesis on the same lineage."""
    if not survivors:
        raise ValueError("recombination needs at least one survivor")
    rounds = {h.round for h in survivors}
    lineages = {h.lineage for h in survivors}
    if len(rounds) != 1 or len(lineages) != 1:
        raise ValueError("survivors must share one round and one lineage")
    text = _completed_text(gateway, render_recombine_prompt(background, inspiration, survivors))
    first = survivors[0]
    return Hypothesis(
        id=_child_id(*(h.id for h in survivors), BRANCH_RECOMBINATION),
        text=text,
        round=first.round,
        lineage=first.lineage,
        branch=BRANCH_RECOMBINATION,
        parent_id=first.parent_id,
    )


def evolutionary_unit(
    gateway: LlmGateway,
    background: ResearchBackground,
    inspiration: InspirationCandidate,
    prev: Hypothesis,
    cfg: EvolutionConfig,
) -> tuple[list[Hypothesis], list[str]]:
    """All enabled branches for one (parent, inspiration) pair, in stable
    order: direct draft, refined mutations, recombination. Errors only when
    every branch fails."""
    _check_new_inspiration(inspiration, prev)
    outputs: list[Hypothesis] = []
    warnings: list[str] = []

    if cfg.enable_direct_branch:
        try:
            outputs.append(compose_direct(gateway, background, inspiration, prev))
        except (ResponseParseError, ProviderError) as exc:
            warnings.append(f"direct branch failed: {exc}")

    if cfg.enable_eu:
        try:
            mutations, mutation_warnings = generate_mutations(
                gateway, background, inspiration, prev, cfg
            )
            warnings.extend(mutation_warnings)
            survivors: list[Hypothesis] = []
            for mutation in mutations:
                survivor, chain_warnings = _refine_chain(gateway, mutation, cfg)
                warnings.extend(chain_warnings)
                survivors.append(survivor)
            outputs.extend(survivors)
            try:
                outputs.append(recombine(gateway, background, inspiration, survivors))
            except (ResponseParseError, ProviderError) as exc:
                warnings.append(f"recombination failed: {exc}")
        except (ResponseParseError, ProviderError) as exc:
            warnings.append(f"evolutionary unit failed: {exc}")

    if not outputs:
        raise ProviderError(
            f"every branch failed for parent {prev.id} x inspiration {inspiration.id}: {warnings}"
        )
    return outputs, warnings
