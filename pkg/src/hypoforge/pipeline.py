"""End-to-end orchestration: screen -> compose -> rate -> rank -> beam,
repeated for a configured number of rounds, with checkpoint and resume.

Round j grows every surviving hypothesis by one inspiration, so a k-round run
ends with hypotheses carrying exactly k distinct inspirations each.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus
from .domain import AspectScores, Hypothesis, ResearchBackground
from .evolution import EvolutionConfig, evolutionary_unit
from .gateway import DecodingParams, LlmGateway, ProviderError
from .prompts import template_hashes
from .ranking import RankedList, beam_select, rank, rate_many
from .screening import ScreeningConfig, screen_multi_pass

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class PipelineError(RuntimeError):
    """A round could not produce any hypotheses, or state is unusable."""


class ConfigMismatchError(PipelineError):
    """Checkpoint was produced under a different configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    rounds: int = 3
    beam: int = 15
    screening: ScreeningConfig = field(default_factory=ScreeningConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    decoding: DecodingParams = field(default_factory=DecodingParams)
    run_seed: int = 0
    concurrency: int = 1
    max_screen_calls_per_round: int | None = None

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.beam < 1:
            raise ValueError("beam must be >= 1")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "beam": self.beam,
            "screening": self.screening.to_dict(),
            "evolution": self.evolution.to_dict(),
            "decoding": self.decoding.to_dict(),
            "run_seed": self.run_seed,
            "max_screen_calls_per_round": self.max_screen_calls_per_round,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        return cls(
            rounds=int(data.get("rounds", 3)),
            beam=int(data.get("beam", 15)),
            screening=ScreeningConfig.from_dict(data.get("screening", {})),
            evolution=EvolutionConfig.from_dict(data.get("evolution", {})),
            decoding=DecodingParams.from_dict(data.get("decoding", {})),
            run_seed=int(data.get("run_seed", 0)),
            concurrency=int(data.get("concurrency", 1)),
            max_screen_calls_per_round=data.get("max_screen_calls_per_round"),
        )

    def digest(self) -> str:
        """Digest of everything that shapes results: semantic config plus the
        prompt templates. Concurrency is excluded (merges are deterministic).
        """
        payload = {"config": self.to_dict(), "templates": template_hashes()}
        canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class RoundStats:
    round: int
    parents: int
    inspirations_selected: int
    pairs_expanded: int
    hypotheses_generated: int
    branch_counts: dict = field(default_factory=dict)
    screening_calls: int = 0

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "parents": self.parents,
            "inspirations_selected": self.inspirations_selected,
            "pairs_expanded": self.pairs_expanded,
            "hypotheses_generated": self.hypotheses_generated,
            "branch_counts": dict(self.branch_counts),
            "screening_calls": self.screening_calls,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoundStats":
        return cls(
            round=data["round"],
            parents=data["parents"],
            inspirations_selected=data["inspirations_selected"],
            pairs_expanded=data["pairs_expanded"],
            hypotheses_generated=data["hypotheses_generated"],
            branch_counts=dict(data.get("branch_counts", {})),
            screening_calls=int(data.get("screening_calls", 0)),
        )


ScoredHypothesis = tuple[Hypothesis, AspectScores]


@dataclass
class PipelineState:
    round: int
    beam_hypotheses: list[ScoredHypothesis]
    all_hypotheses: list[ScoredHypothesis]
    config_digest: str
    round_stats: list[RoundStats] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def initial(cls, cfg: PipelineConfig) -> "PipelineState":
        return cls(
            round=0,
            beam_hypotheses=[],
            all_hypotheses=[],
            config_digest=cfg.digest(),
        )

    def parents(self) -> list[Hypothesis]:
        if self.round == 0:
            return [Hypothesis.seed()]
        return [h for h, _ in self.beam_hypotheses]

    def hypotheses_at(self, round_index: int) -> list[ScoredHypothesis]:
        return [(h, s) for h, s in self.all_hypotheses if h.round == round_index]

    def to_dict(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "config_digest": self.config_digest,
            "round": self.round,
            "beam_hypotheses": [
                {"hypothesis": h.to_dict(), "scores": s.to_dict()}
                for h, s in self.beam_hypotheses
            ],
            "all_hypotheses": [
                {"hypothesis": h.to_dict(), "scores": s.to_dict()}
                for h, s in self.all_hypotheses
            ],
            "round_stats": [stats.to_dict() for stats in self.round_stats],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineState":
        def pairs(key: str) -> list[ScoredHypothesis]:
            return [
                (Hypothesis.from_dict(item["hypothesis"]), AspectScores.from_dict(item["scores"]))
                for item in data.get(key, [])
            ]

        return cls(
            round=data["round"],
            beam_hypotheses=pairs("beam_hypotheses"),
            all_hypotheses=pairs("all_hypotheses"),
            config_digest=data["config_digest"],
            round_stats=[RoundStats.from_dict(s) for s in data.get("round_stats", [])],
            warnings=list(data.get("warnings", [])),
        )


def _budget_shares(total: int | None, parents: int) -> list[int | None]:
    """Split a per-round call budget across parents, remainder to the first."""
    if total is None:
        return [None] * parents
    base, remainder = divmod(max(total, 0), parents)
    return [base + (1 if i < remainder else 0) for i in range(parents)]


def run_round(
    gateway: LlmGateway,
    state: PipelineState,
    background: ResearchBackground,
    corpus: Corpus,
    cfg: PipelineConfig,
) -> PipelineState:
    """One full round: every beam parent screens for fresh inspirations, every
    (parent, inspiration) pair expands, everything new is rated, ranked, and
    beam-selected. Merge order is fixed by (parent index, selection index,
    branch order), so concurrency never changes the outcome.
    """
    if state.round >= cfg.rounds:
        raise PipelineError(f"round {state.round} already at configured limit {cfg.rounds}")
    parents = state.parents()
    warnings: list[str] = []
    shares = _budget_shares(cfg.max_screen_calls_per_round, len(parents))

    pairs: list[tuple[Hypothesis, list]] = []
    screening_calls = 0
    provider_failures = 0
    for parent, share in zip(parents, shares):
        outcome = screen_multi_pass(
            gateway, background, parent, corpus, cfg.screening,
            max_workers=cfg.concurrency, max_calls=share,
        )
        warnings.extend(f"round {state.round + 1}: {w}" for w in outcome.warnings)
        screening_calls += outcome.calls_made
        provider_failures += outcome.provider_failures
        pairs.append((parent, [c for c, _ in outcome.selected]))

    expansion: list[tuple[Hypothesis, object]] = [
        (parent, inspiration) for parent, selected in pairs for inspiration in selected
    ]

    def expand(job: tuple[Hypothesis, object]):
        parent, inspiration = job
        try:
            return evolutionary_unit(gateway, background, inspiration, parent, cfg.evolution), False
        except ProviderError as exc:
            return (([], [f"pair ({parent.id}, {inspiration.id}) failed: {exc}"]), True)

    if cfg.concurrency > 1 and len(expansion) > 1:
        with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
            outcomes = list(pool.map(expand, expansion))
    else:
        outcomes = [expand(job) for job in expansion]

    new_hypotheses: list[Hypothesis] = []
    for (outputs, unit_warnings), failed in outcomes:
        new_hypotheses.extend(outputs)
        warnings.extend(f"round {state.round + 1}: {w}" for w in unit_warnings)
        provider_failures += int(failed)

    if not new_hypotheses:
        # a round starved entirely by provider failures is a provider
        # problem, not a pipeline one; keep the distinction for exit codes
        if provider_failures:
            raise ProviderError(
                f"round {state.round + 1} produced no hypotheses after "
                f"{provider_failures} provider failure(s)"
            )
        raise PipelineError(
            f"round {state.round + 1} produced no hypotheses "
            f"({len(parents)} parents, {len(expansion)} pairs)"
        )

    scores = rate_many(gateway, new_hypotheses, max_workers=cfg.concurrency)
    scored = list(zip(new_hypotheses, scores))
    ranked = rank(scored)
    beam = beam_select(ranked, cfg.beam)
    beam_ids = {h.id for h in beam}
    beam_scored = [entry for entry in ranked.entries if entry.hypothesis.id in beam_ids]

    branch_counts: dict[str, int] = {}
    for h in new_hypotheses:
        branch_counts[h.branch] = branch_counts.get(h.branch, 0) + 1

    logger.info(
        "round %d: %d parents, %d pairs, %d hypotheses",
        state.round + 1, len(parents), len(expansion), len(new_hypotheses),
    )
    stats = RoundStats(
        round=state.round + 1,
        parents=len(parents),
        inspirations_selected=sum(len(sel) for _, sel in pairs),
        pairs_expanded=len(expansion),
        hypotheses_generated=len(new_hypotheses),
        branch_counts=branch_counts,
        screening_calls=screening_calls,
    )
    return PipelineState(
        round=state.round + 1,
        beam_hypotheses=[(e.hypothesis, e.scores) for e in beam_scored],
        all_hypotheses=state.all_hypotheses + scored,
        config_digest=state.config_digest,
        round_stats=state.round_stats + [stats],
        warnings=state.warnings + warnings,
    )


def save_checkpoint(state: PipelineState, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(state.to_dict(), sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


def load_checkpoint(path: str | Path, cfg: PipelineConfig) -> PipelineState:
    """Restore state, refusing checkpoints from another version or config."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    version = data.get("version")
    if version != CHECKPOINT_VERSION:
        raise ConfigMismatchError(
            f"checkpoint version {version} unsupported (expected {CHECKPOINT_VERSION})"
        )
    expected = cfg.digest()
    if data.get("config_digest") != expected:
        raise ConfigMismatchError(
            "checkpoint config digest does not match the supplied configuration"
        )
    return PipelineState.from_dict(data)


def final_ranked_list(state: PipelineState, cfg: PipelineConfig) -> RankedList:
    """The full ranking of every hypothesis produced in the final round."""
    return rank(state.hypotheses_at(cfg.rounds))


def run(
    gateway: LlmGateway,
    background: ResearchBackground,
    corpus: Corpus,
    cfg: PipelineConfig,
    run_dir: str | Path | None = None,
    initial_state: PipelineState | None = None,
) -> tuple[RankedList, PipelineState]:
    """Execute rounds until ``cfg.rounds``, checkpointing after each one, and
    return the final round's full ranking (not just the beam).

    Pass a resumed state to continue an interrupted run; a state already at
    the final round returns its ranking without any model calls.
    """
    if len(corpus) == 0:
        raise PipelineError("corpus is empty")
    state = initial_state if initial_state is not None else PipelineState.initial(cfg)
    if state.config_digest != cfg.digest():
        raise ConfigMismatchError("state config digest does not match the supplied configuration")
    run_path = Path(run_dir) if run_dir is not None else None
    while state.round < cfg.rounds:
        state = run_round(gateway, state, background, corpus, cfg)
        if run_path is not None:
            save_checkpoint(state, run_path / "checkpoints" / f"round_{state.round:02d}.json")
    ranked = final_ranked_list(state, cfg)
    if run_path is not None:
        write_ranked_list(ranked, run_path / "ranked.jsonl")
    return ranked, state


def write_ranked_list(ranked: RankedList, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(ranked_list_bytes(ranked))
    return path


def ranked_list_bytes(ranked: RankedList) -> bytes:
    """Canonical serialization used for determinism checks: no timestamps,
    stable key order."""
    lines = [
        json.dumps(record, sort_keys=True, ensure_ascii=False)
        for record in ranked.to_records()
    ]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


def read_ranked_list(path: str | Path) -> RankedList:
    from .ranking import RankedEntry

    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        scores = AspectScores(
            validness=record["validness"],
            novelty=record["novelty"],
            significance=record["significance"],
            potential=record["potential"],
        )
        hypothesis = Hypothesis(
            id=record["id"],
            text=record["text"],
            round=record["round"],
            lineage=tuple(record.get("lineage", ())),
            branch=record.get("branch", "direct"),
            parent_id=record.get("parent_id"),
        )
        entries.append(RankedEntry(hypothesis=hypothesis, scores=scores, rank=record["rank"]))
    return RankedList(tuple(entries))
