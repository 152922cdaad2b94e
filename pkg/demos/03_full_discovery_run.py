"""Walkthrough: a full multi-round discovery run with checkpoint and resume.

Three rounds of screen -> compose -> rate -> rank -> beam over a small corpus,
then the same run interrupted after round one and resumed from its checkpoint,
demonstrating byte-identical results.

Run:  python demos/03_full_discovery_run.py
"""

import tempfile
from pathlib import Path

from hypoforge import (
    EvolutionConfig,
    LlmGateway,
    OfflineProvider,
    PipelineConfig,
    PipelineState,
    ResearchBackground,
    ScreeningConfig,
    load_checkpoint,
    run,
    run_round,
    save_checkpoint,
)
from hypoforge.corpus import Corpus
from hypoforge.domain import InspirationCandidate
from hypoforge.pipeline import ranked_list_bytes

corpus = Corpus(
    tuple(
        InspirationCandidate(
            id=f"p{i:02d}",
            title=f"Candidate idea {i} from an unrelated field",
            abstract=f"Technique {i} with transferable structure.",
        )
        for i in range(12)
    )
)
background = ResearchBackground(
    question="How can perovskite solar cells survive humid environments?",
    survey="Encapsulation and compositional tuning are the known levers.",
    use_survey=True,
)
cfg = PipelineConfig(
    rounds=3,
    beam=4,
    screening=ScreeningConfig(window_size=15, keep_per_window=3, passes=1),
    evolution=EvolutionConfig(),
    run_seed=7,
)

ranked, state = run(LlmGateway(OfflineProvider()), background, corpus, cfg)

print("uninterrupted run:")
for stats in state.round_stats:
    print(
        f"  round {stats.round}: {stats.parents} parent(s), "
        f"{stats.inspirations_selected} inspirations, "
        f"{stats.hypotheses_generated} hypotheses "
        f"{stats.branch_counts}"
    )
print(f"final ranking holds {len(ranked)} round-{cfg.rounds} hypotheses")
best = ranked.entries[0]
print(f"best (avg {best.scores.average:.2f}, lineage {best.hypothesis.lineage}):")
print(f"  {best.hypothesis.text[:110]}")

# interrupt after round one, checkpoint, resume, and compare
with tempfile.TemporaryDirectory() as tmp:
    gateway = LlmGateway(OfflineProvider())
    partial = run_round(gateway, PipelineState.initial(cfg), background, corpus, cfg)
    checkpoint = save_checkpoint(partial, Path(tmp) / "round1.json")
    print(f"\ncheckpointed after round {partial.round} -> {checkpoint.name}")

    resumed_state = load_checkpoint(checkpoint, cfg)
    resumed, _ = run(
        LlmGateway(OfflineProvider()), background, corpus, cfg, initial_state=resumed_state
    )
    identical = ranked_list_bytes(resumed) == ranked_list_bytes(ranked)
    print(f"resumed run byte-identical to uninterrupted run: {identical}")
