"""Walkthrough: the evaluation harness.

Covers inspiration recall (hit ratio), matched-score judging against a
reference hypothesis with its key points, top/average aggregation with the -1
reporting sentinel, and rank-ratio reports bucketed by quality signals.

Run:  python demos/04_evaluation_metrics.py
"""

import random

from hypoforge import (
    AspectScores,
    Hypothesis,
    LlmGateway,
    MatchedScore,
    OfflineProvider,
    RankedEntry,
    RankedList,
    aggregate_ms,
    count_matched_inspirations,
    hit_ratio_report,
    matched_score,
    rank_ratio_report,
)

gateway = LlmGateway(OfflineProvider())

# --- hit ratio across several screening outcomes -------------------------
report = hit_ratio_report(
    [
        ({"ru catalyst", "d2o solvent", "odd paper"}, {"Ru Catalyst", "D2O Solvent", "N-doping"}),
        ({"chain rule"}, {"Chain Rule"}),
        (set(), {"a", "b"}),
    ]
)
print("hit ratios per background:")
for i, entry in enumerate(report.entries, start=1):
    print(f"  entry {i}: {entry.selected_gt_count}/{entry.gt_count} = {entry.ratio:.0%}")
print(f"mean hit ratio: {report.mean_ratio:.1%}")

# --- matched-score judging ------------------------------------------------
reference = (
    "A nitrogen-doped ruthenium electrode catalyzes reductive deuteration in D2O."
)
key_points = "nitrogen doping; ruthenium electrode; D2O as deuterium source"
generated = [
    "Ruthenium nanoparticles on nitrogen-doped graphene enable deuteration with D2O.",
    "A generic machine-learning screen of electrode materials.",
]
scores = [matched_score(gateway, text, reference, key_points) for text in generated]
# a hypothesis whose lineage never touched ground truth reports as -1
scores.append(MatchedScore(scores[0].value, used_gt_inspiration=False))
print("\nmatched scores (judged 0-5, sentinel rows display -1):")
for text, score in zip(generated + ["<no ground-truth inspiration used>"], scores):
    print(f"  {score.display:3d}  {text[:60]}")
top, average = aggregate_ms(scores)
print(f"top MS {top}, average MS {average:.2f} (sentinel rows excluded)")

# --- matched-inspiration counting from lineage ----------------------------
hypothesis = Hypothesis(
    id="h1", text="...", round=2, lineage=("Ru Catalyst", "Odd Paper")
)
matched = count_matched_inspirations(hypothesis, {"ru catalyst", "d2o solvent"})
print(f"\nlineage {hypothesis.lineage} matches {matched} ground-truth inspiration(s)")

# --- rank-ratio report -----------------------------------------------------
rng = random.Random(7)
entries = []
annotations = {}
for rank_position in range(1, 41):
    h = Hypothesis(id=f"h{rank_position:03d}", text="t", round=1, lineage=(f"i{rank_position}",))
    entries.append(
        RankedEntry(
            hypothesis=h,
            scores=AspectScores(*(rng.randint(1, 5) for _ in range(4))),
            rank=rank_position,
        )
    )
    # top half of the ranking tends to carry more matched inspirations
    annotations[h.id] = 1 if rank_position <= 20 and rng.random() < 0.8 else 0
ratio_report = rank_ratio_report(RankedList(tuple(entries)), annotations)
print("\nmean rank ratio by matched-inspiration count (lower is better):")
for key in sorted(ratio_report.buckets, reverse=True):
    bucket = ratio_report.buckets[key]
    print(f"  #matched={key}: {bucket.mean_rank_ratio:.3f} over {bucket.size} hypotheses")
