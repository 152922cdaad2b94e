"""Walkthrough: windowed literature screening and geometric retention.

Builds a seeded evaluation corpus with four planted ground-truth papers,
screens it in 15-wide windows keeping 3 per window, and shows how each pass
retains 20% of its input while a preference-aware provider keeps recall high.

Run:  python demos/01_screening_and_retention.py
"""

from hypoforge import (
    Hypothesis,
    InspirationCandidate,
    LlmGateway,
    OfflineProvider,
    ResearchBackground,
    ScreeningConfig,
    build_eval_corpus,
    hit_ratio,
    screen_multi_pass,
)

# four ground-truth inspirations and a pool of distractors
gt = [
    InspirationCandidate(id=f"gt{i}", title=f"Overlooked mechanism {i}", abstract="...")
    for i in range(4)
]
distractors = [
    InspirationCandidate(id=f"d{i}", title=f"Routine study {i}", abstract="...")
    for i in range(400)
]
corpus = build_eval_corpus(gt, distractors, target_size=300, seed=7)
print(f"evaluation corpus: {len(corpus)} papers, seed {corpus.seed}")

background = ResearchBackground(
    question="How can deuterium gas be produced more efficiently?",
    survey="Electrocatalytic routes dominate current practice.",
    use_survey=True,
)

# the offline provider plays a model that recognises the planted papers
gateway = LlmGateway(OfflineProvider(prefer_titles=[p.title for p in gt]))

cfg = ScreeningConfig(window_size=15, keep_per_window=3, passes=2)
result = screen_multi_pass(gateway, background, Hypothesis.seed(), corpus, cfg)

print("\nretention per pass (each pass keeps keep/window = 1/5 of its input):")
previous = len(corpus)
for i, count in enumerate(result.per_pass_counts, start=1):
    print(f"  pass {i}: {previous:4d} -> {count:4d}  ({count / len(corpus):5.1%} of corpus)")
    previous = count

recall = hit_ratio(result.selected_ids, [p.id for p in gt], normalize=False)
print(f"\nground-truth recall after both passes: {recall:.0%}")
print("selected papers:")
for candidate, reason in result.selected[:6]:
    print(f"  {candidate.id:6s} {candidate.title[:50]:50s} | {reason[:40]}")
print(f"  ... {max(len(result.selected) - 6, 0)} more")
