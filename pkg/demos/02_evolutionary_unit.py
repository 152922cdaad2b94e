"""Walkthrough: one evolutionary unit for a (parent, inspiration) pair.

Shows every branch the unit produces: the single-shot direct draft, three
mutation drafts that are critiqued and refined (the refined child replaces
its parent), and the final recombination of the survivors.

Run:  python demos/02_evolutionary_unit.py
"""

from hypoforge import (
    EvolutionConfig,
    Hypothesis,
    InspirationCandidate,
    LlmGateway,
    OfflineProvider,
    ResearchBackground,
    critique,
    evolutionary_unit,
)

background = ResearchBackground(
    question="How can we automatically update the parameters of a multi-layer model?",
)
inspiration = InspirationCandidate(
    id="chain-rule",
    title="The chain rule for composite functions",
    abstract="Derivatives of nested functions factor into local derivatives.",
)
gateway = LlmGateway(OfflineProvider())

cfg = EvolutionConfig()  # 3 mutations, 1 critique/refine cycle, all branches on
outputs, warnings = evolutionary_unit(gateway, background, inspiration, Hypothesis.seed(), cfg)

print(f"evolutionary unit produced {len(outputs)} hypotheses "
      f"(expected {cfg.outputs_per_pair}):\n")
for h in outputs:
    parent = f" parent={h.parent_id}" if h.parent_id else ""
    print(f"[{h.branch:13s}] id={h.id}{parent}")
    print(f"    {h.text[:100]}")
print(f"\nwarnings: {warnings or 'none'}")

# what the critique step feeds back into refinement
sample = outputs[1]
feedback = critique(gateway, sample, cfg)
print("\ncritique of the first mutation, one comment per configured aspect:")
for aspect, comment in feedback.comments:
    print(f"  {aspect:12s} {comment[:70]}")

# ablations change the branch arithmetic
for variant in (
    EvolutionConfig(enable_eu=False),
    EvolutionConfig(mutation_count=2, enable_direct_branch=False),
):
    outputs, _ = evolutionary_unit(gateway, background, inspiration, Hypothesis.seed(), variant)
    print(
        f"\nconfig eu={variant.enable_eu} direct={variant.enable_direct_branch} "
        f"mutations={variant.mutation_count} -> {len(outputs)} hypotheses"
    )
