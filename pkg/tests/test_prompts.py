from pathlib import Path

from hypoforge import Hypothesis, InspirationCandidate, ResearchBackground
from hypoforge.prompts import (
    JUDGE_PROMPT,
    REVIEWER_PROMPT,
    TEMPLATES,
    render_compose_prompt,
    render_judge_prompt,
    render_mutation_prompt,
    render_recombine_prompt,
    render_review_prompt,
    render_screen_prompt,
    template_hashes,
)

GOLDEN = Path(__file__).parent / "golden"

BG = ResearchBackground(question="How to improve X?", survey="Y is best known.", use_survey=True)
INSP = InspirationCandidate(id="i1", title="Surprising Mechanism Z", abstract="Z does things.")
PREV = Hypothesis(id="p", text="prior working claim", round=1, lineage=("i0",))


class TestGoldenTemplates:
    def test_reviewer_template_byte_exact(self):
        golden = (GOLDEN / "reviewer_prompt.txt").read_text(encoding="utf-8")
        assert REVIEWER_PROMPT == golden

    def test_judge_template_byte_exact(self):
        golden = (GOLDEN / "judge_prompt.txt").read_text(encoding="utf-8")
        assert JUDGE_PROMPT == golden

    def test_reviewer_identity_phrase(self):
        assert "diligent and harsh reviewer" in REVIEWER_PROMPT

    def test_judge_scale_phrase(self):
        assert "6-point Likert scale (from 5 to 0)" in JUDGE_PROMPT

    def test_judge_rubric_anchor_clauses(self):
        assert "covers at least two key points" in JUDGE_PROMPT
        assert "does not cover any key point" in JUDGE_PROMPT


class TestRenderFixedTemplates:
    def test_review_insertion_preserves_surroundings(self):
        rendered = render_review_prompt("MY HYPOTHESIS")
        assert "The hypothesis is: MY HYPOTHESIS\n" in rendered
        head, _, tail = REVIEWER_PROMPT.partition("The hypothesis is:\n")
        assert rendered.startswith(head)
        assert rendered.endswith(tail)

    def test_review_slot_unique(self):
        assert REVIEWER_PROMPT.count("The hypothesis is:\n") == 1

    def test_judge_insertions(self):
        rendered = render_judge_prompt("GEN", "REF", "POINTS")
        assert "The proposed hypothesis is: GEN\n" in rendered
        assert "The ground truth hypothesis is: REF\n" in rendered
        assert "The key points in the ground truth hypothesis are: POINTS\n" in rendered

    def test_judge_slots_unique(self):
        for slot in (
            "The proposed hypothesis is:\n",
            "The ground truth hypothesis is:\n",
            "The key points in the ground truth hypothesis are:\n",
        ):
            assert JUDGE_PROMPT.count(slot) == 1


class TestWorkingTemplates:
    def test_screen_prompt_contents(self):
        papers = [INSP, InspirationCandidate(id="i2", title="Another Paper", abstract="More.")]
        prompt = render_screen_prompt(BG, Hypothesis.seed(), papers, keep=3)
        assert BG.question in prompt
        assert BG.survey in prompt
        assert "Surprising Mechanism Z" in prompt and "Z does things." in prompt
        assert "Another Paper" in prompt
        assert "Pick the 3 candidates" in prompt
        assert "Current working hypothesis" not in prompt  # seed has no text

    def test_screen_prompt_includes_prev_hypothesis(self):
        prompt = render_screen_prompt(BG, PREV, [INSP], keep=3)
        assert "prior working claim" in prompt

    def test_compose_prompt_contents(self):
        prompt = render_compose_prompt(BG, INSP, PREV)
        assert "prior working claim" in prompt
        assert "Surprising Mechanism Z" in prompt

    def test_mutation_prompt_lists_earlier_drafts(self):
        prompt = render_mutation_prompt(BG, INSP, Hypothesis.seed(), ["draft one", "draft two"])
        assert "- draft one" in prompt and "- draft two" in prompt

    def test_recombine_prompt_lists_survivors(self):
        survivors = [
            Hypothesis(id=f"s{i}", text=f"candidate {i}", round=1, lineage=("i1",))
            for i in range(3)
        ]
        prompt = render_recombine_prompt(BG, INSP, survivors)
        assert all(f"candidate {i}" in prompt for i in range(3))


class TestTemplateHashes:
    def test_every_template_hashed(self):
        hashes = template_hashes()
        assert set(hashes) == set(TEMPLATES)
        assert all(len(v) == 64 for v in hashes.values())

    def test_hashes_stable(self):
        assert template_hashes() == template_hashes()
