"""Prompt templates for every model call, plus rendering helpers.

The reviewer rubric (four-aspect scoring) and the matched-score judge rubric
are fixed texts: golden tests pin them byte-for-byte, so edit them only with
a version bump and fresh golden files. The remaining templates are original
wording for screening and hypothesis composition.
"""

from __future__ import annotations

import hashlib

from .domain import Hypothesis, InspirationCandidate, ResearchBackground

TEMPLATE_VERSION = "1"

REVIEWER_PROMPT = """You are known as a diligent and harsh reviewer in Chemistry and Material Science that will spend much time to find flaws when reviewing and therefore usually gives a relatively much lower score than other reviewers. But when you meet with a hypothesis you truly appreciate, you don't mind to give it good scores. Given a not yet peer reviewed research hypothesis in Chemistry or Material Science domain, try to evaluate the research hypothesis from four research aspects and give score according to evaluation guidelines provided below. All four aspects should be evaluated in a 5 point scale.

Aspect 1: Validness.
5 points: The hypothesis is a logical next step from current research, strongly supported by theory, perhaps with some indirect experimental evidence or highly predictive computational results. The experimental verification seems straightforward with a high probability of confirming the hypothesis; 4 points: Here, the hypothesis is well-rooted in existing theory with some preliminary data or computational models supporting it. It extends known science into new but logically consistent areas, where experiments are feasible with current technology, and there's a reasonable expectation of positive results; 3 points: This hypothesis is within the realm of theoretical possibility but stretches the boundaries of what's known. It might combine existing knowledge in very novel ways or predict outcomes for which there's no direct evidence yet. There's a conceptual framework for testing, but success is uncertain; 2 points: While the hypothesis might be grounded in some theoretical aspects, it significantly deviates from current understanding or requires conditions or materials that are currently impossible or highly improbable to achieve or synthesize; 1 point: The hypothesis proposes concepts or outcomes that are not only unsupported by current theory but also contradict well-established principles or data. There's no clear path to experimental testing due to fundamental theoretical or practical barriers.

Aspect 2: Novelty.
5 points: This level of novelty could fundamentally alter our understanding of chemistry or create entirely new fields. It often involves predictions or discoveries that, if proven, would require a significant overhaul of existing chemical theories; 4 points: The hypothesis significantly departs from established norms, potentially redefining how certain chemical phenomena are understood or applied. It might involve entirely new materials or theoretical frameworks; 3 points: This level involves a hypothesis that could potentially lead to new insights or applications. It might challenge minor aspects of current theories or introduce new methodologies or materials; 2 points: The hypothesis introduces a new angle or method within an established framework. It might involve known compounds or reactions but in contexts or combinations not previously explored; 1 point: The hypothesis involves minor tweaks or applications of well-known principles or techniques. It might slightly extend existing knowledge but doesn't introduce fundamentally new concepts.

Aspect 3: Significance.
5 points: This hypothesis could fundamentally change one or more branches of chemistry. It might introduce entirely new principles, theories, or methodologies that redefine the boundaries of chemical science; 4 points: This hypothesis challenges current understanding or introduces a concept that could lead to substantial changes in how a particular area of chemistry is viewed or applied. It might lead to new technologies or significant theoretical advancements; 3 points: this hypothesis proposes something new or an innovative approach that could lead to noticeable advancements in a specific area of chemistry. It might open new avenues for research or application but doesn't revolutionize the field; 2 points: This hypothesis might offer a small variation or incremental improvement on existing knowledge. It could potentially refine a known concept but doesn't significantly alter the field; 1 point: The hypothesis addresses a very narrow or already well-established aspect of chemistry. It might confirm what is already known without adding much new insight.

Aspect 4: Potential.
5 points: The hypothesis, while potentially intriguing now, holds the promise of being revolutionary with the addition of a key methodological component. This could introduce entirely new concepts or fields, fundamentally changing our understanding or capabilities in chemistry; 4 points: The hypothesis, though promising, could be transformative with the right methodological enhancement. This enhancement might lead to groundbreaking discoveries or applications, significantly advancing the field; 3 points: The hypothesis, while interesting in its current form, could be significantly elevated with the right methodological addition. This might lead to new insights or applications that go beyond the initial scope; 2 points: The hypothesis currently offers some value but has the potential for more substantial contributions if enhanced with a new methodological approach. This could lead to incremental advancements in understanding or application; 1 point: The hypothesis, as it stands, might be straightforward or well-trodden. Even with methodological enhancements, it's unlikely to significantly expand current knowledge or applications beyond minor improvements.

The hypothesis is:
Please give a response to the initial question on scoring the hypothesis from four aspects. Remember that you are a diligent and harsh reviewer."""

JUDGE_PROMPT = """You are helping to evaluate the quality of a proposed research hypothesis in Chemistry by a phd student. The ground truth hypothesis will also be provided to compare. Here, we mainly focus on whether the proposed hypothesis has covered the key points in terms of the methodology in the ground truth hypothesis. You will also be given a summary of the key points in the methodology of the ground truth hypothesis for reference. Please note that for the proposed hypothesis to cover one key point, it is not necessary to explicitly mention the name of the key point, but might also can integrate the key point implicitly in the proposed method. The evaluation criteria is called 'Matched score', which is in a 6-point Likert scale (from 5 to 0). Particularly, 5 points mean that the proposed hypothesis (1) covers all the key points and leverage them similarly as in the methodology of the ground truth hypothesis, and (2) does not contain any extra key point that has apparent flaws; 4 points mean that the proposed hypothesis (1) covers all the key points (or at least three key points) and leverage them similarly as in the methodology of the ground truth hypothesis, (2) but also with extra key points that have apparent flaws; 3 points mean that the proposed hypothesis (1) covers at least two key points and leverage them similarly as in the methodology of the ground truth hypothesis, (2) but does not cover all key points in the ground truth hypothesis, (3) might or might not contain extra key points; 2 points mean that the proposed hypothesis (1) covers at least one key point in the methodology of the ground truth hypothesis, and leverage it similarly as in the methodology of ground truth hypothesis, (2) but does not cover all key points in the ground truth hypothesis, and (3) might or might not contain extra key points; 1 point means that the proposed hypothesis (1) covers at least one key point in the methodology of the ground truth hypothesis, (2) but is used differently as in the methodology of ground truth hypothesis, and (3) might or might not contain extra key points; 0 point means that the proposed hypothesis does not cover any key point in the methodology of the ground truth hypothesis at all. Please note that the total number of key points in the ground truth hypothesis might be less than three, so that multiple points can be given. E.g., there's only one key point in the ground truth hypothesis, and the proposed hypothesis covers the one key point, it's possible to give 2 points, 4 points, and 5 points. In this case, we should choose score from 4 points and 5 points, depending on the existence and quality of extra key points. 'Leveraging a key point similarly as in the methodology of the ground truth hypothesis' means that in the proposed hypothesis, the same (or very related) concept (key point) is used in a similar way with a similar goal compared to the ground truth hypothesis (not necessarily for the proposed hypothesis to be exactly the same with the groudtruth hypothesis to be classified as 'similar'). When judging whether an extra key point has apparent flaws, you should use your own knowledge to judge, but rather than to rely on the count number of pieces of extra key point to judge.

Please evaluate the proposed hypothesis based on the ground truth hypothesis.
The proposed hypothesis is:
The ground truth hypothesis is:
The key points in the ground truth hypothesis are:
Please evaluate the proposed hypothesis based on the ground truth hypothesis, and give a score."""


SCREEN_TEMPLATE = """You are helping a researcher screen a batch of papers for unexpected inspirations.

Research question: {question}
{survey_block}{hypothesis_block}Candidate papers:
{candidates}

Pick the {keep} candidates whose core idea could most plausibly be combined with the research question{hypothesis_clause} to spark a genuinely new hypothesis. Prefer papers that are not already an obvious match for the question: the goal is a fresh connection, not more of the same. Respond with one line per pick, formatted exactly as:
Title: <title copied from the list> | Reason: <one or two sentences>"""

COMPOSE_TEMPLATE = """You are drafting a research hypothesis.

Research question: {question}
{survey_block}{hypothesis_block}Inspiration paper:
Title: {title}
Abstract: {abstract}

Write one concrete, testable research hypothesis that combines the research question{prev_clause} with the inspiration paper's core idea. Respond in the form:
Hypothesis: <the hypothesis>"""

MUTATION_TEMPLATE = """You are drafting a research hypothesis.

Research question: {question}
{survey_block}{hypothesis_block}Inspiration paper:
Title: {title}
Abstract: {abstract}

Earlier drafts for this same question and inspiration:
{drafts}

Propose a hypothesis that associates the question and the inspiration in a way none of the earlier drafts uses. Respond in the form:
Hypothesis: <the hypothesis>"""

CRITIQUE_TEMPLATE = """You are reviewing a draft research hypothesis.

Draft hypothesis: {hypothesis}

Give focused feedback on each aspect below, one aspect per line, formatted as <Aspect>: <feedback>.
Aspects: {aspects}"""

REFINE_TEMPLATE = """You are revising a draft research hypothesis using reviewer feedback.

Draft hypothesis: {hypothesis}

Reviewer feedback:
{feedback}

Rewrite the hypothesis so it addresses the feedback while keeping its core idea. Respond in the form:
Hypothesis: <the revised hypothesis>"""

RECOMBINE_TEMPLATE = """You are merging several candidate research hypotheses into a single stronger one.

Research question: {question}
{survey_block}Inspiration paper:
Title: {title}

Candidate hypotheses:
{candidates}

Write one hypothesis that keeps the strongest elements of every candidate. Respond in the form:
Hypothesis: <the merged hypothesis>"""

TEMPLATES = {
    "screen": SCREEN_TEMPLATE,
    "compose": COMPOSE_TEMPLATE,
    "mutate": MUTATION_TEMPLATE,
    "critique": CRITIQUE_TEMPLATE,
    "refine": REFINE_TEMPLATE,
    "recombine": RECOMBINE_TEMPLATE,
    "review": REVIEWER_PROMPT,
    "judge": JUDGE_PROMPT,
}

# Slot lines inside the fixed rubric texts; each occurs exactly once.
_REVIEW_SLOT = "The hypothesis is:\n"
_JUDGE_SLOTS = (
    "The proposed hypothesis is:\n",
    "The ground truth hypothesis is:\n",
    "The key points in the ground truth hypothesis are:\n",
)


def template_hashes() -> dict[str, str]:
    """Stable content hash per template; folded into run config digests."""
    return {
        name: hashlib.sha256(text.encode("utf-8")).hexdigest()
        for name, text in sorted(TEMPLATES.items())
    }


def _survey_block(background: ResearchBackground) -> str:
    survey = background.selected_survey()
    return f"Background survey: {survey}\n" if survey else ""


def _hypothesis_block(prev: Hypothesis | None) -> str:
    if prev is None or prev.is_seed:
        return ""
    return f"Current working hypothesis: {prev.text}\n"


def _numbered_candidates(papers) -> str:
    lines = []
    for n, paper in enumerate(papers, start=1):
        lines.append(f"{n}. Title: {paper.title}")
        lines.append(f"   Abstract: {paper.abstract}")
    return "\n".join(lines)


def render_screen_prompt(
    background: ResearchBackground,
    prev: Hypothesis,
    papers,
    keep: int,
) -> str:
    has_prev = not prev.is_seed
    return SCREEN_TEMPLATE.format(
        question=background.selected_question(),
        survey_block=_survey_block(background),
        hypothesis_block=_hypothesis_block(prev),
        candidates=_numbered_candidates(papers),
        keep=keep,
        hypothesis_clause=" and the current working hypothesis" if has_prev else "",
    )


def render_compose_prompt(
    background: ResearchBackground,
    inspiration: InspirationCandidate,
    prev: Hypothesis,
) -> str:
    has_prev = not prev.is_seed
    return COMPOSE_TEMPLATE.format(
        question=background.selected_question(),
        survey_block=_survey_block(background),
        hypothesis_block=_hypothesis_block(prev),
        title=inspiration.title,
        abstract=inspiration.abstract,
        prev_clause=" and the current working hypothesis" if has_prev else "",
    )


def render_mutation_prompt(
    background: ResearchBackground,
    inspiration: InspirationCandidate,
    prev: Hypothesis,
    earlier_drafts: list[str],
) -> str:
    drafts = "\n".join(f"- {text}" for text in earlier_drafts) if earlier_drafts else "- (none yet)"
    return MUTATION_TEMPLATE.format(
        question=background.selected_question(),
        survey_block=_survey_block(background),
        hypothesis_block=_hypothesis_block(prev),
        title=inspiration.title,
        abstract=inspiration.abstract,
        drafts=drafts,
    )


def render_critique_prompt(hypothesis: Hypothesis, aspects) -> str:
    return CRITIQUE_TEMPLATE.format(
        hypothesis=hypothesis.text,
        aspects=", ".join(aspects),
    )


def render_refine_prompt(hypothesis: Hypothesis, feedback: dict[str, str]) -> str:
    lines = "\n".join(f"{aspect.capitalize()}: {text}" for aspect, text in feedback.items())
    return REFINE_TEMPLATE.format(hypothesis=hypothesis.text, feedback=lines)


def render_recombine_prompt(
    background: ResearchBackground,
    inspiration: InspirationCandidate,
    survivors,
) -> str:
    candidates = "\n".join(f"{n}. {h.text}" for n, h in enumerate(survivors, start=1))
    return RECOMBINE_TEMPLATE.format(
        question=background.selected_question(),
        survey_block=_survey_block(background),
        title=inspiration.title,
        candidates=candidates,
    )


def render_review_prompt(hypothesis_text: str) -> str:
    """Instantiate the fixed reviewer rubric with the hypothesis under review."""
    return REVIEWER_PROMPT.replace(_REVIEW_SLOT, f"The hypothesis is: {hypothesis_text}\n", 1)


def render_judge_prompt(generated: str, gt_hypothesis: str, key_points: str) -> str:
    """Instantiate the fixed matched-score rubric with the three inputs."""
    text = JUDGE_PROMPT
    text = text.replace(_JUDGE_SLOTS[0], f"The proposed hypothesis is: {generated}\n", 1)
    text = text.replace(_JUDGE_SLOTS[1], f"The ground truth hypothesis is: {gt_hypothesis}\n", 1)
    text = text.replace(
        _JUDGE_SLOTS[2], f"The key points in the ground truth hypothesis are: {key_points}\n", 1
    )
    return text
