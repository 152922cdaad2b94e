import pytest

from hypoforge import (
    Corpus,
    DecodingParams,
    InspirationCandidate,
    LlmGateway,
    OfflineProvider,
    ResearchBackground,
)

_STATUS = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion, printed unconditionally."""
    lines = {}
    for outcome in ("passed", "failed", "skipped"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid or "criterion" not in nodeid:
                continue
            if outcome != "skipped" and getattr(report, "when", "call") != "call":
                continue
            lines[nodeid.split("::")[-1]] = _STATUS[outcome]
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(lines):
            terminalreporter.write_line(f"{lines[name]} {name}")


def make_corpus(n: int, prefix: str = "P", titles: list[str] | None = None) -> Corpus:
    """Corpus of n synthetic papers; optional explicit titles for the first few."""
    entries = []
    for i in range(n):
        title = titles[i] if titles and i < len(titles) else f"{prefix} paper {i}: effect {i}"
        entries.append(
            InspirationCandidate(
                id=f"{prefix}{i:04d}", title=title, abstract=f"Abstract for study {i}."
            )
        )
    return Corpus(tuple(entries))


def make_gateway(provider=None, **kwargs) -> LlmGateway:
    kwargs.setdefault("params", DecodingParams(temperature=0.0, provider_model_name="test"))
    kwargs.setdefault("sleep", lambda _: None)
    return LlmGateway(provider or OfflineProvider(), **kwargs)


@pytest.fixture
def background() -> ResearchBackground:
    return ResearchBackground(
        question="How can the yield of reaction X be improved at room temperature?",
        survey="The best performing known approaches rely on catalyst Y.",
        use_survey=True,
    )


@pytest.fixture
def offline_gateway() -> LlmGateway:
    return make_gateway()
