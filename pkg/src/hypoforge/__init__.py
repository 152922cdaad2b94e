"""hypoforge: turn a research background plus a literature corpus into a
ranked list of generated research hypotheses.

The engine screens the corpus in positional windows for unexpected
inspirations, grows hypotheses one inspiration per round through an
evolutionary compose-and-refine unit, scores them on four review aspects, and
carries the top beam into the next round. An evaluation harness measures
inspiration recall (hit ratio) and similarity to reference hypotheses
(matched score).
"""

from .corpus import (
    Corpus,
    CorpusError,
    Window,
    build_eval_corpus,
    gt_window_collisions,
    load_corpus,
    partition_windows,
    save_corpus,
)
from .domain import (
    AspectScores,
    BenchmarkEntry,
    GroundTruthInspiration,
    Hypothesis,
    InspirationCandidate,
    MatchedScore,
    ResearchBackground,
    average_score,
    normalize_title,
)
from .evaluation import (
    BenchmarkError,
    HitRatioReport,
    RankRatioReport,
    aggregate_ms,
    bucket_rank_ratios,
    count_matched_inspirations,
    hit_ratio,
    hit_ratio_report,
    load_benchmark,
    matched_score,
    rank_ratio,
    rank_ratio_report,
)
from .evolution import (
    Critique,
    EvolutionConfig,
    compose_direct,
    critique,
    evolutionary_unit,
    generate_mutations,
    recombine,
    refine,
)
from .gateway import (
    CompletionCache,
    CompletionRecord,
    DecodingParams,
    HttpProvider,
    LlmGateway,
    ProviderError,
    ScriptedProvider,
    prompt_digest,
    provider_from_config,
)
from .offline import FlakyProvider, OfflineProvider
from .parsing import (
    ResponseParseError,
    parse_aspect_scores,
    parse_matched_score,
    parse_selected_titles,
    render_aspect_scores,
)
from .pipeline import (
    ConfigMismatchError,
    PipelineConfig,
    PipelineError,
    PipelineState,
    final_ranked_list,
    load_checkpoint,
    run,
    run_round,
    save_checkpoint,
)
from .ranking import RankedEntry, RankedList, beam_select, rank, rate, rate_many, rate_text
from .screening import (
    ScreeningConfig,
    ScreeningResult,
    retention_bound,
    screen_multi_pass,
    screen_pass,
    screen_window,
)

__version__ = "0.1.0"

__all__ = [
    "AspectScores",
    "BenchmarkEntry",
    "BenchmarkError",
    "CompletionCache",
    "CompletionRecord",
    "ConfigMismatchError",
    "Corpus",
    "CorpusError",
    "Critique",
    "DecodingParams",
    "EvolutionConfig",
    "FlakyProvider",
    "GroundTruthInspiration",
    "HitRatioReport",
    "HttpProvider",
    "Hypothesis",
    "InspirationCandidate",
    "LlmGateway",
    "MatchedScore",
    "OfflineProvider",
    "PipelineConfig",
    "PipelineError",
    "PipelineState",
    "ProviderError",
    "RankRatioReport",
    "RankedEntry",
    "RankedList",
    "ResearchBackground",
    "ResponseParseError",
    "ScreeningConfig",
    "ScreeningResult",
    "ScriptedProvider",
    "Window",
    "aggregate_ms",
    "average_score",
    "beam_select",
    "bucket_rank_ratios",
    "build_eval_corpus",
    "compose_direct",
    "count_matched_inspirations",
    "critique",
    "evolutionary_unit",
    "final_ranked_list",
    "generate_mutations",
    "gt_window_collisions",
    "hit_ratio",
    "hit_ratio_report",
    "load_benchmark",
    "load_checkpoint",
    "load_corpus",
    "matched_score",
    "normalize_title",
    "parse_aspect_scores",
    "parse_matched_score",
    "parse_selected_titles",
    "partition_windows",
    "prompt_digest",
    "provider_from_config",
    "rank",
    "rank_ratio",
    "rank_ratio_report",
    "rate",
    "rate_many",
    "rate_text",
    "recombine",
    "refine",
    "render_aspect_scores",
    "retention_bound",
    "run",
    "run_round",
    "save_checkpoint",
    "save_corpus",
    "screen_multi_pass",
    "screen_pass",
    "screen_window",
]
