"""Command-line entry point.

Subcommands: discover, screen, rank, eval-hitratio, eval-ms, corpus-build.
Exit statuses are a stable scripting contract: 0 success, 2 usage error,
3 provider error, 4 data error. Every invocation writes a run manifest.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .corpus import (
    CorpusError,
    build_eval_corpus,
    gt_window_collisions,
    load_corpus,
    write_eval_corpus,
)
from .domain import Hypothesis, MatchedScore, ResearchBackground
from .evaluation import (
    BenchmarkError,
    aggregate_ms,
    bucket_rank_ratios,
    count_matched_inspirations,
    hit_ratio_report,
    matched_score,
)
from .evolution import EvolutionConfig
from .gateway import (
    CompletionCache,
    DecodingParams,
    LlmGateway,
    ProviderError,
    provider_from_config,
)
from .manifest import RunManifest
from .parsing import CRITIQUE_ASPECTS, ResponseParseError
from .pipeline import (
    ConfigMismatchError,
    PipelineConfig,
    PipelineError,
    load_checkpoint,
    run,
    write_ranked_list,
)
from .ranking import RankedList, rank, rate_many
from .screening import ScreeningConfig, screen_multi_pass

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PROVIDER = 3
EXIT_DATA = 4

_DATA_ERRORS = (
    CorpusError,
    BenchmarkError,
    ResponseParseError,
    ConfigMismatchError,
    PipelineError,
    FileNotFoundError,
    json.JSONDecodeError,
    ValueError,
)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _default_run_dir(command: str) -> Path:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    return Path("runs") / f"{command}-{stamp}"


def _load_background(path: str) -> ResearchBackground:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return ResearchBackground.from_dict(data)


def _build_gateway(args, run_dir: Path) -> LlmGateway:
    provider = provider_from_config(args.provider) if args.provider else None
    if provider is None:
        from .offline import OfflineProvider

        provider = OfflineProvider()
    cache_dir = args.cache_dir if args.cache_dir else run_dir / "cache"
    params = DecodingParams(
        temperature=args.temperature,
        max_output_tokens=args.max_output_tokens,
        provider_model_name=getattr(provider, "name", "unknown"),
    )
    return LlmGateway(
        provider=provider,
        cache=CompletionCache(cache_dir),
        params=params,
        max_retries=args.max_retries,
        max_in_flight=args.concurrency,
        min_interval=args.min_interval,
        trace_path=run_dir / "traces" / "calls.jsonl",
    )


def _add_provider_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--provider", help="provider config file (JSON); default: offline")
    parser.add_argument("--cache-dir", help="response cache directory (default: <run-dir>/cache)")
    parser.add_argument("--temperature", type=float, default=1.0, help="decoding temperature")
    parser.add_argument(
        "--max-output-tokens", type=_positive_int, default=1024, help="completion token cap"
    )
    parser.add_argument(
        "--max-retries", type=int, default=3, help="provider retries before giving up"
    )
    parser.add_argument(
        "--concurrency", type=_positive_int, default=1, help="max in-flight model calls"
    )
    parser.add_argument(
        "--min-interval", type=float, default=0.0,
        help="minimum seconds between provider call starts (rate limit)",
    )


def _add_run_dir_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--run-dir", help="directory for manifest, traces, and checkpoints")


def _read_hypothesis_records(path: str) -> list[dict]:
    records = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid record: {exc.msg}") from exc
            if "text" not in record or not str(record["text"]).strip():
                raise ValueError(f"{path}:{lineno}: record needs non-empty 'text'")
            record.setdefault("id", f"h{lineno}")
            records.append(record)
    if not records:
        raise ValueError(f"{path}: no hypothesis records found")
    return records


def _read_id_list(path: str) -> list[str]:
    """Read ids/titles from a jsonl file ({id} or {title} records) or one
    plain value per line."""
    values = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                record = json.loads(line)
                values.append(str(record.get("id", record.get("title", ""))))
            else:
                values.append(line)
    return [v for v in values if v]


# ---------------------------------------------------------------- discover


def _cmd_discover(args) -> int:
    run_dir = Path(args.run_dir) if args.run_dir else _default_run_dir("discover")
    if args.no_eu and args.mutations is not None:
        raise UsageConflict("--mutations conflicts with --no-eu")
    if args.no_eu and args.refine_iterations is not None:
        raise UsageConflict("--refine-iterations conflicts with --no-eu")
    aspects = tuple(a for a in CRITIQUE_ASPECTS if a != "significance") if args.no_significance_feedback else CRITIQUE_ASPECTS
    gateway = _build_gateway(args, run_dir)
    cfg = PipelineConfig(
        rounds=args.rounds,
        beam=args.beam,
        screening=ScreeningConfig(
            window_size=args.window_size,
            keep_per_window=args.keep_per_window,
            passes=args.passes,
        ),
        evolution=EvolutionConfig(
            mutation_count=args.mutations if args.mutations is not None else 3,
            refine_iterations=args.refine_iterations if args.refine_iterations is not None else 1,
            critique_aspects=aspects,
            enable_eu=not args.no_eu,
            enable_direct_branch=not args.no_direct_branch,
        ),
        # the gateway's params carry the provider model name, so the config
        # digest pins the model a checkpoint was produced with
        decoding=gateway.params,
        run_seed=args.seed,
        concurrency=args.concurrency,
        max_screen_calls_per_round=args.screen_call_budget,
    )
    manifest = RunManifest(
        command="discover",
        config_digest=cfg.digest(),
        provider=gateway.provider.name,
        seed=args.seed,
    )
    background = _load_background(args.background)
    corpus = load_corpus(args.corpus)
    initial_state = load_checkpoint(args.resume, cfg) if args.resume else None
    try:
        ranked, state = run(
            gateway, background, corpus, cfg, run_dir=run_dir, initial_state=initial_state
        )
    except Exception:
        manifest.finish(status="failed", counts={"gateway": gateway.stats.to_dict()})
        manifest.write(run_dir)
        raise
    out = Path(args.out) if args.out else run_dir / "ranked.jsonl"
    write_ranked_list(ranked, out)
    manifest.finish(
        counts={
            "rounds": [stats.to_dict() for stats in state.round_stats],
            "final_ranked": len(ranked),
            "gateway": gateway.stats.to_dict(),
        }
    )
    manifest.write(run_dir)
    top = ranked.entries[0] if ranked.entries else None
    print(f"discover: {len(ranked)} hypotheses ranked after {state.round} round(s)")
    for stats in state.round_stats:
        print(
            f"  round {stats.round}: {stats.parents} parent(s) x "
            f"{stats.inspirations_selected} inspiration(s) -> {stats.hypotheses_generated} hypotheses"
        )
    if top:
        print(f"  top average {top.scores.average:.2f}: {top.hypothesis.text[:120]}")
    print(f"  ranked list: {out}")
    print(f"  manifest:    {run_dir / 'manifest.json'}")
    return EXIT_OK


# ------------------------------------------------------------------ screen


def _cmd_screen(args) -> int:
    run_dir = Path(args.run_dir) if args.run_dir else _default_run_dir("screen")
    gateway = _build_gateway(args, run_dir)
    cfg = ScreeningConfig(
        window_size=args.window_size,
        keep_per_window=args.keep_per_window,
        passes=args.passes,
    )
    manifest = RunManifest(
        command="screen",
        config_digest=PipelineConfig(screening=cfg).digest(),
        provider=gateway.provider.name,
    )
    background = _load_background(args.background)
    corpus = load_corpus(args.corpus)
    result = screen_multi_pass(
        gateway, background, Hypothesis.seed(), corpus, cfg,
        max_workers=args.concurrency, max_calls=args.budget,
    )
    out = Path(args.out) if args.out else run_dir / "selected.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as handle:
        for candidate, reason in result.selected:
            handle.write(
                json.dumps(
                    {"id": candidate.id, "title": candidate.title, "reason": reason},
                    ensure_ascii=False,
                )
                + "\n"
            )
    manifest.finish(
        counts={
            "corpus": len(corpus),
            "per_pass": result.per_pass_counts,
            "selected": len(result.selected),
            "warnings": len(result.warnings),
            "gateway": gateway.stats.to_dict(),
        }
    )
    manifest.write(run_dir)
    print(f"screen: {len(corpus)} papers -> {len(result.selected)} selected")
    print(f"  {'pass':<6}{'kept':<8}fraction")
    for i, count in enumerate(result.per_pass_counts, start=1):
        fraction = count / len(corpus) if len(corpus) else 0.0
        print(f"  {i:<6}{count:<8}{fraction:.1%}")
    for warning in result.warnings[:10]:
        print(f"  warning: {warning}")
    print(f"  selections: {out}")
    return EXIT_OK


# -------------------------------------------------------------------- rank


def _cmd_rank(args) -> int:
    run_dir = Path(args.run_dir) if args.run_dir else _default_run_dir("rank")
    gateway = _build_gateway(args, run_dir)
    manifest = RunManifest(
        command="rank",
        config_digest=PipelineConfig().digest(),
        provider=gateway.provider.name,
    )
    records = _read_hypothesis_records(args.hypotheses)
    hypotheses = []
    for r in records:
        round_index = int(r.get("round", 1))
        lineage = r.get("lineage")
        if lineage is None:
            lineage = [f"source-{r['id']}-{j}" for j in range(round_index)]
        hypotheses.append(
            Hypothesis(
                id=str(r["id"]),
                text=str(r["text"]),
                round=round_index,
                lineage=tuple(lineage),
                branch=r.get("branch", "direct"),
            )
        )
    scores = rate_many(gateway, hypotheses, max_workers=args.concurrency)
    ranked = rank(list(zip(hypotheses, scores)))
    if args.beam is not None:
        ranked = RankedList(ranked.entries[: args.beam])
    out = Path(args.out) if args.out else run_dir / "ranked.jsonl"
    write_ranked_list(ranked, out)
    manifest.finish(counts={"ranked": len(ranked), "gateway": gateway.stats.to_dict()})
    manifest.write(run_dir)
    print(f"rank: {len(ranked)} hypotheses")
    print(f"  {'rank':<6}{'avg':<7}{'v/n/s/p':<10}id")
    for entry in ranked.entries[:15]:
        s = entry.scores
        print(
            f"  {entry.rank:<6}{s.average:<7.2f}"
            f"{s.validness}/{s.novelty}/{s.significance}/{s.potential:<4} {entry.hypothesis.id}"
        )
    print(f"  ranked list: {out}")
    return EXIT_OK


# ---------------------------------------------------------- eval-hitratio


def _cmd_eval_hitratio(args) -> int:
    run_dir = Path(args.run_dir) if args.run_dir else _default_run_dir("eval-hitratio")
    if args.runs:
        pairs = []
        with Path(args.runs).open("r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                if "selected" not in record or "gt" not in record:
                    raise ValueError(f"{args.runs}:{lineno}: record needs 'selected' and 'gt'")
                pairs.append((record["selected"], record["gt"]))
    elif args.selected and args.gt:
        pairs = [(_read_id_list(args.selected), _read_id_list(args.gt))]
    else:
        raise UsageConflict("provide either --runs or both --selected and --gt")
    report = hit_ratio_report(pairs)
    manifest = RunManifest(command="eval-hitratio", config_digest="-", provider="-")
    out = Path(args.out) if args.out else run_dir / "hit_ratio.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    manifest.finish(counts={"entries": len(report.entries), "mean_ratio": report.mean_ratio})
    manifest.write(run_dir)
    print(f"eval-hitratio: {len(report.entries)} entries, mean hit ratio {report.mean_ratio:.1%}")
    for i, entry in enumerate(report.entries, start=1):
        print(f"  entry {i}: {entry.selected_gt_count}/{entry.gt_count} = {entry.ratio:.1%}")
    print(f"  report: {out}")
    return EXIT_OK


# ---------------------------------------------------------------- eval-ms


def _cmd_eval_ms(args) -> int:
    run_dir = Path(args.run_dir) if args.run_dir else _default_run_dir("eval-ms")
    gateway = _build_gateway(args, run_dir)
    manifest = RunManifest(
        command="eval-ms",
        config_digest=PipelineConfig().digest(),
        provider=gateway.provider.name,
    )
    gt_hypothesis = Path(args.gt_hypothesis).read_text(encoding="utf-8").strip()
    key_points = Path(args.key_points).read_text(encoding="utf-8").strip()
    gt_titles = _read_id_list(args.gt_titles) if args.gt_titles else None
    records = _read_hypothesis_records(args.hypotheses)

    results: list[tuple[dict, MatchedScore, int | None]] = []
    for record in records:
        matched = None
        if gt_titles is not None and record.get("lineage") is not None:
            lineage = tuple(record["lineage"])
            h = Hypothesis(
                id=str(record["id"]), text=str(record["text"]),
                round=len(lineage), lineage=lineage,
            )
            matched = count_matched_inspirations(h, gt_titles)
            used = matched > 0
        else:
            used = bool(record.get("used_gt_inspiration", True))
        score = matched_score(
            gateway, str(record["text"]), gt_hypothesis, key_points, used_gt_inspiration=used
        )
        results.append((record, score, matched))

    top, average = aggregate_ms([score for _, score, _ in results])
    report: dict = {
        "scores": [
            {"id": str(r["id"]), "matched_score": s.display} for r, s, _ in results
        ],
        "top_ms": top,
        "average_ms": average,
    }

    # rank-ratio tables when the input is a full ranking
    rank_tables = []
    if all("rank" in r for r, _, _ in results):
        population = len(results)
        by_ms = bucket_rank_ratios(
            [(int(r["rank"]), s.display) for r, s, _ in results], population
        )
        rank_tables.append(("matched score", by_ms))
        report["rank_ratio_by_ms"] = by_ms.to_dict()
        if gt_titles is not None and all(m is not None for _, _, m in results):
            by_matched = bucket_rank_ratios(
                [(int(r["rank"]), m) for r, _, m in results], population
            )
            rank_tables.append(("#matched inspirations", by_matched))
            report["rank_ratio_by_matched"] = by_matched.to_dict()

    out = Path(args.out) if args.out else run_dir / "matched_scores.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    manifest.finish(
        counts={
            "judged": len(results),
            "top_ms": top,
            "average_ms": average,
            "gateway": gateway.stats.to_dict(),
        }
    )
    manifest.write(run_dir)
    print(f"eval-ms: {len(results)} hypotheses judged; top {top}, average {average:.3f}")
    for record, score, matched in results:
        extra = f" (#matched {matched})" if matched is not None else ""
        print(f"  {record['id']}: {score.display}{extra}")
    for label, table in rank_tables:
        print(f"  mean rank ratio by {label} (lower is better):")
        for key in sorted(table.buckets, reverse=True):
            bucket = table.buckets[key]
            print(f"    {key:>3}: {bucket.mean_rank_ratio:.3f}  (n={bucket.size})")
    print(f"  report: {out}")
    return EXIT_OK


# ------------------------------------------------------------ corpus-build


def _cmd_corpus_build(args) -> int:
    run_dir = Path(args.run_dir) if args.run_dir else _default_run_dir("corpus-build")
    gt_corpus = load_corpus(args.gt)
    pool = load_corpus(args.pool)
    corpus = build_eval_corpus(
        list(gt_corpus.entries), list(pool.entries), args.size, args.seed
    )
    out = Path(args.out)
    sidecar = write_eval_corpus(corpus, gt_corpus.ids(), args.size, out)
    collisions = gt_window_collisions(corpus, gt_corpus.ids(), args.window_size)
    manifest = RunManifest(command="corpus-build", config_digest="-", provider="-", seed=args.seed)
    manifest.finish(
        counts={
            "gt": len(gt_corpus),
            "size": len(corpus),
            "gt_window_collisions": collisions,
        }
    )
    manifest.write(run_dir)
    print(f"corpus-build: {len(corpus)} papers ({len(gt_corpus)} ground truth), seed {args.seed}")
    if collisions:
        print(
            f"  note: windows {collisions} hold more than one ground-truth paper "
            f"(window size {args.window_size}); per-window keep caps apply"
        )
    print(f"  corpus:  {out}")
    print(f"  sidecar: {sidecar}")
    return EXIT_OK


# ------------------------------------------------------------------- main


class UsageConflict(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypoforge",
        description="Generate and evaluate research hypotheses from a background and a literature corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    discover = sub.add_parser("discover", help="run the full multi-round discovery pipeline")
    discover.add_argument("--background", required=True, help="background JSON file")
    discover.add_argument("--corpus", required=True, help="corpus JSONL file")
    discover.add_argument("--rounds", type=_positive_int, default=3, help="inspiration rounds")
    discover.add_argument("--beam", type=_positive_int, default=15, help="beam size between rounds")
    discover.add_argument("--window-size", type=_positive_int, default=15)
    discover.add_argument("--keep-per-window", type=_positive_int, default=3)
    discover.add_argument("--passes", type=_positive_int, default=1, help="screening passes per round")
    discover.add_argument("--mutations", type=_positive_int, default=None, help="mutation drafts per pair")
    discover.add_argument("--refine-iterations", type=int, default=None, help="critique/refine cycles per mutation")
    discover.add_argument("--no-eu", action="store_true", help="disable the evolutionary unit")
    discover.add_argument("--no-direct-branch", action="store_true", help="disable the single-shot branch")
    discover.add_argument("--no-significance-feedback", action="store_true", help="drop significance from critique aspects")
    discover.add_argument("--seed", type=int, default=0, help="run seed recorded in the manifest")
    discover.add_argument("--screen-call-budget", type=_positive_int, default=None, help="max screening calls per round")
    discover.add_argument("--resume", help="checkpoint file to resume from")
    discover.add_argument("--out", help="ranked list output path")
    _add_provider_options(discover)
    _add_run_dir_option(discover)
    discover.set_defaults(handler=_cmd_discover)

    screen = sub.add_parser("screen", help="screen a corpus for inspiration candidates")
    screen.add_argument("--background", required=True)
    screen.add_argument("--corpus", required=True)
    screen.add_argument("--window-size", type=_positive_int, default=15)
    screen.add_argument("--keep-per-window", type=_positive_int, default=3)
    screen.add_argument("--passes", type=_positive_int, default=1)
    screen.add_argument("--budget", type=_positive_int, default=None, help="max screening calls")
    screen.add_argument("--out", help="selected candidates output path")
    _add_provider_options(screen)
    _add_run_dir_option(screen)
    screen.set_defaults(handler=_cmd_screen)

    rank_p = sub.add_parser("rank", help="rate and rank hypothesis records")
    rank_p.add_argument("--hypotheses", required=True, help="JSONL of {id, text} records")
    rank_p.add_argument("--beam", type=_positive_int, default=None, help="truncate output to top N")
    rank_p.add_argument("--out", help="ranked list output path")
    _add_provider_options(rank_p)
    _add_run_dir_option(rank_p)
    rank_p.set_defaults(handler=_cmd_rank)

    hr = sub.add_parser("eval-hitratio", help="hit ratio of selections against ground truth")
    hr.add_argument("--selected", help="JSONL/plain file of selected ids or titles")
    hr.add_argument("--gt", help="JSONL/plain file of ground-truth ids or titles")
    hr.add_argument("--runs", help="JSONL of {selected, gt} records, one entry per line")
    hr.add_argument("--out", help="report output path")
    _add_run_dir_option(hr)
    hr.set_defaults(handler=_cmd_eval_hitratio)

    ms = sub.add_parser("eval-ms", help="judge hypotheses against a reference (matched score)")
    ms.add_argument("--hypotheses", required=True, help="JSONL of {id, text} records")
    ms.add_argument("--gt-hypothesis", required=True, help="text file with the reference hypothesis")
    ms.add_argument("--key-points", required=True, help="text file with the reference key points")
    ms.add_argument("--gt-titles", help="file of ground-truth inspiration titles; derives the -1 sentinel from lineage")
    ms.add_argument("--out", help="report output path")
    _add_provider_options(ms)
    _add_run_dir_option(ms)
    ms.set_defaults(handler=_cmd_eval_ms)

    cb = sub.add_parser("corpus-build", help="mix ground truth and distractors into an eval corpus")
    cb.add_argument("--gt", required=True, help="ground-truth corpus JSONL")
    cb.add_argument("--pool", required=True, help="distractor pool JSONL")
    cb.add_argument("--size", type=_positive_int, required=True, help="target corpus size")
    cb.add_argument("--seed", type=int, required=True, help="sampling/shuffle seed")
    cb.add_argument("--out", required=True, help="corpus output path")
    cb.add_argument("--window-size", type=_positive_int, default=15, help="window size used for the collision note")
    _add_run_dir_option(cb)
    cb.set_defaults(handler=_cmd_corpus_build)

    return parser


def _emit_error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit": code}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageConflict as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProviderError as exc:
        return _emit_error("provider", str(exc), EXIT_PROVIDER)
    except _DATA_ERRORS as exc:
        return _emit_error(type(exc).__name__, str(exc), EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
