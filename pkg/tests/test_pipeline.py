import pytest

from hypoforge import (
    ConfigMismatchError,
    DecodingParams,
    EvolutionConfig,
    PipelineConfig,
    PipelineError,
    PipelineState,
    ScreeningConfig,
    final_ranked_list,
    load_checkpoint,
    run,
    run_round,
    save_checkpoint,
)
from hypoforge.corpus import Corpus
from hypoforge.pipeline import _budget_shares, ranked_list_bytes

from conftest import make_corpus, make_gateway


def small_cfg(**overrides) -> PipelineConfig:
    base = dict(
        rounds=3,
        beam=5,
        screening=ScreeningConfig(window_size=15, keep_per_window=3, passes=1),
        evolution=EvolutionConfig(),
        decoding=DecodingParams(temperature=0.0, provider_model_name="test"),
        run_seed=7,
    )
    base.update(overrides)
    return PipelineConfig(**base)


class TestPipelineConfig:
    def test_rounds_positive(self):
        with pytest.raises(ValueError):
            small_cfg(rounds=0)

    def test_digest_sensitive_to_beam(self):
        assert small_cfg(beam=5).digest() != small_cfg(beam=6).digest()

    def test_digest_ignores_concurrency(self):
        assert small_cfg(concurrency=1).digest() == small_cfg(concurrency=8).digest()

    def test_roundtrip(self):
        cfg = small_cfg()
        assert PipelineConfig.from_dict(cfg.to_dict()).digest() == cfg.digest()


class TestRunRound:
    def test_two_inspirations_give_ten_hypotheses(self, background, offline_gateway):
        # a 2-paper corpus yields one short window; both papers selected
        cfg = small_cfg(rounds=1)
        state = PipelineState.initial(cfg)
        state = run_round(offline_gateway, state, background, make_corpus(2), cfg)
        stats = state.round_stats[0]
        assert stats.inspirations_selected == 2
        assert stats.hypotheses_generated == 10  # 2 pairs x 5 branches
        assert len(state.beam_hypotheses) == 5  # beam bound

    def test_sixty_candidates_fifteen_survive(self, background, offline_gateway):
        # 3 beam parents x 4 fresh inspirations x 5 outputs = 60 -> beam 15
        cfg = small_cfg(rounds=2, beam=3)
        state = PipelineState.initial(cfg)
        state = run_round(offline_gateway, state, background, make_corpus(3, prefix="R1"), cfg)
        assert len(state.beam_hypotheses) == 3
        # two windows of two keeping two each => four inspirations per parent
        cfg15 = small_cfg(
            rounds=2, beam=15, screening=ScreeningConfig(window_size=2, keep_per_window=2)
        )
        state = PipelineState(
            round=state.round,
            beam_hypotheses=state.beam_hypotheses,
            all_hypotheses=state.all_hypotheses,
            config_digest=cfg15.digest(),
            round_stats=state.round_stats,
        )
        state = run_round(offline_gateway, state, background, make_corpus(4, prefix="R2"), cfg15)
        stats = state.round_stats[-1]
        assert stats.pairs_expanded == 12
        assert stats.hypotheses_generated == 60
        assert len(state.beam_hypotheses) == 15

    def test_round_past_limit_rejected(self, background, offline_gateway):
        cfg = small_cfg(rounds=1)
        state = PipelineState.initial(cfg)
        state = run_round(offline_gateway, state, background, make_corpus(2), cfg)
        with pytest.raises(PipelineError):
            run_round(offline_gateway, state, background, make_corpus(2), cfg)

    def test_dead_provider_raises_provider_error(self, background):
        from hypoforge import ProviderError, ScriptedProvider

        def dead(prompt, params):
            raise ProviderError("down")

        gateway = make_gateway(ScriptedProvider(dead), max_retries=0)
        cfg = small_cfg(rounds=1)
        with pytest.raises(ProviderError, match="no hypotheses"):
            run_round(gateway, PipelineState.initial(cfg), background, make_corpus(6), cfg)

    def test_unusable_responses_are_pipeline_error(self, background):
        from hypoforge import ScriptedProvider

        # provider answers but never names a real title: zero pairs, no
        # provider failures
        gateway = make_gateway(ScriptedProvider(lambda *_: "Title: Not A Real Paper | Reason: x"))
        cfg = small_cfg(rounds=1)
        with pytest.raises(PipelineError, match="no hypotheses"):
            run_round(gateway, PipelineState.initial(cfg), background, make_corpus(6), cfg)


class TestRun:
    def test_three_rounds_lineage(self, background, offline_gateway):
        cfg = small_cfg()
        ranked, state = run(offline_gateway, background, make_corpus(20), cfg)
        assert state.round == 3
        assert len(ranked) > 0
        for entry in ranked:
            assert len(entry.hypothesis.lineage) == 3
            assert len(set(entry.hypothesis.lineage)) == 3

    def test_single_round_ablation(self, background, offline_gateway):
        cfg = small_cfg(rounds=1)
        ranked, state = run(offline_gateway, background, make_corpus(10), cfg)
        assert state.round == 1
        assert all(len(e.hypothesis.lineage) == 1 for e in ranked)

    def test_no_eu_single_round_shape(self, background, offline_gateway):
        cfg = small_cfg(rounds=1, evolution=EvolutionConfig(enable_eu=False))
        ranked, state = run(offline_gateway, background, make_corpus(10), cfg)
        assert all(e.hypothesis.branch == "direct" for e in ranked)
        stats = state.round_stats[0]
        assert stats.hypotheses_generated == stats.pairs_expanded

    def test_log_is_superset_of_final(self, background, offline_gateway):
        cfg = small_cfg(rounds=2)
        ranked, state = run(offline_gateway, background, make_corpus(8), cfg)
        logged = {h.id for h, _ in state.all_hypotheses}
        assert {e.hypothesis.id for e in ranked} <= logged

    def test_beam_bound_every_round(self, background, offline_gateway):
        cfg = small_cfg(rounds=3, beam=4)
        _, state = run(offline_gateway, background, make_corpus(12), cfg)
        assert all(
            len(state.hypotheses_at(r)) >= 1 for r in (1, 2, 3)
        )
        assert len(state.beam_hypotheses) <= 4

    def test_empty_corpus_rejected(self, background, offline_gateway):
        with pytest.raises(PipelineError, match="empty"):
            run(offline_gateway, background, Corpus(()), small_cfg())

    def test_determinism_two_fresh_runs(self, background):
        cfg = small_cfg(rounds=2)
        first, _ = run(make_gateway(), background, make_corpus(9), cfg)
        second, _ = run(make_gateway(), background, make_corpus(9), cfg)
        assert ranked_list_bytes(first) == ranked_list_bytes(second)

    def test_screen_call_budget_caps_calls(self, background, offline_gateway):
        cfg = small_cfg(rounds=1, max_screen_calls_per_round=2)
        _, state = run(offline_gateway, background, make_corpus(90), cfg)
        assert state.round_stats[0].screening_calls <= 2
        assert any("budget" in w for w in state.warnings)

    def test_budget_shared_round_robin(self):
        assert _budget_shares(7, 3) == [3, 2, 2]
        assert _budget_shares(None, 3) == [None, None, None]
        assert _budget_shares(2, 4) == [1, 1, 0, 0]


class TestCheckpointResume:
    def test_resume_equivalence(self, background, tmp_path):
        cfg = small_cfg(rounds=3)
        corpus = make_corpus(9)
        uninterrupted, _ = run(make_gateway(), background, corpus, cfg)

        gateway = make_gateway()
        state = PipelineState.initial(cfg)
        state = run_round(gateway, state, background, corpus, cfg)
        path = save_checkpoint(state, tmp_path / "round1.json")

        resumed_state = load_checkpoint(path, cfg)
        resumed, _ = run(
            make_gateway(), background, corpus, cfg, initial_state=resumed_state
        )
        assert ranked_list_bytes(resumed) == ranked_list_bytes(uninterrupted)

    def test_altered_beam_rejected(self, background, tmp_path):
        cfg = small_cfg(rounds=2)
        gateway = make_gateway()
        state = run_round(
            gateway, PipelineState.initial(cfg), background, make_corpus(6), cfg
        )
        path = save_checkpoint(state, tmp_path / "c.json")
        with pytest.raises(ConfigMismatchError, match="digest"):
            load_checkpoint(path, small_cfg(rounds=2, beam=9))

    def test_resume_of_final_state_is_immediate(self, background, tmp_path):
        cfg = small_cfg(rounds=2)
        _, final_state = run(make_gateway(), background, make_corpus(6), cfg)
        path = save_checkpoint(final_state, tmp_path / "final.json")

        from hypoforge import ScriptedProvider

        silent = ScriptedProvider({}, name="must-not-be-called")
        gateway = make_gateway(silent)
        ranked, state = run(
            gateway, background, make_corpus(6), cfg,
            initial_state=load_checkpoint(path, cfg),
        )
        assert silent.calls == 0
        assert ranked_list_bytes(ranked) == ranked_list_bytes(final_ranked_list(state, cfg))

    def test_checkpoint_version_guard(self, background, tmp_path):
        import json

        cfg = small_cfg()
        state = PipelineState.initial(cfg)
        path = save_checkpoint(state, tmp_path / "c.json")
        data = json.loads(path.read_text())
        data["version"] = 99
        path.write_text(json.dumps(data))
        with pytest.raises(ConfigMismatchError, match="version"):
            load_checkpoint(path, cfg)

    def test_run_writes_checkpoints_and_ranked(self, background, tmp_path):
        cfg = small_cfg(rounds=2)
        run(make_gateway(), background, make_corpus(6), cfg, run_dir=tmp_path)
        assert (tmp_path / "checkpoints" / "round_01.json").exists()
        assert (tmp_path / "checkpoints" / "round_02.json").exists()
        assert (tmp_path / "ranked.jsonl").exists()

    def test_mismatched_initial_state_rejected(self, background, offline_gateway):
        cfg_a = small_cfg(rounds=2)
        cfg_b = small_cfg(rounds=3)
        state = PipelineState.initial(cfg_a)
        with pytest.raises(ConfigMismatchError):
            run(offline_gateway, background, make_corpus(6), cfg_b, initial_state=state)
