import pytest

from helpers import make_outcome

from rdolt.errors import ConfigError, OutOfRangeError, TotalMismatchError
from rdolt.kpm import record_round
from rdolt.model import (
    KpmState,
    RoundOutcome,
    RunConfig,
    ScoreVector,
    ScorerMode,
    Task,
    Thought,
    ThoughtStatus,
    Tier,
    default_run_config,
    validate_score_vector,
)


class TestDefaults:
    def test_sampling_parameters(self):
        config = default_run_config()
        assert config.temperature == 0.4
        assert config.max_context_tokens == 8192

    def test_thoughts_per_level(self):
        assert default_run_config().n_thoughts == 3

    def test_threshold_reproduces_transcript_partition(self):
        # totals 39/34 selected and 20 rejected under the default threshold
        config = default_run_config()
        assert config.threshold == 30
        assert [total >= config.threshold for total in (39, 34, 20)] == [True, True, False]

    def test_other_defaults(self):
        config = default_run_config()
        assert config.regen_cap == 3
        assert config.scorer_mode is ScorerMode.JUDGE
        assert config.variant is None

    def test_validation_rejects_bad_threshold(self):
        with pytest.raises(ConfigError):
            RunConfig(threshold=45).validate()
        with pytest.raises(ConfigError):
            RunConfig(threshold=-1).validate()
        with pytest.raises(ConfigError):
            RunConfig(n_thoughts=0).validate()


class TestScoreVector:
    def test_appendix_vector_is_valid(self):
        v = ScoreVector(10, 9, 10, 10, 39)
        assert validate_score_vector(v) is v

    def test_zero_vector_is_valid(self):
        validate_score_vector(ScoreVector(0, 0, 0, 0, 0))

    def test_total_mismatch(self):
        with pytest.raises(TotalMismatchError):
            validate_score_vector(ScoreVector(10, 9, 10, 10, 40))

    def test_component_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            validate_score_vector(ScoreVector(11, 9, 10, 10, 40))
        with pytest.raises(OutOfRangeError):
            validate_score_vector(ScoreVector(-1, 9, 10, 10, 28))

    def test_of_computes_total(self):
        assert ScoreVector.of(10, 9, 10, 10).total == 39

    def test_random_vectors_hold_invariants(self):
        import random

        rng = random.Random(7)
        for _ in range(1000):
            parts = [rng.randint(0, 10) for _ in range(4)]
            v = validate_score_vector(ScoreVector.of(*parts))
            assert 0 <= v.total <= 40
            assert v.total == sum(parts)


class TestThought:
    def test_rejects_empty_text(self):
        with pytest.raises(ValueError):
            Thought(id="x", tier=Tier.EASY, round=0, ordinal=1, text="  ")

    def test_status_requires_scores(self):
        with pytest.raises(ValueError):
            Thought(id="x", tier=Tier.EASY, round=0, ordinal=1, text="t",
                    status=ThoughtStatus.SELECTED)

    def test_roundtrip(self):
        t = Thought(id="x", tier=Tier.EASY, round=0, ordinal=1, text="t",
                    scores=ScoreVector.of(1, 2, 3, 4), status=ThoughtStatus.REJECTED)
        assert Thought.from_dict(t.to_dict()) == t


class TestRoundOutcome:
    def test_partition_enforced(self):
        outcome = make_outcome(Tier.EASY, 0, [39, 34, 20], threshold=30)
        ids = {t.id for t in outcome.generated}
        assert set(outcome.selected) | set(outcome.rejected) == ids
        assert not set(outcome.selected) & set(outcome.rejected)

    def test_overlapping_partition_rejected(self):
        good = make_outcome(Tier.EASY, 0, [39, 34, 20], threshold=30)
        with pytest.raises(ValueError):
            RoundOutcome(tier=Tier.EASY, round=0, generated=good.generated,
                         selected=good.selected, rejected=good.selected + good.rejected)

    def test_empty_selection_must_flag_regeneration(self):
        good = make_outcome(Tier.EASY, 0, [10, 10, 10], threshold=30)
        assert good.regenerated
        with pytest.raises(ValueError):
            RoundOutcome(tier=Tier.EASY, round=0, generated=good.generated,
                         selected=(), rejected=tuple(t.id for t in good.generated),
                         regenerated=False)

    def test_roundtrip(self):
        outcome = make_outcome(Tier.FINAL, 1, [39, 20], threshold=30)
        assert RoundOutcome.from_dict(outcome.to_dict()) == outcome


class TestTierOrder:
    def test_exactly_three_ordered_values(self):
        assert list(Tier.ordered()) == [Tier.EASY, Tier.INTERMEDIATE, Tier.FINAL]
        assert Tier.EASY < Tier.INTERMEDIATE < Tier.FINAL
        assert not Tier.FINAL < Tier.EASY


class TestKpmSerialization:
    def test_jsonl_snapshots_are_prefixes(self):
        state = KpmState(run_id="r1")
        snapshots = [state.to_jsonl()]
        for tier in Tier.ordered():
            state = record_round(state, make_outcome(tier, 0, [39, 20], threshold=30))
            snapshots.append(state.to_jsonl())
        final = snapshots[-1]
        for snap in snapshots:
            assert final.startswith(snap)

    def test_roundtrip(self):
        state = KpmState(run_id="r1")
        state = record_round(state, make_outcome(Tier.EASY, 0, [39, 20], threshold=30))
        assert KpmState.from_dict(state.to_dict()) == state


class TestTask:
    def test_statement_required(self):
        with pytest.raises(ValueError):
            Task(id="x", statement="")

    def test_roundtrip(self):
        task = Task(id="x", statement="Q", instructions="X", gold_answer="5",
                    source="gsm8k")
        assert Task.from_dict(task.to_dict()) == task


class TestRunConfigSerialization:
    def test_roundtrip(self):
        config = RunConfig(threshold=35, scorer_mode=ScorerMode.DETERMINISTIC)
        assert RunConfig.from_dict(config.to_dict()) == config
