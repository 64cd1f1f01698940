"""Tests for the clarification session state machine: stop conditions,
answer filtering, single- versus multi-turn behavior, and transcripts."""

import json

import pytest

from sqlclarify import (
    NONE_OF_THESE,
    Answer,
    Failed,
    Finished,
    InconsistentAnswer,
    InteractionMode,
    QuestionIssued,
    SelectionStrategy,
    SessionConfig,
    SessionFailed,
    SessionState,
    SessionStatus,
    StopReason,
    StrategyKind,
    ValidationError,
    apply_answer,
    exact_set_match,
    instance_distribution,
    run_session,
    slot_value,
    step,
    tokenize_sql,
)

from .oracles import make_dist

EIG = SelectionStrategy(StrategyKind.EXPECTED_INFO_GAIN)


def eig_config(**overrides):
    return SessionConfig(strategy=EIG, **overrides)


def gold_user(instance):
    """Answer from the recorded intent; fall back to the escape option."""

    def answer(question):
        gold = tokenize_sql(instance.gold_sql)
        value = slot_value(gold, question.variable_id)
        if value in question.option_values():
            return Answer(variable_id=question.variable_id, chosen=value)
        return Answer(variable_id=question.variable_id, chosen=NONE_OF_THESE)

    return answer


def presence_pair():
    """One bare filter plus one with an extra conjunct: a presence variable."""
    return make_dist(
        ("a", "select * from t where x = 1", 3),
        ("b", "select * from t where x = 1 and y = 2", 1),
    )


class TestStopReasons:
    def test_threshold_after_two_turns(self, fig3_dist):
        """Gold answers resolve the walkthrough in two questions."""
        state = SessionState(eig_config(), fig3_dist)

        outcome = step(state)
        assert isinstance(outcome, QuestionIssued)
        assert outcome.question.variable_id == "select.columns"
        apply_answer(state, Answer("select.columns", "employee_id, name"))

        outcome = step(state)
        assert outcome.question.variable_id == "where.join_date"
        apply_answer(state, Answer("where.join_date", "join_date > '2020-01-01'"))

        outcome = step(state)
        assert isinstance(outcome, Finished)
        assert outcome.reason == StopReason.THRESHOLD
        assert outcome.candidate.id == "c02"
        assert state.turns_used == 2

    def test_threshold_immediately_at_exact_tau(self, fig3_dist):
        """tau equal to the top mass finishes without asking anything."""
        state = SessionState(eig_config(confidence_threshold=0.4), fig3_dist)
        outcome = step(state)
        assert isinstance(outcome, Finished)
        assert outcome.reason == StopReason.THRESHOLD
        assert outcome.candidate.id == "c01"
        assert state.turns_used == 0

    def test_no_variables(self):
        """Reordered conjuncts diverge nowhere, so nothing can be asked."""
        dist = make_dist(
            ("a", "select * from t where x = 1 and y = 2", 2),
            ("b", "select * from t where y = 2 and x = 1", 1),
        )
        state = SessionState(eig_config(confidence_threshold=1.0), dist)
        outcome = step(state)
        assert isinstance(outcome, Finished)
        assert outcome.reason == StopReason.NO_VARIABLES
        assert outcome.candidate.id == "a"

    def test_variables_exhausted(self):
        """A confirmed presence answer cannot prune the bare candidate, so
        the only variable stays divergent but is no longer askable."""
        state = SessionState(eig_config(confidence_threshold=1.0), presence_pair())
        outcome = step(state)
        assert outcome.question.variable_id == "where.y"
        apply_answer(state, Answer("where.y", "y = 2"))
        outcome = step(state)
        assert isinstance(outcome, Finished)
        assert outcome.reason == StopReason.VARIABLES_EXHAUSTED
        assert outcome.candidate.id == "a"
        assert state.turns_used == 1

    def test_budget_exhausted(self, fig3_dist):
        state = SessionState(
            eig_config(confidence_threshold=1.0, max_turns=1), fig3_dist
        )
        apply_answer_first = step(state)
        apply_answer(
            state, Answer(apply_answer_first.question.variable_id, "employee_id, name")
        )
        outcome = step(state)
        assert isinstance(outcome, Finished)
        assert outcome.reason == StopReason.BUDGET_EXHAUSTED
        # c02 and c04 tie at 0.5; the id breaks the tie
        assert outcome.candidate.id == "c02"


class TestStepMechanics:
    def test_pending_question_reissued(self, fig3_dist):
        state = SessionState(eig_config(), fig3_dist)
        first = step(state)
        second = step(state)
        assert isinstance(second, QuestionIssued)
        assert second.question == first.question
        assert len(state.transcript.turns) == 1

    def test_finished_is_absorbing(self, fig3_dist):
        state = SessionState(eig_config(confidence_threshold=0.4), fig3_dist)
        first = step(state)
        again = step(state)
        assert isinstance(again, Finished)
        assert again.candidate.id == first.candidate.id
        assert state.status == SessionStatus.FINISHED

    def test_turn_recorded_at_issue(self, fig3_dist):
        state = SessionState(eig_config(), fig3_dist)
        step(state)
        turn = state.transcript.turns[0]
        assert turn.answer is None
        assert turn.post_entropy is None


class TestApplyAnswerValidation:
    def test_answer_without_question(self, fig3_dist):
        state = SessionState(eig_config(), fig3_dist)
        with pytest.raises(ValidationError):
            apply_answer(state, Answer("select.columns", "*"))

    def test_wrong_variable(self, fig3_dist):
        state = SessionState(eig_config(), fig3_dist)
        step(state)
        with pytest.raises(ValidationError):
            apply_answer(state, Answer("where.department", "department = 'sales'"))

    def test_unoffered_option(self, fig3_dist):
        state = SessionState(eig_config(), fig3_dist)
        step(state)
        with pytest.raises(ValidationError):
            apply_answer(state, Answer("select.columns", "name"))

    def test_state_unchanged_after_rejection(self, fig3_dist):
        state = SessionState(eig_config(), fig3_dist)
        issued = step(state)
        with pytest.raises(ValidationError):
            apply_answer(state, Answer("select.columns", "name"))
        assert state.turns_used == 0
        assert state.status == SessionStatus.AWAITING_ANSWER
        assert step(state).question == issued.question


class TestInconsistentAnswer:
    def test_escape_on_complete_variable_fails(self, fig3_dist):
        """Every candidate names columns, so 'none of these' empties the set."""
        state = SessionState(eig_config(), fig3_dist)
        step(state)
        with pytest.raises(InconsistentAnswer):
            apply_answer(state, Answer("select.columns", NONE_OF_THESE))
        assert state.status == SessionStatus.FAILED
        assert "select.columns" in state.failure_reason
        assert state.transcript.stop_reason == StopReason.FAILED.value
        outcome = step(state)
        assert isinstance(outcome, Failed)

    def test_run_session_surfaces_failure(self, fig3_dist):
        def contrarian(question):
            return Answer(question.variable_id, NONE_OF_THESE)

        with pytest.raises(SessionFailed) as err:
            run_session(eig_config(), fig3_dist, contrarian)
        assert err.value.transcript.stop_reason == StopReason.FAILED.value


class TestRetentionSemantics:
    def test_confirmed_presence_keeps_unaffected(self):
        """Choosing the defined value cannot eliminate candidates that never
        mention the slot."""
        state = SessionState(eig_config(confidence_threshold=1.0), presence_pair())
        step(state)
        apply_answer(state, Answer("where.y", "y = 2"))
        assert {c.id for c in state.current} == {"a", "b"}
        assert state.current.by_id("a").probability == pytest.approx(0.75)

    def test_escape_keeps_only_unaffected(self):
        state = SessionState(eig_config(confidence_threshold=1.0), presence_pair())
        step(state)
        apply_answer(state, Answer("where.y", NONE_OF_THESE))
        assert [c.id for c in state.current] == ["a"]
        outcome = step(state)
        assert isinstance(outcome, Finished)
        assert outcome.reason == StopReason.THRESHOLD


class TestInteractionModes:
    def answers(self):
        return [
            Answer("select.columns", "employee_id, name"),
            Answer("where.join_date", "join_date > '2020-01-01'"),
        ]

    def test_multi_turn_intersects_answers(self, fig3_dist):
        state = SessionState(eig_config(confidence_threshold=1.0), fig3_dist)
        for answer in self.answers():
            issued = step(state)
            assert issued.question.variable_id == answer.variable_id
            apply_answer(state, answer)
        assert [c.id for c in state.current] == ["c02"]

    def test_single_turn_keeps_only_latest_answer(self, fig3_dist):
        """Each answer refilters the original pool, discarding history."""
        config = eig_config(
            confidence_threshold=1.0, mode=InteractionMode.SINGLE_TURN
        )
        state = SessionState(config, fig3_dist)
        for answer in self.answers():
            issued = step(state)
            assert issued.question.variable_id == answer.variable_id
            apply_answer(state, answer)
        # the dates filter alone keeps c01 and c02 from the original four
        assert {c.id for c in state.current} == {"c01", "c02"}
        assert state.current.by_id("c01").probability == pytest.approx(2 / 3)

    def test_single_turn_can_reask(self, fig3_dist):
        """Without the asked-set exclusion a variable may repeat."""
        config = eig_config(
            confidence_threshold=1.0, mode=InteractionMode.SINGLE_TURN, max_turns=6
        )
        state = SessionState(config, fig3_dist)
        seen = []
        for _ in range(4):
            outcome = step(state)
            if not isinstance(outcome, QuestionIssued):
                break
            seen.append(outcome.question.variable_id)
            apply_answer(
                state, Answer(outcome.question.variable_id, outcome.question.options[0][0])
            )
        assert len(seen) > len(set(seen))


class TestRunSession:
    def test_fig3_gold_walkthrough(self, fig3_instance, fig3_dist):
        final_sql, transcript = run_session(
            eig_config(), fig3_dist, gold_user(fig3_instance)
        )
        assert exact_set_match(tokenize_sql(final_sql), tokenize_sql(fig3_instance.gold_sql))
        assert transcript.stop_reason == StopReason.THRESHOLD.value
        assert [t.question.variable_id for t in transcript.turns] == [
            "select.columns",
            "where.join_date",
        ]
        assert transcript.entropy_trace == pytest.approx(
            [1.9219280948873623, 1.0, 0.0], abs=1e-9
        )

    @pytest.mark.parametrize("index", range(5))
    def test_corpus_smoke(self, corpus, index):
        instance = corpus[index]
        config = eig_config(confidence_threshold=1.0, max_turns=10)
        final_sql, transcript = run_session(
            config, instance_distribution(instance), gold_user(instance)
        )
        assert exact_set_match(
            tokenize_sql(final_sql), tokenize_sql(instance.gold_sql)
        )
        assert len(transcript.turns) <= 10


class TestTranscript:
    def test_trace_starts_at_prior_entropy(self, fig3_dist):
        state = SessionState(eig_config(), fig3_dist)
        assert state.transcript.entropy_trace == pytest.approx(
            [1.9219280948873623]
        )

    def test_to_dict_shape(self, fig3_instance, fig3_dist):
        _, transcript = run_session(
            eig_config(), fig3_dist, gold_user(fig3_instance)
        )
        payload = transcript.to_dict()
        assert set(payload) == {
            "question",
            "config",
            "entropy_trace",
            "turns",
            "final_sql",
            "final_candidate_id",
            "stop_reason",
        }
        assert payload["config"]["strategy"] == "EXPECTED_INFO_GAIN"
        assert payload["final_candidate_id"] == "c02"
        turn = payload["turns"][0]
        assert turn["answer"] == "employee_id, name"
        assert turn["survivor_count"] == 2
        json.dumps(payload)  # must be serializable as-is

    def test_to_dict_handles_unanswered_turn(self, fig3_dist):
        state = SessionState(eig_config(), fig3_dist)
        step(state)
        turn = state.transcript.to_dict()["turns"][0]
        assert turn["answer"] is None
        assert turn["post_entropy"] is None

    def test_serialization_is_deterministic(self, fig3_instance, fig3_dist):
        def run_once():
            _, transcript = run_session(
                eig_config(), fig3_dist, gold_user(fig3_instance)
            )
            return json.dumps(transcript.to_dict(), sort_keys=True)

        assert run_once() == run_once()


class TestConfigValidation:
    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            eig_config(confidence_threshold=0.0)
        with pytest.raises(ValueError):
            eig_config(confidence_threshold=1.1)
        assert eig_config(confidence_threshold=1.0).confidence_threshold == 1.0

    def test_max_turns_bound(self):
        with pytest.raises(ValueError):
            eig_config(max_turns=0)
