"""Tests for clarification question rendering: one template per category,
option lists that mirror the domain and always end with the escape hatch."""

import random

import pytest

from sqlclarify import (
    NONE_OF_THESE,
    Answer,
    ClarificationQuestion,
    extract_decision_variables,
    render_question,
)

from .oracles import make_dist, random_sql_instance


def single_variable(*entries):
    variables = extract_decision_variables(make_dist(*entries))
    assert len(variables) == 1
    return variables[0]


class TestQuestionText:
    def test_two_way_condition(self):
        var = single_variable(
            ("a", "select * from t where age > 30", 1),
            ("b", "select * from t where age >= 30", 1),
        )
        question = render_question(var)
        assert question.text == "By 'age', do you mean age > 30 or age >= 30?"

    def test_presence_condition(self):
        var = single_variable(
            ("a", "select * from t where x = 1", 1),
            ("b", "select * from t where x = 1 and y = 2", 1),
        )
        question = render_question(var)
        assert question.variable_id == "where.y"
        assert question.text == "Should the results also satisfy y = 2?"

    def test_star_versus_columns(self, fig3_dist):
        variables = {v.id: v for v in extract_decision_variables(fig3_dist)}
        question = render_question(variables["select.columns"])
        assert question.text == (
            "Should the output include all columns, or only employee_id, name?"
        )

    def test_aggregation(self):
        var = single_variable(
            ("a", "select sum(x) from t", 1),
            ("b", "select avg(x) from t", 1),
        )
        question = render_question(var)
        # order follows first occurrence across candidates
        assert question.text == "Should the output compute sum(x) or avg(x)?"

    def test_plain_column_lists(self):
        var = single_variable(
            ("a", "select x from t", 1),
            ("b", "select x, y from t", 1),
        )
        question = render_question(var)
        assert question.text == "Should the output columns be x or x, y?"

    def test_table_choice(self):
        var = single_variable(
            ("a", "select name from employees", 1),
            ("b", "select name from contractors", 1),
        )
        question = render_question(var)
        assert question.text == "Are you referring to employees or contractors?"

    def test_presence_modifier(self):
        var = single_variable(
            ("a", "select x from t", 1),
            ("b", "select x from t group by x", 1),
        )
        question = render_question(var)
        assert question.text == "Should the output group by x or not?"

    def test_order_by_alternatives(self):
        var = single_variable(
            ("a", "select x from t order by x asc", 1),
            ("b", "select x from t order by x desc", 1),
        )
        question = render_question(var)
        assert question.text == "Should the output be ordered by x asc or x desc?"

    def test_three_way_oxford_join(self):
        var = single_variable(
            ("a", "select * from t where x = 1", 1),
            ("b", "select * from t where x = 2", 1),
            ("c", "select * from t where x = 3", 1),
        )
        question = render_question(var)
        assert question.text == "By 'x', do you mean x = 1, x = 2 or x = 3?"


class TestOptions:
    def test_options_mirror_domain_then_escape(self, fig3_dist):
        for var in extract_decision_variables(fig3_dist):
            question = render_question(var)
            values = [value for value, _ in question.options]
            assert values == list(var.domain) + [NONE_OF_THESE]

    def test_escape_display_string(self, fig3_dist):
        var = extract_decision_variables(fig3_dist)[0]
        question = render_question(var)
        assert question.options[-1] == (NONE_OF_THESE, "None of these")

    def test_domain_options_display_verbatim(self, fig3_dist):
        for var in extract_decision_variables(fig3_dist):
            for value, display in render_question(var).options[:-1]:
                assert value == display

    @pytest.mark.parametrize("seed", range(15))
    def test_always_at_least_two_options(self, seed):
        dist = random_sql_instance(random.Random(seed))
        for var in extract_decision_variables(dist):
            question = render_question(var)
            assert len(question.options) >= 2
            assert question.options[-1][0] == NONE_OF_THESE

    def test_option_values_helper(self, fig3_dist):
        var = extract_decision_variables(fig3_dist)[0]
        question = render_question(var)
        assert question.option_values() == set(var.domain) | {NONE_OF_THESE}


class TestValidation:
    def test_rejects_single_option(self):
        with pytest.raises(ValueError):
            ClarificationQuestion(
                variable_id="where.x",
                text="?",
                options=((NONE_OF_THESE, "None of these"),),
            )

    def test_rejects_missing_escape(self):
        with pytest.raises(ValueError):
            ClarificationQuestion(
                variable_id="where.x",
                text="?",
                options=(("x = 1", "x = 1"), ("x = 2", "x = 2")),
            )

    def test_answer_is_plain_record(self):
        answer = Answer(variable_id="where.x", chosen=NONE_OF_THESE)
        assert answer.chosen == NONE_OF_THESE
