"""Tests for fixture loading: eager validation with pinpointed errors,
serialization round-trips, and the bundled data files."""

import json

import pytest

from sqlclarify import (
    FormatError,
    ValidationError,
    bundled_path,
    dumps_fixtures,
    instance_distribution,
    instance_to_dict,
    load_bundled,
    load_fixtures,
    loads_fixtures,
)


def minimal_instance(**overrides):
    obj = {
        "instance_id": "t01",
        "question": "how many widgets?",
        "schema": {
            "tables": [
                {
                    "name": "widgets",
                    "columns": [{"name": "id", "type": "INTEGER"}],
                    "foreign_keys": [],
                }
            ]
        },
        "candidates": [
            {"sql_text": "select count(*) from widgets", "weight": 3},
            {"sql_text": "select id from widgets", "weight": 1},
        ],
        "gold_sql": "select count(*) from widgets",
    }
    obj.update(overrides)
    return obj


def loads_one(**overrides):
    return loads_fixtures(json.dumps([minimal_instance(**overrides)]))[0]


class TestLoading:
    def test_minimal_document(self):
        instance = loads_one()
        assert instance.instance_id == "t01"
        assert len(instance.candidates) == 2
        assert instance.difficulty is None
        assert instance.database == {}

    def test_duplicate_instance_ids_rejected(self):
        doc = json.dumps([minimal_instance(), minimal_instance()])
        with pytest.raises(ValidationError) as err:
            loads_fixtures(doc)
        assert err.value.field == "instance_id"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            load_fixtures(tmp_path / "absent.json")

    def test_file_round_trip(self, tmp_path, corpus):
        path = tmp_path / "copy.json"
        path.write_text(dumps_fixtures(corpus), encoding="utf-8")
        again = load_fixtures(path)
        assert [i.instance_id for i in again] == [i.instance_id for i in corpus]


class TestFormatErrors:
    @pytest.mark.parametrize(
        "text",
        ["", "   ", "{not json", '{"instances": []}', '"just a string"'],
    )
    def test_structurally_broken_documents(self, text):
        with pytest.raises(FormatError):
            loads_fixtures(text)

    def test_non_object_entry(self):
        with pytest.raises(FormatError):
            loads_fixtures('["oops"]')


class TestValidationErrors:
    def test_missing_question(self):
        obj = minimal_instance()
        del obj["question"]
        with pytest.raises(ValidationError) as err:
            loads_fixtures(json.dumps([obj]))
        assert err.value.instance_id == "t01"
        assert err.value.field == "question"

    def test_unparseable_candidate_points_at_entry(self):
        with pytest.raises(ValidationError) as err:
            loads_one(
                candidates=[
                    {"sql_text": "select count(*) from widgets", "weight": 1},
                    {"sql_text": "drop table widgets", "weight": 1},
                ]
            )
        assert err.value.field == "candidates[1]"

    def test_unparseable_gold(self):
        with pytest.raises(ValidationError) as err:
            loads_one(gold_sql="select")
        assert err.value.field == "gold_sql"

    def test_negative_weight(self):
        with pytest.raises(ValidationError) as err:
            loads_one(
                candidates=[{"sql_text": "select id from widgets", "weight": -1}]
            )
        assert err.value.field == "candidates[0]"

    def test_all_zero_weights(self):
        with pytest.raises(ValidationError) as err:
            loads_one(
                candidates=[
                    {"sql_text": "select id from widgets", "weight": 0},
                    {"sql_text": "select count(*) from widgets", "weight": 0},
                ]
            )
        assert err.value.field == "candidates"

    def test_candidate_entry_shape(self):
        with pytest.raises(ValidationError) as err:
            loads_one(candidates=[{"sql": "select id from widgets"}])
        assert err.value.field == "candidates[0]"

    def test_unknown_table_reference(self):
        with pytest.raises(ValidationError) as err:
            loads_one(
                candidates=[
                    {"sql_text": "select id from widgets", "weight": 1},
                    {"sql_text": "select id from gadgets", "weight": 1},
                ]
            )
        assert err.value.field == "candidates[1]"
        assert "gadgets" in str(err.value)

    def test_database_for_unknown_table(self):
        with pytest.raises(ValidationError) as err:
            loads_one(database={"gadgets": [[1]]})
        assert err.value.field == "database"

    def test_bad_difficulty(self):
        with pytest.raises(ValidationError) as err:
            loads_one(difficulty="impossible")
        assert err.value.field == "difficulty"

    def test_missing_instance_id(self):
        obj = minimal_instance()
        del obj["instance_id"]
        with pytest.raises(ValidationError):
            loads_fixtures(json.dumps([obj]))


class TestSerialization:
    def test_dumps_is_a_fixed_point(self, corpus):
        once = dumps_fixtures(corpus)
        assert dumps_fixtures(loads_fixtures(once)) == once

    def test_instance_to_dict_shape(self, fig3_instance):
        payload = instance_to_dict(fig3_instance)
        assert payload["instance_id"] == "fig3"
        assert {"instance_id", "question", "schema", "candidates", "gold_sql"} <= set(
            payload
        )
        assert payload["candidates"][0]["weight"] == pytest.approx(0.4)

    def test_optional_fields_omitted(self):
        payload = instance_to_dict(loads_one())
        assert "database" not in payload
        assert "gold_assignments" not in payload
        assert "difficulty" not in payload


class TestBundled:
    def test_walkthrough_file(self, fig3_instance):
        assert fig3_instance.instance_id == "fig3"
        assert len(fig3_instance.candidates) == 4
        assert fig3_instance.database  # used by execution checks

    def test_corpus_shape(self, corpus):
        assert len(corpus) == 50
        assert all(i.database for i in corpus)
        assert {i.difficulty for i in corpus} == {"easy", "medium", "hard", "extra"}

    def test_boundary_shape(self, boundary):
        assert len(boundary) == 10
        tops = [max(w for _, w in i.candidates) / sum(w for _, w in i.candidates)
                for i in boundary]
        assert any(t == 0.7 for t in tops)  # one sits exactly on the fence

    def test_bundled_path_exists(self):
        assert bundled_path("corpus.json").exists()

    def test_unknown_bundled_file(self):
        with pytest.raises(FileNotFoundError):
            load_bundled("nope.json")


class TestInstanceDistribution:
    def test_ids_follow_file_order(self, fig3_instance):
        dist = instance_distribution(fig3_instance)
        assert [c.id for c in dist] == ["c01", "c02", "c03", "c04"]
        assert dist.by_id("c01").probability == pytest.approx(0.4)

    def test_question_carried(self, fig3_instance):
        dist = instance_distribution(fig3_instance)
        assert dist.question == fig3_instance.question

    def test_duplicates_collapse_on_load(self):
        instance = loads_one(
            candidates=[
                {"sql_text": "select id from widgets where id > 1 and id < 9", "weight": 1},
                {"sql_text": "select id from widgets where id < 9 and id > 1", "weight": 1},
                {"sql_text": "select count(*) from widgets", "weight": 2},
            ]
        )
        dist = instance_distribution(instance)
        assert [c.id for c in dist] == ["c01", "c03"]
        assert dist.by_id("c01").probability == pytest.approx(0.5)
