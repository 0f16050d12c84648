from __future__ import annotations

import json
import random

import pytest

from randgen import random_spec_document
from walkd.errors import JsonSyntax, SchemaViolation, UnsupportedVersion
from walkd.spec_model import (
    ChartSpec,
    ComputedField,
    FieldRef,
    Filter,
    SortRule,
    SpecConfig,
    default_mark,
    parse_spec,
    serialize_spec,
    validate_against,
)
from walkd.table_store import FieldMeta

MINIMAL = (
    '{"version":1,"name":"Chart 1","mark":"auto","aggregated":true,"channels":{},'
    '"computed":[],"filters":[],"stack":"none",'
    '"config":{"coord":"generic","layout":"auto","palette":"default","style":{}}}'
)


def fields_fixture() -> list[FieldMeta]:
    return [
        FieldMeta("year", "Year", "ordinal", "dimension", 4),
        FieldMeta("region", "Region", "nominal", "dimension", 4),
        FieldMeta("category", "Category", "nominal", "dimension", 3),
        FieldMeta("order_date", "Order Date", "temporal", "dimension", 700),
        FieldMeta("sales", "Sales", "quantitative", "measure", 700, min=1.0, max=2600.0),
        FieldMeta("profit", "Profit", "quantitative", "measure", 800, min=-300.0, max=800.0),
    ]


class TestParse:
    def test_minimal_spec(self):
        spec = parse_spec(MINIMAL)
        assert spec == ChartSpec()
        assert serialize_spec(spec) == MINIMAL

    def test_bad_json(self):
        with pytest.raises(JsonSyntax):
            parse_spec("{nope")

    def test_unknown_top_level_key_rejected(self):
        doc = json.loads(MINIMAL)
        doc["surprise"] = 1
        with pytest.raises(SchemaViolation):
            parse_spec(json.dumps(doc))

    def test_unknown_style_keys_preserved(self):
        doc = json.loads(MINIMAL)
        doc["config"]["style"] = {"zeta": 1, "alpha": [1, 2]}
        spec = parse_spec(json.dumps(doc))
        assert spec.config.style == {"zeta": 1, "alpha": [1, 2]}
        assert '"style":{"alpha":[1,2],"zeta":1}' in serialize_spec(spec)

    def test_single_slot_arity(self):
        doc = json.loads(MINIMAL)
        doc["channels"] = {"color": [{"fid": "a"}, {"fid": "b"}]}
        with pytest.raises(SchemaViolation) as err:
            parse_spec(json.dumps(doc))
        assert "channels.color" in err.value.path

    def test_unsupported_version(self):
        doc = json.loads(MINIMAL)
        doc["version"] = 2
        with pytest.raises(UnsupportedVersion):
            parse_spec(json.dumps(doc))

    def test_range_accepts_iso_dates(self):
        doc = json.loads(MINIMAL)
        doc["filters"] = [{"fid": "d", "range": ["2011-01-01", "2012-01-01"]}]
        spec = parse_spec(json.dumps(doc))
        lo, hi = spec.filters[0].range
        assert lo < hi and lo == 1293840000000.0

    def test_range_order_enforced(self):
        doc = json.loads(MINIMAL)
        doc["filters"] = [{"fid": "a", "range": [5, 1]}]
        with pytest.raises(SchemaViolation):
            parse_spec(json.dumps(doc))

    def test_one_of_must_be_non_empty(self):
        doc = json.loads(MINIMAL)
        doc["filters"] = [{"fid": "a", "one_of": []}]
        with pytest.raises(SchemaViolation):
            parse_spec(json.dumps(doc))

    def test_bin_requires_positive_k(self):
        doc = json.loads(MINIMAL)
        doc["computed"] = [{"out_fid": "b", "source_fid": "a", "kind": "bin", "k": 0}]
        with pytest.raises(SchemaViolation):
            parse_spec(json.dumps(doc))

    def test_fixed_layout(self):
        doc = json.loads(MINIMAL)
        doc["config"]["layout"] = {"w": 640, "h": 420}
        spec = parse_spec(json.dumps(doc))
        assert spec.config.layout == (640, 420)
        assert '"layout":{"w":640,"h":420}' in serialize_spec(spec)


class TestSerialize:
    def test_filter_one_of_roundtrip(self):
        spec = ChartSpec(filters=(Filter("region", one_of=("North Asia",)),))
        again = parse_spec(serialize_spec(spec))
        assert again == spec
        assert again.filters[0].one_of == ("North Asia",)

    def test_one_of_canonical_order(self):
        spec = ChartSpec(filters=(Filter("v", one_of=("b", None, 2.0, "a", 1.0)),))
        assert spec.filters[0].one_of == (None, 1.0, 2.0, "a", "b")

    def test_integral_floats_serialize_as_integers(self):
        spec = ChartSpec(filters=(Filter("v", range=(2.0, 5.5)),))
        assert '"range":[2,5.5]' in serialize_spec(spec)

    def test_aggregation_omitted_when_none(self):
        spec = ChartSpec(channels={"x": (FieldRef("a"),)})
        assert '"x":[{"fid":"a"}]' in serialize_spec(spec)

    def test_sort_omitted_when_absent(self):
        assert '"sort"' not in serialize_spec(ChartSpec())
        spec = ChartSpec(sort=SortRule("a", "desc"))
        assert '"sort":{"fid":"a","direction":"desc"}' in serialize_spec(spec)

    @pytest.mark.parametrize("seed", range(100))
    def test_roundtrip_random_specs(self, seed):
        spec = random_spec_document(random.Random(seed))
        text = serialize_spec(spec)
        again = parse_spec(text)
        assert again == spec
        assert serialize_spec(again) == text


class TestValidate:
    def test_unknown_fid(self):
        spec = ChartSpec(channels={"x": (FieldRef("salez"),)})
        codes = [v.code for v in validate_against(spec, fields_fixture())]
        assert codes == ["unresolved_field"]

    def test_illegal_aggregation(self):
        spec = ChartSpec(channels={"y": (FieldRef("region", "sum"),)})
        codes = [v.code for v in validate_against(spec, fields_fixture())]
        assert "illegal_aggregation" in codes

    def test_count_legal_on_any_field(self):
        spec = ChartSpec(channels={"x": (FieldRef("region"),), "y": (FieldRef("region", "count"),)})
        assert validate_against(spec, fields_fixture()) == []

    def test_missing_aggregation_on_measure(self):
        spec = ChartSpec(aggregated=True, channels={"y": (FieldRef("sales"),)})
        codes = [v.code for v in validate_against(spec, fields_fixture())]
        assert "missing_aggregation" in codes

    def test_computed_source_must_be_quantitative(self):
        spec = ChartSpec(computed=(ComputedField("r2", "region", "log2"),))
        codes = [v.code for v in validate_against(spec, fields_fixture())]
        assert codes == ["non_quantitative_source"]

    def test_filter_on_computed_rejected(self):
        spec = ChartSpec(
            computed=(ComputedField("s2", "sales", "log2"),),
            filters=(Filter("s2", range=(0, 1)),),
        )
        codes = [v.code for v in validate_against(spec, fields_fixture())]
        assert "filter_on_computed" in codes

    def test_valid_scenario_spec(self):
        spec = ChartSpec(
            mark="line",
            aggregated=True,
            channels={"x": (FieldRef("year"),), "y": (FieldRef("region"), FieldRef("sales", "sum"))},
        )
        assert validate_against(spec, fields_fixture()) == []

    def test_shape_requires_point_mark(self):
        spec = ChartSpec(
            mark="bar",
            channels={"x": (FieldRef("region"),), "y": (FieldRef("sales", "sum"),), "shape": (FieldRef("category"),)},
        )
        codes = [v.code for v in validate_against(spec, fields_fixture())]
        assert "shape_requires_point" in codes

    def test_table_axis_rejects_measures(self):
        spec = ChartSpec(
            mark="table",
            channels={"x": (FieldRef("sales", "sum"),)},
            config=SpecConfig(style={"table_values": [{"fid": "sales", "aggregation": "sum"}]}),
        )
        codes = [v.code for v in validate_against(spec, fields_fixture())]
        assert "table_axis_measure" in codes

    def test_table_requires_values(self):
        spec = ChartSpec(mark="table", channels={"x": (FieldRef("region"),)})
        codes = [v.code for v in validate_against(spec, fields_fixture())]
        assert "table_values_missing" in codes

    def test_monotone_under_field_addition(self):
        rng = random.Random(7)
        fields = fields_fixture()
        spec = ChartSpec(
            mark="line",
            channels={"x": (FieldRef("year"),), "y": (FieldRef("sales", "sum"),)},
            filters=(Filter("region", one_of=("North Asia",)),),
        )
        assert validate_against(spec, fields) == []
        for _ in range(20):
            extra = FieldMeta(f"f{rng.randrange(1000)}", "F", "nominal", "dimension", 1)
            fields = fields + [extra]
            assert validate_against(spec, fields) == []


class TestDefaultMark:
    def test_temporal_dim_plus_measure_is_line(self):
        spec = ChartSpec(channels={"x": (FieldRef("order_date"),), "y": (FieldRef("sales", "sum"),)})
        assert default_mark(spec, fields_fixture()) == "line"

    def test_ordinal_dim_plus_measure_is_line(self):
        spec = ChartSpec(channels={"x": (FieldRef("year"),), "y": (FieldRef("sales", "sum"),)})
        assert default_mark(spec, fields_fixture()) == "line"

    def test_nominal_dim_plus_measure_is_bar(self):
        spec = ChartSpec(channels={"x": (FieldRef("region"),), "y": (FieldRef("sales", "sum"),)})
        assert default_mark(spec, fields_fixture()) == "bar"

    def test_two_raw_measures_is_point(self):
        spec = ChartSpec(aggregated=False, channels={"x": (FieldRef("sales"),), "y": (FieldRef("profit"),)})
        assert default_mark(spec, fields_fixture()) == "point"

    def test_dims_only_is_table(self):
        spec = ChartSpec(channels={"x": (FieldRef("region"),), "y": (FieldRef("year"),)})
        assert default_mark(spec, fields_fixture()) == "table"

    def test_single_measure_no_dims_is_tick(self):
        spec = ChartSpec(channels={"y": (FieldRef("sales", "sum"),)})
        assert default_mark(spec, fields_fixture()) == "tick"

    def test_explicit_mark_passes_through(self):
        spec = ChartSpec(mark="area")
        assert default_mark(spec, fields_fixture()) == "area"

    def test_x_axis_preference(self):
        # x nominal vs y ordinal: x's class wins -> bar
        spec = ChartSpec(
            channels={"x": (FieldRef("region"),), "y": (FieldRef("year"), FieldRef("sales", "sum"))}
        )
        assert default_mark(spec, fields_fixture()) == "bar"
