import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tradeopt import (
    NEVER_SHARE,
    AttributeDef,
    AttributeSchema,
    SchemaError,
    read_sensitivity_csv,
    sorted_subset,
    write_sensitivity_csv,
)


def test_bits_defaults_to_encoding_width():
    assert AttributeDef("a", 2).bits == 1
    assert AttributeDef("a", 3).bits == 2
    assert AttributeDef("a", 8).bits == 3
    assert AttributeDef("a", 9).bits == 4
    assert AttributeDef("a", 5, bits=7).bits == 7


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(name="", cardinality=2),
        dict(name="a,b", cardinality=2),
        dict(name="a+b", cardinality=2),
        dict(name="a", cardinality=1),
        dict(name="a", cardinality=2, sensitivity=-0.5),
    ],
)
def test_attribute_validation(kwargs):
    with pytest.raises(SchemaError):
        AttributeDef(**kwargs)


def test_schema_rejects_duplicates_and_empty():
    with pytest.raises(SchemaError, match="duplicate"):
        AttributeSchema([AttributeDef("a", 2), AttributeDef("a", 3)])
    with pytest.raises(SchemaError):
        AttributeSchema([])


def test_index_and_subsets():
    schema = AttributeSchema([AttributeDef(n, 2) for n in ("a", "b", "c")])
    assert schema.index("b") == 1
    with pytest.raises(SchemaError, match="unknown attribute"):
        schema.index("z")
    assert schema.subset_indices(["c", "a", "c"]) == (0, 2)
    assert schema.subset_names([2, 0, 2]) == ("a", "c")
    assert sorted_subset([3, 1, 1]) == (1, 3)


def test_shareable_excludes_never_share():
    schema = AttributeSchema(
        [
            AttributeDef("a", 2, sensitivity=0.5),
            AttributeDef("b", 2, sensitivity=NEVER_SHARE),
            AttributeDef("c", 2),
        ]
    )
    assert schema.shareable_indices() == (0, 2)


def test_with_sensitivities_replaces_by_name():
    schema = AttributeSchema([AttributeDef("a", 2), AttributeDef("b", 2)])
    out = schema.with_sensitivities({"b": 1.5})
    assert out[0].sensitivity == 0.0
    assert out[1].sensitivity == 1.5
    with pytest.raises(SchemaError):
        schema.with_sensitivities({"zzz": 1.0})


def test_sensitivity_csv_round_trip():
    table = {"a": 0.5, "b": NEVER_SHARE, "c": 0.0}
    parsed = read_sensitivity_csv(write_sensitivity_csv(table))
    assert parsed == table
    assert math.isinf(parsed["b"])


def test_sensitivity_csv_errors():
    with pytest.raises(SchemaError, match="attribute,sensitivity_bits"):
        read_sensitivity_csv("name,cost\na,1\n")
    with pytest.raises(SchemaError):
        read_sensitivity_csv("attribute,sensitivity_bits\na,1,2\n")
    with pytest.raises(SchemaError, match=">= 0"):
        read_sensitivity_csv("attribute,sensitivity_bits\na,-1\n")


@given(
    st.dictionaries(
        st.text(
            alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd")),
            min_size=1,
            max_size=8,
        ),
        st.one_of(
            st.floats(min_value=0, max_value=100, allow_nan=False),
            st.just(NEVER_SHARE),
        ),
        min_size=1,
        max_size=8,
    )
)
def test_sensitivity_csv_round_trips_any_table(table):
    assert read_sensitivity_csv(write_sensitivity_csv(table)) == table
