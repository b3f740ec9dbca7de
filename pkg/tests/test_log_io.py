import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tradeopt import (
    AttributeDef,
    AttributeSchema,
    EventLog,
    LogFormatError,
    format_log,
    infer_schema,
    parse_log,
    pattern_bits,
    pattern_space,
)

SCHEMA = AttributeSchema([AttributeDef("V1", 2), AttributeDef("V2", 3)])


def test_parse_four_rows():
    text = (
        "user,query,intent,V1,V2\n"
        "u1,q1,x1,0,2\n"
        "u2,q1,x2,1,0\n"
        "u1,q2,x1,0,1\n"
        "u3,q2,x3,1,1\n"
    )
    log = parse_log(text, SCHEMA)
    assert len(log) == 4
    assert log.n_users == 3 and log.n_queries == 2 and log.n_intents == 3
    # vocabularies intern labels in first-appearance order
    assert log.user_labels == ("u1", "u2", "u3")
    assert log.values.tolist() == [[0, 2], [1, 0], [0, 1], [1, 1]]


def test_round_trip(four_record_log):
    text = format_log(four_record_log)
    again = parse_log(text, four_record_log.schema)
    assert format_log(again) == text
    assert np.array_equal(again.values, four_record_log.values)
    assert again.user_labels == four_record_log.user_labels


def test_comment_and_blank_lines_are_skipped():
    text = (
        "# tradeopt meta line\n"
        "user,query,intent,V1,V2\n"
        "\n"
        "# another comment\n"
        "u1,q1,x1,0,0\n"
    )
    log = parse_log(text, SCHEMA)
    assert len(log) == 1


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("", None, "empty"),
        ("user,query,intent,V1\n", 1, "header"),
        ("user,query,intent,V1,V2\n", None, "no data rows"),
        ("user,query,intent,V1,V2\nu1,q1,x1,0\n", 2, "expected 5 fields"),
        ("user,query,intent,V1,V2\nu1,q1,x1,zero,0\n", 2, "not an integer"),
        ("user,query,intent,V1,V2\nu1,q1,x1,2,0\n", 2, "outside domain"),
        ("# only a comment\n", None, "empty"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(LogFormatError) as exc:
        parse_log(text, SCHEMA)
    assert fragment in str(exc.value)
    if line is not None:
        assert exc.value.line == line
        assert f"line {line}" in str(exc.value)


def test_comment_shifts_error_line_numbers():
    text = "# meta\nuser,query,intent,V1,V2\nu1,q1,x1,0,0\nu1,q1,x1,9,0\n"
    with pytest.raises(LogFormatError) as exc:
        parse_log(text, SCHEMA)
    assert exc.value.line == 4


def test_infer_schema_counts_domains():
    text = "user,query,intent,A,B\nu1,q1,x1,0,3\nu2,q1,x1,1,0\n"
    schema = infer_schema(text)
    assert schema.names == ("A", "B")
    assert schema.cardinalities.tolist() == [2, 4]
    # constant column still gets a 2-value domain
    schema2 = infer_schema("user,query,intent,A\nu1,q1,x1,0\n")
    assert schema2[0].cardinality == 2


def test_infer_schema_requires_attribute_columns():
    with pytest.raises(LogFormatError):
        infer_schema("user,query,intent\nu1,q1,x1\n")


def test_log_validation():
    with pytest.raises(LogFormatError, match="no rows"):
        EventLog(
            SCHEMA,
            np.array([], dtype=np.int64),
            np.array([], dtype=np.int64),
            np.array([], dtype=np.int64),
            np.zeros((0, 2), dtype=np.int64),
            (),
            (),
            (),
        )
    with pytest.raises(LogFormatError, match="outside its domain"):
        EventLog(
            SCHEMA,
            np.array([0]),
            np.array([0]),
            np.array([0]),
            np.array([[0, 3]]),
            ("u",),
            ("q",),
            ("x",),
        )


def test_pattern_helpers():
    assert pattern_space(SCHEMA, (0, 1)) == 6
    assert pattern_space(SCHEMA, ()) == 1
    assert pattern_bits(SCHEMA, (0, 1)) == 1 + 2


@given(st.data())
def test_random_logs_round_trip(data):
    n_attrs = data.draw(st.integers(1, 4))
    cards = [data.draw(st.integers(2, 5)) for _ in range(n_attrs)]
    schema = AttributeSchema(
        [AttributeDef(f"V{i}", c) for i, c in enumerate(cards)]
    )
    n = data.draw(st.integers(1, 30))
    labels = st.text(
        alphabet=st.characters(whitelist_categories=("Ll", "Nd")), min_size=1, max_size=6
    )
    rows = []
    for _ in range(n):
        rows.append(
            (
                data.draw(labels),
                data.draw(labels),
                data.draw(labels),
                tuple(data.draw(st.integers(0, c - 1)) for c in cards),
            )
        )
    from conftest import make_log

    log = make_log(schema, rows)
    again = parse_log(format_log(log), schema)
    assert np.array_equal(again.values, log.values)
    assert np.array_equal(again.user_ids, log.user_ids)
    assert again.query_labels == log.query_labels
