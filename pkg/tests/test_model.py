import itertools
import math
from collections import Counter

import numpy as np
import pytest

from tradeopt import (
    AttributeDef,
    AttributeSchema,
    JointModel,
    ModelSpecError,
    NEVER_SHARE,
    format_log,
    format_model,
    generate_synthetic,
    independent_model,
    parse_model,
)


def test_model_validation():
    schema = AttributeSchema([AttributeDef("V1", 2)])
    with pytest.raises(ModelSpecError, match="unknown mode"):
        JointModel(
            schema=schema,
            mode="mystery",
            query_probs=np.array([1.0]),
            intent_given_query=np.array([[1.0]]),
            tables=[np.array([0.5, 0.5])],
            query_labels=("q0",),
            intent_labels=("x0",),
        )
    with pytest.raises(ModelSpecError, match="sum to"):
        independent_model(schema, [np.array([0.5, 0.6])])
    with pytest.raises(ModelSpecError, match="shape"):
        independent_model(schema, [np.array([0.2, 0.3, 0.5])])
    with pytest.raises(ModelSpecError):
        independent_model(schema, [np.array([1.5, -0.5])])


def test_value_given_intent_shapes(determining_model, two_binary_independent):
    assert determining_model.value_given_intent(0).shape == (4, 4)
    # independent mode tiles the marginal across intents
    tiled = two_binary_independent.value_given_intent(0)
    assert tiled.shape == (1, 2)
    assert np.allclose(tiled[0], [0.4, 0.6])
    assert np.allclose(two_binary_independent.value_marginal(1), [0.2, 0.8])


def test_model_json_round_trip(determining_model):
    text = format_model(determining_model)
    again = parse_model(text)
    assert format_model(again) == text
    assert again.mode == determining_model.mode
    assert np.array_equal(again.intent_given_query, determining_model.intent_given_query)
    for a, b in zip(again.tables, determining_model.tables):
        assert np.array_equal(a, b)


def test_model_json_round_trip_exact_floats(two_binary_independent):
    # decimal-string storage keeps ugly floats bit-identical
    schema = two_binary_independent.schema
    model = independent_model(schema, [np.array([1 / 3, 2 / 3]), np.array([0.1, 0.9])])
    again = parse_model(format_model(model))
    assert again.tables[0][0] == model.tables[0][0]
    assert format_model(again) == format_model(model)


def test_model_json_never_share_sensitivity():
    schema = AttributeSchema([AttributeDef("V1", 2, sensitivity=NEVER_SHARE)])
    model = independent_model(schema, [np.array([0.5, 0.5])])
    again = parse_model(format_model(model))
    assert math.isinf(again.schema[0].sensitivity)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("not json", "not valid JSON"),
        ("[1,2]", "JSON object"),
        ('{"mode": "other"}', "mode must be one of"),
        ('{"mode": "naive_bayes"}', "missing 'attributes'"),
        (
            '{"mode": "naive_bayes", "attributes": [{"name": "V1", "cardinality": 2}]}',
            "value_given_intent",
        ),
    ],
)
def test_parse_model_errors(text, fragment):
    with pytest.raises(ModelSpecError, match=fragment):
        parse_model(text)


def test_generation_is_deterministic(determining_model):
    a = generate_synthetic(determining_model, 500, seed=7)
    b = generate_synthetic(determining_model, 500, seed=7)
    assert format_log(a) == format_log(b)
    c = generate_synthetic(determining_model, 500, seed=8)
    assert format_log(c) != format_log(a)


def test_generation_rejects_empty(determining_model):
    with pytest.raises(ValueError):
        generate_synthetic(determining_model, 0, seed=1)


def test_user_label_encodes_value_tuple(two_binary_independent):
    log = generate_synthetic(two_binary_independent, 50, seed=3)
    cards = two_binary_independent.schema.cardinalities
    for r in range(len(log)):
        code = 0
        for i in range(len(cards)):
            code = code * cards[i] + log.values[r, i]
        assert log.user_labels[log.user_ids[r]] == f"u{int(code)}"


def test_generation_matches_marginal(two_binary_independent):
    # P(V1=1)=0.6; binomial standard error at n=100000 is ~0.0015
    log = generate_synthetic(two_binary_independent, 100_000, seed=11)
    assert abs(log.values[:, 0].mean() - 0.6) < 0.01
    assert abs(log.values[:, 1].mean() - 0.8) < 0.01


def test_generation_matches_query_and_intent_tables():
    schema = AttributeSchema([AttributeDef("V1", 2)])
    model = JointModel(
        schema=schema,
        mode="naive_bayes",
        query_probs=np.array([0.3, 0.7]),
        intent_given_query=np.array([[0.9, 0.1], [0.2, 0.8]]),
        tables=[np.array([[0.8, 0.2], [0.1, 0.9]])],
        query_labels=("qa", "qb"),
        intent_labels=("x0", "x1"),
    )
    log = generate_synthetic(model, 80_000, seed=5)
    q_counts = Counter(log.query_labels[i] for i in log.query_ids)
    assert abs(q_counts["qa"] / len(log) - 0.3) < 0.01
    # P(x1) = 0.3*0.1 + 0.7*0.8 = 0.59
    x1 = log.intent_labels.index("x1")
    assert abs((log.intent_ids == x1).mean() - 0.59) < 0.01
    # P(V1=1 | x1) = 0.9
    mask = log.intent_ids == x1
    assert abs(log.values[mask, 0].mean() - 0.9) < 0.01


def _conditional_mi(log, i, j):
    """Plug-in I(V_i; V_j | X) in bits."""
    n = len(log)
    joint = Counter(
        (int(log.intent_ids[r]), int(log.values[r, i]), int(log.values[r, j]))
        for r in range(n)
    )
    px = Counter(int(v) for v in log.intent_ids)
    pxi, pxj = Counter(), Counter()
    for (x, vi, vj), c in joint.items():
        pxi[(x, vi)] += c
        pxj[(x, vj)] += c
    mi = 0.0
    for (x, vi, vj), c in joint.items():
        p = c / n
        mi += p * math.log2((c * px[x]) / (pxi[(x, vi)] * pxj[(x, vj)]))
    return mi


def test_generation_conditionally_independent_given_intent():
    schema = AttributeSchema([AttributeDef("V1", 2), AttributeDef("V2", 3)])
    rng = np.random.default_rng(42)
    model = JointModel(
        schema=schema,
        mode="naive_bayes",
        query_probs=np.array([1.0]),
        intent_given_query=np.array([[0.5, 0.5]]),
        tables=[rng.dirichlet(np.ones(2), size=2), rng.dirichlet(np.ones(3), size=2)],
        query_labels=("q0",),
        intent_labels=("x0", "x1"),
    )
    log = generate_synthetic(model, 50_000, seed=13)
    assert _conditional_mi(log, 0, 1) < 0.01


def test_generation_covers_the_joint_support(two_binary_independent):
    log = generate_synthetic(two_binary_independent, 2000, seed=2)
    seen = {tuple(map(int, row)) for row in log.values}
    assert seen == set(itertools.product(range(2), range(2)))
