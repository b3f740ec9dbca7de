"""Bundled demo schema/model and random instance generators.

The default schema is a 31-attribute, coarse-domain layout typical of search
personalization studies: four demographics, nine activity summaries, eighteen
binary topic interests. Every attribute fits in at most three bits. All model
parameters are synthetic, drawn from a seeded generator; they demonstrate the
pipeline and carry no empirical meaning. The frozen copy ships as
data/default_model.json so downstream runs do not depend on generator drift.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .calibrate import sensitivity_to_bits
from .models import JointModel, independent_model, parse_model
from .schema import AttributeDef, AttributeSchema

DEFAULT_MODEL_SEED = 20260815
DEFAULT_MODEL_RESOURCE = "data/default_model.json"

# level -> speedup someone would demand to share at that level
DEFAULT_SCALE = {"1": 1.25, "2": 1.5, "3": 2.0, "4": 4.0}

# (name, cardinality, sensitivity level, table concentration)
_DEMOGRAPHICS = [
    ("DGDR", 2, "2"),
    ("DAGE", 3, "2"),
    ("DOCC", 6, "2"),
    ("DREG", 4, "1"),
]
_ACTIVITY = [
    ("AQRY", 2, "4"),
    ("ACLK", 2, "3"),
    ("AFRQ", 2, "1"),
    ("AZIP", 2, "4"),
    ("ACTY", 2, "3"),
    ("ACRY", 2, "1"),
    ("AWHR", 2, "2"),
    ("AWDY", 2, "1"),
    ("ATLV", 4, "2"),
]
_TOPICS = [
    ("TART", 2, "1"),
    ("TAUT", 2, "1"),
    ("TBUS", 2, "1"),
    ("TEDU", 2, "1"),
    ("TENT", 2, "1"),
    ("TFIN", 2, "3"),
    ("TFOD", 2, "1"),
    ("TGAM", 2, "2"),
    ("THEA", 2, "4"),
    ("THOM", 2, "1"),
    ("TLAW", 2, "3"),
    ("TMUS", 2, "1"),
    ("TNWS", 2, "1"),
    ("TREL", 2, "3"),
    ("TSCI", 2, "1"),
    ("TSHP", 2, "1"),
    ("TSPT", 2, "1"),
    ("TTRV", 2, "1"),
]
# weaker concentration -> stronger intent dependence of the attribute
_GROUP_ALPHA = {"D": 6.0, "A": 3.0, "T": 1.2}


def default_schema() -> AttributeSchema:
    rows = _DEMOGRAPHICS + _ACTIVITY + _TOPICS
    levels = {name: level for name, _, level in rows}
    bits = sensitivity_to_bits(DEFAULT_SCALE, levels)
    return AttributeSchema(
        tuple(
            AttributeDef(name=name, cardinality=card, sensitivity=bits[name])
            for name, card, _ in rows
        )
    )


def build_default_model(seed: int = DEFAULT_MODEL_SEED) -> JointModel:
    """Deterministically regenerate the bundled demo model."""
    schema = default_schema()
    rng = np.random.default_rng(seed)
    n_queries, n_intents = 6, 4
    query_probs = rng.dirichlet(np.full(n_queries, 5.0))
    intent_given_query = rng.dirichlet(np.full(n_intents, 2.0), size=n_queries)
    tables = [
        rng.dirichlet(np.full(attr.cardinality, _GROUP_ALPHA[attr.name[0]]),
                      size=n_intents)
        for attr in schema
    ]
    return JointModel(
        schema=schema,
        mode="naive_bayes",
        query_probs=query_probs,
        intent_given_query=intent_given_query,
        tables=tables,
        query_labels=tuple(f"q{i}" for i in range(n_queries)),
        intent_labels=tuple(f"x{i}" for i in range(n_intents)),
        description=(
            "Synthetic demo model: 31 coarse attributes over 6 queries and "
            f"4 intents; all parameters drawn from seed {seed}. Shapes mirror "
            "a search-personalization schema; the numbers mean nothing."
        ),
    )


def default_model() -> JointModel:
    """The frozen copy of build_default_model() shipped with the package."""
    text = resources.files("tradeopt").joinpath(DEFAULT_MODEL_RESOURCE).read_text(
        encoding="utf-8"
    )
    return parse_model(text)


# -- random instances for property tests and demos ---------------------------


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_schema(
    seed,
    n_attrs: int,
    max_card: int = 4,
    max_sensitivity: float = 2.0,
) -> AttributeSchema:
    rng = _as_rng(seed)
    cards = rng.integers(2, max_card + 1, size=n_attrs)
    sens = rng.uniform(0.0, max_sensitivity, size=n_attrs)
    return AttributeSchema(
        tuple(
            AttributeDef(name=f"V{i + 1}", cardinality=int(cards[i]),
                         sensitivity=float(sens[i]))
            for i in range(n_attrs)
        )
    )


def random_naive_bayes_model(
    seed,
    n_attrs: int = 5,
    max_card: int = 4,
    n_queries: int = 3,
    n_intents: int = 4,
    alpha: float = 1.0,
    max_sensitivity: float = 2.0,
) -> JointModel:
    """Random intent-conditionals: utility varies, attributes correlate."""
    rng = _as_rng(seed)
    schema = random_schema(rng, n_attrs, max_card, max_sensitivity)
    return JointModel(
        schema=schema,
        mode="naive_bayes",
        query_probs=rng.dirichlet(np.full(n_queries, 2.0)),
        intent_given_query=rng.dirichlet(np.full(n_intents, 1.5), size=n_queries),
        tables=[
            rng.dirichlet(np.full(attr.cardinality, alpha), size=n_intents)
            for attr in schema
        ],
        query_labels=tuple(f"q{i}" for i in range(n_queries)),
        intent_labels=tuple(f"x{i}" for i in range(n_intents)),
    )


def random_independent_model(
    seed,
    n_attrs: int = 5,
    max_card: int = 4,
    max_sensitivity: float = 2.0,
) -> JointModel:
    """Marginally independent attributes (product-form identifiability)."""
    rng = _as_rng(seed)
    schema = random_schema(rng, n_attrs, max_card, max_sensitivity)
    return independent_model(
        schema,
        [rng.dirichlet(np.full(attr.cardinality, 1.0)) for attr in schema],
    )


def random_log(
    seed,
    n_attrs: int = 4,
    max_card: int = 3,
    n_users: int = 20,
    n_queries: int = 5,
    n_intents: int = 4,
    n_rows: int = 200,
    max_sensitivity: float = 2.0,
):
    """Uniform random event log; no structure beyond its empirical counts."""
    from .events import EventLog

    rng = _as_rng(seed)
    schema = random_schema(rng, n_attrs, max_card, max_sensitivity)
    values = np.column_stack(
        [rng.integers(0, attr.cardinality, size=n_rows) for attr in schema]
    )
    return EventLog(
        schema=schema,
        user_ids=rng.integers(0, n_users, size=n_rows),
        query_ids=rng.integers(0, n_queries, size=n_rows),
        intent_ids=rng.integers(0, n_intents, size=n_rows),
        values=values,
        user_labels=tuple(f"u{i}" for i in range(n_users)),
        query_labels=tuple(f"q{i}" for i in range(n_queries)),
        intent_labels=tuple(f"x{i}" for i in range(n_intents)),
    )
