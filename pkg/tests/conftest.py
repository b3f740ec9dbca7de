import numpy as np
import pytest
from hypothesis import settings

from tradeopt import (
    AttributeDef,
    AttributeSchema,
    EventLog,
    EventRecord,
    independent_model,
)

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


def make_log(schema, rows):
    """rows: (user, query, intent, values tuple)."""
    return EventLog.from_records(schema, (EventRecord(*r) for r in rows))


@pytest.fixture
def four_record_log():
    """One query, intents (x1,x1,x2,x3), V values (0,0,1,1), distinct users.

    Hand-traceable: with alpha=0, U({V}) = H(1/2,1/4,1/4) - 1/2 = 1.0 bits
    and maxprob I({V}) = 1/2.
    """
    schema = AttributeSchema((AttributeDef("V", 2, sensitivity=0.0),))
    return make_log(
        schema,
        [
            ("u1", "q1", "x1", (0,)),
            ("u2", "q1", "x1", (0,)),
            ("u3", "q1", "x2", (1,)),
            ("u4", "q1", "x3", (1,)),
        ],
    )


@pytest.fixture
def two_binary_independent():
    """Independent identity model with P(V1=1)=0.6, P(V2=1)=0.8."""
    schema = AttributeSchema(
        (AttributeDef("V1", 2, sensitivity=0.0), AttributeDef("V2", 2, sensitivity=0.0))
    )
    return independent_model(schema, [np.array([0.4, 0.6]), np.array([0.2, 0.8])])


@pytest.fixture
def determining_model():
    """Single query, X uniform over 4 intents, V1 determines X, V2 is noise."""
    schema = AttributeSchema(
        (AttributeDef("V1", 4, sensitivity=0.0), AttributeDef("V2", 2, sensitivity=0.0))
    )
    from tradeopt import JointModel

    return JointModel(
        schema=schema,
        mode="naive_bayes",
        query_probs=np.array([1.0]),
        intent_given_query=np.full((1, 4), 0.25),
        tables=[np.eye(4), np.full((4, 2), 0.5)],
        query_labels=("q0",),
        intent_labels=("x0", "x1", "x2", "x3"),
    )
