"""Generative joint models over (query, intent, attribute values).

Two modes:

* ``naive_bayes`` — attributes are conditionally independent given the
  intent: P(q, x, v) = P(q) P(x|q) prod_i P(v_i|x).
* ``independent_identity`` — attributes are marginally independent of each
  other and of (query, intent): P(v) = prod_i P(v_i).

In both modes the identity behind a row is the full attribute tuple, so
exact identifiability is computed over tuple probabilities.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ModelSpecError
from .events import EventLog
from .schema import NEVER_SHARE, AttributeDef, AttributeSchema

MODES = ("naive_bayes", "independent_identity")
PROB_TOL = 1e-9


def _check_dist(p: np.ndarray, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or len(p) == 0:
        raise ModelSpecError(f"{what}: expected a nonempty probability vector")
    if (p < 0).any():
        raise ModelSpecError(f"{what}: negative probability")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ModelSpecError(f"{what}: probabilities sum to {p.sum()!r}, not 1")
    return p


@dataclass
class JointModel:
    schema: AttributeSchema
    mode: str
    query_probs: np.ndarray
    intent_given_query: np.ndarray
    # naive_bayes: per-attribute (n_intents, cardinality) conditionals.
    # independent_identity: per-attribute (cardinality,) marginals.
    tables: list[np.ndarray]
    query_labels: tuple[str, ...]
    intent_labels: tuple[str, ...]
    description: str = ""
    synthetic: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ModelSpecError(f"unknown mode {self.mode!r}")
        self.query_probs = _check_dist(self.query_probs, "query_probs")
        self.intent_given_query = np.asarray(self.intent_given_query, dtype=np.float64)
        nq, nx = self.intent_given_query.shape
        if nq != len(self.query_probs):
            raise ModelSpecError("intent_given_query rows must match query count")
        for q in range(nq):
            _check_dist(self.intent_given_query[q], f"intent_given_query[{q}]")
        if len(self.query_labels) != nq or len(self.intent_labels) != nx:
            raise ModelSpecError("label counts do not match table shapes")
        if len(self.tables) != len(self.schema):
            raise ModelSpecError("one probability table per attribute required")
        cards = self.schema.cardinalities
        for i, t in enumerate(self.tables):
            t = np.asarray(t, dtype=np.float64)
            name = self.schema[i].name
            if self.mode == "naive_bayes":
                if t.shape != (nx, cards[i]):
                    raise ModelSpecError(
                        f"{name}: table shape {t.shape}, expected {(nx, int(cards[i]))}"
                    )
                for x in range(nx):
                    _check_dist(t[x], f"{name}|intent {x}")
            else:
                if t.shape != (cards[i],):
                    raise ModelSpecError(
                        f"{name}: marginal shape {t.shape}, expected {(int(cards[i]),)}"
                    )
                _check_dist(t, name)
            self.tables[i] = t

    @property
    def n_queries(self) -> int:
        return len(self.query_probs)

    @property
    def n_intents(self) -> int:
        return self.intent_given_query.shape[1]

    def value_given_intent(self, i: int) -> np.ndarray:
        """P(V_i | X) as an (n_intents, cardinality) array in either mode."""
        if self.mode == "naive_bayes":
            return self.tables[i]
        return np.tile(self.tables[i], (self.n_intents, 1))

    def value_marginal(self, i: int) -> np.ndarray:
        """P(V_i) marginalized over queries and intents."""
        px = self.query_probs @ self.intent_given_query
        return px @ self.value_given_intent(i)


def independent_model(
    schema: AttributeSchema,
    value_probs: Sequence[np.ndarray],
    description: str = "",
) -> JointModel:
    """Marginally independent attributes; trivial single query and intent."""
    return JointModel(
        schema=schema,
        mode="independent_identity",
        query_probs=np.array([1.0]),
        intent_given_query=np.array([[1.0]]),
        tables=[np.asarray(p, dtype=np.float64) for p in value_probs],
        query_labels=("q0",),
        intent_labels=("x0",),
        description=description,
    )


# -- spec file io -----------------------------------------------------------
#
# Probabilities are stored as decimal strings so files round-trip exactly.


def _probs_out(arr: np.ndarray) -> list:
    if arr.ndim == 1:
        return [repr(float(v)) for v in arr]
    return [_probs_out(row) for row in arr]


def _probs_in(obj, what: str) -> np.ndarray:
    try:
        return np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError):
        raise ModelSpecError(f"{what}: expected numbers or decimal strings") from None


def format_model(model: JointModel) -> str:
    attrs = []
    for a in model.schema:
        attrs.append(
            {
                "name": a.name,
                "cardinality": a.cardinality,
                "bits": a.bits,
                "sensitivity": "never" if math.isinf(a.sensitivity) else a.sensitivity,
            }
        )
    doc: dict = {
        "mode": model.mode,
        "description": model.description,
        "synthetic": model.synthetic,
        "attributes": attrs,
        "queries": list(model.query_labels),
        "query_probs": _probs_out(model.query_probs),
        "intents": list(model.intent_labels),
        "intent_given_query": _probs_out(model.intent_given_query),
    }
    key = "value_given_intent" if model.mode == "naive_bayes" else "value_probs"
    doc[key] = {a.name: _probs_out(t) for a, t in zip(model.schema, model.tables)}
    return json.dumps(doc, indent=2) + "\n"


def parse_model(text: str) -> JointModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSpecError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelSpecError("model spec must be a JSON object")
    mode = doc.get("mode")
    if mode not in MODES:
        raise ModelSpecError(f"mode must be one of {MODES}, got {mode!r}")
    try:
        raw_attrs = doc["attributes"]
    except KeyError:
        raise ModelSpecError("missing 'attributes'") from None
    defs = []
    for a in raw_attrs:
        sens = a.get("sensitivity", 0.0)
        if isinstance(sens, str):
            if sens.lower() not in ("never", "inf"):
                raise ModelSpecError(f"bad sensitivity {sens!r}")
            sens = NEVER_SHARE
        defs.append(
            AttributeDef(
                name=a["name"],
                cardinality=int(a["cardinality"]),
                bits=int(a.get("bits", 0)),
                sensitivity=float(sens),
            )
        )
    schema = AttributeSchema(defs)
    queries = tuple(doc.get("queries", ["q0"]))
    intents = tuple(doc.get("intents", ["x0"]))
    if "query_probs" in doc:
        query_probs = _probs_in(doc["query_probs"], "query_probs")
    else:
        query_probs = np.full(len(queries), 1.0 / len(queries))
    if "intent_given_query" in doc:
        igq = _probs_in(doc["intent_given_query"], "intent_given_query")
    else:
        igq = np.full((len(queries), len(intents)), 1.0 / len(intents))
    table_key = "value_given_intent" if mode == "naive_bayes" else "value_probs"
    raw_tables = doc.get(table_key)
    if raw_tables is None:
        raise ModelSpecError(f"missing {table_key!r} for mode {mode!r}")
    tables = []
    for a in schema:
        if a.name not in raw_tables:
            raise ModelSpecError(f"{table_key}: missing table for {a.name!r}")
        tables.append(_probs_in(raw_tables[a.name], a.name))
    return JointModel(
        schema=schema,
        mode=mode,
        query_probs=query_probs,
        intent_given_query=igq,
        tables=tables,
        query_labels=queries,
        intent_labels=intents,
        description=doc.get("description", ""),
        synthetic=bool(doc.get("synthetic", True)),
    )


def load_model(path: str | os.PathLike) -> JointModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


def save_model(model: JointModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_model(model))


# -- synthetic log generation ------------------------------------------------


def _categorical_rows(rng: np.random.Generator, probs: np.ndarray, rows: np.ndarray):
    """Sample one value per row from row-dependent distributions probs[rows[i]]."""
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(len(rows))
    return np.minimum(
        (cdf[rows] < u[:, None]).sum(axis=1), probs.shape[1] - 1
    ).astype(np.int64)


def generate_synthetic(model: JointModel, n_records: int, seed: int) -> EventLog:
    """Draw `n_records` i.i.d. rows from the model.

    The identity column is the encoded attribute tuple ("u<code>"), matching
    the exact-mode convention that a user is characterized by their
    attributes. Deterministic: same (model, n_records, seed) gives a
    byte-identical log. Draw order is fixed (queries, intents, then each
    attribute in schema order).
    """
    if n_records < 1:
        raise ValueError("n_records must be >= 1")
    rng = np.random.default_rng(seed)
    nq = model.n_queries
    cdf_q = np.cumsum(model.query_probs)
    q = np.minimum((cdf_q < rng.random(n_records)[:, None]).sum(axis=1), nq - 1)
    x = _categorical_rows(rng, model.intent_given_query, q)
    m = len(model.schema)
    values = np.empty((n_records, m), dtype=np.int64)
    for i in range(m):
        values[:, i] = _categorical_rows(rng, model.value_given_intent(i), x)

    cards = model.schema.cardinalities
    codes = np.zeros(n_records, dtype=np.int64)
    for i in range(m):
        codes = codes * cards[i] + values[:, i]
    # intern in order of first appearance so output is stable
    first_seen: dict[int, int] = {}
    user_ids = np.empty(n_records, dtype=np.int64)
    labels = []
    for r in range(n_records):
        c = int(codes[r])
        if c not in first_seen:
            first_seen[c] = len(labels)
            labels.append(f"u{c}")
        user_ids[r] = first_seen[c]

    q_seen: dict[int, int] = {}
    q_ids = np.empty(n_records, dtype=np.int64)
    q_labels = []
    for r in range(n_records):
        g = int(q[r])
        if g not in q_seen:
            q_seen[g] = len(q_labels)
            q_labels.append(model.query_labels[g])
        q_ids[r] = q_seen[g]
    x_seen: dict[int, int] = {}
    x_ids = np.empty(n_records, dtype=np.int64)
    x_labels = []
    for r in range(n_records):
        g = int(x[r])
        if g not in x_seen:
            x_seen[g] = len(x_labels)
            x_labels.append(model.intent_labels[g])
        x_ids[r] = x_seen[g]

    return EventLog(
        model.schema,
        user_ids,
        q_ids,
        x_ids,
        values,
        tuple(labels),
        tuple(q_labels),
        tuple(x_labels),
    )
