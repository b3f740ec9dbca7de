"""Event logs: one row per logged interaction (user, query, intent, attribute values)."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import LogFormatError, SchemaError
from .schema import AttributeDef, AttributeSchema

HEADER_FIXED = ("user", "query", "intent")


@dataclass(frozen=True)
class EventRecord:
    user: str
    query: str
    intent: str
    values: tuple[int, ...]


class EventLog:
    """Columnar event log.

    Rows are kept as integer arrays: string labels for user/query/intent are
    interned into vocabularies in order of first appearance, attribute values
    are integers in [0, cardinality). Estimation treats the rows as an
    empirical joint distribution with uniform weight 1/N per row.
    """

    def __init__(
        self,
        schema: AttributeSchema,
        user_ids: np.ndarray,
        query_ids: np.ndarray,
        intent_ids: np.ndarray,
        values: np.ndarray,
        user_labels: Sequence[str],
        query_labels: Sequence[str],
        intent_labels: Sequence[str],
    ):
        self.schema = schema
        self.user_ids = np.asarray(user_ids, dtype=np.int64)
        self.query_ids = np.asarray(query_ids, dtype=np.int64)
        self.intent_ids = np.asarray(intent_ids, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.int64)
        self.user_labels = tuple(user_labels)
        self.query_labels = tuple(query_labels)
        self.intent_labels = tuple(intent_labels)
        n = len(self.user_ids)
        if n == 0:
            raise LogFormatError("event log has no rows")
        if self.values.shape != (n, len(schema)):
            raise LogFormatError(
                f"value matrix shape {self.values.shape} does not match "
                f"{n} rows x {len(schema)} attributes"
            )
        cards = schema.cardinalities
        if self.values.min(initial=0) < 0 or (self.values >= cards[None, :]).any():
            raise LogFormatError("attribute value outside its domain")
        for ids, labels, what in (
            (self.user_ids, self.user_labels, "user"),
            (self.query_ids, self.query_labels, "query"),
            (self.intent_ids, self.intent_labels, "intent"),
        ):
            if len(ids) and (ids.min() < 0 or ids.max() >= len(labels)):
                raise LogFormatError(f"{what} id outside vocabulary")

    def __len__(self) -> int:
        return len(self.user_ids)

    @property
    def n_users(self) -> int:
        return len(self.user_labels)

    @property
    def n_queries(self) -> int:
        return len(self.query_labels)

    @property
    def n_intents(self) -> int:
        return len(self.intent_labels)

    def records(self) -> Iterable[EventRecord]:
        for i in range(len(self)):
            yield EventRecord(
                self.user_labels[self.user_ids[i]],
                self.query_labels[self.query_ids[i]],
                self.intent_labels[self.intent_ids[i]],
                tuple(int(v) for v in self.values[i]),
            )

    @classmethod
    def from_records(
        cls, schema: AttributeSchema, records: Iterable[EventRecord]
    ) -> "EventLog":
        users: dict[str, int] = {}
        queries: dict[str, int] = {}
        intents: dict[str, int] = {}
        uid, qid, xid, vals = [], [], [], []
        for rec in records:
            uid.append(users.setdefault(rec.user, len(users)))
            qid.append(queries.setdefault(rec.query, len(queries)))
            xid.append(intents.setdefault(rec.intent, len(intents)))
            vals.append(rec.values)
        return cls(
            schema,
            np.array(uid, dtype=np.int64),
            np.array(qid, dtype=np.int64),
            np.array(xid, dtype=np.int64),
            np.array(vals, dtype=np.int64).reshape(len(uid), len(schema)),
            tuple(users),
            tuple(queries),
            tuple(intents),
        )


def _log_rows(text: str):
    """Yield (line_number, row) from log CSV text, skipping blank lines and
    comment lines (first field starting with '#', used for run metadata)."""
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        yield lineno, row


def parse_log(text: str, schema: AttributeSchema) -> EventLog:
    """Parse event-log CSV text against `schema`.

    Header must be exactly ``user,query,intent,<attr1>,...`` in schema order.
    Attribute cells are integers within their domains. Errors carry 1-based
    line numbers. Lines whose first field starts with '#' are comments.
    """
    rows = _log_rows(text)
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise LogFormatError("event log file is empty") from None
    expected = list(HEADER_FIXED) + list(schema.names)
    if [c.strip() for c in header] != expected:
        raise LogFormatError(
            f"header is {','.join(header)!r}, expected {','.join(expected)!r}",
            line=header_line,
        )
    users: dict[str, int] = {}
    queries: dict[str, int] = {}
    intents: dict[str, int] = {}
    uid, qid, xid = [], [], []
    vals = []
    cards = schema.cardinalities
    for lineno, row in rows:
        if len(row) != len(expected):
            raise LogFormatError(
                f"expected {len(expected)} fields, got {len(row)}", line=lineno
            )
        uid.append(users.setdefault(row[0], len(users)))
        qid.append(queries.setdefault(row[1], len(queries)))
        xid.append(intents.setdefault(row[2], len(intents)))
        rowvals = []
        for j, cell in enumerate(row[3:]):
            try:
                v = int(cell)
            except ValueError:
                raise LogFormatError(
                    f"attribute {schema.names[j]!r}: {cell!r} is not an integer",
                    line=lineno,
                ) from None
            if not 0 <= v < cards[j]:
                raise LogFormatError(
                    f"attribute {schema.names[j]!r}: value {v} outside domain "
                    f"[0, {cards[j]})",
                    line=lineno,
                )
            rowvals.append(v)
        vals.append(rowvals)
    if not uid:
        raise LogFormatError("event log has no data rows")
    return EventLog(
        schema,
        np.array(uid, dtype=np.int64),
        np.array(qid, dtype=np.int64),
        np.array(xid, dtype=np.int64),
        np.array(vals, dtype=np.int64),
        tuple(users),
        tuple(queries),
        tuple(intents),
    )


def load_log(path: str | os.PathLike, schema: AttributeSchema) -> EventLog:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_log(fh.read(), schema)


def format_log(log: EventLog) -> str:
    """Serialize to CSV text (UTF-8 friendly, LF newlines)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(HEADER_FIXED) + list(log.schema.names))
    users, queries, intents = log.user_labels, log.query_labels, log.intent_labels
    for i in range(len(log)):
        writer.writerow(
            [users[log.user_ids[i]], queries[log.query_ids[i]], intents[log.intent_ids[i]]]
            + [str(int(v)) for v in log.values[i]]
        )
    return out.getvalue()


def write_log(log: EventLog, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_log(log))


def infer_schema(text: str) -> AttributeSchema:
    """Build a schema from a log's own header and observed values.

    Cardinality is max observed value + 1 (at least 2), bits the matching
    description length, sensitivity 0. Useful when a log arrives without a
    model spec; pair with a sensitivity table for real costs.
    """
    rows = _log_rows(text)
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise LogFormatError("event log file is empty") from None
    header = [c.strip() for c in header]
    if header[: len(HEADER_FIXED)] != list(HEADER_FIXED) or len(header) == len(HEADER_FIXED):
        raise LogFormatError(
            "header must be 'user,query,intent' followed by attribute names",
            line=header_line,
        )
    names = header[len(HEADER_FIXED) :]
    maxima = [1] * len(names)
    for lineno, row in rows:
        for j, cell in enumerate(row[len(HEADER_FIXED) :]):
            try:
                v = int(cell)
            except ValueError:
                raise LogFormatError(f"{cell!r} is not an integer", line=lineno) from None
            maxima[j] = max(maxima[j], v)
    try:
        return AttributeSchema(
            AttributeDef(name=n, cardinality=m + 1) for n, m in zip(names, maxima)
        )
    except SchemaError as exc:
        raise LogFormatError(str(exc)) from exc


def pattern_bits(schema: AttributeSchema, indices: Sequence[int]) -> float:
    """Total description length of a subset, in bits."""
    return float(sum(schema[i].bits for i in indices))


def pattern_space(schema: AttributeSchema, indices: Sequence[int]) -> int:
    """Number of joint value combinations of a subset."""
    return int(math.prod(int(schema[i].cardinality) for i in indices)) if indices else 1
