"""Empirical conditional distributions read off an event log."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import SchemaError
from .events import EventLog


@dataclass(frozen=True)
class SmoothingConfig:
    """Additive smoothing for count ratios: (count + alpha) / (total + alpha * domain).

    alpha = 0 keeps the raw empirical ratios, which is what the information
    identities in the property tests require. The estimation default is 0.1.
    """

    alpha: float = 0.1

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")


DEFAULT_SMOOTHING = SmoothingConfig()


class EmpiricalJoint:
    """Conditional-distribution provider over a log's rows.

    Patterns are partial assignments {attribute name: value}. A pattern that
    matches no rows yields the uniform distribution over the target domain.
    """

    def __init__(self, log: EventLog, smoothing: SmoothingConfig = DEFAULT_SMOOTHING):
        self.log = log
        self.smoothing = smoothing

    def _match(self, pattern: Mapping[str, int]) -> np.ndarray:
        mask = np.ones(len(self.log), dtype=bool)
        for name, value in pattern.items():
            i = self.log.schema.index(name)
            card = self.log.schema[i].cardinality
            if not 0 <= int(value) < card:
                raise SchemaError(f"{name}: value {value} outside domain [0, {card})")
            mask &= self.log.values[:, i] == int(value)
        return mask

    def _conditional(self, ids: np.ndarray, domain: int, mask: np.ndarray) -> np.ndarray:
        counts = np.bincount(ids[mask], minlength=domain).astype(np.float64)
        total = counts.sum()
        alpha = self.smoothing.alpha
        if total + alpha * domain == 0.0:
            return np.full(domain, 1.0 / domain)
        return (counts + alpha) / (total + alpha * domain)

    def intent_given(self, query: str, pattern: Mapping[str, int] | None = None) -> np.ndarray:
        """P(intent | query, pattern) over the log's intent vocabulary."""
        try:
            q = self.log.query_labels.index(query)
        except ValueError:
            raise SchemaError(f"unknown query {query!r}") from None
        mask = self._match(pattern or {})
        mask &= self.log.query_ids == q
        return self._conditional(self.log.intent_ids, self.log.n_intents, mask)

    def user_given(self, pattern: Mapping[str, int] | None = None) -> np.ndarray:
        """P(user | pattern) over the log's user vocabulary."""
        mask = self._match(pattern or {})
        return self._conditional(self.log.user_ids, self.log.n_users, mask)

    def pattern_probability(self, pattern: Mapping[str, int]) -> float:
        """Empirical P(pattern): fraction of rows matching."""
        return float(self._match(pattern).mean())
