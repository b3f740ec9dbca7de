"""Objective components: utility U, identifiability I, sensitivity S, and F = U - lambda*(I+S).

Two evaluation modes:

* exact — full enumeration, either of a joint model's outcome grid or of a
  log's empirical distribution (every row weighted 1/N).
* sampled — Monte Carlo over log rows: each sample picks a row uniformly and
  scores the entropy reduction H(X|q) - H(X|q,a) of that row's (query,
  pattern) cell and the identifiability loss of its pattern. Sample counts
  come from Hoeffding bounds or are given directly.

Identifiability conditions on the attribute pattern alone (not additionally
on the query); utility conditions on (query, pattern).
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Union

import numpy as np

from . import kernels
from .empirical import DEFAULT_SMOOTHING, SmoothingConfig
from .errors import EnumerationLimitError, SchemaError, TradeoptError
from .events import EventLog
from .models import JointModel
from .schema import AttributeSchema

# The rescaled loss -log2(1 - maxprob) is infinite at certainty; max
# probabilities are clipped so the loss ceiling sits near 30 bits.
MAXPROB_CLIP = 1.0 - 2.0**-30

# Exact model evaluation enumerates the attribute-value grid; refuse domains
# whose joint value space exceeds this.
ENUMERATION_LIMIT = 2**24


@dataclass(frozen=True)
class CostMetric:
    """Identifiability loss choice: maxprob, rescaled, or kanon (with k)."""

    kind: str = "maxprob"
    k: int = 0

    def __post_init__(self):
        if self.kind not in ("maxprob", "rescaled", "kanon"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "kanon":
            if self.k < 1:
                raise ValueError("kanon metric requires k >= 1")
        elif self.k != 0:
            raise ValueError(f"k is only meaningful for kanon, got k={self.k}")

    @classmethod
    def parse(cls, text: str) -> "CostMetric":
        text = text.strip()
        if text.startswith("kanon:"):
            return cls("kanon", int(text.split(":", 1)[1]))
        if text == "kanon":
            raise ValueError("kanon metric must be written as kanon:K")
        return cls(text)

    def __str__(self) -> str:
        return f"kanon:{self.k}" if self.kind == "kanon" else self.kind


def sample_size_utility(epsilon: float, delta: float, n_intents: int) -> int:
    """Hoeffding sample count for estimating U to absolute error epsilon.

    The per-sample entropy reduction ranges over log2(n_intents) bits, hence
    ceil(0.5 * (log2(n_intents)/epsilon)^2 * ln(1/delta)).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    if n_intents < 2:
        raise ValueError("n_intents must be >= 2")
    return math.ceil(0.5 * (math.log2(n_intents) / epsilon) ** 2 * math.log(1.0 / delta))


def sample_size_cost(epsilon: float, delta: float) -> int:
    """Hoeffding sample count for losses bounded in [0,1]: ceil(ln(1/delta)/(2 eps^2))."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    return math.ceil(math.log(1.0 / delta) / (2.0 * epsilon**2))


@dataclass(frozen=True)
class SamplingPlan:
    """How many rows to sample, and the seed that makes runs reproducible.

    Give either `n_samples` directly, or an accuracy pair (epsilon, delta)
    from which per-component counts are derived: utility needs more samples
    than cost because its per-sample range is log2(n_intents) bits rather
    than 1. Utility and cost reuse one index stream (prefixes of the same
    draws) so a joint Evaluation sees consistent rows.
    """

    seed: int
    n_samples: int | None = None
    epsilon: float | None = None
    delta: float | None = None

    def __post_init__(self):
        has_pair = self.epsilon is not None or self.delta is not None
        if self.n_samples is None and not has_pair:
            raise ValueError("need n_samples or (epsilon, delta)")
        if self.n_samples is not None:
            if has_pair:
                raise ValueError("give n_samples or (epsilon, delta), not both")
            if self.n_samples < 1:
                raise ValueError("n_samples must be >= 1")
        elif self.epsilon is None or self.delta is None:
            raise ValueError("epsilon and delta must be given together")
        if not isinstance(self.seed, int):
            raise ValueError("sampling requires an integer seed")

    def resolve(self, n_intents: int) -> tuple[int, int]:
        """(n for utility, n for cost)."""
        if self.n_samples is not None:
            return self.n_samples, self.n_samples
        return (
            sample_size_utility(self.epsilon, self.delta, n_intents),
            sample_size_cost(self.epsilon, self.delta),
        )


@dataclass(frozen=True)
class ObjectiveSpec:
    """Everything needed to evaluate F_lambda(A): source, metric, lambda, mode.

    `source` is a JointModel (exact only) or an EventLog (exact when `plan`
    is None, sampled otherwise). Sensitivities come from the schema's
    attribute definitions.
    """

    source: Union[JointModel, EventLog]
    lam: float = 1.0
    metric: CostMetric = field(default_factory=CostMetric)
    smoothing: SmoothingConfig = DEFAULT_SMOOTHING
    plan: SamplingPlan | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.plan is not None and not isinstance(self.source, EventLog):
            raise TradeoptError("sampled mode requires an event log source")

    @property
    def schema(self) -> AttributeSchema:
        return self.source.schema

    @property
    def mode(self) -> str:
        return "sampled" if self.plan is not None else "exact"


@dataclass(frozen=True)
class Evaluation:
    """All objective components for one subset.

    cost = identifiability + sensitivity and objective = utility - lambda*cost
    hold by construction. eval_count is this call's contribution to the
    provider's evaluation counter: 1 when computed fresh, 0 when the subset
    was served from the provider cache.
    """

    subset: tuple[str, ...]
    utility: float
    identifiability: float
    sensitivity: float
    cost: float
    objective: float
    n_samples_used: int = 0
    eval_count: int = 1

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "utility": self.utility,
            "identifiability": self.identifiability,
            "sensitivity": self.sensitivity,
            "cost": self.cost,
            "objective": self.objective,
            "n_samples_used": self.n_samples_used,
            "eval_count": self.eval_count,
        }


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


class _LogEngine:
    """Exact and per-row statistics over an event log."""

    def __init__(self, log: EventLog, smoothing: SmoothingConfig, metric: CostMetric):
        self.log = log
        self.alpha = smoothing.alpha
        self.metric = metric
        self.cards = log.schema.cardinalities
        self._hq_rows: np.ndarray | None = None

    def hq_rows(self) -> np.ndarray:
        """Per-row H(X | q): entropy of the row's query group."""
        if self._hq_rows is None:
            self._hq_rows = kernels.entropy_rows(
                self.log.query_ids, self.log.intent_ids, self.log.n_intents, self.alpha
            )
        return self._hq_rows

    def _pattern_codes(self, idx: tuple[int, ...]) -> np.ndarray:
        codes = np.zeros(len(self.log), dtype=np.int64)
        prod = 1
        limit = 2**62 // max(self.log.n_queries, 1)
        for i in idx:
            prod *= int(self.cards[i])
            if prod > limit:
                raise EnumerationLimitError(
                    "pattern space of the selected attributes overflows the row codes"
                )
            codes = codes * self.cards[i] + self.log.values[:, i]
        return codes

    def row_stats(self, idx: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Per-row (entropy reduction, identifiability loss) for subset idx."""
        n = len(self.log)
        if idx:
            codes = self._pattern_codes(idx)
            codes_qa = codes * self.log.n_queries + self.log.query_ids
            h_qa = kernels.entropy_rows(
                codes_qa, self.log.intent_ids, self.log.n_intents, self.alpha
            )
            gain = self.hq_rows() - h_qa
        else:
            codes = np.zeros(n, dtype=np.int64)
            gain = np.zeros(n)
        if self.metric.kind == "kanon":
            distinct = kernels.distinct_rows(codes, self.log.user_ids, self.log.n_users)
            loss = (distinct < self.metric.k).astype(np.float64)
        else:
            mp = kernels.maxprob_rows(codes, self.log.user_ids, self.log.n_users, self.alpha)
            if self.metric.kind == "maxprob":
                loss = mp
            else:
                loss = -np.log2(1.0 - np.minimum(mp, MAXPROB_CLIP))
        return gain, loss


class _ModelEngine:
    """Exact evaluation on a joint model by enumerating its outcome grid."""

    def __init__(self, model: JointModel, metric: CostMetric):
        self.model = model
        self.metric = metric
        cards = [int(c) for c in model.schema.cardinalities]
        space = 1
        for c in cards:
            space *= c
            if space > ENUMERATION_LIMIT:
                raise EnumerationLimitError(
                    f"joint value space exceeds 2^24; exact mode cannot enumerate"
                )
        self.cards = cards
        # P(v) over full attribute tuples; identity is the tuple, so all
        # identifiability metrics reduce over this grid.
        px = model.query_probs @ model.intent_given_query
        pv = np.zeros(tuple(cards))
        for x in range(model.n_intents):
            cell = reduce(
                np.multiply.outer,
                [model.value_given_intent(i)[x] for i in range(len(cards))],
            )
            pv += px[x] * cell
        self.pv = pv
        igq = model.intent_given_query
        self.h_x_given_q = float(
            np.dot(model.query_probs, [_entropy_bits(igq[q]) for q in range(len(igq))])
        )

    def utility(self, idx: tuple[int, ...]) -> float:
        if not idx:
            return 0.0
        model = self.model
        arr = (model.query_probs[:, None] * model.intent_given_query)[:, :, None]
        for i in idx:
            t = model.value_given_intent(i)
            arr = arr[:, :, :, None] * t[None, :, None, :]
            arr = arr.reshape(arr.shape[0], arr.shape[1], -1)
            if arr.size > 4 * ENUMERATION_LIMIT:
                raise EnumerationLimitError("conditional grid too large to enumerate")
        pqa = arr.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            pxqa = arr / pqa[:, None, :]
            terms = np.where(arr > 0, arr * np.log2(pxqa), 0.0)
        h_x_given_qa = float(-terms.sum())
        return self.h_x_given_q - h_x_given_qa

    def identifiability(self, idx: tuple[int, ...]) -> float:
        comp = tuple(i for i in range(len(self.cards)) if i not in idx)
        pv = self.pv
        if self.metric.kind == "maxprob":
            # sum over patterns of max_{tuple matching pattern} P(tuple)
            return float(np.asarray(pv.max(axis=comp)).sum())
        pa = np.asarray(pv.sum(axis=comp)).ravel()
        if self.metric.kind == "rescaled":
            ma = np.asarray(pv.max(axis=comp)).ravel()
            nz = pa > 0
            ratio = np.minimum(ma[nz] / pa[nz], MAXPROB_CLIP)
            return float((pa[nz] * -np.log2(1.0 - ratio)).sum())
        support = np.asarray((pv > 0).astype(np.int64).sum(axis=comp)).ravel()
        violating = support < self.metric.k
        return float(pa[violating].sum())


class ObjectiveProvider:
    """Caching evaluation oracle for one ObjectiveSpec.

    Evaluations are memoized per subset; `eval_count` counts fresh
    computations only, which is what optimizer evaluation budgets are
    measured in. In sampled mode each subset's row draws are seeded by
    hashing (plan seed, subset), so evaluation order never changes results.
    """

    def __init__(self, spec: ObjectiveSpec):
        self.spec = spec
        self.schema = spec.schema
        self._sens = np.array([a.sensitivity for a in self.schema], dtype=np.float64)
        self.universe = tuple(self.schema.shareable_indices())
        if isinstance(spec.source, EventLog):
            self._engine = _LogEngine(spec.source, spec.smoothing, spec.metric)
            self._model_engine = None
        else:
            self._engine = None
            self._model_engine = _ModelEngine(spec.source, spec.metric)
        if spec.plan is not None:
            log: EventLog = spec.source
            self._n_utility, self._n_cost = spec.plan.resolve(log.n_intents)
        else:
            self._n_utility = self._n_cost = 0
        self._cache: dict[tuple[int, ...], Evaluation] = {}
        self._eval_count = 0

    @property
    def lam(self) -> float:
        return self.spec.lam

    @property
    def eval_count(self) -> int:
        return self._eval_count

    def subset_indices(self, subset: Iterable) -> tuple[int, ...]:
        items = list(subset)
        if all(isinstance(s, (int, np.integer)) for s in items):
            idx = sorted({int(s) for s in items})
            for i in idx:
                if not 0 <= i < len(self.schema):
                    raise SchemaError(f"attribute index {i} out of range")
            return tuple(idx)
        return self.schema.subset_indices(items)

    def _sample_rows(self, idx: tuple[int, ...], n: int) -> np.ndarray:
        mask = 0
        for i in idx:
            mask |= 1 << i
        digest = hashlib.blake2b(
            f"{self.spec.plan.seed}:{mask:x}".encode(), digest_size=8
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        return rng.integers(0, len(self.spec.source), size=n)

    def evaluate(self, subset: Iterable) -> Evaluation:
        idx = self.subset_indices(subset)
        hit = self._cache.get(idx)
        if hit is not None:
            return dataclasses.replace(hit, eval_count=0)
        n_used = 0
        if self._model_engine is not None:
            u = self._model_engine.utility(idx)
            ident = self._model_engine.identifiability(idx)
        else:
            gain, loss = self._engine.row_stats(idx)
            if self.spec.plan is None:
                u = float(gain.mean())
                ident = float(loss.mean())
            else:
                n_used = max(self._n_utility, self._n_cost)
                rows = self._sample_rows(idx, n_used)
                u = float(gain[rows[: self._n_utility]].mean())
                ident = float(loss[rows[: self._n_cost]].mean())
        if not idx:
            u = 0.0
        sens = float(self._sens[list(idx)].sum()) if idx else 0.0
        cost = ident + sens
        lam = self.spec.lam
        obj = u if lam == 0.0 else u - lam * cost
        ev = Evaluation(
            subset=self.schema.subset_names(idx),
            utility=u,
            identifiability=ident,
            sensitivity=sens,
            cost=cost,
            objective=obj,
            n_samples_used=n_used,
            eval_count=1,
        )
        self._cache[idx] = ev
        self._eval_count += 1
        return ev

    def value(self, subset: Iterable) -> float:
        return self.evaluate(subset).objective


def utility(spec: ObjectiveSpec, subset: Iterable) -> float:
    """U(A): expected click-entropy reduction from observing A, in bits."""
    return ObjectiveProvider(spec).evaluate(subset).utility


def identifiability(spec: ObjectiveSpec, subset: Iterable) -> float:
    """I(A): expected identifiability loss of the user conditional given A."""
    return ObjectiveProvider(spec).evaluate(subset).identifiability


def sensitivity_cost(spec: ObjectiveSpec, subset: Iterable) -> float:
    """S(A): sum of the selected attributes' sensitivities, in bits."""
    return ObjectiveProvider(spec).evaluate(subset).sensitivity


def objective(spec: ObjectiveSpec, subset: Iterable) -> Evaluation:
    """All components plus F_lambda(A) = U(A) - lambda*(I(A) + S(A))."""
    return ObjectiveProvider(spec).evaluate(subset)
