"""Subset optimizers over the objective oracle.

All optimizers accept either an ObjectiveSpec or a provider object exposing
``evaluate(subset) -> Evaluation``, ``value(subset) -> float``, ``universe``,
``schema``, ``lam`` and ``eval_count``. Tie-breaking is always toward the
lowest schema index; exhaustive search prefers smaller sets first. Evaluation
budgets are measured in fresh evaluations (provider cache misses).
"""

from __future__ import annotations

import dataclasses
import heapq
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EnumerationLimitError, InfeasibleBudgetError, TradeoptError
from .objectives import Evaluation, ObjectiveProvider, ObjectiveSpec

GREEDY_KINDS = ("utility_only", "cost_only_min", "full_F")


@dataclass(frozen=True)
class Selection:
    """Result of one optimizer run."""

    chosen: tuple[str, ...]
    evaluation: Evaluation
    algorithm: str
    eval_count: int
    passes: int = 0
    upper_bound: float | None = None
    details: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "chosen": list(self.chosen),
            "evaluation": self.evaluation.to_dict(),
            "algorithm": self.algorithm,
            "eval_count": self.eval_count,
            "passes": self.passes,
            "upper_bound": self.upper_bound,
        }
        if self.details is not None:
            out["details"] = self.details
        return out


@dataclass(frozen=True)
class GreedyTrace:
    """Order of addition and the score reached after each step."""

    kind: str
    order: tuple[str, ...]
    incremental_values: tuple[float, ...]
    eval_count: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "order": list(self.order),
            "incremental_values": list(self.incremental_values),
            "eval_count": self.eval_count,
        }


@dataclass(frozen=True)
class TradeoffCurve:
    points: tuple[tuple[float, Selection], ...]

    def __post_init__(self):
        lams = [lam for lam, _ in self.points]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("lambda grid must be strictly increasing")

    def csv_rows(self) -> list[str]:
        rows = [
            "lambda,attrs,utility_bits,identifiability,sensitivity_bits,"
            "objective,upper_bound,eval_count"
        ]
        for lam, sel in self.points:
            ev = sel.evaluation
            bound = "" if sel.upper_bound is None else repr(sel.upper_bound)
            rows.append(
                f"{lam!r},{'+'.join(sel.chosen)},{ev.utility!r},"
                f"{ev.identifiability!r},{ev.sensitivity!r},{ev.objective!r},"
                f"{bound},{sel.eval_count}"
            )
        return rows


@dataclass(frozen=True)
class LlsConfig:
    """epsilon drives the (1 + epsilon/n^2) improvement threshold;
    max_passes (default 2n) is a safety valve, best-so-far returned on trip."""

    epsilon: float = 0.01
    max_passes: int | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_passes is not None and self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


def _as_provider(spec) -> ObjectiveProvider:
    if isinstance(spec, ObjectiveSpec):
        return ObjectiveProvider(spec)
    return spec


class NormalizedObjective:
    """Shift wrapper F'(A) = F(A) - F(universe); the argmax is unchanged.

    `value` returns shifted scores for optimizer comparisons, while
    `evaluate` keeps the true components for reporting.
    """

    def __init__(self, spec):
        self._provider = _as_provider(spec)
        self.offset = self._provider.value(self._provider.universe)

    @property
    def schema(self):
        return self._provider.schema

    @property
    def universe(self):
        return self._provider.universe

    @property
    def lam(self):
        return self._provider.lam

    @property
    def eval_count(self):
        return self._provider.eval_count

    def subset_indices(self, subset):
        return self._provider.subset_indices(subset)

    def evaluate(self, subset) -> Evaluation:
        return self._provider.evaluate(subset)

    def value(self, subset) -> float:
        return self._provider.value(subset) - self.offset


def normalize_objective(spec) -> NormalizedObjective:
    return NormalizedObjective(spec)


def _score(provider, kind: str, subset: tuple[int, ...]) -> float:
    if kind == "utility_only":
        return provider.evaluate(subset).utility
    if kind == "cost_only_min":
        return provider.evaluate(subset).cost
    return provider.value(subset)


def greedy(spec, objective_kind: str = "full_F", k: int | None = None) -> GreedyTrace:
    """Plain greedy ordering: k steps, each adding the best next attribute.

    Never early-stops: with k = n this ranks the whole universe even through
    negative increments. cost_only_min minimizes the increment instead.
    """
    if objective_kind not in GREEDY_KINDS:
        raise ValueError(f"objective_kind must be one of {GREEDY_KINDS}")
    provider = _as_provider(spec)
    universe = list(provider.universe)
    if k is None:
        k = len(universe)
    if not 0 <= k <= len(universe):
        raise ValueError(f"k must be in [0, {len(universe)}]")
    minimize = objective_kind == "cost_only_min"
    start = provider.eval_count
    chosen: list[int] = []
    values: list[float] = []
    for _ in range(k):
        best_v = None
        best_s = 0.0
        for v in universe:
            if v in chosen:
                continue
            s = _score(provider, objective_kind, tuple(chosen) + (v,))
            if best_v is None or (s < best_s if minimize else s > best_s):
                best_v, best_s = v, s
        chosen.append(best_v)
        values.append(best_s)
    return GreedyTrace(
        kind=objective_kind,
        order=tuple(provider.schema[i].name for i in chosen),
        incremental_values=tuple(values),
        eval_count=provider.eval_count - start,
    )


def lazy_greedy(spec, objective_kind: str = "full_F", k: int | None = None) -> GreedyTrace:
    """Greedy with lazily refreshed increments.

    The heap ranks candidates by their last-known marginal over the set at
    scoring time. Stale marginals bound the current ones when the objective
    is submodular (for cost_only_min: when increments are nondecreasing), so
    only heap tops need re-evaluation. Produces the exact trace of `greedy`,
    including tie-breaks. The first step ranks raw singleton scores, which
    share a baseline; from the second step on one extra evaluation of the
    empty set anchors the marginals.
    """
    if objective_kind not in GREEDY_KINDS:
        raise ValueError(f"objective_kind must be one of {GREEDY_KINDS}")
    provider = _as_provider(spec)
    universe = list(provider.universe)
    if k is None:
        k = len(universe)
    if not 0 <= k <= len(universe):
        raise ValueError(f"k must be in [0, {len(universe)}]")
    if k == 0:
        return GreedyTrace(objective_kind, (), (), 0)
    sign = 1.0 if objective_kind == "cost_only_min" else -1.0
    start = provider.eval_count
    chosen: list[int] = []
    values: list[float] = []
    # heap entries: (sign-adjusted marginal, index, scoring step, raw score);
    # at step 0 every key shares the unknown empty-set baseline, so raw
    # scores rank identically and no baseline evaluation is needed yet
    heap = []
    for v in universe:
        s = _score(provider, objective_kind, (v,))
        heap.append((sign * s, v, 0, s))
    heapq.heapify(heap)
    _, v, _, s = heapq.heappop(heap)
    chosen.append(v)
    values.append(s)
    if k > 1:
        f_cur = s
        f_empty = _score(provider, objective_kind, ())
        heap = [(key - sign * f_empty, v, 0, s) for key, v, _, s in heap]
        heapq.heapify(heap)
    for step in range(1, k):
        while True:
            key, v, stamp, s = heapq.heappop(heap)
            if stamp == step:
                chosen.append(v)
                values.append(s)
                f_cur = s
                break
            s = _score(provider, objective_kind, tuple(chosen) + (v,))
            heapq.heappush(heap, (sign * (s - f_cur), v, step, s))
    return GreedyTrace(
        kind=objective_kind,
        order=tuple(provider.schema[i].name for i in chosen),
        incremental_values=tuple(values),
        eval_count=provider.eval_count - start,
    )


def _make_selection(provider, subset, algorithm, eval_count, passes, details=None) -> Selection:
    idx = provider.subset_indices(subset)
    return Selection(
        chosen=provider.schema.subset_names(idx),
        evaluation=provider.evaluate(idx),
        algorithm=algorithm,
        eval_count=eval_count,
        passes=passes,
        details=details,
    )


def lls(spec, config: LlsConfig = LlsConfig()) -> Selection:
    """Lazy local search: best singleton start, lazy add/remove passes,
    complement check at the end.

    Elements are added (removed) while the move lifts the objective past the
    (1 + epsilon/n^2) threshold; increments are refreshed lazily, which is
    sound because submodularity only lets them decay. When the current value
    is nonpositive the multiplicative test degenerates, so an absolute floor
    of epsilon/n^2 * |best singleton| is required instead. With a nonnegative
    optimum the result reaches at least (1/3 - epsilon/n) of it.
    """
    provider = _as_provider(spec)
    universe = list(provider.universe)
    n = len(universe)
    if n < 1:
        raise TradeoptError("universe is empty; nothing to select")
    max_passes = config.max_passes if config.max_passes is not None else 2 * n
    eps_n2 = config.epsilon / (n * n)
    start = provider.eval_count

    best_v = None
    best_val = 0.0
    for v in universe:
        s = provider.value((v,))
        if best_v is None or s > best_val:
            best_v, best_val = v, s
    current_set = {best_v}
    f_cur = best_val
    unit = abs(best_val)

    def accepts(f_new: float) -> bool:
        if f_cur > 0:
            return f_new > (1.0 + eps_n2) * f_cur
        return f_new - f_cur > eps_n2 * unit

    best_seen = (f_cur, frozenset(current_set))
    passes = 0
    tripped = False
    while True:
        # upward pass
        passes += 1
        if passes > max_passes:
            tripped = True
            break
        cand = [v for v in universe if v not in current_set]
        delta = {v: provider.value(current_set | {v}) - f_cur for v in cand}
        current = dict.fromkeys(cand, True)
        while cand:
            v = max(cand, key=lambda u: (delta[u], -u))
            if not current[v]:
                delta[v] = provider.value(current_set | {v}) - f_cur
                current[v] = True
                continue
            if not accepts(f_cur + delta[v]):
                break
            current_set.add(v)
            f_cur += delta[v]
            cand.remove(v)
            for u in cand:
                current[u] = False
            if f_cur > best_seen[0]:
                best_seen = (f_cur, frozenset(current_set))
        # downward pass
        passes += 1
        if passes > max_passes:
            tripped = True
            break
        changed = False
        members = sorted(current_set)
        delta = {v: provider.value(current_set - {v}) - f_cur for v in members}
        current = dict.fromkeys(members, True)
        while members:
            v = max(members, key=lambda u: (delta[u], -u))
            if not current[v]:
                delta[v] = provider.value(current_set - {v}) - f_cur
                current[v] = True
                continue
            if not accepts(f_cur + delta[v]):
                break
            current_set.remove(v)
            f_cur += delta[v]
            members.remove(v)
            changed = True
            for u in members:
                current[u] = False
            if f_cur > best_seen[0]:
                best_seen = (f_cur, frozenset(current_set))
        if not changed:
            break

    if tripped:
        warnings.warn(
            f"local search hit the pass limit ({max_passes}); returning best seen",
            RuntimeWarning,
        )
        final = best_seen[1]
    else:
        complement = [v for v in universe if v not in current_set]
        f_comp = provider.value(complement)
        final = frozenset(current_set) if f_cur >= f_comp else frozenset(complement)
    return _make_selection(
        provider, sorted(final), "lls", provider.eval_count - start, passes
    )


def exhaustive(spec, limit: int = 20) -> Selection:
    """Exact argmax of F over all subsets of the universe.

    Subsets are visited smallest-first, lexicographic within a size, and the
    incumbent is replaced only on strict improvement, so ties resolve to the
    smaller set and then to schema order.
    """
    provider = _as_provider(spec)
    universe = list(provider.universe)
    if len(universe) > limit:
        raise EnumerationLimitError(
            f"universe has {len(universe)} attributes, above the limit of {limit}"
        )
    start = provider.eval_count
    best_subset: tuple[int, ...] | None = None
    best_val = 0.0
    for size in range(len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            val = provider.value(combo)
            if best_subset is None or val > best_val:
                best_subset, best_val = combo, val
    return _make_selection(
        provider, best_subset, "exhaustive", provider.eval_count - start, 0
    )


def online_bound(spec, reference: Iterable) -> float:
    """Data-dependent upper bound on max_A F(A) computed from any reference set.

    bound = U(ref) + sum of positive eta_V with
    eta_V = U(ref + {V}) - U(ref) - lambda * (C({V}) - C(empty)).
    The cost enters as the singleton's marginal over the empty set: a
    supermodular nondecreasing C satisfies C(A) >= sum of those marginals,
    which is what the chain of inequalities needs (the raw singleton cost
    works only when C(empty) = 0, where both forms coincide).
    """
    provider = _as_provider(spec)
    ref = provider.subset_indices(reference)
    e_ref = provider.evaluate(ref)
    e_empty = provider.evaluate(())
    lam = provider.lam
    bound = e_ref.utility
    for v in provider.universe:
        if v in ref:
            continue
        e_v = provider.evaluate((v,))
        e_rv = provider.evaluate(ref + (v,))
        eta = (e_rv.utility - e_ref.utility) - lam * (e_v.cost - e_empty.cost)
        if eta > 0:
            bound += eta
    return bound


def sweep_lambda(
    spec: ObjectiveSpec,
    lambdas: Sequence[float],
    algorithm: str = "lls",
    config: LlsConfig = LlsConfig(),
    limit: int = 20,
) -> TradeoffCurve:
    """Re-optimize at each lambda of an increasing grid; attach online bounds."""
    if algorithm not in ("lls", "exhaustive"):
        raise ValueError("sweep algorithm must be lls or exhaustive")
    if any(lam < 0 for lam in lambdas):
        raise ValueError("lambda grid must be nonnegative")
    points = []
    for lam in lambdas:
        spec_i = dataclasses.replace(spec, lam=float(lam))
        provider = ObjectiveProvider(spec_i)
        if algorithm == "lls":
            sel = lls(provider, config)
        else:
            sel = exhaustive(provider, limit)
        bound = online_bound(provider, sel.chosen)
        points.append((float(lam), dataclasses.replace(sel, upper_bound=bound)))
    return TradeoffCurve(points=tuple(points))


def constrained_max_utility(
    spec: ObjectiveSpec,
    budget: float,
    algorithm: str = "lls",
    config: LlsConfig = LlsConfig(),
    limit: int = 20,
    n_iter: int = 40,
) -> Selection:
    """Maximize U(A) subject to C(A) <= budget via binary search over lambda.

    Runs the chosen optimizer along a shrinking lambda bracket and keeps the
    feasible solution with the most utility. The empty set is the cheapest
    subset (C is nondecreasing), so a budget below C(empty) is infeasible.
    With algorithm=exhaustive the result is additionally verified against
    direct constrained enumeration, which may still exceed it: the lambda
    sweep only reaches solutions extreme for some scalarization.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if algorithm not in ("lls", "exhaustive"):
        raise ValueError("algorithm must be lls or exhaustive")
    probe = ObjectiveProvider(dataclasses.replace(spec, lam=0.0))
    e_empty = probe.evaluate(())
    if e_empty.cost > budget:
        raise InfeasibleBudgetError(
            f"cheapest subset (empty) costs {e_empty.cost}, budget is {budget}"
        )
    u_all = probe.evaluate(probe.universe).utility
    singleton_costs = [probe.evaluate((v,)).cost for v in probe.universe]
    positive = [c for c in singleton_costs if c > 0]
    lam_hi = u_all / max(min(positive) if positive else 0.0, 1e-9)

    evals_total = 0

    def run(lam: float) -> Selection:
        nonlocal evals_total
        provider = ObjectiveProvider(dataclasses.replace(spec, lam=lam))
        sel = lls(provider, config) if algorithm == "lls" else exhaustive(provider, limit)
        evals_total += sel.eval_count
        return sel

    candidates: list[tuple[float, Selection]] = [(0.0, run(0.0))]
    if lam_hi > 0:
        candidates.append((lam_hi, run(lam_hi)))
        lo, hi = 0.0, lam_hi
        for _ in range(n_iter):
            mid = 0.5 * (lo + hi)
            sel = run(mid)
            candidates.append((mid, sel))
            if sel.evaluation.cost <= budget:
                hi = mid
            else:
                lo = mid
    best: tuple[float, Selection] | None = None
    for lam, sel in candidates:
        if sel.evaluation.cost > budget:
            continue
        if best is None or sel.evaluation.utility > best[1].evaluation.utility:
            best = (lam, sel)
    details = {
        "budget": budget,
        "lambda_hi": lam_hi,
        "iterations": n_iter,
        "algorithm": algorithm,
    }
    if best is None:
        # every scalarized run overspent; the empty set is always feasible
        sel = _make_selection(probe, (), f"constrained:{algorithm}", evals_total, 0, details)
        best = (0.0, sel)
    if algorithm == "exhaustive":
        direct_best = None
        for size in range(len(probe.universe) + 1):
            for combo in itertools.combinations(probe.universe, size):
                ev = probe.evaluate(combo)
                if ev.cost <= budget and (direct_best is None or ev.utility > direct_best):
                    direct_best = ev.utility
        details["direct_utility"] = direct_best
        if best[1].evaluation.utility > direct_best + 1e-9:
            raise TradeoptError(
                "scalarized search exceeded the constrained enumeration optimum"
            )
    details["lambda_selected"] = best[0]
    lam_sel, sel = best
    return Selection(
        chosen=sel.chosen,
        evaluation=sel.evaluation,
        algorithm=f"constrained:{algorithm}",
        eval_count=evals_total,
        passes=sel.passes,
        details=details,
    )
