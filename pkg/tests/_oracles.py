"""Slow dict-and-loop reference implementations.

Everything here recomputes the estimators from their definitions using
plain Python containers, independently of the array kernels and the
enumeration engines under test. Deliberately O(rows * patterns): these
run on small fixtures only.
"""

import itertools
import math
from collections import Counter, defaultdict

MAXPROB_CLIP = 1.0 - 2.0**-30


def entropy_bits(probs):
    return -sum(p * math.log2(p) for p in probs if p > 0)


def smoothed_entropy(counts, domain, alpha):
    """Entropy of (count + alpha) / (total + alpha * domain) over the domain."""
    total = sum(counts.values())
    denom = total + alpha * domain
    if denom == 0:
        return math.log2(domain)
    probs = [(c + alpha) / denom for c in counts.values()]
    probs += [alpha / denom] * (domain - len(counts))
    return entropy_bits(probs)


def smoothed_maxprob(counts, domain, alpha):
    total = sum(counts.values())
    denom = total + alpha * domain
    if denom == 0:
        return 1.0 / domain
    return (max(counts.values()) + alpha) / denom


def rescaled_loss(maxprob):
    return -math.log2(1.0 - min(maxprob, MAXPROB_CLIP))


# ---------------------------------------------------------------- event logs


def _row_pattern(log, row, idx):
    return tuple(int(log.values[row, i]) for i in idx)


def log_utility(log, names, alpha):
    """H(X|Q) - H(X|Q,A), smoothed counts, averaged with weight 1/N per row."""
    idx = [log.schema.index(n) for n in names]
    n = len(log)
    by_q = defaultdict(Counter)
    by_qa = defaultdict(Counter)
    for r in range(n):
        q = int(log.query_ids[r])
        x = int(log.intent_ids[r])
        by_q[q][x] += 1
        by_qa[(q, _row_pattern(log, r, idx))][x] += 1
    nx = log.n_intents

    def mean_entropy(groups):
        return sum(
            sum(c.values()) / n * smoothed_entropy(c, nx, alpha)
            for c in groups.values()
        )

    return mean_entropy(by_q) - mean_entropy(by_qa)


def log_identifiability(log, names, metric, alpha):
    """Expected per-pattern loss over user conditionals.

    kanon counts distinct users in the raw rows (no smoothing); maxprob and
    rescaled use the smoothed conditional over the full user vocabulary.
    """
    idx = [log.schema.index(n) for n in names]
    n = len(log)
    groups = defaultdict(Counter)
    for r in range(n):
        groups[_row_pattern(log, r, idx)][int(log.user_ids[r])] += 1
    total = 0.0
    for counts in groups.values():
        p_a = sum(counts.values()) / n
        if metric.kind == "kanon":
            loss = 1.0 if len(counts) < metric.k else 0.0
        else:
            mp = smoothed_maxprob(counts, log.n_users, alpha)
            loss = mp if metric.kind == "maxprob" else rescaled_loss(mp)
        total += p_a * loss
    return total


def log_objective(log, names, metric, alpha, lam):
    u = log_utility(log, names, alpha)
    i = log_identifiability(log, names, metric, alpha)
    s = sum(log.schema[log.schema.index(n)].sensitivity for n in names)
    return u - lam * (i + s)


# -------------------------------------------------------------- joint models


def _attr_row(model, i, x):
    """P(V_i | X = x) as a list, in either model mode."""
    t = model.tables[i]
    row = t[x] if model.mode == "naive_bayes" else t
    return [float(v) for v in row]


def model_value_joint(model):
    """P over full value tuples as a dict, by brute enumeration."""
    nq = model.n_queries
    nx = model.n_intents
    px = [
        sum(
            float(model.query_probs[q]) * float(model.intent_given_query[q, x])
            for q in range(nq)
        )
        for x in range(nx)
    ]
    cards = [int(c) for c in model.schema.cardinalities]
    joint = {}
    for v in itertools.product(*(range(c) for c in cards)):
        p = 0.0
        for x in range(nx):
            term = px[x]
            for i, vi in enumerate(v):
                term *= _attr_row(model, i, x)[vi]
            p += term
        joint[v] = p
    return joint


def model_utility(model, names):
    idx = [model.schema.index(n) for n in names]
    if not idx:
        return 0.0
    nq = model.n_queries
    nx = model.n_intents
    cards = [int(model.schema.cardinalities[i]) for i in idx]
    h_prior = 0.0
    h_posterior = 0.0
    for q in range(nq):
        pq = float(model.query_probs[q])
        pxq = [float(model.intent_given_query[q, x]) for x in range(nx)]
        h_prior += pq * entropy_bits(pxq)
        for a in itertools.product(*(range(c) for c in cards)):
            # joint P(x, a | q) for this pattern
            weights = []
            for x in range(nx):
                w = pxq[x]
                for pos, i in enumerate(idx):
                    w *= _attr_row(model, i, x)[a[pos]]
                weights.append(w)
            p_a = sum(weights)
            if p_a > 0:
                h_posterior += pq * p_a * entropy_bits([w / p_a for w in weights])
    return h_prior - h_posterior


def model_identifiability(model, names, metric):
    idx = [model.schema.index(n) for n in names]
    joint = model_value_joint(model)
    cells = defaultdict(dict)
    for v, p in joint.items():
        cells[tuple(v[i] for i in idx)][v] = p
    total = 0.0
    for members in cells.values():
        p_a = sum(members.values())
        if metric.kind == "kanon":
            support = sum(1 for p in members.values() if p > 0)
            total += p_a if support < metric.k else 0.0
        elif metric.kind == "maxprob":
            total += max(members.values())
        else:
            if p_a > 0:
                total += p_a * rescaled_loss(max(members.values()) / p_a)
    return total


def product_form_identifiability(model, names):
    """Independent-attribute maxprob closed form: product of per-attribute
    max marginals over the complement of the chosen set."""
    chosen = {model.schema.index(n) for n in names}
    out = 1.0
    for i in range(len(model.schema)):
        if i not in chosen:
            out *= max(_attr_row(model, i, 0))
    return out
