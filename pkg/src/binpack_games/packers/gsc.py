"""Greedy Set Cover: repeatedly pack a maximum-weight feasible subset."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..model import Instance, Packing
from .subset import (DEFAULT_ITEM_LIMIT, DEFAULT_NODE_LIMIT, SearchLimitExceeded, TieBreak,
                     best_subsets)

DEFAULT_STATE_CAP = 10**6


def gsc(instance: Instance, tie: TieBreak | str = TieBreak.LEX_MIN, order: Sequence[int] | None = None,
        limit: int | None = DEFAULT_ITEM_LIMIT, node_limit: int | None = DEFAULT_NODE_LIMIT,
        state_cap: int = DEFAULT_STATE_CAP):
    """Run GSC under a tie-break policy.

    Returns a Packing whose bins are listed in creation order, or under
    enumerate-all a list of every distinct output.  Outputs differing only
    by swapping identical items count as one.
    """
    tie = TieBreak.parse(tie)
    if tie is TieBreak.ENUMERATE_ALL:
        return gsc_all(instance, limit=limit, node_limit=node_limit, state_cap=state_cap)
    if tie is TieBreak.INPUT_ORDER and order is not None:
        remaining = list(order)
        if sorted(remaining) != list(range(instance.n)):
            raise ValueError("order must be a permutation of the dense item indices")
    else:
        remaining = list(range(instance.n))
    bins = []
    while remaining:
        _, subsets = best_subsets(instance, remaining, first_only=True, limit=limit, node_limit=node_limit)
        chosen = set(subsets[0])
        bins.append(sorted(chosen))
        remaining = [i for i in remaining if i not in chosen]
    return Packing(bins)


def _representatives(instance: Instance, counts: Sequence[int]) -> list[int]:
    items = []
    for j, c in enumerate(counts):
        items.extend(instance.class_range(j)[:c])
    return items


def gsc_all(instance: Instance, limit: int | None = DEFAULT_ITEM_LIMIT,
            node_limit: int | None = DEFAULT_NODE_LIMIT, state_cap: int = DEFAULT_STATE_CAP) -> list[Packing]:
    """Every GSC output, up to swapping identical items.

    Memoised on the multiset of remaining items.  Each output is a
    Packing in canonical bin order.
    """
    class_of = instance.class_of
    memo: dict[tuple[int, ...], frozenset] = {}
    budget = [0]

    def outputs(state: tuple[int, ...]) -> frozenset:
        if state in memo:
            return memo[state]
        if not any(state):
            return frozenset([()])
        items = _representatives(instance, state)
        _, subsets = best_subsets(instance, items, first_only=False, limit=limit, node_limit=node_limit)
        acc = set()
        for sub in subsets:
            take = [0] * len(state)
            for i in sub:
                take[class_of[i]] += 1
            rest = tuple(s - t for s, t in zip(state, take))
            bt = tuple(take)
            for tail in outputs(rest):
                acc.add(tuple(sorted((bt,) + tail)))
                budget[0] += 1
            if budget[0] > state_cap:
                raise SearchLimitExceeded(f"enumerate-all exceeded {state_cap} partial states")
        memo[state] = frozenset(acc)
        return memo[state]

    start = tuple(c.count for c in instance.classes)
    result = []
    for sig in sorted(outputs(start)):
        nxt = [instance.class_range(j).start for j in range(len(instance.classes))]
        bins = []
        for bt in sig:
            b = []
            for j, k in enumerate(bt):
                b.extend(range(nxt[j], nxt[j] + k))
                nxt[j] += k
            bins.append(b)
        result.append(Packing(bins).canonical(instance))
    return result


def signature_of_counts(instance: Instance, packing: Packing) -> tuple:
    """Class-count-vector signature, matching the form used by gsc_all."""
    k = len(instance.classes)
    rows = []
    for b in packing.bins:
        v = [0] * k
        for i in b:
            v[instance.class_of[i]] += 1
        rows.append(tuple(v))
    return tuple(sorted(rows))


def bin_weights_greedy_ok(instance: Instance, packing: Packing, limit=DEFAULT_ITEM_LIMIT,
                          node_limit=DEFAULT_NODE_LIMIT) -> bool:
    """True iff the bins, taken in the given order, are each a maximum-weight choice."""
    remaining = set(range(instance.n))
    weights = instance.weights
    for b in packing.bins:
        best, _ = best_subsets(instance, sorted(remaining), first_only=True, limit=limit, node_limit=node_limit)
        if sum((weights[i] for i in b), Fraction(0)) != best:
            return False
        remaining -= set(b)
    return True
