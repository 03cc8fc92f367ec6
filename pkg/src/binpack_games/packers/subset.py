"""Maximum-weight feasible subsets by branch and bound.

Items are grouped into runs of identical items (consecutive in the
priority order), so a run of ``m`` equal items is one bounded-knapsack
variable instead of ``m`` symmetric binary ones.
"""
from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from typing import Sequence

from ..model import Instance


class TieBreak(str, Enum):
    LEX_MIN = "lexicographic-min-subset"
    INPUT_ORDER = "input-order"
    ENUMERATE_ALL = "enumerate-all"

    @classmethod
    def parse(cls, value) -> "TieBreak":
        if isinstance(value, cls):
            return value
        for t in cls:
            if value in (t.value, t.name, t.name.lower()):
                return t
        raise ValueError(f"unknown tie-break policy {value!r}")


class SearchLimitExceeded(RuntimeError):
    """Raised when an exact search would exceed its configured limits."""


DEFAULT_ITEM_LIMIT = 30
DEFAULT_NODE_LIMIT = 5_000_000


def _scale(values: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for v in values:
        den = math.lcm(den, v.denominator)
    return [int(v * den) for v in values], den


class _Runs:
    """Runs of consecutive identical items, with integer sizes and weights."""

    def __init__(self, instance: Instance, items: Sequence[int], capacity: Fraction):
        sizes, weights, cls_of = instance.sizes, instance.weights, instance.class_of
        runs: list[list[int]] = []
        for i in items:
            if runs and cls_of[runs[-1][0]] == cls_of[i]:
                runs[-1].append(i)
            else:
                runs.append([i])
        self.members = runs
        s_frac = [sizes[r[0]] for r in runs] + [Fraction(capacity)]
        s_int, self.size_den = _scale(s_frac)
        self.cap = s_int.pop()
        self.s = s_int
        self.w, self.weight_den = _scale([weights[r[0]] for r in runs]) if runs else ([], 1)
        self.m = [len(r) for r in runs]
        self.N = len(runs)

    def weight_of(self, counts) -> Fraction:
        return Fraction(sum(c * w for c, w in zip(counts, self.w)), self.weight_den)

    def to_items(self, counts) -> tuple[int, ...]:
        out = []
        for r, c in zip(self.members, counts):
            out.extend(r[:c])
        return tuple(sorted(out))


class _Search:
    def __init__(self, runs: _Runs, node_limit: int | None):
        self.r = runs
        self.nodes = 0
        self.node_limit = node_limit
        # density order, heaviest per unit size first
        self.density = sorted(range(runs.N), key=lambda q: Fraction(runs.w[q], runs.s[q]), reverse=True)

    def _tick(self):
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            raise SearchLimitExceeded(f"exact search refused: more than {self.node_limit} nodes")

    def _relaxation(self, allowed, rem: int) -> Fraction:
        """Fractional knapsack value of the allowed runs within ``rem``."""
        r = self.r
        total = 0
        for q in self.density:
            if not allowed[q]:
                continue
            block = r.m[q] * r.s[q]
            if block <= rem:
                total += r.m[q] * r.w[q]
                rem -= block
            else:
                return total + Fraction(r.w[q] * rem, r.s[q])
        return Fraction(total)

    def optimum(self) -> int:
        """Maximum total (scaled integer) weight of a feasible selection."""
        r = self.r
        order = self.density
        allowed_from = []
        for p in range(len(order) + 1):
            allowed = [False] * r.N
            for q in order[p:]:
                allowed[q] = True
            allowed_from.append(allowed)
        # greedy incumbent in density order
        rem, best = r.cap, 0
        for q in order:
            c = min(r.m[q], rem // r.s[q])
            best += c * r.w[q]
            rem -= c * r.s[q]
        self.best = best

        def dfs(p: int, rem: int, val: int):
            self._tick()
            if val > self.best:
                self.best = val
            if p == len(order):
                return
            if val + self._relaxation(allowed_from[p], rem) <= self.best:
                return
            q = order[p]
            for c in range(min(r.m[q], rem // r.s[q]), -1, -1):
                dfs(p + 1, rem - c * r.s[q], val + c * r.w[q])

        dfs(0, r.cap, 0)
        return self.best

    def selections(self, target: int, first_only: bool) -> list[tuple[int, ...]]:
        """Count vectors (in priority order) reaching ``target`` weight.

        Larger counts are tried first, so the first hit is the
        lexicographically smallest item set in priority order.
        """
        r = self.r
        allowed_from = []
        for p in range(r.N + 1):
            allowed = [False] * r.N
            for q in range(p, r.N):
                allowed[q] = True
            allowed_from.append(allowed)
        found: list[tuple[int, ...]] = []
        counts = [0] * r.N

        def dfs(p: int, rem: int, val: int) -> bool:
            self._tick()
            if val == target:
                found.append(tuple(counts))
                return first_only
            if p == r.N or val + self._relaxation(allowed_from[p], rem) < target:
                return False
            for c in range(min(r.m[p], rem // r.s[p]), -1, -1):
                counts[p] = c
                if dfs(p + 1, rem - c * r.s[p], val + c * r.w[p]):
                    counts[p] = 0
                    return True
            counts[p] = 0
            return False

        dfs(0, r.cap, 0)
        return found


def best_subsets(instance: Instance, items: Sequence[int], capacity=Fraction(1),
                 first_only: bool = True, limit: int | None = DEFAULT_ITEM_LIMIT,
                 node_limit: int | None = DEFAULT_NODE_LIMIT) -> tuple[Fraction, list[tuple[int, ...]]]:
    """Optimum weight and the optimal subsets, scanned in the order of ``items``.

    Identical items are interchangeable, so among equal items only the
    earliest ones in ``items`` are ever used.
    """
    items = list(items)
    if limit is not None and len(items) > limit:
        raise SearchLimitExceeded(f"exact search refused: {len(items)} items exceed the limit of {limit}")
    if not items:
        return Fraction(0), [()]
    runs = _Runs(instance, items, Fraction(capacity))
    search = _Search(runs, node_limit)
    target = search.optimum()
    if target == 0:
        return Fraction(0), [()]
    found = search.selections(target, first_only)
    return Fraction(target, runs.weight_den), [runs.to_items(c) for c in found]


def max_weight_subset(instance: Instance, available: Sequence[int] | None = None, capacity=Fraction(1),
                      tie: TieBreak | str = TieBreak.LEX_MIN, order: Sequence[int] | None = None,
                      limit: int | None = DEFAULT_ITEM_LIMIT, node_limit: int | None = DEFAULT_NODE_LIMIT):
    """Maximum-weight subset of ``available`` that fits in ``capacity``.

    ``tie`` picks among optimal subsets: the lexicographically smallest
    set of dense indices, the earliest items of ``order``, or every
    optimal subset (as a list).  Under enumerate-all identical items are
    not distinguished.
    """
    tie = TieBreak.parse(tie)
    if available is None:
        available = range(instance.n)
    available = list(available)
    if tie is TieBreak.INPUT_ORDER and order is not None:
        pos = {i: p for p, i in enumerate(order)}
        missing = [i for i in available if i not in pos]
        if missing:
            raise ValueError(f"order does not mention item {missing[0]}")
        scan = sorted(available, key=pos.__getitem__)
    else:
        scan = sorted(available)
    _, subsets = best_subsets(instance, scan, capacity, first_only=tie is not TieBreak.ENUMERATE_ALL,
                              limit=limit, node_limit=node_limit)
    if tie is TieBreak.ENUMERATE_ALL:
        return subsets
    return subsets[0]


def max_subset_weight(instance: Instance, available: Sequence[int], capacity=Fraction(1),
                      limit: int | None = DEFAULT_ITEM_LIMIT, node_limit: int | None = DEFAULT_NODE_LIMIT):
    """Optimum weight together with one optimal subset."""
    w, subsets = best_subsets(instance, sorted(available), capacity, True, limit, node_limit)
    return w, subsets[0]
