"""Next Fit, First Fit and the two sorted Next Fit variants."""
from __future__ import annotations

import math
from typing import Sequence

from ..model import Instance, Packing


def scaled_sizes(instance: Instance) -> tuple[list[int], int]:
    """Dense sizes as integers over a common denominator, plus that denominator."""
    den = 1
    for c in instance.classes:
        den = math.lcm(den, c.size.denominator)
    out = []
    for c in instance.classes:
        out.extend([int(c.size * den)] * c.count)
    return out, den


def _order(instance: Instance, order: Sequence[int] | None) -> list[int]:
    if order is None:
        return list(range(instance.n))
    order = list(order)
    if sorted(order) != list(range(instance.n)):
        raise ValueError("order must be a permutation of the dense item indices")
    return order


def next_fit(instance: Instance, order: Sequence[int] | None = None) -> Packing:
    sizes, cap = scaled_sizes(instance)
    bins: list[list[int]] = []
    load = cap + 1
    for i in _order(instance, order):
        if load + sizes[i] > cap:
            bins.append([])
            load = 0
        bins[-1].append(i)
        load += sizes[i]
    return Packing(bins)


class _MaxTree:
    """Segment tree over residual capacities; finds the leftmost bin that fits."""

    def __init__(self, leaves: int, fill: int):
        size = 1
        while size < leaves:
            size *= 2
        self.size = size
        self.t = [fill] * (2 * size)

    def leftmost_at_least(self, x: int) -> int:
        t = self.t
        if t[1] < x:
            return -1
        v = 1
        while v < self.size:
            v = 2 * v if t[2 * v] >= x else 2 * v + 1
        return v - self.size

    def set(self, pos: int, value: int):
        t = self.t
        v = pos + self.size
        t[v] = value
        v //= 2
        while v:
            t[v] = max(t[2 * v], t[2 * v + 1])
            v //= 2


def first_fit(instance: Instance, order: Sequence[int] | None = None) -> Packing:
    sizes, cap = scaled_sizes(instance)
    seq = _order(instance, order)
    # unopened bins have full residual capacity, so the leftmost bin with
    # enough room is the lowest-index open bin that fits, or a fresh one
    tree = _MaxTree(max(1, len(seq)), cap)
    residual: list[int] = []
    bins: list[list[int]] = []
    for i in seq:
        b = tree.leftmost_at_least(sizes[i])
        if b == len(bins):
            bins.append([])
            residual.append(cap)
        bins[b].append(i)
        residual[b] -= sizes[i]
        tree.set(b, residual[b])
    return Packing(bins)


def nfd(instance: Instance) -> Packing:
    sizes = instance.sizes
    return next_fit(instance, sorted(range(instance.n), key=lambda i: -sizes[i]))


def nfi(instance: Instance) -> Packing:
    sizes = instance.sizes
    return next_fit(instance, sorted(range(instance.n), key=lambda i: sizes[i]))


def ffd(instance: Instance) -> Packing:
    sizes = instance.sizes
    return first_fit(instance, sorted(range(instance.n), key=lambda i: -sizes[i]))
