"""Minimum bin count by branch and bound, with simple certified lower bounds."""
from __future__ import annotations

import math
from fractions import Fraction

from ..model import Instance, Packing
from .sequential import ffd, scaled_sizes

DEFAULT_OPT_CAP = 60
DEFAULT_OPT_NODES = 2_000_000


class OptIncomplete(RuntimeError):
    """Node budget ran out: carries the best packing found and the bound gap."""

    def __init__(self, best: Packing, lower_bound: int):
        self.best = best
        self.lower_bound = lower_bound
        super().__init__(f"incomplete: best found {best.num_bins} bins, lower bound {lower_bound}, "
                         f"gap {best.num_bins - lower_bound}")


def size_lower_bound(instance: Instance) -> int:
    """ceil(total size), and at least one bin per item above 1/2."""
    big = sum(c.count for c in instance.classes if c.size > Fraction(1, 2))
    return max(math.ceil(instance.total_size), big)


def opt_exact(instance: Instance, node_limit: int | None = DEFAULT_OPT_NODES,
              cap: int | None = DEFAULT_OPT_CAP) -> Packing:
    if cap is not None and instance.n > cap:
        raise ValueError(f"exact optimum refused: n={instance.n} exceeds the cap of {cap}")
    best = ffd(instance)
    lb = size_lower_bound(instance)
    if best.num_bins == lb:
        return best
    sizes, C = scaled_sizes(instance)
    order = sorted(range(instance.n), key=lambda i: (-sizes[i], i))
    s = [sizes[i] for i in order]
    n = len(s)
    suffix = [0] * (n + 1)
    for p in range(n - 1, -1, -1):
        suffix[p] = suffix[p + 1] + s[p]

    state = {"best": best.num_bins, "assign": None, "nodes": 0}
    residual: list[int] = []
    where = [0] * n

    def dfs(p: int, free: int):
        state["nodes"] += 1
        if node_limit is not None and state["nodes"] > node_limit:
            raise _Stop
        if p == n:
            if len(residual) < state["best"]:
                state["best"] = len(residual)
                state["assign"] = list(where)
            return
        # items still to place need at least this many extra bins
        extra = max(0, -(-(suffix[p] - free) // C))
        if len(residual) + extra >= state["best"]:
            return
        lo = where[p - 1] if p and s[p] == s[p - 1] else 0
        tried = set()
        for b in range(lo, len(residual)):
            r = residual[b]
            if r >= s[p] and r not in tried:
                tried.add(r)
                residual[b] -= s[p]
                where[p] = b
                dfs(p + 1, free - s[p])
                residual[b] += s[p]
                if state["best"] == lb:
                    return
        if len(residual) + 1 < state["best"]:
            residual.append(C - s[p])
            where[p] = len(residual) - 1
            dfs(p + 1, free + C - s[p])
            residual.pop()

    try:
        dfs(0, 0)
    except _Stop:
        raise OptIncomplete(_to_packing(state, order, best), lb) from None
    return _to_packing(state, order, best)


class _Stop(Exception):
    pass


def _to_packing(state, order, fallback: Packing) -> Packing:
    if state["assign"] is None:
        return fallback
    bins: dict[int, list[int]] = {}
    for p, b in enumerate(state["assign"]):
        bins.setdefault(b, []).append(order[p])
    return Packing(bins[b] for b in sorted(bins))
