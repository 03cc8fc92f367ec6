"""Exhaustive small-instance machinery: every feasible packing, the
equilibrium census over them, and the resulting price measures."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .model import Instance, Packing, fmt_rational
from .packers.sequential import scaled_sizes

DEFAULT_ENUM_CAP = 10


class EnumerationCapExceeded(ValueError):
    pass


def all_packings(instance: Instance, cap: int | None = DEFAULT_ENUM_CAP, max_bins: int | None = None,
                 labelled: bool = False) -> Iterator[Packing]:
    """Every feasible set partition, by restricted growth strings.

    By default packings that differ only by swapping identical items are
    reported once.  ``max_bins`` prunes partitions with more blocks.
    """
    n = instance.n
    if cap is not None and n > cap:
        raise EnumerationCapExceeded(f"enumeration refused: n={n} exceeds the cap of {cap}")
    s, C = scaled_sizes(instance)
    cls = instance.class_of
    suffix = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + s[k]
    blocks: list[list[int]] = []
    loads: list[int] = []
    seen: set = set()
    limit = n if max_bins is None else max_bins

    def rec(k: int):
        if k == n:
            if not labelled:
                sig = tuple(sorted(tuple(cls[i] for i in b) for b in blocks))
                if sig in seen:
                    return
                seen.add(sig)
            yield Packing(blocks)
            return
        free = len(blocks) * C - sum(loads)
        if len(blocks) + max(0, -(-(suffix[k] - free) // C)) > limit:
            return
        for b in range(len(blocks)):
            if loads[b] + s[k] <= C:
                blocks[b].append(k)
                loads[b] += s[k]
                yield from rec(k + 1)
                loads[b] -= s[k]
                blocks[b].pop()
        if len(blocks) < limit:
            blocks.append([k])
            loads.append(s[k])
            yield from rec(k + 1)
            loads.pop()
            blocks.pop()

    yield from rec(0)


class SubsetTable:
    """Best feasible subset weight of every item mask, for n up to ~20."""

    def __init__(self, instance: Instance):
        n = instance.n
        s, C = scaled_sizes(instance)
        den = 1
        for c in instance.classes:
            den = math.lcm(den, c.weight.denominator)
        w = [int(x * den) for x in instance.weights]
        self.weight_den = den
        size = 1 << n
        load = [0] * size
        wt = [0] * size
        best = [0] * size
        for mask in range(1, size):
            low = (mask & -mask).bit_length() - 1
            prev = mask & (mask - 1)
            load[mask] = load[prev] + s[low]
            wt[mask] = wt[prev] + w[low]
            if load[mask] <= C:
                best[mask] = wt[mask]
            else:
                m, b = mask, 0
                while m:
                    bit = m & -m
                    v = best[mask ^ bit]
                    if v > b:
                        b = v
                    m ^= bit
                best[mask] = b
        self.load, self.wt, self.best, self.cap = load, wt, best, C

    def is_strong(self, packing: Packing) -> bool:
        masks = [sum(1 << i for i in b) for b in packing.bins]
        masks.sort(key=lambda m: -self.wt[m])
        rem = sum(masks)
        for m in masks:
            if self.wt[m] != self.best[rem]:
                return False
            rem ^= m
        return True


def _is_nash_int(bins, s, w, C) -> bool:
    loads = [sum(s[i] for i in b) for b in bins]
    wts = [sum(w[i] for i in b) for b in bins]
    for a, b in enumerate(bins):
        for i in b:
            for t in range(len(bins)):
                if t != a and loads[t] + s[i] <= C and wts[t] + w[i] > wts[a]:
                    return False
    return True


@dataclass
class CensusEntry:
    packing: Packing
    bins: int
    ne: bool
    sne: bool
    wpo: bool
    spo: bool


@dataclass
class Census:
    feasible: int
    ne: int
    sne: int
    wpo_ne: int
    spo_ne: int
    opt: int
    extremes: dict = field(default_factory=dict)  # class -> (min bins, max bins)
    entries: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "ne": self.ne, "sne": self.sne, "wpo_ne": self.wpo_ne,
                "spo_ne": self.spo_ne, "opt": self.opt,
                "extremes": {k: {"min": lo, "max": hi} for k, (lo, hi) in self.extremes.items()}}


def census(instance: Instance, cap: int | None = DEFAULT_ENUM_CAP, labelled: bool = False) -> Census:
    """Classify every feasible packing.

    Pareto dominance is decided class by class on sorted cost lists; costs
    are replaced by order-preserving integer ranks so the pairwise pass can
    run on integer arrays without losing exactness.
    """
    packs = list(all_packings(instance, cap=cap, labelled=labelled))
    s, C = scaled_sizes(instance)
    den = 1
    for c in instance.classes:
        den = math.lcm(den, c.weight.denominator)
    w = [int(x * den) for x in instance.weights]
    table = SubsetTable(instance)
    n = instance.n
    ranges = [instance.class_range(j) for j in range(len(instance.classes))]

    rows = []
    for p in packs:
        cost = [None] * n
        for b in p.bins:
            W = sum(w[i] for i in b)
            for i in b:
                cost[i] = Fraction(w[i], W)
        rows.append([c for r in ranges for c in sorted(cost[k] for k in r)])
    values = sorted({c for row in rows for c in row})
    rank = {v: k for k, v in enumerate(values)}
    M = np.array([[rank[c] for c in row] for row in rows], dtype=np.int64).reshape(len(rows), n)
    counts = np.array([p.num_bins for p in packs])

    entries = []
    for idx, p in enumerate(packs):
        fewer = counts < p.num_bins
        cand = M[fewer]
        me = M[idx]
        weakly_beaten = bool((cand < me).all(axis=1).any()) if cand.size else False
        strictly_beaten = bool(((cand <= me).all(axis=1) & (cand != me).any(axis=1)).any()) if cand.size else False
        entries.append(CensusEntry(p, p.num_bins, _is_nash_int(p.bins, s, w, C), table.is_strong(p),
                                   not weakly_beaten, not strictly_beaten))
    opt = int(counts.min())

    def ext(sel):
        bs = [e.bins for e in entries if sel(e)]
        return (min(bs), max(bs)) if bs else None

    extremes = {
        "all": ext(lambda e: True),
        "ne": ext(lambda e: e.ne),
        "sne": ext(lambda e: e.sne),
        "wpo_ne": ext(lambda e: e.ne and e.wpo),
        "spo_ne": ext(lambda e: e.ne and e.spo),
    }
    return Census(
        feasible=len(entries),
        ne=sum(e.ne for e in entries),
        sne=sum(e.sne for e in entries),
        wpo_ne=sum(e.ne and e.wpo for e in entries),
        spo_ne=sum(e.ne and e.spo for e in entries),
        opt=opt,
        extremes=extremes,
        entries=entries,
    )


@dataclass(frozen=True)
class PriceReport:
    poa: Fraction | None
    pos: Fraction | None
    spoa: Fraction | None
    spos: Fraction | None
    wpo_poa: Fraction | None
    wpo_pos: Fraction | None
    spo_poa: Fraction | None
    spo_pos: Fraction | None

    def to_dict(self) -> dict:
        return {k: (None if v is None else fmt_rational(v)) for k, v in self.__dict__.items()}


def prices(instance: Instance, cap: int | None = DEFAULT_ENUM_CAP, census_result: Census | None = None) -> PriceReport:
    c = census_result or census(instance, cap=cap)

    def ratio(key, which):
        e = c.extremes.get(key)
        return None if e is None else Fraction(e[which], c.opt)

    return PriceReport(
        poa=ratio("ne", 1), pos=ratio("ne", 0),
        spoa=ratio("sne", 1), spos=ratio("sne", 0),
        wpo_poa=ratio("wpo_ne", 1), wpo_pos=ratio("wpo_ne", 0),
        spo_poa=ratio("spo_ne", 1), spo_pos=ratio("spo_ne", 0),
    )


__all__ = ["all_packings", "census", "prices", "Census", "CensusEntry", "PriceReport", "SubsetTable",
           "EnumerationCapExceeded"]
