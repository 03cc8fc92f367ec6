"""Best-response dynamics, the two potentials, and exact convergence times
for unit weights."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .model import Instance, ItemClass, Packing, fmt_rational


def potential_sq(packing: Packing, instance: Instance) -> Fraction:
    weights = instance.weights
    return sum((sum((weights[i] for i in b), Fraction(0)) ** 2 for b in packing.bins), Fraction(0))


def potential_index(packing: Packing, instance: Instance) -> int:
    """Sum over items of the 1-based rank of their bin by non-increasing cardinality."""
    if not instance.unit_weight:
        raise ValueError("the index potential is defined for unit weights")
    sizes = sorted((len(b) for b in packing.bins), reverse=True)
    return sum(rank * k for rank, k in enumerate(sizes, start=1))


@dataclass(frozen=True)
class MovePolicy:
    kind: str  # first-found | max-gain | random | scripted
    seed: int | None = None
    moves: tuple = ()  # scripted: (item, target bin id) pairs

    @classmethod
    def first_found(cls):
        return cls("first-found")

    @classmethod
    def max_gain(cls):
        return cls("max-gain")

    @classmethod
    def random(cls, seed: int):
        return cls("random", seed=int(seed))

    @classmethod
    def scripted(cls, moves: Sequence[tuple[int, int]]):
        return cls("scripted", moves=tuple((int(i), int(t)) for i, t in moves))


@dataclass(frozen=True)
class MoveRecord:
    item: int
    source: int
    target: int
    phi_before: Fraction
    phi_after: Fraction

    def to_dict(self) -> dict:
        return {"item": self.item, "source": self.source, "target": self.target,
                "phi_before": fmt_rational(self.phi_before), "phi_after": fmt_rational(self.phi_after)}


@dataclass
class MoveTrace:
    moves: list[MoveRecord]
    final: Packing
    policy: MovePolicy
    bins_along: list[int] = field(default_factory=list)
    prefix: int | None = None  # staircase schedules: moves before the merge phases

    @property
    def steps(self) -> int:
        return len(self.moves)

    def to_jsonl(self) -> str:
        head = {"policy": self.policy.kind, "seed": self.policy.seed}
        lines = [json.dumps(head)] + [json.dumps(m.to_dict()) for m in self.moves]
        lines.append(json.dumps({"final": [list(b) for b in self.final.bins], "steps": self.steps}))
        return "\n".join(lines) + "\n"


class StepCapExceeded(RuntimeError):
    pass


def run_dynamics(instance: Instance, start: Packing, policy: MovePolicy = MovePolicy.first_found(),
                 step_cap: int = 10**6) -> MoveTrace:
    """Apply improving moves until none is left.

    Bin ids are the positions in ``start`` and stay fixed for the whole
    run; bins that empty out are dropped from the final packing.
    """
    sizes, weights = instance.sizes, instance.weights
    bins = [set(b) for b in start.bins]
    where = {i: b for b, members in enumerate(start.bins) for i in members}
    loads = [sum((sizes[i] for i in b), Fraction(0)) for b in bins]
    wts = [sum((weights[i] for i in b), Fraction(0)) for b in bins]
    phi = sum((w * w for w in wts), Fraction(0))
    rng = np.random.default_rng(policy.seed) if policy.kind == "random" else None
    script = list(policy.moves)
    records: list[MoveRecord] = []
    along = [sum(1 for b in bins if b)]

    def candidates():
        out = []
        for i in range(instance.n):
            a = where[i]
            for t in range(len(bins)):
                if t != a and bins[t] and loads[t] + sizes[i] <= 1 and wts[t] + weights[i] > wts[a]:
                    out.append((i, t))
        return out

    while True:
        if policy.kind == "scripted":
            if not script:
                break
            i, t = script.pop(0)
            a = where[i]
            if not (t != a and bins[t] and loads[t] + sizes[i] <= 1 and wts[t] + weights[i] > wts[a]):
                raise ValueError(f"scripted move of item {i} to bin {t} is not an improving move")
        else:
            cand = candidates()
            if not cand:
                break
            if policy.kind == "first-found":
                i, t = cand[0]
            elif policy.kind == "max-gain":
                gain = lambda m: weights[m[0]] / wts[where[m[0]]] - weights[m[0]] / (wts[m[1]] + weights[m[0]])
                best = max(gain(m) for m in cand)
                i, t = next(m for m in cand if gain(m) == best)
            elif policy.kind == "random":
                i, t = cand[int(rng.integers(len(cand)))]
            else:
                raise ValueError(f"unknown policy {policy.kind!r}")
            a = where[i]
        if len(records) >= step_cap:
            raise StepCapExceeded(f"no convergence within {step_cap} steps")
        before = phi
        phi -= wts[a] ** 2 + wts[t] ** 2
        bins[a].remove(i)
        bins[t].add(i)
        loads[a] -= sizes[i]
        loads[t] += sizes[i]
        wts[a] -= weights[i]
        wts[t] += weights[i]
        phi += wts[a] ** 2 + wts[t] ** 2
        where[i] = t
        records.append(MoveRecord(i, a, t, before, phi))
        along.append(sum(1 for b in bins if b))
    final = Packing([sorted(b) for b in bins if b])
    return MoveTrace(records, final, policy, along)


def decompose(n: int) -> tuple[int, int]:
    """(i, j) with n = i(i+1)/2 - j and 0 <= j <= i-1."""
    if n < 1:
        raise ValueError("n must be positive")
    i = 1
    while i * (i + 1) // 2 < n:
        i += 1
    return i, i * (i + 1) // 2 - n


def max_steps_formula(n: int) -> int:
    i, j = decompose(n)
    return i * (i + 1) * (i - 1) // 3 + j - i * j


def staircase_prefix_length(n: int) -> int:
    i, j = decompose(n)
    return i * (i + 1) * (i - 1) // 6 - j * (j - 1) // 2


def unit_instance(n: int) -> Instance:
    return Instance([ItemClass(Fraction(1, n), Fraction(1), n)])


def _staircase_moves(n: int) -> tuple[list[tuple[int, int]], int]:
    """Scripted moves from n singletons (item k in bin k); also the prefix length."""
    i, j = decompose(n)
    bins: list[list[int]] = [[k] for k in range(n)]
    moves: list[tuple[int, int]] = []

    def move(item: int, src: int, dst: int):
        bins[src].remove(item)
        bins[dst].append(item)
        moves.append((item, dst))

    def cascade(item: int, src: int, chain: list[int]):
        for dst in chain:
            move(item, src, dst)
            src = dst

    def build(h: int, singles: list[int]) -> list[int]:
        # returns bin ids B_1..B_h holding 1..h items
        if h == 1:
            return [singles[0]]
        cut = h * (h - 1) // 2
        stair = build(h - 1, singles[:cut])
        free = singles[cut:]
        for k, f in enumerate(free[:-1], start=1):
            cascade(bins[f][0], f, stair[: h - k])
        return [free[-1]] + stair

    if i == 1:
        return moves, 0
    cut = i * (i - 1) // 2
    stair = build(i - 1, list(range(cut)))
    free = list(range(cut, n))
    for k, f in enumerate(free, start=1):
        cascade(bins[f][0], f, stair[: i - k])
    prefix = len(moves)
    # merge phases: empty the smallest bin along the ascending chain
    while True:
        live = sorted((b for b in range(n) if bins[b]), key=lambda b: len(bins[b]))
        if len(live) <= 1:
            break
        src, chain = live[0], live[1:]
        while bins[src]:
            cascade(bins[src][0], src, chain)
            # the item sits in the largest bin now; the chain's other bins are unchanged
    return moves, prefix


def staircase_schedule(n: int) -> MoveTrace:
    """A longest improving sequence from n singletons, replayed and checked."""
    moves, prefix = _staircase_moves(n)
    inst = unit_instance(n)
    start = Packing([[k] for k in range(n)])
    trace = run_dynamics(inst, start, MovePolicy.scripted(moves), step_cap=len(moves) + 1)
    trace.prefix = prefix
    return trace


@lru_cache(maxsize=None)
def _longest(state: tuple[int, ...]) -> int:
    best = 0
    parts = list(state)
    for a in range(len(parts)):
        for b in range(len(parts)):
            if a == b:
                continue
            k1, k2 = parts[a], parts[b]
            if k2 + 1 > k1:
                nxt = [p for t, p in enumerate(parts) if t not in (a, b)] + [k2 + 1]
                if k1 > 1:
                    nxt.append(k1 - 1)
                best = max(best, 1 + _longest(tuple(sorted(nxt))))
    return best


def longest_path_exhaustive(n: int, cap: int | None = 8) -> int:
    """Longest improving path from n unit singletons, over cardinality multisets."""
    if cap is not None and n > cap:
        raise ValueError(f"exhaustive search refused: n={n} exceeds the cap of {cap}")
    return _longest(tuple([1] * n))


def min_weight_gap(instance: Instance, cap: int = 15) -> Fraction | None:
    """Smallest gap between distinct weights of feasible nonempty subsets."""
    n = instance.n
    if n > cap:
        raise ValueError(f"subset enumeration refused: n={n} exceeds the cap of {cap}")
    from .packers.sequential import scaled_sizes

    s, C = scaled_sizes(instance)
    den = 1
    for c in instance.classes:
        den = math.lcm(den, c.weight.denominator)
    w = [int(x * den) for x in instance.weights]
    load = [0] * (1 << n)
    wt = [0] * (1 << n)
    found = set()
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        prev = mask & (mask - 1)
        load[mask] = load[prev] + s[low]
        wt[mask] = wt[prev] + w[low]
        if load[mask] <= C:
            found.add(wt[mask])
    vals = sorted(found)
    if len(vals) < 2:
        return None
    return Fraction(min(b - a for a, b in zip(vals, vals[1:])), den)


def step_bound(instance: Instance, cap: int = 15) -> Fraction | None:
    """w(I)^2 / (2 * gap * w_min): no run can take more steps."""
    gap = min_weight_gap(instance, cap)
    if gap is None:
        return None
    w_min = min(c.weight for c in instance.classes)
    return instance.total_weight ** 2 / (2 * gap * w_min)
