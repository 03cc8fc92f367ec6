"""Verifiers for Nash, strong and Pareto-optimal equilibria.

Results that depend on a capped exact search are tri-state; ``unknown``
is never turned into ``false``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .model import (CompressedPacking, CostProfile, Instance, ItemClass, Packing, cost_profile, fmt_rational,
                    type_load, type_weight, validate_packing)
from .packers.subset import DEFAULT_ITEM_LIMIT, DEFAULT_NODE_LIMIT, SearchLimitExceeded, max_subset_weight

DEFAULT_PARETO_CAP = 9


class Tri(str, Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @classmethod
    def of(cls, flag: bool) -> "Tri":
        return cls.TRUE if flag else cls.FALSE

    def __bool__(self):
        raise TypeError("a tri-state verdict has no truth value; compare with Tri.TRUE")


@dataclass(frozen=True)
class Deviation:
    item: int
    source: int
    target: int | str  # bin position, or "new"
    old_cost: Fraction
    new_cost: Fraction

    def to_dict(self) -> dict:
        return {"kind": "deviation", "item": self.item, "source": self.source, "target": self.target,
                "old_cost": fmt_rational(self.old_cost), "new_cost": fmt_rational(self.new_cost)}


@dataclass(frozen=True)
class Coalition:
    """Items that gain by leaving together and forming one new bin."""
    items: tuple[int, ...]
    weight: Fraction

    def to_dict(self) -> dict:
        return {"kind": "coalition", "items": list(self.items), "new_bin_weight": fmt_rational(self.weight)}


@dataclass(frozen=True)
class Dominator:
    packing: Packing
    mode: str

    def to_dict(self) -> dict:
        return {"kind": "dominating_packing", "mode": self.mode, "bins": [list(b) for b in self.packing.bins]}


@dataclass(frozen=True)
class Verdict:
    value: Tri
    witness: object = None
    note: str | None = None


@dataclass
class EquilibriumReport:
    is_ne: Tri
    is_sne: Tri
    is_wpo: Tri
    is_spo: Tri
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"is_ne": self.is_ne.value, "is_sne": self.is_sne.value,
               "is_wpo": self.is_wpo.value, "is_spo": self.is_spo.value}
        out["witness"] = {k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in self.witness.items()}
        return out


# -- unilateral moves ------------------------------------------------------

def _bin_stats(packing: Packing, instance: Instance):
    sizes, weights = instance.sizes, instance.weights
    loads = [sum((sizes[i] for i in b), Fraction(0)) for b in packing.bins]
    wts = [sum((weights[i] for i in b), Fraction(0)) for b in packing.bins]
    return loads, wts


def improving_moves(packing: Packing, instance: Instance) -> list[Deviation]:
    """All improving unilateral moves, in scan order (item index, then target bin)."""
    sizes, weights = instance.sizes, instance.weights
    loads, wts = _bin_stats(packing, instance)
    where = packing.bin_of()
    out = []
    for i in range(instance.n):
        a = where[i]
        for b in range(len(packing.bins)):
            if b != a and loads[b] + sizes[i] <= 1 and wts[b] + weights[i] > wts[a]:
                out.append(Deviation(i, a, b, weights[i] / wts[a], weights[i] / (wts[b] + weights[i])))
    # an empty bin never helps: the cost there would be 1
    return out


def find_improving_move(packing: Packing, instance: Instance) -> Deviation | None:
    sizes, weights = instance.sizes, instance.weights
    loads, wts = _bin_stats(packing, instance)
    where = packing.bin_of()
    for i in range(instance.n):
        a = where[i]
        for b in range(len(packing.bins)):
            if b != a and loads[b] + sizes[i] <= 1 and wts[b] + weights[i] > wts[a]:
                return Deviation(i, a, b, weights[i] / wts[a], weights[i] / (wts[b] + weights[i]))
    return None


def find_improving_move_compressed(cp: CompressedPacking, instance: Instance):
    """First improving move as (class, source type, target type), or None.

    Moving into another bin of the mover's own type needs that type to
    occur at least twice.
    """
    stats = [(bt, m, type_load(bt, instance), type_weight(bt, instance)) for bt, m in cp.types]
    for t, (bt, m, _, W) in enumerate(stats):
        for j, _k in bt:
            c = instance.classes[j]
            for u, (bt2, m2, load2, W2) in enumerate(stats):
                if u == t and m < 2:
                    continue
                if load2 + c.size <= 1 and W2 + c.weight > W:
                    return (j, t, u)
    return None


def is_nash(packing: Packing | CompressedPacking, instance: Instance) -> bool:
    if isinstance(packing, CompressedPacking):
        return find_improving_move_compressed(packing, instance) is None
    return find_improving_move(packing, instance) is None


# -- strong equilibria ----------------------------------------------------

def is_strong(packing: Packing, instance: Instance, limit: int | None = DEFAULT_ITEM_LIMIT,
              node_limit: int | None = DEFAULT_NODE_LIMIT) -> Verdict:
    """SNE test: bins by non-increasing weight must each be a max-weight choice.

    A bin passes when its weight equals the best feasible subset weight of
    the items not yet accounted for; uniqueness of the maximiser is not
    required.
    """
    _, wts = _bin_stats(packing, instance)
    order = sorted(range(len(packing.bins)), key=lambda b: -wts[b])
    remaining = set(range(instance.n))
    for b in order:
        try:
            best, subset = max_subset_weight(instance, sorted(remaining), limit=limit, node_limit=node_limit)
        except SearchLimitExceeded as exc:
            return Verdict(Tri.UNKNOWN, note=str(exc))
        if wts[b] < best:
            return Verdict(Tri.FALSE, Coalition(tuple(subset), best))
        remaining -= set(packing.bins[b])
    return Verdict(Tri.TRUE)


# -- Pareto dominance -----------------------------------------------------

def _class_lists(profile: CostProfile, instance: Instance) -> list[list[Fraction]]:
    return [sorted(profile.costs[k] for k in instance.class_range(j)) for j in range(len(instance.classes))]


def dominates(a: CostProfile, b: CostProfile, instance: Instance, mode: str = "strict") -> bool:
    """Does profile ``a`` dominate ``b`` up to swapping identical items?

    weak: some bijection makes every cost strictly smaller.
    strict: some bijection makes no cost larger and the profiles differ.
    """
    if mode not in ("weak", "strict"):
        raise ValueError("mode must be 'weak' or 'strict'")
    la, lb = _class_lists(a, instance), _class_lists(b, instance)
    if mode == "weak":
        return all(x < y for ca, cb in zip(la, lb) for x, y in zip(ca, cb))
    if not all(x <= y for ca, cb in zip(la, lb) for x, y in zip(ca, cb)):
        return False
    return la != lb


def _pareto(packing: Packing, instance: Instance, mode: str, cap: int | None) -> Verdict:
    from .enumeration import all_packings  # local: enumeration imports this module

    if cap is not None and instance.n > cap:
        return Verdict(Tri.UNKNOWN, note=f"n={instance.n} exceeds the enumeration cap of {cap}")
    mine = cost_profile(packing, instance)
    # the cost sum equals the bin count, so a dominating packing has fewer bins
    if packing.num_bins <= 1:
        return Verdict(Tri.TRUE)
    for q in all_packings(instance, cap=None, max_bins=packing.num_bins - 1):
        if dominates(cost_profile(q, instance), mine, instance, mode):
            return Verdict(Tri.FALSE, Dominator(q, mode))
    return Verdict(Tri.TRUE)


def is_strict_pareto(packing: Packing, instance: Instance, cap: int | None = DEFAULT_PARETO_CAP) -> Verdict:
    return _pareto(packing, instance, "strict", cap)


def is_weak_pareto(packing: Packing, instance: Instance, cap: int | None = DEFAULT_PARETO_CAP) -> Verdict:
    return _pareto(packing, instance, "weak", cap)


def classify(packing: Packing, instance: Instance, search_limit: int | None = DEFAULT_ITEM_LIMIT,
             pareto_cap: int | None = DEFAULT_PARETO_CAP, kinds: Sequence[str] = ("ne", "sne", "wpo", "spo"),
             ) -> EquilibriumReport:
    report = validate_packing(packing, instance)
    if not report:
        raise ValueError(report.reason)
    wit: dict = {}
    ne = sne = wpo = spo = Tri.UNKNOWN
    if "ne" in kinds or "sne" in kinds:
        mv = find_improving_move(packing, instance)
        ne = Tri.of(mv is None)
        if mv is not None:
            wit["ne"] = mv
    if "sne" in kinds:
        if ne is Tri.FALSE:
            sne = Tri.FALSE
        else:
            v = is_strong(packing, instance, limit=search_limit)
            sne = v.value
            if v.witness is not None:
                wit["sne"] = v.witness
    if "spo" in kinds:
        v = is_strict_pareto(packing, instance, pareto_cap)
        spo = v.value
        if v.witness is not None:
            wit["spo"] = v.witness
    if "wpo" in kinds:
        if sne is Tri.TRUE or spo is Tri.TRUE:
            wpo = Tri.TRUE
        else:
            v = is_weak_pareto(packing, instance, pareto_cap)
            wpo = v.value
            if v.witness is not None:
                wit["wpo"] = v.witness
    # implication lattice: fill in what follows, and refuse contradictions
    if sne is Tri.TRUE:
        if ne is Tri.FALSE or wpo is Tri.FALSE:
            raise AssertionError("strong equilibrium reported without NE or weak Pareto optimality")
        ne = Tri.TRUE
        wpo = Tri.TRUE
    if spo is Tri.TRUE:
        if wpo is Tri.FALSE:
            raise AssertionError("strict Pareto optimality reported without weak Pareto optimality")
        wpo = Tri.TRUE
    if wpo is Tri.FALSE:
        spo = Tri.FALSE
        sne = Tri.FALSE
    return EquilibriumReport(ne, sne, wpo, spo, wit)


# -- First Fit reproduction ---------------------------------------------

def ne_first_fit_order(packing: Packing, instance: Instance) -> list[int]:
    """Item order on which First Fit rebuilds this NE packing bin by bin."""
    if not is_nash(packing, instance):
        raise ValueError("packing is not a Nash equilibrium")
    _, wts = _bin_stats(packing, instance)
    order = sorted(range(len(packing.bins)), key=lambda b: -wts[b])
    return [i for b in order for i in packing.bins[b]]


def first_fit_reproduces_compressed(cp: CompressedPacking, instance: Instance) -> bool:
    """Would First Fit on the weight-sorted bin concatenation rebuild ``cp``?

    Earlier bins are complete when a bin's items arrive, so each item
    stays in its own bin iff it fits in no earlier bin: the smallest item
    of every bin must overflow the least-loaded earlier bin.
    """
    types = sorted(cp.types, key=lambda t: -type_weight(t[0], instance))
    min_prev_load = None
    for bt, mult in types:
        smallest = min(instance.classes[j].size for j, _ in bt)
        load = type_load(bt, instance)
        if min_prev_load is not None and min_prev_load + smallest <= 1:
            return False
        if mult >= 2 and load + smallest <= 1:
            return False
        min_prev_load = load if min_prev_load is None else min(min_prev_load, load)
    return True


def add_sentinel(instance: Instance, packing: Packing) -> tuple[Instance, Packing]:
    """Append one item of size 1 and weight 1 in a bin of its own."""
    one = Fraction(1)
    classes = list(instance.classes)
    hit = next((j for j, c in enumerate(classes) if c.size == one and c.weight == one), None)
    if hit is None:
        new = Instance(classes + [ItemClass(one, one, 1)])
        newcomer = instance.n
        remap = list(range(instance.n))
    else:
        classes[hit] = ItemClass(one, one, classes[hit].count + 1)
        new = Instance(classes)
        cut = instance.class_range(hit).stop
        newcomer = cut
        remap = [i if i < cut else i + 1 for i in range(instance.n)]
    bins = [[remap[i] for i in b] for b in packing.bins] + [[newcomer]]
    return new, Packing(bins)


# -- unit-weight NE structure ------------------------------------------

def unit_ne_structure_violations(packing: Packing, instance: Instance) -> list[str]:
    """Load and content properties every unit-weight NE must satisfy.

    Checks the regular-bin load and content bounds for every cardinality
    and the load bound on larger bins.  The 2-, 3- and 4-bin content rules
    are only checked when every 1-bin holds a single item above 1/2 and no
    larger bin holds one, which is the setting they are stated for.
    """
    if not instance.unit_weight:
        raise ValueError("structure checks are for unit weights")
    half, sizes = Fraction(1, 2), instance.sizes
    loads, _ = _bin_stats(packing, instance)
    by_k: dict[int, list[int]] = {}
    for b, members in enumerate(packing.bins):
        by_k.setdefault(len(members), []).append(b)
    bad: list[str] = []
    rho, special = {}, {}
    for k, bs in by_k.items():
        rho[k] = min(sizes[i] for b in bs for i in packing.bins[b])
        special[k] = next(b for b in bs if any(sizes[i] == rho[k] for i in packing.bins[b]))
    for k, bs in by_k.items():
        for k2, bs2 in by_k.items():
            if k2 > k:
                for b in bs2:
                    if not loads[b] > 1 - rho[k]:
                        bad.append(f"{k2}-bin {b} has load {loads[b]} <= 1 - rho_{k}")
        if k < 2:
            continue
        floor = max(1 - rho[k], Fraction(k, k + 1))
        for b in bs:
            if b == special[k]:
                continue
            if not loads[b] > floor:
                bad.append(f"regular {k}-bin {b} has load {loads[b]} <= {floor}")
            if not any(sizes[i] > Fraction(1, k + 1) for i in packing.bins[b]):
                bad.append(f"regular {k}-bin {b} has no item above 1/{k + 1}")
            if not loads[special[k]] + loads[b] > Fraction(2 * k, k + 1):
                bad.append(f"{k}-bins {special[k]} and {b} load at most 2k/(k+1) together")
    normalised = all(
        sizes[m[0]] > half if len(m) == 1 else all(sizes[i] <= half for i in m)
        for m in packing.bins
    )
    if not normalised:
        return bad
    big = lambda x: Fraction(1, 3) < x <= half
    medium = lambda x: Fraction(1, 6) < x <= Fraction(1, 3)
    small = lambda x: x <= Fraction(1, 6)
    for k in (2, 3, 4):
        for b in by_k.get(k, []):
            if b == special[k]:
                continue
            s = sorted(sizes[i] for i in packing.bins[b])
            if k == 2 and not (big(s[1]) and s[0] > Fraction(1, 4)):
                bad.append(f"regular 2-bin {b} lacks a big item with a partner above 1/4")
            if k == 3 and small(s[0]) and not (not small(s[1]) and big(s[2])):
                bad.append(f"regular 3-bin {b} with a small item breaks the big/medium rule")
            if k == 4 and small(s[0]) and not (any(big(x) for x in s) or sum(medium(x) for x in s) >= 2):
                bad.append(f"regular 4-bin {b} with a small item has neither a big nor two medium items")
    return bad
