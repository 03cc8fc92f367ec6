"""Exact-rational items, instances, packings and item costs.

Every quantity is a ``fractions.Fraction``.  Floats are rejected at the
boundary so that razor-thin feasibility margins survive end to end.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and strings like "3/7" or "0.55" exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational: {x!r}")


def fmt_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def fmt_decimal(q: Fraction, digits: int = 12) -> str:
    """Display-only decimal rendering, rounded half-even at ``digits`` places."""
    q = Fraction(q)
    scaled = round(q * 10**digits)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


@dataclass(frozen=True)
class Item:
    size: Fraction
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "size", as_rational(self.size))
        object.__setattr__(self, "weight", as_rational(self.weight))
        if not 0 < self.size <= 1:
            raise ValueError(f"item size must lie in (0, 1], got {self.size}")
        if self.weight <= 0:
            raise ValueError(f"item weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class ItemClass:
    size: Fraction
    weight: Fraction
    count: int

    def __post_init__(self):
        Item(self.size, self.weight)  # validates ranges
        object.__setattr__(self, "size", as_rational(self.size))
        object.__setattr__(self, "weight", as_rational(self.weight))
        if not isinstance(self.count, int) or self.count < 1:
            raise ValueError(f"class count must be a positive integer, got {self.count}")

    @property
    def item(self) -> Item:
        return Item(self.size, self.weight)


class Instance:
    """A multiset of items held as classes of identical (size, weight) pairs.

    Dense index ``k`` runs over classes in order, and within a class over
    its repetitions.  The dense lists are only materialised on request, so
    instances with billions of items stay cheap as long as callers work
    with classes.
    """

    __slots__ = ("classes", "n", "unit_weight", "_offsets", "_dense")

    def __init__(self, classes: Iterable[ItemClass]):
        classes = tuple(classes)
        if not classes:
            raise ValueError("an instance needs at least one item")
        seen = set()
        for c in classes:
            key = (c.size, c.weight)
            if key in seen:
                raise ValueError(f"duplicate class (size={c.size}, weight={c.weight}); use compress()")
            seen.add(key)
        self.classes = classes
        offsets = [0]
        for c in classes:
            offsets.append(offsets[-1] + c.count)
        self._offsets = tuple(offsets)
        self.n = offsets[-1]
        self.unit_weight = len({c.weight for c in classes}) == 1
        self._dense = None

    # construction helpers
    @classmethod
    def from_items(cls, items: Iterable[Item]) -> "Instance":
        return compress(items)

    @classmethod
    def from_sizes(cls, sizes: Iterable, weights: Iterable | None = None) -> "Instance":
        sizes = [as_rational(s) for s in sizes]
        if weights is None:
            weights = [Fraction(1)] * len(sizes)
        else:
            weights = [as_rational(w) for w in weights]
        if len(weights) != len(sizes):
            raise ValueError("sizes and weights differ in length")
        return compress(Item(s, w) for s, w in zip(sizes, weights))

    # dense view
    def _materialise(self):
        if self._dense is None:
            sizes, weights, cls_of = [], [], []
            for j, c in enumerate(self.classes):
                sizes.extend([c.size] * c.count)
                weights.extend([c.weight] * c.count)
                cls_of.extend([j] * c.count)
            self._dense = (tuple(sizes), tuple(weights), tuple(cls_of))
        return self._dense

    @property
    def sizes(self) -> tuple[Fraction, ...]:
        return self._materialise()[0]

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return self._materialise()[1]

    @property
    def class_of(self) -> tuple[int, ...]:
        return self._materialise()[2]

    def class_range(self, j: int) -> range:
        return range(self._offsets[j], self._offsets[j + 1])

    def class_index(self, k: int) -> int:
        if not 0 <= k < self.n:
            raise IndexError(f"item index {k} out of range for n={self.n}")
        lo, hi = 0, len(self.classes)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._offsets[mid] <= k:
                lo = mid
            else:
                hi = mid
        return lo

    def item(self, k: int) -> Item:
        return self.classes[self.class_index(k)].item

    def size(self, k: int) -> Fraction:
        return self.classes[self.class_index(k)].size

    def weight(self, k: int) -> Fraction:
        return self.classes[self.class_index(k)].weight

    @property
    def total_size(self) -> Fraction:
        return sum((c.size * c.count for c in self.classes), Fraction(0))

    @property
    def total_weight(self) -> Fraction:
        return sum((c.weight * c.count for c in self.classes), Fraction(0))

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, Instance) and self.classes == other.classes

    def __hash__(self):
        return hash(self.classes)

    def __repr__(self):
        body = ", ".join(f"({fmt_rational(c.size)}, {fmt_rational(c.weight)}) x{c.count}" for c in self.classes)
        return f"Instance[{body}]"


def expand(instance: Instance) -> list[Item]:
    return [c.item for c in instance.classes for _ in range(c.count)]


def compress(items: Iterable[Item]) -> Instance:
    """Group identical items; classes keep their order of first appearance."""
    counts: dict[tuple[Fraction, Fraction], int] = {}
    for it in items:
        key = (it.size, it.weight)
        counts[key] = counts.get(key, 0) + 1
    return Instance(ItemClass(s, w, k) for (s, w), k in counts.items())


def sizes_in_order(sizes: Sequence, weights: Sequence | None = None) -> tuple[Instance, list[int]]:
    """Build an instance from a sequence plus the dense order that replays it.

    Useful when the caller cares about the order a sequential packer sees,
    since compressing groups equal items together.
    """
    inst = Instance.from_sizes(sizes, weights)
    weights = [Fraction(1)] * len(sizes) if weights is None else [as_rational(w) for w in weights]
    next_free = {}
    for j, c in enumerate(inst.classes):
        next_free[(c.size, c.weight)] = inst.class_range(j).start
    order = []
    for s, w in zip(sizes, weights):
        key = (as_rational(s), w)
        order.append(next_free[key])
        next_free[key] += 1
    return inst, order


class Packing:
    """Bins as tuples of dense item indices.

    Bin order is kept as given because sequential packers and deviation
    reports refer to bins by position.  Use :meth:`canonical` for a
    representation that is independent of labelling order.
    """

    __slots__ = ("bins",)

    def __init__(self, bins: Iterable[Iterable[int]]):
        self.bins = tuple(tuple(sorted(int(i) for i in b)) for b in bins)

    def __len__(self):
        return len(self.bins)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.bins)

    @property
    def num_bins(self) -> int:
        return len(self.bins)

    def bin_of(self) -> dict[int, int]:
        return {i: b for b, members in enumerate(self.bins) for i in members}

    def as_set(self) -> frozenset:
        return frozenset(frozenset(b) for b in self.bins)

    def canonical(self, instance: Instance) -> "Packing":
        key = lambda b: (-bin_weight(b, instance), -bin_load(b, instance), b[0] if b else -1)
        return Packing(sorted(self.bins, key=key))

    def signature(self, instance: Instance) -> tuple:
        """Labelling-free form: the sorted multiset of sorted class-id tuples."""
        return tuple(sorted(tuple(sorted(instance.class_index(i) for i in b)) for b in self.bins))

    def __eq__(self, other):
        return isinstance(other, Packing) and self.bins == other.bins

    def __hash__(self):
        return hash(self.bins)

    def __repr__(self):
        return f"Packing({[list(b) for b in self.bins]})"


BinType = tuple  # tuple of (class index, count) pairs, sorted by class index


def make_bin_type(counts: dict[int, int] | Iterable[tuple[int, int]]) -> BinType:
    pairs = counts.items() if isinstance(counts, dict) else counts
    merged: dict[int, int] = {}
    for j, k in pairs:
        if k:
            merged[j] = merged.get(j, 0) + k
    return tuple(sorted(merged.items()))


def type_load(bt: BinType, instance: Instance) -> Fraction:
    return sum((instance.classes[j].size * k for j, k in bt), Fraction(0))


def type_weight(bt: BinType, instance: Instance) -> Fraction:
    return sum((instance.classes[j].weight * k for j, k in bt), Fraction(0))


def type_cardinality(bt: BinType) -> int:
    return sum(k for _, k in bt)


class CompressedPacking:
    """A packing written as bin types with multiplicities."""

    __slots__ = ("types",)

    def __init__(self, types: Iterable[tuple[BinType, int]]):
        merged: dict[BinType, int] = {}
        for bt, mult in types:
            bt = make_bin_type(bt)
            if mult < 0:
                raise ValueError("negative bin multiplicity")
            if mult:
                merged[bt] = merged.get(bt, 0) + mult
        self.types = tuple(merged.items())

    @property
    def num_bins(self) -> int:
        return sum(m for _, m in self.types)

    def class_usage(self) -> dict[int, int]:
        used: dict[int, int] = {}
        for bt, mult in self.types:
            for j, k in bt:
                used[j] = used.get(j, 0) + k * mult
        return used

    def uses_exactly(self, instance: Instance) -> bool:
        used = self.class_usage()
        return all(used.get(j, 0) == c.count for j, c in enumerate(instance.classes)) and set(used) <= set(
            range(len(instance.classes))
        )

    def validate(self, instance: Instance) -> "ValidationReport":
        if not self.uses_exactly(instance):
            return ValidationReport(False, "not a partition: class counts do not match the instance")
        for t, (bt, _) in enumerate(self.types):
            if not bt:
                return ValidationReport(False, "empty bin", t)
            load = type_load(bt, instance)
            if load > 1:
                return ValidationReport(False, f"overflow: load {fmt_rational(load)} > 1", t, load)
        return ValidationReport(True)

    def expand(self, instance: Instance) -> Packing:
        nxt = [instance.class_range(j).start for j in range(len(instance.classes))]
        bins = []
        for bt, mult in self.types:
            for _ in range(mult):
                b = []
                for j, k in bt:
                    b.extend(range(nxt[j], nxt[j] + k))
                    nxt[j] += k
                bins.append(b)
        for j in range(len(instance.classes)):
            if nxt[j] != instance.class_range(j).stop:
                raise ValueError("compressed packing does not use every item exactly once")
        return Packing(bins)

    @classmethod
    def from_packing(cls, packing: Packing, instance: Instance) -> "CompressedPacking":
        acc: dict[BinType, int] = {}
        for b in packing.bins:
            counts: dict[int, int] = {}
            for i in b:
                j = instance.class_index(i)
                counts[j] = counts.get(j, 0) + 1
            bt = make_bin_type(counts)
            acc[bt] = acc.get(bt, 0) + 1
        return cls(acc.items())

    def __repr__(self):
        return f"CompressedPacking({list(self.types)})"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    reason: str | None = None
    bin: int | None = None
    load: Fraction | None = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class CostProfile:
    costs: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return sum(self.costs, Fraction(0))

    def __len__(self):
        return len(self.costs)

    def __getitem__(self, i):
        return self.costs[i]


def bin_load(bin: Iterable[int], instance: Instance) -> Fraction:
    sizes = instance.sizes
    return sum((sizes[i] for i in bin), Fraction(0))


def bin_weight(bin: Iterable[int], instance: Instance) -> Fraction:
    weights = instance.weights
    return sum((weights[i] for i in bin), Fraction(0))


def item_cost(packing: Packing, item: int, instance: Instance) -> Fraction:
    for b in packing.bins:
        if item in b:
            return instance.weights[item] / bin_weight(b, instance)
    raise KeyError(f"unassigned item {item}")


def cost_profile(packing: Packing, instance: Instance) -> CostProfile:
    weights = instance.weights
    costs: list[Fraction | None] = [None] * instance.n
    for b in packing.bins:
        W = bin_weight(b, instance)
        for i in b:
            costs[i] = weights[i] / W
    missing = [i for i, c in enumerate(costs) if c is None]
    if missing:
        raise KeyError(f"unassigned item {missing[0]}")
    return CostProfile(tuple(costs))


def validate_packing(packing: Packing, instance: Instance) -> ValidationReport:
    seen: set[int] = set()
    for b_idx, b in enumerate(packing.bins):
        if not b:
            return ValidationReport(False, "empty bin", b_idx)
        for i in b:
            if not 0 <= i < instance.n:
                return ValidationReport(False, f"index error: item {i} outside 0..{instance.n - 1}", b_idx)
            if i in seen:
                return ValidationReport(False, f"not a partition: item {i} appears twice", b_idx)
            seen.add(i)
    if len(seen) != instance.n:
        missing = min(set(range(instance.n)) - seen)
        return ValidationReport(False, f"not a partition: item {missing} is unassigned")
    for b_idx, b in enumerate(packing.bins):
        load = bin_load(b, instance)
        if load > 1:
            return ValidationReport(False, f"overflow: load {fmt_rational(load)} > 1", b_idx, load)
    return ValidationReport(True)


# JSON

def instance_to_dict(instance: Instance) -> dict:
    return {
        "items": [
            {"size": fmt_rational(c.size), "weight": fmt_rational(c.weight), "count": c.count}
            for c in instance.classes
        ]
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        rows = data["items"]
    except (KeyError, TypeError):
        raise ValueError('instance JSON needs an "items" list')
    # rows repeating a (size, weight) pair are merged into one class
    merged: dict[tuple, int] = {}
    for row in rows:
        c = ItemClass(as_rational(str(row["size"])), as_rational(str(row.get("weight", "1"))), int(row.get("count", 1)))
        merged[(c.size, c.weight)] = merged.get((c.size, c.weight), 0) + c.count
    return Instance(ItemClass(s, w, k) for (s, w), k in merged.items())


def packing_to_dict(packing: Packing) -> dict:
    return {"bins": [list(b) for b in packing.bins]}


def packing_from_dict(data: dict) -> Packing:
    try:
        return Packing(data["bins"])
    except (KeyError, TypeError):
        raise ValueError('packing JSON needs a "bins" list of index lists')


def compressed_to_dict(cp: CompressedPacking) -> dict:
    return {"bin_types": [{"classes": [[j, k] for j, k in bt], "multiplicity": m} for bt, m in cp.types]}


def compressed_from_dict(data: dict) -> CompressedPacking:
    return CompressedPacking((tuple((int(j), int(k)) for j, k in row["classes"]), int(row["multiplicity"]))
                             for row in data["bin_types"])


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def load_packing(path) -> Packing:
    with open(path) as fh:
        return packing_from_dict(json.load(fh))
