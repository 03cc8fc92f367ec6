"""The eighteen-step unit-weight GSC specialisation.

Odd-style steps run NFI until a bin ends with an item above a threshold;
the remaining steps build bins of prescribed shape from lists of items in
narrow size intervals.  Lists always mean "currently unpacked items in
the interval", so an item packed elsewhere silently leaves every list.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction as F

from ..model import Instance, Packing


@dataclass(frozen=True)
class StepsParams:
    d1: F = F(1, 12)
    d3: F = F(3, 868)
    d4: F = F(1, 40)
    d5: F = F(1, 60)
    d6: F = F(1, 155)
    d7: F = F(1, 360)
    d8: F = F(1, 144)
    d9: F = F(11, 1736)
    d10: F = F(1, 308)
    d11: F = F(1, 630)

    def identities(self) -> dict[str, bool]:
        return {
            "10*d11 + d6 <= 1/42": 10 * self.d11 + self.d6 <= F(1, 42),
            "9*d10 + d6 <= 3/77": 9 * self.d10 + self.d6 <= F(3, 77),
            "8*d9 + d6 == 2/35": 8 * self.d9 + self.d6 == F(2, 35),
            "5*d6 + d3 == 1/28": 5 * self.d6 + self.d3 == F(1, 28),
        }


PARAMS = StepsParams()


def _schedule(p: StepsParams):
    """(step, kind, data).  NFI steps carry a threshold, list steps carry
    ((lo, hi, how_many), ...) half-open intervals (lo, hi]."""
    X11 = (F(1, 12), F(1, 12) + p.d11)
    X6 = (F(1, 7), F(1, 7) + p.d6)
    X10 = (F(1, 11), F(1, 11) + p.d10)
    X9 = (F(1, 10), F(1, 10) + p.d9)
    X7 = (F(1, 8), F(1, 8) + p.d7)
    X9b = (F(1, 10), F(1, 10) + p.d7)
    X7b = (F(1, 8), F(1, 8) + p.d8)
    X8 = (F(1, 9), F(1, 9) + p.d8)
    X3 = (F(1, 4), F(1, 4) + p.d3)
    X5 = (F(1, 6), F(1, 6) + p.d5)
    X3b = (F(1, 4), F(1, 4) + p.d5)
    X4 = (F(1, 5), F(1, 5) + p.d4)
    X3c = (F(1, 4), F(1, 4) + p.d4)
    X2 = (F(1, 3), F(1, 3) + p.d1)
    X1 = (F(1, 2), F(1, 2) + p.d1)
    return [
        (1, "nfi", F(1, 12)),
        (2, "lists", ((X11, 10), (X6, 1))),
        (3, "nfi", F(1, 11)),
        (4, "lists", ((X10, 9), (X6, 1))),
        (5, "nfi", F(1, 10)),
        (6, "lists", ((X9, 8), (X6, 1))),
        (7, "lists", ((X7, 3), (X9b, 6))),
        (8, "nfi", F(1, 9)),
        (9, "lists", ((X7b, 4), (X8, 4))),
        (10, "nfi", F(1, 7)),
        (11, "lists", ((X3, 1), (X6, 5))),
        (12, "nfi", F(1, 6)),
        (13, "lists", ((X3b, 1), (X5, 4))),
        (14, "nfi", F(1, 5)),
        (15, "lists", ((X3c, 2), (X4, 2))),
        (16, "nfi", F(1, 3)),
        (17, "lists", ((X1, 1), (X2, 1))),
        (18, "nfi", None),
    ]


def steps(instance: Instance, params: StepsParams = PARAMS, trace: bool = False):
    """Pack a unit-weight instance; with ``trace`` also return each bin's step."""
    if not instance.unit_weight:
        raise ValueError("the step algorithm is defined for unit weights only")
    sizes = instance.sizes
    # remaining items sorted by (size, index); kept as a list rebuilt per bin
    remaining = sorted(range(instance.n), key=lambda i: (sizes[i], i))
    bins: list[list[int]] = []
    origin: list[int] = []

    def take(chosen: list[int], step: int):
        load = sum((sizes[i] for i in chosen), F(0))
        if load > 1:
            raise RuntimeError(f"step {step} built an overfull bin (load {load})")
        chosen_set = set(chosen)
        remaining[:] = [i for i in remaining if i not in chosen_set]
        bins.append(sorted(chosen))
        origin.append(step)

    for step, kind, data in _schedule(params):
        if kind == "nfi":
            # a bin ending above the threshold means nothing at or below it
            # is left; checking before each bin also skips a step whose
            # threshold is already cleared on entry
            while remaining and (data is None or sizes[remaining[0]] <= data):
                load, prefix = F(0), []
                for i in remaining:
                    if load + sizes[i] > 1:
                        break
                    load += sizes[i]
                    prefix.append(i)
                take(prefix, step)
        else:
            while True:
                keys = [sizes[i] for i in remaining]
                chosen, ok = [], True
                for (lo, hi), need in data:
                    start = bisect_right(keys, lo)
                    stop = bisect_right(keys, hi)
                    pool = [i for i in remaining[start:stop] if i not in chosen]
                    if len(pool) < need:
                        ok = False
                        break
                    chosen.extend(pool[:need])
                if not ok:
                    break
                take(chosen, step)
    packing = Packing(bins)
    return (packing, origin) if trace else packing
