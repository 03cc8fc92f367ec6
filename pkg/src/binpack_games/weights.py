"""Analysis weight functions for bin packing bounds, with exact identity
checks and samplers that hunt for heavy feasible bins."""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Callable, Sequence

import numpy as np

from .model import as_rational, fmt_rational

Piece = tuple[F, F]  # (slope, intercept): weight = slope * x + intercept


def harmonic_index(x: F) -> int:
    """k with x in (1/(k+1), 1/k]."""
    return x.denominator // x.numerator


def _t_minus_one(limit: int) -> set[int]:
    out, t = set(), 2
    while t - 1 <= limit:
        out.add(t - 1)
        t = t * (t - 1) + 1
    return out


_T1 = frozenset(_t_minus_one(10**200))


def _is_t_minus_one(k: int) -> bool:
    return k in _T1 if k <= 10**200 else k in _t_minus_one(k)


@dataclass(frozen=True)
class WeightFn:
    family: str
    params: dict
    piece: Callable[[F], Piece] = field(repr=False, compare=False)
    breakpoints: tuple[F, ...] = field(default=(), repr=False, compare=False)

    def __call__(self, x) -> F:
        return eval_weight(self, x)

    def label(self) -> str:
        if not self.params:
            return self.family
        inner = ",".join(f"{k}={fmt_rational(v) if isinstance(v, F) else v}" for k, v in self.params.items())
        return f"{self.family}({inner})"


def eval_weight(fn: WeightFn, x) -> F:
    x = as_rational(x)
    if not (0 < x <= 1):
        raise ValueError(f"size {x} outside (0, 1]")
    a, b = fn.piece(x)
    return a * x + b


def bin_weight_under(fn: WeightFn, sizes: Sequence) -> F:
    xs = [as_rational(s) for s in sizes]
    load = sum(xs, F(0))
    if load > 1:
        raise ValueError(f"infeasible bin: load {fmt_rational(load)} > 1")
    return sum((eval_weight(fn, x) for x in xs), F(0))


# ---- table 2 ---------------------------------------------------------------

TABLE2_BREAKS = (F(1, 12), F(1, 6), F(1, 4), F(1, 3), F(5, 12), F(1, 2), F(1))


def table2(eps=F(1, 330)) -> WeightFn:
    e = as_rational(eps)
    if not (0 < e <= F(1, 330)):
        raise ValueError("table2 needs 0 < eps <= 1/330")
    rows = [
        (F(1, 12), (F(13, 11), F(0))),
        (F(1, 6), (F(6, 5) - 6 * e, F(0))),
        (F(1, 4), (F(9, 5) - 12 * e, -F(1, 10) + 3 * e)),
        (F(1, 3), (F(9, 5) - 12 * e, -F(1, 10) + 3 * e)),
        (F(5, 12), (F(6, 5) - 12 * e, F(1, 10) + 5 * e)),
        (F(1, 2), (F(13, 11), F(71, 660))),
        (F(1), (F(0), F(1))),
    ]

    def piece(x: F) -> Piece:
        for hi, p in rows:
            if x <= hi:
                return p
        raise ValueError(x)

    return WeightFn("table2", {"eps": e}, piece, TABLE2_BREAKS)


def table2_printed_ratios(eps) -> list[tuple[F, F, F, F]]:
    """(lo, hi, sup, inf) of w(x)/x per row, as printed in the source table."""
    e = as_rational(eps)
    return [
        (F(0), F(1, 12), F(13, 11), F(13, 11)),
        (F(1, 12), F(1, 6), F(6, 5) - 6 * e, F(6, 5) - 6 * e),
        (F(1, 6), F(1, 4), F(7, 5), F(6, 5) + 6 * e),
        (F(1, 4), F(1, 3), F(3, 2) - 3 * e, F(7, 5)),
        (F(1, 3), F(5, 12), F(3, 2) + 3 * e, F(36, 25)),
        (F(5, 12), F(1, 2), F(36, 25), F(461, 330)),
        (F(1, 2), F(1), F(2), F(1)),
    ]


@dataclass(frozen=True)
class RatioRow:
    lo: F
    hi: F
    sup: F
    inf: F
    printed_sup: F
    printed_inf: F

    @property
    def ok(self) -> bool:
        return self.sup == self.printed_sup and self.inf == self.printed_inf


def table2_ratio_check(eps=F(1, 330)) -> list[RatioRow]:
    """Recompute sup and inf of w(x)/x on every row from the formulas.

    On (lo, hi] the ratio a + b/x is monotone, so both extremes are the
    values (or one-sided limits) at the two ends.  The first row has lo = 0
    where the ratio is the constant slope.
    """
    fn = table2(eps)
    out = []
    for lo, hi, psup, pinf in table2_printed_ratios(eps):
        a, b = fn.piece(hi)
        at_hi = a + b / hi
        at_lo = a if lo == 0 else a + b / lo
        out.append(RatioRow(lo, hi, max(at_lo, at_hi), min(at_lo, at_hi), psup, pinf))
    return out


def table2_limits(eps=F(1, 330)) -> list[tuple[F, F, F]]:
    """(point, limit from the left, limit from the right) at the interior breakpoints."""
    fn = table2(eps)
    out = []
    for b in (F(1, 12), F(1, 6), F(1, 3), F(5, 12), F(1, 2)):
        a1, b1 = fn.piece(b)
        # the piece just to the right: evaluate a size strictly inside it
        a2, b2 = fn.piece(b + F(1, 10**9))
        out.append((b, a1 * b + b1, a2 * b + b2))
    return out


def table3_printed(eps) -> list[tuple[F, F, F]]:
    e = as_rational(eps)
    return [
        (F(1, 12), F(13, 132), F(1, 10) - e / 2),
        (F(1, 6), F(1, 5) - e, F(1, 5) + e),
        (F(1, 3), F(1, 2) - e, F(1, 2) + e),
        (F(5, 12), F(3, 5), F(3, 5)),
        (F(1, 2), F(461, 660), F(1)),
    ]


# ---- harmonic-type functions -----------------------------------------------

def _harmonic_breaks(depth: int = 60) -> tuple[F, ...]:
    ks = set(range(1, depth + 1)) | _t_minus_one(10**7) | {t + 1 for t in _t_minus_one(10**7)}
    return tuple(sorted(F(1, k) for k in ks))


_HB = _harmonic_breaks()


def w52() -> WeightFn:
    """1/k on I_k when k <= 12 or k = t_i - 1, else (k+1)/k times the size."""

    def piece(x: F) -> Piece:
        k = harmonic_index(x)
        if k <= 12 or _is_t_minus_one(k):
            return F(0), F(1, k)
        return F(k + 1, k), F(0)

    return WeightFn("w52", {}, piece, _HB)


def omega_bc() -> WeightFn:
    """1/k on I_k when k = t_i - 1, else (k+1)/k times the size."""

    def piece(x: F) -> Piece:
        k = harmonic_index(x)
        if _is_t_minus_one(k):
            return F(0), F(1, k)
        return F(k + 1, k), F(0)

    return WeightFn("omega_bc", {}, piece, _HB)


GAMMAS = {
    "step2": F(5, 726), "step4": F(1, 150), "step6:I6": F(1, 150), "step6:I9": F(11, 1800),
    "step7": F(2, 189), "step9": F(1, 112), "step11": F(1, 36), "step13": F(2, 75),
    "step15": F(1, 24), "step17": F(1, 4),
}

# intervals I_k an item may come from when packed by a list step
STEP_INTERVALS = {
    "step2": (11, 6), "step4": (10, 6), "step6": (9, 6), "step7": (7, 9), "step9": (7, 8),
    "step11": (3, 6), "step13": (3, 5), "step15": (3, 4), "step17": (1, 2),
}
NFI_TAGS = {"nfi"} | {f"step{s}" for s in (1, 3, 5, 8, 10, 12, 14, 16, 18)}


def _gamma(x: F, tag: str) -> F:
    k = harmonic_index(x)
    allowed = STEP_INTERVALS.get(tag)
    if allowed is None:
        raise ValueError(f"unknown step tag {tag!r}")
    if k not in allowed:
        raise ValueError(f"size {fmt_rational(x)} lies in I_{k}, not an interval used by {tag}")
    if tag == "step6":
        return GAMMAS["step6:I6" if k == 6 else "step6:I9"]
    return GAMMAS[tag]


def w_prime(x, step_tag: str) -> F:
    """Reduced weight of an item given the step that packed it."""
    x = as_rational(x)
    if step_tag == "special":
        return F(0)
    base = eval_weight(w52(), x)
    if step_tag in NFI_TAGS:
        return base
    return base - _gamma(x, step_tag)


def w52_prime(step_tag: str) -> WeightFn:
    base = w52()

    def piece(x: F) -> Piece:
        if step_tag == "special":
            return F(0), F(0)
        a, b = base.piece(x)
        if step_tag in NFI_TAGS:
            return a, b
        return a, b - _gamma(x, step_tag)

    return WeightFn("w52_prime", {"tag": step_tag}, piece, _HB)


# bins built by each list step: (interval index k, how many)
STEP_BINS = {
    "step2": ((11, 10), (6, 1)),
    "step4": ((10, 9), (6, 1)),
    "step6": ((9, 8), (6, 1)),
    "step7": ((7, 3), (9, 6)),
    "step9": ((7, 4), (8, 4)),
    "step11": ((3, 1), (6, 5)),
    "step13": ((3, 1), (5, 4)),
    "step15": ((3, 2), (4, 2)),
    "step17": ((1, 1), (2, 1)),
}


def lemma54_identities() -> dict[str, bool]:
    """Reduced weight of each list-step bin is exactly 1.

    Each item is represented by the right end 1/k of its interval; the
    reduced weight depends on the interval only.
    """
    out = {}
    for tag, parts in STEP_BINS.items():
        total = sum((m * w_prime(F(1, k), tag) for k, m in parts), F(0))
        out[tag] = total == 1
    return out


# ---- bonus weight function -------------------------------------------------

@dataclass(frozen=True)
class BonusParams:
    mu: F
    alpha: F
    beta: F
    gamma: F
    zeta: F = F(1, 5)
    xi: F = F(5, 18)
    case: int | None = None  # 3: many standard 3-bins; 4: many standard 4-bins; None: both

    def as_dict(self) -> dict:
        return {k: fmt_rational(getattr(self, k)) for k in ("mu", "alpha", "beta", "gamma", "zeta", "xi")} | {
            "case": self.case}


SET1 = BonusParams(mu=F("0.00562739467"), alpha=F("0.0183189656"), beta=F("0.02394636"), gamma=F(1, 16), case=3)
# the printed alpha 0.01597222 misses beta + 4 alpha >= 7/72 by 9e-9; 23/1440 meets it with equality
SET2 = BonusParams(mu=F("0.0135621337"), alpha=F(23, 1440), beta=F(1, 30), gamma=F("0.047534878"), case=4)

OMEGA6_BREAKS = (F(1, 12), F(1, 8), F(1, 6), F(1, 4), F(1, 3), F(1, 2), F(1))


def omega6(params: BonusParams = SET1) -> WeightFn:
    p = params
    bonus = [(F(1, 12), F(0)), (F(1, 8), p.mu), (F(1, 6), p.alpha), (F(1, 4), p.beta),
             (F(1, 3), p.gamma), (F(1, 2), p.zeta), (F(1), p.xi)]

    def piece(x: F) -> Piece:
        for hi, b in bonus:
            if x <= hi:
                return F(13, 12), b
        raise ValueError(x)

    return WeightFn("omega6", p.as_dict(), piece, OMEGA6_BREAKS)


@dataclass(frozen=True)
class Constraint:
    name: str
    lhs: F
    rhs: F
    sense: str  # ">=", ">" or "<="

    @property
    def ok(self) -> bool:
        if self.sense == ">":
            return self.lhs > self.rhs
        return self.lhs >= self.rhs if self.sense == ">=" else self.lhs <= self.rhs


@dataclass
class ConstraintReport:
    constraints: list[Constraint]
    psi: F
    bound: F

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.constraints)

    def failures(self) -> list[Constraint]:
        return [c for c in self.constraints if not c.ok]


def psi(p: BonusParams) -> F:
    m, a, b, g = p.mu, p.alpha, p.beta, p.gamma
    return max(g + b, g + a + m, 2 * b + a, b + a + 2 * m, 3 * a + m, a + 4 * m)


def omega6_constraints(params: BonusParams) -> ConstraintReport:
    """Every inequality the bonus analysis needs, evaluated exactly.

    The standard 3-bin condition gamma >= 1/16 is only needed when there are
    many standard 3-bins (case 3), the standard 4-bin condition beta >= 1/30
    only in case 4; with case None both are listed.
    """
    m, a, b, g = params.mu, params.alpha, params.beta, params.gamma
    q = F(5, 96)
    rows = [
        ("mu >= 1/180", m, F(1, 180), ">="), ("mu <= 1/40", m, F(1, 40), "<="),
        ("alpha >= 1/63", a, F(1, 63), ">="), ("alpha <= 1/30", a, F(1, 30), "<="),
        ("beta <= 1/20", b, F(1, 20), "<="), ("gamma <= 1/15", g, F(1, 15), "<="),
        ("gamma >= beta", g, b, ">="), ("beta >= alpha", b, a, ">="), ("alpha >= mu", a, m, ">="),
        ("mu > 0", m, F(0), ">"),
        ("2gamma + 2mu >= 5/96", 2 * g + 2 * m, q, ">="),
        ("gamma + 2beta + mu >= 5/96", g + 2 * b + m, q, ">="),
        ("gamma + beta + 2alpha >= 7/72", g + b + 2 * a, F(7, 72), ">="),
        ("gamma + 3beta >= 2/15", g + 3 * b, F(2, 15), ">="),
        ("2beta + alpha + 2mu >= 5/96", 2 * b + a + 2 * m, q, ">="),
        ("gamma + beta + 3mu >= 5/96", g + b + 3 * m, q, ">="),
        ("gamma + 2alpha + 2mu >= 5/96", g + 2 * a + 2 * m, q, ">="),
        ("beta + 4alpha >= 7/72", b + 4 * a, F(7, 72), ">="),
        ("beta >= 7/360", b, F(7, 360), ">="),
        ("alpha + beta + 4mu >= 5/96", a + b + 4 * m, q, ">="),
        ("gamma + 5mu >= 5/96", g + 5 * m, q, ">="),
        ("beta + 5alpha >= 1/14", b + 5 * a, F(1, 14), ">="),
        ("alpha + 6mu >= 5/96", a + 6 * m, q, ">="),
        ("mu >= 1/216", m, F(1, 216), ">="),
    ]
    if params.case in (3, None):
        rows.append(("gamma >= 1/16", g, F(1, 16), ">="))
    if params.case in (4, None):
        rows.append(("beta >= 1/30", b, F(1, 30), ">="))
    cons = [Constraint(*r) for r in rows]
    ps = psi(params)
    return ConstraintReport(cons, ps, 1 + F(13, 24) + ps)


# ---- per-bin bound samplers ------------------------------------------------

@dataclass(frozen=True)
class RandomSampler:
    seed: int
    trials: int = 100_000
    max_item: F | None = None


@dataclass(frozen=True)
class GridSampler:
    resolutions: tuple[int, ...] = (84, 120, 2520)
    max_item: F | None = None


@dataclass
class BoundCheck:
    passed: bool
    bound: F
    worst_weight: F
    worst_bin: list[F]
    mode: str
    trials: int
    certified_max: F | None = None  # grid mode: rigorous upper bound on the lattice optimum

    @property
    def counterexample(self) -> list[F] | None:
        return None if self.passed else self.worst_bin

    def to_dict(self) -> dict:
        d = {"passed": self.passed, "bound": fmt_rational(self.bound), "mode": self.mode,
             "trials": self.trials, "worst_weight": fmt_rational(self.worst_weight),
             "worst_bin": [fmt_rational(x) for x in self.worst_bin]}
        if self.certified_max is not None:
            d["certified_max"] = fmt_rational(self.certified_max)
        return d


def check_bin_bound(fn: WeightFn, bound, sampler: RandomSampler | GridSampler) -> BoundCheck:
    bound = as_rational(bound)
    if isinstance(sampler, GridSampler):
        return _grid_check(fn, bound, sampler)
    return _random_check(fn, bound, sampler)


_JITTER = 10**12


def _random_check(fn: WeightFn, bound: F, s: RandomSampler) -> BoundCheck:
    """Greedy fills with sizes drawn near breakpoints.

    Three fill styles are mixed: independent draws from a mixture of
    uniform sizes and breakpoints nudged by small rationals; a descending
    chain that always takes an item just above the largest breakpoint below
    the residual space; and the same chain closed by an item equal to the
    exact leftover space.  Sizes live on one integer lattice so the inner
    loop never touches fractions.
    """
    rng = np.random.default_rng(s.seed)
    cap_f = s.max_item if s.max_item is not None else F(1)
    breaks_f = sorted(b for b in fn.breakpoints if b < 1)
    D = _JITTER
    for b in breaks_f + [cap_f]:
        D = math.lcm(D, b.denominator * _JITTER)
    breaks = [b.numerator * (D // b.denominator) for b in breaks_f]
    cap = cap_f.numerator * (D // cap_f.denominator)
    worst_w, worst_bin = F(-1), []
    integers, random = rng.integers, rng.random

    def nudge() -> int:
        return int(integers(1, 10 ** int(integers(1, 8)))) * (D // _JITTER)

    def draw(top: int) -> int:
        u = random()
        if u < 0.35 or not breaks:
            return top * int(integers(1, 10**6 + 1)) // 10**6
        b = breaks[int(integers(len(breaks)))]
        return b + nudge() if u < 0.8 else b - nudge()

    for _ in range(s.trials):
        style = random()
        items: list[int] = []
        room = D
        if style < 0.5:
            misses = 0
            while misses < 6 and room > 0:
                top = min(room, cap)
                x = draw(top)
                if 0 < x <= top:
                    items.append(x)
                    room -= x
                else:
                    misses += 1
        else:
            i = bisect_left(breaks, min(room, cap))
            i -= int(integers(0, 3))  # start chains at varied depths
            while i > 0 and len(items) <= 40:
                top = min(room, cap)
                b = breaks[i - 1]
                x = b + nudge()
                if x > top:
                    x = b
                items.append(x)
                room -= x
                if room <= 0:
                    break
                i = bisect_left(breaks, min(room, cap))
            if style >= 0.8 and 0 < room <= cap:
                items.append(room)
        if not items:
            continue
        w = F(0)
        for x in items:
            w += eval_weight(fn, F(x, D))
        if w > worst_w:
            worst_w, worst_bin = w, sorted((F(x, D) for x in items), reverse=True)
    return BoundCheck(worst_w <= bound, bound, worst_w, worst_bin, "random", s.trials)


_SCALE = 1 << 40


def _grid_check(fn: WeightFn, bound: F, g: GridSampler) -> BoundCheck:
    """Unbounded knapsack over the lattice sizes m/q, for every q.

    Weights are scaled to integers; when their common denominator is small
    the optimum is exact, otherwise each weight is rounded up so the optimum
    is a rigorous upper bound.  The argmax bin is always re-evaluated exactly.
    """
    worst_w, worst_bin, cert_all = F(-1), [], F(-1)
    exact_all = True
    total = 0
    for q in g.resolutions:
        top = q if g.max_item is None else min(q, math.floor(g.max_item * q))
        ws = [eval_weight(fn, F(m, q)) for m in range(1, top + 1)]
        den = 1
        for w in ws:
            den = math.lcm(den, w.denominator)
            if den > 1 << 50:
                break
        exact = den <= 1 << 50 and max(ws) * den * q < 1 << 62
        scale = den if exact else _SCALE
        iw = np.array([(w.numerator * scale + w.denominator - 1) // w.denominator for w in ws], dtype=np.int64)
        best = np.zeros(q + 1, dtype=np.int64)
        choice = np.zeros(q + 1, dtype=np.int64)
        for c in range(1, q + 1):
            k = min(c, top)
            cand = best[c - 1::-1][:k] + iw[:k]
            j = int(np.argmax(cand))
            if cand[j] > best[c - 1]:
                best[c], choice[c] = cand[j], j + 1
            else:
                best[c], choice[c] = best[c - 1], 0
        c, items = q, []
        while c > 0:
            if choice[c] == 0:
                c -= 1
                continue
            items.append(F(int(choice[c]), q))
            c -= int(choice[c])
        w = sum((eval_weight(fn, x) for x in items), F(0))
        cert = F(int(best[q]), scale)
        cert_all = max(cert_all, cert)
        exact_all &= exact
        total += 1
        if w > worst_w:
            worst_w, worst_bin = w, sorted(items, reverse=True)
    passed = worst_w <= bound and cert_all <= bound
    mode = "grid-exact" if exact_all else "grid-upper"
    if not passed and worst_w <= bound:
        mode += "-inconclusive"
    return BoundCheck(passed, bound, worst_w, worst_bin, mode, total, cert_all)


def harmonic_chain_bin(depth: int, e=F(1, 10**8)) -> list[F]:
    """1/t_i + e for i <= depth, closed by the exact leftover space."""
    e = as_rational(e)
    t, items = 2, []
    for _ in range(depth):
        items.append(F(1, t) + e)
        t = t * (t - 1) + 1
    items.append(1 - sum(items, F(0)))
    if items[-1] <= 0:
        raise ValueError("perturbation too large for this depth")
    return items


FAMILIES = {"table2", "w52", "w52_prime", "omega_bc", "omega6"}


def make(family: str, **kw) -> WeightFn:
    if family == "table2":
        return table2(kw.get("eps", F(1, 330)))
    if family == "w52":
        return w52()
    if family == "w52_prime":
        return w52_prime(kw.get("tag", "nfi"))
    if family == "omega_bc":
        return omega_bc()
    if family == "omega6":
        s = kw.get("set", 1)
        return omega6(SET1 if int(s) == 1 else SET2)
    raise ValueError(f"unknown weight family {family!r}")


__all__ = [
    "WeightFn", "eval_weight", "bin_weight_under", "table2", "w52", "w52_prime", "omega_bc", "omega6",
    "w_prime", "lemma54_identities", "BonusParams", "SET1", "SET2", "omega6_constraints", "psi",
    "ConstraintReport", "Constraint", "RandomSampler", "GridSampler", "BoundCheck", "check_bin_bound",
    "table2_ratio_check", "table2_limits", "table3_printed", "table2_printed_ratios", "harmonic_index",
    "harmonic_chain_bin", "GAMMAS", "make", "FAMILIES",
]
