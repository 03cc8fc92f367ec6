"""Sylvester-type sequences and the lower-bound instance families.

Every family returns a compressed instance together with a reference
equilibrium packing and a reference optimal packing, both as bin types.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as F

from .model import (CompressedPacking, Instance, ItemClass, as_rational, compressed_to_dict, fmt_rational,
                    instance_to_dict)

KINDS = ("t", "tau", "nu")


def sequence(kind: str, r: int) -> list[int]:
    if r < 1:
        raise ValueError("r must be at least 1")
    if kind == "t":
        out = [2]
    elif kind == "tau":
        out = [2, 4, 9, 37][:r]
    elif kind == "nu":
        out = [9]
    else:
        raise ValueError(f"unknown sequence {kind!r}")
    while len(out) < r:
        x = out[-1]
        out.append(x * (x - 1) + 1)
    return out


def partial_sums(kind: str, r: int) -> tuple[F, F]:
    """(sum of 1/x_i, sum of 1/(x_i - 1)) over the first r terms."""
    xs = sequence(kind, r)
    return sum((F(1, x) for x in xs), F(0)), sum((F(1, x - 1) for x in xs), F(0))


def theta_partial(r: int) -> F:
    """sum_{i<=r} 1/(tau_i - 1) plus the extra 1/(tau_3 - 1) term; needs r >= 3."""
    if r < 3:
        raise ValueError("the extra term needs r >= 3")
    return partial_sums("tau", r)[1] + F(1, 8)


def limit_bracket(kind: str, r: int) -> tuple[F, F]:
    """Rigorous bracket for the infinite sum of 1/(x_i - 1) (tau: with the extra term).

    From the fourth term on, x_{i+1} - 1 = x_i (x_i - 1) >= 2 (x_i - 1), so the
    tail after r terms is at most twice its first term.
    """
    if r < 4:
        raise ValueError("use r >= 4 so the tail is geometric")
    lo = theta_partial(r) if kind == "tau" else partial_sums(kind, r)[1]
    nxt = sequence(kind, r + 1)[-1]
    return lo, lo + F(2, nxt - 1)


THETA_UPPER = F(16119, 10000)


def pow10_below(x: F, strict: bool = True) -> F:
    """Largest 1/10^k below x (or at most x when not strict)."""
    k = 1
    while (F(1, 10**k) >= x) if strict else (F(1, 10**k) > x):
        k += 1
    return F(1, 10**k)


@dataclass
class GeneratorOutput:
    family: str
    params: dict
    instance: Instance
    reference_packing: CompressedPacking
    reference_opt: CompressedPacking
    claimed_ratio: F
    names: dict = field(default_factory=dict)  # class index -> readable item name

    @property
    def ratio(self) -> F:
        return F(self.reference_packing.num_bins, self.reference_opt.num_bins)

    def to_dict(self) -> dict:
        params = {k: (fmt_rational(v) if isinstance(v, F) else v) for k, v in self.params.items()}
        return {
            "family": self.family,
            "params": params,
            "instance": instance_to_dict(self.instance),
            "reference_packing": compressed_to_dict(self.reference_packing),
            "reference_opt": compressed_to_dict(self.reference_opt),
            "claimed_ratio": fmt_rational(self.claimed_ratio),
            "bins": {"reference_packing": self.reference_packing.num_bins,
                     "reference_opt": self.reference_opt.num_bins},
        }


class _Classes:
    """Collects (size, weight) kinds in first-use order."""

    def __init__(self):
        self.index: dict[tuple[F, F], int] = {}
        self.names: dict[int, str] = {}

    def __call__(self, size, weight=F(1), name: str = "") -> int:
        key = (F(size), F(weight))
        if key not in self.index:
            self.index[key] = len(self.index)
            self.names[self.index[key]] = name
        return self.index[key]

    def build(self, packing: CompressedPacking, opt: CompressedPacking) -> Instance:
        used = packing.class_usage()
        inst = Instance(ItemClass(s, w, used[j]) for (s, w), j in sorted(self.index.items(), key=lambda kv: kv[1]))
        if opt.class_usage() != used:
            raise AssertionError("the two reference packings hold different items")
        return inst


def _check(out: GeneratorOutput) -> GeneratorOutput:
    for cp in (out.reference_packing, out.reference_opt):
        rep = cp.validate(out.instance)
        if not rep:
            raise AssertionError(f"{out.family}: reference packing invalid: {rep.reason}")
    if out.ratio != out.claimed_ratio:
        raise AssertionError(f"{out.family}: bin ratio {out.ratio} differs from claimed {out.claimed_ratio}")
    return out


# ---- weighted family with ratio 17l/(10l+2) --------------------------------

def gen_ff17(ell: int = 3, eps=None, delta=None) -> GeneratorOutput:
    """Powers-of-three weights; the reference packing is the unique strong
    equilibrium and First Fit rebuilds it from the dense item order."""
    if ell < 3:
        raise ValueError("ell must be at least 3")
    eps = pow10_below(F(1, 120)) if eps is None else as_rational(eps)
    if not (0 < eps < F(1, 120)):
        raise ValueError("need 0 < eps < 1/120")
    dcap = eps / 3 ** (ell + 4)
    delta = pow10_below(dcap) if delta is None else as_rational(delta)
    if not (0 < delta < dcap):
        raise ValueError("need 0 < delta < eps / 3^(ell+4)")
    e, d, L = eps, delta, ell
    C = _Classes()

    def a(i, p):
        if i <= 3:
            s = F(1, 6) + e / 3**p - d
        elif i <= 5:
            s = F(1, 6) + e / 3**p - 2 * d
        elif i <= 7:
            s = F(1, 6) - e / 3 ** (p + 1) - d
        else:
            s = F(1, 6) - e / 3 ** (p + 1) - 2 * d
        w = F(3, 9**p) if i in (1, 2, 3, 6, 7) else F(1, 9**p)
        return C(s, w, f"a[{i},{p}]")

    def b(i, p):
        if i <= 5:
            s = F(1, 3) + e / 3 ** (p - 1) - i * d
            w = F(1, 3 ** (2 * L + 5 * (p - 1) + i))
        else:
            s = F(1, 3) - e / 3**p - (i - 5) * d
            w = F(1, 3 ** (2 * L + 5 * (p - 2) + i))
        return C(s, w, f"b[{i},{p}]")

    def c(i):
        return C(F(1, 2) + d, F(1, 3 ** (7 * L + i)), f"c[{i}]")

    def cnt(ids):
        out: dict[int, int] = {}
        for j in ids:
            out[j] = out.get(j, 0) + 1
        return out

    bins = []
    for p in range(1, L + 1):
        bins.append(cnt([a(i, p) for i in (1, 2, 3, 6, 7)]))
        bins.append(cnt([a(i, p) for i in (4, 5, 8, 9, 10)]))
    for p in range(1, L + 1):
        for j in range(1, 6):
            bins.append(cnt([b(j, p), b(j + 5, p)]))
    for j in range(1, 10 * L + 1):
        bins.append(cnt([c(j)]))
    A = CompressedPacking((bt, 1) for bt in bins)

    opt = []
    for i in range(1, 6):
        for p in range(1, L + 1):
            opt.append(cnt([a(i, p), b(5 + i, p), c(5 * (p - 1) + i)]))
        for p in range(3, L + 1):
            opt.append(cnt([a(5 + i, p - 2), b(i, p), c(5 * (p + L - 3) + i)]))
    for i in range(1, 6):
        opt.append(cnt([c(10 * (L - 1) + i), b(i, 1)]))
        opt.append(cnt([c(10 * (L - 1) + 5 + i), b(i, 2)]))
    opt.append(cnt([a(i, L) for i in range(6, 11)]))
    opt.append(cnt([a(i, L - 1) for i in range(6, 11)]))
    O = CompressedPacking((bt, 1) for bt in opt)

    inst = C.build(A, O)
    return _check(GeneratorOutput("ff17", {"ell": L, "eps": e, "delta": d}, inst, A, O,
                                  F(17 * L, 10 * L + 2), C.names))


# ---- unit-weight PoA family -------------------------------------------------

def poa_unit_counts(r: int, M: int = 1) -> dict:
    """pi_i, Delta_i, n_i and the closed-form ratio for the t-sequence family."""
    t = [None] + sequence("t", r + 1)  # 1-based
    pi = {j: t[j] * (t[j] - 1) * (t[j] - 2) + 2 for j in range(2, r + 1)}

    def Delta(i):
        return M * math.prod(t[1:i]) * math.prod(pi[j] for j in range(i, r + 1)) * (t[r] - 1)

    D = {i: Delta(i) for i in range(2, r + 2)}
    n = {i: D[i] // pi[i] for i in range(2, r + 1)}
    lam = {i: F(D[i], D[2]) for i in range(2, r + 1)}
    mu = {i: lam[i] / pi[i] for i in range(2, r + 1)}
    ratio = 1 + sum((lam[i] / (t[i] - 1) + mu[i] * (t[i] - 2) for i in range(2, r + 1)), F(0))
    return {"t": t, "pi": pi, "Delta": D, "n": n, "lambda": lam, "mu": mu, "ratio": ratio}


def gen_poa_unit(r: int = 3, M: int = 1, eps=None) -> GeneratorOutput:
    """Unit weights; the reference packing is a Nash equilibrium with three
    bin types per class.  Item counts grow quickly, so only bin types are kept."""
    if r < 3:
        raise ValueError("r must be at least 3")
    if M < 1:
        raise ValueError("M must be positive")
    eps = pow10_below(F(1, 2)) if eps is None else as_rational(eps)
    if not (0 < eps < F(1, 2)):
        raise ValueError("need 0 < eps < 1/2")
    k = poa_unit_counts(r, M)
    t, pi, n = k["t"], k["pi"], k["n"]
    base = eps / F(t[r + 1] + 1) ** 4
    dl = {i: base ** (r - i + 1) for i in range(1, r + 1)}
    C = _Classes()
    a1 = C(F(1, 2) + dl[1], 1, "a1")
    cls = {}
    for i in range(2, r + 1):
        ti, tp, di, dp = t[i], t[i - 1], dl[i], dl[i - 1]
        cls[i] = {
            "a1": C(F(1, ti) + di, 1, f"a[{i}]^1"),
            "a2": C(F(1, ti) - (ti - 1) * di + dp, 1, f"a[{i}]^2"),
            "a3": C(F(1, ti) + (ti - 1) ** 2 * di - (tp - 1) ** 2 * dp, 1, f"a[{i}]^3"),
            "b1": C(F(1, t[i + 1] - 1) - di - (tp - 1) ** 2 * dp, 1, f"b[{i}]^1"),
            "b2": C(F(1, t[i + 1] - 1) + (ti - 1) * di - ((tp - 1) ** 2 + 1) * dp, 1, f"b[{i}]^2"),
        }
    D2 = k["Delta"][2]
    ne = [({a1: 1}, D2)]
    for i in range(2, r + 1):
        ti, c = t[i], cls[i]
        many = n[i] * (pi[i] - ti * ti + ti)
        if many % (ti - 1):
            raise AssertionError("n_i (pi_i - t_i^2 + t_i) must be divisible by t_i - 1")
        ne.append(({c["a1"]: ti - 1}, many // (ti - 1)))
        ne.append(({c["a3"]: 1, c["a2"]: ti - 2}, n[i] * ti))
        ne.append(({c["b2"]: ti, c["b1"]: (ti - 1) ** 2 - 2}, n[i] * (ti - 2)))
    opt = []
    for i in range(2, r + 1):
        ti, c = t[i], cls[i]
        head = {a1: 1} | {cls[j]["a3"]: 1 for j in range(2, i)}
        opt.append((head | {c["a1"]: 1, c["b1"]: 1}, n[i] * (pi[i] - ti * ti + ti)))
        opt.append((head | {c["a2"]: 1, c["b2"]: 1}, n[i] * (ti * ti - 2 * ti)))
    opt.append(({a1: 1} | {cls[j]["a3"]: 1 for j in range(2, r + 1)}, n[r] * t[r]))
    A = CompressedPacking(ne)
    O = CompressedPacking(opt)
    inst = C.build(A, O)
    return _check(GeneratorOutput("poa-unit", {"r": r, "M": M, "eps": eps}, inst, A, O, k["ratio"], C.names))


# ---- harmonic sizes: worst strong equilibrium ------------------------------

def gen_spoa_harmonic(r: int = 3, N: int = 6, eps=None) -> GeneratorOutput:
    """N items of size 1/t_i + eps per class; Next Fit Increasing keeps the
    classes apart while one item of each class fits in a bin."""
    if r < 1:
        raise ValueError("r must be at least 1")
    t = sequence("t", r + 1)
    L = math.lcm(*(x - 1 for x in t[:r]))
    if N < 1 or N % L:
        raise ValueError(f"N must be a positive multiple of {L}")
    room = F(1, t[r] - 1)  # 1 - sum_{i<=r} 1/t_i
    eps = pow10_below(room / r, strict=False) if eps is None else as_rational(eps)
    if not (0 < eps and r * eps <= room):
        raise ValueError("eps too large: one item of every class must fit in a bin")
    C = _Classes()
    ids = [C(F(1, x) + eps, 1, f"1/{x}+eps") for x in t[:r]]
    A = CompressedPacking(({j: x - 1}, N // (x - 1)) for j, x in zip(ids, t[:r]))
    O = CompressedPacking([({j: 1 for j in ids}, N)])
    inst = C.build(A, O)
    return _check(GeneratorOutput("spoa-harmonic", {"r": r, "N": N, "eps": eps}, inst, A, O,
                                  partial_sums("t", r)[1], C.names))


# ---- tau sizes: best strong equilibrium -------------------------------------

def gen_spos_tau(j: int = 4, N: int = 72, eps=None) -> GeneratorOutput:
    """Every optimal bin holds one item of size 1/tau_i + eps per i <= j and
    a second item of size 1/tau_3 + eps; greedy set cover has no choice."""
    if j < 4:
        raise ValueError("j must be at least 4")
    tau = sequence("tau", j + 1)
    if N < 1 or N % (2 * (tau[j - 1] - 1)):
        raise ValueError(f"N must be a positive multiple of {2 * (tau[j - 1] - 1)}")
    lim = F(1, (j + 1) * tau[j])
    eps = pow10_below(lim) if eps is None else as_rational(eps)
    if not (0 < eps < lim):
        raise ValueError("need 0 < eps < 1/((j+1) tau_{j+1})")
    C = _Classes()
    ids = [C(F(1, x) + eps, 1, f"1/{x}+eps") for x in tau[:j]]
    counts = {c: N for c in ids}
    counts[ids[2]] = 2 * N
    ne = []
    for c, x in zip(ids, tau[:j]):
        per = x - 1
        if counts[c] % per:
            raise ValueError(f"N does not split into bins of {per}")
        ne.append(({c: per}, counts[c] // per))
    A = CompressedPacking(reversed(ne))  # smallest items first, as Next Fit Increasing builds them
    O = CompressedPacking([({c: 1 for c in ids} | {ids[2]: 2}, N)])
    inst = C.build(A, O)
    claimed = theta_partial(j)
    return _check(GeneratorOutput("spos-tau", {"j": j, "N": N, "eps": eps}, inst, A, O, claimed, C.names))


# ---- nu sizes: strictly Pareto optimal equilibrium -------------------------

def gen_spo_nu(M: int = 5, N: int = 24, eps=None) -> GeneratorOutput:
    """Sizes 1/2+e, 1/4+e, 1/4-2e, 1/8+4e and 1/nu_j + e; the reference packing
    is a strictly Pareto optimal Nash equilibrium."""
    if M < 5:
        raise ValueError("M must be at least 5")
    nu = sequence("nu", M - 3)
    L = math.lcm(3, *(x - 1 for x in nu[: M - 4]))
    if N < 1 or N % L:
        raise ValueError(f"N must be a positive multiple of {L}")
    lim = F(1, (M + 2) * nu[M - 5] ** 2)
    eps = pow10_below(lim) if eps is None else as_rational(eps)
    if not (0 < eps < lim):
        raise ValueError("need 0 < eps < 1/((M+2) nu_{M-4}^2)")
    e = eps
    C = _Classes()
    chi = {1: C(F(1, 2) + e, 1, "chi1"), 2: C(F(1, 4) + e, 1, "chi2"), 3: C(F(1, 4) - 2 * e, 1, "chi3"),
           4: C(F(1, 8) + 4 * e, 1, "chi4")}
    for jj in range(5, M + 1):
        chi[jj] = C(F(1, nu[jj - 5]) + e, 1, f"chi{jj}")
    ne = [({chi[jj + 4]: nu[jj - 1] - 1}, 3 * N // (nu[jj - 1] - 1)) for jj in range(1, M - 3)]
    ne += [({chi[1]: 1}, 5 * N), ({chi[2]: 3}, 5 * N // 3), ({chi[3]: 2, chi[4]: 3}, N)]
    opt = [({chi[1]: 1, chi[2]: 1, chi[3]: 1}, 2 * N),
           ({chi[jj]: 1 for jj in range(1, M + 1) if jj != 3}, 3 * N)]
    A = CompressedPacking(ne)
    O = CompressedPacking(opt)
    inst = C.build(A, O)
    gamma = partial_sums("nu", M - 4)[1]
    claimed = F(23, 15) + F(3, 5) * gamma
    return _check(GeneratorOutput("spo-nu", {"M": M, "N": N, "eps": eps}, inst, A, O, claimed, C.names))


FAMILIES = {
    "ff17": gen_ff17,
    "poa-unit": gen_poa_unit,
    "spoa-harmonic": gen_spoa_harmonic,
    "spos-tau": gen_spos_tau,
    "spo-nu": gen_spo_nu,
}

PARAM_NAMES = {
    "ff17": ("ell", "eps", "delta"),
    "poa-unit": ("r", "M", "eps"),
    "spoa-harmonic": ("r", "N", "eps"),
    "spos-tau": ("j", "N", "eps"),
    "spo-nu": ("M", "N", "eps"),
}


def generate(family: str, **params) -> GeneratorOutput:
    try:
        fn = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    allowed = PARAM_NAMES[family]
    for k in params:
        if k not in allowed:
            raise ValueError(f"{family} takes parameters {', '.join(allowed)}; got {k!r}")
    conv = {k: (as_rational(v) if k in ("eps", "delta") else int(v)) for k, v in params.items()}
    return fn(**conv)


__all__ = [
    "sequence", "partial_sums", "theta_partial", "limit_bracket", "THETA_UPPER", "pow10_below",
    "GeneratorOutput", "gen_ff17", "gen_poa_unit", "poa_unit_counts", "gen_spoa_harmonic", "gen_spos_tau",
    "gen_spo_nu", "generate", "FAMILIES", "PARAM_NAMES", "KINDS",
]
