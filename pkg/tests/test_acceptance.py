"""Acceptance criteria, one test and one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (the lines are repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import random
import sys
import time
from fractions import Fraction as F
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import oracles
from conftest import DATA, random_instance
from binpack_games.dynamics import (MovePolicy, longest_path_exhaustive, max_steps_formula, min_weight_gap,
                                    run_dynamics, staircase_schedule)
from binpack_games.enumeration import census, prices
from binpack_games.equilibria import Tri, classify, is_nash, is_strong
from binpack_games.generators import (THETA_UPPER, gen_ff17, gen_poa_unit, gen_spo_nu, gen_spos_tau,
                                      limit_bracket, partial_sums, sequence)
from binpack_games.model import Packing, load_instance, load_packing, validate_packing
from binpack_games.packers import OptIncomplete, gsc_all, nfi, opt_exact, signature_of_counts, size_lower_bound, steps
from binpack_games.weights import (SET1, SET2, GridSampler, RandomSampler, check_bin_bound, lemma54_identities,
                                   omega6_constraints, omega_bc, table2)

RESULTS: list[str] = []


def report(num: int, title: str, checks: list[tuple[str, bool]], started: float, budget: float):
    elapsed = time.perf_counter() - started
    checks = checks + [(f"runtime {elapsed:.1f}s < {budget:g}s", elapsed < budget)]
    failed = [name for name, ok in checks if not ok]
    line = f"{'PASS' if not failed else 'FAIL'}  [{num}] {title}"
    if failed:
        line += "  -- failed: " + "; ".join(failed)
    RESULTS.append(line)
    print(line)
    assert not failed, line


def test_1_convergence_formula():
    t0 = time.perf_counter()
    checks = []
    for n in range(1, 9):
        f = max_steps_formula(n)
        checks.append((f"n={n} oracle = formula {f}", longest_path_exhaustive(n) == f))
        trace = staircase_schedule(n)  # replayed move by move; raises on a non-improving move
        ok = trace.steps == f and all(m.phi_after > m.phi_before for m in trace.moves)
        checks.append((f"n={n} staircase replays {f} moves", ok))
    report(1, "convergence formula equals exhaustive longest path and staircase replay, n<=8", checks, t0, 10)


def test_2_first_fit_strong_family():
    t0 = time.perf_counter()
    g = gen_ff17(3)
    dense = g.reference_packing.expand(g.instance)
    ratios = [gen_ff17(ell).ratio for ell in (3, 5, 8)]
    checks = [
        ("51-bin reference valid", g.reference_packing.num_bins == 51 and bool(g.reference_packing.validate(g.instance))),
        ("32-bin optimum valid", g.reference_opt.num_bins == 32 and bool(g.reference_opt.validate(g.instance))),
        ("compressed is_nash", is_nash(g.reference_packing, g.instance)),
        ("is_strong", is_strong(dense, g.instance, limit=None).value is Tri.TRUE),
        ("ratio 51/32 = 1.59375", g.ratio == F(51, 32) == F("1.59375")),
        ("ratios increase below 1.7", ratios[0] < ratios[1] < ratios[2] < F(17, 10)),
    ]
    report(2, "first-fit SNE family, l=3: 51 vs 32 bins, NE and SNE", checks, t0, 60)


def test_3_unit_poa_family():
    t0 = time.perf_counter()
    g3, g4 = gen_poa_unit(3, 1), gen_poa_unit(4, 1)
    checks = [
        ("r=3 ratio ~ 1.6963443 (1e-7)", abs(g3.claimed_ratio - F("1.6963443")) < F(1, 10**7)),
        ("r=4 ratio ~ 1.696646 (1e-6)", abs(g4.claimed_ratio - F("1.696646")) < F(1, 10**6)),
        ("r=3 compressed is_nash", is_nash(g3.reference_packing, g3.instance)),
        ("r=3 bin types valid", bool(g3.reference_packing.validate(g3.instance)) and bool(g3.reference_opt.validate(g3.instance))),
        ("r=4 bin types valid", bool(g4.reference_packing.validate(g4.instance)) and bool(g4.reference_opt.validate(g4.instance))),
        ("ratio = bins / opt", g3.ratio == g3.claimed_ratio and g4.ratio == g4.claimed_ratio),
    ]
    report(3, "unit-weight PoA family r=3,4", checks, t0, 60)


def test_4_strong_anarchy_vs_nfi():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    bad_count = bad_strong = 0
    for _ in range(200):
        inst = random_instance(rng, 12, small_bias=rng.random() < 0.6, den=rng.choice((20, 100, 420)))
        p = nfi(inst)
        if any(q.num_bins > p.num_bins for q in gsc_all(inst)):
            bad_count += 1
        if is_strong(p, inst).value is not Tri.TRUE:
            bad_strong += 1
    checks = [("gsc outputs never exceed nfi", bad_count == 0), ("nfi output is strong", bad_strong == 0)]
    report(4, "200 random unit instances: enumerate-all gsc <= nfi, nfi is SNE", checks, t0, 300)


def test_5_strong_stability_family():
    t0 = time.perf_counter()
    g = gen_spos_tau(4, 72, F(1, 10**6))
    lo, _ = limit_bracket("tau", 6)
    checks = [
        ("nfi = 116 bins", nfi(g.instance).num_bins == 116),
        ("reference optimum 72 bins, valid", g.reference_opt.num_bins == 72 and bool(g.reference_opt.validate(g.instance))),
        ("size bound certifies >= 72", size_lower_bound(g.instance) >= 72),
        ("ratio 29/18 below the limit", g.ratio == F(29, 18) and g.ratio < lo),
    ]
    report(5, "tau family j=4, N=72: 116 vs 72 bins", checks, t0, 30)


def test_6_steps_bound():
    t0 = time.perf_counter()
    g = gen_spos_tau(4, 72, F(1, 10**6))
    checks = [("tau instance within bound", steps(g.instance).num_bins <= THETA_UPPER * 72 + 20)]
    rng = random.Random(77)
    done = over = not_max = 0
    while done < 100:
        inst = random_instance(rng, 40, small_bias=rng.random() < 0.7, den=rng.choice((60, 420, 2520)))
        try:
            opt = opt_exact(inst).num_bins
        except OptIncomplete:
            continue
        p = steps(inst)
        if not validate_packing(p, inst) or p.num_bins > THETA_UPPER * opt + 20:
            over += 1
        if inst.n <= 12:
            remaining = set(range(inst.n))
            for b in p.bins:
                if len(b) != oracles.max_cardinality(inst.sizes, remaining):
                    not_max += 1
                remaining -= set(b)
        done += 1
    checks += [("100 random instances within bound", over == 0), ("bins max-cardinality at creation", not_max == 0)]
    report(6, "STEPS within 1.6119*OPT + 20", checks, t0, 300)


def test_7_weight_functions():
    t0 = time.perf_counter()
    lem = lemma54_identities()
    t2 = table2(F(1, 330))
    t2_random = check_bin_bound(t2, F(17, 10), RandomSampler(seed=7, trials=100_000))
    t2_grid = check_bin_bound(t2, F(17, 10), GridSampler())
    bc = check_bin_bound(omega_bc(), F(1691, 1000), RandomSampler(seed=7, trials=100_000))
    r1, r2 = omega6_constraints(SET1), omega6_constraints(SET2)
    checks = [
        ("nine reduced-weight identities", len(lem) == 9 and all(lem.values())),
        ("table2 random 1e5 at 17/10", t2_random.passed),
        ("table2 grid at 17/10", t2_grid.passed),
        (f"omega_bc at 1.691 (worst bin {float(bc.worst_weight):.9f})", bc.passed),
        ("bonus set 1 constraints", r1.ok),
        ("bonus set 1 bound <= 1.62811302699218", r1.bound <= F("1.62811302699218")),
        ("bonus set 2 constraints, bound < 1.625", r2.ok and r2.bound < F("1.625")),
    ]
    report(7, "weight identities and per-bin bounds", checks, t0, 120)


def test_8_pareto_family():
    t0 = time.perf_counter()
    g = gen_spo_nu(5, 24)
    tele = all(partial_sums("nu", r)[0] == F(1, 8) - F(1, sequence("nu", r + 1)[r] - 1) for r in range(1, 5))
    checks = [
        ("193 vs 120 bins", (g.reference_packing.num_bins, g.reference_opt.num_bins) == (193, 120)),
        ("ratio 193/120", g.ratio == F(193, 120)),
        ("both packings valid", bool(g.reference_packing.validate(g.instance)) and bool(g.reference_opt.validate(g.instance))),
        ("compressed is_nash", is_nash(g.reference_packing, g.instance)),
        ("nu telescoping r<=4", tele),
    ]
    report(8, "nu family M=5, N=24: 193 vs 120 bins", checks, t0, 30)


def test_9_dynamics():
    t0 = time.perf_counter()
    rng = random.Random(99)
    stuck = phi_bad = bins_bad = not_ne = gap_bad = gap_runs = 0
    for _ in range(1000):
        inst = random_instance(rng, 20, unit=False, small_bias=rng.random() < 0.5)
        if rng.random() < 0.5:
            start = Packing([[i] for i in range(inst.n)])
        else:
            order = list(range(inst.n))
            rng.shuffle(order)
            start = Packing(oracles.next_fit(inst.sizes, order))
        try:
            t = run_dynamics(inst, start, MovePolicy.random(rng.randint(0, 2**32)), step_cap=10**5)
        except RuntimeError:
            stuck += 1
            continue
        phi_bad += not all(m.phi_after > m.phi_before for m in t.moves)
        bins_bad += not all(a >= b for a, b in zip(t.bins_along, t.bins_along[1:]))
        not_ne += not is_nash(t.final, inst)
        if inst.n <= 10:
            gap = min_weight_gap(inst)
            if gap is not None:
                gap_runs += 1
                wmin = min(inst.weights)
                gap_bad += not all(m.phi_after - m.phi_before >= 2 * gap * wmin for m in t.moves)
    checks = [("all runs terminate", stuck == 0), ("potential strictly increases", phi_bad == 0),
              ("bin count never increases", bins_bad == 0), ("final packing is NE", not_ne == 0),
              (f"increment >= 2*gap*w_min ({gap_runs} runs)", gap_bad == 0 and gap_runs > 0)]
    report(9, "1000 random weighted runs of best-response dynamics", checks, t0, 300)


def test_10_census():
    t0 = time.perf_counter()
    j1, p1 = load_instance(DATA / "j1.json"), load_packing(DATA / "j1_packing.json")
    j2, p2 = load_instance(DATA / "j2.json"), load_packing(DATA / "j2_packing.json")
    r1, r2 = classify(p1, j1), classify(p2, j2)
    checks = [
        ("J1 SNE and not SPO", (r1.is_ne, r1.is_sne, r1.is_wpo, r1.is_spo) == (Tri.TRUE, Tri.TRUE, Tri.TRUE, Tri.FALSE)),
        ("J2 SPO and not SNE", (r2.is_ne, r2.is_sne, r2.is_wpo, r2.is_spo) == (Tri.TRUE, Tri.FALSE, Tri.TRUE, Tri.TRUE)),
    ]
    rng = random.Random(10)
    pos_bad = opt_bad = sne_bad = 0
    for _ in range(100):
        inst = random_instance(rng, 8, unit=rng.random() < 0.5, small_bias=rng.random() < 0.5)
        c = census(inst)
        pr = prices(inst, census_result=c)
        pos_bad += not (pr.pos == pr.wpo_pos == pr.spo_pos == 1)
        opt_bad += not all(e.spo for e in c.entries if e.bins == c.opt)
        mine = {signature_of_counts(inst, e.packing) for e in c.entries if e.sne}
        sne_bad += mine != {signature_of_counts(inst, q) for q in gsc_all(inst)}
    checks += [("PoS = WPO-PoS = SPO-PoS = 1", pos_bad == 0), ("optima strictly Pareto optimal", opt_bad == 0),
               ("SNE set = enumerate-all gsc outputs", sne_bad == 0)]
    report(10, "census on the worked examples and 100 random instances", checks, t0, 600)


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
