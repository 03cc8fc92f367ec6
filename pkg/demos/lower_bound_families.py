"""Build each lower-bound family, check its reference packings, print the ratios."""
from fractions import Fraction

from binpack_games.dynamics import max_steps_formula, staircase_schedule
from binpack_games.equilibria import is_nash
from binpack_games.generators import gen_ff17, gen_poa_unit, gen_spo_nu, gen_spos_tau

families = [
    ("first-fit SNE, l=3", gen_ff17(3)),
    ("unit PoA, r=3", gen_poa_unit(3, 1)),
    ("tau family, j=4 N=72", gen_spos_tau(4, 72, Fraction(1, 10**6))),
    ("nu family, M=5 N=24", gen_spo_nu(5, 24)),
]
for label, g in families:
    ok = bool(g.reference_packing.validate(g.instance)) and bool(g.reference_opt.validate(g.instance))
    ne = is_nash(g.reference_packing, g.instance)
    print(f"{label:24s} {g.reference_packing.num_bins:4d} / {g.reference_opt.num_bins:4d} bins"
          f"  ratio {float(g.ratio):.6f}  valid={ok}  NE={ne}")

for n in (4, 6, 8):
    t = staircase_schedule(n)
    print(f"staircase n={n}: {t.steps} moves (formula {max_steps_formula(n)})")
