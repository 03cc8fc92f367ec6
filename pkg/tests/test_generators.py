import json
import math
from fractions import Fraction as F

import pytest

from binpack_games.equilibria import Tri, is_nash, is_strong
from binpack_games.generators import (THETA_UPPER, gen_ff17, gen_poa_unit, gen_spo_nu, gen_spoa_harmonic,
                                      gen_spos_tau, generate, limit_bracket, partial_sums, poa_unit_counts,
                                      pow10_below, sequence, theta_partial)
from binpack_games.model import validate_packing
from binpack_games.packers import first_fit, gsc_all, nfi, signature_of_counts


def test_sequences():
    assert sequence("t", 5) == [2, 3, 7, 43, 1807]
    assert sequence("tau", 5) == [2, 4, 9, 37, 1333]
    assert sequence("nu", 3) == [9, 73, 5257]
    assert sequence("tau", 2) == [2, 4]
    with pytest.raises(ValueError):
        sequence("t", 0)
    with pytest.raises(ValueError):
        sequence("z", 3)


def test_partial_sum_examples():
    assert partial_sums("t", 3)[0] == F(41, 42) == 1 - F(1, 43 - 1)
    assert partial_sums("nu", 2)[0] == F(82, 657) == F(1, 8) - F(1, 5257 - 1)
    th = theta_partial(4)
    assert th == 1 + F(1, 3) + F(1, 8) + F(1, 36) + F(1, 8) == F(29, 18)
    assert [theta_partial(r) for r in (3, 4, 5, 6)] == sorted(theta_partial(r) for r in (3, 4, 5, 6))


def test_telescoping_identities():
    for r in range(1, 9):
        t = sequence("t", r + 1)
        assert partial_sums("t", r)[0] == 1 - F(1, t[r] - 1)
        nu = sequence("nu", r + 1)
        assert partial_sums("nu", r)[0] == F(1, 8) - F(1, nu[r] - 1)


def test_limit_brackets():
    lo, hi = limit_bracket("tau", 6)
    assert hi < THETA_UPPER
    assert round(float(lo), 7) == round(float(hi), 7) == 1.6118624
    lo, hi = limit_bracket("t", 5)
    assert round(float(lo), 5) == round(float(hi), 5) == 1.69103
    lo, hi = limit_bracket("nu", 4)
    assert round(float(lo), 5) == round(float(hi), 5) == 0.13908
    with pytest.raises(ValueError):
        limit_bracket("t", 3)


def test_pow10_below():
    assert pow10_below(F(1, 330)) == F(1, 1000)
    assert pow10_below(F(1, 100)) == F(1, 1000)
    assert pow10_below(F(1, 100), strict=False) == F(1, 100)


def _packings_ok(g):
    assert g.reference_packing.validate(g.instance)
    assert g.reference_opt.validate(g.instance)
    assert g.reference_packing.class_usage() == g.reference_opt.class_usage()
    assert g.ratio == F(g.reference_packing.num_bins, g.reference_opt.num_bins) == g.claimed_ratio


def test_ff17_family():
    g = gen_ff17(3, eps=F(1, 121), delta=F(1, 121) / 3**8)
    assert g.instance.n == 90
    assert (g.reference_packing.num_bins, g.reference_opt.num_bins) == (51, 32)
    _packings_ok(g)
    ratios = []
    for ell in (3, 5, 8):
        h = gen_ff17(ell)
        _packings_ok(h)
        assert h.instance.n == 30 * ell
        assert h.reference_packing.num_bins == 17 * ell and h.reference_opt.num_bins == 10 * ell + 2
        assert is_nash(h.reference_packing, h.instance)
        ratios.append(h.ratio)
    assert ratios == [F(51, 32), F(85, 52), F(68, 41)]
    assert ratios[0] < ratios[1] < ratios[2] < F(17, 10)


def test_ff17_is_strong_and_first_fit_rebuilds_it():
    g = gen_ff17(3)
    dense = g.reference_packing.expand(g.instance)
    assert is_strong(dense, g.instance, limit=None).value is Tri.TRUE
    ff = first_fit(g.instance)
    assert ff.num_bins == 51 and ff.signature(g.instance) == dense.signature(g.instance)


def test_ff17_parameter_checks():
    with pytest.raises(ValueError):
        gen_ff17(2)
    with pytest.raises(ValueError):
        gen_ff17(3, eps=F(1, 100))
    with pytest.raises(ValueError):
        gen_ff17(3, eps=F(1, 1000), delta=F(1, 1000))


def _ratio_by_hand(r, M):
    t = sequence("t", r + 1)
    t = [None] + t
    pi = {j: t[j] * (t[j] - 1) * (t[j] - 2) + 2 for j in range(2, r + 1)}
    D = {i: M * math.prod(t[1:i]) * math.prod(pi[j] for j in range(i, r + 1)) * (t[r] - 1) for i in range(2, r + 1)}
    total = F(1)
    for i in range(2, r + 1):
        lam = F(D[i], D[2])
        total += lam / (t[i] - 1) + lam / pi[i] * (t[i] - 2)
    return total, D[2]


def test_poa_unit_family():
    g = gen_poa_unit(3, 1)
    _packings_ok(g)
    want, d2 = _ratio_by_hand(3, 1)
    assert g.claimed_ratio == want == F(2877, 1696)
    assert abs(float(g.claimed_ratio) - 1.6963443) < 1e-7
    assert g.reference_opt.num_bins == d2
    assert g.reference_packing.num_bins == d2 * g.claimed_ratio
    assert is_nash(g.reference_packing, g.instance)
    g4 = gen_poa_unit(4, 1)
    _packings_ok(g4)
    assert g4.claimed_ratio == _ratio_by_hand(4, 1)[0]
    assert abs(float(g4.claimed_ratio) - 1.696646) < 1e-6
    assert g4.claimed_ratio > g.claimed_ratio
    assert is_nash(g4.reference_packing, g4.instance)


def test_poa_unit_counts_consistency():
    for r in (3, 4):
        k = poa_unit_counts(r)
        t = k["t"]
        for i in range(2, r + 1):
            assert k["n"][i] % (t[i] - 1) == 0
            assert k["Delta"][i] % k["pi"][i] == 0
            assert (t[i] - 2) * ((t[i] - 1) ** 2 - 2) == k["pi"][i] - t[i] ** 2 + t[i]
    assert gen_poa_unit(3, 2).claimed_ratio == gen_poa_unit(3, 1).claimed_ratio


def test_spoa_harmonic_family():
    g = gen_spoa_harmonic(3, 6, F(1, 1000))
    _packings_ok(g)
    assert (g.reference_packing.num_bins, g.reference_opt.num_bins) == (10, 6)
    p = nfi(g.instance)
    assert p.num_bins == 10
    assert is_strong(p, g.instance).value is Tri.TRUE
    g4 = gen_spoa_harmonic(4, 252, F(1, 10**6))
    _packings_ok(g4)
    # 252 (1 + 1/2 + 1/6 + 1/42) = 426, not 420
    assert (g4.reference_packing.num_bins, g4.reference_opt.num_bins) == (426, 252)
    assert g4.claimed_ratio == F(71, 42)
    assert nfi(g4.instance).num_bins == 426
    with pytest.raises(ValueError):
        gen_spoa_harmonic(3, 4)


def test_spos_tau_family():
    g = gen_spos_tau(4, 72, F(1, 10**6))
    _packings_ok(g)
    assert g.instance.n == 72 * 5
    assert (g.reference_packing.num_bins, g.reference_opt.num_bins) == (116, 72)
    assert g.claimed_ratio == F(29, 18) < THETA_UPPER
    assert nfi(g.instance).num_bins == 116
    outs = gsc_all(g.instance, limit=None)
    assert {p.num_bins for p in outs} == {116}
    with pytest.raises(ValueError):
        gen_spos_tau(3, 72)
    with pytest.raises(ValueError):
        gen_spos_tau(4, 36)
    g5 = gen_spos_tau(5, 2 * 1332)
    _packings_ok(g5)
    assert g5.claimed_ratio == theta_partial(5) > g.claimed_ratio


def test_spo_nu_family():
    g = gen_spo_nu(5, 24)
    _packings_ok(g)
    assert g.instance.n == 18 * 24
    assert (g.reference_packing.num_bins, g.reference_opt.num_bins) == (193, 120)
    assert is_nash(g.reference_packing, g.instance)
    g6 = gen_spo_nu(6, 216)
    _packings_ok(g6)
    assert g6.claimed_ratio > g.claimed_ratio
    assert is_nash(g6.reference_packing, g6.instance)
    with pytest.raises(ValueError):
        gen_spo_nu(5, 20)


def test_generate_dispatch_and_json():
    g = generate("spos-tau", j="4", N="72")
    d = json.loads(json.dumps(g.to_dict()))
    assert d["claimed_ratio"] == "29/18" and d["bins"] == {"reference_packing": 116, "reference_opt": 72}
    assert d["params"]["eps"] == "1/10000"
    with pytest.raises(ValueError):
        generate("nope")
    with pytest.raises(ValueError):
        generate("ff17", r=3)
