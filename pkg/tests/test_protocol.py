import itertools

import numpy as np
import pytest

from cqoverlap.channel import CQChannel, basis_channel, random_channel
from cqoverlap.characterization import max_overlap_closed_form, min_overlap_closed_form
from cqoverlap.errors import ArityError, ConfigError, DimensionError, TableError, WitnessError
from cqoverlap.linalg import maximally_mixed, random_density
from cqoverlap.protocol import (
    AcceptanceTable,
    build_lo_channel,
    build_so_channel,
    classify_instance,
    lo_pair_value,
    lo_verifier_accept,
    simulate_swap,
    so_case_overlap,
    so_verifier_accept,
    swap_accept_prob,
)

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])


def random_table(rng, bits):
    return AcceptanceTable(bits, {format(i, f"0{bits}b"): float(rng.random()) for i in range(1 << bits)})


def test_swap_accept_examples():
    assert swap_accept_prob(KET0, KET0) == 1.0
    assert swap_accept_prob(KET0, KET1) == 0.5
    assert swap_accept_prob(maximally_mixed(2), maximally_mixed(2)) == 0.75
    with pytest.raises(DimensionError):
        swap_accept_prob(KET0, np.eye(3) / 3)


def test_simulate_swap_examples():
    assert simulate_swap(KET0, KET0, 37, seed=1).empirical_accept == 1.0
    res = simulate_swap(KET0, KET1, 10**5, seed=4)
    assert abs(res.empirical_accept - 0.5) <= 0.008
    assert simulate_swap(KET0, KET1, 10**5, seed=4) == res
    with pytest.raises(ArityError):
        simulate_swap(KET0, KET1, 0, seed=1)


def test_simulate_swap_within_five_sigma():
    for case in range(30):
        rho, sigma = random_density(3, case), random_density(3, case + 500)
        res = simulate_swap(rho, sigma, 10**5, seed=case)
        assert 0.5 <= res.exact_accept <= 1.0
        assert abs(res.empirical_accept - res.exact_accept) <= 5 * res.sigma


def test_so_verifier():
    assert so_verifier_accept(basis_channel(3), 0, 1) == 0.5
    pure = random_channel(2, 1, 0)
    assert so_verifier_accept(pure, 0, 1) == 0.0
    ch = random_channel(5, 3, 3)
    for i, j in itertools.permutations(range(5), 2):
        assert abs(so_verifier_accept(ch, i, j) - (0.5 - 0.5 * ch.gram[i, j])) <= 1e-12
    with pytest.raises(WitnessError):
        so_verifier_accept(ch, 2, 2)
    with pytest.raises(WitnessError):
        so_verifier_accept(ch, 0, 5)


def test_lo_verifier():
    assert lo_verifier_accept(basis_channel(3), 0, 2) == pytest.approx(0.75, abs=1e-15)
    assert lo_verifier_accept(random_channel(3, 1, 0), 0, 1) == pytest.approx(1.0, abs=1e-15)
    ch = random_channel(5, 3, 3)
    opt = max_overlap_closed_form(ch)
    assert abs(lo_verifier_accept(ch, opt.i, opt.j) - (0.5 + 0.5 * opt.value)) <= 1e-12
    m = ch.gram
    for i, j in itertools.permutations(range(5), 2):
        expect = 0.5 + 0.25 * (m[i, i] + m[j, j] + 2 * m[i, j]) / 2
        assert abs(lo_verifier_accept(ch, i, j) - expect) <= 1e-12
    with pytest.raises(WitnessError):
        lo_verifier_accept(ch, 1, 1)


def test_table_validation():
    with pytest.raises(TableError):
        AcceptanceTable(0, {})
    with pytest.raises(TableError):
        AcceptanceTable(2, {"0": 0.5})
    with pytest.raises(TableError):
        AcceptanceTable(1, {"0": 1.5})
    with pytest.raises(TableError):
        AcceptanceTable(1, {"2": 0.5})
    with pytest.raises(TableError):
        AcceptanceTable(11, {})
    t = AcceptanceTable(3, {"101": 0.25})
    assert t.missing == 7
    assert t.dense()[5] == 0.25


def test_so_channel_shape_and_examples():
    t = AcceptanceTable(2, {"00": 1.0, "11": 0.3})
    ch = build_so_channel(t)
    assert (ch.n, ch.d) == (4, 4)
    # y = 00 accepts surely; z = 11 has a different first bit
    assert ch.gram[0, 3] == 0.0
    assert min_overlap_closed_form(ch).value == 0.0
    # 01 and 00 are both absent or zero -> |00><00| outputs
    zeros = build_so_channel(AcceptanceTable(2, {}))
    assert zeros.gram[0, 1] == 1.0


def test_so_flagged_basis_index():
    ch = build_so_channel(AcceptanceTable(1, {"0": 1.0, "1": 1.0}))
    # y1 = 0 -> |0,1> -> index 1; y1 = 1 -> |1,0> -> index 2
    assert ch.sigmas[0].mat[1, 1] == 1.0
    assert ch.sigmas[1].mat[2, 2] == 1.0


def test_so_case_formula_matches_gram():
    rng = np.random.default_rng(0)
    for _ in range(100):
        t = random_table(rng, 3)
        m = build_so_channel(t).gram
        for y, z in itertools.permutations(range(8), 2):
            assert abs(m[y, z] - so_case_overlap(t, y, z)) <= 1e-12


def test_so_small_epsilon_bound():
    eps = 0.01
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = AcceptanceTable(3, {format(i, "03b"): float(eps * rng.random()) for i in range(8)})
        assert min_overlap_closed_form(build_so_channel(t)).value >= (1 - eps) ** 2 - 1e-12


def test_lo_channel_examples():
    t = AcceptanceTable(2, {"00": 1.0, "01": 0.0, "10": 0.4})
    ch = build_lo_channel(t)
    assert (ch.n, ch.d) == (4, 2)
    assert lo_pair_value(t, 0, 1) >= 5 / 8
    assert lo_pair_value(t, 1, 3) == 0.5
    assert max_overlap_closed_form(ch).value >= 5 / 8 - 1e-12


def test_lo_pair_value_identity():
    rng = np.random.default_rng(1)
    for _ in range(100):
        t = random_table(rng, 3)
        ch = build_lo_channel(t)
        for y, z in itertools.combinations(range(8), 2):
            s = ch.sigmas[y].mat + ch.sigmas[z].mat
            assert abs(0.25 * np.trace(s @ s).real - lo_pair_value(t, y, z)) <= 1e-12


def test_lo_small_epsilon_bound():
    eps = 0.01
    t = AcceptanceTable(2, {"00": eps, "01": eps / 2, "10": 0.0, "11": eps})
    assert max_overlap_closed_form(build_lo_channel(t)).value <= 0.5 * (1 + eps**2) + 1e-12


def test_classify_examples():
    t = AcceptanceTable(2, {"00": 1.0, "11": 0.2})
    assert classify_instance(build_so_channel(t), "SO", 1.0, 0.5).verdict == "yes-like"
    lo = build_lo_channel(AcceptanceTable(2, {"00": 0.01, "10": 0.005}))
    assert classify_instance(lo, "LO", 5 / 8, 9 / 16).verdict == "no-like"
    assert classify_instance(basis_channel(3), "so", 1.0, 0.5).verdict == "yes-like"
    yes = build_lo_channel(AcceptanceTable(1, {"0": 1.0}))
    assert classify_instance(yes, "LO", 5 / 8, 9 / 16).verdict == "yes-like"


def test_classify_ambiguous_and_errors():
    mu = maximally_mixed(2)
    ch = CQChannel([mu, mu])
    rep = classify_instance(ch, "SO", 0.9, 0.1)
    assert rep.verdict == "ambiguous" and rep.yes_value == 0.5
    with pytest.raises(ConfigError):
        classify_instance(ch, "SO", 0.4, 0.5)
    with pytest.raises(ConfigError):
        classify_instance(ch, "XO", 0.9, 0.1)
