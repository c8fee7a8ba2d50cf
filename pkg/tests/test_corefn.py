import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circapprox.corefn import (
    Distribution,
    TruthTable,
    agreement,
    approx_params,
    bias,
    conditional_suffix,
    constant,
    dump_dist,
    dump_tt,
    is_smooth,
    junta_embed,
    marginal_prefix,
    parity,
    parse_dist,
    parse_tt,
    point_mass,
    random_smooth_distribution,
    tt_random,
    uniform,
    variable,
)
from circapprox.errors import ArityError, BadInputError, EmptySubcubeError


def random_dist(n, rng, zeros=0.0):
    w = rng.random(1 << n)
    w[rng.random(1 << n) < zeros] = 0.0
    if w.sum() == 0:
        w[0] = 1.0
    return Distribution(n, w / w.sum())


@st.composite
def tables(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return tt_random(n, np.random.default_rng(seed))


def test_tt_random_deterministic():
    a = tt_random(3, np.random.default_rng(7))
    b = tt_random(3, np.random.default_rng(7))
    assert a == b


def test_tt_random_length_and_guard():
    assert len(tt_random(1, np.random.default_rng(1))) == 2
    with pytest.raises(ArityError):
        tt_random(0, np.random.default_rng(1))
    with pytest.raises(ArityError):
        tt_random(27, np.random.default_rng(1))


def test_tt_random_bias_small():
    # 2^20 fair coins: sd of the bias is 2^-10, so 0.01 is about 10 sd
    hits = sum(abs(bias(tt_random(20, np.random.default_rng(s)))) <= 0.01 for s in range(20))
    assert hits == 20


def test_index_convention():
    x1 = variable(3, 1)
    assert list(x1.bits.astype(int)) == [0, 0, 0, 0, 1, 1, 1, 1]
    assert list(variable(3, 3).bits.astype(int)) == [0, 1, 0, 1, 0, 1, 0, 1]


def test_junta_embed():
    ident = TruthTable(1, [0, 1])
    assert list(junta_embed(ident, 2).bits.astype(int)) == [0, 0, 1, 1]
    g = tt_random(4, np.random.default_rng(3))
    assert junta_embed(g, 4) == g
    assert bias(junta_embed(g, 9)) == pytest.approx(bias(g), abs=0)
    with pytest.raises(ArityError):
        junta_embed(g, 3)


def test_parity_small():
    assert list(parity(2).bits.astype(int)) == [0, 1, 1, 0]
    for n in range(1, 8):
        assert bias(parity(n)) == 0


@pytest.mark.parametrize("n", range(2, 9))
def test_parity_vs_strict_juntas(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        k = int(rng.integers(1, n))
        g = tt_random(k, rng)
        assert agreement(parity(n), junta_embed(g, n), uniform(n)) == 0.5


def test_maj3_agreement():
    maj = TruthTable(3, [int(sum(x) >= 2) for x in itertools.product((0, 1), repeat=3)])
    assert agreement(maj, constant(3, 1), uniform(3)) == 0.5


@given(tables(), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_agreement_partition(f, seed):
    rng = np.random.default_rng(seed)
    g = tt_random(f.n, rng)
    H = random_dist(f.n, rng)
    assert agreement(f, f, H) == pytest.approx(1.0, abs=1e-12)
    assert agreement(f, ~f, H) == 0.0
    assert agreement(f, g, H) + agreement(f, ~g, H) == pytest.approx(1.0, abs=1e-12)


def test_agreement_arity_mismatch():
    with pytest.raises(ArityError):
        agreement(parity(3), parity(4), uniform(3))


def test_marginal_prefix_basic():
    m = marginal_prefix(uniform(3), 1)
    assert np.allclose(m.weights, [0.5, 0.5])
    pm = marginal_prefix(point_mass(5, 0b10110), 3)
    assert pm.weights[0b101] == 1.0
    H = uniform(4)
    assert marginal_prefix(H, 4) is H
    with pytest.raises(BadInputError):
        marginal_prefix(H, 0)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.floats(0.0, 0.7))
@settings(max_examples=40, deadline=None)
def test_chain_rule(n, seed, zeros):
    rng = np.random.default_rng(seed)
    H = random_dist(n, rng, zeros)
    ell = int(rng.integers(1, n))
    Hp = marginal_prefix(H, n - ell)
    for c in range(1 << (n - ell)):
        if Hp.weights[c] == 0:
            with pytest.raises(EmptySubcubeError):
                conditional_suffix(H, c, ell)
            continue
        Hc = conditional_suffix(H, c, ell)
        block = H.weights[c << ell:(c + 1) << ell]
        assert np.allclose(Hp.weights[c] * Hc.weights, block, rtol=1e-12, atol=1e-15)


def test_conditional_suffix_examples():
    Hc = conditional_suffix(uniform(5), 3, 2)
    assert np.allclose(Hc.weights, 0.25)
    Hc = conditional_suffix(point_mass(4, 0b1110), 0b11, 2)
    assert Hc.weights[0b10] == 1.0


def test_is_smooth():
    assert is_smooth(uniform(6), 1.0)
    assert is_smooth(uniform(6), 0.3)
    assert not is_smooth(point_mass(3, 2), 1.0)
    w = np.zeros(8)
    w[:2] = 0.5               # max weight 1/2 = 1/(delta 2^3) at delta = 1/4
    assert is_smooth(Distribution(3, w), 0.25)
    assert not is_smooth(Distribution(3, w), 0.26)
    with pytest.raises(BadInputError):
        is_smooth(uniform(2), 0.0)


@pytest.mark.parametrize("delta", [0.1, 0.5, 0.9])
def test_random_smooth_distribution(delta):
    H = random_smooth_distribution(10, delta, np.random.default_rng(2))
    assert is_smooth(H, delta)
    assert math.fsum(H.weights) == pytest.approx(1.0, abs=1e-12)


def test_distribution_validation():
    with pytest.raises(BadInputError):
        Distribution(2, [0.5, 0.5, 0.5, -0.5])
    with pytest.raises(BadInputError):
        Distribution(2, [0.25, 0.25, 0.25, 0.3])
    Distribution(2, [0.25, 0.25, 0.25, 0.25 + 5e-10])


@pytest.mark.parametrize("gamma,n,ell,clamped", [
    (0.02, 22, 2, False),
    (0.25, 16, 0, True),
    (0.01, 24, 4, False),
])
def test_approx_params_examples(gamma, n, ell, clamped):
    p = approx_params(gamma, n)
    assert (p.ell, p.clamped) == (ell, clamped)


def test_approx_params_range():
    with pytest.raises(BadInputError, match="admissible range"):
        approx_params(0.01, 16)
    with pytest.raises(BadInputError):
        approx_params(0.5, 22)
    assert approx_params(0.01, 16, enforce_range=False).ell == 4
    assert approx_params(0.005, 24, enforce_range=False).ell == 6
    assert approx_params(0.02, 22, ell=5).ell == 5
    with pytest.raises(BadInputError):
        approx_params(0.02, 22, ell=22)


def test_approx_params_chain_constant():
    for gamma in np.linspace(0.0015, 0.049, 60):
        p = approx_params(float(gamma), 26, enforce_range=False)
        if not p.clamped:
            assert (2 / 11) * math.sqrt(1 / (3 * 2**p.ell)) >= 2 * gamma


@given(tables(max_n=10))
@settings(max_examples=30, deadline=None)
def test_tt_roundtrip(f):
    assert parse_tt(dump_tt(f)) == f


def test_tt_hex_layout():
    f = TruthTable(3, [1, 0, 0, 0, 0, 0, 0, 1])
    assert dump_tt(f) == "TT n=3\n81\n"
    assert dump_tt(variable(1, 1)) == "TT n=1\n4\n"


def test_dist_roundtrip_and_renorm():
    H = random_dist(6, np.random.default_rng(0), zeros=0.3)
    assert np.array_equal(parse_dist(dump_dist(H)).weights, H.weights)
    text = "DIST n=2\n0 0.5\n3 0.5000005\n"
    G = parse_dist(text)
    assert math.fsum(G.weights) == pytest.approx(1.0, abs=1e-12)
    assert G.weights[1] == 0.0
    with pytest.raises(BadInputError):
        parse_dist("DIST n=2\n0 0.5\n3 0.6\n")
    with pytest.raises(BadInputError):
        parse_dist("TT n=2\n0 1\n")
