import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circapprox import gf2k
from circapprox.errors import BadInputError


def log_tables(ctx):
    """exp/log tables from a primitive element found by repeated shift-and-reduce."""
    q = ctx.order

    def times_g(a, g):
        # independent multiply: schoolbook product then long division
        return gf2k.poly_mod(gf2k.clmul(a, g), ctx.modulus)

    for g in range(2, q):
        exp = [1]
        for _ in range(q - 2):
            exp.append(times_g(exp[-1], g))
        if len(set(exp)) == q - 1:
            log = {e: i for i, e in enumerate(exp)}
            return exp, log
    raise AssertionError("no primitive element")


def brute_irreducible(k):
    """Smallest degree-k polynomial with no root-free factorisation: test all products."""
    reducible = set()
    for a in range(2, 1 << k):
        for b in range(2, 1 << k):
            p = gf2k.clmul(a, b)
            if p.bit_length() - 1 == k:
                reducible.add(p)
    return min(m for m in range(1 << k, 1 << (k + 1)) if m not in reducible)


@pytest.mark.parametrize("k,mask", [(2, 0b111), (3, 0b1011), (4, 0b10011), (8, 0x11B)])
def test_find_irreducible_known(k, mask):
    assert gf2k.find_irreducible(k).modulus == mask


@pytest.mark.parametrize("k", range(2, 7))
def test_find_irreducible_brute(k):
    assert gf2k.find_irreducible(k).modulus == brute_irreducible(k)


def test_field_ctx_validation():
    with pytest.raises(BadInputError):
        gf2k.FieldCtx(2, 0b101)        # x^2 + 1 = (x + 1)^2
    with pytest.raises(BadInputError):
        gf2k.FieldCtx(3, 0b111)
    with pytest.raises(BadInputError):
        gf2k.find_irreducible(1)
    with pytest.raises(BadInputError):
        gf2k.find_irreducible(27)


def test_gf4_square():
    ctx = gf2k.find_irreducible(2)
    assert gf2k.mul(ctx, 0b10, 0b10) == 0b11


@pytest.mark.parametrize("k", [2, 3, 4])
def test_field_axioms_exhaustive(k):
    ctx = gf2k.find_irreducible(k)
    els = range(ctx.order)
    for a in els:
        assert gf2k.mul(ctx, a, 1) == a
        assert gf2k.mul(ctx, a, 0) == 0
        if a:
            assert gf2k.mul(ctx, a, gf2k.inverse(ctx, a)) == 1
        for b in els:
            ab = gf2k.mul(ctx, a, b)
            assert ab == gf2k.mul(ctx, b, a)
            for c in els:
                assert gf2k.mul(ctx, ab, c) == gf2k.mul(ctx, a, gf2k.mul(ctx, b, c))
                assert gf2k.mul(ctx, a, b ^ c) == ab ^ gf2k.mul(ctx, a, c)


@pytest.mark.parametrize("k", range(2, 9))
def test_mul_matches_log_tables(k):
    ctx = gf2k.find_irreducible(k)
    exp, log = log_tables(ctx)
    q = ctx.order
    a = np.repeat(np.arange(q, dtype=np.uint64), q)
    b = np.tile(np.arange(q, dtype=np.uint64), q)
    got = gf2k.mul_many(ctx, a, b)
    want = [0 if x == 0 or y == 0 else exp[(log[x] + log[y]) % (q - 1)] for x, y in zip(a.tolist(), b.tolist())]
    assert got.tolist() == want
    for x, y in itertools.islice(zip(a.tolist(), b.tolist()), 0, None, 97):
        assert gf2k.mul(ctx, x, y) == want[x * q + y]


def test_poly_eval_examples():
    ctx = gf2k.find_irreducible(2)
    alpha = 0b10
    assert gf2k.poly_eval_deg3(ctx, (1, 1, 1, 1), alpha) == 1
    ctx = gf2k.find_irreducible(5)
    for x in range(ctx.order):
        assert gf2k.poly_eval_deg3(ctx, (7, 0, 0, 0), x) == 7
        assert gf2k.poly_eval_deg3(ctx, (0, 1, 0, 0), x) == x


@pytest.mark.parametrize("k", [2, 3])
def test_interpolation_bijective(k):
    ctx = gf2k.find_irreducible(k)
    q = ctx.order
    for pts in itertools.combinations(range(q), 4):
        images = {
            tuple(gf2k.poly_eval_deg3(ctx, s, x) for x in pts)
            for s in itertools.product(range(q), repeat=4)
        }
        assert len(images) == q ** 4


def test_iota():
    assert gf2k.iota(0) == 0
    assert gf2k.iota(1) == 1
    assert gf2k.iota(0b10) == 0


@given(st.integers(2, 12), st.data())
@settings(max_examples=40, deadline=None)
def test_iota_mask_is_linear_form(k, data):
    ctx = gf2k.find_irreducible(k)
    c = data.draw(st.integers(0, ctx.order - 1))
    y = data.draw(st.integers(0, ctx.order - 1))
    m = gf2k.iota_mask(ctx, c)
    assert gf2k.iota(gf2k.mul(ctx, c, y)) == bin(y & m).count("1") & 1


def test_iota_masks_vectorised():
    ctx = gf2k.find_irreducible(6)
    assert gf2k.iota_masks(ctx).tolist() == [gf2k.iota_mask(ctx, c) for c in range(ctx.order)]


def test_power_tables():
    ctx = gf2k.find_irreducible(7)
    x, x2, x3 = gf2k.power_tables(ctx)
    for v in range(0, ctx.order, 5):
        assert x2[v] == gf2k.power(ctx, v, 2)
        assert x3[v] == gf2k.power(ctx, v, 3)
    assert not x2.flags.writeable
