import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circapprox import circuit as C
from circapprox.corefn import TruthTable, agreement, junta_embed, parity, tt_random, uniform, variable
from circapprox.errors import ArityError, BadInputError
from circapprox.gf2k import find_irreducible
from circapprox.kwise import QuadGenSpec, linear_gen_bit, linear_gen_build, quad_gen_bit


@st.composite
def tables(draw, lo=1, hi=9):
    n = draw(st.integers(lo, hi))
    return tt_random(n, np.random.default_rng(draw(st.integers(0, 2**32 - 1))))


def random_circuit(n, size, rng):
    b = C.CircuitBuilder(n)
    for i in range(size):
        hi = n + 2 + i
        b.gate(int(rng.integers(0, 16)), int(rng.integers(0, hi)), int(rng.integers(0, hi)))
    return b.build(int(rng.integers(0, n + 2 + size)))


def test_opcode_truth_tables():
    for op in range(16):
        for a, b in itertools.product((0, 1), repeat=2):
            assert C.apply_op(op, a, b) == (op >> (2 * a + b)) & 1
    cases = {"AND": lambda a, b: a & b, "OR": lambda a, b: a | b, "XOR": lambda a, b: a ^ b,
             "NAND": lambda a, b: 1 - (a & b), "NOR": lambda a, b: 1 - (a | b),
             "LEFT": lambda a, b: a, "NLEFT": lambda a, b: 1 - a, "RIGHT": lambda a, b: b,
             "LANDNR": lambda a, b: a & (1 - b), "NLANDR": lambda a, b: (1 - a) & b,
             "LIMPR": lambda a, b: (1 - a) | b, "XNOR": lambda a, b: 1 - (a ^ b)}
    for name, fn in cases.items():
        for a, b in itertools.product((0, 1), repeat=2):
            assert C.apply_op(C.OPCODES[name], a, b) == fn(a, b), name


def test_circuit_validation():
    with pytest.raises(BadInputError):
        C.Circuit(2, [C.AND], [4], [2], 4)      # self reference
    with pytest.raises(BadInputError):
        C.Circuit(2, [16], [2], [3], 4)
    with pytest.raises(BadInputError):
        C.Circuit(2, [C.AND], [2], [3], 5)


def test_evaluate_matches_truth_table():
    rng = np.random.default_rng(0)
    for n in range(1, 8):
        c = random_circuit(n, 25, rng)
        tt = C.truth_table(c)
        assert [C.evaluate(c, x) for x in range(1 << n)] == tt.bits.astype(int).tolist()


def test_index_convention():
    b = C.CircuitBuilder(3)
    c = b.build(b.x(1))
    assert C.truth_table(c) == variable(3, 1)
    assert C.evaluate(c, [1, 0, 0]) == 1


@given(tables())
@settings(max_examples=60, deadline=None)
def test_junta_table_roundtrip_and_predictor(g):
    c = C.build_junta_table(g)
    assert C.truth_table(c) == g
    assert c.size == C.predict_junta_size(g)
    assert c.size <= C.junta_size_bound(g.n)


def test_junta_table_examples():
    assert C.build_junta_table(variable(3, 2)).size == 0
    assert C.build_junta_table(TruthTable(2, [0, 0, 0, 0])).size == 0
    assert C.build_junta_table(TruthTable(2, [0, 0, 0, 1])).size == 1        # AND
    assert C.build_junta_table(parity(2)).size == 4           # NOT x2 plus one 3-gate mux
    g = tt_random(10, np.random.default_rng(10))
    assert C.build_junta_table(g).size == C.predict_junta_size(g) <= C.junta_size_bound(10)


def test_junta_size_bound_values():
    assert C.junta_size_bound(1) == 3
    assert C.junta_size_bound(2) == 3 * (2 + 1)
    assert C.junta_size_bound(10) == 3 * (4 + 16 + 128 + 64 + 32 + 16 + 8 + 4 + 2 + 1)


@given(tables(2, 7), st.data())
@settings(max_examples=40, deadline=None)
def test_xor_compose(f, data):
    g = tt_random(f.n, np.random.default_rng(data.draw(st.integers(0, 1000))))
    a, b = C.build_junta_table(f), C.build_junta_table(g)
    c = C.xor_compose(a, b)
    assert c.size == a.size + b.size + 1
    assert C.truth_table(c) == f ^ g


def test_xor_compose_arity():
    with pytest.raises(ArityError):
        C.xor_compose(C.build_parity([1, 2]), C.build_parity([1, 2, 3]))


@given(tables(1, 6), st.integers(0, 4))
@settings(max_examples=40, deadline=None)
def test_lift_prefix(g, extra):
    c = C.build_junta_table(g)
    lifted = C.lift_prefix(c, g.n + extra)
    assert lifted.size == c.size
    assert C.truth_table(lifted) == junta_embed(g, g.n + extra)


def test_lift_agreement_identity():
    # lifting a k-bit circuit keeps its agreement with a lifted k-junta when H is pushed to its marginal
    from circapprox.corefn import marginal_prefix, random_smooth_distribution
    rng = np.random.default_rng(4)
    g = tt_random(4, rng)
    c = C.build_junta_table(tt_random(4, rng))
    H = random_smooth_distribution(8, 0.5, rng)
    full = agreement(junta_embed(g, 8), C.truth_table(C.lift_prefix(c, 8)), H)
    assert full == pytest.approx(agreement(g, C.truth_table(c), marginal_prefix(H, 4)), abs=1e-12)


@pytest.mark.parametrize("subset", [[1], [1, 2], [2, 5, 7], list(range(1, 11))])
def test_parity_builder(subset):
    n = max(subset)
    c = C.build_parity(subset, n)
    assert c.size == len(subset) - 1
    want = np.zeros(1 << n, dtype=bool)
    for j in subset:
        want ^= variable(n, j).bits
    assert np.array_equal(C.truth_table(c).bits, want)


def test_negate_variants():
    b = C.CircuitBuilder(2)
    assert C.truth_table(b.build(C.C0, negate=True)).bits.all()
    b = C.CircuitBuilder(2)
    c = b.build(b.x(2), negate=True)
    assert c.size == 1 and C.truth_table(c) == ~variable(2, 2)
    b = C.CircuitBuilder(2)
    c = b.build(b.gate(C.AND, b.x(1), b.x(2)), negate=True)
    assert c.size == 1 and C.truth_table(c).bits.tolist() == [True, True, True, False]


@pytest.mark.parametrize("k", [2, 3, 4, 6, 8])
def test_quad_circuit_matches_generator(k):
    ctx = find_irreducible(k)
    rng = np.random.default_rng(k)
    for _ in range(6):
        seed = tuple(int(v) for v in rng.integers(0, 1 << k, size=4))
        spec = QuadGenSpec(ctx, seed)
        c = C.build_quad_gen_circuit(spec)
        assert c.size <= C.quad_gen_size_limit(k)
        want = [quad_gen_bit(spec, x) for x in range(1 << k)]
        assert C.truth_table(c).bits.astype(int).tolist() == want


def test_quad_circuit_constant_seeds():
    ctx = find_irreducible(3)
    for s1 in range(8):
        c = C.build_quad_gen_circuit(QuadGenSpec(ctx, (s1, 0, 0, 0)))
        assert c.size <= 1
        assert set(C.truth_table(c).bits.tolist()) == {bool(s1 & 1)}


def test_linear_gen_circuit():
    spec = linear_gen_build(5, np.random.default_rng(3))
    rng = np.random.default_rng(9)
    for seed in [0, 1, int(rng.integers(0, 1 << 40)), (1 << spec.outputs) - 1]:
        c = C.build_linear_gen_circuit(spec, seed)
        want = [linear_gen_bit(spec, seed, x) for x in range(spec.length)]
        assert C.truth_table(c).bits.astype(int).tolist() == want


@given(st.integers(1, 6), st.integers(0, 30), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_netlist_roundtrip(n, size, seed):
    c = random_circuit(n, size, np.random.default_rng(seed))
    text = C.format_netlist(c)
    d = C.parse_netlist(text)
    assert C.format_netlist(d) == text
    assert C.truth_table(d) == C.truth_table(c)


def test_netlist_format_example():
    b = C.CircuitBuilder(2)
    c = b.build(b.gate(C.XOR, b.x(1), b.x(2)))
    assert C.format_netlist(c) == "INPUTS 2\ng1 = XOR x1 x2\nOUT g1\n"


@pytest.mark.parametrize("text", [
    "INPUTS 2\ng1 = XOR x1 g2\ng2 = AND x1 x2\nOUT g2\n",      # forward reference
    "INPUTS 2\ng2 = XOR x1 x2\nOUT g2\n",                     # gap in numbering
    "INPUTS 2\ng1 = FOO x1 x2\nOUT g1\n",
    "INPUTS 2\ng1 = XOR x1 x3\nOUT g1\n",
    "INPUTS 2\ng1 = XOR x1 x2\n",
])
def test_netlist_rejects(text):
    with pytest.raises(BadInputError):
        C.parse_netlist(text)


def test_netlist_file_roundtrip(tmp_path):
    c = C.build_junta_table(tt_random(6, np.random.default_rng(1)))
    C.dump_netlist(c, tmp_path / "c.net")
    assert C.truth_table(C.load_netlist(tmp_path / "c.net")) == C.truth_table(c)
    assert C.truth_table(c) == C.truth_table(C.load_netlist(tmp_path / "c.net"))
    assert agreement(C.truth_table(c), C.truth_table(c), uniform(6)) == 1.0
