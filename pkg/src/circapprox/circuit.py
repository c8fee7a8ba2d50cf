"""Fan-in-2 circuits over arbitrary two-bit gates.

References are integers: ``0``/``1`` are the constants, ``2 .. n+1`` are the
inputs x_1..x_n and ``n + 2 + i`` is gate i.  Gates only point backwards, so
evaluation is a single forward pass.  Size is the number of gates; inputs and
constants are free.

An opcode is the gate's own truth table: bit ``2*a + b`` of the opcode is the
output on left input ``a`` and right input ``b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gf2k
from .corefn import TruthTable
from .errors import ArityError, BadInputError
from .kernels import eval_circuit_words

OPNAMES = (
    "FALSE", "NOR", "NLANDR", "NLEFT", "LANDNR", "NRIGHT", "XOR", "NAND",
    "AND", "XNOR", "RIGHT", "LIMPR", "LEFT", "RIMPL", "OR", "TRUE",
)
OPCODES = {name: i for i, name in enumerate(OPNAMES)}

FALSE, NOR, NLANDR, NLEFT, LANDNR, NRIGHT, XOR, NAND = range(8)
AND, XNOR, RIGHT, LIMPR, LEFT, RIMPL, OR, TRUE = range(8, 16)

C0, C1 = 0, 1


def apply_op(op, a, b):
    return (op >> (2 * a + b)) & 1


def input_ref(j):
    """Reference of input x_j (1-based)."""
    return j + 1


@dataclass(frozen=True, eq=False)
class Circuit:
    n: int
    ops: np.ndarray
    left: np.ndarray
    right: np.ndarray
    output: int

    def __post_init__(self):
        ops = np.array(self.ops, dtype=np.uint8)
        left = np.array(self.left, dtype=np.int64)
        right = np.array(self.right, dtype=np.int64)
        if not (ops.ndim == left.ndim == right.ndim == 1 and ops.size == left.size == right.size):
            raise BadInputError("gate arrays must be 1-d and of equal length")
        if ops.size and ops.max() > 15:
            raise BadInputError("opcodes must be in [0, 15]")
        limit = self.n + 2 + np.arange(ops.size, dtype=np.int64)
        if ops.size and (left.min() < 0 or right.min() < 0 or np.any(left >= limit) or np.any(right >= limit)):
            raise BadInputError("gate references must point to inputs, constants or earlier gates")
        if not 0 <= self.output < self.n + 2 + ops.size:
            raise BadInputError(f"output reference {self.output} out of range")
        for a in (ops, left, right):
            a.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "output", int(self.output))

    @property
    def size(self):
        return int(self.ops.size)

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"Circuit(n={self.n}, size={self.size})"


class CircuitBuilder:
    """Append-only gate list; ``build`` freezes it into a :class:`Circuit`."""

    def __init__(self, n):
        if n < 1:
            raise ArityError("circuits need at least one input")
        self.n = n
        self._ops = []
        self._left = []
        self._right = []
        self._count = 0

    @property
    def size(self):
        return self._count

    def next_ref(self):
        return self.n + 2 + self._count

    def x(self, j):
        if not 1 <= j <= self.n:
            raise ArityError(f"input x{j} out of range for n={self.n}")
        return input_ref(j)

    def gate(self, op, a, b):
        ref = self.next_ref()
        self._ops.append(np.array([op], dtype=np.uint8))
        self._left.append(np.array([a], dtype=np.int64))
        self._right.append(np.array([b], dtype=np.int64))
        self._count += 1
        return ref

    def gates(self, ops, left, right):
        """Append a batch of gates; returns their references."""
        ops = np.broadcast_to(np.asarray(ops, dtype=np.uint8), np.shape(left))
        m = len(left)
        first = self.next_ref()
        self._ops.append(np.array(ops, dtype=np.uint8))
        self._left.append(np.array(left, dtype=np.int64))
        self._right.append(np.array(right, dtype=np.int64))
        self._count += m
        return np.arange(first, first + m, dtype=np.int64)

    def xor_all(self, refs):
        refs = list(refs)
        if not refs:
            return C0
        acc = refs[0]
        for r in refs[1:]:
            acc = self.gate(XOR, acc, r)
        return acc

    def paste(self, circ, input_refs):
        """Copy ``circ`` with its inputs wired to ``input_refs``; returns its output ref."""
        if len(input_refs) != circ.n:
            raise ArityError(f"need {circ.n} input references, got {len(input_refs)}")
        remap = np.empty(circ.n + 2 + circ.size, dtype=np.int64)
        remap[0], remap[1] = C0, C1
        remap[2:circ.n + 2] = np.asarray(input_refs, dtype=np.int64)
        remap[circ.n + 2:] = np.arange(self.next_ref(), self.next_ref() + circ.size)
        if circ.size:
            self.gates(circ.ops, remap[circ.left], remap[circ.right])
        return int(remap[circ.output])

    def build(self, output, negate=False):
        ops = np.concatenate(self._ops) if self._ops else np.zeros(0, dtype=np.uint8)
        left = np.concatenate(self._left) if self._left else np.zeros(0, dtype=np.int64)
        right = np.concatenate(self._right) if self._right else np.zeros(0, dtype=np.int64)
        if negate:
            if output in (C0, C1):
                output = C1 - output
            elif output >= self.n + 2:
                ops = ops.copy()
                i = output - self.n - 2
                ops[i] = 15 - ops[i]
            else:
                ops = np.append(ops, np.uint8(NLEFT))
                left = np.append(left, output)
                right = np.append(right, output)
                output = self.n + 2 + ops.size - 1
        return Circuit(self.n, ops, left, right, output)


# ------------------------------------------------------------------ evaluation

def _input_bits(n, x):
    if isinstance(x, (int, np.integer)):
        if not 0 <= x < (1 << n):
            raise ArityError(f"input index {x} out of range for n={n}")
        return [(int(x) >> (n - j)) & 1 for j in range(1, n + 1)]
    bits = [int(b) & 1 for b in x]
    if len(bits) != n:
        raise ArityError(f"expected {n} input bits, got {len(bits)}")
    return bits


def evaluate(c, x):
    """Value of ``c`` on one input (an index or a sequence x_1..x_n)."""
    vals = [0, 1] + _input_bits(c.n, x)
    for op, a, b in zip(c.ops.tolist(), c.left.tolist(), c.right.tolist()):
        vals.append((op >> (2 * vals[a] + vals[b])) & 1)
    return vals[c.output]


def truth_table_words(c):
    return eval_circuit_words(c.n, c.ops, c.left, c.right, c.output)


def truth_table(c):
    """Evaluate ``c`` on all 2^n inputs."""
    words = truth_table_words(c)
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")[: 1 << c.n]
    return TruthTable(c.n, bits.astype(np.bool_))


# -------------------------------------------------------------- junta tables

def _node_gates(b, sel, lo, hi):
    """Emit multiplexers ``sel ? hi : lo`` for arrays of distinct (lo, hi) pairs."""
    refs = np.empty(lo.size, dtype=np.int64)
    lo_c = lo < 2
    hi_c = hi < 2
    lit = (lo == C0) & (hi == C1)
    neg = (lo == C1) & (hi == C0)
    refs[lit] = sel
    one_gate = (
        ((lo == C0) & ~hi_c, AND, hi),
        ((lo == C1) & ~hi_c, LIMPR, hi),
        ((hi == C0) & ~lo_c, NLANDR, lo),
        ((hi == C1) & ~lo_c, OR, lo),
    )
    if neg.any():
        m = int(neg.sum())
        refs[neg] = b.gates(np.full(m, NLEFT), np.full(m, sel), np.full(m, sel))
    for mask, op, other in one_gate:
        if mask.any():
            m = int(mask.sum())
            refs[mask] = b.gates(np.full(m, op), np.full(m, sel), other[mask])
    full = ~lo_c & ~hi_c
    if full.any():
        m = int(full.sum())
        t1 = b.gates(np.full(m, AND), np.full(m, sel), hi[full])
        t0 = b.gates(np.full(m, NLANDR), np.full(m, sel), lo[full])
        refs[full] = b.gates(np.full(m, OR), t0, t1)
    return refs


def build_junta_table(g):
    """Circuit computing ``g`` exactly.

    Shannon expansion from the last variable upwards, with every distinct
    subfunction built once (a reduced ordered decision diagram emitted as
    multiplexers).  A multiplexer costs 0, 1 or 3 gates depending on whether
    its branches are constants.
    """
    k = g.n
    b = CircuitBuilder(k)
    ids = g.bits.astype(np.int64)
    for t in range(1, k + 1):
        sel = input_ref(k - t + 1)
        lo, hi = ids[0::2], ids[1::2]
        new = lo.copy()
        diff = lo != hi
        if diff.any():
            keys = (lo[diff] << 32) | hi[diff]
            uniq, inv = np.unique(keys, return_inverse=True)
            refs = _node_gates(b, sel, uniq >> 32, uniq & 0xFFFFFFFF)
            new[diff] = refs[inv]
        ids = new
    return b.build(int(ids[0]))


def predict_junta_size(g):
    """Gate count of :func:`build_junta_table` computed from the table alone.

    For each level t, every distinct 2^t-bit block whose two halves differ
    becomes one multiplexer; its cost depends on which halves are constant.
    """
    k = g.n
    bits = g.bits
    total = 0
    for t in range(1, k + 1):
        blocks = bits.reshape(-1, 1 << t)
        half = 1 << (t - 1)
        lo, hi = blocks[:, :half], blocks[:, half:]
        differ = np.any(lo != hi, axis=1)
        if not differ.any():
            continue
        distinct = np.unique(np.packbits(blocks[differ], axis=1), axis=0)
        rows = np.unpackbits(distinct, axis=1)[:, : 1 << t].astype(bool)
        lo, hi = rows[:, :half], rows[:, half:]
        lo_const = ~lo.any(axis=1) | lo.all(axis=1)
        hi_const = ~hi.any(axis=1) | hi.all(axis=1)
        literal = ~lo.any(axis=1) & hi.all(axis=1)
        both = lo_const & hi_const & ~literal
        single = lo_const ^ hi_const
        total += int(both.sum()) + int(single.sum()) + 3 * int((~lo_const & ~hi_const).sum())
    return total


def junta_size_bound(k):
    """3 * sum_t min(2^(2^t), 2^(k-t)): at most that many multiplexers per level."""
    total = 0
    for t in range(1, k + 1):
        cap = 1 << (k - t)
        if t < 6:
            cap = min(cap, 1 << (1 << t))
        total += cap
    return 3 * total


# ------------------------------------------------------------------ combinators

def xor_compose(a, b):
    """Circuit for a XOR b; size(a) + size(b) + 1 gates."""
    if a.n != b.n:
        raise ArityError(f"arity mismatch: {a.n} vs {b.n}")
    base = a.n + 2
    shift_l = np.where(b.left >= base, b.left + a.size, b.left)
    shift_r = np.where(b.right >= base, b.right + a.size, b.right)
    out_b = b.output + a.size if b.output >= base else b.output
    ops = np.concatenate([a.ops, b.ops, [XOR]])
    left = np.concatenate([a.left, shift_l, [a.output]])
    right = np.concatenate([a.right, shift_r, [out_b]])
    return Circuit(a.n, ops, left, right, base + a.size + b.size)


def lift_prefix(c, n):
    """Run ``c`` on the first c.n of n inputs; gate count unchanged."""
    if c.n > n:
        raise ArityError(f"cannot lift a {c.n}-input circuit to {n} inputs")
    shift = n - c.n
    base = c.n + 2
    left = np.where(c.left >= base, c.left + shift, c.left)
    right = np.where(c.right >= base, c.right + shift, c.right)
    out = c.output + shift if c.output >= base else c.output
    return Circuit(n, c.ops, left, right, out)


def build_parity(subset, n=None):
    """XOR of the listed (1-based) variables with |subset| - 1 gates."""
    subset = sorted(set(int(j) for j in subset))
    if not subset:
        raise BadInputError("parity needs a nonempty variable set")
    n = subset[-1] if n is None else n
    b = CircuitBuilder(n)
    return b.build(b.xor_all(b.x(j) for j in subset))


def _parity_of_mask(b, mask, refs_by_bit):
    return b.xor_all(refs_by_bit[j] for j in range(len(refs_by_bit)) if (mask >> j) & 1)


def build_quad_gen_circuit(spec):
    """Circuit mapping a position x in GF(2^k) to iota(s1 + s2 x + s3 x^2 + s4 x^3).

    Input x_i carries bit k-i of the field element, so the circuit's truth
    table is indexed by the element itself.  Uses

        iota(p(x)) = iota(s1) + iota(s2 x) + iota((s3 + s4 x) x^2),

    where iota(s2 x), each coordinate of s3 + s4 x, and each iota(a^i x^2)
    are affine in the bits of x (multiplication by a hardwired constant and
    squaring are GF(2)-linear); the last term is sum_i w_i(x) * z_i(x).
    """
    ctx = spec.ctx
    k = ctx.k
    s1, s2, s3, s4 = spec.seed
    b = CircuitBuilder(k)
    bit_refs = [input_ref(k - j) for j in range(k)]
    sq = [gf2k.mul(ctx, 1 << j, 1 << j) for j in range(k)]

    const = gf2k.iota(s1)
    linear = gf2k.iota_mask(ctx, s2)
    products = []
    for i in range(k):
        # w_i = bit i of s3 + s4 x; z_i = iota(a^i x^2)
        w_mask = sum((((gf2k.mul(ctx, s4, 1 << j)) >> i) & 1) << j for j in range(k))
        w_const = (s3 >> i) & 1
        z_mask = sum(gf2k.iota(gf2k.mul(ctx, 1 << i, sq[j])) << j for j in range(k))
        if z_mask == 0:
            continue
        if w_mask == 0:
            if w_const:
                linear ^= z_mask
            continue
        products.append((w_mask, w_const, z_mask))

    terms = []
    if linear:
        terms.append(_parity_of_mask(b, linear, bit_refs))
    for w_mask, w_const, z_mask in products:
        w = _parity_of_mask(b, w_mask, bit_refs)
        z = _parity_of_mask(b, z_mask, bit_refs)
        terms.append(b.gate(NLANDR if w_const else AND, w, z))
    out = b.xor_all(terms)
    if not terms:
        out = C0
    return b.build(out, negate=bool(const))


def quad_gen_size_limit(k):
    """Frozen bound c * k^2 on :func:`build_quad_gen_circuit` sizes (c = 3)."""
    return 3 * k * k


def build_linear_gen_circuit(spec, seed):
    """Circuit for x -> <h(x), seed> where h(x)_i = g_i(Enc(x)_{S_i}).

    Encoder bits are parities of input bits.  A local function is wired to its
    encoder bits when its window has at most ``LOCAL_TABLE_LIMIT`` positions,
    and tabulated directly over x otherwise.
    """
    n = spec.n
    b = CircuitBuilder(n)
    bit_refs = [input_ref(n - j) for j in range(n)]
    code_refs = {}

    def code_bit(c):
        if c not in code_refs:
            code_refs[c] = _parity_of_mask(b, spec.column_mask(c), bit_refs)
        return code_refs[c]

    outs = []
    for i in range(spec.outputs):
        if not (seed >> i) & 1:
            continue
        window = spec.sets[i]
        if len(window) <= LOCAL_TABLE_LIMIT:
            table = spec.local_table(i)
            sub = build_junta_table(table)
            # table variable v reads pattern bit len(window) - v
            refs = [code_bit(window[len(window) - v]) for v in range(1, len(window) + 1)]
            outs.append(b.paste(sub, refs))
        else:
            sub = build_junta_table(spec.local_over_inputs(i))
            outs.append(b.paste(sub, [input_ref(j) for j in range(1, n + 1)]))
    return b.build(b.xor_all(outs) if outs else C0)


LOCAL_TABLE_LIMIT = 16


# ------------------------------------------------------------------- netlists

def _ref_name(n, r):
    if r < 2:
        return f"c{r}"
    if r < n + 2:
        return f"x{r - 1}"
    return f"g{r - n - 1}"


def format_netlist(c):
    lines = [f"INPUTS {c.n}"]
    for i, (op, a, b) in enumerate(zip(c.ops.tolist(), c.left.tolist(), c.right.tolist())):
        lines.append(f"g{i + 1} = {OPNAMES[op]} {_ref_name(c.n, a)} {_ref_name(c.n, b)}")
    lines.append(f"OUT {_ref_name(c.n, c.output)}")
    return "\n".join(lines) + "\n"


def _parse_ref(n, tok, ngates):
    try:
        kind, num = tok[0], int(tok[1:])
    except (IndexError, ValueError) as exc:
        raise BadInputError(f"bad reference {tok!r}") from exc
    if kind == "c" and num in (0, 1):
        return num
    if kind == "x" and 1 <= num <= n:
        return num + 1
    if kind == "g" and 1 <= num <= ngates:
        return n + 1 + num
    raise BadInputError(f"reference {tok!r} is out of range or points forward")


def parse_netlist(text):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("INPUTS "):
        raise BadInputError("netlist must start with 'INPUTS n' and end with 'OUT ref'")
    n = int(lines[0].split()[1])
    ops, left, right = [], [], []
    for ln in lines[1:-1]:
        parts = ln.split()
        if len(parts) != 5 or parts[1] != "=":
            raise BadInputError(f"malformed gate line {ln!r}")
        if parts[0] != f"g{len(ops) + 1}":
            raise BadInputError(f"gates must be numbered consecutively; got {parts[0]}")
        if parts[2] not in OPCODES:
            raise BadInputError(f"unknown gate {parts[2]!r}")
        ops.append(OPCODES[parts[2]])
        left.append(_parse_ref(n, parts[3], len(ops) - 1))
        right.append(_parse_ref(n, parts[4], len(ops) - 1))
    last = lines[-1].split()
    if len(last) != 2 or last[0] != "OUT":
        raise BadInputError("netlist must end with 'OUT ref'")
    return Circuit(n, ops, left, right, _parse_ref(n, last[1], len(ops)))


def dump_netlist(c, path):
    Path(path).write_text(format_netlist(c))


def load_netlist(path):
    return parse_netlist(Path(path).read_text())
