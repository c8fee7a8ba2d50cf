"""4-wise uniform bit generators and testers for uniformity and anticoncentration.

A generator maps a seed to a bit string indexed by positions ``0 .. L-1``.
Seeds are Python ints (they can exceed 64 bits).  Every generator exposes

* ``length`` and ``seed_bits``,
* ``output(seed)``: the whole string as a bool array,
* ``output_matrix(seeds, positions)``: a (len(seeds), len(positions)) uint8
  matrix, vectorised over seeds,
* ``sample_seeds(rng, count)`` and, for small seed spaces, ``all_seeds()``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf2k
from .corefn import TruthTable
from .errors import BadInputError, BudgetExhaustedError
from .kernels import quad_block_sums

EXHAUSTIVE_SEED_LIMIT = 1 << 24
SIGMA_WIDTH = 5.0
ANTICONC_PROB = 2.0 / 11.0


def _parity64(a):
    return (np.bitwise_count(a) & 1).astype(np.uint8)


def _as_seed_array(seeds):
    """Seeds as uint64 if they all fit, else None."""
    if isinstance(seeds, np.ndarray) and seeds.dtype == np.uint64:
        return seeds
    seeds = list(seeds)
    if all(0 <= int(s) < (1 << 64) for s in seeds):
        return np.array([int(s) for s in seeds], dtype=np.uint64)
    return None


def _random_ints(rng, bits, count):
    """``count`` uniform ``bits``-bit Python ints."""
    if bits == 0:
        return [0] * count
    nbytes = (bits + 7) // 8
    raw = rng.integers(0, 256, size=(count, nbytes), dtype=np.uint8)
    mask = (1 << bits) - 1
    return [int.from_bytes(row.tobytes(), "little") & mask for row in raw]


# ------------------------------------------------------------ quadratic generator

@dataclass(frozen=True)
class QuadGenSpec:
    """A seeded quadratic generator: bit x is iota(s1 + s2 x + s3 x^2 + s4 x^3)."""

    ctx: gf2k.FieldCtx
    seed: tuple

    def __post_init__(self):
        if len(self.seed) != 4:
            raise BadInputError("a quadratic generator seed has four field elements")
        object.__setattr__(self, "seed", tuple(self.ctx.check(int(s)) for s in self.seed))

    @property
    def length(self):
        return self.ctx.order

    def seed_int(self):
        k = self.ctx.k
        return sum(s << (j * k) for j, s in enumerate(self.seed))


def quad_gen_bit(spec, x):
    if not 0 <= x < spec.length:
        raise BadInputError(f"position {x} out of range [0, {spec.length})")
    return gf2k.iota(gf2k.poly_eval_deg3(spec.ctx, spec.seed, x))


class QuadGenerator:
    """All seeds of the quadratic generator over one field."""

    kind = "quad"

    def __init__(self, ctx):
        if isinstance(ctx, int):
            ctx = gf2k.find_irreducible(ctx)
        self.ctx = ctx
        self.k = ctx.k
        self.length = ctx.order
        self.seed_bits = 4 * ctx.k
        self.num_seeds = 1 << self.seed_bits
        self._basis_masks = np.array([gf2k.iota_mask(ctx, 1 << j) for j in range(ctx.k)], dtype=np.uint64)

    def __repr__(self):
        return f"QuadGenerator(k={self.k}, modulus={self.ctx.modulus:#x})"

    def split(self, seed):
        k, mask = self.k, (1 << self.k) - 1
        return tuple((int(seed) >> (j * k)) & mask for j in range(4))

    def join(self, parts):
        return QuadGenSpec(self.ctx, tuple(parts)).seed_int()

    def spec(self, seed):
        return QuadGenSpec(self.ctx, self.split(seed))

    def _masks(self, c):
        """iota_mask of each element in ``c`` (uint64 array)."""
        out = np.zeros(c.shape, dtype=np.uint64)
        for j, mj in enumerate(self._basis_masks):
            out |= _parity64(c & mj).astype(np.uint64) << np.uint64(j)
        return out

    def _components(self, seeds):
        arr = _as_seed_array(seeds)
        mask = (1 << self.k) - 1
        if arr is not None:
            return [(arr >> np.uint64(j * self.k)) & np.uint64(mask) for j in range(4)]
        parts = np.array([self.split(s) for s in seeds], dtype=np.uint64).reshape(-1, 4)
        return [parts[:, j] for j in range(4)]

    def _powers(self, positions):
        pos = np.asarray(positions, dtype=np.uint64)
        if pos.size and int(pos.max()) >= self.length:
            raise BadInputError("position out of range")
        x2 = gf2k.mul_many(self.ctx, pos, pos)
        return pos, x2, gf2k.mul_many(self.ctx, x2, pos)

    def output_matrix(self, seeds, positions):
        s1, s2, s3, s4 = self._components(seeds)
        x, x2, x3 = self._powers(positions)
        out = (s1 & np.uint64(1)).astype(np.uint8)[:, None]
        for s, p in ((s2, x), (s3, x2), (s4, x3)):
            out = out ^ _parity64(p[None, :] & self._masks(s)[:, None])
        return out

    def output(self, seed):
        s1, s2, s3, s4 = self.split(seed)
        x, x2, x3 = (a.astype(np.uint64) for a in gf2k.power_tables(self.ctx))
        bits = np.full(self.length, s1 & 1, dtype=np.uint8)
        for s, p in ((s2, x), (s3, x2), (s4, x3)):
            if s:
                bits ^= _parity64(p & np.uint64(gf2k.iota_mask(self.ctx, s)))
        return bits.astype(np.bool_)

    def block_sums(self, f_bits, weights, seed, ell):
        """Sums of weights(x) (-1)^(f(x) + G(seed)_x) over consecutive blocks of 2^ell."""
        s1, s2, s3, s4 = self.split(seed)
        _, x2, x3 = gf2k.power_tables(self.ctx)
        m = [gf2k.iota_mask(self.ctx, s) for s in (s2, s3, s4)]
        return quad_block_sums(f_bits, weights, x2, x3, s1 & 1, *m, ell)

    def all_seeds(self):
        if self.num_seeds > EXHAUSTIVE_SEED_LIMIT:
            raise BudgetExhaustedError(f"{self.num_seeds} seeds is too many to enumerate")
        return np.arange(self.num_seeds, dtype=np.uint64)

    def sample_seeds(self, rng, count):
        parts = [rng.integers(0, 1 << self.k, size=count, dtype=np.uint64) for _ in range(4)]
        return [self.join(tuple(int(p[i]) for p in parts)) for i in range(count)]


class InnerProductGenerator:
    """G(s)_x = <s, x>: pairwise but not 3-wise uniform."""

    kind = "inner"

    def __init__(self, n):
        if not 1 <= n <= 24:
            raise BadInputError("inner-product generator arity must be in [1, 24]")
        self.n = n
        self.length = 1 << n
        self.seed_bits = n
        self.num_seeds = 1 << n

    def output_matrix(self, seeds, positions):
        s = _as_seed_array(seeds)
        pos = np.asarray(positions, dtype=np.uint64)
        return _parity64(s[:, None] & pos[None, :])

    def output(self, seed):
        return _parity64(np.arange(self.length, dtype=np.uint64) & np.uint64(seed)).astype(np.bool_)

    def all_seeds(self):
        return np.arange(self.num_seeds, dtype=np.uint64)

    def sample_seeds(self, rng, count):
        return _random_ints(rng, self.seed_bits, count)


# ---------------------------------------------------------------- uniformity test

@dataclass
class MarginalResult:
    positions: tuple
    counts: np.ndarray
    ok: bool


@dataclass
class KwiseReport:
    order: int
    mode: str
    seeds: int
    results: list = field(default_factory=list)

    @property
    def all_ok(self):
        return all(r.ok for r in self.results)

    @property
    def exact_uniform(self):
        return self.mode == "exhaustive" and self.all_ok

    def failures(self):
        return [r for r in self.results if not r.ok]


def verify_kwise(gen, order=4, positions=None, samples=None, rng=None, chunk=1 << 16):
    """Pattern counts of each ``order``-position marginal.

    Without ``samples`` every seed is enumerated and uniformity must be exact.
    With ``samples`` seeds are drawn from ``rng`` and each of the 2^order
    pattern counts must lie within 5 standard deviations of its mean.
    """
    if positions is None:
        positions = list(itertools.combinations(range(gen.length), order))
    positions = [tuple(int(p) for p in T) for T in positions]
    for T in positions:
        if len(T) != order or len(set(T)) != order:
            raise BadInputError(f"position set {T} must hold {order} distinct positions")
    if samples is None:
        seeds = gen.all_seeds()
        mode = "exhaustive"
    else:
        if rng is None:
            raise BadInputError("sampled mode needs an rng")
        seeds = gen.sample_seeds(rng, samples)
        mode = "sampled"
    total = len(seeds)
    used = sorted({p for T in positions for p in T})
    col = {p: i for i, p in enumerate(used)}
    idx = np.array([[col[p] for p in T] for T in positions], dtype=np.int64)
    weights = 1 << np.arange(order - 1, -1, -1, dtype=np.int64)
    counts = np.zeros((len(positions), 1 << order), dtype=np.int64)
    for start in range(0, total, chunk):
        bits = gen.output_matrix(seeds[start:start + chunk], used).astype(np.int64)
        for t in range(len(positions)):
            pat = bits[:, idx[t]] @ weights
            counts[t] += np.bincount(pat, minlength=1 << order)
    report = KwiseReport(order, mode, total)
    p = 1.0 / (1 << order)
    slack = SIGMA_WIDTH * math.sqrt(total * p * (1 - p))
    for T, c in zip(positions, counts):
        if mode == "exhaustive":
            ok = total % (1 << order) == 0 and bool(np.all(c == total >> order))
        else:
            ok = bool(np.all(np.abs(c - total * p) <= slack))
        report.results.append(MarginalResult(T, c, ok))
    return report


def anticoncentration_check(gen, v, samples=None, rng=None, chunk=1 << 15):
    """Fraction of seeds with |sum_i v_i (-1)^{bit_i}| >= ||v|| / sqrt(3)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (gen.length,):
        raise BadInputError(f"weight vector must have length {gen.length}")
    seeds = gen.all_seeds() if samples is None else gen.sample_seeds(rng, samples)
    norm2 = float(v @ v)
    hits = 0
    positions = np.arange(gen.length)
    for start in range(0, len(seeds), chunk):
        bits = gen.output_matrix(seeds[start:start + chunk], positions)
        sums = (1.0 - 2.0 * bits) @ v
        # squared form avoids the square root; the slack absorbs rounding at equality
        hits += int(np.count_nonzero(3.0 * sums * sums >= norm2 * (1 - 1e-12)))
    return hits / len(seeds)


# ------------------------------------------------------------ linear generator

@dataclass(frozen=True, eq=False)
class LinearGenSpec:
    """Code-based generator: G(s)_x = <(g_i(Enc(x)_{S_i}))_i, s>."""

    n: int
    m: int
    delta: float
    rows: tuple
    sets: tuple
    locals: tuple
    verified: bool = False

    @property
    def length(self):
        return 1 << self.n

    @property
    def outputs(self):
        return len(self.sets)

    def encode(self, x):
        if not 0 <= x < self.length:
            raise BadInputError(f"position {x} out of range")
        c = 0
        for j, r in enumerate(self.rows):
            if (x >> j) & 1:
                c ^= r
        return c

    def column_mask(self, c):
        """Message bits whose basis codeword has a 1 in coordinate c."""
        return sum(((r >> c) & 1) << j for j, r in enumerate(self.rows))

    def pattern(self, i, x):
        code = self.encode(x)
        return sum(((code >> c) & 1) << t for t, c in enumerate(self.sets[i]))

    def local(self, i, pattern):
        try:
            return self.locals[i][pattern]
        except KeyError:
            raise BadInputError(f"pattern {pattern:#x} never arose for local function {i}") from None

    def local_table(self, i):
        w = len(self.sets[i])
        bits = np.zeros(1 << w, dtype=np.bool_)
        for p, b in self.locals[i].items():
            bits[p] = bool(b)
        return TruthTable(w, bits)

    def local_over_inputs(self, i):
        return TruthTable(self.n, _local_column(self, _codewords(self.rows, self.n), i).astype(np.bool_))

    def hvec_matrix(self):
        """(2^n, outputs) uint8 matrix of local evaluations."""
        return _hvec(self)


def _codewords(rows, n):
    x = np.arange(1 << n, dtype=np.uint64)
    words = np.zeros(1 << n, dtype=np.uint64)
    for j, r in enumerate(rows):
        words ^= np.where((x >> np.uint64(j)) & np.uint64(1), np.uint64(r), np.uint64(0))
    return words


def _patterns(words, window):
    p = np.zeros(words.shape, dtype=np.uint64)
    for t, c in enumerate(window):
        p |= ((words >> np.uint64(c)) & np.uint64(1)) << np.uint64(t)
    return p


def _local_column(spec, words, i):
    """g_i(Enc(x)_{S_i}) for every position x."""
    table = spec.locals[i]
    keys = np.array(sorted(table), dtype=np.uint64)
    vals = np.array([table[int(k)] for k in keys], dtype=np.uint8)
    pats = _patterns(words, spec.sets[i])
    pos = np.searchsorted(keys, pats)
    pos[pos == keys.size] = 0
    if keys.size == 0 or np.any(keys[pos] != pats):
        raise BadInputError(f"local function {i} lacks a pattern that arises")
    return vals[pos]


def _hvec(spec):
    words = _codewords(spec.rows, spec.n)
    H = np.zeros((spec.length, spec.outputs), dtype=np.uint8)
    for i in range(spec.outputs):
        H[:, i] = _local_column(spec, words, i)
    return H


def linear_gen_bit(spec, seed, x):
    code = spec.encode(x)
    acc = 0
    for i, window in enumerate(spec.sets):
        if (seed >> i) & 1:
            p = sum(((code >> c) & 1) << t for t, c in enumerate(window))
            acc ^= spec.local(i, p)
    return acc


def min_code_weight(rows, n):
    words = _codewords(rows, n)[1:]
    return int(np.bitwise_count(words).min()) if words.size else 0


def independence_certificate(H):
    """True iff no nonempty set of at most 4 rows of ``H`` (nonzero positions) XORs to zero.

    Sets of size 1 and 2 need nonzero, distinct rows; size 3 needs no pair sum to
    equal a row; size 4 needs all pair sums of distinct pairs to differ.
    """
    H = np.asarray(H, dtype=np.uint8)
    packed = np.packbits(H, axis=1)
    width = packed.shape[1]
    void = np.dtype((np.void, width))

    def keys(a):
        return np.ascontiguousarray(a).view(void).ravel()

    if np.any(~packed.any(axis=1)):
        return False
    singles = keys(packed)
    if np.unique(singles).size != singles.size:
        return False
    i, j = np.triu_indices(packed.shape[0], k=1)
    pairs = keys(packed[i] ^ packed[j])
    if np.isin(pairs, singles).any():
        return False
    return np.unique(pairs).size == pairs.size


def linear_gen_build(n, rng, max_restarts=100, outputs_factor=16, set_constant=10.0,
                     code_factor=4, verify=None):
    """Rejection-sample a code-based generator that passes the independence certificate."""
    if n < 2:
        raise BadInputError("the code-based generator needs n >= 2 (four distinct nonzero points)")
    m = code_factor * n
    if m > 64:
        raise BadInputError("code length above 64 is not supported")
    if verify is None:
        verify = n <= 8
    outputs = outputs_factor * n
    for _ in range(max_restarts):
        rows = tuple(int(r) for r in _random_ints(rng, m, n))
        w = min_code_weight(rows, n)
        if w == 0:
            continue
        delta = w / m
        size = math.ceil(set_constant / delta)
        if size > 64:
            continue
        words = _codewords(rows, n)
        sets, locals_, cols = [], [], []
        for _i in range(outputs):
            window = tuple(int(c) for c in rng.integers(0, m, size=size))
            pats = _patterns(words, window)
            uniq, inv = np.unique(pats, return_inverse=True)
            draw = rng.integers(0, 2, size=uniq.size, dtype=np.uint8)
            sets.append(window)
            locals_.append({int(p): int(b) for p, b in zip(uniq, draw)})
            cols.append(draw[inv])
        H = np.stack(cols, axis=1)
        if verify and not independence_certificate(H[1:]):
            continue
        return LinearGenSpec(n, m, delta, rows, tuple(sets), tuple(locals_), verified=bool(verify))
    raise BudgetExhaustedError(f"no certified generator for n={n} within {max_restarts} restarts")


class LinearGenerator:
    kind = "linear"

    def __init__(self, spec):
        self.spec = spec
        self.length = spec.length
        self.seed_bits = spec.outputs
        self.num_seeds = 1 << spec.outputs
        self._H = spec.hvec_matrix()
        self._Hf = self._H.astype(np.float32)

    def __repr__(self):
        return f"LinearGenerator(n={self.spec.n}, outputs={self.seed_bits})"

    def _seed_bits(self, seeds):
        nbytes = (self.seed_bits + 7) // 8
        raw = np.frombuffer(b"".join(int(s).to_bytes(nbytes, "little") for s in seeds), dtype=np.uint8)
        return np.unpackbits(raw.reshape(-1, nbytes), axis=1, bitorder="little")[:, : self.seed_bits]

    def output_matrix(self, seeds, positions):
        S = self._seed_bits(seeds).astype(np.float32)
        prod = S @ self._Hf[np.asarray(positions, dtype=np.int64)].T
        return (prod.astype(np.int64) & 1).astype(np.uint8)

    def output(self, seed):
        return self.output_matrix([seed], np.arange(self.length))[0].astype(np.bool_)

    def all_seeds(self):
        if self.num_seeds > EXHAUSTIVE_SEED_LIMIT:
            raise BudgetExhaustedError(f"2^{self.seed_bits} seeds is too many to enumerate")
        return list(range(self.num_seeds))

    def sample_seeds(self, rng, count):
        return _random_ints(rng, self.seed_bits, count)


# ---------------------------------------------------------------------- files

def format_quad(spec):
    return f"KWGEN quad k={spec.ctx.k} mod={spec.ctx.modulus:x} seed={spec.seed_int():x}\n"


def format_linear(spec):
    lines = [f"KWGEN linear n={spec.n} m={spec.m} delta={spec.delta!r} outputs={spec.outputs} verified={int(spec.verified)}"]
    for j, r in enumerate(spec.rows):
        lines.append(f"ROW {j} {r:x}")
    for i, window in enumerate(spec.sets):
        lines.append(f"SET {i} " + ",".join(str(c) for c in window))
    for i, table in enumerate(spec.locals):
        for p in sorted(table):
            lines.append(f"{i} {p:x} {table[p]}")
    return "\n".join(lines) + "\n"


def format_spec(spec):
    return format_quad(spec) if isinstance(spec, QuadGenSpec) else format_linear(spec)


def _header_fields(line):
    parts = line.split()
    if len(parts) < 2 or parts[0] != "KWGEN":
        raise BadInputError("generator file must start with 'KWGEN'")
    try:
        fields = dict(p.split("=", 1) for p in parts[2:])
    except ValueError as exc:
        raise BadInputError(f"malformed header {line!r}") from exc
    return parts[1], fields


def parse_spec(text):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise BadInputError("empty generator file")
    kind, f = _header_fields(lines[0])
    try:
        if kind == "quad":
            ctx = gf2k.FieldCtx(int(f["k"]), int(f["mod"], 16))
            gen = QuadGenerator(ctx)
            return QuadGenSpec(ctx, gen.split(int(f["seed"], 16)))
        if kind != "linear":
            raise BadInputError(f"unknown generator kind {kind!r}")
        n, m, outputs = int(f["n"]), int(f["m"]), int(f["outputs"])
        rows = [0] * n
        sets = [()] * outputs
        locals_ = [dict() for _ in range(outputs)]
        for ln in lines[1:]:
            parts = ln.split()
            if parts[0] == "ROW":
                rows[int(parts[1])] = int(parts[2], 16)
            elif parts[0] == "SET":
                sets[int(parts[1])] = tuple(int(c) for c in parts[2].split(","))
            else:
                locals_[int(parts[0])][int(parts[1], 16)] = int(parts[2])
    except (KeyError, IndexError, ValueError) as exc:
        raise BadInputError(f"malformed generator file: {exc}") from exc
    w = min_code_weight(rows, n)
    if w / m != float(f["delta"]):
        raise BadInputError(f"recorded delta {f['delta']} does not match measured {w}/{m}")
    return LinearGenSpec(n, m, float(f["delta"]), tuple(rows), tuple(sets), tuple(locals_),
                         verified=f.get("verified") == "1")


def dump_spec(spec, path):
    Path(path).write_text(format_spec(spec))


def load_spec(path):
    return parse_spec(Path(path).read_text())


def generator_for(spec):
    if isinstance(spec, QuadGenSpec):
        return QuadGenerator(spec.ctx)
    return LinearGenerator(spec)
