"""Truth tables, distributions on the hypercube, and agreement primitives.

Index convention: for x = (x_1, ..., x_n), ``index(x) = sum_j x_j 2^(n-j)``,
i.e. x_1 is the most significant bit.  A prefix subcube ``c x {0,1}^ell`` is
therefore the contiguous block ``[c * 2^ell, (c + 1) * 2^ell)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArityError, BadInputError, EmptySubcubeError

MAX_ARITY = 26
SUM_TOL = 1e-9
LOAD_RENORM_TOL = 1e-6
RENORM_FLOOR = 1e-12
SMOOTH_SLACK = 1e-12
# the constant in floor(log2(1 / (363 gamma^2))); 363 = 3 * 11^2
ELL_CONSTANT = 363.0
GAMMA_RANGE_NUMERATOR = 27.0


def _check_arity(n, lo=1, hi=MAX_ARITY):
    if not isinstance(n, (int, np.integer)) or not lo <= n <= hi:
        raise ArityError(f"arity must be an integer in [{lo}, {hi}], got {n!r}")


def _frozen(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TruthTable:
    """Dense table of f: {0,1}^n -> {0,1}; ``bits[index(x)] == f(x)``."""

    n: int
    bits: np.ndarray

    def __post_init__(self):
        _check_arity(self.n)
        bits = np.asarray(self.bits)
        if bits.shape != (1 << self.n,):
            raise ArityError(f"expected {1 << self.n} entries for n={self.n}, got shape {bits.shape}")
        if bits.dtype != np.bool_:
            if bits.size and (bits.min() < 0 or bits.max() > 1):
                raise BadInputError("truth table entries must be 0/1")
            bits = bits.astype(np.bool_)
        elif bits.flags.writeable:
            bits = bits.copy()
        object.__setattr__(self, "bits", _frozen(bits))

    def __len__(self):
        return self.bits.size

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def __invert__(self):
        return TruthTable(self.n, ~self.bits)

    def __xor__(self, other):
        _same_arity(self, other)
        return TruthTable(self.n, self.bits ^ other.bits)

    def __repr__(self):
        return f"TruthTable(n={self.n}, ones={int(self.bits.sum())})"

    def __call__(self, x):
        return int(self.bits[int(x)])

    @classmethod
    def from_int(cls, n, value):
        """Table whose entry i is bit i of ``value``."""
        idx = np.arange(1 << n, dtype=object)
        return cls(n, np.array([(value >> int(i)) & 1 for i in idx], dtype=np.bool_))

    def to_int(self):
        return sum(1 << int(i) for i in np.flatnonzero(self.bits))

    def ones(self):
        return int(np.count_nonzero(self.bits))

    def to_hex(self):
        nibbles = max(1, (1 << self.n) // 4)
        return np.packbits(self.bits, bitorder="big").tobytes().hex()[:nibbles]

    @classmethod
    def from_hex(cls, n, text):
        _check_arity(n)
        nibbles = max(1, (1 << n) // 4)
        text = text.strip().lower()
        if len(text) != nibbles:
            raise BadInputError(f"expected {nibbles} hex digits for n={n}, got {len(text)}")
        raw = bytes.fromhex(text + ("0" if len(text) % 2 else ""))
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="big")[: 1 << n]
        return cls(n, bits.astype(np.bool_))


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability weights over {0,1}^n, indexed like :class:`TruthTable`."""

    n: int
    weights: np.ndarray

    def __post_init__(self):
        _check_arity(self.n)
        w = np.array(self.weights, dtype=np.float64)
        if w.shape != (1 << self.n,):
            raise ArityError(f"expected {1 << self.n} weights for n={self.n}, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or w.min() < 0:
            raise BadInputError("weights must be finite and nonnegative")
        total = float(w.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise BadInputError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", _frozen(w))

    def __repr__(self):
        return f"Distribution(n={self.n}, support={int(np.count_nonzero(self.weights))})"

    @property
    def support_size(self):
        return int(np.count_nonzero(self.weights))


@dataclass(frozen=True)
class ApproxParams:
    gamma: float
    ell: int
    clamped: bool
    raw_ell: int


def _same_arity(a, b):
    if a.n != b.n:
        raise ArityError(f"arity mismatch: {a.n} vs {b.n}")


def tt_random(n, rng):
    """Uniformly random function on n bits drawn from ``rng`` (a numpy Generator)."""
    _check_arity(n)
    return TruthTable(n, rng.integers(0, 2, size=1 << n, dtype=np.uint8).astype(np.bool_))


def constant(n, value):
    return TruthTable(n, np.full(1 << n, bool(value)))


def junta_embed(g, n):
    """f(x) = g(x_1..x_k) as a table on n >= k bits."""
    if g.n > n:
        raise ArityError(f"cannot embed a {g.n}-bit function into {n} bits")
    _check_arity(n)
    return TruthTable(n, np.repeat(g.bits, 1 << (n - g.n)))


def parity(n):
    _check_arity(n)
    idx = np.arange(1 << n, dtype=np.uint64)
    return TruthTable(n, (np.bitwise_count(idx) & 1).astype(np.bool_))


def variable(n, j):
    """The projection x_j (1-based, x_1 most significant)."""
    _check_arity(n)
    if not 1 <= j <= n:
        raise BadInputError(f"variable index {j} out of range for n={n}")
    idx = np.arange(1 << n, dtype=np.uint64)
    return TruthTable(n, ((idx >> np.uint64(n - j)) & np.uint64(1)).astype(np.bool_))


def uniform(n):
    _check_arity(n)
    return Distribution(n, np.full(1 << n, 1.0 / (1 << n)))


def point_mass(n, x):
    _check_arity(n)
    w = np.zeros(1 << n)
    w[int(x)] = 1.0
    return Distribution(n, w)


def uniform_on(n, mask):
    """Uniform distribution on the set ``{x : mask[x]}``."""
    mask = np.asarray(mask, dtype=bool)
    count = int(mask.sum())
    if count == 0:
        raise BadInputError("cannot build a uniform distribution on an empty set")
    return Distribution(n, mask / count)


def random_smooth_distribution(n, delta, rng):
    """A random delta-smooth distribution.

    Random weights are mixed with the uniform distribution using the largest
    mixing coefficient that keeps every weight at most 1/(delta 2^n).
    """
    if not 0 < delta <= 1:
        raise BadInputError("delta must lie in (0, 1]")
    _check_arity(n)
    size = 1 << n
    p = rng.random(size)
    p /= p.sum()
    cap = 1.0 / (delta * size)
    u = 1.0 / size
    pmax = float(p.max())
    lam = 1.0 if pmax <= cap else (cap - u) / (pmax - u)
    w = lam * p + (1.0 - lam) * u
    return Distribution(n, w / w.sum())


def agreement(f, g, H):
    """Pr_{x ~ H}[f(x) = g(x)]."""
    _same_arity(f, g)
    _same_arity(f, H)
    return math.fsum(H.weights[f.bits == g.bits])


def correlation(f, g, H):
    return 2.0 * agreement(f, g, H) - 1.0


def bias(f, H=None):
    """E_{x ~ H}[(-1)^f(x)]; uniform H by default."""
    if H is None:
        return 1.0 - 2.0 * f.ones() / len(f)
    _same_arity(f, H)
    return math.fsum(H.weights[~f.bits]) - math.fsum(H.weights[f.bits])


def marginal_prefix(H, t):
    """Distribution of the first t bits: H'(c) = Pr_H[x in c x {0,1}^(n-t)]."""
    if not 0 < t <= H.n:
        raise BadInputError(f"prefix length must be in [1, {H.n}], got {t}")
    if t == H.n:
        return H
    return Distribution(t, H.weights.reshape(1 << t, -1).sum(axis=1))


def conditional_suffix(H, c, ell):
    """H_c(y) = H(c o y) / H'(c) on the last ``ell`` bits."""
    if not 0 < ell < H.n:
        raise BadInputError(f"suffix length must be in [1, {H.n - 1}], got {ell}")
    size = 1 << ell
    if not 0 <= c < (1 << (H.n - ell)):
        raise BadInputError(f"prefix {c} out of range")
    block = H.weights[c * size:(c + 1) * size]
    mass = math.fsum(block)
    if mass == 0.0:
        raise EmptySubcubeError(f"prefix {c} has zero mass")
    return Distribution(ell, block / mass)


def is_smooth(H, delta):
    """True iff no point has more than 1/(delta 2^n) mass."""
    if not 0 < delta <= 1:
        raise BadInputError("delta must lie in (0, 1]")
    return float(H.weights.max()) <= 1.0 / (delta * (1 << H.n)) + SMOOTH_SLACK


def gamma_lower_limit(n):
    return GAMMA_RANGE_NUMERATOR / 2.0 ** (n / 2.0)


def approx_params(gamma, n, ell=None, enforce_range=True):
    """Subcube depth ell = floor(log2(1 / (363 gamma^2))), clamped into [0, n-1].

    ``ell`` overrides the formula (validated only for range).  With
    ``enforce_range`` the correlation target must satisfy
    27 / 2^(n/2) < gamma < 1/2.
    """
    _check_arity(n)
    lo = gamma_lower_limit(n)
    if enforce_range and not lo < gamma < 0.5:
        raise BadInputError(
            f"gamma={gamma} outside the admissible range ({lo:.6g}, 0.5) for n={n}"
        )
    if not 0 < gamma < 0.5:
        raise BadInputError(f"gamma must lie in (0, 1/2), got {gamma}")
    raw = math.floor(math.log2(1.0 / (ELL_CONSTANT * gamma * gamma)))
    if ell is not None:
        if not 0 <= ell <= n - 1:
            raise BadInputError(f"ell override must be in [0, {n - 1}], got {ell}")
        return ApproxParams(gamma, int(ell), False, raw)
    value = min(max(raw, 0), n - 1)
    return ApproxParams(gamma, value, value != raw, raw)


# ---------------------------------------------------------------- file formats

def dump_tt(f, path=None):
    text = f"TT n={f.n}\n{f.to_hex()}\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _parse_header(line, tag):
    parts = line.split()
    if not parts or parts[0] != tag:
        raise BadInputError(f"expected a '{tag}' header, got {line!r}")
    fields = {}
    for p in parts[1:]:
        key, sep, value = p.partition("=")
        if not sep:
            raise BadInputError(f"malformed header field {p!r}")
        fields[key] = value
    return fields


def parse_tt(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise BadInputError("truth-table file must have a header and one hex line")
    fields = _parse_header(lines[0], "TT")
    try:
        n = int(fields["n"])
    except (KeyError, ValueError) as exc:
        raise BadInputError("TT header needs n=<int>") from exc
    return TruthTable.from_hex(n, lines[1])


def load_tt(path):
    return parse_tt(Path(path).read_text())


def dump_dist(H, path=None):
    lines = [f"DIST n={H.n}"]
    for i in np.flatnonzero(H.weights):
        lines.append(f"{int(i)} {float(H.weights[i])!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_dist(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise BadInputError("empty distribution file")
    fields = _parse_header(lines[0], "DIST")
    try:
        n = int(fields["n"])
    except (KeyError, ValueError) as exc:
        raise BadInputError("DIST header needs n=<int>") from exc
    _check_arity(n)
    w = np.zeros(1 << n)
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise BadInputError(f"malformed distribution line {ln!r}")
        i, v = int(parts[0]), float(parts[1])
        if not 0 <= i < w.size:
            raise BadInputError(f"index {i} out of range for n={n}")
        w[i] = v
    if w.min() < 0:
        raise BadInputError("negative weight in distribution file")
    total = math.fsum(w)
    if abs(total - 1.0) > LOAD_RENORM_TOL:
        raise BadInputError(f"weights sum to {total!r}; refusing to renormalise")
    # sums off by rounding only are kept as written so dump/parse round-trips exactly
    return Distribution(n, w if abs(total - 1.0) <= RENORM_FLOOR else w / total)


def load_dist(path):
    return parse_dist(Path(path).read_text())
