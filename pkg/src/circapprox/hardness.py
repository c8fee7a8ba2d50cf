"""Hard random juntas: counting certificates, the sampler, and exhaustive oracles.

A random k-bit function, viewed as an n-bit junta, is hard for size-s circuits
unless some circuit agrees with it on a (1 - delta) fraction of inputs.  The
certificate multiplies an explicit over-count of size-s circuits by the
binomial tail for one fixed circuit; a product below 1 proves that hard
juntas exist.  At toy scale, enumeration checks hardness outright.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import gmpy2
import numpy as np

from . import config
from .circuit import AND, LANDNR, NLANDR, NLEFT, OR, XOR, Circuit, input_ref
from .corefn import TruthTable, junta_embed, tt_random
from .errors import ArityError, BadInputError, ScaleGuardError

EXACT_TAIL_LIMIT = 1 << 20
TAIL_REL_PRECISION = 70   # stop summing once the rest is below 2^-70 of the total


def count_circuits_bound(n, s):
    """((n + s + 2)^2 * 16)^s: ordered predecessor pair and opcode for every gate."""
    if s < 0 or n < 0:
        raise BadInputError("n and s must be nonnegative")
    return ((n + s + 2) ** 2 * 16) ** s


def _log2_int(v):
    if v <= 0:
        return -math.inf
    shift = max(v.bit_length() - 60, 0)
    return math.log2(int(v >> shift)) + shift


@dataclass(frozen=True)
class TailResult:
    value: float      # the probability as a float (may underflow to 0)
    log2: float       # log2 of the probability, accurate even when value underflows
    method: str       # "exact", "truncated" or "hoeffding"


def _upper_tail_count(N, t):
    """sum_{i >= t} C(N, i), truncated once the remainder is provably negligible.

    Returns (count, truncated).
    """
    term = gmpy2.comb(N, t)
    total = term
    i = t
    while i < N:
        term = term * (N - i) // (i + 1)
        i += 1
        if term == 0:
            break
        total += term
        ratio_num, ratio_den = N - i, i + 1
        if ratio_num < ratio_den:
            # remaining terms form a series dominated by a geometric one
            rest = term * ratio_num // (ratio_den - ratio_num)
            if rest.bit_length() + TAIL_REL_PRECISION < total.bit_length():
                return int(total), i < N
    return int(total), False


def chernoff_tail(trials, threshold):
    """Pr[Bin(trials, 1/2) >= threshold].

    Exact big-integer summation up to 2^20 trials (cut off once the remainder
    is below 2^-70 relative), Hoeffding's bound exp(-2 (t/N - 1/2)^2 N) above.
    """
    N, t = int(trials), int(threshold)
    if N < 0:
        raise BadInputError("trials must be nonnegative")
    if t <= 0:
        return TailResult(1.0, 0.0, "exact")
    if t > N:
        return TailResult(0.0, -math.inf, "exact")
    if N > EXACT_TAIL_LIMIT:
        if 2 * t <= N:
            return TailResult(1.0, 0.0, "hoeffding")
        dev = t / N - 0.5
        ln = -2.0 * dev * dev * N
        return TailResult(math.exp(ln), ln / math.log(2), "hoeffding")
    if 2 * t > N:
        count, truncated = _upper_tail_count(N, t)
    else:
        # Pr[X >= t] = 1 - Pr[X >= N - t + 1] by symmetry
        low, truncated = _upper_tail_count(N, N - t + 1) if N - t + 1 <= N else (0, False)
        count = gmpy2.mpz(1 << N) - low
    log2 = _log2_int(count) - N
    value = 2.0 ** log2 if log2 > -1074 else 0.0
    return TailResult(value, log2, "truncated" if truncated else "exact")


def exact_tail_fraction(trials, threshold):
    """Pr[Bin(trials, 1/2) >= threshold] as an exact (numerator, 2^trials) pair."""
    num = sum(math.comb(trials, i) for i in range(max(threshold, 0), trials + 1))
    return num, 1 << trials


def hoeffding_log2(trials, threshold):
    if 2 * threshold <= trials:
        return 0.0
    dev = threshold / trials - 0.5
    return -2.0 * dev * dev * trials / math.log(2)


def inapprox_threshold(k, delta):
    """Agreements at or above ceil((1 - delta) 2^k) count as approximating."""
    return math.ceil((1.0 - delta) * (1 << k) - 1e-9)


@dataclass(frozen=True)
class Certificate:
    n: int
    k: int
    s: int
    delta: float
    threshold: int
    count: int
    log2_count: float
    tail: TailResult
    log2_hoeffding_product: float
    min_valid_k: int | None

    @property
    def log2_product(self):
        return self.log2_count + self.tail.log2

    @property
    def product(self):
        return 2.0 ** self.log2_product if self.log2_product < 1000 else math.inf

    @property
    def valid(self):
        return self.log2_product < 0

    @property
    def valid_hoeffding(self):
        return self.log2_hoeffding_product < 0

    def to_text(self):
        rows = {
            "n": self.n, "k": self.k, "s": self.s, "delta": repr(self.delta),
            "threshold": self.threshold,
            "count_log2": repr(self.log2_count),
            "count_hex": f"{self.count:x}",
            "tail_method": self.tail.method,
            "tail_log2": repr(self.tail.log2),
            "tail": repr(self.tail.value),
            "product_log2": repr(self.log2_product),
            "hoeffding_product_log2": repr(self.log2_hoeffding_product),
            "valid": int(self.valid),
            "valid_hoeffding": int(self.valid_hoeffding),
            "min_valid_k": "none" if self.min_valid_k is None else self.min_valid_k,
        }
        return "CERT\n" + "".join(f"{k} = {v}\n" for k, v in rows.items()) + "END\n"


def _certificate_core(n, k, s, delta):
    count = count_circuits_bound(n, s)
    thr = inapprox_threshold(k, delta)
    tail = chernoff_tail(1 << k, thr)
    return count, thr, tail


def _is_valid(n, k, s, delta):
    count, _, tail = _certificate_core(n, k, s, delta)
    return _log2_int(count) + tail.log2 < 0


def min_valid_k(n, s, delta, start=1):
    """Smallest k in [start, n] with a valid certificate, or None."""
    for k in range(max(start, 1), n + 1):
        if _is_valid(n, k, s, delta):
            return k
    return None


def existence_certificate(n, k, s, delta):
    if not 1 <= k <= n:
        raise BadInputError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not 0 <= delta <= 1:
        raise BadInputError("delta must lie in [0, 1]")
    count, thr, tail = _certificate_core(n, k, s, delta)
    log2_count = _log2_int(count)
    hoeff = log2_count + hoeffding_log2(1 << k, thr)
    return Certificate(n, k, s, float(delta), thr, count, log2_count, tail, hoeff, min_valid_k(n, s, delta))


def parse_certificate(text):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "CERT" or lines[-1] != "END":
        raise BadInputError("certificate block must be delimited by CERT and END")
    out = {}
    for ln in lines[1:-1]:
        key, sep, value = ln.partition("=")
        if not sep:
            raise BadInputError(f"malformed certificate line {ln!r}")
        out[key.strip()] = value.strip()
    return out


def check_certificate_text(text):
    """Recompute a certificate from its parameters and compare every field."""
    fields = parse_certificate(text)
    try:
        cert = existence_certificate(int(fields["n"]), int(fields["k"]), int(fields["s"]), float(fields["delta"]))
    except KeyError as exc:
        raise BadInputError(f"certificate lacks field {exc}") from exc
    return cert.to_text() == text, cert


def default_junta_k(s):
    """ceil(log2(8 s log2 s)): the smallest k the sampler considers."""
    if s < 2:
        return 1
    return max(1, math.ceil(math.log2(8 * s * math.log2(s))))


def sample_hard_junta(n, s, delta, rng, k=None, require_valid=True):
    """A random k-junta on n bits with its certificate.

    k defaults to the least k >= ceil(log2(8 s log2 s)) whose certificate is valid.
    """
    if k is None:
        k = min_valid_k(n, s, delta, start=default_junta_k(s))
        if k is None:
            raise BadInputError(f"no k <= n={n} gives a valid certificate for s={s}, delta={delta}")
    cert = existence_certificate(n, k, s, delta)
    if require_valid and not cert.valid:
        raise BadInputError(f"certificate for k={k} is not valid (log2 product {cert.log2_product:.1f})")
    g = tt_random(k, rng)
    return junta_embed(g, n), g, cert


# ------------------------------------------------------- exhaustive enumeration

def _guard(n, max_gates):
    if n < 1:
        raise ArityError("need n >= 1")
    if not any(n <= a and max_gates <= b for a, b in config.MINSIZE_LIMITS):
        raise ScaleGuardError(
            f"enumeration with n={n}, max_gates={max_gates} exceeds the guard {config.MINSIZE_LIMITS}"
        )


# new gate on tables a, b, one per class of 2-input functions modulo output negation
_PAIR_OPS = (
    (AND, lambda a, b, full: a & b),
    (LANDNR, lambda a, b, full: a & ~b & full),
    (NLANDR, lambda a, b, full: ~a & b & full),
    (OR, lambda a, b, full: a | b),
    (XOR, lambda a, b, full: a ^ b),
)


def literal_tables(n):
    """Table of x_j as an int whose bit i is x_j at index i."""
    size = 1 << n
    out = []
    for j in range(1, n + 1):
        shift = n - j
        out.append(sum(1 << i for i in range(size) if (i >> shift) & 1))
    return out


@dataclass
class MinSizeTable:
    n: int
    max_gates: int
    sizes: dict          # table int -> minimum gate count
    _recipes: dict       # table int -> (gates, negate_output)

    def reachable(self, s):
        return np.array(sorted(t for t, c in self.sizes.items() if c <= s), dtype=np.uint64)

    def witness(self, table):
        """A circuit of minimum size computing ``table``."""
        gates, negate, out = self._recipes[table]
        ops = [g[0] for g in gates]
        left = [g[1] for g in gates]
        right = [g[2] for g in gates]
        if negate:
            ops[-1] = 15 - ops[-1]
        return Circuit(self.n, ops, left, right, out)

    def counts_by_size(self):
        hist = {}
        for c in self.sizes.values():
            hist[c] = hist.get(c, 0) + 1
        return dict(sorted(hist.items()))

    def to_text(self):
        lines = [f"MINSIZE n={self.n} max_gates={self.max_gates}"]
        digits = max(1, (1 << self.n) // 4)
        for t in sorted(self.sizes):
            tt = TruthTable.from_int(self.n, t)
            lines.append(f"{tt.to_hex():0>{digits}} {self.sizes[t]}")
        return "\n".join(lines) + "\n"


def parse_minsize(text):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "MINSIZE":
        raise BadInputError("file must start with 'MINSIZE'")
    fields = dict(p.split("=") for p in head[1:])
    n, max_gates = int(fields["n"]), int(fields["max_gates"])
    out = {}
    for ln in lines[1:]:
        hexs, size = ln.split()
        out[TruthTable.from_hex(n, hexs).to_int()] = int(size)
    return n, max_gates, out


@lru_cache(maxsize=8)
def min_size_table(n, max_gates):
    """Minimum gate count of every function computable with at most ``max_gates`` gates.

    Search over sets of gate functions taken modulo negation (a negated gate
    output can be absorbed by its readers or by flipping the gate), deduplicated
    by the set of tables.  The last level only records new tables.
    """
    _guard(n, max_gates)
    full = (1 << (1 << n)) - 1
    lits = literal_tables(n)
    sizes = {0: 0, full: 0}
    recipes = {0: ((), False, 0), full: ((), False, 1)}
    for j, t in enumerate(lits, start=1):
        sizes[t] = 0
        recipes[t] = ((), False, input_ref(j))
    if max_gates >= 1:
        for j, t in enumerate(lits, start=1):
            neg = full ^ t
            if neg not in sizes:
                sizes[neg] = 1
                r = input_ref(j)
                recipes[neg] = (((NLEFT, r, r),), False, n + 2)

    def canon(t):
        return t ^ full if t & 1 else t

    # a state: (tables computed by its gates, gate list); refs of gate i = n + 2 + i
    level = [((), ())]
    seen = {frozenset()}
    base = [(t, input_ref(j)) for j, t in enumerate(lits, start=1)]
    for size in range(1, max_gates + 1):
        nxt = []
        last = size == max_gates
        for tables, gates in level:
            avail = base + [(t, n + 2 + i) for i, t in enumerate(tables)]
            present = {canon(t) for t, _ in avail}
            out_ref = n + 2 + len(tables)
            for (a, ra), (b, rb) in itertools.combinations(avail, 2):
                for op, fn in _PAIR_OPS:
                    t = fn(a, b, full)
                    c = canon(t)
                    if c == 0 or c in present:
                        continue
                    new_gates = gates + ((op, ra, rb),)
                    for pol, negate in ((t, False), (t ^ full, True)):
                        if pol not in sizes:
                            sizes[pol] = size
                            recipes[pol] = (new_gates, negate, out_ref)
                    if not last:
                        key = frozenset(canon(x) for x in tables) | {c}
                        if key not in seen:
                            seen.add(key)
                            nxt.append((tables + (t,), new_gates))
        level = nxt
    return MinSizeTable(n, max_gates, sizes, recipes)


def max_agreement(f, s):
    """Largest number of inputs on which some circuit of at most s gates agrees with f."""
    table = min_size_table(f.n, s)
    reach = table.reachable(s)
    target = np.uint64(f.to_int())
    disagree = np.bitwise_count(reach ^ target)
    return (1 << f.n) - int(disagree.min())


def verify_inapprox_bruteforce(f, s, delta):
    """True iff every circuit with at most s gates agrees with f on fewer than (1 - delta) 2^n inputs."""
    if f.n > 4 or s > 4:
        raise ScaleGuardError("brute-force verification is limited to n <= 4 and s <= 4")
    return max_agreement(f, s) < inapprox_threshold(f.n, delta)


# -------------------------------------------------------------- junta oracle

def best_junta_correlation(f, k, H=None):
    """Best correlation of any k-junta with f under H, by exhaustion over variable sets.

    For a fixed variable set the optimum outputs, on each projected class, the
    value carrying more H-weight.  Returns (subset of 1-based variables, correlation).
    """
    n = f.n
    if n > 16:
        raise ScaleGuardError("junta search is limited to n <= 16")
    if not 0 <= k <= n:
        raise BadInputError(f"k must be in [0, {n}]")
    w = np.full(1 << n, 1.0 / (1 << n)) if H is None else H.weights
    signed = (w * (1.0 - 2.0 * f.bits)).reshape((2,) * n)
    best, best_set = -1.0, ()
    for subset in itertools.combinations(range(1, n + 1), k):
        other = tuple(j for j in range(n) if j + 1 not in subset)
        corr = math.fsum(np.abs(signed.sum(axis=other)).ravel()) if other else math.fsum(np.abs(signed).ravel())
        if corr > best:
            best, best_set = corr, subset
    return best_set, best


def dump_certificate(cert, path):
    Path(path).write_text(cert.to_text())
