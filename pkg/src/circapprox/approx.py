"""Small circuits with correlation gamma to an arbitrary f over an arbitrary distribution.

Split the cube into subcubes c x {0,1}^ell.  For a generator seed s, let
T_c be the H-weighted correlation of f with G(s) inside subcube c.  The circuit
outputs h(c) XOR G(s)_x, where h(c) = [T_c < 0] flips the generator wherever it
anti-correlates; the overall correlation is then sum_c H'(c) |T_c|.  A 4-wise
uniform generator makes |T_c| large on a constant fraction of subcubes for some
seed, and h is a function of only n - ell bits.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config
from .circuit import (
    build_junta_table,
    build_linear_gen_circuit,
    build_quad_gen_circuit,
    lift_prefix,
    truth_table,
    xor_compose,
    Circuit,
)
from .corefn import TruthTable, agreement, approx_params, uniform, uniform_on
from .errors import ArityError, BadInputError, TargetMissedError
from .kwise import LinearGenerator, QuadGenerator


@dataclass
class SubcubeStats:
    ell: int
    signed: np.ndarray      # S_c = sum_y H(c o y) (-1)^{f + G}
    mass: np.ndarray        # H'(c)
    sq: np.ndarray          # sum_y H(c o y)^2
    indicator: np.ndarray   # |T_c| >= sqrt(sum_y H_c(y)^2 / 3)

    @property
    def T(self):
        """Per-subcube correlation T_c; 0 on empty subcubes."""
        out = np.zeros_like(self.signed)
        np.divide(self.signed, self.mass, out=out, where=self.mass > 0)
        return out

    @property
    def good_fraction(self):
        return math.fsum(self.mass[self.indicator])

    @property
    def correlation(self):
        """E_{c ~ H'} |T_c|, the correlation reached by the sign-corrected circuit."""
        return math.fsum(np.abs(self.signed))

    @property
    def agreement(self):
        return 0.5 + 0.5 * self.correlation


def default_generator(n):
    return QuadGenerator(n)


def _check(f, H, gen):
    if f.n != H.n:
        raise ArityError(f"f has arity {f.n} but H has arity {H.n}")
    if gen.length != 1 << f.n:
        raise ArityError(f"generator emits {gen.length} bits, need {1 << f.n}")


def _stats_from_output(f, H, ell, G):
    sign = 1.0 - 2.0 * (f.bits ^ G)
    W = H.weights.reshape(-1, 1 << ell)
    signed = (W * sign.reshape(W.shape)).sum(axis=1)
    mass = W.sum(axis=1)
    sq = (W * W).sum(axis=1)
    # |S_c| / m_c >= sqrt(sq / (3 m_c^2))  <=>  3 S_c^2 >= sq  (for m_c > 0)
    indicator = (mass > 0) & (3.0 * signed * signed >= sq)
    return SubcubeStats(ell, signed, mass, sq, indicator)


def subcube_stats(f, H, ell, gen, seed):
    _check(f, H, gen)
    if not 0 <= ell < f.n:
        raise BadInputError(f"ell must be in [0, {f.n - 1}]")
    return _stats_from_output(f, H, ell, gen.output(seed))


def candidate_seeds(gen, budget, rng):
    """``budget`` distinct seeds in increasing order; all of them if the space is that small."""
    if budget < 1:
        raise BadInputError("seed budget must be at least 1")
    if budget >= gen.num_seeds:
        return [int(s) for s in gen.all_seeds()]
    return sorted(set(int(s) for s in gen.sample_seeds(rng, budget)))


def select_seed(f, H, ell, gen, budget, rng, threads=1):
    """Seed maximising the correlation sum_c |S_c| (ties go to the smaller seed).

    Returns (seed, stats, number of seeds tried).
    """
    _check(f, H, gen)
    seeds = candidate_seeds(gen, budget, rng)

    if hasattr(gen, "block_sums"):
        fb = np.ascontiguousarray(f.bits.view(np.uint8))
        w = np.ascontiguousarray(H.weights)

        def score(s):
            return float(np.abs(gen.block_sums(fb, w, s, ell)).sum())
    else:
        def score(s):
            return float(np.abs(_stats_from_output(f, H, ell, gen.output(s)).signed).sum())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(score, seeds))
    else:
        scores = [score(s) for s in seeds]
    best = max(range(len(seeds)), key=lambda i: (scores[i], -seeds[i]))
    seed = seeds[best]
    return seed, subcube_stats(f, H, ell, gen, seed), len(seeds)


def mean_good_fraction(f, H, ell, gen, chunk=1 << 12):
    """Average of ``good_fraction`` over every seed of ``gen``."""
    _check(f, H, gen)
    if not 0 <= ell < f.n:
        raise BadInputError(f"ell must be in [0, {f.n - 1}]")
    seeds = gen.all_seeds()
    positions = np.arange(gen.length)
    W = H.weights.reshape(-1, 1 << ell)
    mass = W.sum(axis=1)
    sq = (W * W).sum(axis=1)
    fb = f.bits.astype(np.uint8)
    total = 0.0
    for start in range(0, len(seeds), chunk):
        G = gen.output_matrix(seeds[start:start + chunk], positions)
        sign = 1.0 - 2.0 * (G ^ fb[None, :])
        signed = (sign * H.weights[None, :]).reshape(len(G), -1, 1 << ell).sum(axis=2)
        good = (mass > 0)[None, :] & (3.0 * signed * signed >= sq[None, :])
        total += float((good * mass[None, :]).sum())
    return total / len(seeds)


def build_h(f, H, ell, gen, seed):
    """h(c) = 1 iff T_c < 0; empty and balanced subcubes give 0."""
    stats = subcube_stats(f, H, ell, gen, seed)
    return TruthTable(f.n - ell, stats.signed < 0)


def generator_circuit(gen, seed):
    if isinstance(gen, QuadGenerator):
        return build_quad_gen_circuit(gen.spec(seed))
    if isinstance(gen, LinearGenerator):
        return build_linear_gen_circuit(gen.spec, seed)
    raise BadInputError(f"no circuit builder for {gen!r}")


def table_term(gamma, n):
    """gamma^2 2^n / log2(gamma^2 2^n); 0 where the log is not positive."""
    v = gamma * gamma * 2.0 ** n
    return v / math.log2(v) if v > 2 else 0.0


@dataclass
class SizeReport:
    measured_gates: int
    h_gates: int
    generator_gates: int
    table_term: float
    generator_term: float
    lift_term: float = 0.0
    coeff_a: float = config.SIZE_A
    coeff_b: float = config.SIZE_B

    @property
    def bound(self):
        return self.coeff_a * self.table_term + self.coeff_b * self.generator_term

    @property
    def within_bound(self):
        return self.measured_gates <= self.bound


def size_report(circ, h_gates, gen_gates, gamma, n):
    return SizeReport(circ.size, h_gates, gen_gates, table_term(gamma, n), float(n * n))


@dataclass
class ApproxReport:
    gamma: float
    ell: int
    clamped: bool
    chosen_seed: int | None
    seeds_tried: int
    good_fraction: float
    achieved_agreement: float
    circuit: Circuit = field(repr=False)
    sizes: SizeReport
    generator: str = "quad"

    def to_text(self):
        rows = {
            "gamma": repr(self.gamma),
            "ell": self.ell,
            "clamped": int(self.clamped),
            "generator": self.generator,
            "chosen_seed": "none" if self.chosen_seed is None else f"{self.chosen_seed:x}",
            "seeds_tried": self.seeds_tried,
            "good_fraction": repr(self.good_fraction),
            "achieved_agreement": repr(self.achieved_agreement),
            "target_agreement": repr(0.5 + self.gamma),
            "n": self.circuit.n,
            "measured_gates": self.sizes.measured_gates,
            "h_gates": self.sizes.h_gates,
            "generator_gates": self.sizes.generator_gates,
            "table_term": repr(self.sizes.table_term),
            "generator_term": repr(self.sizes.generator_term),
            "lift_term": repr(self.sizes.lift_term),
            "coeff_a": repr(self.sizes.coeff_a),
            "coeff_b": repr(self.sizes.coeff_b),
            "size_bound": repr(self.sizes.bound),
        }
        return "".join(f"{k} = {v}\n" for k, v in rows.items())


def parse_report(text):
    """Flat ``key = value`` block as a dict of strings."""
    out = {}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        key, sep, value = ln.partition("=")
        if not sep:
            raise BadInputError(f"malformed report line {ln!r}")
        out[key.strip()] = value.strip()
    return out


def build_approximator(f, H, gamma, gen=None, budget=config.DEFAULT_BUDGET, rng=None, ell=None,
                       enforce_range=True, max_budget=config.MAX_BUDGET, threads=1):
    """Circuit C with Pr_{x ~ H}[C(x) = f(x)] >= 1/2 + gamma.

    The seed budget doubles on a miss until it passes ``max_budget``.
    """
    if f.n != H.n:
        raise ArityError(f"f has arity {f.n} but H has arity {H.n}")
    params = approx_params(gamma, f.n, ell=ell, enforce_range=enforce_range)
    target = 0.5 + gamma
    if params.ell == 0:
        circ = build_junta_table(f)
        achieved = agreement(f, truth_table(circ), H)
        sizes = size_report(circ, circ.size, 0, gamma, f.n)
        return ApproxReport(gamma, 0, params.clamped, None, 0, 1.0, achieved, circ, sizes, "none")
    gen = default_generator(f.n) if gen is None else gen
    _check(f, H, gen)
    rng = np.random.default_rng(0) if rng is None else rng
    tried = 0
    best = None
    while budget <= max_budget:
        seed, stats, count = select_seed(f, H, params.ell, gen, budget, rng, threads=threads)
        tried += count
        h = TruthTable(f.n - params.ell, stats.signed < 0)
        hc = lift_prefix(build_junta_table(h), f.n)
        gc = generator_circuit(gen, seed)
        circ = xor_compose(hc, gc)
        achieved = agreement(f, truth_table(circ), H)
        report = ApproxReport(gamma, params.ell, params.clamped, seed, tried, stats.good_fraction,
                              achieved, circ, size_report(circ, hc.size, gc.size, gamma, f.n), gen.kind)
        if achieved >= target:
            return report
        if best is None or achieved > best.achieved_agreement:
            best = report
        if budget >= gen.num_seeds:
            break
        budget *= 2
    raise TargetMissedError(
        f"best agreement {best.achieved_agreement:.6f} after {tried} seeds is below {target:.6f}"
    )


# ------------------------------------------------------------------ baselines

def majority_subcube_baseline(f, k):
    """Circuit on the first k bits giving each subcube's majority value (ties to 0)."""
    if not 0 <= k <= f.n:
        raise BadInputError(f"prefix length must be in [0, {f.n}]")
    ones = f.bits.reshape(1 << k, -1).sum(axis=1)
    maj = 2 * ones > (1 << (f.n - k))
    if k == 0:
        return Circuit(f.n, [], [], [], int(maj[0]))
    return lift_prefix(build_junta_table(TruthTable(k, maj)), f.n)


def exact_subcube_baseline(f, gamma):
    """Exact on the prefix-0 subcube of volume >= 2 gamma 2^n, the better constant elsewhere."""
    if not 0 < gamma <= 0.5:
        raise BadInputError("gamma must lie in (0, 1/2]")
    p = min(max(math.floor(math.log2(1.0 / (2.0 * gamma))), 0), f.n)
    block = 1 << (f.n - p)
    rest = f.bits[block:]
    fill = bool(2 * int(rest.sum()) > rest.size)
    bits = np.full(f.bits.size, fill)
    bits[:block] = f.bits[:block]
    return build_junta_table(TruthTable(f.n, bits))


def adversarial_distribution(f, c):
    """Uniform over the points where ``c`` is wrong (uniform everywhere if it never is)."""
    table = c if isinstance(c, TruthTable) else truth_table(c)
    if table.n != f.n:
        raise ArityError(f"arity mismatch: {table.n} vs {f.n}")
    wrong = f.bits ^ table.bits
    return uniform_on(f.n, wrong) if wrong.any() else uniform(f.n)
