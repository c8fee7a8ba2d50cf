"""End-to-end pipelines behind the CLI, plus self-checks that recompute claims from files."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config
from .approx import (
    adversarial_distribution,
    build_approximator,
    majority_subcube_baseline,
    parse_report,
)
from .circuit import (
    dump_netlist,
    lift_prefix,
    load_netlist,
    predict_junta_size,
    truth_table,
)
from .corefn import (
    agreement,
    approx_params,
    dump_dist,
    dump_tt,
    junta_embed,
    load_dist,
    load_tt,
    marginal_prefix,
    parse_dist,
    random_smooth_distribution,
    tt_random,
    uniform,
)
from .errors import BadInputError, TargetMissedError
from .hardness import check_certificate_text, dump_certificate, sample_hard_junta
from .kwise import LinearGenerator, QuadGenerator, linear_gen_build

DIST_KINDS = ("uniform", "smooth", "adversarial")
SMOOTH_DELTA = 0.5


def make_generator(kind, n, rng):
    if kind == "quad":
        return QuadGenerator(n)
    if kind == "linear":
        if n > 16:
            raise BadInputError("the code-based generator is limited to n <= 16")
        return LinearGenerator(linear_gen_build(n, rng, max_restarts=config.LINEAR_MAX_RESTARTS,
                                                outputs_factor=config.LINEAR_OUTPUTS_FACTOR,
                                                set_constant=config.LINEAR_SET_CONSTANT,
                                                code_factor=config.LINEAR_CODE_FACTOR))
    raise BadInputError(f"unknown generator {kind!r}; choose quad or linear")


def baseline_prefix(n, gamma, ell=None):
    """Prefix length n - ell used by the majority baseline that the adversary targets."""
    return n - approx_params(gamma, n, ell=ell, enforce_range=False).ell


def as_written(H):
    """H exactly as it reads back from its DIST file."""
    return parse_dist(dump_dist(H))


def make_distribution(spec, f, gamma, rng, ell=None):
    """``uniform``, ``smooth``, ``adversarial`` or a DIST file path."""
    if spec == "uniform":
        return uniform(f.n)
    if spec == "smooth":
        return as_written(random_smooth_distribution(f.n, SMOOTH_DELTA, rng))
    if spec == "adversarial":
        base = majority_subcube_baseline(f, baseline_prefix(f.n, gamma, ell))
        return as_written(adversarial_distribution(f, base))
    H = load_dist(spec)
    if H.n != f.n:
        raise BadInputError(f"distribution has arity {H.n}, function has {f.n}")
    return H


# ------------------------------------------------------------------ approximate

def write_approximation(out, f, report, H=None, dist="uniform"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    dump_tt(f, out / "f.tt")
    dump_netlist(report.circuit, out / "circuit.net")
    text = report.to_text() + f"dist = {dist}\n"
    if H is not None and dist not in ("uniform",):
        dump_dist(H, out / "dist.txt")
        text += "dist_file = dist.txt\n"
    (out / "report.txt").write_text(text)


def check_approximation(out):
    """Recompute the agreement of the stored netlist with the stored f under the stored H."""
    out = Path(out)
    f = load_tt(out / "f.tt")
    circ = load_netlist(out / "circuit.net")
    rep = parse_report((out / "report.txt").read_text())
    H = load_dist(out / rep["dist_file"]) if "dist_file" in rep else uniform(f.n)
    got = agreement(f, truth_table(circ), H)
    checks = [
        ("arity", circ.n == f.n == int(rep["n"])),
        ("gate count", circ.size == int(rep["measured_gates"])),
        ("agreement matches report", repr(got) == rep["achieved_agreement"]),
        ("agreement meets target", got >= 0.5 + float(rep["gamma"])),
    ]
    return checks


# -------------------------------------------------------------------- the demo

@dataclass
class DemoResult:
    f: object
    g: object
    cert: object
    H: object
    dist: str
    report: object
    circuit: object
    agreement: float
    baseline_agreement: float | None = None
    extras: dict = field(default_factory=dict)

    def to_text(self):
        rows = {
            "demo_n": self.f.n, "k": self.g.n, "s": self.cert.s, "delta": repr(self.cert.delta),
            "certificate_valid": int(self.cert.valid),
            "lifted_gates": self.circuit.size,
            "agreement_full": repr(self.agreement),
            "baseline_agreement": "none" if self.baseline_agreement is None else repr(self.baseline_agreement),
        }
        return self.report.to_text() + "".join(f"{k} = {v}\n" for k, v in rows.items()) + f"dist = {self.dist}\n"


def run_demo(n=config.DEMO_N, gamma=config.DEMO_GAMMA, delta=config.DEMO_DELTA, s=config.DEMO_S,
             k=None, gen="quad", dist="uniform", budget=config.DEFAULT_BUDGET, rng=config.DEMO_RNG,
             ell=None, threads=1):
    """Sample a certified hard junta, then approximate it over H through its prefix marginal."""
    rng = np.random.default_rng(rng)
    f, g, cert = sample_hard_junta(n, s, delta, rng, k=k)
    k = g.n
    base_agree = None
    if dist == "adversarial":
        base = lift_prefix(majority_subcube_baseline(g, baseline_prefix(k, gamma, ell)), n)
        H = adversarial_distribution(f, base)
        base_agree = agreement(f, truth_table(base), H)
    else:
        H = make_distribution(dist, f, gamma, rng, ell)
    Hk = marginal_prefix(H, k)
    generator = make_generator(gen, k, rng)
    report = build_approximator(g, Hk, gamma, gen=generator, budget=budget, rng=rng, ell=ell, threads=threads)
    lifted = lift_prefix(report.circuit, n)
    agree = agreement(f, truth_table(lifted), H)
    if agree < 0.5 + gamma:
        raise TargetMissedError(f"lifted agreement {agree:.6f} is below {0.5 + gamma:.6f}")
    return DemoResult(f, g, cert, H, dist, report, lifted, agree, base_agree)


def write_demo(out, res):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    dump_tt(res.f, out / "f.tt")
    dump_tt(res.g, out / "core.tt")
    dump_certificate(res.cert, out / "cert.txt")
    dump_netlist(res.circuit, out / "circuit.net")
    text = res.to_text()
    if res.dist not in ("uniform", "adversarial"):
        dump_dist(res.H, out / "dist.txt")
        text += "dist_file = dist.txt\n"
    (out / "report.txt").write_text(text)


def check_demo(out):
    out = Path(out)
    f = load_tt(out / "f.tt")
    g = load_tt(out / "core.tt")
    circ = load_netlist(out / "circuit.net")
    rep = parse_report((out / "report.txt").read_text())
    cert_ok, cert = check_certificate_text((out / "cert.txt").read_text())
    gamma = float(rep["gamma"])
    if rep["dist"] == "uniform":
        H = uniform(f.n)
    elif rep["dist"] == "adversarial":
        base = lift_prefix(majority_subcube_baseline(g, g.n - int(rep["ell"])), f.n)
        H = adversarial_distribution(f, base)
    else:
        H = load_dist(out / rep["dist_file"])
    got = agreement(f, truth_table(circ), H)
    return [
        ("f is the embedded core", f == junta_embed(g, f.n)),
        ("certificate recomputes", cert_ok),
        ("certificate valid", cert.valid == bool(int(rep["certificate_valid"]))),
        ("gate count", circ.size == int(rep["lifted_gates"])),
        ("agreement matches report", repr(got) == rep["agreement_full"]),
        ("agreement meets target", got >= 0.5 + gamma),
    ]


# ------------------------------------------------------------------ size sweep

@dataclass
class SweepRow:
    n: int
    gamma: float
    ell: int
    clamped: bool
    gates: int
    table_term: float
    bound: float
    agreement: float
    predicted: int | None = None

    @property
    def within(self):
        return self.gates <= self.bound


def size_sweep(ns=config.SWEEP_NS, gammas=config.SWEEP_GAMMAS, budget=8, rng=config.DEMO_RNG,
               threads=1, clamped_gamma=None):
    """Measured approximator sizes over a (n, gamma) grid, uniform H, random f.

    With ``clamped_gamma`` an extra row per n uses a gamma large enough to
    force ell = 0, where the circuit is the exact table of f.
    """
    rng = np.random.default_rng(rng)
    rows = []
    for n in ns:
        f = tt_random(n, rng)
        H = uniform(n)
        extra = [clamped_gamma] if clamped_gamma is not None else []
        for gamma in list(gammas) + extra:
            rep = build_approximator(f, H, gamma, budget=budget, rng=rng, enforce_range=False, threads=threads)
            predicted = predict_junta_size(f) if rep.ell == 0 else None
            rows.append(SweepRow(n, gamma, rep.ell, rep.clamped, rep.circuit.size, rep.sizes.table_term,
                                 rep.sizes.bound, rep.achieved_agreement, predicted))
    return rows


def format_sweep(rows):
    head = "n gamma ell clamped gates table_term bound within agreement predicted"
    lines = [head]
    for r in rows:
        lines.append(
            f"{r.n} {r.gamma:g} {r.ell} {int(r.clamped)} {r.gates} {r.table_term:.4f} {r.bound:.1f} "
            f"{int(r.within)} {r.agreement:.6f} {'-' if r.predicted is None else r.predicted}"
        )
    return "\n".join(lines) + "\n"


def fit_size_constants(rows, b=config.SIZE_B):
    """Smallest A making every row satisfy gates <= A * table_term + b * n^2."""
    need = [(r.gates - b * r.n * r.n) / r.table_term for r in rows if r.ell > 0 and r.table_term > 0]
    return max(need) if need else 0.0


def anticoncentration_vectors(length, count, rng):
    """Gaussian weight vectors used by the anticoncentration check."""
    return [rng.standard_normal(length) for _ in range(count)]

