"""Command-line interface.

Exit codes: 0 success, 2 bad input, 3 construction or check missed its target,
4 instance beyond an enumeration guard.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config, harness
from .approx import build_approximator
from .circuit import truth_table
from .corefn import dump_tt, junta_embed, load_tt, tt_random
from .errors import CircApproxError, TargetMissedError
from .hardness import (
    check_certificate_text,
    min_size_table,
    parse_minsize,
    sample_hard_junta,
)
from .kwise import (
    ANTICONC_PROB,
    SIGMA_WIDTH,
    LinearGenerator,
    QuadGenerator,
    anticoncentration_check,
    dump_spec,
    linear_gen_build,
    verify_kwise,
)


def _out_dir(args, default):
    return Path(args.out if args.out else default)


def _report_checks(checks):
    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}")
        ok &= bool(passed)
    if not ok:
        raise TargetMissedError("self-check failed")
    return 0


def cmd_gen_hard(args):
    out = _out_dir(args, "hard")
    if args.check:
        text = (out / "cert.txt").read_text()
        same, cert = check_certificate_text(text)
        f, g = load_tt(out / "f.tt"), load_tt(out / "core.tt")
        return _report_checks([("certificate recomputes", same), ("f is the embedded core", f == junta_embed(g, f.n))])
    rng = np.random.default_rng(args.rng)
    f, g, cert = sample_hard_junta(args.n, args.s, args.delta, rng, k=args.k)
    out.mkdir(parents=True, exist_ok=True)
    dump_tt(f, out / "f.tt")
    dump_tt(g, out / "core.tt")
    (out / "cert.txt").write_text(cert.to_text())
    print(f"k = {g.n}")
    print(f"certificate_valid = {int(cert.valid)}")
    print(f"product_log2 = {cert.log2_product:.3f}")
    return 0


def cmd_approximate(args):
    out = _out_dir(args, "approx")
    if args.check:
        return _report_checks(harness.check_approximation(out))
    rng = np.random.default_rng(args.rng)
    f = load_tt(args.tt) if args.tt else tt_random(args.n, rng)
    H = harness.make_distribution(args.dist, f, args.gamma, rng, args.ell)
    gen = harness.make_generator(args.gen, f.n, rng)
    rep = build_approximator(f, H, args.gamma, gen=gen, budget=args.budget, rng=rng, ell=args.ell,
                             threads=args.threads)
    harness.write_approximation(out, f, rep, H, args.dist if args.dist in harness.DIST_KINDS else "file")
    sys.stdout.write(rep.to_text())
    return 0


def cmd_verify_kwise(args):
    rng = np.random.default_rng(args.rng)
    if args.gen == "quad":
        gen = QuadGenerator(args.k)
        positions = None
        samples = None if gen.num_seeds <= (1 << 24) else args.budget
    else:
        spec = linear_gen_build(args.n, rng, max_restarts=config.LINEAR_MAX_RESTARTS)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            dump_spec(spec, Path(args.out) / "generator.txt")
        gen = LinearGenerator(spec)
        positions = [tuple(sorted(int(p) for p in rng.choice(gen.length, 4, replace=False)))
                     for _ in range(args.quads)]
        samples = args.budget
    rep = verify_kwise(gen, 4, positions=positions, samples=samples, rng=rng)
    verdict = "EXACT UNIFORM" if rep.mode == "exhaustive" else f"WITHIN {SIGMA_WIDTH:g} SIGMA"
    for r in rep.results:
        print(" ".join(map(str, r.positions)) + ": " + (verdict if r.ok else "NOT UNIFORM"))
    print(f"mode = {rep.mode}, seeds = {rep.seeds}, sets = {len(rep.results)}, failures = {len(rep.failures())}")
    if not rep.all_ok:
        raise TargetMissedError("uniformity check failed")
    return 0


def cmd_anticoncentration(args):
    rng = np.random.default_rng(args.rng)
    gen = QuadGenerator(args.k)
    samples = None if gen.num_seeds <= (1 << 24) else args.budget
    worst = 1.0
    for i, v in enumerate(harness.anticoncentration_vectors(gen.length, args.vectors, rng)):
        frac = anticoncentration_check(gen, v, samples=samples, rng=rng)
        worst = min(worst, frac)
        print(f"vector {i}: fraction = {frac:.6f}")
    print(f"min fraction = {worst:.6f} (floor {ANTICONC_PROB:.6f})")
    if worst < ANTICONC_PROB:
        raise TargetMissedError("anticoncentration floor violated")
    return 0


def cmd_enumerate(args):
    if args.check:
        n, max_gates, sizes = parse_minsize(Path(args.out).read_text())
        table = min_size_table(n, max_gates)
        checks = [("sizes recompute", table.sizes == sizes)]
        checks.append(("witnesses evaluate to their tables",
                       all(truth_table(table.witness(t)).to_int() == t for t in sizes)))
        return _report_checks(checks)
    table = min_size_table(args.n, args.s)
    if args.out:
        Path(args.out).write_text(table.to_text())
    for size, count in table.counts_by_size().items():
        print(f"size {size}: {count} functions")
    return 0


def cmd_demo_tightness(args):
    out = _out_dir(args, "demo")
    if args.check:
        return _report_checks(harness.check_demo(out))
    res = harness.run_demo(n=args.n, gamma=args.gamma, delta=args.delta, s=args.s, k=args.k, gen=args.gen,
                           dist=args.dist, budget=args.budget, rng=args.rng, ell=args.ell, threads=args.threads)
    harness.write_demo(out, res)
    sys.stdout.write(res.to_text())
    return 0


def cmd_size_sweep(args):
    ns = [int(x) for x in args.ns.split(",")]
    gammas = [float(x) for x in args.gammas.split(",")]
    rows = harness.size_sweep(ns, gammas, budget=args.budget, rng=args.rng, threads=args.threads,
                              clamped_gamma=args.clamped_gamma)
    text = harness.format_sweep(rows)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def _common(p, **defaults):
    p.add_argument("--n", type=int, default=defaults.get("n", config.DEMO_N))
    p.add_argument("--k", type=int, default=defaults.get("k"))
    p.add_argument("--s", type=int, default=defaults.get("s", config.DEMO_S))
    p.add_argument("--gamma", type=float, default=config.DEMO_GAMMA)
    p.add_argument("--delta", type=float, default=config.DEMO_DELTA)
    p.add_argument("--ell", type=int, default=None, help="override the subcube depth")
    p.add_argument("--gen", choices=("quad", "linear"), default="quad")
    p.add_argument("--budget", type=int, default=defaults.get("budget", config.DEFAULT_BUDGET))
    p.add_argument("--rng", type=int, default=config.DEMO_RNG)
    p.add_argument("--dist", default="uniform", help="uniform, smooth, adversarial or a DIST file")
    p.add_argument("--out", default=None)
    p.add_argument("--check", action="store_true", help="recompute every claim from the files in --out")
    p.add_argument("--threads", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="circapprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-hard", help="sample a certified hard random junta")
    _common(p)
    p.set_defaults(func=cmd_gen_hard)

    p = sub.add_parser("approximate", help="build a correlating circuit for a function")
    _common(p)
    p.add_argument("--tt", default=None, help="TT file (random function on --n bits if omitted)")
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("verify-kwise", help="test 4-wise uniformity of a generator")
    _common(p, k=2, n=6, budget=200_000)
    p.add_argument("--quads", type=int, default=50, help="position sets tested for the code-based generator")
    p.set_defaults(func=cmd_verify_kwise)

    p = sub.add_parser("anticoncentration", help="fourth-moment anticoncentration over all seeds")
    _common(p, k=4, budget=200_000)
    p.add_argument("--vectors", type=int, default=20)
    p.set_defaults(func=cmd_anticoncentration)

    p = sub.add_parser("enumerate", help="exact minimum circuit sizes by exhaustion")
    _common(p, n=4, s=4)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("demo-tightness", help="hard junta plus correlating circuit, end to end")
    _common(p)
    p.set_defaults(func=cmd_demo_tightness)

    p = sub.add_parser("size-sweep", help="measured gate counts against the reference column")
    _common(p, budget=8)
    p.add_argument("--ns", default=",".join(map(str, config.SWEEP_NS)))
    p.add_argument("--gammas", default=",".join(map(str, config.SWEEP_GAMMAS)))
    p.add_argument("--clamped-gamma", type=float, default=None)
    p.set_defaults(func=cmd_size_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CircApproxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
