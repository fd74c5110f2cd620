"""Command-line entry point: ``demoshape <subcommand> ...``."""
import argparse
import logging
import sys
from pathlib import Path

from . import oracle
from .demos import Quality, make_demo
from .env import GridSpec, optimal_return
from .harness import ExperimentConfig, emit_outputs, plot_curves, read_curve_csv, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p, seed=True):
    if seed:
        p.add_argument("--seed", type=int, help="base seed (run i is seeded from (seed, i))")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--steps", type=int, help="environment steps per run")
    p.add_argument("--eval-interval", type=int, help="environment steps between evaluations")
    p.add_argument("--runs", type=int, help="independent runs per curve")


def build_parser():
    parser = _Parser(prog="demoshape", description="Demonstration-guided shaping on gridworlds.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run the experiment described by a config file")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("sweep", help="sweep one method coefficient")
    p.add_argument("--side", type=int, default=10)
    p.add_argument("--demo", default="worst", choices=[q.name.lower() for q in Quality])
    p.add_argument("--method", default="manhattan", choices=["manhattan", "sbs"])
    p.add_argument("--param", default="c", choices=["c", "sigma"])
    p.add_argument("--values", type=float, nargs="+", default=[1.0, 20.0, 25.0])
    p.add_argument("--no-reference", action="store_true", help="skip the D-Shape reference curve")
    _common(p)

    p = sub.add_parser("ablate", help="full D-Shape against its three ablations")
    p.add_argument("--side", type=int, default=10)
    p.add_argument("--demo", default="optimal", choices=[q.name.lower() for q in Quality])
    _common(p)

    p = sub.add_parser("oracle-check", help="exact invariance certificates on a small grid")
    p.add_argument("--side", type=int, default=5)
    p.add_argument("--demo", default="worst", choices=[q.name.lower() for q in Quality])
    p.add_argument("--horizon", type=int, help="defaults to 4 * side")
    p.add_argument("--manhattan-c", type=float, default=25.0)
    p.add_argument("--details", action="store_true", help="print every certificate with counterexamples")

    p = sub.add_parser("plot", help="plot learning-curve CSVs into one SVG")
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", default="curves.svg")
    p.add_argument("--optimal", type=float, help="draw a horizontal line at this return")

    p = sub.add_parser("demo", help="print a demonstration as 't x y' rows")
    p.add_argument("side", type=int)
    p.add_argument("tier", choices=[q.name.lower() for q in Quality])
    return parser


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "seed", None) is not None:
        out["base_seed"] = args.seed
    if args.steps is not None:
        out["total_steps"] = args.steps
    if args.eval_interval is not None:
        out["eval_interval"] = args.eval_interval
    if args.runs is not None:
        out["n_runs"] = args.runs
    return out


def _run_all(configs, args):
    results = []
    for cfg in configs:
        results += run_experiment(cfg, jobs=args.jobs).values()
    for path in emit_outputs(results, args.out):
        print(path)
    for res in results:
        print(f"{res.name} side={res.side}: final mean {res.curve.mean[-1]:.2f}, "
              f"AUC {res.curve.mean.sum():.1f}, optimal {res.optimal}")


def cmd_run(args):
    base = ExperimentConfig.load(args.config).to_dict()
    base.update(_overrides(args))
    _run_all([ExperimentConfig.from_dict(base)], args)


def cmd_sweep(args):
    common = dict(sides=[args.side], demo_quality=args.demo, **_overrides(args))
    configs = [ExperimentConfig(method=args.method, **{args.param: v}, **common) for v in args.values]
    if not args.no_reference:
        configs.append(ExperimentConfig(method="dshape", **common))
    _run_all(configs, args)


def cmd_ablate(args):
    common = dict(sides=[args.side], demo_quality=args.demo, **_overrides(args))
    configs = [ExperimentConfig(method="dshape", **common)]
    for flags in ((False, True, True), (False, False, True), (False, True, False)):
        configs.append(ExperimentConfig(method="dshape_ablation", relabel=flags[0], shaping=flags[1],
                                        augment=flags[2], **common))
    _run_all(configs, args)


def cmd_oracle(args):
    horizon = args.horizon or oracle.theory_horizon(args.side)
    spec = GridSpec(side=args.side, horizon=horizon)
    demo = make_demo(spec, args.demo)
    groups = [
        ("Theorem 1", [oracle.check_theorem1(spec, demo, k) for k in ("demo", "relabel")]),
        ("Value equivalence", [oracle.check_value_equivalence(spec, demo, k) for k in ("demo", "relabel")]),
        ("PBRS invariance (goal potential)", [oracle.check_policy_invariance(spec, demo, k) for k in ("demo", "relabel")]),
        ("Shaping offset", [oracle.check_shaping_offset(spec, demo, k) for k in ("demo", "relabel")]),
        ("PBRS invariance (similarity potential)", [oracle.check_sbs_invariance(spec, demo)]),
    ]
    mutant = oracle.check_theorem1(spec, demo, "relabel", goal_penalty=1.0)
    manhattan = oracle.check_manhattan(spec, demo, args.manhattan_c)
    print(f"# {args.side}x{args.side} grid, {args.demo} demo, horizon {horizon}")
    ok = True
    for title, certs in groups:
        passed = all(c.passed for c in certs)
        ok &= passed
        print(f"{title}: {'PASS' if passed else 'FAIL'} ({sum(c.n_checked for c in certs)} states)")
    print(f"Goal-dependent reward mutant: {'rejected' if not mutant.passed else 'NOT rejected'} "
          f"({mutant.n_failed} mismatches)")
    print(f"Manhattan c={args.manhattan_c:g}: {manhattan.note}")
    if args.details:
        print()
        print(oracle.report([c for _, certs in groups for c in certs] + [mutant, manhattan]))
    return EXIT_OK if ok and not mutant.passed else EXIT_RUNTIME


def cmd_plot(args):
    named = [(Path(p).stem, read_curve_csv(p)) for p in args.csv]
    plot_curves(named, args.out, args.optimal)
    print(args.out)


def cmd_demo(args):
    spec = GridSpec(side=args.side)
    demo = make_demo(spec, args.tier)
    print(f"# {args.tier} demo on {args.side}x{args.side}, optimal return {optimal_return(spec)}")
    print("t x y")
    for s in demo.states:
        print(s.t, s.x, s.y)


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "ablate": cmd_ablate,
    "oracle-check": cmd_oracle,
    "plot": cmd_plot,
    "demo": cmd_demo,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        code = COMMANDS[args.command](args)
    except (OSError, ValueError, FloatingPointError) as e:
        print(f"demoshape {args.command}: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
