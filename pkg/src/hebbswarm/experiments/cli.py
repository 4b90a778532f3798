"""Command-line entry point: ``hebbswarm <subcommand> [options]``.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..plastic_net import load_genotype
from .config import ConfigError, ExperimentConfig, profile_config
from .plots import emit_plots
from .protocols import arch_grid, evolve, flex, perturb_experiment, retest, scale

log = logging.getLogger("hebbswarm")


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1), not argparse's exit 2."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common():
    p = _Parser(add_help=False)
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--profile", choices=["small", "full"], default="full")
    p.add_argument("--parallel", type=int, help="worker processes")
    p.add_argument("--condition", help="controller condition (overrides the config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="hebbswarm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("evolve", parents=[common], help="evolve a controller with CMA-ES")
    ev.add_argument("--no-resume", action="store_true", help="ignore an existing checkpoint")
    for name, helptext in (("retest", "retest a genotype with fresh seeds"),
                           ("perturb", "static vs. moving-light deployment"),
                           ("scale", "retest across swarm sizes"),
                           ("flex", "retest across arena kinds")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--genotype", required=True,
                        help="JSON array or run_report.json holding the genotype")
        if name == "retest":
            sp.add_argument("--repetitions", type=int)
            sp.add_argument("--swarm-size", type=int)
            sp.add_argument("--arena")
    sub.add_parser("arch-grid", parents=[common], help="baseline architecture grid")
    pl = sub.add_parser("plot", parents=[common], help="render CSV outputs as images")
    pl.add_argument("csv", nargs="+")
    pl.add_argument("--format", default="png", choices=["png", "svg"])
    return parser


def resolve_config(args):
    if args.config:
        cfg = ExperimentConfig.load(args.config, profile=args.profile)
    else:
        cfg = profile_config(args.profile)
    overrides = {k: v for k, v in (("seed", args.seed), ("out", args.out),
                                   ("parallel", args.parallel), ("condition", args.condition))
                 if v is not None}
    return ExperimentConfig.from_dict(overrides, base=cfg) if overrides else cfg


def _genotype(args, cfg):
    path = Path(args.genotype)
    data = json.loads(path.read_text())
    if isinstance(data, dict) and "condition" in data and args.condition is None:
        cfg = ExperimentConfig.from_dict({"condition": data["condition"]}, base=cfg)
    return load_genotype(path), cfg


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        if args.command in ("retest", "perturb", "scale", "flex"):
            genotype, cfg = _genotype(args, cfg)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "evolve":
            report = evolve(cfg, out, resume=not args.no_resume)
            print(f"best fitness {report.best_fitness:.4f} after "
                  f"{len(report.generations)} generations -> {out}")
        elif args.command == "retest":
            summary, _ = retest(genotype, cfg, repetitions=args.repetitions,
                                swarm_size=args.swarm_size, arena=args.arena, out_dir=out)
            print(f"retest mean {summary.mean:.4f} +- {summary.std:.4f} "
                  f"(n={len(summary.fitnesses)})")
        elif args.command == "scale":
            for n, s in scale(genotype, cfg, out).items():
                print(f"swarm {n}: {s.mean:.4f} +- {s.std:.4f}")
        elif args.command == "flex":
            for arena, s in flex(genotype, cfg, out).items():
                print(f"{arena}: {s.mean:.4f} +- {s.std:.4f}")
        elif args.command == "perturb":
            res = perturb_experiment(genotype, cfg, out)
            print(f"static fitness {res.static.light.mean() / 255:.4f}, "
                  f"dynamic fitness {res.dynamic.light.mean() / 255:.4f} -> {out}")
        elif args.command == "arch-grid":
            for (d, w), r in arch_grid(cfg, out).items():
                print(f"depth {d} width {w}: dim {r.genotype_dim} best {r.best_fitness:.4f}")
        elif args.command == "plot":
            for path in emit_plots(args.csv, out / "plots", fmt=args.format):
                print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
