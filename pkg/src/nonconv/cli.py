"""Command line entry point: ``nonconv run|list-presets|validate``."""

from __future__ import annotations

import argparse
import logging
import sys

from nonconv import scenarios


def _cmd_run(args) -> int:
    if (args.config is None) == (args.preset is None):
        print("run: give exactly one of --config or --preset", file=sys.stderr)
        return 2
    if args.preset is not None:
        cfg = scenarios.preset_config(args.preset)
    else:
        cfg = scenarios.load_config(args.config)
    scenario = scenarios.validate(cfg)
    out = args.out_dir if args.out_dir is not None else scenarios.default_out_dir(cfg)
    result = scenarios.run_scenario(scenario, out, figures=not args.no_figures)
    for path in result.files:
        print(path)
    return 0


def _cmd_list(args) -> int:
    presets = scenarios.list_presets()
    width = max(len(n) for n, _ in presets)
    for name, desc in presets:
        print(f"{name:<{width}}  {desc}")
    return 0


def _cmd_validate(args) -> int:
    scenario = scenarios.validate(scenarios.load_config(args.config))
    sys.stdout.write(scenarios.serialize_config(scenario.config))
    g = scenario.grid
    print(f"# grid: [{g.x_left:g}, {g.x_right:g}], {g.n_nodes} nodes; "
          f"stability margin {scenario.stability.margin:.4g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonconv",
        description="Nonlocal convection with a variable horizon.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or a preset")
    run.add_argument("--config", metavar="FILE")
    run.add_argument("--preset", metavar="NAME")
    run.add_argument("--out-dir", metavar="DIR")
    run.add_argument("--no-figures", action="store_true",
                     help="skip the matplotlib PNG renderings")
    run.set_defaults(func=_cmd_run)

    lst = sub.add_parser("list-presets", help="list the preset catalog")
    lst.set_defaults(func=_cmd_list)

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("--config", metavar="FILE", required=True)
    val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except scenarios.ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    except (KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
