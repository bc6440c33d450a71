"""Command-line entry point: run, flow, verify, constants, report."""
import argparse
import json
import sys
from pathlib import Path

from .config import SUITES, ConfigError, load_config
from .runner import Experiment, constants_report, load_report, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="ricci2d", description="2D Ricci flow simulator and inequality checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_config(name, help_text, suite=False):
        sp = sub.add_parser(name, help=help_text)
        if suite:
            sp.add_argument("suite", choices=SUITES)
        sp.add_argument("config", type=Path)
        sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="replace a config entry after the file is read (repeatable)")
        return sp

    with_config("run", "run every suite listed in the config")
    with_config("flow", "integrate the flow and write the trajectory only")
    with_config("verify", "run a single suite", suite=True)
    with_config("constants", "print the constants of the initial metric")
    r = sub.add_parser("report", help="summarize a finished run directory")
    r.add_argument("directory", type=Path)
    return p


def _load(args):
    try:
        text = args.config.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
    overrides = list(args.override)
    if args.command == "verify":
        overrides.append(f"suites={args.suite}")
    return load_config(text, overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            report = load_report(args.directory)
            print("\n".join(report.summary_lines()))
            return report.exit_code
        cfg = _load(args)
        if args.command == "constants":
            print(json.dumps(constants_report(cfg), indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "flow":
            ex = Experiment(cfg)
            traj = ex.trajectory
            print(f"{traj.terminated_reason.value} at t={traj.times[-1]!r} "
                  f"({len(traj.snapshots)} snapshots in {ex.out / 'trajectory'})")
            return EXIT_OK
        report = run(cfg)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print("\n".join(report.summary_lines()))
    return report.exit_code
