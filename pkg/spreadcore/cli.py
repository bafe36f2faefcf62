"""Command-line front end of spreadcore."""
import argparse
import asyncio
import logging
import sys

from .codes import codes
from .const import DEFAULT_JOBS, OUTPUT_DIR, __version__
from .exceptions import InvalidInvocation, NotFoundBelowCap, SpreadcoreException
from .habitat import describe, load_config
from .output import (
    OutputDirectory,
    plot_front,
    write_level_tracks,
    write_orbits,
    write_report,
    write_speed_samples,
    write_sweep,
    write_text,
    write_trajectory,
)
from .sessions import EFFECTIVE_COEFFICIENTS, session, sweep
from .spectral import principal_eigenfunction_course
from .util import exit_code_for, format_value

log = logging.getLogger(__package__)

_VERBOSITY = (logging.WARNING, logging.INFO, logging.DEBUG)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInvocation(f"{self.prog}: {message}")


def _direction(text):
    if text.strip() not in ("+1", "1", "-1"):
        raise argparse.ArgumentTypeError(f"direction must be +1 or -1, not {text}")
    return int(text)


def _values(text):
    try:
        return [float(value) for value in text.split(",") if value.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list: {text}")


def _read_config(path):
    try:
        with open(path) as stream:
            return stream.read()
    except OSError as exc:
        raise InvalidInvocation(f"cannot read config {path}: {exc.strerror}")


def _overrides(args):
    overrides = list(args.override)
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    return overrides


def _summary(rows):
    for key, value in rows:
        print(f"{key}: {format_value(value)}")


def cmd_check(args, config):
    """Check every hypothesis of the habitat."""
    with OutputDirectory(args.out, args.force) as out:
        with session(config, args.jobs) as current:
            report = current.check()
        write_report(out.path("check.csv"), "check", report.rows())
    _summary(report.rows())
    return codes["pass"] if report.passed else codes["hypothesis_failure"]


def cmd_steady(args, config):
    """Write the single-species periodic orbits."""
    with OutputDirectory(args.out, args.force) as out:
        with session(config, args.jobs) as current:
            orbits = current.steady()
        write_orbits(out.path("orbits.csv"), config.habitat, orbits)
        rows = []
        for species, orbit in sorted(orbits.items()):
            rows.extend(
                [
                    (f"species{species}_max", float(orbit.values.max())),
                    (f"species{species}_min", float(orbit.values.min())),
                    (f"species{species}_drift", orbit.drift),
                    (f"species{species}_periods", orbit.periods),
                ]
            )
        write_report(out.path("steady.csv"), "steady", rows)
    _summary(rows)
    return codes["ok"]


def cmd_lambda(args, config):
    """Compute one principal spectrum point and its eigenfunction."""
    with OutputDirectory(args.out, args.force) as out:
        with session(config, args.jobs) as current:
            result = current.principal_point(args.xi, args.mu, args.coefficient)
        rows = [
            ("coefficient", args.coefficient),
            ("xi", args.xi),
            ("mu", args.mu),
            ("lambda", result.lam),
            ("iterations", result.iterations),
            ("residual", result.residual),
        ]
        write_report(out.path("lambda.csv"), "lambda", rows)
        course = principal_eigenfunction_course(result)
        write_orbits(out.path("eigenfunction.csv"), config.habitat, {0: course})
    _summary(rows)
    return codes["ok"]


def cmd_speed(args, config):
    """Compute the linear speed and the super-solution bound."""
    with OutputDirectory(args.out, args.force) as out:
        with session(config, args.jobs) as current:
            result = current.speed(args.xi)
            rows = [
                ("xi", args.xi),
                ("c_bar_inf", result.c_star),
                ("mu_star", result.mu_star),
                ("bracket_low", result.bracket[0]),
                ("bracket_high", result.bracket[1]),
            ]
            try:
                rows.append(("c0", current.supersolution_bound(args.xi)))
            except NotFoundBelowCap as exc:
                rows.append(("error_c0", str(exc)))
        write_speed_samples(out.path("speed.csv"), result)
        write_report(out.path("speed_summary.csv"), "speed-summary", rows)
    print(
        f"c_bar_inf(xi={args.xi:+d}) = {result.c_star!r}"
        f" at mu* = {result.mu_star!r}"
    )
    return codes["ok"]


def cmd_front(args, config):
    """Simulate a front and estimate the spreading speed interval."""
    with OutputDirectory(args.out, args.force) as out:
        with session(config, args.jobs) as current:
            run = current.front(args.xi, args.t_end)
            rows = current.trajectory_rows(run)
            write_trajectory(out.path("trajectory.csv"), rows)
        write_level_tracks(out.path("levels.csv"), run.tracks)
        write_report(out.path("front.csv"), "front", run.rows())
        plot_front(out.path("front.svg"), run.tracks, run.speed.c_star)
    _summary(run.rows())
    return codes["operational_error"] if run.errors else codes["ok"]


def cmd_determinacy(args, config):
    """Report the linear determinacy verdict."""
    with OutputDirectory(args.out, args.force) as out:
        with session(config, args.jobs) as current:
            report = current.determinacy(args.xi)
        write_report(out.path("determinacy.csv"), "determinacy", report.rows())
        write_text(out.path("determinacy.txt"), report.to_text())
    print(report.to_text(), end="")
    if report.verdict == "determinate":
        return codes["determinate"]
    return codes["verdict_failure"]


def cmd_sweep(args, config):
    """Compute the linear speed and verdict over parameter values."""
    with OutputDirectory(args.out, args.force) as out:
        rows = asyncio.run(
            sweep(
                args.config_text,
                args.parameter,
                args.values,
                jobs=args.jobs,
                overrides=_overrides(args),
                xi=args.xi,
            )
        )
        write_sweep(out.path("sweep.csv"), rows)
    for row in rows:
        print(",".join(format_value(value) for value in row))
    if any(row[-1] for row in rows):
        return codes["operational_error"]
    return codes["ok"]


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="habitat config file")
    common.add_argument(
        "--out", default=OUTPUT_DIR, help=f"output directory (default {OUTPUT_DIR})"
    )
    common.add_argument(
        "--xi", type=_direction, default=1, help="direction, +1 or -1 (default +1)"
    )
    common.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="config override, section.key=value or a parameter name",
    )
    common.add_argument("--jobs", type=int, default=DEFAULT_JOBS, help="workers")
    common.add_argument("--seed", type=int, help="seed of sampled checks")
    common.add_argument(
        "--force", action="store_true", help="replace an existing output directory"
    )
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging"
    )

    parser = _ArgumentParser(
        prog="spreadcore",
        description="Spreading speeds of periodic nonlocal competition systems.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)
    for name, function in (
        ("check", cmd_check),
        ("steady", cmd_steady),
        ("speed", cmd_speed),
        ("determinacy", cmd_determinacy),
    ):
        sub = commands.add_parser(name, parents=[common], help=function.__doc__)
        sub.set_defaults(function=function)

    sub = commands.add_parser("lambda", parents=[common], help=cmd_lambda.__doc__)
    sub.add_argument("--mu", type=float, required=True, help="exponential decay")
    sub.add_argument(
        "--coefficient",
        default="a1",
        help=f"one of {', '.join(EFFECTIVE_COEFFICIENTS)} or an expression",
    )
    sub.set_defaults(function=cmd_lambda)

    sub = commands.add_parser("front", parents=[common], help=cmd_front.__doc__)
    sub.add_argument("--t-end", type=float, help="run length (default from config)")
    sub.set_defaults(function=cmd_front)

    sub = commands.add_parser("sweep", parents=[common], help=cmd_sweep.__doc__)
    sub.add_argument("--parameter", required=True, help="parameter to vary")
    sub.add_argument(
        "--values", type=_values, required=True, help="comma-separated values"
    )
    sub.set_defaults(function=cmd_sweep)
    return parser


def main(argv=None):
    """Run the command line and return its exit code."""
    try:
        args = _build_parser().parse_args(argv)
    except InvalidInvocation as exc:
        print(f"spreadcore: error: {exc}", file=sys.stderr)
        return codes["usage_error"]
    logging.basicConfig(
        level=_VERBOSITY[min(args.verbose, len(_VERBOSITY) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.config_text = _read_config(args.config)
        config = load_config(args.config_text, _overrides(args))
        log.info(f"Habitat: {describe(config.habitat)}")
        return args.function(args, config)
    except SpreadcoreException as exc:
        print(f"spreadcore: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)


def main_entry():
    """Exit with the status of :func:`main`."""
    sys.exit(main())
