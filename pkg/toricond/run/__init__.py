"""Default command line entry point for the program."""
import sys
from toricond.util import INSTALLED_FROM_SOURCE
from toricond.run.config import COMMANDS
from toricond.run.cli import (
    EXIT_UNKNOWN_COMMAND,
    entry_point_command,
    entry_point_run,
)


HELP_STR = """usage: toricond SUBCOMMAND [--config PATH] [--seed N] [--trials N]
                         [--threads N] [--out DIR]

Subcommands
  mixed-volume     Mixed volume by quadrature next to the exact oracle
  expect-roots     Expected (real) roots in a region
  condition        Condition bounds at the roots of one system
  nu-lin           Condition tail of random linear systems
  nu-sparse        Condition tail of the roots in a region
  check-thm1       Condition tail of unmixed systems against the ε⁴ bound
  check-thm3       Mean positive real roots against the volume bound
  check-thm5       Sparse tail against the dilated linear tail
  check-thm6       Real tail against expected real roots times the linear tail
  momentum-check   Momentum map and pushforward checks
  run              Run the command named in the config (--config required)

Without --config the builtin example config of the subcommand is used.
"""

if INSTALLED_FROM_SOURCE:
    HELP_STR += """
Developer subcommands
  test             Run integration test suite
  format           Format source code
  docs             Create and view documentation locally
"""


def _collect_entry_points():
    commands_map = {command: entry_point_command(command) for command in COMMANDS}
    commands_map["run"] = entry_point_run
    if INSTALLED_FROM_SOURCE:
        from toricond.util.code import entry_point_tests, entry_point_format
        from toricond.util.docs import entry_point_docs

        commands_map |= {
            "test": entry_point_tests,
            "format": entry_point_format,
            "docs": entry_point_docs,
        }
    return commands_map


def script_entry_point(args=None) -> int:
    """Dispatch the first argument to its subcommand and return the exit code."""
    args = list(sys.argv[1:] if args is None else args)
    if not args or args[0] in ("-h", "--help"):
        print(HELP_STR)
        return 0
    command = args.pop(0)
    entry_points = _collect_entry_points()
    if command not in entry_points:
        print(f'"{command}" is not a valid subcommand.\n\n{HELP_STR}')
        return EXIT_UNKNOWN_COMMAND
    returncode = entry_points[command](args)
    assert isinstance(returncode, int) and returncode >= 0
    return returncode
