import asyncio
import sys
from collections.abc import Sequence

from .exceptions import InvalidSpecError
from .parser import parse
from .runner import (
    MonteCarloRunner,
    Runner,
    SteadyRunner,
    SweepRunner,
    TransientRunner,
    Verifier,
)
from .scenario import Scenario, builtin, load_scenario

RUNNERS: dict[str, type[Runner]] = {
    "steady": SteadyRunner,
    "transient": TransientRunner,
    "sweep": SweepRunner,
    "verify": Verifier,
    "fig2": TransientRunner,
    "montecarlo": MonteCarloRunner,
}
# Scenario used when no --config is given.
DEFAULT_SCENARIOS = {
    "transient": "fig2",
    "verify": "verify",
    "fig2": "fig2",
    "montecarlo": "montecarlo",
}


def _get_scenario(command: str, config: str | None) -> Scenario:
    if command == "fig2" or (config is None and command in DEFAULT_SCENARIOS):
        return builtin(DEFAULT_SCENARIOS[command])
    if config is None:
        return Scenario()
    return load_scenario(config)


def _get_runner(argv: Sequence[str] | None = None) -> Runner:
    """
    Parse arguments and return the runner for that command.
    """
    parser = parse(
        description="Simulate and verify nonreciprocal quantum sensing"
    )
    args = parser.parse_args(argv)
    scenario = _get_scenario(args.command, args.config).override(
        out=args.out, fmt=args.format, seed=args.seed
    )
    return RUNNERS[args.command](
        scenario=scenario,
        report_file=args.report_file,
        workers=args.workers,
        tol=args.tol,
        quiet=args.quiet,
        debug=args.debug,
    )


def main(argv: Sequence[str] | None = None) -> None:
    """Exit status 0 on success, 1 on failed verification, 2 on invalid
    input."""
    try:
        runner = _get_runner(argv)
        asyncio.run(runner.execute())
    except InvalidSpecError as exc:
        print(f"nrsense: {exc}", file=sys.stderr)
        sys.exit(2)
    if not runner.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()
