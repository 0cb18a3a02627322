"""Shared parser for the nrsense commands"""
import argparse
import os

from .scenario import FORMATS
from .util import str_bool

COMMANDS = ("steady", "transient", "sweep", "verify", "fig2", "montecarlo")


def parse(description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument(
        "command",
        choices=COMMANDS,
        help="what to run",
    )
    parser.add_argument(
        "-c",
        "--config",
        default=os.environ.get("NRSENSE_CONFIG", None),
        help=(
            "scenario TOML file [env: NRSENSE_CONFIG, "
            + "<built-in scenario>]"
        ),
    )
    parser.add_argument(
        "-o",
        "--out",
        default=os.environ.get("NRSENSE_OUT", None),
        help=(
            "result file, '-' for stdout [env: NRSENSE_OUT, "
            + "<scenario output path>]"
        ),
    )
    parser.add_argument(
        "-f",
        "--format",
        choices=FORMATS,
        default=os.environ.get("NRSENSE_FORMAT", None),
        help=(
            "result format [env: NRSENSE_FORMAT, <scenario output format>]"
        ),
    )
    parser.add_argument(
        "-s",
        "--seed",
        type=int,
        default=os.environ.get("NRSENSE_SEED", None),
        help="Monte Carlo seed [env: NRSENSE_SEED, <scenario seed>]",
    )
    parser.add_argument(
        "-t",
        "--tol",
        type=float,
        default=os.environ.get("NRSENSE_TOL", "1e-8"),
        help="verification tolerance [env: NRSENSE_TOL, 1e-8]",
    )
    parser.add_argument(
        "--report-file",
        default=os.environ.get("NRSENSE_REPORT_FILE", "-"),
        help=(
            "Report output file, '-' for stderr "
            + "[env: NRSENSE_REPORT_FILE, '-']"
        ),
    )
    parser.add_argument(
        "-w",
        "--workers",
        type=int,
        default=os.environ.get("NRSENSE_WORKERS", "1"),
        help="sweep points evaluated at once [env: NRSENSE_WORKERS, 1]",
    )
    parser.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        default=str_bool(os.environ.get("NRSENSE_QUIET", "")),
        help="suppress logging and report [env: NRSENSE_QUIET, False]",
    )
    parser.add_argument(
        "-d",
        "--debug",
        action="store_true",
        default=str_bool(os.environ.get("NRSENSE_DEBUG", "")),
        help="enable debugging [env: NRSENSE_DEBUG, False]",
    )
    return parser
