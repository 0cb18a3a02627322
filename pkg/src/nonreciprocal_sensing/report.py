"""Result tables: CSV, JSON and SVG writers.

Floats are written with repr() so they round-trip exactly; a run with a
fixed seed therefore produces byte-identical output.
"""
import csv
import enum
import io
import json
import math
import sys
from collections.abc import Iterator, Mapping, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from typing import IO, Any

import matplotlib
from matplotlib.figure import Figure

from .exceptions import InvalidSpecError

Row = Mapping[str, Any]

BASE_COLUMNS = ("kappa", "lambda_eff", "N", "delta", "n_a", "n_b")
STEADY_COLUMNS = BASE_COLUMNS + (
    "t",
    "dxi_nr_num",
    "dxi_nr_cf",
    "dxi_r_num",
    "dxi_r_cf",
    "eta",
    "improvement",
    "deviation",
    "eta_cf",
    "mu",
    "xi",
    "delta_b",
    "topology",
    "coupling",
    "convention",
    "reading",
    "dxi_nr_exact",
    "dxi_r_exact",
    "qfi_nr",
    "qfi_r",
    "angle_nr",
    "angle_r",
    "status",
)
VERIFY_COLUMNS = (
    "tag",
    "numeric",
    "closed_form",
    "deviation",
    "tolerance",
    "verdict",
    "detail",
)
MONTECARLO_COLUMNS = BASE_COLUMNS + (
    "xi",
    "delta_b",
    "topology",
    "coupling",
    "convention",
    "reading",
    "dt",
    "t_end",
    "n_traj",
    "seed",
    "quantity",
    "mode",
    "sampled",
    "deterministic",
    "stderr",
    "z",
    "status",
)
# Fixed so repeated SVG output is byte-identical.
SVG_HASH_SALT = "nrsense"


@dataclass(frozen=True)
class PlotSpec:
    x: str
    y: str
    group: str | None = None
    log_x: bool = False
    log_y: bool = False
    title: str = ""


def cell(value: Any) -> Any:
    """A JSON-safe value: enums by value, non-finite floats as strings."""
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float) and not math.isfinite(value):
        return repr(float(value))
    return value


def text_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


@contextmanager
def _open(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdout
        return
    try:
        f = open(path, "w", newline="")
    except OSError as exc:
        raise InvalidSpecError(f"cannot write {path}: {exc}") from exc
    with f:
        yield f


def write_csv(
    rows: Sequence[Row], columns: Sequence[str], fh: IO[str]
) -> None:
    writer = csv.DictWriter(
        fh, fieldnames=list(columns), lineterminator="\n", restval=""
    )
    writer.writeheader()
    for row in rows:
        writer.writerow({c: text_cell(row.get(c)) for c in columns})


def write_json(
    rows: Sequence[Row], columns: Sequence[str], fh: IO[str]
) -> None:
    document = {
        "columns": list(columns),
        "rows": [{c: cell(row.get(c)) for c in columns} for row in rows],
    }
    json.dump(document, fh, sort_keys=True, indent=2)
    fh.write("\n")


def _number(value: Any) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        return math.nan


def render_svg(rows: Sequence[Row], plot: PlotSpec) -> str:
    """One line per value of `plot.group`, y against x."""
    groups: dict[Any, tuple[list[float], list[float]]] = {}
    for row in rows:
        key = row.get(plot.group) if plot.group else None
        xs, ys = groups.setdefault(key, ([], []))
        xs.append(_number(row.get(plot.x)))
        ys.append(_number(row.get(plot.y)))
    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot()
    for key, (xs, ys) in groups.items():
        label = None if key is None else f"{plot.group} = {key}"
        ax.plot(xs, ys, label=label)
    if plot.log_x:
        ax.set_xscale("log")
    if plot.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(plot.x)
    ax.set_ylabel(plot.y)
    if plot.y == "eta":
        ax.axhline(1.0, color="gray", linestyle=":", linewidth=0.8)
    if plot.title:
        ax.set_title(plot.title)
    if plot.group:
        ax.legend()
    buffer = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def write_table(
    rows: Sequence[Row],
    columns: Sequence[str],
    path: str,
    fmt: str,
    plot: PlotSpec | None = None,
) -> None:
    """Write rows to `path` ("-" for stdout) as csv, json or svg."""
    if fmt == "svg":
        if plot is None:
            raise InvalidSpecError("this command has no svg rendering")
        text = render_svg(rows, plot)
        with _open(path) as fh:
            fh.write(text)
        return
    if fmt not in ("csv", "json"):
        raise InvalidSpecError(f"unknown output format '{fmt}'")
    with _open(path) as fh:
        if fmt == "csv":
            write_csv(rows, columns, fh)
        else:
            write_json(rows, columns, fh)
