"""Serialization of experiment reports: CSV, JSON summaries, and plots.

CSV files carry a header row, comma separators, "." decimals, and floats at
17 significant digits, so identical runs serialize byte-identically and a
round-trip through text loses nothing.  The JSON summary holds the resolved
configuration next to the metrics, targets, tolerances, and the overall
pass flag.  Figures are rendered to PNG with the Agg backend; `--emit-gnuplot`
instead writes a plain-text script that plots the CSV with no Python around.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from .report import ExperimentReport

__all__ = ["PlotRecipe", "PLOT_RECIPES", "format_value", "render_figure",
           "write_csv", "write_gnuplot", "write_summary"]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(path, row_fields: Sequence[str], rows: Sequence[dict]) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(row_fields))
        for row in rows:
            writer.writerow([format_value(row.get(name)) for name in row_fields])


def _jsonable(value):
    """Strict-JSON form: numpy scalars unwrapped, non-finite floats to None."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_summary(path, command: str, config: dict,
                  report: ExperimentReport) -> dict:
    summary = {
        "command": command,
        "config": _jsonable(config),
        "metrics": _jsonable(report.metrics),
        "targets": {c.name: _jsonable(c.target) for c in report.checks},
        "tolerances": {c.name: _jsonable(c.tolerance) for c in report.checks},
        "pass": report.passed,
        "checks": [{"name": c.name, "value": _jsonable(c.value),
                    "target": _jsonable(c.target),
                    "tolerance": _jsonable(c.tolerance), "passed": c.passed,
                    "detail": c.detail} for c in report.checks],
    }
    with open(Path(path), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


@dataclass(frozen=True)
class PlotRecipe:
    """How to plot one command's rows: y against x, optionally log-log."""

    x: str
    y: str
    logx: bool = False
    logy: bool = False
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None
    filter_field: Optional[str] = None
    filter_value: Optional[str] = None

    def select(self, rows: Sequence[dict]) -> List[dict]:
        if self.filter_field is None:
            return [r for r in rows
                    if r.get(self.x) is not None and r.get(self.y) is not None]
        return [r for r in rows if r.get(self.filter_field) == self.filter_value
                and r.get(self.x) is not None and r.get(self.y) is not None]


PLOT_RECIPES = {
    "decompose": PlotRecipe(x="alpha", y="residual", logy=True,
                            ylabel="partition residual"),
    "norm": PlotRecipe(x="term_rank", y="partial_sum",
                       ylabel="running modulation sum"),
    "evolve": PlotRecipe(x="t", y="gradient_norm"),
    "strichartz": PlotRecipe(x="weight", y="ratio", logx=True, logy=True,
                             xlabel="<k>", ylabel="space-time / data ratio"),
    "bilinear": PlotRecipe(x="separation", y="value", logx=True, logy=True,
                           ylabel="bilinear interaction"),
    "construct": PlotRecipe(x="sigma", y="modulation", logx=True, logy=True,
                            filter_field="stage", filter_value="sigma",
                            ylabel="modulation norm"),
    "inflate": PlotRecipe(x="weight", y="value", logx=True, logy=True,
                          xlabel="<k>", ylabel="response-coefficient norm"),
    "picard": PlotRecipe(x="iteration", y="factor", logy=True,
                         ylabel="contraction factor"),
    "glassey": PlotRecipe(x="t", y="gradient_focusing",
                          ylabel="gradient norm"),
}


def render_figure(path, command: str, report: ExperimentReport) -> bool:
    """Render the command's recipe to a PNG; returns False when not plottable."""
    recipe = PLOT_RECIPES.get(command)
    if recipe is None:
        return False
    rows = recipe.select(report.rows)
    if len(rows) < 2:
        return False
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [float(r[recipe.x]) for r in rows]
    ys = [float(r[recipe.y]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.plot(xs, ys, "o-", markersize=4)
    if recipe.logx:
        ax.set_xscale("log")
    if recipe.logy and min(ys) > 0:
        ax.set_yscale("log")
    ax.set_xlabel(recipe.xlabel or recipe.x)
    ax.set_ylabel(recipe.ylabel or recipe.y)
    title = report.name
    slope = report.metrics.get("slope")
    if slope is not None:
        title += f" (slope {slope:.4f})"
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=110)
    plt.close(fig)
    return True


def write_gnuplot(path, command: str, csv_name: str, row_fields: Sequence[str],
                  report: ExperimentReport) -> bool:
    """Write a self-contained gnuplot script plotting the CSV columns."""
    recipe = PLOT_RECIPES.get(command)
    if recipe is None:
        return False
    try:
        xcol = list(row_fields).index(recipe.x) + 1
        ycol = list(row_fields).index(recipe.y) + 1
    except ValueError:
        return False
    lines = [
        f"# {report.name}: {recipe.y} against {recipe.x}",
        'set datafile separator ","',
        "set key off",
        f'set xlabel "{recipe.xlabel or recipe.x}"',
        f'set ylabel "{recipe.ylabel or recipe.y}"',
    ]
    if recipe.logx:
        lines.append("set logscale x")
    if recipe.logy:
        lines.append("set logscale y")
    using = f"{xcol}:{ycol}"
    if recipe.filter_field is not None:
        fcol = list(row_fields).index(recipe.filter_field) + 1
        using = (f"(strcol({fcol}) eq \"{recipe.filter_value}\" ? ${xcol} : 1/0)"
                 f":{ycol}")
    lines.append(f'plot "{csv_name}" skip 1 using {using} with linespoints')
    with open(Path(path), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return True
