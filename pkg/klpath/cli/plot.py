"""static svg figures for path csvs and report jsons"""
import logging
from pathlib import Path
from typing import Any, Dict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from klpath.domain.enums import ReportKind
from klpath.domain.errors import InputFormatError
from klpath.domain.messages import Messages
from klpath.repositories.artifact_repository import detect_input, read_path_csv, read_report

logger = logging.getLogger(__name__)

# byte-stable svg: fixed ids, no timestamps, text kept as text
SVG_PARAMS = {
    "svg.hashsalt": "klpath",
    "svg.fonttype": "none",
    "path.simplify": False,
}
SVG_METADATA = {"Date": None, "Creator": "klpath"}

PATH_GID = "path-polyline"
FIT_GID = "fitted-line"


def _path_figure(points) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 6))
    xs = [x for x, _ in points]
    ys = [y for _, y in points]
    ax.plot(xs, ys, linewidth=0.8, gid=PATH_GID)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(f"kloosterman path, {len(points)} knots")
    return fig


def _moment_figure(report: Dict[str, Any]) -> plt.Figure:
    gaps = np.asarray(report.get("gaps", []), dtype=float)
    moments = np.asarray(report.get("moments", []), dtype=float)
    if len(gaps) == 0 or len(gaps) != len(moments):
        raise InputFormatError("moment report carries no (gap, moment) pairs")

    fig, ax = plt.subplots(figsize=(6, 4.5))
    keep = moments > 0
    ax.loglog(gaps[keep], moments[keep], "o", markersize=4, label=f"M_{report.get('alpha')}")
    slope = report.get("fitted_slope")
    intercept = report.get("fitted_intercept")
    if slope is not None and intercept is not None:
        line = np.exp(intercept) * gaps[keep] ** slope
        ax.loglog(gaps[keep], line, "-", linewidth=1.0, gid=FIT_GID, label=f"slope = {slope:.4g}")
    ax.set_xlabel("t - s")
    ax.set_ylabel("moment")
    ax.legend()
    return fig


def _law_figure(report: Dict[str, Any]) -> plt.Figure:
    cdf_path = report.get("cdf_path") or {}
    cdf_limit = report.get("cdf_limit") or {}
    if not cdf_path:
        raise InputFormatError("law report carries no empirical cdfs")

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for t in sorted(cdf_path):
        quantiles = np.asarray(cdf_path[t])
        levels = np.linspace(0.0, 1.0, len(quantiles))
        ax.step(quantiles, levels, where="post", label=f"path, t = {t}")
        if t in cdf_limit:
            ax.step(cdf_limit[t], levels, where="post", linestyle="--", label=f"limit, t = {t}")
    ax.set_xlabel("real part")
    ax.set_ylabel("empirical cdf")
    ax.legend(fontsize="small")
    return fig


def render(input_path: str, output_path: str) -> Path:
    """
    draw a path csv, moment report or law report into a standalone svg

    args:
        input_path: path csv or report json, never modified
        output_path: svg file to write

    returns:
        path of the svg

    raises:
        InputFormatError: malformed or unrecognised input
    """
    kind = detect_input(input_path)
    with plt.rc_context(SVG_PARAMS):
        if kind == ReportKind.PATH:
            fig = _path_figure(read_path_csv(input_path))
        elif kind == ReportKind.MOMENTS:
            fig = _moment_figure(read_report(input_path)[1])
        elif kind == ReportKind.LAW:
            fig = _law_figure(read_report(input_path)[1])
        else:
            raise InputFormatError(Messages.get("IO", "unknown", path=input_path))

        target = Path(output_path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(target, format="svg", metadata=SVG_METADATA)
        plt.close(fig)

    logger.info(f"plotted {input_path} ({kind.value}) to {target}")
    return target
