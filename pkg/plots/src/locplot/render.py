"""Figure rendering: sweep lines, error CDFs and coverage bars.

Three plot kinds cover the usual result figures:

- ``line_vs_sweep``: a summary column against the sweep value, one curve per
  method (and per labelled input file, which is how a MUSIC run and a
  CRB-mode run overlay in a single comparison figure).
- ``cdf``: empirical CDFs of the per-trial localization error, one curve per
  method, split further by sweep value when the run report is available.
- ``bars``: a summary column as grouped bars per method.
"""

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .io import (PlotInputError, numeric, read_summary, read_trials,
                 sweep_map_for)

KINDS = ("line_vs_sweep", "cdf", "bars")

_YLABELS = {
    "mean_err_m": "mean localization error (m)",
    "mean_ellipse_area_m2": "mean 95% ellipse area (m$^2$)",
    "coverage_pct": "test points inside 95% ellipse (%)",
    "runtime_s": "runtime (s)",
}


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    inputs: tuple            # ((label, path), ...); label may be ""
    out_path: str
    methods: tuple = ()      # empty = all methods
    ycol: str = ""           # column for line/bars; defaults per kind
    xlabel: str = "sweep value"
    report_path: str = None  # optional, for cdf grouping
    title: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotInputError(f"unknown plot kind {self.kind!r}")
        if not self.inputs:
            raise PlotInputError("no input CSV given")


@dataclass
class RenderResult:
    out_path: str
    curves: dict = field(default_factory=dict)  # label -> (x, y) arrays


def _label(prefix, method):
    return f"{prefix}:{method}" if prefix else method


def _filter_methods(rows, methods, path):
    present = sorted({row["method"] for row in rows})
    wanted = [m for m in (methods or present) if m in present]
    if not wanted:
        raise PlotInputError(
            f"{path}: no rows match methods {','.join(methods)} "
            f"(present: {','.join(present)})")
    return wanted


def _render_line(spec, ax):
    ycol = spec.ycol or "mean_err_m"
    curves = {}
    for prefix, path in spec.inputs:
        rows = read_summary(path)
        for method in _filter_methods(rows, spec.methods, path):
            pts = [(numeric(r, "sweep_value", path), numeric(r, ycol, path))
                   for r in rows if r["method"] == method]
            pts.sort()
            x, y = np.array([p[0] for p in pts]), np.array([p[1] for p in pts])
            label = _label(prefix, method)
            curves[label] = (x, y)
            ax.plot(x, y, marker="o", label=label)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(_YLABELS.get(ycol, ycol))
    return curves


def _render_cdf(spec, ax):
    curves = {}
    for prefix, path in spec.inputs:
        rows = read_trials(path)
        sweep_map = sweep_map_for(path, spec.report_path)
        for method in _filter_methods(rows, spec.methods, path):
            groups = {}
            for row in rows:
                if row["method"] != method:
                    continue
                key = sweep_map.get(row["setup_id"], "")
                groups.setdefault(key, []).append(numeric(row, "err_m", path))
            for key, errors in sorted(groups.items()):
                srt = np.sort(np.asarray(errors))
                # start the curve at probability zero so it spans [0, 1]
                x = np.concatenate([[srt[0]], srt])
                y = np.concatenate([[0.0], np.arange(1, len(srt) + 1) / len(srt)])
                label = _label(prefix, f"{method} (K={key})" if key else method)
                curves[label] = (x, y)
                ax.step(x, y, where="post", label=label)
    ax.set_xlabel("localization error (m)")
    ax.set_ylabel("CDF")
    ax.set_ylim(0.0, 1.05)
    return curves


def _render_bars(spec, ax):
    ycol = spec.ycol or "coverage_pct"
    curves = {}
    for prefix, path in spec.inputs:
        rows = read_summary(path)
        methods = _filter_methods(rows, spec.methods, path)
        sweeps = sorted({r["sweep_value"] for r in rows})
        width = 0.8 / len(sweeps)
        base = np.arange(len(methods), dtype=float)
        for i, sweep in enumerate(sweeps):
            heights = []
            for method in methods:
                match = [numeric(r, ycol, path) for r in rows
                         if r["method"] == method and r["sweep_value"] == sweep]
                heights.append(match[0] if match else np.nan)
            offset = base + (i - (len(sweeps) - 1) / 2.0) * width
            label = _label(prefix, sweep if sweep else "all")
            curves[label] = (offset, np.asarray(heights))
            ax.bar(offset, heights, width=width, label=label)
        ax.set_xticks(base)
        ax.set_xticklabels(methods, rotation=30, ha="right")
    ax.set_ylabel(_YLABELS.get(ycol, ycol))
    return curves


def render(spec: PlotSpec) -> RenderResult:
    """Draw the figure described by ``spec`` and write it to ``spec.out_path``."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    try:
        if spec.kind == "line_vs_sweep":
            curves = _render_line(spec, ax)
        elif spec.kind == "cdf":
            curves = _render_cdf(spec, ax)
        else:
            curves = _render_bars(spec, ax)
        if spec.title:
            ax.set_title(spec.title)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(spec.out_path, dpi=150)
    finally:
        plt.close(fig)
    return RenderResult(out_path=spec.out_path, curves=curves)
