"""Figure construction from parsed experiment outputs.

Rendering is a pure function of the inputs and the style dict: figures are
built on explicit Figure objects (no pyplot state), the SVG id salt is
pinned, and volatile metadata (PNG Software, SVG Date) is stripped, so the
same spec produces identical bytes under one matplotlib version.
"""

import math
import os
from dataclasses import dataclass, field

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .schemas import SchemaError, load_table, load_table_json

matplotlib.rcParams["svg.hashsalt"] = "figs"

KINDS = ("scatter", "radial-density", "rate", "potential-map")

# input roles each figure kind consumes
_ROLES = {
    "scatter": ("spectrum",),
    "radial-density": ("density",),
    "rate": ("report",),
    "potential-map": ("potential",),
}

_FORMATS = (".png", ".svg")


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: kind, input files by role, output image path."""

    kind: str
    inputs: dict
    out: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}, "
                             f"expected one of {KINDS}")
        missing_roles = [r for r in _ROLES[self.kind] if r not in self.inputs]
        if missing_roles:
            raise ValueError(f"kind {self.kind!r} needs inputs {missing_roles}")
        absent = [p for p in self.inputs.values() if not os.path.isfile(p)]
        if absent:
            raise FileNotFoundError(f"input files not found: {absent}")
        ext = os.path.splitext(self.out)[1].lower()
        if ext not in _FORMATS:
            raise ValueError(f"output must end in {_FORMATS}, got {self.out!r}")


def _load(path, schema):
    if str(path).endswith(".json"):
        return load_table_json(path, schema)
    return load_table(path, schema)


def _unit_circle(ax):
    t = np.linspace(0.0, 2.0 * math.pi, 361)
    ax.plot(np.cos(t), np.sin(t), color="0.25", lw=1.2, zorder=1)


def _new_fig(style, default_size):
    size = style.get("figsize", default_size)
    return Figure(figsize=tuple(size), dpi=int(style.get("dpi", 110)))


def _scatter(spec: FigureSpec) -> Figure:
    tab = _load(spec.inputs["spectrum"], "spectrum")
    fig = _new_fig(spec.style, (5.2, 5.2))
    ax = fig.add_subplot()
    ax.scatter(tab.column("re"), tab.column("im"),
               s=float(spec.style.get("marker_size", 6.0)),
               color=spec.style.get("color", "tab:blue"), alpha=0.8, zorder=2)
    _unit_circle(ax)
    lim = float(spec.style.get("axis_limit", 1.35))
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(spec.style.get("title", "eigenvalues and the unit circle"))
    return fig


def _radial_density(spec: FigureSpec) -> Figure:
    tab = _load(spec.inputs["density"], "density")
    r = tab.column("r")
    fig = _new_fig(spec.style, (6.0, 4.2))
    ax = fig.add_subplot()
    ax.plot(r, tab.column("density"), lw=1.6, color="tab:blue",
            label="mean density (finite n)")
    ax.plot(r, tab.column("limit_density"), lw=1.6, ls="--", color="tab:red",
            label="limit density")
    # the limit density blows up at the origin for m >= 2, so the y-range is
    # capped rather than autoscaled
    ax.set_ylim(0.0, float(spec.style.get("ymax", 2.0)))
    ax.set_xlim(float(r.min()), float(r.max()))
    ax.set_xlabel("|z|")
    ax.set_ylabel("radial density")
    ax.legend(loc="upper right")
    ax.set_title(spec.style.get("title", "mean vs limit radial density"))
    return fig


def _fit_medians(ns, stats):
    """Per-n medians and their least-squares log-log fit."""
    order = sorted(set(int(n) for n in ns))
    med = {n: float(np.median(stats[ns == n])) for n in order}
    if len(order) >= 2:
        x = np.log([float(n) for n in order])
        y = np.log([med[n] for n in order])
        a = np.vstack([x, np.ones_like(x)]).T
        (slope, b), *_ = np.linalg.lstsq(a, y, rcond=None)
        return med, float(slope), float(b)
    return med, None, None


def _rate(spec: FigureSpec) -> Figure:
    tab = _load(spec.inputs["report"], "report")
    ns = tab.column("n")
    stats = tab.column("statistic")
    if np.any(stats <= 0):
        raise SchemaError("rate plot needs positive statistics")
    med, slope, b = _fit_medians(ns, stats)
    fig = _new_fig(spec.style, (6.4, 4.4))
    ax = fig.add_subplot()
    ax.loglog(ns, stats, ".", ms=4, alpha=0.35, color="tab:blue",
              label="trials")
    ax.loglog(list(med), list(med.values()), "o", ms=7, color="tab:blue",
              mfc="none", label="median")
    n_lo, n_hi = min(med), max(med)
    if slope is not None:
        span = np.geomspace(n_lo, n_hi, 50)
        ax.loglog(span, np.exp(b) * span ** slope, color="tab:red", lw=1.4,
                  label=f"fit slope={slope:.2f}")
    guide = float(spec.style.get("guide_slope", -0.5))
    span = np.geomspace(n_lo, n_hi, 50)
    ax.loglog(span, med[n_lo] * (span / n_lo) ** guide, ls=":", color="0.4",
              lw=1.4, label=f"guide slope={guide:.2f}")
    ax.set_xlabel("n")
    ax.set_ylabel("statistic")
    ax.legend(loc="lower left")
    ax.set_title(spec.style.get("title", "convergence rate"))
    return fig


def _potential_map(spec: FigureSpec) -> Figure:
    tab = _load(spec.inputs["potential"], "potential")
    gap = tab.column("u_empirical") - tab.column("u_limit")
    fig = _new_fig(spec.style, (6.0, 5.0))
    ax = fig.add_subplot()
    sc = ax.scatter(tab.column("re"), tab.column("im"), c=gap, s=34.0,
                    cmap=spec.style.get("cmap", "coolwarm"), zorder=2)
    fig.colorbar(sc, ax=ax, label="U_n - U_limit")
    _unit_circle(ax)
    lim = float(spec.style.get("axis_limit", 1.45))
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(spec.style.get("title", "log-potential gap"))
    return fig


_BUILDERS = {
    "scatter": _scatter,
    "radial-density": _radial_density,
    "rate": _rate,
    "potential-map": _potential_map,
}


def build_figure(spec: FigureSpec) -> Figure:
    """Construct the Figure without writing it; render() saves it."""
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> str:
    fig = build_figure(spec)
    out_dir = os.path.dirname(spec.out)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    # strip the volatile metadata each writer injects by default
    meta = ({"Software": None} if spec.out.lower().endswith(".png")
            else {"Date": None})
    fig.savefig(spec.out, metadata=meta)
    return spec.out
