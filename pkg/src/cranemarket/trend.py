"""Shared market trend and per-company trends from ridge-regularized
straight-line fits against calendar year."""

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .svg import Svg, color, fmt

TRACKING_BAND = 0.05


@dataclass(frozen=True)
class RidgeSpec:
    lam: float = 1.0
    penalize_intercept: bool = False

    def __post_init__(self):
        if not self.lam >= 0:
            raise InputError(f"ridge lambda must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class TrendLine:
    slope: float
    intercept: float
    lambda_used: float
    kind: str  # shared_sum, shared_mean or company

    def __call__(self, t):
        return self.slope * np.asarray(t, dtype=float) + self.intercept


@dataclass(frozen=True)
class CompanyTrend:
    company: str
    line: TrendLine
    residuals: np.ndarray
    label: str  # growing, lagging or tracking


def ridge_fit(t, y, spec=RidgeSpec(), kind="company"):
    """Fit ``y ~ slope * t + intercept`` with an L2 penalty on the slope.

    The fit is done on centered data so the unpenalized intercept does not
    depend on where the time origin sits.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1 or len(t) < 2:
        raise InputError("t and y must be 1-d of equal length >= 2")
    if np.all(t == t[0]):
        raise InputError("degenerate time axis: all t equal")
    lam = float(spec.lam)
    if spec.penalize_intercept:
        x = np.column_stack([t, np.ones_like(t)])
        slope, intercept = np.linalg.solve(x.T @ x + lam * np.eye(2), x.T @ y)
    else:
        tc = t - t.mean()
        slope = float(tc @ (y - y.mean())) / (float(tc @ tc) + lam)
        intercept = y.mean() - slope * t.mean()
    return TrendLine(float(slope), float(intercept), lam, kind)


def shared_trend(panel, spec=RidgeSpec()):
    """Trend lines for the column sums and column means of the panel."""
    years = np.array(panel.periods, dtype=float)
    total = panel.values.sum(axis=0)
    mean = panel.values.mean(axis=0)
    return (
        ridge_fit(years, total, spec, kind="shared_sum"),
        ridge_fit(years, mean, spec, kind="shared_mean"),
    )


def classify(slope, shared_slope, band=TRACKING_BAND):
    if abs(slope - shared_slope) <= band * abs(shared_slope):
        return "tracking"
    return "growing" if slope > shared_slope else "lagging"


def company_trends(panel, spec=RidgeSpec(), shared=None):
    if shared is None:
        shared = shared_trend(panel, spec)
    ref = shared[1].slope
    years = np.array(panel.periods, dtype=float)
    out = []
    for name, row in zip(panel.companies, panel.values):
        line = ridge_fit(years, row, spec)
        out.append(CompanyTrend(name, line, row - line(years), classify(line.slope, ref)))
    return out


def trend_report(panel, spec=RidgeSpec()):
    shared_sum, shared_mean = shared_trend(panel, spec)
    trends = company_trends(panel, spec, (shared_sum, shared_mean))
    return {
        "lambda": float(spec.lam),
        "shared": {
            "sum": {"a": shared_sum.slope, "b": shared_sum.intercept},
            "mean": {"a": shared_mean.slope, "b": shared_mean.intercept},
        },
        "companies": {
            c.company: {
                "slope": c.line.slope,
                "intercept": c.line.intercept,
                "label": c.label,
                "residuals": [float(r) for r in c.residuals],
            }
            for c in trends
        },
    }


def report_json(report):
    return json.dumps(report, indent=2) + "\n"


def trend_chart_svg(panel, trends, shared, title="Revenue trend by company"):
    """Line chart: one polyline per company, shared trends dashed."""
    shared_sum, shared_mean = shared
    years = np.array(panel.periods, dtype=float)
    curves = [panel.values[i] for i in range(panel.n_companies)]
    lines = [shared_sum(years), shared_mean(years)]
    lo = min(min(c.min() for c in curves), min(l.min() for l in lines), 0.0)
    hi = max(max(c.max() for c in curves), max(l.max() for l in lines))
    if hi == lo:
        hi = lo + 1.0

    width, height = 760, 440
    left, right, top, bottom = 70, 200, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(year):
        return left + pw * (year - years[0]) / (years[-1] - years[0])

    def sy(v):
        return top + ph * (1 - (v - lo) / (hi - lo))

    svg = Svg(width, height, title)
    svg.text(left + pw / 2, 22, title, text_anchor="middle", font_size=14)
    svg.line(left, top + ph, left + pw, top + ph, stroke="#000000")
    svg.line(left, top, left, top + ph, stroke="#000000")
    for year in years:
        svg.line(sx(year), top + ph, sx(year), top + ph + 5, stroke="#000000")
        svg.text(sx(year), top + ph + 20, str(int(year)), text_anchor="middle")
    for v in np.linspace(lo, hi, 5):
        svg.line(left - 5, sy(v), left, sy(v), stroke="#000000")
        svg.text(left - 8, sy(v) + 4, fmt(v), text_anchor="end")

    legend = []
    for i, (trend, curve) in enumerate(zip(trends, curves)):
        c = color(i)
        svg.polyline([(sx(x), sy(v)) for x, v in zip(years, curve)], fill="none", stroke=c, stroke_width=2)
        legend.append((trend.company, c, None))
    for line, name, dash in ((shared_sum, "Shared trend (sum)", "8,4"), (shared_mean, "Shared trend (mean)", "3,3")):
        ys = line(years)
        svg.polyline([(sx(years[0]), sy(ys[0])), (sx(years[-1]), sy(ys[-1]))],
                     fill="none", stroke="#000000", stroke_width=2, stroke_dasharray=dash)
        legend.append((name, "#000000", dash))

    lx = left + pw + 20
    for k, (name, c, dash) in enumerate(legend):
        y = top + 10 + 20 * k
        svg.line(lx, y, lx + 24, y, stroke=c, stroke_width=2, stroke_dasharray=dash, class_="legend-key")
        svg.text(lx + 30, y + 4, name, class_="legend")
    return svg.render()
