"""Three-state growth Markov chains for a company's own revenue (internal
growth potential) and for the market it faces (external competition).

States are ordered Declining, Stable, Growing. The estimators and solvers
work for any number of states; the analysis layer always uses three.
"""

import json
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .dataset import GrowthSeries, _rates, growth_rates
from .errors import ConvergenceError, InputError
from .svg import Svg, fmt


class State(IntEnum):
    DECLINING = 0
    STABLE = 1
    GROWING = 2

    @property
    def label(self):
        return self.name.capitalize()


STATES = tuple(State)
STATE_COLORS = ("#d62728", "#1f77b4", "#2ca02c")  # red, blue, green


@dataclass(frozen=True)
class DiscretizationSpec:
    decline_threshold: float = -0.02
    growth_threshold: float = 0.02

    def __post_init__(self):
        if not self.decline_threshold < self.growth_threshold:
            raise InputError(
                f"decline threshold {self.decline_threshold} must be below growth threshold {self.growth_threshold}"
            )


@dataclass(frozen=True)
class TransitionMatrix:
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise InputError(f"transition matrix must be square, got shape {p.shape}")
        if np.any(p < 0) or np.any(p > 1):
            raise InputError("transition probabilities must lie in [0, 1]")
        bad = np.flatnonzero(np.abs(p.sum(axis=1) - 1) > 1e-12)
        if len(bad):
            raise InputError(f"row {bad[0]} of transition matrix does not sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def n(self):
        return len(self.p)


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray
    method: str
    iterations_used: int
    residual: float

    def to_dict(self):
        return {"pi": [float(x) for x in self.pi], "residual": self.residual, "method": self.method}


@dataclass(frozen=True)
class CompanyRiskProfile:
    company: str
    internal: StationaryDistribution
    external: StationaryDistribution
    internal_p: TransitionMatrix
    external_p: TransitionMatrix


def discretize(growth, spec=DiscretizationSpec()):
    """Map growth rates to states. Band edges belong to Stable."""
    rates = growth.rates if isinstance(growth, GrowthSeries) else np.asarray(growth, dtype=float)
    if len(rates) == 0:
        raise InputError("cannot discretize an empty growth series")
    out = []
    for r in rates:
        if r < spec.decline_threshold:
            out.append(State.DECLINING)
        elif r > spec.growth_threshold:
            out.append(State.GROWING)
        else:
            out.append(State.STABLE)
    return out


def transition_counts(states, n_states=3):
    counts = np.zeros((n_states, n_states))
    for a, b in zip(states, states[1:]):
        counts[int(a), int(b)] += 1
    return counts


def estimate_transitions(states, smoothing=0.0, n_states=3):
    """Row-normalized transition counts with optional additive smoothing.

    A row with no observed outgoing transitions and no smoothing is uniform.
    """
    if len(states) < 2:
        raise InputError("need at least 2 states to estimate transitions")
    if smoothing < 0:
        raise InputError(f"smoothing must be >= 0, got {smoothing}")
    counts = transition_counts(states, n_states) + smoothing
    totals = counts.sum(axis=1, keepdims=True)
    p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 1.0 / n_states)
    # exact row sums despite rounding in the division
    p[:, -1] = 1.0 - p[:, :-1].sum(axis=1)
    return TransitionMatrix(np.clip(p, 0.0, 1.0))


def _residual(pi, p):
    return float(np.max(np.abs(pi @ p - pi)))


def _power(p, tol, max_iter):
    n = len(p)
    pi = np.full(n, 1.0 / n)
    it = 0
    for it in range(1, max_iter // 2 + 1):
        nxt = pi @ p
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) <= tol:
            return nxt, it
        pi = nxt
    # periodic chains oscillate; the lazy chain 0.99*P + 0.01*I has the same
    # stationary distribution and is aperiodic
    for it in range(it + 1, max_iter + 1):
        nxt = 0.99 * (pi @ p) + 0.01 * pi
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) <= tol:
            return nxt, it
        pi = nxt
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        last_iterate=pi,
        residual=_residual(pi, p),
    )


def _eigen(p):
    """Solve (P^T - I) pi = 0 with one equation swapped for sum(pi) = 1.

    Returns None when the chain has more than one closed class, where the
    system is singular and the stationary distribution is not unique.
    """
    n = len(p)
    a = p.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    if np.linalg.cond(a) > 1e12:
        return None
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        return None
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    if np.any(pi < 0):
        return None
    return pi / pi.sum()


def stationary(p, method="power_iteration", tol=1e-12, max_iter=100_000):
    """Stationary distribution of a row-stochastic matrix.

    When it is not unique (several closed classes, e.g. the identity) the
    result is the limit reached from the uniform start, which both methods
    report.
    """
    if not isinstance(p, TransitionMatrix):
        p = TransitionMatrix(p)
    mat = np.asarray(p.p)
    if method == "eigen_solve":
        pi = _eigen(mat)
        if pi is not None:
            res = _residual(pi, mat)
            if res <= 1e-10:
                return StationaryDistribution(pi, "eigen_solve", 1, res)
        pi, it = _power(mat, tol, max_iter)
        return StationaryDistribution(pi, "power_iteration", it, _residual(pi, mat))
    if method != "power_iteration":
        raise InputError(f"unknown stationary method {method!r}")
    pi, it = _power(mat, tol, max_iter)
    res = _residual(pi, mat)
    if res > 1e-10:
        raise ConvergenceError(f"residual {res:.3g} above 1e-10", last_iterate=pi, residual=res)
    return StationaryDistribution(pi, "power_iteration", it, res)


def external_competition_series(panel, company):
    """Growth of total revenue of every company except ``company``."""
    if company not in panel.companies:
        raise InputError(f"company {company!r} not in panel")
    mask = np.array([c != company for c in panel.companies])
    market = panel.values[mask].sum(axis=0)
    return GrowthSeries(company, _rates(market, f"market excluding {company}", panel.periods))


def risk_profiles(panel, disc=DiscretizationSpec(), smoothing=0.0, method="power_iteration"):
    out = []
    for own in growth_rates(panel):
        ext = external_competition_series(panel, own.company)
        p_int = estimate_transitions(discretize(own, disc), smoothing)
        p_ext = estimate_transitions(discretize(ext, disc), smoothing)
        out.append(CompanyRiskProfile(
            own.company, stationary(p_int, method), stationary(p_ext, method), p_int, p_ext
        ))
    return out


def risk_report(profiles, verbose=False):
    doc = {"states": [s.label for s in STATES], "companies": {}}
    for prof in profiles:
        entry = {"internal": prof.internal.to_dict(), "external": prof.external.to_dict()}
        if verbose:
            entry["internal"]["transitions"] = prof.internal_p.p.tolist()
            entry["external"]["transitions"] = prof.external_p.p.tolist()
        doc["companies"][prof.company] = entry
    return json.dumps(doc, indent=2) + "\n"


def stacked_bar_svg(profiles, title="Stationary distribution: internal vs external"):
    if not profiles:
        raise InputError("no profiles to plot")
    bar, gap, group_gap = 26, 4, 30
    left, top, ph = 60, 50, 300
    group_w = 2 * bar + gap
    width = left + len(profiles) * (group_w + group_gap) + 140
    height = top + ph + 90
    svg = Svg(width, height, title)
    svg.text(width / 2, 24, title, text_anchor="middle", font_size=14)
    svg.line(left - 6, top + ph, width - 140, top + ph, stroke="#000000")
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = top + ph * (1 - v)
        svg.line(left - 10, y, left - 6, y, stroke="#000000")
        svg.text(left - 12, y + 4, fmt(v), text_anchor="end")

    for g, prof in enumerate(profiles):
        x0 = left + g * (group_w + group_gap)
        for b, dist in enumerate((prof.internal, prof.external)):
            x = x0 + b * (bar + gap)
            base = top + ph
            for s, prob in zip(STATES, dist.pi):
                h = ph * float(prob)
                base -= h
                svg.rect(x, base, bar, h, fill=STATE_COLORS[s], class_=f"bar-{'internal' if b == 0 else 'external'}")
        cx = x0 + group_w / 2
        svg.text(cx, top + ph + 16, prof.company, text_anchor="middle")
        svg.text(cx, top + ph + 30, "int | ext", text_anchor="middle", font_size=9)

    lx = width - 120
    for k, s in enumerate(STATES):
        y = top + 20 * k
        svg.rect(lx, y, 12, 12, fill=STATE_COLORS[s])
        svg.text(lx + 18, y + 10, s.label)
    return svg.render()
