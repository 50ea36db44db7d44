"""Inter-company competition structure: Pearson correlation of revenue
movement, correlation distance, and minimum within-cluster-distance
partitioning."""

import io
import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .dataset import NormalizedPanel
from .errors import InputError
from .svg import Svg, fmt

EXHAUSTIVE_MAX_N = 10
RANDOM_FLOOR_TRIALS = 100


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple
    r: np.ndarray

    def to_csv(self):
        return _matrix_csv(self.labels, self.r)


@dataclass(frozen=True)
class DistanceMatrix:
    labels: tuple
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        n = len(self.labels)
        if d.shape != (n, n):
            raise InputError(f"distance matrix shape {d.shape} does not match {n} labels")
        if not np.array_equal(d, d.T):
            raise InputError("distance matrix must be symmetric")
        if np.any(np.diag(d) != 0) or np.any(d < 0):
            raise InputError("distance matrix must be non-negative with zero diagonal")
        object.__setattr__(self, "d", d)


@dataclass(frozen=True)
class ClusterAssignment:
    labels: tuple
    k: int
    assignment: tuple  # cluster id per label, in label order
    objective: float

    @property
    def clusters(self):
        return [[lab for lab, c in zip(self.labels, self.assignment) if c == g] for g in range(self.k)]

    def to_json(self):
        doc = {"k": self.k, "objective": self.objective, "clusters": self.clusters}
        return json.dumps(doc, indent=2) + "\n"


def _matrix_csv(labels, m):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *labels])
    for lab, row in zip(labels, m):
        w.writerow([lab, *(repr(float(v)) for v in row)])
    return buf.getvalue()


def _series(panel):
    """Company labels and one observation vector per company.

    Noisy replica rows of an augmented panel are pooled with their source
    company, so each replica contributes T extra observations.
    """
    if isinstance(panel, NormalizedPanel):
        labels = panel.base.companies
        groups = {c: [] for c in labels}
        for name, row in zip(panel.companies, panel.z_values):
            groups[panel.source_of(name)].append(row)
        return labels, np.array([np.concatenate(groups[c]) for c in labels])
    return panel.companies, np.asarray(panel.values, dtype=float)


def pearson_matrix(panel):
    """Pairwise Pearson coefficients using population moments."""
    labels, x = _series(panel)
    if x.shape[1] < 2:
        raise InputError("need at least 2 observations per company")
    centered = x - x.mean(axis=1, keepdims=True)
    sd = np.sqrt((centered**2).mean(axis=1))
    for lab, s in zip(labels, sd):
        if s == 0:
            raise InputError(f"constant series for company {lab!r}: correlation undefined")
    n = len(labels)
    r = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            cov = np.mean(centered[i] * centered[j])
            r[i, j] = r[j, i] = min(1.0, max(-1.0, cov / (sd[i] * sd[j])))
    return CorrelationMatrix(tuple(labels), r)


def correlation_distance(corr):
    d = 1.0 - corr.r
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(corr.labels, np.clip(d, 0.0, 2.0))


def partition_objective(d, assignment):
    """Sum of d[i, j] over unordered same-cluster pairs."""
    a = np.asarray(assignment)
    same = a[:, None] == a[None, :]
    return float(np.triu(np.where(same, d, 0.0), 1).sum())


def _restricted_growth_strings(n, k):
    """All partitions of n items into exactly k blocks, as canonical label
    vectors, in lexicographic order."""
    out = []
    a = [0] * n

    def rec(i, used):
        if n - i < k - used:
            return
        if i == n:
            if used == k:
                out.append(a.copy())
            return
        for c in range(min(used + 1, k)):
            a[i] = c
            rec(i + 1, max(used, c + 1))

    rec(1, 1)
    return np.array(out, dtype=np.int8)


def _exhaustive(d, k):
    n = len(d)
    cands = _restricted_growth_strings(n, k)
    iu, ju = np.triu_indices(n, 1)
    same = cands[:, iu] == cands[:, ju]
    objs = (same * d[iu, ju]).sum(axis=1)
    best = objs.min()
    # first hit is the lexicographically smallest among near-exact ties
    idx = int(np.flatnonzero(objs <= best + 1e-12 * (1.0 + abs(best)))[0])
    return cands[idx]


def _canonical(assign):
    relabel = {}
    return np.array([relabel.setdefault(c, len(relabel)) for c in assign])


def _relocate(d, assign, k):
    """Move single items between clusters while that lowers the objective."""
    assign = assign.copy()
    improved = True
    while improved:
        improved = False
        for i in range(len(assign)):
            cur = assign[i]
            if np.sum(assign == cur) == 1:
                continue
            cost_here = d[i, assign == cur].sum()
            best_gain, best_c = 1e-12, None
            for c in range(k):
                if c == cur:
                    continue
                gain = cost_here - d[i, assign == c].sum()
                if gain > best_gain:
                    best_gain, best_c = gain, c
            if best_c is not None:
                assign[i] = best_c
                improved = True
    return assign


def _random_partition(rng, n, k):
    a = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    rng.shuffle(a)
    return a


def _heuristic(d, k, seed=0):
    n = len(d)
    z = linkage(squareform(d, checks=False), method="average")
    assign = fcluster(z, t=k, criterion="maxclust") - 1
    if len(set(assign)) < k:
        # split ties left fewer groups than requested; peel off singletons
        assign = _canonical(assign)
        nxt = assign.max() + 1
        for i in range(n):
            if nxt >= k:
                break
            if np.sum(assign == assign[i]) > 1:
                assign[i] = nxt
                nxt += 1
    best = _relocate(d, _canonical(assign), k)
    best_obj = partition_objective(d, best)
    rng = np.random.default_rng(seed)
    for _ in range(RANDOM_FLOOR_TRIALS):
        cand = _relocate(d, _random_partition(rng, n, k), k)
        obj = partition_objective(d, cand)
        if obj < best_obj - 1e-12:
            best, best_obj = cand, obj
    return _canonical(best)


def cluster(dist, k):
    """Partition companies into exactly ``k`` groups minimizing total
    within-group pairwise distance.

    Exact by enumeration for up to 10 companies; larger inputs use average
    linkage plus single-item relocation, and are never worse than the best
    of 100 seeded random partitions.
    """
    n = len(dist.labels)
    if not 1 <= k <= n:
        raise InputError(f"cluster count k={k} out of range 1..{n}")
    d = dist.d
    if n <= EXHAUSTIVE_MAX_N:
        assign = _exhaustive(d, k)
    else:
        assign = _heuristic(d, k)
    assign = _canonical(assign)
    return ClusterAssignment(
        tuple(dist.labels), k, tuple(int(a) for a in assign), partition_objective(d, assign)
    )


def _diverging(v):
    """-1 blue, 0 white, +1 red."""
    v = max(-1.0, min(1.0, float(v)))
    target = (214, 39, 40) if v >= 0 else (31, 119, 180)
    a = abs(v)
    rgb = [round(255 + (c - 255) * a) for c in target]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def heatmap_svg(corr, title="Correlation of revenue movement"):
    n = len(corr.labels)
    cell, left, top = 56, 130, 60
    width = left + n * cell + 20
    height = top + n * cell + 90
    svg = Svg(width, height, title)
    svg.text(width / 2, 24, title, text_anchor="middle", font_size=14)
    for i, lab in enumerate(corr.labels):
        y = top + i * cell
        svg.text(left - 6, y + cell / 2 + 4, lab, text_anchor="end")
        x = left + i * cell + cell / 2
        ybase = top + n * cell + 8
        svg.text(x, ybase, lab, text_anchor="end",
                 transform=f"rotate(-45 {fmt(x)} {fmt(ybase)})")
        for j in range(n):
            v = corr.r[i, j]
            svg.rect(left + j * cell, y, cell, cell, fill=_diverging(v), stroke="#ffffff")
            svg.text(left + j * cell + cell / 2, y + cell / 2 + 4, fmt(v), text_anchor="middle",
                     fill="#ffffff" if abs(v) > 0.6 else "#000000")
    return svg.render()
