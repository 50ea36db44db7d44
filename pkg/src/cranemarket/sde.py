"""Correlated multi-factor Brownian motion with linearly coupled drifts.

Each factor follows dX_i = mu_i dt + sigma_i dW_i with
mu_i = alpha_i + sum_{j != i} beta_ij X_j, and the driving noises are
correlated through ``corr``. Paths are integrated with Euler-Maruyama.
"""

import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import RevenuePanel
from .errors import InputError, NumericalError
from .streams import check_seed, normals

DEFAULT_FACTORS = ("market_share", "pricing", "technology")
QUANTILES = (0.05, 0.5, 0.95)
MAX_JITTER = 1e-10
BLOCK_PATHS = 2048


@dataclass(frozen=True)
class SdeSystem:
    factor_names: tuple
    alpha: np.ndarray
    beta: np.ndarray
    sigma: np.ndarray
    corr: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        m = len(self.factor_names)
        arrays = {}
        for name, shape in (("alpha", (m,)), ("beta", (m, m)), ("sigma", (m,)), ("corr", (m, m)), ("x0", (m,))):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != shape:
                raise InputError(f"{name} has shape {a.shape}, expected {shape}")
            if not np.all(np.isfinite(a)):
                raise InputError(f"{name} contains non-finite values")
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        object.__setattr__(self, "factor_names", tuple(self.factor_names))
        if m < 1:
            raise InputError("system needs at least one factor")
        if np.any(arrays["sigma"] < 0):
            raise InputError("volatilities must be >= 0")
        if np.any(np.diag(arrays["beta"]) != 0):
            raise InputError("beta diagonal must be zero (a factor does not drive itself)")
        c = arrays["corr"]
        if not np.allclose(c, c.T, rtol=0, atol=1e-12):
            raise InputError("corr must be symmetric")
        if np.any(np.abs(np.diag(c) - 1) > 1e-12) or np.any(np.abs(c) > 1 + 1e-12):
            raise InputError("corr must have unit diagonal and entries in [-1, 1]")

    @property
    def m(self):
        return len(self.factor_names)

    def drift(self, x):
        """Drift for a batch of states ``x`` of shape (n, M)."""
        mu = np.empty_like(x)
        for i in range(self.m):
            acc = np.full(len(x), self.alpha[i])
            for j in range(self.m):
                if j != i:
                    acc = acc + self.beta[i, j] * x[:, j]
            mu[:, i] = acc
        return mu

    def to_dict(self):
        return {
            "factors": list(self.factor_names),
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "sigma": self.sigma.tolist(),
            "corr": self.corr.tolist(),
            "x0": self.x0.tolist(),
        }


@dataclass(frozen=True)
class SimulationSpec:
    horizon: float = 1.0
    steps: int = 100
    paths: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.horizon > 0:
            raise InputError(f"horizon must be > 0, got {self.horizon}")
        if self.steps < 1 or self.paths < 1:
            raise InputError("steps and paths must be >= 1")
        check_seed(self.seed)

    @property
    def dt(self):
        return self.horizon / self.steps


@dataclass(frozen=True)
class EnsembleReport:
    factor_names: tuple
    spec: SimulationSpec
    terminal_mean: np.ndarray
    terminal_std: np.ndarray
    quantiles: dict  # level -> array over factors
    increment_corr: np.ndarray
    paths: np.ndarray = field(default=None, repr=False)  # (paths, steps + 1, M) when kept

    def to_dict(self):
        factors = {}
        for i, name in enumerate(self.factor_names):
            factors[name] = {
                "terminal_mean": float(self.terminal_mean[i]),
                "terminal_std": float(self.terminal_std[i]),
                "quantiles": {f"{q:g}": float(self.quantiles[q][i]) for q in QUANTILES},
            }
        return {
            "horizon": self.spec.horizon,
            "steps": self.spec.steps,
            "paths": self.spec.paths,
            "seed": self.spec.seed,
            "factors": factors,
            "increment_corr": self.increment_corr.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def load_system(source):
    """Read a system from JSON ``{factors, alpha, beta, sigma, corr, x0}``."""
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    missing = [k for k in ("factors", "alpha", "beta", "sigma", "corr", "x0") if k not in doc]
    if missing:
        raise InputError(f"system spec missing keys: {', '.join(missing)}")
    return SdeSystem(doc["factors"], doc["alpha"], doc["beta"], doc["sigma"], doc["corr"], doc["x0"])


def correlation_factor(corr):
    """Lower Cholesky factor of ``corr``, adding diagonal jitter up to 1e-10
    for matrices that are only semi-definite."""
    corr = np.asarray(corr, dtype=float)
    eye = np.eye(len(corr))
    for jitter in (0.0, 1e-12, 1e-11, MAX_JITTER):
        try:
            return np.linalg.cholesky(corr + jitter * eye)
        except np.linalg.LinAlgError:
            continue
    raise NumericalError("correlation matrix is not positive semi-definite (Cholesky failed after jitter)")


def _simulate_block(system, spec, chol, start, stop, keep):
    n, m, steps = stop - start, system.m, spec.steps
    dt = spec.dt
    sqdt = math.sqrt(dt)
    z = np.stack([normals(spec.seed, (p,), (steps, m)) for p in range(start, stop)])
    x = np.tile(system.x0, (n, 1))
    path_store = np.empty((n, steps + 1, m)) if keep else None
    if keep:
        path_store[:, 0] = x
    s1 = np.zeros((n, m))
    s2 = np.zeros((n, m, m))
    for step in range(steps):
        zs = z[:, step, :]
        dw = np.empty((n, m))
        # elementwise sums in a fixed order keep results independent of block size
        for i in range(m):
            acc = np.zeros(n)
            for j in range(i + 1):
                acc = acc + chol[i, j] * zs[:, j]
            dw[:, i] = sqdt * acc
        with np.errstate(over="ignore", invalid="ignore"):
            x = x + system.drift(x) * dt + system.sigma * dw
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(x), axis=1))[0])
            raise NumericalError(f"non-finite state at path {start + bad}, step {step + 1}")
        s1 += dw
        for i in range(m):
            for j in range(m):
                s2[:, i, j] += dw[:, i] * dw[:, j]
        if keep:
            path_store[:, step + 1] = x
    return x, s1, s2, path_store


def euler_maruyama(system, spec, keep_paths=False, workers=1, block_paths=BLOCK_PATHS):
    """Simulate ``spec.paths`` paths and summarize the terminal ensemble.

    Path ``p`` draws its normals from the stream keyed by ``(seed, p)``, so
    the report is bit-identical for any ``workers`` count or block size.
    """
    chol = correlation_factor(system.corr)
    bounds = [(a, min(a + block_paths, spec.paths)) for a in range(0, spec.paths, block_paths)]

    def run(b):
        return _simulate_block(system, spec, chol, b[0], b[1], keep_paths)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, bounds))
    else:
        results = [run(b) for b in bounds]

    terminal = np.concatenate([r[0] for r in results])
    s1 = np.concatenate([r[1] for r in results]).sum(axis=0)
    s2 = np.concatenate([r[2] for r in results]).sum(axis=0)
    count = spec.paths * spec.steps
    mean_dw = s1 / count
    cov = s2 / count - np.outer(mean_dw, mean_dw)
    sd = np.sqrt(np.clip(np.diag(cov), 0, None))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(np.outer(sd, sd) > 0, cov / np.outer(sd, sd), 0.0)
    np.fill_diagonal(corr, 1.0)
    corr = np.clip(corr, -1.0, 1.0)

    qs = np.quantile(terminal, QUANTILES, axis=0)
    qs = np.maximum.accumulate(qs, axis=0)
    return EnsembleReport(
        system.factor_names,
        spec,
        terminal.mean(axis=0),
        terminal.std(axis=0, ddof=1) if spec.paths > 1 else np.zeros(system.m),
        {q: qs[k] for k, q in enumerate(QUANTILES)},
        corr,
        np.concatenate([r[3] for r in results]) if keep_paths else None,
    )


def paths_csv(report):
    """Per-path dump: one row per (path, step)."""
    if report.paths is None:
        raise InputError("report was produced without keep_paths")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "step", "time", *report.factor_names])
    dt = report.spec.dt
    for p, path in enumerate(report.paths):
        for s, row in enumerate(path):
            w.writerow([p, s, repr(s * dt), *(repr(float(v)) for v in row)])
    return buf.getvalue()


def estimate_parameters(series, names=None, dt=1.0):
    """Fit an SdeSystem to observed factor series.

    ``series`` is a RevenuePanel (one factor per company) or an (M, T)
    array. Volatility and noise correlation come from the increments; the
    drift terms from least squares of dX_i/dt on [1, X_j (j != i)]. With
    fewer increments than regressors the coupling is dropped.
    """
    if isinstance(series, RevenuePanel):
        names = names or series.companies
        x = np.asarray(series.values, dtype=float)
    else:
        x = np.atleast_2d(np.asarray(series, dtype=float))
    m, t = x.shape
    if names is None:
        names = DEFAULT_FACTORS if m == 3 else tuple(f"factor_{i + 1}" for i in range(m))
    if t < 3:
        raise InputError(f"series too short: need at least 3 observations, got {t}")

    dx = np.diff(x, axis=1)
    rate = dx / dt
    sigma = dx.std(axis=1, ddof=1) / math.sqrt(dt)

    centered = dx - dx.mean(axis=1, keepdims=True)
    sd = np.sqrt((centered**2).mean(axis=1))
    corr = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            if sd[i] > 0 and sd[j] > 0:
                r = np.mean(centered[i] * centered[j]) / (sd[i] * sd[j])
                corr[i, j] = corr[j, i] = min(1.0, max(-1.0, r))

    alpha = np.empty(m)
    beta = np.zeros((m, m))
    if t - 1 < m:
        warnings.warn(
            f"{t - 1} increments cannot identify {m} drift terms per factor; coupling set to 0",
            stacklevel=2,
        )
        alpha = rate.mean(axis=1)
    else:
        for i in range(m):
            others = [j for j in range(m) if j != i]
            design = np.column_stack([np.ones(t - 1), *(x[j, :-1] for j in others)])
            coef, *_ = np.linalg.lstsq(design, rate[i], rcond=None)
            alpha[i] = coef[0]
            beta[i, others] = coef[1:]
    return SdeSystem(tuple(names), alpha, beta, sigma, corr, x[:, -1])
