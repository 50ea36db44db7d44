"""Revenue panels: loading, validation, z-normalization, noise augmentation
and descriptive statistics.

A panel is a company x year matrix of revenues (million USD by convention).
"""

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import InputError
from .streams import check_seed, normals

REPLICA_SEP = "#"


@dataclass(frozen=True)
class RevenuePanel:
    companies: tuple
    periods: tuple
    values: np.ndarray

    def __post_init__(self):
        companies = tuple(str(c).strip() for c in self.companies)
        periods = tuple(int(p) for p in self.periods)
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "companies", companies)
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "values", values)

        n, t = len(companies), len(periods)
        if values.shape != (n, t):
            raise InputError(f"values shape {values.shape} does not match {n} companies x {t} periods")
        if n < 2 or t < 2:
            raise InputError(f"need at least 2 companies and 2 periods, got {n} x {t}")
        seen = set()
        for row, name in enumerate(companies, start=1):
            if not name:
                raise InputError("empty company name", row=row)
            if name in seen:
                raise InputError(f"duplicate company {name!r}", row=row)
            seen.add(name)
        if any(b - a != 1 for a, b in zip(periods, periods[1:])):
            raise InputError(f"periods must be consecutive increasing years, got {list(periods)}")
        bad = np.argwhere(~np.isfinite(values) | (values < 0))
        if len(bad):
            i, j = bad[0]
            raise InputError(
                f"revenue must be finite and >= 0, got {values[i, j]}", row=i + 1, column=periods[j]
            )

    @property
    def n_companies(self):
        return len(self.companies)

    @property
    def n_periods(self):
        return len(self.periods)

    def row(self, company):
        try:
            return self.values[self.companies.index(company)]
        except ValueError:
            raise InputError(f"company {company!r} not in panel") from None


@dataclass(frozen=True)
class NormalizedPanel:
    """z-scored rows. After augmentation the row list also holds noisy
    replicas named ``<company>#k``; ``mu``/``sigma`` are per row and
    replicas inherit their source company's values."""

    base: RevenuePanel
    companies: tuple
    z_values: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray

    @property
    def periods(self):
        return self.base.periods

    def source_of(self, row_name):
        return row_name.split(REPLICA_SEP, 1)[0]


@dataclass(frozen=True)
class NoiseSpec:
    delta: float = 0.05
    seed: int = 0
    replicas: int = 10

    def __post_init__(self):
        if not self.delta >= 0:
            raise InputError(f"noise delta must be >= 0, got {self.delta}")
        if self.replicas < 0:
            raise InputError(f"replicas must be >= 0, got {self.replicas}")
        check_seed(self.seed)


@dataclass(frozen=True)
class GrowthSeries:
    company: str
    rates: np.ndarray = field(repr=False)


def _parse_number(text, row, column):
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"non-numeric cell {text!r}", row=row, column=column) from None
    if not np.isfinite(value):
        raise InputError(f"non-finite cell {text!r}", row=row, column=column)
    return value


def load_panel(source):
    """Read a panel from CSV.

    ``source`` may be a path, a text stream, or raw CSV text. The header is
    ``company,<year>,<year>,...``; rows are numbered from 1 after the header.
    """
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    rows = [r for r in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in r)]
    if not rows:
        raise InputError("empty input")
    header = [h.strip() for h in rows[0]]
    if header[0].lstrip("﻿") != "company":
        raise InputError(f"first header cell must be 'company', got {header[0]!r}", row=0, column=1)
    periods = []
    for col, cell in enumerate(header[1:], start=2):
        if len(cell) != 4 or not cell.isdigit():
            raise InputError(f"header cell {cell!r} is not a 4-digit year", row=0, column=col)
        periods.append(int(cell))

    companies, values = [], []
    for r, raw in enumerate(rows[1:], start=1):
        if len(raw) != len(header):
            raise InputError(f"expected {len(header)} cells, got {len(raw)}", row=r)
        name = raw[0].strip()
        if not name:
            raise InputError("empty company name", row=r, column="company")
        if name in companies:
            raise InputError(f"duplicate company {name!r}", row=r, column="company")
        vals = []
        for year, cell in zip(periods, raw[1:]):
            v = _parse_number(cell.strip(), r, year)
            if v < 0:
                raise InputError(f"negative revenue {v}", row=r, column=year)
            vals.append(v)
        companies.append(name)
        values.append(vals)
    if len(companies) < 2 or len(periods) < 2:
        raise InputError(f"need at least 2 companies and 2 periods, got {len(companies)} x {len(periods)}")
    return RevenuePanel(tuple(companies), tuple(periods), np.array(values))


def sample_panel_path():
    return resources.files("cranemarket") / "data" / "sample_panel.csv"


def load_sample_panel():
    """The bundled synthetic 7-company, 2017-2021 panel."""
    return load_panel(sample_panel_path().read_text(encoding="utf-8"))


def _write_matrix(names, periods, matrix):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["company", *periods])
    for name, row in zip(names, matrix):
        w.writerow([name, *(repr(float(v)) for v in row)])
    return buf.getvalue()


def dump_panel(panel):
    """Serialize a RevenuePanel or NormalizedPanel to the panel CSV layout."""
    if isinstance(panel, NormalizedPanel):
        return _write_matrix(panel.companies, panel.periods, panel.z_values)
    return _write_matrix(panel.companies, panel.periods, panel.values)


def normalize(panel):
    values = panel.values
    mu = values.mean(axis=1)
    sigma = values.std(axis=1)  # population std, divisor T
    for name, s in zip(panel.companies, sigma):
        if s == 0:
            raise InputError(f"constant series for company {name!r}: standard deviation is 0")
    z = (values - mu[:, None]) / sigma[:, None]
    return NormalizedPanel(panel, panel.companies, z, mu, sigma)


def augment(panel, spec):
    """Append ``spec.replicas`` noisy copies of the base rows.

    Replica ``k`` (1-based) of row ``i`` draws its noise from the stream keyed
    by ``(seed, k, i)``; cell ``t`` takes the ``t``-th draw.
    """
    if spec.replicas == 0:
        return panel
    # replicas are always drawn around the base rows, never around earlier replicas
    n = panel.base.n_companies
    t = len(panel.periods)
    base_names = panel.companies[:n]
    base_z, base_mu, base_sigma = panel.z_values[:n], panel.mu[:n], panel.sigma[:n]
    names = list(base_names)
    rows = [base_z]
    mu, sigma = [base_mu], [base_sigma]
    for k in range(1, spec.replicas + 1):
        noise = np.empty((n, t))
        for i in range(n):
            noise[i] = normals(spec.seed, (k, i), t)
        rows.append(base_z + spec.delta * noise)
        names.extend(f"{c}{REPLICA_SEP}{k}" for c in base_names)
        mu.append(base_mu)
        sigma.append(base_sigma)
    return NormalizedPanel(
        panel.base, tuple(names), np.vstack(rows), np.concatenate(mu), np.concatenate(sigma)
    )


def growth_rates(panel):
    out = []
    for name, row in zip(panel.companies, panel.values):
        out.append(GrowthSeries(name, _rates(row, name, panel.periods)))
    return out


def _rates(row, name, periods):
    row = np.asarray(row, dtype=float)
    for t in range(len(row) - 1):
        if row[t] <= 0:
            raise InputError(
                f"growth rate undefined for {name!r}: revenue {row[t]} in {periods[t]} is not positive",
                column=periods[t],
            )
    return row[1:] / row[:-1] - 1.0


def slice_period(panel, start_year, end_year):
    if start_year >= end_year:
        raise InputError(f"start year {start_year} must precede end year {end_year}")
    for y in (start_year, end_year):
        if y not in panel.periods:
            raise InputError(f"year not in panel: {y}")
    a = panel.periods.index(start_year)
    b = panel.periods.index(end_year) + 1
    return RevenuePanel(panel.companies, panel.periods[a:b], panel.values[:, a:b])


def summarize(panel):
    """Per-company revenue statistics plus each company's share of the period total.

    Quartiles use linear interpolation between order statistics.
    """
    values = panel.values
    totals = values.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        shares = np.where(totals > 0, values / np.where(totals > 0, totals, 1.0), 1.0 / len(values))
    companies = {}
    for i, name in enumerate(panel.companies):
        row = values[i]
        q1, med, q3 = np.percentile(row, [25, 50, 75])
        companies[name] = {
            "min": float(row.min()),
            "q1": float(q1),
            "median": float(med),
            "q3": float(q3),
            "max": float(row.max()),
            "mean": float(row.mean()),
            "share": {str(p): float(s) for p, s in zip(panel.periods, shares[i])},
        }
    return {
        "periods": list(panel.periods),
        "total": {str(p): float(v) for p, v in zip(panel.periods, totals)},
        "companies": companies,
    }


def summary_json(summary):
    return json.dumps(summary, indent=2) + "\n"
