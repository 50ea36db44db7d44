"""Command-line entry point: ``cranemarket <subcommand> [input] [flags]``.

Exit status is 0 on success, 1 for bad input, 2 for numerical failure.
Diagnostics go to stderr; data goes to ``--out`` or stdout.
"""

import argparse
import json
import logging
import os
import sys
import warnings
from dataclasses import dataclass, fields

from . import benchmark, competition, dataset, markov, sde, trend
from .errors import InputError, NumericalError

log = logging.getLogger("cranemarket")


@dataclass
class RunConfig:
    input: str = None
    period: tuple = None
    seed: int = 0
    delta: float = 0.05
    replicas: int = 10
    lam: float = 1.0
    k: int = 3
    thresholds: tuple = (-0.02, 0.02)
    smoothing: float = 0.0
    horizon: float = 5.0
    steps: int = 60
    paths: int = 2000
    verbose: bool = False
    out: str = None
    format: str = None
    products: str = None
    scales: str = None
    dump_paths: bool = False
    workers: int = 1


def _pair(kind, cast):
    def parse(text):
        try:
            a, b = text.split(":")
            return cast(a), cast(b)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {kind} as A:B, got {text!r}") from None
    return parse


def _u64(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {v}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    # None means "not given" so a pipeline config file can fill it in
    common.add_argument("--seed", type=_u64, default=None)
    common.add_argument("--lambda", dest="lam", type=float, default=None)
    common.add_argument("--k", type=int, default=None)
    common.add_argument("--delta", type=float, default=None)
    common.add_argument("--replicas", type=int, default=None)
    common.add_argument("--thresholds", type=_pair("thresholds", float), default=None)
    common.add_argument("--smoothing", type=float, default=None)
    common.add_argument("--period", type=_pair("period", int), default=None)
    common.add_argument("--out", default=None, help="output directory; stdout when omitted")
    common.add_argument("--format", choices=("csv", "json", "svg"), default=None)
    common.add_argument("--verbose", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="cranemarket", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("describe", "per-company revenue summary"),
        ("correlate", "Pearson correlation matrix and heatmap"),
        ("cluster", "minimum within-cluster-distance partition"),
        ("trend", "shared and per-company ridge trends"),
        ("markov", "internal/external growth-state stationary distributions"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("input", help="revenue panel CSV")

    p = sub.add_parser("radar", parents=[common], help="benchmark radar chart and comparison")
    p.add_argument("input", nargs="?", default=None, help="products JSON (default: bundled cranes A-E)")
    p.add_argument("--scales", default=None, help="custom label scales JSON")

    p = sub.add_parser("simulate", parents=[common], help="correlated factor Monte Carlo")
    p.add_argument("input", help="system spec JSON, or a panel CSV to estimate one from")
    _sim_flags(p)

    p = sub.add_parser("pipeline", parents=[common], help="run every analysis into --out")
    p.add_argument("input", help="revenue panel CSV")
    p.add_argument("--config", default=None, help="JSON file of flag values; flags override it")
    p.add_argument("--products", default=None)
    p.add_argument("--scales", default=None)
    _sim_flags(p)
    return parser


def _sim_flags(p):
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump-paths", action="store_true", default=False)


def make_config(args):
    values = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        with open(cfg_path, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if "lambda" in file_cfg:
            file_cfg["lam"] = file_cfg.pop("lambda")
        for key in ("period", "thresholds"):
            if isinstance(file_cfg.get(key), str):
                file_cfg[key] = _pair(key, int if key == "period" else float)(file_cfg[key])
        unknown = set(file_cfg) - {f.name for f in fields(RunConfig)}
        if unknown:
            raise InputError(f"unknown keys in config {cfg_path}: {', '.join(sorted(unknown))}")
        values.update(file_cfg)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


def _panel(cfg):
    panel = dataset.load_panel(cfg.input)
    if cfg.period:
        panel = dataset.slice_period(panel, *cfg.period)
    return panel


# Each artifact builder returns {filename: text}. Subcommands and the
# pipeline share them so their outputs are byte-identical.

def describe_artifacts(cfg, panel):
    summary = dataset.summarize(panel)
    summary["growth"] = {
        g.company: [float(r) for r in g.rates] for g in dataset.growth_rates(panel)
    } if panel.values.min() > 0 else None
    return {"summary.json": dataset.summary_json(summary)}


def _correlation(cfg, panel):
    norm = dataset.normalize(panel)
    noisy = dataset.augment(norm, dataset.NoiseSpec(cfg.delta, cfg.seed, cfg.replicas))
    return competition.pearson_matrix(noisy)


def correlate_artifacts(cfg, panel):
    corr = _correlation(cfg, panel)
    title = f"Correlation of revenue movement {panel.periods[0]}-{panel.periods[-1]}"
    return {"correlation.csv": corr.to_csv(), "heatmap.svg": competition.heatmap_svg(corr, title)}


def cluster_artifacts(cfg, panel):
    dist = competition.correlation_distance(_correlation(cfg, panel))
    return {"clusters.json": competition.cluster(dist, cfg.k).to_json()}


def trend_artifacts(cfg, panel):
    spec = trend.RidgeSpec(cfg.lam)
    shared = trend.shared_trend(panel, spec)
    trends = trend.company_trends(panel, spec, shared)
    return {
        "trend.json": trend.report_json(trend.trend_report(panel, spec)),
        "trend.svg": trend.trend_chart_svg(panel, trends, shared),
    }


def markov_artifacts(cfg, panel):
    disc = markov.DiscretizationSpec(*cfg.thresholds)
    profiles = markov.risk_profiles(panel, disc, cfg.smoothing)
    return {
        "risk.json": markov.risk_report(profiles, verbose=cfg.verbose),
        "risk.svg": markov.stacked_bar_svg(profiles),
    }


def radar_artifacts(cfg):
    scales = benchmark.load_scales(cfg.scales) if cfg.scales else benchmark.default_scales()
    if cfg.products:
        profiles = benchmark.load_products(cfg.products, scales)
    else:
        profiles = benchmark.load_sample_products(scales)
    return {
        "radar.svg": benchmark.radar_svg(profiles, scales),
        "comparison.json": benchmark.comparison_json(benchmark.compare(profiles)),
    }


def simulate_artifacts(cfg, source):
    if isinstance(source, dataset.RevenuePanel):
        system = sde.estimate_parameters(source)
    else:
        system = sde.load_system(source)
    spec = sde.SimulationSpec(cfg.horizon, cfg.steps, cfg.paths, cfg.seed)
    report = sde.euler_maruyama(system, spec, keep_paths=cfg.dump_paths, workers=cfg.workers)
    out = {"ensemble.json": report.to_json()}
    if cfg.dump_paths:
        out["paths.csv"] = sde.paths_csv(report)
    return out


PRIMARY = {
    "describe": ("summary.json",),
    "correlate": ("correlation.csv", "heatmap.svg"),
    "cluster": ("clusters.json",),
    "trend": ("trend.json", "trend.svg"),
    "markov": ("risk.json", "risk.svg"),
    "radar": ("comparison.json", "radar.svg"),
    "simulate": ("ensemble.json",),
}


def _select(artifacts, fmt):
    if fmt is None:
        return artifacts
    return {k: v for k, v in artifacts.items() if k.endswith("." + fmt)}


def _emit(cfg, command, artifacts):
    chosen = _select(artifacts, cfg.format)
    if not chosen:
        raise InputError(f"{command} produces no {cfg.format} output")
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        for name in sorted(chosen):
            path = os.path.join(cfg.out, name)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(chosen[name])
            log.info("wrote %s", path)
    else:
        name = next(n for n in PRIMARY.get(command, chosen) if n in chosen)
        sys.stdout.write(chosen[name])


def execute(command, cfg):
    if command == "radar":
        cfg.products = cfg.products or cfg.input
        return radar_artifacts(cfg)
    if command == "simulate":
        if cfg.input.lower().endswith(".csv"):
            source = _panel(cfg)
        else:
            source = cfg.input
        return simulate_artifacts(cfg, source)
    panel = _panel(cfg)
    builders = {
        "describe": describe_artifacts,
        "correlate": correlate_artifacts,
        "cluster": cluster_artifacts,
        "trend": trend_artifacts,
        "markov": markov_artifacts,
    }
    if command in builders:
        return builders[command](cfg, panel)
    if command == "pipeline":
        out = {}
        for name in ("describe", "correlate", "cluster", "trend", "markov"):
            out.update(builders[name](cfg, panel))
        out.update(radar_artifacts(cfg))
        out.update(simulate_artifacts(cfg, panel))
        return out
    raise InputError(f"unknown command {command!r}")


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def _setup_logging():
    if not any(isinstance(h, _StderrHandler) for h in log.handlers):
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        log.addHandler(handler)
    log.setLevel(logging.INFO)
    log.propagate = False


def _join_pair_values(argv):
    # "--thresholds -0.02:0.02" would otherwise be read as an unknown option
    out = list(argv)
    for i in range(len(out) - 2, -1, -1):
        if out[i] in ("--thresholds", "--period") and out[i + 1].startswith("-"):
            out[i:i + 2] = [f"{out[i]}={out[i + 1]}"]
    return out


def run(argv=None):
    _setup_logging()
    parser = build_parser()
    argv = _join_pair_values(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        cfg = make_config(args)
        if args.command == "pipeline" and not cfg.out:
            cfg.out = "pipeline_out"
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            artifacts = execute(args.command, cfg)
        for w in caught:
            log.warning("%s: %s", w.category.__name__, w.message)
        _emit(cfg, args.command, artifacts)
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return 2
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename)
        return 1
    except (InputError, OSError, json.JSONDecodeError, KeyError, UnicodeDecodeError) as exc:
        log.error("%s: %s", getattr(args, "input", None) or args.command, exc)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
