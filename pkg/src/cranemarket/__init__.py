"""Market-competition analytics for small company x year revenue panels."""

from .benchmark import BenchmarkProfile, DimensionScale, compare, default_scales, radar_svg, score_product
from .competition import (
    ClusterAssignment,
    CorrelationMatrix,
    DistanceMatrix,
    cluster,
    correlation_distance,
    heatmap_svg,
    pearson_matrix,
)
from .dataset import (
    GrowthSeries,
    NoiseSpec,
    NormalizedPanel,
    RevenuePanel,
    augment,
    growth_rates,
    load_panel,
    load_sample_panel,
    normalize,
    slice_period,
    summarize,
)
from .errors import ConvergenceError, InputError, NumericalError
from .markov import (
    CompanyRiskProfile,
    DiscretizationSpec,
    State,
    StationaryDistribution,
    TransitionMatrix,
    discretize,
    estimate_transitions,
    external_competition_series,
    risk_profiles,
    stacked_bar_svg,
    stationary,
)
from .sde import EnsembleReport, SdeSystem, SimulationSpec, estimate_parameters, euler_maruyama
from .trend import RidgeSpec, TrendLine, company_trends, ridge_fit, shared_trend, trend_chart_svg

__version__ = "0.1.0"
