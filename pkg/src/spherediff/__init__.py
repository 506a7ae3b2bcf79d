"""Spectral diffusion on the sphere: exact dense harmonic transforms,
mirrored Brownian motion, forward/reverse SDEs in spatial and chart
coordinates, score-matching losses with the frequency-vs-spatial bound,
and a sliced Wasserstein estimator."""

__version__ = "0.1.0"

from .grid import BandLimit, GridSpec, build_grid
from .transform import OperatorSet, analysis, build_operators, project_bandlimited, synthesis
from .chart import chart_linear_map, from_chart, synthesis_matrix, to_chart
from .noise import CovarianceSet, build_covariance, sample_mirrored_bm
from .sde import DiffusionState, ScoreField, VpSchedule, integrate
from .lossmap import BoundOperators, build_bound_operators, check_theorem2_bound
from .metrics import SlicedWassersteinResult, sliced_wasserstein

__all__ = [
    "__version__",
    "BandLimit", "GridSpec", "build_grid",
    "OperatorSet", "analysis", "build_operators", "project_bandlimited", "synthesis",
    "chart_linear_map", "from_chart", "synthesis_matrix", "to_chart",
    "CovarianceSet", "build_covariance", "sample_mirrored_bm",
    "DiffusionState", "ScoreField", "VpSchedule", "integrate",
    "BoundOperators", "build_bound_operators", "check_theorem2_bound",
    "SlicedWassersteinResult", "sliced_wasserstein",
]
