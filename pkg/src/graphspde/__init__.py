"""SPDE-derived Gaussian-process kernels on graphs.

Spatial kernels (Laplacian, graph Matern), non-separable spatio-temporal
kernels from the stochastic heat and wave equations, exact GP regression
over (vertex, time) points, an Euler-Maruyama Monte Carlo oracle, and a
sliding-window backtesting harness.
"""

__version__ = "0.1.0"

from .backtest import (
    BacktestPlan,
    RoundResult,
    confidence_interval,
    dm_test,
    interpolation_split,
    mae,
    mape,
    sliding_windows,
)
from .data_io import (
    SyntheticSpec,
    gen_heat_line,
    gen_wave_line,
    load_graph_csv,
    load_series_csv,
    write_graph_csv,
    write_series_csv,
)
from .exceptions import DataError, FactorizationError, NumericError, StabilityError
from .experiments import BacktestReport, TaskSummary, run_backtest
from .gp import (
    FitOptions,
    FitResult,
    GPModel,
    PosteriorPrediction,
    SpatioTemporalDataset,
    fit,
    log_marginal_likelihood,
    predict,
    sample,
    sampling_moments,
)
from .graphs import (
    FractionalLaplacian,
    Graph,
    LaplacianMatrix,
    build_graph,
    fractional_from_graph,
    fractional_laplacian,
    laplacian,
    line_graph,
)
from .kernels import (
    GramMatrix,
    KernelSpec,
    STPoint,
    assemble_gram,
    heat_random_walk_check,
    heat_semigroup,
    laplacian_kernel,
    lyapunov_stationary,
    matern_graph_kernel,
    shek_cov,
    shek_cov_general,
    shek_matrix_noise_cov,
    shek_mean,
    swek_cov,
    swek_mean,
    temporal_kernel,
    wave_solution,
)
from .sde import PathEnsemble, empirical_cross_cov, simulate_heat, simulate_wave
from .spectral import (
    SpectralDecomposition,
    cholesky_jittered,
    eigendecompose_symmetric,
    matrix_function,
    pseudoinverse,
)
