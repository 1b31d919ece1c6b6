"""Exact Gaussian-process regression over (vertex, time) points.

Gaussian likelihood throughout: log marginal likelihood via jittered
Cholesky, hyperparameter fitting by a quasi-Newton ascent with central
finite-difference gradients in log-space, standard posterior prediction,
and seeded prior/posterior sampling.

Two conventions applied uniformly before any Gram assembly:

- times are shifted so the earliest training time lands at ``time_offset``
  (default 1.0): at t = 0 the process kernels have zero variance, which
  would make the first observation noise-only;
- targets are centered per ``mean_policy`` (default: per-node training
  mean), and the offsets are added back to predictions.

For the SHEK/SWEK process kernels, :func:`sample` treats conditioning
values at t = 0 as the deterministic initial state of the process (they
enter through the process mean, not the covariance), which is how the
kernels are defined.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .exceptions import DataError, FactorizationError, NumericError
from .graphs import Graph, fractional_from_graph, laplacian
from .kernels import (
    KernelSpec,
    STPoint,
    _shek_eig,
    _swek_eig,
    assemble_gram,
    shek_mean,
    swek_mean,
    temporal_kernel,
)
from .spectral import NULL_SPACE_RTOL, cholesky_jittered, eigendecompose_symmetric

_LOG_2PI = math.log(2.0 * math.pi)
_NOISE_FLOOR = 1e-10


@dataclass(frozen=True)
class SpatioTemporalDataset:
    """Observations ``(point, y)`` on a graph."""

    graph: Graph
    observations: tuple[tuple[STPoint, float], ...]

    def __post_init__(self):
        if not self.observations:
            raise DataError("dataset needs at least one observation")
        for point, y in self.observations:
            if point.vertex >= self.graph.n_vertices:
                raise DataError(f"observation references vertex {point.vertex} outside the graph")
            if not np.isfinite(y):
                raise DataError(f"non-finite target value {y} at {point}")

    @property
    def points(self) -> tuple[STPoint, ...]:
        return tuple(p for p, _ in self.observations)

    @property
    def values(self) -> np.ndarray:
        return np.array([y for _, y in self.observations], dtype=float)

    def times(self) -> np.ndarray:
        """Sorted unique observation times."""
        return np.unique([p.time for p, _ in self.observations])

    def restrict_to_times(self, keep: Sequence[float]) -> "SpatioTemporalDataset":
        keep_set = set(float(t) for t in keep)
        obs = tuple((p, y) for p, y in self.observations if float(p.time) in keep_set)
        if not obs:
            raise DataError("no observations left after restricting to the given times")
        return replace(self, observations=obs)


@dataclass(frozen=True)
class GPModel:
    """Kernel plus Gaussian observation noise and the two data conventions."""

    kernel: KernelSpec
    noise_variance: float = 1e-2
    mean_policy: str = "per_node_training_mean"
    time_offset: float = 1.0

    def __post_init__(self):
        if self.mean_policy not in ("zero", "per_node_training_mean"):
            raise DataError(f"unknown mean policy {self.mean_policy!r}")
        if self.time_offset < 0:
            raise DataError("time_offset must be non-negative")
        object.__setattr__(self, "noise_variance", max(float(self.noise_variance), _NOISE_FLOOR))


@dataclass(frozen=True, eq=False)
class PosteriorPrediction:
    """Posterior mean and (clipped) marginal variance; full covariance on request."""

    mean: np.ndarray
    variance: np.ndarray
    covariance: np.ndarray | None = None


@dataclass(frozen=True)
class FitOptions:
    max_iters: int = 200
    grad_tol: float = 1e-6
    restarts: int = 3
    seed: int = 0
    fd_step: float = 1e-5
    restart_low: float = 0.1
    restart_high: float = 10.0
    optimize_nu_kappa: bool = False


@dataclass(frozen=True)
class FitResult:
    """Fitted model and the log-marginal-likelihood trace of the winning start."""

    model: GPModel
    trace: tuple[float, ...]

    @property
    def lml(self) -> float:
        return self.trace[-1]


# ---------------------------------------------------------------------------
# data preparation: time shift + mean centering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Prepared:
    points: tuple[STPoint, ...]
    y: np.ndarray
    node_offsets: np.ndarray
    shift: float


def _node_offsets(model: GPModel, data: SpatioTemporalDataset) -> np.ndarray:
    n = data.graph.n_vertices
    if model.mean_policy == "zero":
        return np.zeros(n)
    sums = np.zeros(n)
    counts = np.zeros(n)
    for point, y in data.observations:
        sums[point.vertex] += y
        counts[point.vertex] += 1
    overall = sums.sum() / counts.sum()
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), overall)
    return means


def _prepare(model: GPModel, data: SpatioTemporalDataset) -> _Prepared:
    t_min = min(p.time for p, _ in data.observations)
    shift = model.time_offset - t_min
    points = tuple(STPoint(p.vertex, p.time + shift) for p, _ in data.observations)
    offsets = _node_offsets(model, data)
    y = data.values - offsets[[p.vertex for p, _ in data.observations]]
    return _Prepared(points=points, y=y, node_offsets=offsets, shift=shift)


def _shift_points(points: Sequence[STPoint], shift: float) -> tuple[STPoint, ...]:
    return tuple(STPoint(p.vertex, p.time + shift) for p in points)


# ---------------------------------------------------------------------------
# log marginal likelihood
# ---------------------------------------------------------------------------


def _lml_from_gram(gram: np.ndarray, noise_variance: float, y: np.ndarray) -> float:
    n = y.shape[0]
    noisy = gram.copy()
    noisy[np.diag_indices(n)] += noise_variance
    factor, _ = cholesky_jittered(noisy)
    alpha = scipy.linalg.cho_solve((factor, True), y, check_finite=False)
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(factor))) - 0.5 * n * _LOG_2PI)


def log_marginal_likelihood(model: GPModel, data: SpatioTemporalDataset) -> float:
    """Exact Gaussian LML ``-1/2 y^T (K + s2 I)^-1 y - 1/2 log|K + s2 I| - N/2 log 2pi``.

    When the observations form a complete vertex x time grid, the Gram is
    block-diagonal in the spatial eigenbasis and the likelihood factorizes
    into one small temporal problem per eigenmode; otherwise the dense
    N x N path is used.  Both go through the jittered Cholesky.
    """
    prep = _prepare(model, data)
    grid = _detect_grid(prep.points, data.graph.n_vertices)
    if grid is not None and model.kernel.kind in ("shek", "swek", "separable_product"):
        return _grid_lml(model.kernel, data.graph, grid, prep.y, model.noise_variance)
    gram = assemble_gram(model.kernel, data.graph, prep.points).matrix
    return _lml_from_gram(gram, model.noise_variance, prep.y)


@dataclass(frozen=True, eq=False)
class _GridStructure:
    """Complete vertex x time grid: position of (time a, vertex v) in the point list."""

    times: np.ndarray  # (T,) ascending
    index: np.ndarray  # (T, n_vertices) -> index into the point list


def _detect_grid(points: Sequence[STPoint], n_vertices: int) -> _GridStructure | None:
    by_time: dict[float, dict[int, int]] = {}
    for pos, point in enumerate(points):
        slot = by_time.setdefault(point.time, {})
        if point.vertex in slot:
            return None
        slot[point.vertex] = pos
    if len(points) != len(by_time) * n_vertices:
        return None
    times = np.array(sorted(by_time))
    index = np.empty((times.shape[0], n_vertices), dtype=int)
    for a, t in enumerate(times):
        slot = by_time[t]
        if len(slot) != n_vertices:
            return None
        for v in range(n_vertices):
            index[a, v] = slot[v]
    return _GridStructure(times=times, index=index)


def _mode_temporal_covs(
    spec: KernelSpec, graph: Graph, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Spatial eigenbasis Q and per-mode temporal covariances (n, T, T).

    Every kernel kind here is a function of one symmetric Laplacian, so the
    Gram over a full grid equals ``sum_i covs[i] (x) q_i q_i^T``.
    """
    t_col = times[:, None, None]
    s_col = times[None, :, None]
    if spec.kind in ("shek", "swek"):
        frac = fractional_from_graph(graph, spec.laplacian_variant, spec.hyper["nu"], spec.hyper["kappa"])
        scalar = _shek_eig if spec.kind == "shek" else _swek_eig
        kap = scalar(frac.shifted_eigs[None, None, :], spec.hyper["c"], spec.hyper["sigma"], t_col, s_col)
        return frac.basis, np.moveaxis(kap, 2, 0)
    if spec.kind != "separable_product":
        raise DataError(f"no factorized path for kernel kind {spec.kind!r}")
    dec = eigendecompose_symmetric(laplacian(graph, spec.laplacian_variant).matrix)
    lam = dec.eigenvalues
    sub = spec.spatial
    if sub.kind == "matern_spatial":
        rho = sub.variance * (2.0 * sub.hyper["nu"] / sub.hyper["kappa"] ** 2 + lam) ** (-sub.hyper["nu"])
    else:
        squared = lam**2
        cutoff = NULL_SPACE_RTOL * np.max(squared, initial=0.0)
        rho = np.zeros_like(squared)
        keep = squared > cutoff
        rho[keep] = sub.variance / squared[keep]
    params = dict(spec.hyper)
    params.setdefault("variance", 1.0)
    k_time = temporal_kernel(spec.temporal_kind, params, times[:, None], times[None, :])
    return dec.basis, rho[:, None, None] * k_time[None, :, :]


def _grid_lml(
    spec: KernelSpec, graph: Graph, grid: _GridStructure, y: np.ndarray, noise_variance: float
) -> float:
    basis, covs = _mode_temporal_covs(spec, graph, grid.times)
    y_modes = y[grid.index] @ basis  # (T, n): column i is eigenmode i's series
    n_times = grid.times.shape[0]
    diag = np.diag_indices(n_times)
    total = -0.5 * y.shape[0] * _LOG_2PI
    for i in range(graph.n_vertices):
        cov = covs[i].copy()
        cov[diag] += noise_variance
        factor, _ = cholesky_jittered(cov)
        alpha = scipy.linalg.cho_solve((factor, True), y_modes[:, i], check_finite=False)
        total += float(-0.5 * y_modes[:, i] @ alpha - np.sum(np.log(np.diag(factor))))
    return total


# ---------------------------------------------------------------------------
# hyperparameter fitting
# ---------------------------------------------------------------------------


def _optimizable_names(spec: KernelSpec, optimize_nu_kappa: bool) -> list[str]:
    if spec.kind in ("shek", "swek"):
        names = ["c", "sigma"]
        if optimize_nu_kappa:
            names += ["nu", "kappa"]
        return names
    if spec.kind == "separable_product":
        names = []
        if "time_lengthscale" in spec.hyper:
            names.append("time_lengthscale")
        names.append("variance")
        return names
    return ["variance"]


def _scale_name(spec: KernelSpec) -> tuple[str, int]:
    """Hyperparameter that only rescales the Gram, and the power it enters with."""
    if spec.kind in ("shek", "swek"):
        return "sigma", 2
    return "variance", 1


def _make_objective(
    model: GPModel, data: SpatioTemporalDataset, names: list[str]
) -> Callable[[np.ndarray], float]:
    """LML as a function of log-hyperparameters.

    Grid-structured observations go through the factorized per-mode path,
    which is cheap enough to recompute every evaluation.  The dense path
    caches the unit-scale Gram: the scale hyperparameter (sigma or
    variance) multiplies the Gram by a known power, so finite-difference
    steps in it (and in the noise) reuse the Gram assembled for the
    remaining hyperparameters.
    """
    prep = _prepare(model, data)
    scale_name, power = _scale_name(model.kernel)
    grid = None
    if model.kernel.kind in ("shek", "swek", "separable_product"):
        grid = _detect_grid(prep.points, data.graph.n_vertices)
    cache: OrderedDict[tuple, np.ndarray] = OrderedDict()

    def lml(theta: np.ndarray) -> float:
        with np.errstate(over="ignore"):
            raw = np.exp(np.asarray(theta, dtype=float))
        if not np.all(np.isfinite(raw)) or np.any(raw <= 0.0):
            return -np.inf
        values = {name: float(v) for name, v in zip(names, raw)}
        noise_variance = max(values.pop("noise"), _NOISE_FLOOR)
        kernel_values = values
        try:
            spec = model.kernel.with_hyper(**kernel_values)
        except DataError:
            return -np.inf

        if grid is not None:
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    value = _grid_lml(spec, data.graph, grid, prep.y, noise_variance)
            except (NumericError, DataError, OverflowError, ValueError, np.linalg.LinAlgError):
                return -np.inf
            return value if np.isfinite(value) else -np.inf

        scale = float(spec.hyper.get(scale_name, 1.0))
        key = tuple(sorted((k, v) for k, v in kernel_values.items() if k != scale_name))
        gram_unit = cache.get(key)
        if gram_unit is None:
            unit_spec = spec.with_hyper(**{scale_name: 1.0})
            try:
                gram_unit = assemble_gram(unit_spec, data.graph, prep.points).matrix
            except (NumericError, DataError, np.linalg.LinAlgError):
                return -np.inf
            if not np.all(np.isfinite(gram_unit)):
                return -np.inf
            cache[key] = gram_unit
            if len(cache) > 16:
                cache.popitem(last=False)
        try:
            value = _lml_from_gram(scale**power * gram_unit, noise_variance, prep.y)
        except (FactorizationError, OverflowError, ValueError, np.linalg.LinAlgError):
            return -np.inf
        return value if np.isfinite(value) else -np.inf

    return lml


def _fd_gradient(
    fun: Callable[[np.ndarray], float], theta: np.ndarray, step: float, f_center: float
) -> np.ndarray:
    grad = np.zeros_like(theta)
    for i in range(theta.shape[0]):
        unit = np.zeros_like(theta)
        unit[i] = step
        f_plus = fun(theta + unit)
        f_minus = fun(theta - unit)
        if np.isfinite(f_plus) and np.isfinite(f_minus):
            grad[i] = (f_plus - f_minus) / (2.0 * step)
        elif np.isfinite(f_plus):
            grad[i] = (f_plus - f_center) / step
        elif np.isfinite(f_minus):
            grad[i] = (f_center - f_minus) / step
    return grad


def _maximize(
    fun: Callable[[np.ndarray], float],
    theta0: np.ndarray,
    max_iters: int,
    grad_tol: float,
    fd_step: float,
) -> tuple[np.ndarray, list[float]] | None:
    """BFGS ascent with Armijo backtracking; trace holds accepted LML values.

    Iteration count is the number of accepted iterates including the start,
    so ``max_iters=1`` evaluates and returns the initial point.  The trace is
    non-decreasing by construction.
    """
    f0 = fun(theta0)
    if not np.isfinite(f0):
        return None
    theta = theta0.astype(float).copy()
    trace = [f0]
    dim = theta.shape[0]
    h_inv = np.eye(dim)
    grad = None
    while len(trace) < max_iters:
        if grad is None:
            grad = _fd_gradient(fun, theta, fd_step, trace[-1])
        if np.max(np.abs(grad)) < grad_tol:
            break
        direction = h_inv @ grad
        slope = float(direction @ grad)
        if slope <= 0:
            h_inv = np.eye(dim)
            direction = grad.copy()
            slope = float(grad @ grad)
            if slope == 0.0:
                break
        alpha, f_new = 1.0, -np.inf
        while alpha >= 1e-12:
            f_new = fun(theta + alpha * direction)
            if np.isfinite(f_new) and f_new >= trace[-1] + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
        else:
            break
        theta_new = theta + alpha * direction
        trace.append(f_new)
        if len(trace) >= max_iters:
            theta = theta_new
            break
        grad_new = _fd_gradient(fun, theta_new, fd_step, f_new)
        step_vec = theta_new - theta
        grad_change = -(grad_new - grad)
        curvature = float(step_vec @ grad_change)
        if curvature > 1e-12:
            rho = 1.0 / curvature
            eye = np.eye(dim)
            h_inv = (eye - rho * np.outer(step_vec, grad_change)) @ h_inv @ (
                eye - rho * np.outer(grad_change, step_vec)
            ) + rho * np.outer(step_vec, step_vec)
        theta, grad = theta_new, grad_new
    return theta, trace


def fit(model: GPModel, data: SpatioTemporalDataset, opts: FitOptions = FitOptions()) -> FitResult:
    """Maximize the LML over the kernel's optimizable hyperparameters and the noise.

    Optimization runs in log-space; SHEK/SWEK optimize (c, sigma), separable
    kernels (lengthscale, variance), always plus the noise variance.  nu and
    kappa stay fixed unless ``opts.optimize_nu_kappa``.  Returns the best of
    the model's own starting point plus ``opts.restarts`` log-uniform draws.
    """
    names = _optimizable_names(model.kernel, opts.optimize_nu_kappa) + ["noise"]
    objective = _make_objective(model, data, names)

    init = [
        model.noise_variance if name == "noise" else float(model.kernel.hyper.get(name, 1.0))
        for name in names
    ]
    starts = [np.log(np.asarray(init))]
    rng = np.random.default_rng(opts.seed)
    low, high = math.log(opts.restart_low), math.log(opts.restart_high)
    for _ in range(opts.restarts):
        starts.append(rng.uniform(low, high, size=len(names)))

    best: tuple[np.ndarray, list[float]] | None = None
    for theta0 in starts:
        result = _maximize(objective, theta0, opts.max_iters, opts.grad_tol, opts.fd_step)
        if result is not None and (best is None or result[1][-1] > best[1][-1]):
            best = result
    if best is None:
        raise NumericError("every optimization start failed to evaluate")

    theta, trace = best
    values = dict(zip(names, np.exp(theta)))
    noise_variance = values.pop("noise")
    fitted = replace(
        model,
        kernel=model.kernel.with_hyper(**{k: float(v) for k, v in values.items()}),
        noise_variance=float(noise_variance),
    )
    return FitResult(model=fitted, trace=tuple(trace))


# ---------------------------------------------------------------------------
# prediction and sampling
# ---------------------------------------------------------------------------


def predict(
    model: GPModel,
    train_data: SpatioTemporalDataset,
    query_points: Sequence[STPoint],
    full_cov: bool = False,
) -> PosteriorPrediction:
    """Standard GP posterior at the query points given the training data."""
    prep = _prepare(model, train_data)
    query = _shift_points(query_points, prep.shift)
    n_train = len(prep.points)
    gram = assemble_gram(model.kernel, train_data.graph, prep.points + query).matrix
    k_train = gram[:n_train, :n_train] + model.noise_variance * np.eye(n_train)
    k_cross = gram[:n_train, n_train:]
    k_query = gram[n_train:, n_train:]

    factor, _ = cholesky_jittered(k_train)
    alpha = scipy.linalg.cho_solve((factor, True), prep.y, check_finite=False)
    offsets = prep.node_offsets[[p.vertex for p in query_points]]
    mean = offsets + k_cross.T @ alpha
    half = scipy.linalg.solve_triangular(factor, k_cross, lower=True, check_finite=False)
    cov = k_query - half.T @ half
    variance = np.clip(np.diag(cov).copy(), 0.0, None)
    return PosteriorPrediction(mean=mean, variance=variance, covariance=cov if full_cov else None)


def sampling_moments(
    model: GPModel,
    points: Sequence[STPoint],
    condition_on: SpatioTemporalDataset | None = None,
    graph: Graph | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the process at ``points`` for sampling.

    Without conditioning data this is the zero-mean prior at the raw
    (untransformed) times, and ``graph`` must be given.  For the SHEK/SWEK
    kernels, conditioning rows at t = 0 specify the deterministic initial
    state u(0) (entering through the process mean); all rows are then
    conditioned on in the usual GP way around that mean.  Other kernels
    condition through :func:`predict`.
    """
    points = tuple(points)
    kind = model.kernel.kind

    if condition_on is None:
        if graph is None:
            raise DataError("prior sampling needs the graph")
        gram = assemble_gram(model.kernel, graph, points).matrix
        return np.zeros(len(points)), gram

    graph = condition_on.graph
    if kind in ("shek", "swek"):
        frac = fractional_from_graph(
            graph, model.kernel.laplacian_variant, model.kernel.hyper["nu"], model.kernel.hyper["kappa"]
        )
        u0 = np.zeros(graph.n_vertices)
        for point, y in condition_on.observations:
            if point.time == 0.0:
                u0[point.vertex] = y
        c = model.kernel.hyper["c"]

        def process_mean(pts: Sequence[STPoint]) -> np.ndarray:
            out = np.empty(len(pts))
            by_time: dict[float, np.ndarray] = {}
            for k, p in enumerate(pts):
                if p.time not in by_time:
                    if kind == "shek":
                        by_time[p.time] = shek_mean(frac, c, u0, p.time)
                    else:
                        by_time[p.time] = swek_mean(frac, c, u0, np.zeros_like(u0), p.time)
                out[k] = by_time[p.time][p.vertex]
            return out

        obs_points = condition_on.points
        n_obs = len(obs_points)
        gram = assemble_gram(model.kernel, graph, obs_points + points).matrix
        k_obs = gram[:n_obs, :n_obs] + model.noise_variance * np.eye(n_obs)
        k_cross = gram[:n_obs, n_obs:]
        k_query = gram[n_obs:, n_obs:]
        residual = condition_on.values - process_mean(obs_points)
        factor, _ = cholesky_jittered(k_obs)
        alpha = scipy.linalg.cho_solve((factor, True), residual, check_finite=False)
        mean = process_mean(points) + k_cross.T @ alpha
        half = scipy.linalg.solve_triangular(factor, k_cross, lower=True, check_finite=False)
        cov = k_query - half.T @ half
        return mean, cov

    pred = predict(model, condition_on, points, full_cov=True)
    return pred.mean, pred.covariance


def sample(
    model: GPModel,
    points: Sequence[STPoint],
    n_samples: int,
    seed: int,
    condition_on: SpatioTemporalDataset | None = None,
    graph: Graph | None = None,
) -> np.ndarray:
    """Draw ``n_samples`` joint samples at ``points``; deterministic per seed.

    Prior samples need ``graph``; conditioned samples take it from the
    conditioning dataset.  Returns an (n_samples, len(points)) array built
    as ``mean + z @ chol(cov).T`` from seeded standard normals.
    """
    if n_samples < 0:
        raise DataError("n_samples must be >= 0")
    mean, cov = sampling_moments(model, points, condition_on, graph)
    factor, _ = cholesky_jittered(cov)
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n_samples, len(points)))
    return mean + draws @ factor.T
