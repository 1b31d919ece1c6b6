"""Covariance kernels on graphs and Gram-matrix assembly over (vertex, time) points.

Spatial kernels come from stationary SDEs on the graph (Laplacian kernel,
graph Matern), temporal base kernels combine with them as separable
products, and the non-separable spatio-temporal kernels are the exact
cross-covariances of the stochastic heat equation (SHEK) and stochastic
wave equation (SWEK) driven by the shifted fractional Laplacian.

All SHEK/SWEK matrix expressions are evaluated per-eigenvalue on the shared
spectral decomposition of the operator, so assembling an N x N Gram over T
distinct times costs one eigendecomposition plus O(T^2 n^2) scalar work.

Cross-covariance convention: ``Cov[u(t), u(s)]_ij = E[(u_i(t) - mu_i(t)) *
(u_j(s) - mu_j(s))]`` with the deterministic initial state at t = 0, so both
process kernels vanish identically when min(t, s) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .exceptions import DataError, NumericError
from .graphs import (
    FractionalLaplacian,
    Graph,
    LAPLACIAN_VARIANTS,
    LaplacianMatrix,
    fractional_from_graph,
    fractional_laplacian,
    laplacian,
)
from .spectral import eigendecompose_symmetric, matrix_function, pseudoinverse

KERNEL_KINDS = ("laplacian_spatial", "matern_spatial", "separable_product", "shek", "swek")
TEMPORAL_KINDS = ("rbf", "exponential", "brownian", "cosine")

# Largest (n_times^2 * n_vertices^2) block tensor assembled in one shot;
# beyond this the Gram falls back to a per-eigenvalue accumulation loop.
_BLOCK_TENSOR_LIMIT = 60_000_000


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class STPoint:
    """A (vertex index, time) input location; time counts from the process origin."""

    vertex: int
    time: float

    def __post_init__(self):
        if self.vertex < 0:
            raise DataError(f"vertex index must be non-negative, got {self.vertex}")
        if not np.isfinite(self.time) or self.time < 0:
            raise DataError(f"time must be finite and >= 0, got {self.time}")


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Kernel matrix over an ordered list of points."""

    matrix: np.ndarray
    points: tuple[STPoint, ...]

    def __post_init__(self):
        self.matrix.setflags(write=False)
        n = len(self.points)
        if self.matrix.shape != (n, n):
            raise DataError("Gram matrix shape does not match the point list")


@dataclass(frozen=True)
class KernelSpec:
    """Tagged description of a kernel with strictly positive hyperparameters.

    ``kind`` selects the family; ``hyper`` holds the numbers it needs:

    - ``laplacian_spatial``: optional ``variance``
    - ``matern_spatial``: ``nu``, ``kappa``, optional ``variance``
    - ``separable_product``: a ``spatial`` sub-spec plus ``temporal_kind`` and
      ``time_lengthscale`` (not used by the brownian temporal kernel) and
      optional ``variance``
    - ``shek`` / ``swek``: ``c``, ``sigma``, ``nu``, ``kappa``

    ``laplacian_variant`` picks which Laplacian backs the spatial operator.
    """

    kind: str
    hyper: Mapping[str, float]
    temporal_kind: str | None = None
    laplacian_variant: str = "unnormalized"
    spatial: "KernelSpec | None" = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DataError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        if self.laplacian_variant not in LAPLACIAN_VARIANTS:
            raise DataError(f"unknown Laplacian variant {self.laplacian_variant!r}")
        hyper = dict(self.hyper)
        for name, value in hyper.items():
            if not (np.isfinite(value) and value > 0):
                raise DataError(f"hyperparameter {name!r} must be strictly positive, got {value}")
        object.__setattr__(self, "hyper", MappingProxyType(hyper))

        required: tuple[str, ...] = ()
        if self.kind == "matern_spatial":
            required = ("nu", "kappa")
        elif self.kind in ("shek", "swek"):
            required = ("c", "sigma", "nu", "kappa")
        elif self.kind == "separable_product":
            if self.spatial is None or self.spatial.kind not in ("laplacian_spatial", "matern_spatial"):
                raise DataError("separable_product needs a spatial sub-spec (laplacian or matern)")
            if self.temporal_kind not in TEMPORAL_KINDS:
                raise DataError(
                    f"separable_product needs temporal_kind in {TEMPORAL_KINDS}, got {self.temporal_kind!r}"
                )
            if self.temporal_kind != "brownian":
                required = ("time_lengthscale",)
        missing = [name for name in required if name not in hyper]
        if missing:
            raise DataError(f"kernel kind {self.kind!r} is missing hyperparameters {missing}")

    def with_hyper(self, **updates: float) -> "KernelSpec":
        """Copy of the spec with some hyperparameters replaced."""
        merged = dict(self.hyper)
        merged.update(updates)
        return replace(self, hyper=merged)

    @property
    def variance(self) -> float:
        return float(self.hyper.get("variance", 1.0))


# ---------------------------------------------------------------------------
# spatial kernels
# ---------------------------------------------------------------------------


def laplacian_kernel(lap: LaplacianMatrix | np.ndarray) -> np.ndarray:
    """Stationary covariance of the Laplace SDE on the graph: ``(L^T L)^+``."""
    matrix = lap.matrix if isinstance(lap, LaplacianMatrix) else np.asarray(lap, dtype=float)
    return pseudoinverse(matrix.T @ matrix)


def matern_graph_kernel(lap: LaplacianMatrix | np.ndarray, nu: float, kappa: float) -> np.ndarray:
    """Graph Matern covariance ``(2 nu / kappa^2 I + L)^(-nu)``; strictly PD."""
    frac = fractional_laplacian(lap, nu, kappa)
    q = frac.basis
    out = (q * frac.shifted_eigs**-2.0) @ q.T
    return (out + out.T) / 2.0


def heat_semigroup(lap: LaplacianMatrix | np.ndarray, c: float, t: float) -> np.ndarray:
    """Deterministic diffusion propagator ``exp(-c L t)``.

    Symmetric Laplacians go through the spectrum; asymmetric ones (e.g. the
    random-walk variant) through a dense matrix exponential.  Row-stochastic
    for the random-walk Laplacian.
    """
    if t < 0:
        raise DataError(f"time must be >= 0, got {t}")
    if c <= 0:
        raise DataError(f"diffusivity must be positive, got {c}")
    matrix = lap.matrix if isinstance(lap, LaplacianMatrix) else np.asarray(lap, dtype=float)
    symmetric = lap.symmetric if isinstance(lap, LaplacianMatrix) else bool(
        np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * max(np.max(np.abs(matrix)), 1.0))
    )
    if symmetric:
        dec = eigendecompose_symmetric(matrix)
        return matrix_function(dec, lambda lam: np.exp(-c * t * lam))
    return scipy.linalg.expm(-c * t * matrix)


def heat_random_walk_check(lap_rw: LaplacianMatrix | np.ndarray, t: float, k_terms: int) -> np.ndarray:
    """Poisson-weighted random-walk series for the heat kernel.

    ``exp(-L_rw t) = sum_k (t^k e^-t / k!) P^k`` with ``P = I - L_rw`` the
    random-walk matrix; truncated after ``k_terms`` terms.  Converges to
    ``heat_semigroup(L_rw, 1, t)`` as the term count grows.
    """
    if k_terms < 1:
        raise DataError(f"k_terms must be >= 1, got {k_terms}")
    if t < 0:
        raise DataError(f"time must be >= 0, got {t}")
    matrix = lap_rw.matrix if isinstance(lap_rw, LaplacianMatrix) else np.asarray(lap_rw, dtype=float)
    n = matrix.shape[0]
    walk = np.eye(n) - matrix
    power = np.eye(n)
    weight = math.exp(-t)
    total = weight * power
    for k in range(1, k_terms):
        power = power @ walk
        weight *= t / k
        total = total + weight * power
    return total


# ---------------------------------------------------------------------------
# stochastic heat equation kernel (SHEK)
# ---------------------------------------------------------------------------


def _shek_eig(mu: np.ndarray, c: float, sigma: float, t, s) -> np.ndarray:
    """Scalar SHEK covariance per eigenvalue; broadcasts over time grids.

    ``sigma^2/(2 c mu) * (exp(-c mu |t-s|) - exp(-c mu (t+s)))`` written with
    ``expm1`` so the near-zero modes of a weakly shifted Laplacian keep full
    precision (the mu -> 0 limit is the Brownian ``sigma^2 min(t, s)``).
    """
    gap = np.abs(t - s)
    m = np.minimum(t, s)
    return sigma**2 / (2.0 * c) * np.exp(-c * mu * gap) * (-np.expm1(-2.0 * c * mu * m)) / mu


def shek_cov(frac: FractionalLaplacian, c: float, sigma: float, t: float, s: float) -> np.ndarray:
    """SHEK cross-covariance ``Cov[u(t), u(s)]`` for a symmetric operator.

    Equals ``sigma^2/(2c) (e^{-c Lt |t-s|} - e^{-c Lt (t+s)}) Lt^{-1}``; the
    zero matrix whenever t = 0 or s = 0 (deterministic initial condition).
    """
    _check_times(t, s)
    _check_positive(c=c, sigma=sigma)
    vals = _shek_eig(frac.shifted_eigs, c, sigma, t, s)
    q = frac.basis
    out = (q * vals) @ q.T
    return (out + out.T) / 2.0


def shek_mean(frac: FractionalLaplacian, c: float, u0: np.ndarray, t: float) -> np.ndarray:
    """Process mean ``exp(-c Lt t) u(0)``."""
    if t < 0:
        raise DataError(f"time must be >= 0, got {t}")
    _check_positive(c=c)
    u0 = np.asarray(u0, dtype=float)
    q = frac.basis
    return q @ (np.exp(-c * frac.shifted_eigs * t) * (q.T @ u0))


def shek_matrix_noise_cov(
    frac: FractionalLaplacian, c: float, sigma_matrix: np.ndarray, t: float, s: float
) -> np.ndarray:
    """SHEK cross-covariance with matrix-scaled noise ``Sigma dW_t``.

    In the operator's eigenbasis, for t >= s,
    ``C_ij = (S_ij / (c (mu_i + mu_j))) (exp(-c mu_i (t-s)) - exp(-c (mu_i t + mu_j s)))``
    with ``S = Q^T Sigma Sigma^T Q``; for t < s the transpose of the swapped
    arguments.  With ``Sigma = sigma I`` this collapses to :func:`shek_cov`.
    """
    _check_times(t, s)
    _check_positive(c=c)
    if t < s:
        return shek_matrix_noise_cov(frac, c, sigma_matrix, s, t).T
    sigma_matrix = np.asarray(sigma_matrix, dtype=float)
    mu = frac.shifted_eigs
    q = frac.basis
    s_eig = q.T @ (sigma_matrix @ sigma_matrix.T) @ q
    pair_sum = mu[:, None] + mu[None, :]
    # exp(-c mu_i (t-s)) - exp(-c(mu_i t + mu_j s)) = exp(-c mu_i (t-s)) * -expm1(-c s (mu_i + mu_j))
    core = np.exp(-c * mu * (t - s))[:, None] * (-np.expm1(-c * s * pair_sum))
    c_matrix = s_eig * core / (c * pair_sum)
    return q @ c_matrix @ q.T


def _sde_noise_gramian(gamma: np.ndarray, m: float) -> np.ndarray:
    """``W(m) = int_0^m exp(-G tau) exp(-G^T tau) d tau`` for a square matrix G.

    Computed stably for any spectrum by a block matrix exponential on a
    subinterval short enough that nothing overflows, then doubled with
    ``W(2a) = W(a) + e^{-G a} W(a) e^{-G^T a}``.
    """
    n = gamma.shape[0]
    norm = np.linalg.norm(gamma, 2)
    doublings = 0
    if norm * m > 0.5:
        doublings = int(np.ceil(np.log2(norm * m / 0.5)))
    a = m / 2.0**doublings
    block = np.block([[-gamma, np.eye(n)], [np.zeros((n, n)), gamma.T]])
    exp_block = scipy.linalg.expm(block * a)
    w = exp_block[:n, n:] @ scipy.linalg.expm(-gamma.T * a)
    decay = scipy.linalg.expm(-gamma * a)
    for _ in range(doublings):
        w = w + decay @ w @ decay.T
        decay = decay @ decay
    return w


def shek_cov_general(
    lt_matrix: np.ndarray, c: float, sigma: float, t: float, s: float
) -> np.ndarray:
    """SHEK cross-covariance for a general (possibly asymmetric) operator.

    Evaluates the Ito integral exactly:
    ``Cov[u(t), u(s)] = sigma^2 e^{-G (t-m)} W(m) e^{-G^T (s-m)}`` with
    ``G = c Lt``, ``m = min(t, s)`` and ``W`` from :func:`_sde_noise_gramian`.
    When ``Lt`` commutes with its transpose this equals the closed form
    ``(sigma^2/c) e^{-c Lt t - c Lt^T s} (e^{c (Lt + Lt^T) m} - I)(Lt + Lt^T)^{-1}``
    and so reduces to :func:`shek_cov` for symmetric operators; for non-normal
    operators only the integral form matches the simulated process.
    """
    _check_times(t, s)
    _check_positive(c=c, sigma=sigma)
    lt_matrix = np.asarray(lt_matrix, dtype=float)
    n = lt_matrix.shape[0]
    m = min(t, s)
    if m == 0.0:
        return np.zeros((n, n))
    gamma = c * lt_matrix
    w = _sde_noise_gramian(gamma, m)
    left = scipy.linalg.expm(-gamma * (t - m))
    right = scipy.linalg.expm(-gamma.T * (s - m))
    return sigma**2 * (left @ w @ right)


def lyapunov_stationary(lt_matrix: np.ndarray, sigma: np.ndarray | float) -> np.ndarray:
    """Stationary covariance ``C`` solving ``Lt C + C Lt^T = Sigma Sigma^T``.

    Requires the spectrum of ``Lt`` in the open right half-plane (no
    eigenvalue pair may sum to zero).  The result is symmetrized and checked
    against the equation to a 1e-8 relative residual.
    """
    lt_matrix = np.asarray(lt_matrix, dtype=float)
    n = lt_matrix.shape[0]
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim == 0:
        sigma = float(sigma) * np.eye(n)
    rhs = sigma @ sigma.T
    eigs = np.linalg.eigvals(lt_matrix)
    pair_sums = np.abs(eigs[:, None] + np.conj(eigs)[None, :])
    scale = max(np.max(np.abs(eigs)), 1e-30)
    if np.min(pair_sums) <= 1e-12 * scale:
        raise NumericError(
            "Lyapunov equation is singular: an eigenvalue pair of Lt sums to ~0"
        )
    solution = scipy.linalg.solve_continuous_lyapunov(lt_matrix, rhs)
    solution = (solution + solution.T) / 2.0
    residual = np.max(np.abs(lt_matrix @ solution + solution @ lt_matrix.T - rhs))
    if residual > 1e-8 * max(np.max(np.abs(rhs)), np.finfo(float).tiny):
        raise NumericError(f"Lyapunov residual {residual:.3e} exceeds tolerance")
    return solution


# ---------------------------------------------------------------------------
# wave equation and stochastic wave equation kernel (SWEK)
# ---------------------------------------------------------------------------


def wave_solution(
    lap: LaplacianMatrix | np.ndarray, c: float, u0: np.ndarray, v0: np.ndarray, t: float
) -> np.ndarray:
    """Deterministic graph wave at time t from position u0 and velocity v0.

    Solved mode-by-mode in the Laplacian's eigenbasis: oscillation
    ``cos(c sqrt(lam) t) y0 + sin(c sqrt(lam) t)/(c sqrt(lam)) v0`` for
    positive modes, and the exact free motion ``y0 + v0 t`` for zero modes.
    """
    if t < 0:
        raise DataError(f"time must be >= 0, got {t}")
    _check_positive(c=c)
    matrix = lap.matrix if isinstance(lap, LaplacianMatrix) else np.asarray(lap, dtype=float)
    dec = eigendecompose_symmetric(matrix)
    lam = dec.eigenvalues
    q = dec.basis
    y0 = q.T @ np.asarray(u0, dtype=float)
    w0 = q.T @ np.asarray(v0, dtype=float)
    cutoff = 1e-10 * max(np.max(np.abs(lam), initial=0.0), 1.0)
    zero_mode = lam <= cutoff
    theta = c * np.sqrt(np.where(zero_mode, 1.0, lam))
    y = np.where(
        zero_mode,
        y0 + w0 * t,
        np.cos(theta * t) * y0 + np.sin(theta * t) / theta * w0,
    )
    return q @ y


def _swek_eig(mu: np.ndarray, c: float, sigma: float, t, s) -> np.ndarray:
    """Scalar SWEK covariance per eigenvalue of the operator.

    For theta = c sqrt(mu):
    ``sigma^2/(2 theta^2) (min(t,s) cos(theta (t-s)) - cos(theta max) sin(theta min) / theta)``,
    the Ito integral ``(sigma/theta)^2 int_0^min sin(theta(t-x)) sin(theta(s-x)) dx``.
    The theta -> 0 limit is the integrated-Brownian covariance
    ``sigma^2 (t s m - (t+s) m^2/2 + m^3/3)``; a series expansion takes over
    below theta*max(t,s) = 1e-3 where the direct form loses to cancellation.
    """
    theta = c * np.sqrt(mu)
    m = np.minimum(t, s)
    big = np.maximum(t, s)
    gap = np.abs(t - s)
    small = theta * big < 1e-3
    theta_safe = np.where(small, 1.0, theta)
    with np.errstate(invalid="ignore"):
        direct = (
            sigma**2
            / (2.0 * theta_safe**2)
            * (m * np.cos(theta_safe * gap) - np.cos(theta_safe * big) * np.sin(theta_safe * m) / theta_safe)
        )
    lead = m**3 / 6.0 + big**2 * m / 2.0 - m * gap**2 / 2.0
    correction = (
        m * gap**4 / 24.0 - m**5 / 120.0 - big**2 * m**3 / 12.0 - big**4 * m / 24.0
    )
    series = sigma**2 / 2.0 * (lead + theta**2 * correction)
    return np.where(small, series, direct)


def swek_cov(frac: FractionalLaplacian, c: float, sigma: float, t: float, s: float) -> np.ndarray:
    """SWEK cross-covariance ``Cov[u(t), u(s)]``; zero matrix when min(t,s) = 0.

    Oscillates in the time gap while the variance grows like min(t, s)
    (Brownian-style accumulation of the driving noise).
    """
    _check_times(t, s)
    _check_positive(c=c, sigma=sigma)
    vals = _swek_eig(frac.shifted_eigs, c, sigma, t, s)
    q = frac.basis
    out = (q * vals) @ q.T
    return (out + out.T) / 2.0


def swek_mean(
    frac: FractionalLaplacian, c: float, u0: np.ndarray, v0: np.ndarray, t: float
) -> np.ndarray:
    """Mean of the stochastic wave process; no zero modes since the operator is PD."""
    if t < 0:
        raise DataError(f"time must be >= 0, got {t}")
    _check_positive(c=c)
    theta = c * np.sqrt(frac.shifted_eigs)
    q = frac.basis
    y0 = q.T @ np.asarray(u0, dtype=float)
    w0 = q.T @ np.asarray(v0, dtype=float)
    return q @ (np.cos(theta * t) * y0 + np.sin(theta * t) / theta * w0)


# ---------------------------------------------------------------------------
# temporal kernels and Gram assembly
# ---------------------------------------------------------------------------


def temporal_kernel(kind: str, params: Mapping[str, float], t, s):
    """Base temporal kernels; broadcasts over array arguments.

    rbf ``v exp(-(t-s)^2 / 2 l^2)``; exponential ``v exp(-|t-s| / l)``;
    brownian ``v min(t, s)`` (t, s >= 0); cosine ``v cos(omega (t-s))``.
    """
    if kind not in TEMPORAL_KINDS:
        raise DataError(f"unknown temporal kernel {kind!r}; expected one of {TEMPORAL_KINDS}")
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    variance = float(params.get("variance", 1.0))
    if kind == "rbf":
        ell = _param(params, "time_lengthscale")
        with np.errstate(over="ignore"):
            scaled = (t - s) / ell
            out = variance * np.exp(-0.5 * scaled**2)
    elif kind == "exponential":
        ell = _param(params, "time_lengthscale")
        out = variance * np.exp(-np.abs(t - s) / ell)
    elif kind == "brownian":
        if np.any(t < 0) or np.any(s < 0):
            raise DataError("brownian temporal kernel requires t, s >= 0")
        out = variance * np.minimum(t, s)
    else:
        omega = float(params["omega"]) if "omega" in params else 1.0 / _param(params, "time_lengthscale")
        out = variance * np.cos(omega * (t - s))
    return out if out.ndim else float(out)


def _spatial_gram(spec: KernelSpec, graph: Graph) -> np.ndarray:
    lap = laplacian(graph, spec.laplacian_variant)
    if spec.kind == "laplacian_spatial":
        return spec.variance * laplacian_kernel(lap)
    if spec.kind == "matern_spatial":
        return spec.variance * matern_graph_kernel(lap, spec.hyper["nu"], spec.hyper["kappa"])
    raise DataError(f"{spec.kind!r} is not a spatial kernel kind")


def _process_blocks(spec: KernelSpec, graph: Graph, times: np.ndarray) -> np.ndarray:
    """Cross-covariance blocks C[a, b] = Cov[u(times[a]), u(times[b])] for SHEK/SWEK."""
    frac = fractional_from_graph(graph, spec.laplacian_variant, spec.hyper["nu"], spec.hyper["kappa"])
    scalar = _shek_eig if spec.kind == "shek" else _swek_eig
    grid_t = times[:, None, None]
    grid_s = times[None, :, None]
    kappa_eig = scalar(frac.shifted_eigs[None, None, :], spec.hyper["c"], spec.hyper["sigma"], grid_t, grid_s)
    q = frac.basis
    n = graph.n_vertices
    n_times = times.shape[0]
    if n_times**2 * n**2 <= _BLOCK_TENSOR_LIMIT:
        return np.einsum("xi,abi,yi->abxy", q, kappa_eig, q, optimize=True)
    blocks = np.empty((n_times, n_times, n, n))
    for a in range(n_times):
        for b in range(n_times):
            blocks[a, b] = (q * kappa_eig[a, b]) @ q.T
    return blocks


def assemble_gram(spec: KernelSpec, graph: Graph, points: Sequence[STPoint]) -> GramMatrix:
    """N x N Gram matrix of the kernel over the given (vertex, time) points.

    Separable entries factor as spatial * temporal; SHEK/SWEK entries index
    the per-time-pair cross-covariance blocks at the two vertices, computed
    once per unique time pair.
    """
    points = tuple(points)
    if not points:
        raise DataError("need at least one point")
    v_idx = np.array([p.vertex for p in points], dtype=int)
    t_val = np.array([p.time for p in points], dtype=float)
    if np.any(v_idx >= graph.n_vertices):
        bad = v_idx[v_idx >= graph.n_vertices][0]
        raise DataError(f"point references vertex {bad} outside the graph")

    if spec.kind in ("laplacian_spatial", "matern_spatial"):
        spatial = _spatial_gram(spec, graph)
        gram = spatial[np.ix_(v_idx, v_idx)]
    elif spec.kind == "separable_product":
        spatial = _spatial_gram(spec.spatial, graph)
        params = dict(spec.hyper)
        params.setdefault("variance", 1.0)
        temporal = temporal_kernel(spec.temporal_kind, params, t_val[:, None], t_val[None, :])
        gram = spatial[np.ix_(v_idx, v_idx)] * temporal
    else:
        times, t_inverse = np.unique(t_val, return_inverse=True)
        blocks = _process_blocks(spec, graph, times)
        gram = blocks[t_inverse[:, None], t_inverse[None, :], v_idx[:, None], v_idx[None, :]]

    gram = (gram + gram.T) / 2.0
    return GramMatrix(matrix=gram, points=points)


def _check_times(t: float, s: float) -> None:
    if t < 0 or s < 0:
        raise DataError(f"process kernels need t, s >= 0, got t={t}, s={s}")


def _check_positive(**named: float) -> None:
    for name, value in named.items():
        if not (np.isfinite(value) and value > 0):
            raise DataError(f"{name} must be strictly positive, got {value}")


def _param(params: Mapping[str, float], name: str) -> float:
    if name not in params:
        raise DataError(f"temporal kernel parameter {name!r} is required")
    return float(params[name])
