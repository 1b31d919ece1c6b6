"""Euler-Maruyama integration of the graph heat and wave SDEs.

The path ensembles produced here are the independent Monte Carlo oracle for
every analytic covariance in :mod:`graphspde.kernels`: the simulator never
touches a kernel formula, only the SDE drift and diffusion.

Reproducibility: each path owns a counter-based RNG stream keyed by
``(seed, path_index)``, so chunking or parallelizing over paths cannot
change the numbers.  Stability guards are hard preconditions, not silent
clamps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, StabilityError

_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Sample paths on a uniform saved time grid.

    ``paths`` has shape (n_paths, len(times), n_vertices).  ``dt`` is the
    integration step; the saved grid step is ``dt * save_stride`` when the
    simulation subsamples its output.
    """

    times: np.ndarray
    paths: np.ndarray
    seed: int
    dt: float

    def __post_init__(self):
        self.times.setflags(write=False)
        self.paths.setflags(write=False)
        steps = np.diff(self.times)
        if np.any(steps <= 0) or (steps.size and not np.allclose(steps, steps[0], rtol=1e-9)):
            raise DataError("saved time grid must be strictly increasing and uniform")
        if not np.all(np.isfinite(self.paths)):
            raise DataError("paths contain non-finite values")

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    def index_of_time(self, t: float) -> int:
        """Index of ``t`` on the saved grid (must lie on it)."""
        idx = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[idx], t, rtol=0.0, atol=1e-9 * max(abs(t), 1.0)):
            raise DataError(f"time {t} is not on the saved grid")
        return idx


def _plan_steps(dt: float, t_end: float, save_stride: int) -> tuple[int, np.ndarray]:
    if dt <= 0:
        raise DataError(f"dt must be positive, got {dt}")
    if save_stride < 1:
        raise DataError(f"save_stride must be >= 1, got {save_stride}")
    steps = int(round(t_end / dt))
    if steps < 1 or not np.isclose(steps * dt, t_end, rtol=1e-9):
        raise DataError(f"t_end={t_end} is not a positive multiple of dt={dt}")
    if steps % save_stride != 0:
        raise DataError(f"save_stride={save_stride} must divide the {steps} integration steps")
    times = np.arange(0, steps + 1, save_stride) * dt
    return steps, times


def _spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def _path_noise(seed: int, first_path: int, n_chunk: int, steps: int, n: int) -> np.ndarray:
    """Standard-normal increments for a chunk of paths, one stream per path."""
    noise = np.empty((n_chunk, steps, n))
    for offset in range(n_chunk):
        rng = np.random.default_rng([seed, first_path + offset])
        noise[offset] = rng.standard_normal((steps, n))
    return noise


def simulate_heat(
    lt_matrix: np.ndarray,
    c: float,
    noise: float | np.ndarray,
    u0: np.ndarray,
    dt: float,
    t_end: float,
    n_paths: int,
    seed: int,
    save_stride: int = 1,
) -> PathEnsemble:
    """Euler-Maruyama paths of ``du = -c Lt u dt + Noise dW_t``.

    ``noise`` is either a scalar sigma or an (n, n) matrix Sigma.  The
    explicit step ``u += -c Lt u dt + Noise sqrt(dt) xi`` requires
    ``dt * c * rho(Lt) < 0.5`` (spectral radius), otherwise
    :class:`StabilityError` is raised.
    """
    lt_matrix = np.asarray(lt_matrix, dtype=float)
    n = lt_matrix.shape[0]
    u0 = np.broadcast_to(np.asarray(u0, dtype=float), (n,))
    if c <= 0 or n_paths < 1:
        raise DataError("need c > 0 and n_paths >= 1")
    radius = _spectral_radius(lt_matrix)
    if dt * c * radius >= 0.5:
        raise StabilityError(
            f"explicit heat step unstable: dt * c * rho(Lt) = {dt * c * radius:.3f} >= 0.5"
        )
    steps, times = _plan_steps(dt, t_end, save_stride)

    noise = np.asarray(noise, dtype=float)
    scalar_noise = noise.ndim == 0
    sqrt_dt = np.sqrt(dt)
    drift = c * dt * lt_matrix

    out = np.empty((n_paths, times.shape[0], n))
    for start in range(0, n_paths, _CHUNK):
        stop = min(start + _CHUNK, n_paths)
        xi = _path_noise(seed, start, stop - start, steps, n)
        u = np.tile(u0, (stop - start, 1))
        out[start:stop, 0] = u
        saved = 1
        for k in range(steps):
            if scalar_noise:
                kick = float(noise) * sqrt_dt * xi[:, k]
            else:
                kick = sqrt_dt * xi[:, k] @ noise.T
            u = u - u @ drift.T + kick
            if (k + 1) % save_stride == 0:
                out[start:stop, saved] = u
                saved += 1
    return PathEnsemble(times=times, paths=out, seed=int(seed), dt=float(dt))


def simulate_wave(
    lt_matrix: np.ndarray,
    c: float,
    sigma: float,
    u0: np.ndarray,
    v0: np.ndarray,
    dt: float,
    t_end: float,
    n_paths: int,
    seed: int,
    save_stride: int = 1,
) -> PathEnsemble:
    """Paths of ``d^2u/dt^2 = -c^2 Lt u + sigma dW_t`` via the (u, v) system.

    Semi-implicit Euler-Maruyama on the augmented state: noise enters the
    velocity equation, and the position update uses the freshly updated
    velocity.  Requires ``c^2 * rho(Lt) * dt^2 < 0.1``.
    """
    lt_matrix = np.asarray(lt_matrix, dtype=float)
    n = lt_matrix.shape[0]
    u0 = np.broadcast_to(np.asarray(u0, dtype=float), (n,))
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), (n,))
    if c <= 0 or n_paths < 1:
        raise DataError("need c > 0 and n_paths >= 1")
    radius = _spectral_radius(lt_matrix)
    if c**2 * radius * dt**2 >= 0.1:
        raise StabilityError(
            f"wave step unstable: c^2 * rho(Lt) * dt^2 = {c**2 * radius * dt**2:.3g} >= 0.1"
        )
    steps, times = _plan_steps(dt, t_end, save_stride)
    sqrt_dt = np.sqrt(dt)
    accel = c**2 * dt * lt_matrix

    out = np.empty((n_paths, times.shape[0], n))
    for start in range(0, n_paths, _CHUNK):
        stop = min(start + _CHUNK, n_paths)
        xi = _path_noise(seed, start, stop - start, steps, n)
        u = np.tile(u0, (stop - start, 1))
        v = np.tile(v0, (stop - start, 1))
        out[start:stop, 0] = u
        saved = 1
        for k in range(steps):
            v = v - u @ accel.T + sigma * sqrt_dt * xi[:, k]
            u = u + v * dt
            if (k + 1) % save_stride == 0:
                out[start:stop, saved] = u
                saved += 1
    return PathEnsemble(times=times, paths=out, seed=int(seed), dt=float(dt))


def empirical_cross_cov(
    ens: PathEnsemble, t_index: int, s_index: int
) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased sample cross-covariance between two saved times, with its SE.

    Returns ``(cov, se)`` where ``cov[i, j]`` estimates
    ``Cov[u_i(t), u_j(s)]`` across paths and ``se[i, j]`` is the Monte Carlo
    standard error of that entry (std of the centered pathwise products over
    sqrt(n_paths)).
    """
    p = ens.n_paths
    if p < 2:
        raise DataError("need at least two paths for a covariance estimate")
    x = ens.paths[:, t_index, :]
    y = ens.paths[:, s_index, :]
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    cov = xc.T @ yc / (p - 1)
    products = xc[:, :, None] * yc[:, None, :]
    se = products.std(axis=0, ddof=1) / np.sqrt(p)
    return cov, se
