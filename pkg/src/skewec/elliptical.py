"""Elliptically contoured baselines partitioned into a conditioning block X
and a modulated block Y (the last ``m`` coordinates)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
from scipy import linalg, special, stats

from .batch import SampleBatch
from .errors import NotPositiveDefiniteError, ParameterError

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class Normal:
    name = "normal"

    def log_radial(self, q, dim):
        """Log density of a standard spherical law in ``dim`` dimensions at squared radius q."""
        return -0.5 * q - 0.5 * dim * LOG_2PI

    def radius_quantile(self, u, dim):
        return np.sqrt(stats.chi2.ppf(u, dim))

    def mixing_scale(self, rng, n):
        return np.ones(n)


@dataclass(frozen=True)
class StudentT:
    dof: float

    name = "student_t"

    def __post_init__(self):
        if not (np.isfinite(self.dof) and self.dof > 0):
            raise ParameterError(f"StudentT dof must be positive, got {self.dof}")

    def log_radial(self, q, dim):
        nu = self.dof
        return (
            special.gammaln(0.5 * (nu + dim))
            - special.gammaln(0.5 * nu)
            - 0.5 * dim * np.log(nu * np.pi)
            - 0.5 * (nu + dim) * np.log1p(q / nu)
        )

    def radius_quantile(self, u, dim):
        # |z|^2 / dim ~ F(dim, nu)
        return np.sqrt(dim * stats.f.ppf(u, dim, self.dof))

    def mixing_scale(self, rng, n):
        return np.sqrt(self.dof / rng.chisquare(self.dof, size=n))


Generator = Union[Normal, StudentT]


def _cholesky(matrix: np.ndarray, what: str) -> np.ndarray:
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{what} is not positive definite") from exc


@dataclass(frozen=True)
class ConditionalMoments:
    """Location and scale of Y given X = x: ``m_Y(x) = beta0 + beta @ x``."""

    beta0: np.ndarray
    beta: np.ndarray
    sigma22_1: np.ndarray

    def mean(self, x: np.ndarray) -> np.ndarray:
        return self.beta0 + np.asarray(x, dtype=float) @ self.beta.T


@dataclass(frozen=True, eq=False)
class EllipticalBaseline:
    """EC_d(mu, sigma, generator) with the last ``m`` coordinates forming Y."""

    mu: np.ndarray
    sigma: np.ndarray
    generator: Generator = Normal()
    m: int = 1

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float)).copy()
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float)).copy()
        d = mu.shape[0]
        if mu.ndim != 1 or sigma.shape != (d, d):
            raise ParameterError(f"mu has length {d} but sigma has shape {sigma.shape}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ParameterError("mu and sigma must be finite")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12 * max(1.0, np.abs(sigma).max())):
            raise ParameterError("sigma must be symmetric")
        if not (isinstance(self.m, (int, np.integer)) and 1 <= self.m <= d - 1):
            raise ParameterError(f"partition m={self.m} must satisfy 1 <= m <= d-1 with d={d}")
        sigma = 0.5 * (sigma + sigma.T)
        chol = _cholesky(sigma, "sigma")
        mu.flags.writeable = False
        sigma.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "_chol", chol)

    @property
    def d(self) -> int:
        return self.mu.shape[0]

    @property
    def p(self) -> int:
        """Dimension of the X block."""
        return self.d - self.m

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    @cached_property
    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    def split(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        points = np.asarray(points, dtype=float)
        return points[..., : self.p], points[..., self.p :]

    def mahalanobis_sq(self, points: np.ndarray) -> np.ndarray:
        diff = np.asarray(points, dtype=float) - self.mu
        shape = diff.shape[:-1]
        z = linalg.solve_triangular(self._chol, diff.reshape(-1, self.d).T, lower=True)
        return np.sum(z * z, axis=0).reshape(shape)

    def logpdf(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.d:
            raise ValueError(f"expected points with last axis {self.d}, got shape {points.shape}")
        q = self.mahalanobis_sq(points)
        return self.generator.log_radial(q, self.d) - 0.5 * self.log_det

    def pdf(self, points: np.ndarray) -> np.ndarray:
        return np.exp(self.logpdf(points))

    @cached_property
    def x_marginal(self) -> "_Block":
        p = self.p
        return _Block(self.mu[:p], self.sigma[:p, :p], self.generator)

    @cached_property
    def conditional(self) -> ConditionalMoments:
        p = self.p
        mu_x, mu_y = self.mu[:p], self.mu[p:]
        s11, s12 = self.sigma[:p, :p], self.sigma[:p, p:]
        s22 = self.sigma[p:, p:]
        c11 = _cholesky(s11, "Sigma_11")
        # beta = Sigma_21 Sigma_11^{-1}
        beta = linalg.cho_solve((c11, True), s12).T
        beta0 = mu_y - beta @ mu_x
        s22_1 = s22 - beta @ s12
        s22_1 = 0.5 * (s22_1 + s22_1.T)
        _cholesky(s22_1, "sigma_22.1")
        return ConditionalMoments(beta0=beta0, beta=beta, sigma22_1=s22_1)

    @cached_property
    def residual_chol(self) -> np.ndarray:
        """Lower Cholesky factor of sigma_22.1."""
        return _cholesky(self.conditional.sigma22_1, "sigma_22.1")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, self.d))
        z = z @ self._chol.T
        z *= self.generator.mixing_scale(rng, n)[:, None]
        return z + self.mu


@dataclass(frozen=True, eq=False)
class _Block:
    """A lower-dimensional EC law sharing the parent's generator."""

    mu: np.ndarray
    sigma: np.ndarray
    generator: Generator

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = self.mu.shape[0]
        if x.shape[-1:] != (k,):
            x = x[..., None]
        chol = _cholesky(self.sigma, "Sigma_11")
        diff = x - self.mu
        shape = diff.shape[:-1]
        z = linalg.solve_triangular(chol, diff.reshape(-1, k).T, lower=True)
        q = np.sum(z * z, axis=0).reshape(shape)
        log_det = 2.0 * np.sum(np.log(np.diag(chol)))
        return np.exp(self.generator.log_radial(q, k) - 0.5 * log_det)

    def cdf_1d(self, x: np.ndarray) -> np.ndarray:
        if self.mu.shape[0] != 1:
            raise ValueError("cdf_1d needs a one-dimensional block")
        scale = np.sqrt(self.sigma[0, 0])
        if isinstance(self.generator, StudentT):
            return stats.t.cdf(x, self.generator.dof, loc=self.mu[0], scale=scale)
        return stats.norm.cdf(x, loc=self.mu[0], scale=scale)


def standard_bivariate(rho: float, generator: Generator = Normal()) -> EllipticalBaseline:
    """EC_2 with zero location and unit-diagonal scale [[1, rho], [rho, 1]]."""
    if not -1.0 < rho < 1.0:
        raise ParameterError(f"|rho| must be < 1, got {rho}")
    return EllipticalBaseline(np.zeros(2), np.array([[1.0, rho], [rho, 1.0]]), generator, 1)


def baseline_density(b: EllipticalBaseline, point) -> np.ndarray | float:
    out = b.pdf(point)
    return float(out) if np.ndim(out) == 0 else out


def conditional_moments(b: EllipticalBaseline) -> ConditionalMoments:
    return b.conditional


def baseline_sample(b: EllipticalBaseline, n: int, rng_seed: int) -> SampleBatch:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    return SampleBatch(b.draw(rng, n), seed=rng_seed, flip_count=0, meta="baseline", m=b.m)
