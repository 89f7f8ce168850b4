"""Checks that a modulated density behaves as the construction says it must.

Each check returns a :class:`CheckReport`; ``passed`` is ``statistic <= threshold``.
Monte Carlo thresholds are multiples of a standard error; quadrature
thresholds are absolute errors.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate, stats

from .elliptical import EllipticalBaseline, Normal, StudentT, standard_bivariate
from .errors import QuadratureError
from .modulation import (
    AlphaAbs,
    Linear,
    LinearForm,
    Rational,
    RationalOdd,
    SecDensity,
    SumOddCubic,
    SymmetricCdf,
)
from .sampler import sec_sample

SYMMETRY_THRESHOLDS = (0.1, 0.25, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    statistic: float
    threshold: float
    passed: bool
    runtime_ms: int = 0
    params_id: str = ""

    HEADER = "check_name,params_id,statistic,threshold,passed"

    def csv_row(self, timings: bool = False) -> str:
        row = [self.check_name, self.params_id, repr(float(self.statistic)), repr(float(self.threshold)),
               "true" if self.passed else "false"]
        if timings:
            row.append(str(self.runtime_ms))
        return ",".join(row)


def _report(name: str, s: SecDensity, statistic: float, threshold: float, t0: float) -> CheckReport:
    statistic = float(statistic)
    passed = bool(np.isfinite(statistic) and statistic <= threshold)
    ms = int(round(1000 * (time.perf_counter() - t0)))
    return CheckReport(name, statistic, float(threshold), passed, ms, s.name)


# --- normalization ---------------------------------------------------------


def integrate_plane(pdf: Callable[[np.ndarray], np.ndarray], baseline: EllipticalBaseline,
                    tol: float = 1e-10, max_subdivisions: int = 20000):
    """Integrate a bivariate density over all of R^2.

    Each axis is compactified with ``v = mu + sd * (0.1 + tan(pi (a - 1/2)))``,
    a in (0, 1). For normal and Student-t (dof >= 2) tails the transformed
    integrand stays bounded, so nothing is truncated. The 0.1 offset keeps the
    rule's node symmetry from lining up with any symmetry of the density.
    """
    sd = np.sqrt(np.diag(baseline.sigma))
    mu = baseline.mu

    def f(p):
        t = np.pi * (p - 0.5)
        c = np.cos(t)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            v = mu + sd * (0.1 + np.tan(t))
            out = pdf(v) * np.prod(sd * np.pi / (c * c), axis=-1)
        return np.where(np.isfinite(out), out, 0.0)

    res = integrate.cubature(f, [0.0, 0.0], [1.0, 1.0], rule="gk21", atol=tol, rtol=tol,
                             max_subdivisions=max_subdivisions)
    if res.status != "converged":
        raise QuadratureError(f"2-D cubature stopped with error estimate {res.error:.3g}")
    return float(res.estimate), float(res.error)


def check_normalization(s: SecDensity, method: str = "quad2d", *, threshold: float = 1e-6,
                        n: int = 1_000_000, seed: int = 0) -> CheckReport:
    """``quad2d`` (d = 2): |integral - 1| by adaptive cubature, against ``threshold``.
    ``mc_ratio``: |mean of 2 G0(w(V)) - 1| over baseline draws V, against 4 standard errors."""
    t0 = time.perf_counter()
    if method == "quad2d":
        if s.d != 2:
            raise ValueError("quad2d needs d = 2")
        total, _ = integrate_plane(s.pdf, s.baseline)
        return _report("normalization_quad2d", s, abs(total - 1.0), threshold, t0)
    if method == "mc_ratio":
        rng = np.random.default_rng(seed)
        v = s.baseline.draw(rng, n)
        vals = 2.0 * s.g0.cdf(s.w_points(v))
        est = vals.mean()
        se = vals.std(ddof=1) / math.sqrt(n)
        return _report("normalization_mc", s, abs(est - 1.0), 4.0 * se, t0)
    raise ValueError(f"unknown method {method!r}")


# --- marginal of the X block -----------------------------------------------


def _integrate_y(s: SecDensity, x: np.ndarray) -> float:
    """Integral over scalar y of the density at fixed x."""
    loc = float(s.conditional.mean(x)[0])
    scale = math.sqrt(s.conditional.sigma22_1[0, 0])
    xs = np.asarray(x, dtype=float)

    # the infinite-range rule folds t with -t; offsetting the centre keeps that
    # fold from coinciding with the reflection of y about m_Y(x)
    def f(t):
        pt = np.concatenate([xs, [loc + scale * (t + 0.3)]])
        return float(s.pdf(pt)) * scale

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400, full_output=1)
    val, err = res[0], res[1]
    if len(res) > 3 and err > 1e-9:
        raise QuadratureError(f"y-integral at x={xs.tolist()} did not converge: {res[3]}")
    return val


def default_x_grid(s: SecDensity) -> list[np.ndarray]:
    base = (-3.0, -1.0, 0.0, 1.0, 3.0)
    p = s.baseline.p
    mu_x = s.baseline.mu[:p]
    sd_x = np.sqrt(np.diag(s.baseline.sigma)[:p])
    return [mu_x + t * sd_x for t in base]


def check_marginal_invariance(s: SecDensity, x_grid: Optional[Iterable] = None, *,
                              threshold: Optional[float] = None, n: int = 200_000,
                              seed: int = 0) -> CheckReport:
    """Compare the X-marginal of ``s`` with the baseline's X-marginal on a grid.

    m = 1: statistic is max |integral over y - f0_X(x)|, threshold 1e-8 (normal)
    or 1e-6 (Student-t) unless given.
    m > 1: importance-sampled integral over y (multivariate-t proposal around
    m_Y(x)); statistic is the largest |estimate - f0_X(x)| / standard error,
    threshold 4.5.
    """
    t0 = time.perf_counter()
    grid = [np.atleast_1d(np.asarray(x, dtype=float)) for x in (x_grid if x_grid is not None else default_x_grid(s))]
    target = s.baseline.x_marginal
    if s.m == 1:
        if threshold is None:
            threshold = 1e-8 if isinstance(s.baseline.generator, Normal) else 1e-6
        errs = [abs(_integrate_y(s, x) - float(target.pdf(x))) for x in grid]
        return _report("marginal_invariance", s, max(errs), threshold, t0)
    if threshold is None:
        threshold = 4.5
    rng = np.random.default_rng(seed)
    cond = s.conditional
    proposal_dof = 3.0
    zs = []
    for x in grid:
        loc = cond.mean(x)
        prop = stats.multivariate_t(loc=loc, shape=4.0 * cond.sigma22_1, df=proposal_dof)
        y = prop.rvs(size=n, random_state=rng)
        pts = np.concatenate([np.broadcast_to(x, (n, x.size)), y], axis=1)
        ratio = s.pdf(pts) / prop.pdf(y)
        est, se = ratio.mean(), ratio.std(ddof=1) / math.sqrt(n)
        zs.append(abs(est - float(target.pdf(x))) / se)
    return _report("marginal_invariance_mc", s, max(zs), threshold, t0)


# --- symmetry of W = w(Z0) -------------------------------------------------


def _w_draws(s: SecDensity, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return s.w_points(s.baseline.draw(rng, n))


def sign_symmetry_statistic(w: np.ndarray, thresholds: Sequence[float] = SYMMETRY_THRESHOLDS) -> float:
    """max over t of |P(W > t) - P(W < -t)| on the sample."""
    return max(abs(np.mean(w > t) - np.mean(w < -t)) for t in thresholds)


def check_w_symmetry(s: SecDensity, n: int = 200_000, seed: int = 0) -> CheckReport:
    """Sign symmetry of W under the baseline, threshold 5 sqrt(0.25 / n)."""
    if n < 100_000:
        raise ValueError("n must be >= 1e5")
    t0 = time.perf_counter()
    stat = sign_symmetry_statistic(_w_draws(s, n, seed))
    return _report("w_symmetry", s, stat, 5.0 * math.sqrt(0.25 / n), t0)


def check_w_symmetry_ks(s: SecDensity, n: int = 200_000, seed: int = 0, alpha: float = 1e-4) -> CheckReport:
    """Two-sample KS between W (first half) and -W (second half), at level ``alpha``."""
    t0 = time.perf_counter()
    w = _w_draws(s, n, seed)
    half = n // 2
    a, b = w[:half], -w[half:]
    d = stats.ks_2samp(a, b).statistic
    crit = math.sqrt(-math.log(alpha / 2.0) / 2.0) * math.sqrt((a.size + b.size) / (a.size * b.size))
    return _report("w_symmetry_ks", s, d, crit, t0)


# --- sampler against density ------------------------------------------------


def cell_masses(pdf: Callable, edges_x: np.ndarray, edges_y: np.ndarray, order: int = 8) -> np.ndarray:
    """Probability of each rectangle, by tensor Gauss-Legendre per cell."""
    g, gw = legendre.leggauss(order)

    def nodes(edges):
        lo, hi = edges[:-1, None], edges[1:, None]
        half = 0.5 * (hi - lo)
        return (lo + half * (g + 1.0)).ravel(), (half * gw).ravel()

    xn, xw = nodes(edges_x)
    yn, yw = nodes(edges_y)
    X, Y = np.meshgrid(xn, yn, indexing="ij")
    vals = pdf(np.stack([X, Y], axis=-1)) * np.outer(xw, yw)
    kx, ky = len(edges_x) - 1, len(edges_y) - 1
    return vals.reshape(kx, order, ky, order).sum(axis=(1, 3))


def chi_square_cells(counts: np.ndarray, expected: np.ndarray, min_expected: float = 5.0):
    """Pearson chi-square with cells under ``min_expected`` pooled into one; returns (stat, df)."""
    counts = np.asarray(counts, dtype=float).ravel()
    expected = np.asarray(expected, dtype=float).ravel()
    small = expected < min_expected
    obs = np.append(counts[~small], counts[small].sum())
    exp = np.append(expected[~small], expected[small].sum())
    keep = exp > 0
    obs, exp = obs[keep], exp[keep]
    return float(np.sum((obs - exp) ** 2 / exp)), int(obs.size - 1)


def check_sampler_density_agreement(s: SecDensity, n: int = 500_000, seed: int = 0, *, bins: int = 40,
                                    half_width: float = 4.0, level: float = 1e-3,
                                    reflection: str = "conditional") -> CheckReport:
    """Histogram of ``sec_sample`` draws on a bins x bins grid over
    [-half_width, half_width]^2 (plus one overflow cell) against quadrature cell
    masses; chi-square against its (1 - level) quantile."""
    if s.d != 2:
        raise ValueError("sampler/density agreement needs d = 2")
    t0 = time.perf_counter()
    edges = np.linspace(-half_width, half_width, bins + 1)
    pts = sec_sample(s, n, seed, reflection=reflection).points
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=[edges, edges])
    inside = cell_masses(s.pdf, edges, edges)
    overflow_mass = max(0.0, 1.0 - inside.sum())
    obs = np.append(counts.ravel(), n - counts.sum())
    exp = n * np.append(inside.ravel(), overflow_mass)
    stat, df = chi_square_cells(obs, exp)
    name = "sampler_agreement" if reflection == "conditional" else f"sampler_agreement_{reflection}"
    return _report(name, s, stat, stats.chi2.ppf(1.0 - level, df), t0)


# --- w is not odd ------------------------------------------------------------


def non_oddness_witness(s: SecDensity, half_width: float = 3.0, steps: int = 25):
    """Grid point v maximising |w(v) + w(-v)|; returns (v, that value)."""
    t = np.linspace(-half_width, half_width, steps)
    mesh = np.stack(np.meshgrid(*([t] * s.d), indexing="ij"), axis=-1).reshape(-1, s.d)
    gap = np.abs(s.w_points(mesh) + s.w_points(-mesh))
    i = int(np.argmax(gap))
    return mesh[i], float(gap[i])


# --- negative controls --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HOnY(SecDensity):
    """Deliberately wrong: h is evaluated at y instead of x."""

    def w_points(self, points):
        x, y = self.baseline.split(points)
        return self.odd(self.residual(x, y)) * self.h(y)

    def w(self, x, y):
        x, y = self._blocks(x, y)
        return self.odd(self.residual(x, y)) * self.h(y)


class GumbelCdf:
    """exp(-exp(-t)): a cdf that is not symmetric about 0."""

    name = "gumbel"

    def cdf(self, t):
        with np.errstate(over="ignore"):
            return np.exp(-np.exp(-np.asarray(t, dtype=float)))

    def ppf(self, u):
        return -np.log(-np.log(np.asarray(u, dtype=float)))


def broken_w(s: SecDensity) -> HOnY:
    return HOnY(s.baseline, s.g0, s.h, s.odd, s.standardized, s.name + "+h_on_y")


def asymmetric_g0(s: SecDensity) -> SecDensity:
    return replace(s, g0=GumbelCdf(), name=s.name + "+gumbel_g0")


# --- fuzz corpora ---------------------------------------------------------------


_G0S = (SymmetricCdf.STANDARD_NORMAL, SymmetricCdf.STANDARD_CAUCHY, SymmetricCdf.LOGISTIC)


def _random_generator(rng):
    return Normal() if rng.random() < 0.5 else StudentT(float(rng.integers(3, 11)))


def _random_rational(rng, direction=None):
    a1, a2 = rng.uniform(-2, 2, size=2)
    if rng.random() < 0.2:
        b1 = b2 = 0.0
    else:
        b2 = rng.uniform(0.1, 2.0)
        b1 = rng.uniform(-0.95, 0.95) * 2.0 * math.sqrt(b2)
    return Rational(float(a1), float(a2), float(b1), float(b2), direction)


def fuzz_sets(count: int, seed: int) -> list[SecDensity]:
    """Random valid bivariate sets: rho in (-0.95, 0.95), rational h and w0,
    both generators, all three G0."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        rho = float(rng.uniform(-0.95, 0.95))
        gen = _random_generator(rng)
        g0 = _G0S[int(rng.integers(3))]
        h = _random_rational(rng)
        odd = RationalOdd(float(rng.uniform(-3, 3)), float(rng.uniform(0, 2)), float(rng.uniform(-1, 1)))
        standardized = bool(rng.random() < 0.5)
        out.append(SecDensity(standard_bivariate(rho, gen), g0, h, odd, standardized, f"fuzz{seed}_{i:03d}"))
    return out


def random_spd(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d))
    return a @ a.T / d + 0.5 * np.eye(d)


def fuzz_multivariate_sets(count: int, seed: int, dims=((3, 2), (4, 2))) -> list[SecDensity]:
    """Random sets with an m = 2 modulated block, random location and scale."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        d, m = dims[i % len(dims)]
        p = d - m
        base = EllipticalBaseline(rng.normal(size=d), random_spd(rng, d), _random_generator(rng), m)
        direction = None if p == 1 else tuple(float(v) for v in rng.normal(size=p))
        kind = i % 3
        if kind == 0:
            h = _random_rational(rng, direction)
        elif kind == 1:
            h = AlphaAbs(float(rng.uniform(0.5, 2.0)), direction)
        else:
            h = Linear(float(rng.uniform(-2.0, 2.0)), direction)
        coeffs = tuple(float(c) for c in rng.uniform(-2, 2, size=m))
        odd = LinearForm(coeffs) if rng.random() < 0.5 else SumOddCubic(coeffs)
        g0 = _G0S[int(rng.integers(3))]
        out.append(SecDensity(base, g0, h, odd, bool(rng.random() < 0.5), f"mfuzz{seed}_{i:03d}"))
    return out


# --- battery ---------------------------------------------------------------------


def run_battery(s: SecDensity, seed: int = 0, *, n_symmetry: int = 200_000,
                n_sampler: int = 500_000, n_mc: int = 1_000_000) -> list[CheckReport]:
    """Every applicable check for ``s``. Bivariate sets get six rows:
    normalization (cubature and MC), marginal invariance, W sign symmetry,
    W KS symmetry, sampler agreement."""
    reports = []
    if s.d == 2:
        reports.append(check_normalization(s, "quad2d"))
    reports.append(check_normalization(s, "mc_ratio", n=n_mc, seed=seed))
    reports.append(check_marginal_invariance(s, seed=seed))
    reports.append(check_w_symmetry(s, n_symmetry, seed))
    reports.append(check_w_symmetry_ks(s, n_symmetry, seed))
    if s.d == 2:
        reports.append(check_sampler_density_agreement(s, n_sampler, seed))
    return reports
