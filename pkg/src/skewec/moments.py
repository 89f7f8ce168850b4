"""E[Y] and the moment generating function for the bivariate normal case

    f(x, y) = 2 phi_2(x, y; rho) Phi{(y - rho x) h(x)},

where both reduce to one-dimensional integrals against phi(x):

    E[Y]     = sqrt(2/pi) (1 - rho^2) E[k(Z)],   k = h / sqrt(1 + (1 - rho^2) h^2)
    M(t1,t2) = 2 exp(t2^2 (1 - rho^2) / 2) E[exp(Z (t1 + t2 rho)) Phi(t2 (1 - rho^2) k(Z))]

with Z ~ N(0, 1). Anything outside that configuration goes through
:func:`expect_y_monte_carlo`.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate, special

from .elliptical import Normal
from .errors import DomainError, ParameterError, QuadratureError, UnsupportedCaseError
from .modulation import (
    AlphaAbs,
    Constant,
    CosineInverted,
    HFunction,
    Linear,
    LinearForm,
    RationalOdd,
    SecDensity,
    SInverted,
    SymmetricCdf,
)
from .sampler import sec_sample

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class GaussHermite:
    order: int = 150

    def __post_init__(self):
        # numpy's weights overflow somewhere past 350
        if not 10 <= self.order <= 350:
            raise ParameterError("Gauss-Hermite order must be in [10, 350]")


@dataclass(frozen=True)
class Adaptive:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 60

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.max_depth >= 1):
            raise ParameterError("adaptive tolerances must be > 0 and max_depth >= 1")


QuadratureSpec = Union[GaussHermite, Adaptive]
DEFAULT_GH = GaussHermite(150)
DEFAULT_ADAPTIVE = Adaptive(1e-12, 1e-12, 200)


@lru_cache(maxsize=None)
def _gh_table(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = hermite_e.hermegauss(order)
    w = w / math.sqrt(2.0 * math.pi)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gh_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights with sum(w * f(x)) ~= E[f(Z)], Z ~ N(0, 1). Shared, read-only."""
    return _gh_table(int(order))


def normal_expectation(f: Callable, q: QuadratureSpec, kinks=()) -> float:
    """E[f(Z)] for Z ~ N(0, 1). ``f`` must accept arrays."""
    if isinstance(q, GaussHermite):
        x, w = gh_nodes(q.order)
        return float(np.dot(w, f(x)))
    phi = lambda t: f(np.array([t], dtype=float))[0] * math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)
    edges = [-np.inf, *sorted(kinks), np.inf]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            res = integrate.quad(
                lambda t: float(phi(t)), lo, hi,
                epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_depth, full_output=1,
            )
        val, err = res[0], res[1]
        # a fourth element is QUADPACK's warning; accept it only if the error estimate is still small
        if len(res) > 3 and err > 100 * max(q.abs_tol, q.rel_tol * abs(val)):
            raise QuadratureError(f"adaptive quadrature on [{lo}, {hi}] did not converge: {res[3]}")
        total += val
    return total


def _closed_form_case(s: SecDensity) -> tuple[float, HFunction]:
    """Return (rho, h) when ``s`` is the bivariate normal / Phi case, else raise."""
    b = s.baseline
    why = None
    if b.d != 2:
        why = f"needs d = 2 (got {b.d})"
    elif not isinstance(b.generator, Normal):
        why = "needs a normal baseline"
    elif not np.allclose(np.diag(b.sigma), 1.0, rtol=0, atol=1e-15) or np.any(b.mu != 0):
        why = "needs zero location and unit-diagonal scale"
    elif s.g0 is not SymmetricCdf.STANDARD_NORMAL:
        why = "needs G0 = Phi"
    elif not getattr(s.odd, "is_identity", False):
        why = "needs w0(u) = u"
    elif s.standardized:
        why = "needs the unstandardized residual y - rho x"
    if why:
        raise UnsupportedCaseError(f"one-dimensional E[Y] formula {why}")
    return float(b.sigma[0, 1]), s.h


def _h_values(h: HFunction, x: np.ndarray) -> np.ndarray:
    try:
        return h(x[:, None])
    except DomainError:
        if not isinstance(h, SInverted):
            raise
    # isolated singular points: nudge them off
    x = x.copy()
    bad = ~(h._denominator_sq(x) > 0)
    x[bad] += 1e-7
    return h(x[:, None])


def _kernel(hv: np.ndarray, c: float) -> np.ndarray:
    """h / sqrt(1 + c h^2), finite even where |h| is huge or infinite."""
    hv = np.asarray(hv, dtype=float)
    out = np.empty_like(hv)
    small = np.abs(hv) <= 1.0
    out[small] = hv[small] / np.sqrt(1.0 + c * hv[small] ** 2)
    big = ~small
    with np.errstate(divide="ignore"):
        out[big] = np.sign(hv[big]) / np.sqrt(1.0 / hv[big] ** 2 + c)
    return out


def _resolve(q: Optional[QuadratureSpec], h: HFunction) -> QuadratureSpec:
    # Gauss-Hermite only where the kernel is entire; poles near the real axis
    # (rational h) or kinks (alpha |x|) slow it to ~1e-9 at order 150.
    if q is not None:
        return q
    return DEFAULT_GH if isinstance(h, (Constant, Linear, CosineInverted)) else DEFAULT_ADAPTIVE


def expect_y_quadrature(s: SecDensity, q: Optional[QuadratureSpec] = None) -> float:
    """E[Y] by one-dimensional quadrature. ``q=None`` picks Gauss-Hermite for
    the constant, linear and cosine h, and adaptive quadrature (split at any
    kinks of h) otherwise."""
    rho, h = _closed_form_case(s)
    c = 1.0 - rho * rho
    q = _resolve(q, h)
    mean_k = normal_expectation(lambda x: _kernel(_h_values(h, np.atleast_1d(x)), c), q, h.kinks)
    return SQRT_2_OVER_PI * c * mean_k


def expect_x(s: SecDensity) -> float:
    """E[X] in the same configuration: the X marginal is phi, so exactly 0."""
    _closed_form_case(s)
    return 0.0


def mgf_normal_case(s: SecDensity, t1: float, t2: float, q: Optional[QuadratureSpec] = None) -> float:
    rho, h = _closed_form_case(s)
    if not (math.isfinite(t1) and math.isfinite(t2)):
        raise ValueError("t1 and t2 must be finite")
    c = 1.0 - rho * rho
    q = _resolve(q, h)
    slope = t1 + t2 * rho

    def f(x):
        x = np.atleast_1d(x)
        return np.exp(slope * x) * special.ndtr(t2 * c * _kernel(_h_values(h, x), c))

    return 2.0 * math.exp(0.5 * t2 * t2 * c) * normal_expectation(f, q, h.kinks)


# --- closed forms ----------------------------------------------------------


class ClosedFormKind(enum.Enum):
    NONE = "none"
    CONSTANT_H = "constant_h"
    ODD_H = "odd_h"
    S_INVERSION = "s_inversion"
    ALPHA_ABS = "alpha_abs"


def _check_rho(rho: float) -> float:
    if not -1.0 < rho < 1.0:
        raise ParameterError(f"need rho^2 < 1, got rho={rho}")
    return 1.0 - rho * rho


def alpha_abs_integral(alpha: float, rho: float) -> float:
    """E[k(Z)] for h(x) = alpha |x|:

        (2 / sqrt(1 - rho^2)) [1 - Phi(1 / (|alpha| sqrt(1 - rho^2)))] exp(1 / (2 alpha^2 (1 - rho^2)))

    signed like alpha. Uses [1 - Phi(z)] exp(z^2/2) = erfcx(z / sqrt 2) / 2.
    """
    c = _check_rho(rho)
    if alpha == 0:
        raise ParameterError("alpha must be nonzero")
    z = 1.0 / (abs(alpha) * math.sqrt(c))
    return math.copysign(special.erfcx(z / math.sqrt(2.0)) / math.sqrt(c), alpha)


def expect_y_closed_form(kind: ClosedFormKind, rho: float, *, k: float = 1.0,
                         s_mean: Optional[float] = None, alpha: Optional[float] = None) -> float:
    """Closed-form E[Y] for the special choices of h.

    CONSTANT_H (h = k):   sqrt(2/pi) (1 - rho^2) k / sqrt(1 + (1 - rho^2) k^2)
    ODD_H:                0
    S_INVERSION:          sqrt(2/pi) (1 - rho^2) * s_mean
    ALPHA_ABS:            sqrt(2/pi) (1 - rho^2) * alpha_abs_integral(alpha, rho)
    """
    c = _check_rho(rho)
    kind = ClosedFormKind(kind)
    if kind is ClosedFormKind.CONSTANT_H:
        return SQRT_2_OVER_PI * c * k / math.sqrt(1.0 + c * k * k)
    if kind is ClosedFormKind.ODD_H:
        return 0.0
    if kind is ClosedFormKind.S_INVERSION:
        if s_mean is None:
            raise ParameterError("S-inversion needs s_mean = E[s(Z)]")
        return SQRT_2_OVER_PI * c * s_mean
    if kind is ClosedFormKind.ALPHA_ABS:
        if alpha is None:
            raise ParameterError("alpha-abs needs alpha")
        return SQRT_2_OVER_PI * c * alpha_abs_integral(alpha, rho)
    raise UnsupportedCaseError("no closed form for this h")


def closed_form_for(s: SecDensity) -> tuple[ClosedFormKind, Optional[float]]:
    """Recognise which closed form, if any, applies to ``s``."""
    try:
        rho, h = _closed_form_case(s)
    except UnsupportedCaseError:
        return ClosedFormKind.NONE, None
    if isinstance(h, Constant):
        return ClosedFormKind.CONSTANT_H, expect_y_closed_form(ClosedFormKind.CONSTANT_H, rho, k=h.k)
    if h.is_odd:
        return ClosedFormKind.ODD_H, 0.0
    if isinstance(h, AlphaAbs) and h.alpha != 0:
        return ClosedFormKind.ALPHA_ABS, expect_y_closed_form(ClosedFormKind.ALPHA_ABS, rho, alpha=h.alpha)
    if isinstance(h, SInverted) and h.s_mean is not None and math.isclose(h.rho**2, rho**2, abs_tol=1e-15):
        return ClosedFormKind.S_INVERSION, expect_y_closed_form(ClosedFormKind.S_INVERSION, rho, s_mean=h.s_mean)
    return ClosedFormKind.NONE, None


def s_inversion_h(s_fn: Callable, rho: float, s_mean: Optional[float] = None) -> SInverted:
    """h with h / sqrt(1 + (1 - rho^2) h^2) = s_fn pointwise, so E[Y] = sqrt(2/pi)(1 - rho^2) E[s(Z)].

    Evaluating it where (1 - rho^2) s(x)^2 >= 1 raises :class:`DomainError`.
    """
    _check_rho(rho)
    return SInverted(s=s_fn, rho=rho, s_mean=s_mean)


# --- Monte Carlo -----------------------------------------------------------


def expect_y_monte_carlo(s: SecDensity, n: int, seed: int,
                         g: Optional[Callable[[np.ndarray], np.ndarray]] = None):
    """Sample mean of Y (or of ``g(points)``) over ``sec_sample`` draws, with its standard error.

    Works for any baseline, G0 and h. Returns arrays when the statistic is a vector.
    """
    if n < 1000:
        raise ValueError("n must be >= 1000")
    batch = sec_sample(s, n, seed)
    vals = batch.y if g is None else np.asarray(g(batch.points), dtype=float)
    if vals.ndim == 2 and vals.shape[1] == 1:
        vals = vals[:, 0]
    est = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / math.sqrt(n)
    if np.ndim(est) == 0:
        return float(est), float(se)
    return est, se


# --- report ----------------------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    """``e_y`` is the estimate from ``method``; ``abs_discrepancy`` is
    |e_y - e_y_closed_form|, except for method "closed" where it is
    |quadrature - closed form|."""

    params_id: str
    method: str
    e_y: float
    e_y_closed_form: Optional[float] = None
    closed_form_kind: ClosedFormKind = ClosedFormKind.NONE
    abs_discrepancy: Optional[float] = None
    std_error: Optional[float] = None

    def __post_init__(self):
        if (self.abs_discrepancy is None) != (self.e_y_closed_form is None):
            raise ValueError("abs_discrepancy is present exactly when a closed form is")

    HEADER = "params_id,method,e_y,closed_form,discrepancy"

    def csv_row(self) -> str:
        fmt = lambda v: "" if v is None else repr(float(v))
        return ",".join([self.params_id, self.method, fmt(self.e_y), fmt(self.e_y_closed_form),
                         fmt(self.abs_discrepancy)])


def moment_report(s: SecDensity, method: str = "quad", *, n: int = 200_000, seed: int = 0,
                  q: Optional[QuadratureSpec] = None) -> MomentReport:
    kind, closed = closed_form_for(s)
    se = None
    if method == "quad":
        e_y = expect_y_quadrature(s, q)
        ref = e_y
    elif method == "closed":
        if closed is None:
            raise UnsupportedCaseError("no closed form recognised for these parameters")
        e_y = closed
        ref = expect_y_quadrature(s, q)
    elif method == "mc":
        e_y, se = expect_y_monte_carlo(s, n, seed)
        ref = e_y
    else:
        raise ValueError(f"unknown method {method!r}")
    disc = None if closed is None else abs(ref - closed)
    return MomentReport(s.name, method, e_y, closed, kind, disc, se)
