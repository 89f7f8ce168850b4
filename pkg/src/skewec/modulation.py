"""Modulation factor G0{w(x, y)} and the modulated density built on it.

``w(x, y) = w0(r) * h(x)`` where ``r = y - m_Y(x)`` is the residual of Y about
its conditional location (optionally whitened by sigma_22.1). ``w0`` is odd;
``h`` is arbitrary, so ``w`` is in general *not* odd in (x, y). What keeps
``2 f0 G0(w)`` a density is that ``w(X, Y)`` is symmetric about 0 under the
baseline, because the residual is conditionally symmetric given X.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg, special

from .elliptical import EllipticalBaseline
from .errors import DomainError, ParameterError


_SPLIT = 134217729.0  # 2**27 + 1


def _square_exact(t: np.ndarray):
    """t*t as an unevaluated sum hi + lo (Dekker)."""
    a = _SPLIT * t
    th = a - (a - t)
    tl = t - th
    hi = t * t
    lo = ((th * th - hi) + 2.0 * th * tl) + tl * tl
    return hi, lo


def normal_cdf(t):
    """Phi(t), relative error near 1e-16 throughout the lower tail.

    ``ndtr`` rounds t^2 inside the exponential, which costs ~t^2 ulps for
    t << 0. Below -1 we use erfcx and exponentiate an error-free t^2 instead.
    """
    t = np.asarray(t, dtype=float)
    out = np.atleast_1d(special.ndtr(t))
    t1 = np.atleast_1d(t)
    low = t < -1.0
    if np.any(low):
        tl = t1[low]
        hi, lo = _square_exact(tl)
        with np.errstate(under="ignore"):
            out[low] = 0.5 * special.erfcx(-tl / math.sqrt(2.0)) * np.exp(-0.5 * hi) * np.exp(-0.5 * lo)
    return out.reshape(t.shape)


class SymmetricCdf(enum.Enum):
    """Distribution functions with G(-t) = 1 - G(t)."""

    STANDARD_NORMAL = "normal"
    STANDARD_CAUCHY = "cauchy"
    LOGISTIC = "logistic"

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self is SymmetricCdf.STANDARD_NORMAL:
            return normal_cdf(t)
        if self is SymmetricCdf.STANDARD_CAUCHY:
            return 0.5 + np.arctan(t) / np.pi
        return special.expit(t)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        if self is SymmetricCdf.STANDARD_NORMAL:
            return special.ndtri(u)
        if self is SymmetricCdf.STANDARD_CAUCHY:
            return np.tan(np.pi * (u - 0.5))
        return special.logit(u)

    @classmethod
    def parse(cls, text: str) -> "SymmetricCdf":
        key = text.strip().lower()
        aliases = {"phi": "normal", "standard_normal": "normal", "standard_cauchy": "cauchy"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ParameterError(f"unknown g0 {text!r}; expected normal, cauchy or logistic") from None


def g0_cdf(g: SymmetricCdf, t):
    out = g.cdf(t)
    return float(out) if np.ndim(out) == 0 else out


# --- h: functions of the conditioning block -------------------------------


@dataclass(frozen=True)
class HFunction:
    """Base for h(x). Scalar members act on ``x @ direction`` (or on x itself
    when the X block is one-dimensional and no direction is given)."""

    def _scalar(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        direction = getattr(self, "direction", None)
        if direction is not None:
            return x @ np.asarray(direction, dtype=float)
        if x.ndim == 0:
            return x
        if x.shape[-1] != 1:
            raise ValueError(
                f"{type(self).__name__} needs a direction for a {x.shape[-1]}-dimensional X block"
            )
        return x[..., 0]

    def of_scalar(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.of_scalar(self._scalar(x))

    kinks = ()
    is_odd = False


@dataclass(frozen=True)
class Constant(HFunction):
    k: float = 1.0
    direction: Optional[tuple] = None

    def of_scalar(self, t):
        return np.full(np.shape(t), float(self.k))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1] if x.ndim else (), float(self.k))


@dataclass(frozen=True)
class Linear(HFunction):
    """h(x) = alpha * x, an odd choice."""

    alpha: float = 1.0
    direction: Optional[tuple] = None
    is_odd = True

    def of_scalar(self, t):
        return self.alpha * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class AlphaAbs(HFunction):
    alpha: float = 1.0
    direction: Optional[tuple] = None
    kinks = (0.0,)

    def of_scalar(self, t):
        return self.alpha * np.abs(t)


@dataclass(frozen=True)
class Rational(HFunction):
    """h(x) = (1 + a1 x + a2 x^2) / (1 + b1 x + b2 x^2) with a denominator
    that never vanishes on the real line."""

    a1: float = 0.0
    a2: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    direction: Optional[tuple] = None

    def __post_init__(self):
        b1, b2 = self.b1, self.b2
        if not ((b2 > 0 and b1 * b1 < 4 * b2) or (b1 == 0 and b2 == 0)):
            raise ParameterError(
                f"denominator 1 + b1 x + b2 x^2 must stay positive: need b2 > 0 and b1^2 < 4 b2, "
                f"or b1 = b2 = 0 (got b1={b1}, b2={b2})"
            )

    def of_scalar(self, t):
        t = np.asarray(t, dtype=float)
        return (1.0 + t * (self.a1 + self.a2 * t)) / (1.0 + t * (self.b1 + self.b2 * t))


@dataclass(frozen=True)
class SInverted(HFunction):
    """h = s / sqrt(1 - (1 - rho^2) s^2), so that h / sqrt(1 + (1 - rho^2) h^2) = s.

    ``s_mean`` is E[s(Z)] for Z ~ N(0, 1), when known.
    """

    s: Callable = np.cos
    rho: float = 0.0
    s_mean: Optional[float] = None
    direction: Optional[tuple] = None

    def _denominator_sq(self, t):
        s = self.s(t)
        return 1.0 - (1.0 - self.rho**2) * s * s

    def raw(self, t):
        """Evaluate without the domain check (inf or nan where undefined)."""
        t = np.asarray(t, dtype=float)
        den2 = self._denominator_sq(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.s(t) / np.sqrt(den2)

    def of_scalar(self, t):
        t = np.asarray(t, dtype=float)
        bad = ~(self._denominator_sq(t) > 0)
        if np.any(bad):
            where = np.asarray(t)[bad].ravel()[:3]
            raise DomainError(f"(1 - rho^2) s(x)^2 >= 1 at x = {where.tolist()}")
        return self.raw(t)


@dataclass(frozen=True)
class CosineInverted(SInverted):
    """The s = cos member: h(x) = cos x / sqrt(1 - (1 - rho^2) cos^2 x)."""

    s: Callable = field(default=np.cos, repr=False, compare=False)
    rho: float = 0.0
    s_mean: Optional[float] = math.exp(-0.5)
    direction: Optional[tuple] = None

    def _denominator_sq(self, t):
        # 1 - (1 - rho^2) cos^2 = rho^2 cos^2 + sin^2, without cancellation near cos^2 = 1
        c, s = np.cos(t), np.sin(t)
        return self.rho**2 * c * c + s * s


# --- w0: odd maps of the residual ------------------------------------------


@dataclass(frozen=True)
class RationalOdd:
    """w0(u) = (c1 u + c3 u^3) / (1 + c2 u^2) for scalar u."""

    c1: float = 1.0
    c2: float = 0.0
    c3: float = 0.0
    dim = 1

    def __post_init__(self):
        if not self.c2 >= 0:
            raise ParameterError(f"c2 must be >= 0 so that 1 + c2 u^2 > 0 (got c2={self.c2})")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim and u.shape[-1] == 1:
            u = u[..., 0]
        u2 = u * u
        return u * (self.c1 + self.c3 * u2) / (1.0 + self.c2 * u2)

    @property
    def is_identity(self) -> bool:
        return self.c1 == 1.0 and self.c2 == 0.0 and self.c3 == 0.0

    @property
    def is_zero(self) -> bool:
        return self.c1 == 0.0 and self.c3 == 0.0


@dataclass(frozen=True)
class LinearForm:
    """w0(u) = coeffs . u"""

    coeffs: tuple

    @property
    def dim(self):
        return len(self.coeffs)

    def __call__(self, u):
        return np.asarray(u, dtype=float) @ np.asarray(self.coeffs, dtype=float)

    @property
    def is_identity(self) -> bool:
        return tuple(self.coeffs) == (1.0,)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


@dataclass(frozen=True)
class SumOddCubic:
    """w0(u) = sum_j coeffs_j * u_j^3"""

    coeffs: tuple

    @property
    def dim(self):
        return len(self.coeffs)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return (u * u * u) @ np.asarray(self.coeffs, dtype=float)

    is_identity = False

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


@dataclass(frozen=True)
class RationalModulation:
    """Coefficient set for the rational h and rational odd w0 pair."""

    a1: float = 0.0
    a2: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    c1: float = 1.0
    c2: float = 0.0
    c3: float = 0.0
    standardized: bool = True

    def __post_init__(self):
        # construct both halves once so that bad coefficients fail here
        self.h
        self.odd

    @property
    def h(self) -> Rational:
        return Rational(self.a1, self.a2, self.b1, self.b2)

    @property
    def odd(self) -> RationalOdd:
        return RationalOdd(self.c1, self.c2, self.c3)


# --- the modulated density -------------------------------------------------


@dataclass(frozen=True, eq=False)
class SecDensity:
    """``2 f0(x, y) G0{w0(r) h(x)}`` on R^d, with r the (optionally whitened)
    residual of y about m_Y(x)."""

    baseline: EllipticalBaseline
    g0: SymmetricCdf = SymmetricCdf.STANDARD_NORMAL
    h: HFunction = Constant(1.0)
    odd: object = RationalOdd()
    standardized: bool = True
    name: str = ""

    def __post_init__(self):
        if self.odd.dim != self.baseline.m:
            raise ParameterError(
                f"odd map acts on {self.odd.dim}-vectors but the Y block has dimension {self.baseline.m}"
            )

    @classmethod
    def from_rational(cls, baseline, g0, rm: RationalModulation, name: str = "") -> "SecDensity":
        return cls(baseline, g0, rm.h, rm.odd, rm.standardized, name)

    @property
    def d(self) -> int:
        return self.baseline.d

    @property
    def m(self) -> int:
        return self.baseline.m

    @property
    def conditional(self):
        return self.baseline.conditional

    def residual(self, x, y) -> np.ndarray:
        """y - m_Y(x), whitened by sigma_22.1 when ``standardized``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = y - self.conditional.mean(x)
        if not self.standardized:
            return r
        if self.m == 1:
            return r / np.sqrt(self.conditional.sigma22_1[0, 0])
        chol = self.baseline.residual_chol
        shape = r.shape
        z = linalg.solve_triangular(chol, r.reshape(-1, self.m).T, lower=True)
        return z.T.reshape(shape)

    def w(self, x, y) -> np.ndarray:
        x, y = self._blocks(x, y)
        return self.odd(self.residual(x, y)) * self.h(x)

    def w_points(self, points) -> np.ndarray:
        x, y = self.baseline.split(points)
        return self.odd(self.residual(x, y)) * self.h(x)

    def pdf(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return 2.0 * self.baseline.pdf(points) * self.g0.cdf(self.w_points(points))

    def _blocks(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        p, m = self.baseline.p, self.m
        if x.ndim == 0 or x.shape[-1] != p:
            x = x[..., None] if p == 1 else x
        if y.ndim == 0 or y.shape[-1] != m:
            y = y[..., None] if m == 1 else y
        if x.shape[-1] != p or y.shape[-1] != m:
            raise ParameterError(f"expected x of length {p} and y of length {m}")
        try:
            np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
        except ValueError:
            raise ParameterError(f"x and y batch shapes {x.shape[:-1]} and {y.shape[:-1]} do not broadcast") from None
        return x, y


def eval_w(s: SecDensity, x, y):
    out = s.w(x, y)
    return float(out) if np.ndim(out) == 0 else out


def sec_density(s: SecDensity, x, y):
    x, y = s._blocks(x, y)
    shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
    points = np.concatenate(
        [np.broadcast_to(x, shape + x.shape[-1:]), np.broadcast_to(y, shape + y.shape[-1:])], axis=-1
    )
    out = s.pdf(points)
    return float(out) if np.ndim(out) == 0 else out
