"""Skew-elliptical densities built from a non-odd modulating function.

The baseline is an elliptically contoured law on (X, Y); the modulation is
``2 f0(x, y) G0{w0(y - m_Y(x)) h(x)}`` with G0 a symmetric cdf and w0 odd.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    NotPositiveDefiniteError,
    ParameterError,
    QuadratureError,
    UnsupportedCaseError,
)
from .elliptical import (
    ConditionalMoments,
    EllipticalBaseline,
    Normal,
    StudentT,
    baseline_density,
    baseline_sample,
    conditional_moments,
    standard_bivariate,
)
from .modulation import (
    AlphaAbs,
    Constant,
    CosineInverted,
    Linear,
    LinearForm,
    Rational,
    RationalModulation,
    RationalOdd,
    SecDensity,
    SumOddCubic,
    SymmetricCdf,
    eval_w,
    g0_cdf,
    sec_density,
)
from .sampler import SampleBatch, g0_sample, sec_sample
from .moments import (
    Adaptive,
    GaussHermite,
    MomentReport,
    expect_y_closed_form,
    expect_y_monte_carlo,
    expect_y_quadrature,
    mgf_normal_case,
    moment_report,
    s_inversion_h,
)
