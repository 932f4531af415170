"""Single-session estimation of the two-equation mediation SEM at a fixed
error correlation delta.

Model (per trial): m = a*z + e1, r = c*z + b*m + e2, with (e1, e2) jointly
normal, SDs (sigma1, sigma2) and correlation delta. Because delta is not
identified from one session, all fitting here is conditional on a supplied
delta. The constrained MLE has closed forms:

    a_hat  = z'm / z'z                              (delta-free)
    c_hat  = OLS_C + delta*sigma2*z'm/(sigma1*z'z)
    b_hat  = OLS_B - delta*sigma2/sigma1
    c_tot  = z'r / z'z                              (delta-free)

where OLS_B and OLS_C are the usual two-regressor least-squares slopes of r
on (z, m). Error variances are recovered from the residual covariance of
the two delta-free regressions (m on z, r on z):

    sigma1_sq = s11
    sigma2_sq = (s11*s22 - s12^2) / (s11*(1 - delta^2))

and the plug-in slope b_hat = s12/s11 - delta*sqrt(s11*s22 - s12^2) /
(s11*sqrt(1-delta^2)) coincides with the constrained MLE when the same
residual covariance supplies the sigmas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NoiseCov, PathCoefficients, ResidualCov, TrialSeries, center, validate_series
from .errors import (
    DegenerateTreatment,
    NegativeVariance,
    SingularDesign,
    SingularResiduals,
    ValidationError,
)

__all__ = [
    "SingleLevelFit",
    "SuffStats",
    "fit_a",
    "fit_c_total",
    "residual_cov",
    "estimate_sigmas",
    "fit_theta",
    "fit_b_plugin",
    "loglik",
    "asym_cov_theta",
    "asym_cov_total",
    "indirect_effect",
    "profile_loglik_curve",
    "fit_single",
]

# Stand-in scale for a perfectly collinear residual pair (estimated
# sigma2_sq == 0). Strictly positive, so the noise object stays a valid
# covariance, but its square underflows to exactly 0.0: every second-moment
# formula downstream sees the zero estimate, and the delta-correction
# ratio sigma2/sigma1 is far below any tolerance, so the coefficients
# reduce to the OLS limit as they should.
_COLLAPSED_SIGMA2 = 1e-170


@dataclass(frozen=True)
class SuffStats:
    """Second moments of one centered session; everything downstream is a
    function of these seven numbers."""

    n: int
    zz: float
    zm: float
    zr: float
    mm: float
    mr: float
    rr: float

    @classmethod
    def from_series(cls, s: TrialSeries) -> "SuffStats":
        z, m, r = s.z, s.m, s.r
        return cls(
            n=s.n,
            zz=float(z @ z),
            zm=float(z @ m),
            zr=float(z @ r),
            mm=float(m @ m),
            mr=float(m @ r),
            rr=float(r @ r),
        )


@dataclass(frozen=True)
class SingleLevelFit:
    """Complete single-session fit at a fixed delta."""

    theta: PathCoefficients
    noise: NoiseCov
    residual_cov: ResidualCov
    q_hat: float
    n: int
    asym_cov_theta: np.ndarray  # 3x3 for (a_hat, c_hat, b_hat), already / n
    asym_cov_total: np.ndarray  # 2x2 for (c_total_hat, c_hat), already / n
    indirect_prod: float
    indirect_diff: float
    indirect_var: float
    loglik: float


def _check_treatment(zz: float):
    if zz <= 0:
        raise DegenerateTreatment("centered treatment has zero variance")


def fit_a(series: TrialSeries) -> float:
    """Treatment->mediator slope z'm/z'z. Independent of delta."""
    st = SuffStats.from_series(series)
    _check_treatment(st.zz)
    return st.zm / st.zz


def fit_c_total(series: TrialSeries) -> float:
    """Total-effect slope z'r/z'z. Independent of delta."""
    st = SuffStats.from_series(series)
    _check_treatment(st.zz)
    return st.zr / st.zz


def _residual_cov_from_stats(st: SuffStats) -> ResidualCov:
    _check_treatment(st.zz)
    inv = 1.0 / st.zz
    s11 = (st.mm - st.zm * st.zm * inv) / st.n
    s12 = (st.mr - st.zm * st.zr * inv) / st.n
    s22 = (st.rr - st.zr * st.zr * inv) / st.n
    return ResidualCov(s11=s11, s12=s12, s22=s22)


def residual_cov(series: TrialSeries) -> ResidualCov:
    """Sample covariance (divisor n) of the residuals of m on z and r on z."""
    return _residual_cov_from_stats(SuffStats.from_series(series))


def estimate_sigmas(rc: ResidualCov, delta: float) -> tuple:
    """Recover (sigma1_sq, sigma2_sq) from the residual covariance at a given delta."""
    if not abs(delta) < 1:
        raise ValidationError(f"delta must lie in (-1, 1), got {delta}")
    if rc.s11 <= 0:
        raise SingularResiduals("mediator-equation residual variance is not positive")
    det = rc.det
    if det < -1e-10 * max(1.0, rc.s11 * rc.s22):
        raise NegativeVariance("residual covariance determinant is negative")
    det = max(det, 0.0)
    sigma1_sq = rc.s11
    sigma2_sq = det / (rc.s11 * (1.0 - delta * delta))
    return sigma1_sq, sigma2_sq


def _theta_from_stats(st: SuffStats, noise: NoiseCov) -> PathCoefficients:
    _check_treatment(st.zz)
    gram = st.zz * st.mm - st.zm * st.zm
    if gram <= 1e-12 * st.zz * st.mm:
        raise SingularDesign("mediator is numerically collinear with treatment")
    a = st.zm / st.zz
    ols_c = (st.mm * st.zr - st.zm * st.mr) / gram
    ols_b = (st.zz * st.mr - st.zm * st.zr) / gram
    ratio = noise.delta * noise.sigma2 / noise.sigma1
    c = ols_c + ratio * st.zm / st.zz
    b = ols_b - ratio
    c_total = st.zr / st.zz
    return PathCoefficients(a=a, b=b, c=c, c_total=c_total)


def fit_theta(series: TrialSeries, noise: NoiseCov) -> PathCoefficients:
    """Constrained-MLE path coefficients at the supplied noise model.

    The delta-dependence enters only through the ratio delta*sigma2/sigma1,
    which shifts the OLS slope of the mediator and the direct effect in
    exactly offsetting ways (so a_hat*b_hat == c_total - c_hat always).
    """
    return _theta_from_stats(SuffStats.from_series(series), noise)


def fit_b_plugin(rc: ResidualCov, delta: float) -> float:
    """Mediator->outcome slope recovered directly from the residual covariance."""
    sigma1_sq, _ = estimate_sigmas(rc, delta)
    det = max(rc.det, 0.0)
    return rc.s12 / sigma1_sq - delta * np.sqrt(det) / (
        sigma1_sq * np.sqrt(1.0 - delta * delta)
    )


def loglik(series: TrialSeries, theta: PathCoefficients, noise: NoiseCov) -> float:
    """Joint log-likelihood objective of one session, in the scaled form

        -n*log(det Sigma) - trace(E Sigma^{-1} E')

    (no 1/2 factor, no 2*pi constant), where E stacks the two structural
    residual vectors. Optima are unaffected by the omitted constants.
    """
    st = SuffStats.from_series(series)
    return _loglik_from_stats(st, theta, noise)


def _loglik_from_stats(st: SuffStats, theta: PathCoefficients, noise: NoiseCov) -> float:
    a, b, c = theta.a, theta.b, theta.c
    # e1 = m - a z ; e2 = r - c z - b m
    q11 = st.mm - 2 * a * st.zm + a * a * st.zz
    q12 = (
        st.mr
        - c * st.zm
        - b * st.mm
        - a * st.zr
        + a * c * st.zz
        + a * b * st.zm
    )
    q22 = (
        st.rr
        + c * c * st.zz
        + b * b * st.mm
        - 2 * c * st.zr
        - 2 * b * st.mr
        + 2 * b * c * st.zm
    )
    s1sq = noise.sigma1 ** 2
    s2sq = noise.sigma2 ** 2
    d = noise.delta
    det = s1sq * s2sq * (1.0 - d * d)
    w11 = s2sq / det
    w12 = -d * noise.sigma1 * noise.sigma2 / det
    w22 = s1sq / det
    quad = w11 * q11 + 2 * w12 * q12 + w22 * q22
    return -st.n * np.log(det) - quad


def asym_cov_theta(theta: PathCoefficients, noise: NoiseCov, q: float, n: int) -> np.ndarray:
    """Asymptotic covariance (already divided by n) of (a_hat, c_hat, b_hat)."""
    a = theta.a
    s1sq = noise.sigma1 ** 2
    s2sq = noise.sigma2 ** 2
    d = noise.delta
    one_md2 = 1.0 - d * d
    v = np.empty((3, 3))
    v[0, 0] = s1sq / q
    v[0, 1] = v[1, 0] = d * noise.sigma1 * noise.sigma2 / q
    v[0, 2] = v[2, 0] = 0.0
    v[1, 1] = s2sq * (q * a * a + s1sq - q * a * a * d * d) / (q * s1sq)
    v[1, 2] = v[2, 1] = -a * s2sq * one_md2 / s1sq
    v[2, 2] = s2sq * one_md2 / s1sq
    return v / n


def asym_cov_total(theta: PathCoefficients, noise: NoiseCov, q: float, n: int) -> np.ndarray:
    """Asymptotic covariance (already divided by n) of (c_total_hat, c_hat)."""
    a, b = theta.a, theta.b
    s1, s2, d = noise.sigma1, noise.sigma2, noise.delta
    s1sq, s2sq = s1 * s1, s2 * s2
    v = np.empty((2, 2))
    v[0, 0] = (b * b * s1sq + 2 * b * d * s1 * s2 + s2sq) / q
    v[0, 1] = v[1, 0] = (s2sq + b * d * s1 * s2) / q
    v[1, 1] = s2sq * (q * a * a + s1sq - q * a * a * d * d) / (q * s1sq)
    return v / n


def _indirect_var(theta: PathCoefficients, noise: NoiseCov, q: float, n: int) -> float:
    a, b = theta.a, theta.b
    s1sq = noise.sigma1 ** 2
    s2sq = noise.sigma2 ** 2
    one_md2 = 1.0 - noise.delta ** 2
    return (s1sq * b * b / q + s2sq * one_md2 * a * a / s1sq) / n


def indirect_effect(fit: SingleLevelFit) -> tuple:
    """(product form, difference form, asymptotic variance) of the mediation effect."""
    return fit.indirect_prod, fit.indirect_diff, fit.indirect_var


def fit_single(
    series: TrialSeries,
    delta: float,
    sigmas: tuple | None = None,
    pre_centered: bool = False,
) -> SingleLevelFit:
    """Validate, center, and fully fit one session at the given delta.

    sigmas: optional (sigma1, sigma2) override; when omitted the error SDs
    are estimated from the residual covariance (the usual case).
    """
    if not pre_centered:
        validate_series(series)
        series = center(series)
    st = SuffStats.from_series(series)
    rc = _residual_cov_from_stats(st)
    collapsed = False
    if sigmas is None:
        s1sq, s2sq = estimate_sigmas(rc, delta)
        collapsed = s2sq == 0.0
        sigma2 = _COLLAPSED_SIGMA2 if collapsed else float(np.sqrt(s2sq))
        noise = NoiseCov(sigma1=float(np.sqrt(s1sq)), sigma2=sigma2, delta=delta)
    else:
        noise = NoiseCov(sigma1=float(sigmas[0]), sigma2=float(sigmas[1]), delta=delta)
    theta = _theta_from_stats(st, noise)
    q_hat = st.zz / st.n
    vt = asym_cov_theta(theta, noise, q_hat, st.n)
    vtot = asym_cov_total(theta, noise, q_hat, st.n)
    prod = theta.a * theta.b
    diff = theta.c_total - theta.c
    ivar = _indirect_var(theta, noise, q_hat, st.n)
    # A collapsed outcome scale makes the fitted density unbounded; report
    # the supremum rather than evaluating 0/0 inside the quadratic form.
    ll = float("inf") if collapsed else _loglik_from_stats(st, theta, noise)
    return SingleLevelFit(
        theta=theta,
        noise=noise,
        residual_cov=rc,
        q_hat=q_hat,
        n=st.n,
        asym_cov_theta=vt,
        asym_cov_total=vtot,
        indirect_prod=prod,
        indirect_diff=diff,
        indirect_var=ivar,
        loglik=ll,
    )


def profile_loglik_curve(series: TrialSeries, delta_grid) -> np.ndarray:
    """Maximized log-likelihood at each delta in the grid.

    For every delta the error SDs are re-estimated from the residual
    covariance and the path coefficients refit; the resulting curve is flat
    (the single-session likelihood carries no information about delta).
    Returns an array of (delta, max_loglik) rows.
    """
    delta_grid = np.asarray(delta_grid, dtype=float)
    if np.any(np.abs(delta_grid) >= 1):
        raise ValidationError("profile grid values must lie in (-1, 1)")
    validate_series(series)
    centered = center(series)
    st = SuffStats.from_series(centered)
    rc = _residual_cov_from_stats(st)
    out = np.empty((delta_grid.size, 2))
    for i, d in enumerate(delta_grid):
        s1sq, s2sq = estimate_sigmas(rc, d)
        if s2sq == 0.0:
            out[i, 0] = d
            out[i, 1] = float("inf")
            continue
        noise = NoiseCov(sigma1=float(np.sqrt(s1sq)), sigma2=float(np.sqrt(s2sq)), delta=float(d))
        theta = _theta_from_stats(st, noise)
        out[i, 0] = d
        out[i, 1] = _loglik_from_stats(st, theta, noise)
    return out
