"""Interval estimation: asymptotic normal intervals for single-session fits
and a wild bootstrap with bias correction for the multilevel methods.

The bootstrap perturbs at the trial level: per session, the fitted residual
pair gets one shared Rademacher sign per trial (preserving both residual
second moments and their cross-correlation exactly in expectation), the
outcome is rebuilt from the regenerated mediator so replicates exercise the
mediation pathway, and the full method — including re-estimation of the
error correlation — reruns on each replicate. Replicate r draws its own
stream from (seed, r), so results are deterministic and independent of any
execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import SeedSequence, default_rng
from scipy.stats import norm

from .core import MultilevelDataset, TrialSeries, center
from .errors import (
    CorrmedError,
    MissingDelta,
    ReplicateFailure,
    UnknownQuantity,
    ValidationError,
)
from .single_level import SingleLevelFit, fit_single

__all__ = [
    "QUANTITIES",
    "IntervalEstimate",
    "BootstrapRun",
    "asymptotic_ci",
    "wild_bootstrap",
    "bc_interval",
]

QUANTITIES = ("delta", "a", "b", "c", "c_total", "ab_prod", "ab_diff")

_MAX_FAIL_FRACTION = 0.10


@dataclass(frozen=True)
class IntervalEstimate:
    """A point with a two-sided confidence interval."""

    point: float
    lower: float
    upper: float
    level: float
    method: str  # "asymptotic" or "wild_bc"


@dataclass(frozen=True)
class BootstrapRun:
    """All replicate estimates of one bootstrap experiment.

    replicate_estimates maps each quantity name to the vector of successful
    replicate values; z0 holds the bias-correction constant per quantity
    (normal quantile of the fraction of replicates below the original
    point, clamped to +-Phi^-1(1 - 1/(2B))); bias_corrected_mean is
    2*point - mean(replicates), the plug-in bias-corrected point.
    """

    method: str
    n_replicates: int
    seed: int
    point_estimates: dict
    replicate_estimates: dict
    z0: dict
    bias_corrected_mean: dict
    n_failed: int
    failures: list = field(repr=False)


def asymptotic_ci(fit: SingleLevelFit, quantity: str, level: float = 0.95) -> IntervalEstimate:
    """Normal-theory interval for one quantity of a single-session fit.

    Variances come from the fit's asymptotic covariance matrices (already
    scaled by 1/n); a zero variance yields a zero-width interval.
    """
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    points = {
        "a": (fit.theta.a, fit.asym_cov_theta[0, 0]),
        "c": (fit.theta.c, fit.asym_cov_theta[1, 1]),
        "b": (fit.theta.b, fit.asym_cov_theta[2, 2]),
        "c_total": (fit.theta.c_total, fit.asym_cov_total[0, 0]),
        "ab_prod": (fit.indirect_prod, fit.indirect_var),
        "ab_diff": (fit.indirect_diff, fit.indirect_var),
    }
    if quantity not in points:
        raise UnknownQuantity(
            f"no asymptotic interval for {quantity!r}; choose from {sorted(points)}"
        )
    point, var = points[quantity]
    if var < 0:
        var = 0.0
    half = float(norm.ppf(0.5 * (1.0 + level))) * math.sqrt(var)
    return IntervalEstimate(
        point=float(point),
        lower=float(point - half),
        upper=float(point + half),
        level=float(level),
        method="asymptotic",
    )


def _point_estimates(method, fit_obj, delta):
    if method == "single":
        return {
            "delta": float(delta),
            "a": fit_obj.theta.a,
            "b": fit_obj.theta.b,
            "c": fit_obj.theta.c,
            "c_total": fit_obj.theta.c_total,
            "ab_prod": fit_obj.indirect_prod,
            "ab_diff": fit_obj.indirect_diff,
        }
    return {
        "delta": fit_obj.delta_hat,
        "a": float(fit_obj.fixed[0]),
        "b": float(fit_obj.fixed[1]),
        "c": float(fit_obj.fixed[2]),
        "c_total": fit_obj.c_total,
        "ab_prod": fit_obj.indirect_prod,
        "ab_diff": fit_obj.indirect_diff,
    }


def _make_fitter(method, delta):
    """Return (fit_dataset -> quantity dict) for the requested method."""
    from . import multilevel as ml

    if method == "ts" and delta is None:
        raise MissingDelta("the two-step method needs an explicit delta")
    if method == "single" and delta is None:
        raise MissingDelta("single-session bootstrap needs an explicit delta")

    if method == "single":

        def run(data):
            keys = data.sorted_keys()
            if len(keys) != 1:
                raise ValidationError("method 'single' expects exactly one session")
            fit = fit_single(data.sessions[keys[0]], delta)
            return _point_estimates("single", fit, delta)

    elif method == "ml":

        def run(data):
            return _point_estimates("ml", ml.cma_ml(data), None)

    elif method == "h":

        def run(data):
            return _point_estimates("h", ml.cma_h(data), None)

    elif method == "ts":

        def run(data):
            return _point_estimates("ts", ml.cma_ts(data, delta), None)

    elif method == "h_ts":

        def run(data):
            return _point_estimates("h_ts", ml.cma_h_ts(data), None)

    else:
        raise ValidationError(
            f"unknown bootstrap method {method!r}; choose ml, h, ts, h_ts, or single"
        )
    return run


def wild_bootstrap(
    data: MultilevelDataset,
    method: str,
    B: int = 500,
    seed: int = 0,
    delta: float | None = None,
) -> BootstrapRun:
    """Trial-level wild bootstrap of a full fit, re-estimating everything
    (the error correlation included) on every replicate.

    Residuals are taken from the per-session closed-form fits at the
    original delta estimate; each replicate flips them with shared-per-trial
    Rademacher signs and rebuilds mediator and outcome (outcome from the
    rebuilt mediator). Replicates that fail to fit are logged; more than
    10% failures aborts with ReplicateFailure.
    """
    if B < 1:
        raise ValidationError("B must be at least 1")
    fitter = _make_fitter(method, delta)
    points = fitter(data)
    delta_used = points["delta"]

    # session frame: centered arrays + residuals at the fitted coefficients
    from . import multilevel as ml

    per_session = ml.fit_sessionwise(data, delta_used)
    frames = []
    for key in data.sorted_keys():
        series = center(data.sessions[key])
        coef = per_session.coefficients[key]
        z, m, r = series.z, series.m, series.r
        e1 = m - coef.a * z
        e2 = r - coef.c * z - coef.b * m
        frames.append((key, z, coef, e1, e2))

    reps = {q: [] for q in QUANTITIES}
    failures = []
    for rep in range(B):
        rng = default_rng(SeedSequence([seed, rep]))
        sessions = {}
        for key, z, coef, e1, e2 in frames:
            w = rng.integers(0, 2, size=z.shape[0]) * 2.0 - 1.0
            m_star = coef.a * z + w * e1
            r_star = coef.c * z + coef.b * m_star + w * e2
            sessions[key] = TrialSeries(z=z, m=m_star, r=r_star)
        try:
            est = fitter(MultilevelDataset(sessions=sessions))
        except CorrmedError as exc:
            failures.append((rep, f"{type(exc).__name__}: {exc}"))
            continue
        for q in QUANTITIES:
            reps[q].append(est[q])

    if len(failures) > _MAX_FAIL_FRACTION * B:
        raise ReplicateFailure(
            f"{len(failures)} of {B} bootstrap replicates failed "
            f"(first: replicate {failures[0][0]}, {failures[0][1]})"
        )

    replicate_estimates = {q: np.asarray(v, dtype=float) for q, v in reps.items()}
    n_ok = B - len(failures)
    z0 = {}
    bc_mean = {}
    clamp = float(norm.ppf(1.0 - 1.0 / (2.0 * max(n_ok, 1))))
    for q in QUANTITIES:
        arr = replicate_estimates[q]
        frac = float(np.mean(arr < points[q])) if arr.size else 0.5
        raw = float(norm.ppf(frac))
        z0[q] = float(np.clip(raw, -clamp, clamp))
        bc_mean[q] = float(2.0 * points[q] - arr.mean()) if arr.size else points[q]
    return BootstrapRun(
        method=method,
        n_replicates=B,
        seed=int(seed),
        point_estimates=points,
        replicate_estimates=replicate_estimates,
        z0=z0,
        bias_corrected_mean=bc_mean,
        n_failed=len(failures),
        failures=failures,
    )


def bc_interval(run: BootstrapRun, quantity: str, level: float = 0.95) -> IntervalEstimate:
    """Bias-corrected percentile interval from a bootstrap run.

    Endpoints are the replicate quantiles at Phi(2*z0 -+ z_(1+level)/2). A
    degenerate replicate distribution (all values equal) collapses to a
    zero-width interval at that value.
    """
    if quantity not in QUANTITIES:
        raise UnknownQuantity(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    arr = run.replicate_estimates[quantity]
    if arr.size == 0:
        raise ValidationError("bootstrap run has no successful replicates")
    point = float(run.point_estimates[quantity])
    if float(arr.max()) == float(arr.min()):
        v = float(arr[0])
        return IntervalEstimate(point=point, lower=v, upper=v, level=float(level), method="wild_bc")
    z0 = run.z0[quantity]
    za = float(norm.ppf(0.5 * (1.0 + level)))
    p_lo = float(norm.cdf(2.0 * z0 - za))
    p_hi = float(norm.cdf(2.0 * z0 + za))
    lower = float(np.quantile(arr, p_lo))
    upper = float(np.quantile(arr, p_hi))
    return IntervalEstimate(
        point=point, lower=lower, upper=upper, level=float(level), method="wild_bc"
    )
