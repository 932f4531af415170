"""Univariate Gaussian random-intercept model, ML and REML.

Model: y_ik = mu + u_i + eps_ik with u_i ~ N(0, var_between) and
eps_ik ~ N(0, var_within), i = 1..N subjects, k = 1..K_i sessions.

Fitting profiles the likelihood down to the single variance ratio
t = var_between/var_within: for a given t the GLS mean and the residual
scale have closed forms, leaving a smooth 1-D objective that is maximized
by a coarse grid scan followed by bounded Brent refinement (robust at the
t = 0 boundary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ValidationError

__all__ = ["GroupedValues", "RandomInterceptFit", "fit_random_intercept", "loglik_at"]

VAR_FLOOR = 1e-12
_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GroupedValues:
    """Session-level values of one coefficient, grouped by subject id."""

    values: dict

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValidationError("random-intercept fit needs at least 2 subjects")
        clean = {}
        for sid in sorted(self.values):
            arr = np.atleast_1d(np.asarray(self.values[sid], dtype=float))
            if arr.size < 1:
                raise ValidationError(f"subject {sid} has no values")
            clean[sid] = arr
        object.__setattr__(self, "values", clean)

    @property
    def n_subjects(self) -> int:
        return len(self.values)

    @property
    def counts(self) -> dict:
        return {sid: v.size for sid, v in self.values.items()}


@dataclass(frozen=True)
class RandomInterceptFit:
    mean: float
    var_between: float
    var_within: float
    loglik: float
    blups: dict
    criterion: str


@dataclass(frozen=True)
class _Stats:
    # per-subject sufficient statistics, in sorted-subject order
    ids: list
    k: np.ndarray      # session counts
    ybar: np.ndarray   # subject means
    ssw: np.ndarray    # within-subject sums of squares
    n_total: int


def _stats(data: GroupedValues) -> _Stats:
    ids = list(data.values)
    k = np.array([data.values[s].size for s in ids], dtype=float)
    ybar = np.array([data.values[s].mean() for s in ids])
    ssw = np.array([float(((data.values[s] - data.values[s].mean()) ** 2).sum()) for s in ids])
    return _Stats(ids=ids, k=k, ybar=ybar, ssw=ssw, n_total=int(k.sum()))


def _gls_mean(st: _Stats, t: float) -> tuple:
    w = st.k / (1.0 + t * st.k)
    sw = w.sum()
    mu = float((w * st.ybar).sum() / sw)
    return mu, w, sw


def _profiled(st: _Stats, t: float, criterion: str) -> float:
    """Log-likelihood maximized over (mu, var_within) at fixed ratio t."""
    mu, w, sw = _gls_mean(st, t)
    rss = float(st.ssw.sum() + (w * (st.ybar - mu) ** 2).sum())
    logdet_ratio = float(np.log1p(t * st.k).sum())
    n = st.n_total
    if criterion == "ml":
        s2 = max(rss / n, VAR_FLOOR)
        return -0.5 * (n * _LOG2PI + n * math.log(s2) + logdet_ratio + rss / s2)
    s2 = max(rss / (n - 1), VAR_FLOOR)
    return -0.5 * (
        (n - 1) * _LOG2PI
        + (n - 1) * math.log(s2)
        + logdet_ratio
        + math.log(sw)
        + rss / s2
    )


def _finish(st: _Stats, t: float, criterion: str) -> RandomInterceptFit:
    mu, w, _ = _gls_mean(st, t)
    rss = float(st.ssw.sum() + (w * (st.ybar - mu) ** 2).sum())
    dof = st.n_total if criterion == "ml" else st.n_total - 1
    var_within = max(rss / dof, VAR_FLOOR)
    var_between = t * var_within
    shrink = t * st.k / (1.0 + t * st.k)
    blups = {sid: float(shrink[i] * (st.ybar[i] - mu)) for i, sid in enumerate(st.ids)}
    ll = _profiled(st, t, criterion)
    return RandomInterceptFit(
        mean=mu,
        var_between=var_between,
        var_within=var_within,
        loglik=ll,
        blups=blups,
        criterion=criterion,
    )


def _fit_zero_within(st: _Stats, criterion: str) -> RandomInterceptFit:
    # Zero within-subject spread: the within variance is degenerate, clamp it
    # to the floor and fit the subject means directly.
    mu = float(st.ybar.mean())
    dev = st.ybar - mu
    n_sub = len(st.ids)
    if criterion == "ml":
        var_between = float((dev ** 2).sum() / n_sub)
    else:
        var_between = float((dev ** 2).sum() / (n_sub - 1))
    var_within = VAR_FLOOR
    blups = {sid: float(dev[i]) for i, sid in enumerate(st.ids)}
    ll = _loglik_at_stats(st, mu, var_between, var_within, criterion)
    return RandomInterceptFit(
        mean=mu,
        var_between=var_between,
        var_within=var_within,
        loglik=ll,
        blups=blups,
        criterion=criterion,
    )


def fit_random_intercept(data: GroupedValues, criterion: str = "reml") -> RandomInterceptFit:
    """Maximize the (restricted) likelihood over (mean, var_between, var_within)."""
    criterion = criterion.lower()
    if criterion not in ("ml", "reml"):
        raise ValidationError(f"criterion must be 'ml' or 'reml', got {criterion}")
    st = _stats(data)
    if float(st.ssw.sum()) == 0.0:
        return _fit_zero_within(st, criterion)

    # Coarse grid over the variance ratio, including the t=0 boundary.
    grid = np.concatenate([[0.0], np.logspace(-8.0, 8.0, 65)])
    vals = np.array([_profiled(st, t, criterion) for t in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    if lo == hi:
        hi = lo + 1.0
    res = minimize_scalar(
        lambda t: -_profiled(st, t, criterion),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12 * (1.0 + hi)},
    )
    candidates = [0.0, grid[i], float(res.x)]
    best = max(candidates, key=lambda t: _profiled(st, t, criterion))
    # One polish pass in a narrow window around the winner sharpens the
    # boundary-adjacent case where the first bracket was wide.
    if best > 0:
        res2 = minimize_scalar(
            lambda t: -_profiled(st, t, criterion),
            bounds=(best * 0.5, best * 2.0),
            method="bounded",
            options={"xatol": 1e-12 * (1.0 + best)},
        )
        if _profiled(st, float(res2.x), criterion) > _profiled(st, best, criterion):
            best = float(res2.x)
    return _finish(st, best, criterion)


def _loglik_at_stats(st: _Stats, mean, var_between, var_within, criterion) -> float:
    t = var_between / var_within
    w = st.k / (1.0 + t * st.k)
    logdet_ratio = float(np.log1p(t * st.k).sum())
    n = st.n_total
    if criterion == "ml":
        quad = float(st.ssw.sum() + (w * (st.ybar - mean) ** 2).sum()) / var_within
        return -0.5 * (n * _LOG2PI + n * math.log(var_within) + logdet_ratio + quad)
    # Restricted likelihood: the fixed effect is integrated out, so the
    # supplied mean does not enter; evaluated at the GLS mean.
    mu, w, sw = _gls_mean(st, t)
    quad = float(st.ssw.sum() + (w * (st.ybar - mu) ** 2).sum()) / var_within
    return -0.5 * (
        (n - 1) * _LOG2PI
        + (n - 1) * math.log(var_within)
        + logdet_ratio
        + math.log(sw)
        + quad
    )


def loglik_at(data: GroupedValues, mean, var_between, var_within, criterion="ml") -> float:
    """Exact (restricted) log-likelihood at the supplied parameter values,
    including all normalizing constants."""
    criterion = criterion.lower()
    if criterion not in ("ml", "reml"):
        raise ValidationError(f"criterion must be 'ml' or 'reml', got {criterion}")
    if not var_within > 0:
        raise ValidationError("var_within must be positive")
    if var_between < 0:
        raise ValidationError("var_between must be nonnegative")
    return _loglik_at_stats(_stats(data), mean, var_between, var_within, criterion)
