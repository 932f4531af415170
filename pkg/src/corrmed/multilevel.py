"""Multilevel (subject/session) estimation with a shared error correlation.

The session layer reuses the single-session closed forms at each candidate
delta; the subject layer treats the three path coefficients (A, B, C) as
random intercepts: session coefficients scatter around subject lines with
diagonal covariance Lambda, subject lines scatter around the fixed effects
with diagonal covariance Psi. Four fitting strategies share that skeleton:

* ``cma_ml``  — profile likelihood: sessionwise coefficient estimates are
  scored by the summed ML log-likelihoods of three univariate
  random-intercept models, maximized over delta.
* ``cma_h``   — joint-mode profiling: for each delta, the joint log-density
  h of trials, session coefficients, and subject effects is maximized by
  block coordinate descent and the profile is maximized over delta.
* ``cma_ts``  — two-step at a caller-supplied delta: sessionwise fits, then
  REML random-intercept fits per coordinate. At delta=0 this is the
  uncorrected baseline that ignores the error correlation.
* ``cma_h_ts`` — delta from cma_h, then the two-step at that exact delta.

Reporting convention: the A fixed effect and the total effect are functions
of delta-free sessionwise slopes, so every method reports them from the
same REML random-intercept fits; the columns are therefore identical across
methods by construction. B, C, and the variance components are
method-specific.

Degenerate profile points: the joint density h grows without bound where a
variance component collapses onto its floor together with its residuals,
and such boundary states carry spuriously large h values that are not
comparable with interior modes. ``cma_h`` therefore profiles over interior
states only (boundary states evaluate as -inf); if every grid point is
degenerate it falls back to a guarded descent that holds the subject-level
variances at their REML values and lets only the pooled session-level
dispersion adapt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import LOG2PI, coordinate_descent, pack_quadratic_terms
from .core import MultilevelDataset, PathCoefficients, SessionKey, center, validate_series
from .errors import (
    NegativeVariance,
    OptimFailed,
    SingularDesign,
    SingularResiduals,
    ValidationError,
)
from .lmm import GroupedValues, fit_random_intercept

__all__ = [
    "SessionwiseFits",
    "HState",
    "DeltaSearchResult",
    "MixedEffectsFit",
    "fit_sessionwise",
    "h_likelihood",
    "cma_h_inner",
    "optimize_delta",
    "cma_ml",
    "cma_h",
    "cma_ts",
    "cma_h_ts",
    "pool_sessions",
]

VAR_FLOOR = 1e-10
# a variance this close to the floor marks a boundary (non-interior) mode
INTERIOR_TOL = 1e-8
GRID_POINTS = 21
GRID_LO, GRID_HI = -0.95, 0.95
REFINE_TOL = 1e-4
FLAT_RTOL = 1e-9


@dataclass(frozen=True)
class SessionwiseFits:
    """Independent per-session fits at one shared delta."""

    delta: float
    coefficients: dict  # SessionKey -> PathCoefficients
    sigma1_sq: dict  # SessionKey -> float
    sigma2_sq: dict  # SessionKey -> float

    def keys(self):
        return sorted(self.coefficients)


@dataclass(frozen=True)
class HState:
    """Converged joint-mode state at one delta.

    b is the fixed-effect 3-vector (A, B, C); u maps subject -> 3-vector
    random effect; b_ik maps (subject, session) -> 3-vector session
    coefficients; lam and psi are the session-level and subject-level
    variance diagonals (lam is pooled: its three entries are equal).
    h_value = h1 + h2 + h3 decomposes into the trial, session, and subject
    layers. h_trace records h after each sweep (ascending).
    """

    delta: float
    b: np.ndarray
    u: dict
    b_ik: dict
    lam: np.ndarray
    psi: np.ndarray
    sigma1_sq: dict
    sigma2_sq: dict
    h_value: float
    h1: float
    h2: float
    h3: float
    converged: bool
    iterations: int
    h_trace: np.ndarray = field(repr=False)

    @property
    def interior(self) -> bool:
        """True when no variance component ended on its floor."""
        return float(self.lam[0]) > INTERIOR_TOL and float(np.min(self.psi)) > INTERIOR_TOL


@dataclass(frozen=True)
class DeltaSearchResult:
    """Outcome of the grid-then-refine search over delta."""

    delta_hat: float
    value: float
    flat: bool
    grid_deltas: np.ndarray = field(repr=False)
    grid_values: np.ndarray = field(repr=False)
    n_evals: int = 0

    def __iter__(self):
        yield self.delta_hat
        yield self.value


@dataclass(frozen=True)
class MixedEffectsFit:
    """Complete multilevel fit: delta estimate (or the supplied delta),
    fixed effects (A, B, C), total effect, variance diagonals, and the two
    forms of the indirect effect (product A*B and difference total - C)."""

    method: str
    delta_hat: float
    fixed: np.ndarray
    fixed_se: np.ndarray
    c_total: float
    c_total_se: float
    psi: np.ndarray
    lam: np.ndarray
    indirect_prod: float
    indirect_diff: float
    per_session: SessionwiseFits
    objective_value: float
    converged: bool
    iterations: int


# ---------------------------------------------------------------------------
# session arrays: validate/center once, then everything is vectorized


class _SessionArrays:
    """Centered second moments of every session, in sorted key order."""

    def __init__(self, data: MultilevelDataset):
        keys = data.sorted_keys()
        S = len(keys)
        self.keys = keys
        self.subjects = data.subjects
        subj_index = {s: i for i, s in enumerate(self.subjects)}
        self.subj = np.array([subj_index[k.subject] for k in keys], dtype=np.int64)
        self.counts = np.bincount(self.subj, minlength=len(self.subjects)).astype(np.float64)
        self.n = np.empty(S)
        self.zz = np.empty(S)
        self.zm = np.empty(S)
        self.zr = np.empty(S)
        self.mm = np.empty(S)
        self.mr = np.empty(S)
        self.rr = np.empty(S)
        for i, key in enumerate(keys):
            series = data.sessions[key]
            try:
                validate_series(series)
            except ValidationError as exc:
                raise type(exc)(f"{key}: {exc}") from None
            c = center(series)
            z, m, r = c.z, c.m, c.r
            self.n[i] = z.shape[0]
            self.zz[i] = z @ z
            self.zm[i] = z @ m
            self.zr[i] = z @ r
            self.mm[i] = m @ m
            self.mr[i] = m @ r
            self.rr[i] = r @ r

        # delta-free residual covariance of each session, checked up front:
        # one degenerate session aborts the whole fit, naming the session
        inv = 1.0 / self.zz
        self.s11 = (self.mm - self.zm * self.zm * inv) / self.n
        self.s12 = (self.mr - self.zm * self.zr * inv) / self.n
        self.s22 = (self.rr - self.zr * self.zr * inv) / self.n
        gram = self.zz * self.mm - self.zm * self.zm
        bad = np.nonzero(gram <= 1e-12 * self.zz * self.mm)[0]
        if bad.size:
            raise SingularDesign(
                f"{keys[bad[0]]}: mediator is numerically collinear with treatment"
            )
        bad = np.nonzero(self.s11 <= 0)[0]
        if bad.size:
            raise SingularResiduals(
                f"{keys[bad[0]]}: mediator-equation residual variance is not positive"
            )
        det = self.s11 * self.s22 - self.s12 * self.s12
        bad = np.nonzero(det < -1e-10 * np.maximum(1.0, self.s11 * self.s22))[0]
        if bad.size:
            raise NegativeVariance(
                f"{keys[bad[0]]}: residual covariance determinant is negative"
            )
        self.det = np.maximum(det, 0.0)
        bad = np.nonzero(self.det <= 0)[0]
        if bad.size:
            raise SingularResiduals(
                f"{keys[bad[0]]}: outcome-equation residual variance collapses to zero"
            )
        self.gram = gram

        # session indices per subject, in session order (keys are sorted)
        self.group_slices = {}
        for i, key in enumerate(keys):
            self.group_slices.setdefault(key.subject, []).append(i)

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)

    def grouped(self, arr: np.ndarray) -> GroupedValues:
        return GroupedValues(
            {s: [float(arr[i]) for i in ix] for s, ix in self.group_slices.items()}
        )


def _thetas(sa: _SessionArrays, delta: float):
    """Closed-form per-session estimates at a shared delta.

    Returns (a, b, c, c_total, s1sq, s2sq) arrays in session order.
    """
    if not abs(delta) < 1:
        raise ValidationError(f"delta must lie in (-1, 1), got {delta}")
    one_md2 = 1.0 - delta * delta
    s1sq = sa.s11
    s2sq = sa.det / (s1sq * one_md2)
    ratio = delta * np.sqrt(s2sq / s1sq)
    a = sa.zm / sa.zz
    ols_c = (sa.mm * sa.zr - sa.zm * sa.mr) / sa.gram
    ols_b = (sa.zz * sa.mr - sa.zm * sa.zr) / sa.gram
    c = ols_c + ratio * a
    b = ols_b - ratio
    c_total = sa.zr / sa.zz
    return a, b, c, c_total, s1sq, s2sq


def _sessionwise(sa: _SessionArrays, delta: float) -> SessionwiseFits:
    a, b, c, ct, s1sq, s2sq = _thetas(sa, delta)
    coef = {}
    sig1 = {}
    sig2 = {}
    for i, key in enumerate(sa.keys):
        coef[key] = PathCoefficients(
            a=float(a[i]), b=float(b[i]), c=float(c[i]), c_total=float(ct[i])
        )
        sig1[key] = float(s1sq[i])
        sig2[key] = float(s2sq[i])
    return SessionwiseFits(delta=float(delta), coefficients=coef, sigma1_sq=sig1, sigma2_sq=sig2)


def fit_sessionwise(data: MultilevelDataset, delta: float) -> SessionwiseFits:
    """Fit every session independently at the shared delta.

    A single session reproduces the single-session closed forms exactly;
    delta=0 gives the plain least-squares (uncorrected) coefficients.
    """
    return _sessionwise(_SessionArrays(data), delta)


def pool_sessions(data: MultilevelDataset):
    """Concatenate all sessions (sorted key order) into one trial series."""
    from .core import TrialSeries

    zs, ms, rs = [], [], []
    for key in data.sorted_keys():
        s = data.sessions[key]
        zs.append(s.z)
        ms.append(s.m)
        rs.append(s.r)
    return TrialSeries(z=np.concatenate(zs), m=np.concatenate(ms), r=np.concatenate(rs))


# ---------------------------------------------------------------------------
# joint log-density h


def h_likelihood(data: MultilevelDataset, state: HState):
    """Recompute (h, h1, h2, h3) of a state directly from the data.

    h1 sums the exact bivariate-normal log-densities of the trial pairs
    given the state's session coefficients and noise model; h2 sums the
    trivariate-normal log-densities of the session coefficients around the
    subject lines (covariance diag lam); h3 sums the trivariate-normal
    log-densities of the subject effects (covariance diag psi). All terms
    keep their normalizing constants so values are comparable across delta.
    """
    d = state.delta
    one_md2 = 1.0 - d * d
    h1 = 0.0
    for key in sorted(data.sessions):
        series = center(data.sessions[key])
        z, m, r = series.z, series.m, series.r
        n = z.shape[0]
        a, b, c = (float(x) for x in state.b_ik[key])
        s1sq = state.sigma1_sq[key]
        s2sq = state.sigma2_sq[key]
        e1 = m - a * z
        e2 = r - c * z - b * m
        w11 = 1.0 / (s1sq * one_md2)
        w22 = 1.0 / (s2sq * one_md2)
        w12 = -d / (math.sqrt(s1sq * s2sq) * one_md2)
        quad = (
            w11 * float(e1 @ e1) + 2.0 * w12 * float(e1 @ e2) + w22 * float(e2 @ e2)
        )
        h1 += -n * LOG2PI - 0.5 * n * math.log(s1sq * s2sq * one_md2) - 0.5 * quad

    lam = np.asarray(state.lam, dtype=float)
    psi = np.asarray(state.psi, dtype=float)
    h2 = 0.0
    S = 0
    for key, bik in state.b_ik.items():
        resid = np.asarray(bik, dtype=float) - state.b - np.asarray(state.u[key.subject])
        h2 += -1.5 * LOG2PI - 0.5 * float(np.log(lam).sum()) - 0.5 * float(
            (resid * resid / lam).sum()
        )
        S += 1
    h3 = 0.0
    for u_i in state.u.values():
        u_i = np.asarray(u_i, dtype=float)
        h3 += -1.5 * LOG2PI - 0.5 * float(np.log(psi).sum()) - 0.5 * float(
            (u_i * u_i / psi).sum()
        )
    return h1 + h2 + h3, h1, h2, h3


def _inner(sa: _SessionArrays, delta: float, psi_fixed=None, lam_fixed=None) -> HState:
    """Maximize h at one delta by block coordinate descent.

    psi_fixed / lam_fixed: when given, the corresponding variance components
    stay at these values (the guarded modes used as fallbacks on degenerate
    profiles); otherwise they are maximized along with everything else.
    """
    a, b, c, _, s1sq, s2sq = _thetas(sa, delta)
    pack, h1_const = pack_quadratic_terms(
        sa.n, sa.zz, sa.zm, sa.zr, sa.mm, sa.mr, sa.rr, s1sq, s2sq, delta
    )
    b0 = np.column_stack([a, b, c])
    var0 = np.var(b0, axis=0)
    # split the observed coefficient dispersion between the two layers to
    # start; the split affects the path, not the fixed point
    if lam_fixed is None:
        lam0 = np.full(3, max(float(var0.mean()), VAR_FLOOR))
        update_lam = True
    else:
        lam0 = np.full(3, max(float(lam_fixed), VAR_FLOOR))
        update_lam = False
    if psi_fixed is None:
        psi0 = np.maximum(0.5 * var0, VAR_FLOOR)
        update_psi = True
    else:
        psi0 = np.maximum(np.asarray(psi_fixed, dtype=float), VAR_FLOOR)
        update_psi = False
    b_ik, u, bvec, lam, psi, trace, h1, h2, h3, iters, conv = coordinate_descent(
        pack,
        sa.subj,
        sa.counts,
        b0,
        lam0,
        psi0,
        h1_const,
        update_lam=update_lam,
        update_psi=update_psi,
        var_floor=VAR_FLOOR,
    )
    return HState(
        delta=float(delta),
        b=bvec,
        u={s: u[i] for i, s in enumerate(sa.subjects)},
        b_ik={key: b_ik[i] for i, key in enumerate(sa.keys)},
        lam=lam,
        psi=psi,
        sigma1_sq={key: float(s1sq[i]) for i, key in enumerate(sa.keys)},
        sigma2_sq={key: float(s2sq[i]) for i, key in enumerate(sa.keys)},
        h_value=float(trace[-1]),
        h1=float(h1),
        h2=float(h2),
        h3=float(h3),
        converged=bool(conv),
        iterations=int(iters),
        h_trace=trace,
    )


def cma_h_inner(data: MultilevelDataset, delta: float) -> HState:
    """Profile evaluation at one delta: sessionwise noise models, then the
    joint mode over session coefficients, subject effects, fixed effects,
    and the (pooled-session, coordinatewise-subject) variance components.

    Non-convergence after the sweep cap is reported through the returned
    state's ``converged`` flag, never an exception.
    """
    return _inner(_SessionArrays(data), delta)


# ---------------------------------------------------------------------------
# outer search over delta


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _finite(v) -> bool:
    return math.isfinite(v)


def optimize_delta(objective) -> DeltaSearchResult:
    """Maximize a scalar objective over delta in (-1, 1).

    Coarse scan on 21 equally spaced points of [-0.95, 0.95], then
    derivative-free golden-section refinement inside the bracket around the
    best grid point until the bracket is narrower than 1e-4. Non-finite
    evaluations are treated as invalid (worse than everything finite);
    OptimFailed is raised only when the whole grid is invalid. A flat
    profile (finite values all within 1e-9 relative) short-circuits to the
    grid midpoint with the ``flat`` flag set.
    """
    grid = np.linspace(GRID_LO, GRID_HI, GRID_POINTS)
    vals = np.empty(GRID_POINTS)
    for i, dd in enumerate(grid):
        vals[i] = float(objective(float(dd)))
    finite = np.isfinite(vals)
    n_evals = GRID_POINTS
    if not finite.any():
        raise OptimFailed("objective is non-finite at every grid point")
    vmax = float(vals[finite].max())
    vmin = float(vals[finite].min())
    if vmax - vmin <= FLAT_RTOL * (1.0 + abs(vmax)):
        mid = (GRID_POINTS - 1) // 2
        value = float(vals[mid]) if finite[mid] else vmax
        return DeltaSearchResult(
            delta_hat=float(grid[mid]),
            value=value,
            flat=True,
            grid_deltas=grid,
            grid_values=vals,
            n_evals=n_evals,
        )

    masked = np.where(finite, vals, -np.inf)
    k = int(np.argmax(masked))
    best_d = float(grid[k])
    best_v = float(vals[k])
    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, GRID_POINTS - 1)])

    def val_at(x):
        nonlocal n_evals, best_d, best_v
        v = float(objective(float(x)))
        n_evals += 1
        if _finite(v) and v > best_v:
            best_d, best_v = float(x), v
        return v if _finite(v) else -math.inf

    a, bb = lo, hi
    x1 = bb - _GOLDEN * (bb - a)
    x2 = a + _GOLDEN * (bb - a)
    f1 = val_at(x1)
    f2 = val_at(x2)
    while bb - a > REFINE_TOL:
        if f1 >= f2:
            bb, x2, f2 = x2, x1, f1
            x1 = bb - _GOLDEN * (bb - a)
            f1 = val_at(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (bb - a)
            f2 = val_at(x2)
    return DeltaSearchResult(
        delta_hat=best_d,
        value=best_v,
        flat=False,
        grid_deltas=grid,
        grid_values=vals,
        n_evals=n_evals,
    )


# ---------------------------------------------------------------------------
# reporting helpers shared by the four methods


def _ri_se(var_between: float, var_within: float, counts: np.ndarray) -> float:
    w = 1.0 / (max(var_between, 0.0) + max(var_within, VAR_FLOOR) / counts)
    return float(1.0 / math.sqrt(w.sum()))


def _require_subjects(sa: _SessionArrays):
    if sa.n_subjects < 2:
        raise ValidationError("multilevel estimation needs at least 2 subjects")


class _SharedReports:
    """REML random-intercept fits of the delta-free coordinates (the
    treatment->mediator slope and the total-effect slope). Every method
    reports these identically, which is what makes the A and total-effect
    columns method-invariant."""

    def __init__(self, sa: _SessionArrays):
        a = sa.zm / sa.zz
        ct = sa.zr / sa.zz
        self.fit_a = fit_random_intercept(sa.grouped(a), criterion="reml")
        self.fit_ct = fit_random_intercept(sa.grouped(ct), criterion="reml")
        self.a_se = _ri_se(self.fit_a.var_between, self.fit_a.var_within, sa.counts)
        self.ct_se = _ri_se(self.fit_ct.var_between, self.fit_ct.var_within, sa.counts)


def _assemble(
    method,
    sa,
    shared,
    delta_hat,
    b_fixed,
    c_fixed,
    b_se,
    c_se,
    psi,
    lam,
    objective_value,
    converged,
    iterations,
) -> MixedEffectsFit:
    a_fixed = shared.fit_a.mean
    c_total = shared.fit_ct.mean
    fixed = np.array([a_fixed, b_fixed, c_fixed])
    fixed_se = np.array([shared.a_se, b_se, c_se])
    return MixedEffectsFit(
        method=method,
        delta_hat=float(delta_hat),
        fixed=fixed,
        fixed_se=fixed_se,
        c_total=float(c_total),
        c_total_se=float(shared.ct_se),
        psi=np.asarray(psi, dtype=float),
        lam=np.asarray(lam, dtype=float),
        indirect_prod=float(a_fixed * b_fixed),
        indirect_diff=float(c_total - c_fixed),
        per_session=_sessionwise(sa, delta_hat),
        objective_value=float(objective_value),
        converged=bool(converged),
        iterations=int(iterations),
    )


# ---------------------------------------------------------------------------
# the four methods


def cma_ts(data: MultilevelDataset, delta: float) -> MixedEffectsFit:
    """Two-step fit at a known delta: sessionwise closed forms, then a REML
    random-intercept model per coordinate. The session-level variance
    estimates absorb the sessionwise estimation noise on top of the true
    coefficient dispersion, so they run high on noisy sessions."""
    sa = _SessionArrays(data)
    _require_subjects(sa)
    return _cma_ts(sa, delta, _SharedReports(sa))


def _cma_ts(sa: _SessionArrays, delta: float, shared: _SharedReports) -> MixedEffectsFit:
    a, b, c, ct, _, _ = _thetas(sa, delta)
    fit_b = fit_random_intercept(sa.grouped(b), criterion="reml")
    fit_c = fit_random_intercept(sa.grouped(c), criterion="reml")
    psi = np.array([shared.fit_a.var_between, fit_b.var_between, fit_c.var_between])
    lam = np.array([shared.fit_a.var_within, fit_b.var_within, fit_c.var_within])
    objective = (
        shared.fit_a.loglik + fit_b.loglik + fit_c.loglik
    )
    return _assemble(
        "ts",
        sa,
        shared,
        delta,
        fit_b.mean,
        fit_c.mean,
        _ri_se(fit_b.var_between, fit_b.var_within, sa.counts),
        _ri_se(fit_c.var_between, fit_c.var_within, sa.counts),
        psi,
        lam,
        objective,
        True,
        0,
    )


def cma_ml(data: MultilevelDataset) -> MixedEffectsFit:
    """Estimate delta by maximizing the summed ML random-intercept
    log-likelihoods of the sessionwise coefficient estimates."""
    sa = _SessionArrays(data)
    _require_subjects(sa)
    shared = _SharedReports(sa)

    grouped_cache = {}

    def ml_fits(delta):
        key = float(delta)
        if key not in grouped_cache:
            a, b, c, _, _, _ = _thetas(sa, key)
            grouped_cache[key] = (
                fit_random_intercept(sa.grouped(a), criterion="ml"),
                fit_random_intercept(sa.grouped(b), criterion="ml"),
                fit_random_intercept(sa.grouped(c), criterion="ml"),
            )
        return grouped_cache[key]

    def objective(delta):
        fa, fb, fc = ml_fits(delta)
        return fa.loglik + fb.loglik + fc.loglik

    res = optimize_delta(objective)
    fa, fb, fc = ml_fits(res.delta_hat)
    psi = np.array([shared.fit_a.var_between, fb.var_between, fc.var_between])
    lam = np.array([shared.fit_a.var_within, fb.var_within, fc.var_within])
    return _assemble(
        "ml",
        sa,
        shared,
        res.delta_hat,
        fb.mean,
        fc.mean,
        _ri_se(fb.var_between, fb.var_within, sa.counts),
        _ri_se(fc.var_between, fc.var_within, sa.counts),
        psi,
        lam,
        res.value,
        True,
        res.n_evals,
    )


def _reml_psi(sa: _SessionArrays, delta: float) -> np.ndarray:
    a, b, c, _, _, _ = _thetas(sa, delta)
    return np.array(
        [
            fit_random_intercept(sa.grouped(v), criterion="reml").var_between
            for v in (a, b, c)
        ]
    )


def _reml_lam(sa: _SessionArrays, delta: float) -> float:
    # pooled counterpart of the shared session-level dispersion
    a, b, c, _, _, _ = _thetas(sa, delta)
    return float(
        np.mean(
            [
                fit_random_intercept(sa.grouped(v), criterion="reml").var_within
                for v in (a, b, c)
            ]
        )
    )


def _cma_h_search(sa: _SessionArrays):
    """Profile-h search over delta; returns (DeltaSearchResult, final HState).

    Primary pass profiles the unrestricted joint mode over interior states.
    If every grid point lands on a variance floor (small/degenerate data),
    a guarded pass holds the subject-level variances at their REML values.
    If the session-level dispersion collapses as well (no real variation at
    either level), a final pass pins both components at their REML values,
    which keeps h finite and reduces the fit to a shrunk pooled model.
    """
    cache = {}

    def objective(delta):
        state = _inner(sa, delta)
        cache[float(delta)] = state
        return state.h_value if state.interior else -math.inf

    def guarded(delta):
        state = _inner(sa, delta, psi_fixed=_reml_psi(sa, delta))
        cache[float(delta)] = state
        return state.h_value if float(state.lam[0]) > INTERIOR_TOL else -math.inf

    def pinned(delta):
        state = _inner(
            sa, delta, psi_fixed=_reml_psi(sa, delta), lam_fixed=_reml_lam(sa, delta)
        )
        cache[float(delta)] = state
        return state.h_value

    try:
        res = optimize_delta(objective)
    except OptimFailed:
        cache.clear()
        try:
            res = optimize_delta(guarded)
        except OptimFailed:
            cache.clear()
            res = optimize_delta(pinned)
    state = cache[float(res.delta_hat)]
    return res, state


def cma_h(data: MultilevelDataset) -> MixedEffectsFit:
    """Estimate delta by maximizing the profile joint log-density h."""
    sa = _SessionArrays(data)
    _require_subjects(sa)
    shared = _SharedReports(sa)
    res, state = _cma_h_search(sa)
    lam_val = float(state.lam[0])
    se_b = _ri_se(float(state.psi[1]), lam_val, sa.counts)
    se_c = _ri_se(float(state.psi[2]), lam_val, sa.counts)
    return _assemble(
        "h",
        sa,
        shared,
        res.delta_hat,
        float(state.b[1]),
        float(state.b[2]),
        se_b,
        se_c,
        state.psi,
        state.lam,
        state.h_value,
        state.converged,
        state.iterations,
    )


def cma_h_ts(data: MultilevelDataset) -> MixedEffectsFit:
    """Hybrid: delta from the profile-h search, coefficients and variance
    components from the two-step REML fit at that exact delta."""
    sa = _SessionArrays(data)
    _require_subjects(sa)
    shared = _SharedReports(sa)
    res, _ = _cma_h_search(sa)
    fit = _cma_ts(sa, res.delta_hat, shared)
    return MixedEffectsFit(
        method="h_ts",
        delta_hat=fit.delta_hat,
        fixed=fit.fixed,
        fixed_se=fit.fixed_se,
        c_total=fit.c_total,
        c_total_se=fit.c_total_se,
        psi=fit.psi,
        lam=fit.lam,
        indirect_prod=fit.indirect_prod,
        indirect_diff=fit.indirect_diff,
        per_session=fit.per_session,
        objective_value=fit.objective_value,
        converged=fit.converged,
        iterations=fit.iterations,
    )
