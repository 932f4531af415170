"""Multilevel estimator tests: per-session fits, the hierarchical objective,
its block-coordinate maximizer, the delta search, and the four fit methods."""

import math

import numpy as np
import pytest
from scipy.stats import norm

import oracles
from corrmed._kernels import pack_quadratic_terms
from corrmed.core import MultilevelDataset, SessionKey, TrialSeries, center
from corrmed.errors import (
    DegenerateTreatment,
    OptimFailed,
    SingularDesign,
    SingularResiduals,
    ValidationError,
)
from corrmed.lmm import GroupedValues, fit_random_intercept
from corrmed.multilevel import (
    HState,
    _SessionArrays,
    cma_h,
    cma_h_inner,
    cma_h_ts,
    cma_ml,
    cma_ts,
    fit_sessionwise,
    h_likelihood,
    optimize_delta,
    pool_sessions,
)
from corrmed.simulate import MultilevelConfig, gen_multilevel
from corrmed.single_level import fit_single

LOG2PI = math.log(2.0 * math.pi)


@pytest.fixture(scope="module")
def main_design():
    cfg = MultilevelConfig(
        n_subjects=50, n_sessions=4, trial_mean=100.0,
        fixed=(-5.0, -10.0, 4.0), delta=0.5, seed=0,
    )
    return gen_multilevel(cfg)


@pytest.fixture(scope="module")
def main_state(main_design):
    return cma_h_inner(main_design, 0.5)


@pytest.fixture(scope="module")
def small():
    cfg = MultilevelConfig(
        n_subjects=6, n_sessions=3, trial_mean=40.0,
        fixed=(-5.0, -10.0, 4.0), delta=0.3, seed=0,
    )
    return gen_multilevel(cfg)


@pytest.fixture(scope="module")
def small_fits(small):
    return {
        "h": cma_h(small),
        "h_ts": cma_h_ts(small),
        "ml": cma_ml(small),
        "ts_a": cma_ts(small, 0.2),
        "ts_b": cma_ts(small, -0.5),
    }


@pytest.fixture(scope="module")
def tiny():
    cfg = MultilevelConfig(
        n_subjects=2, n_sessions=2, trial_mean=10.0,
        fixed=(-5.0, -10.0, 4.0), delta=0.3, seed=1,
    )
    return gen_multilevel(cfg)


def noise(rng, n, sd=1.0):
    return sd * rng.standard_normal(n)


# ---------------------------------------------------------------------------
# per-session fits at a shared delta


class TestFitSessionwise:
    def test_single_session_matches_single_level_fit(self, tiny):
        key = SessionKey(1, 1)
        one = MultilevelDataset({key: tiny.sessions[key]})
        sw = fit_sessionwise(one, 0.4)
        ref = fit_single(tiny.sessions[key], 0.4)
        co = sw.coefficients[key]
        assert co.a == ref.theta.a
        assert co.c_total == ref.theta.c_total
        assert sw.sigma1_sq[key] == ref.residual_cov.s11
        assert math.isclose(sw.sigma2_sq[key], ref.noise.sigma2 ** 2, rel_tol=1e-12)
        # the correction-term rounding differs between the scalar and the
        # vectorized closed forms, so b and c agree to rounding, not bitwise
        assert math.isclose(co.b, ref.theta.b, rel_tol=1e-12)
        assert math.isclose(co.c, ref.theta.c, rel_tol=1e-12, abs_tol=1e-12)

    def test_zero_delta_gives_uncorrected_least_squares(self, small):
        sw = fit_sessionwise(small, 0.0)
        for key in sw.keys():
            s = center(small.sessions[key])
            a_ols = float(s.z @ s.m) / float(s.z @ s.z)
            X = np.column_stack([s.z, s.m])
            (c_ols, b_ols), *_ = np.linalg.lstsq(X, s.r, rcond=None)
            co = sw.coefficients[key]
            assert math.isclose(co.a, a_ols, rel_tol=1e-10)
            assert math.isclose(co.b, b_ols, rel_tol=1e-10)
            assert math.isclose(co.c, c_ols, rel_tol=1e-10, abs_tol=1e-10)

    def test_session_estimates_center_on_the_truth(self, main_design):
        sw = fit_sessionwise(main_design, 0.5)
        a = np.mean([sw.coefficients[k].a for k in sw.keys()])
        b = np.mean([sw.coefficients[k].b for k in sw.keys()])
        assert abs(a - (-5.0)) < 0.25
        assert abs(b - (-10.0)) < 0.25

    def test_degenerate_session_error_names_the_session(self, small):
        rng = np.random.default_rng(0)
        sessions = dict(small.sessions)
        sessions[SessionKey(2, 1)] = TrialSeries(
            z=np.ones(12), m=noise(rng, 12), r=noise(rng, 12)
        )
        with pytest.raises(DegenerateTreatment, match="subject=2"):
            fit_sessionwise(MultilevelDataset(sessions), 0.0)

    def test_collinear_session_error_names_the_session(self, small):
        rng = np.random.default_rng(1)
        z = rng.standard_normal(15)
        sessions = dict(small.sessions)
        sessions[SessionKey(3, 2)] = TrialSeries(z=z, m=2.0 * z, r=noise(rng, 15))
        with pytest.raises(SingularDesign, match="subject=3"):
            fit_sessionwise(MultilevelDataset(sessions), 0.0)

    def test_deterministic_outcome_session_rejected(self, small):
        rng = np.random.default_rng(2)
        z = rng.standard_normal(15)
        m = z + noise(rng, 15)
        sessions = dict(small.sessions)
        sessions[SessionKey(1, 3)] = TrialSeries(z=z, m=m, r=3.0 * m)
        with pytest.raises(SingularResiduals, match="subject=1"):
            fit_sessionwise(MultilevelDataset(sessions), 0.0)


# ---------------------------------------------------------------------------
# the hierarchical objective


def perfect_fit_case():
    """Dataset fit exactly by integer coefficients, plus its exact state."""
    z_raw = np.array([0.0, 0.0, 1.0, 1.0])
    sessions = {}
    for i in (1, 2):
        for k in (1, 2):
            m_raw = 2.0 * z_raw
            r_raw = 1.0 * z_raw - 3.0 * m_raw
            sessions[SessionKey(i, k)] = TrialSeries(z=z_raw, m=m_raw, r=r_raw)
    data = MultilevelDataset(sessions)
    state = HState(
        delta=0.0,
        b=np.array([2.0, -3.0, 1.0]),
        u={1: np.zeros(3), 2: np.zeros(3)},
        b_ik={k: np.array([2.0, -3.0, 1.0]) for k in sessions},
        lam=np.ones(3),
        psi=np.ones(3),
        sigma1_sq={k: 1.0 for k in sessions},
        sigma2_sq={k: 1.0 for k in sessions},
        h_value=0.0, h1=0.0, h2=0.0, h3=0.0,
        converged=True, iterations=0, h_trace=np.array([0.0]),
    )
    return data, state


class TestHLikelihood:
    def test_perfect_fit_collapses_to_normalizing_constants(self):
        data, state = perfect_fit_case()
        h, h1, h2, h3 = h_likelihood(data, state)
        n_trials = 16
        n_sessions, n_subjects = 4, 2
        expected = -n_trials * LOG2PI - (n_sessions + n_subjects) * 1.5 * LOG2PI
        assert math.isclose(h, expected, rel_tol=1e-9)
        assert math.isclose(h, h1 + h2 + h3, rel_tol=1e-12)

    def test_zero_delta_factorizes_into_univariate_terms(self, tiny):
        state = cma_h_inner(tiny, 0.0)
        h1_uni = 0.0
        for key in sorted(tiny.sessions):
            s = center(tiny.sessions[key])
            a, b, c = state.b_ik[key]
            e1 = s.m - a * s.z
            e2 = s.r - c * s.z - b * s.m
            h1_uni += float(np.sum(norm.logpdf(e1, scale=math.sqrt(state.sigma1_sq[key]))))
            h1_uni += float(np.sum(norm.logpdf(e2, scale=math.sqrt(state.sigma2_sq[key]))))
        assert math.isclose(h1_uni, state.h1, rel_tol=1e-10)

    def test_matches_direct_density_product(self, tiny):
        state = cma_h_inner(tiny, 0.3)
        cen = {}
        for key in tiny.sessions:
            s = center(tiny.sessions[key])
            cen[key] = (s.z, s.m, s.r)
        oh1, oh2, oh3, oh = oracles.h_naive(
            cen, state.b_ik, state.u, state.b, state.lam, state.psi,
            state.sigma1_sq, state.sigma2_sq, 0.3,
        )
        assert math.isclose(oh, state.h_value, rel_tol=1e-10)
        assert math.isclose(oh1, state.h1, rel_tol=1e-10)
        assert math.isclose(oh2, state.h2, rel_tol=1e-10, abs_tol=1e-8)
        assert math.isclose(oh3, state.h3, rel_tol=1e-10, abs_tol=1e-8)

    def test_recompute_matches_reported_state_value(self, main_design, main_state):
        h, h1, h2, h3 = h_likelihood(main_design, main_state)
        assert math.isclose(h, main_state.h_value, rel_tol=1e-9)
        assert math.isclose(h1, main_state.h1, rel_tol=1e-9)


# ---------------------------------------------------------------------------
# converged joint-mode states


def block_gradients(data, state):
    """Analytic gradient of h at a state, one entry per update block."""
    sa = _SessionArrays(data)
    s1 = np.array([state.sigma1_sq[k] for k in sa.keys])
    s2 = np.array([state.sigma2_sq[k] for k in sa.keys])
    pack, _ = pack_quadratic_terms(
        sa.n, sa.zz, sa.zm, sa.zr, sa.mm, sa.mr, sa.rr, s1, s2, state.delta
    )
    x = np.array([state.b_ik[k] for k in sa.keys])
    uarr = np.array([state.u[s] for s in sa.subjects])
    usess = uarr[sa.subj]
    b = np.asarray(state.b, dtype=float)
    lam = np.asarray(state.lam, dtype=float)
    psi = np.asarray(state.psi, dtype=float)
    n_sessions, n_subjects = x.shape[0], uarr.shape[0]

    haa, hab, hac, hbb, hbc, hcc, ga, gb, gc, _ = pack.T
    hx = np.column_stack([
        haa * x[:, 0] + hab * x[:, 1] + hac * x[:, 2],
        hab * x[:, 0] + hbb * x[:, 1] + hbc * x[:, 2],
        hac * x[:, 0] + hbc * x[:, 1] + hcc * x[:, 2],
    ])
    g = np.column_stack([ga, gb, gc])
    resid = x - b - usess
    grad_bik = -(hx - g) - resid / lam
    grad_u = np.zeros((n_subjects, 3))
    np.add.at(grad_u, sa.subj, resid / lam)
    grad_u -= uarr / psi
    grad_b = (resid / lam).sum(axis=0)
    ssr = float((resid ** 2).sum())
    grad_lam = -(3.0 * n_sessions) / (2.0 * lam[0]) + ssr / (2.0 * lam[0] ** 2)
    grad_psi = -n_subjects / (2.0 * psi) + (uarr ** 2).sum(axis=0) / (2.0 * psi ** 2)
    return grad_bik, grad_u, grad_b, grad_lam, grad_psi


class TestJointModeStates:
    @pytest.fixture(scope="class")
    def states(self, small, main_state):
        return [cma_h_inner(small, d) for d in (-0.5, 0.0, 0.5)] + [main_state]

    def test_h_decomposes_into_three_layers(self, states):
        for st in states:
            assert math.isclose(st.h_value, st.h1 + st.h2 + st.h3, rel_tol=1e-9)

    def test_variance_components_respect_the_floor(self, states):
        for st in states:
            assert np.all(st.lam >= 1e-10)
            assert np.all(st.psi >= 1e-10)
            assert st.lam[0] == st.lam[1] == st.lam[2]

    def test_random_effects_are_centered(self, states):
        for st in states:
            uarr = np.array([st.u[s] for s in sorted(st.u)])
            bound = 1e-6 * (1.0 + float(np.linalg.norm(st.b)))
            assert float(np.linalg.norm(uarr.mean(axis=0))) < bound

    def test_trace_is_nondecreasing_and_consistent(self, states):
        for st in states:
            steps = np.diff(st.h_trace)
            assert np.all(steps >= -1e-10 * (1.0 + np.abs(st.h_trace[1:])))
            assert st.h_trace[-1] == st.h_value
            assert st.iterations == st.h_trace.shape[0] - 1
            if st.converged:
                assert st.iterations < 500

    def test_interior_on_well_separated_data(self, main_state):
        assert main_state.interior
        assert main_state.converged

    def test_first_order_stationarity_at_convergence(self, main_design, main_state):
        grad_bik, grad_u, grad_b, grad_lam, grad_psi = block_gradients(
            main_design, main_state
        )
        assert float(np.linalg.norm(grad_bik, axis=1).max()) < 1e-6
        assert float(np.linalg.norm(grad_u, axis=1).max()) < 1e-6
        assert float(np.linalg.norm(grad_b)) < 1e-6
        assert abs(grad_lam) < 1e-6
        assert float(np.abs(grad_psi).max()) < 1e-6

    def test_profile_is_not_constant_in_delta(self, main_design, main_state):
        hs = [cma_h_inner(main_design, d).h_value for d in (-0.5, 0.0)]
        hs.append(main_state.h_value)
        assert max(hs) - min(hs) > 1e-3


# ---------------------------------------------------------------------------
# the outer search


class TestOptimizeDelta:
    def test_quadratic_peak_located(self):
        res = optimize_delta(lambda d: -((d - 0.3) ** 2))
        assert abs(res.delta_hat - 0.3) <= 1e-4
        assert not res.flat
        assert -1e-6 <= res.value <= 0.0
        assert res.n_evals >= 21

    def test_constant_objective_flagged_flat(self):
        res = optimize_delta(lambda d: 7.25)
        assert res.flat
        assert res.delta_hat == 0.0
        assert res.value == 7.25
        assert res.n_evals == 21

    def test_bimodal_objective_prefers_global_mode(self):
        def f(d):
            return math.exp(-50.0 * (d + 0.6) ** 2) + 0.8 * math.exp(-50.0 * (d - 0.5) ** 2)

        res = optimize_delta(f)
        assert abs(res.delta_hat - (-0.6)) <= 1e-3

    def test_all_non_finite_raises(self):
        with pytest.raises(OptimFailed):
            optimize_delta(lambda d: float("nan"))

    def test_result_unpacks_as_a_pair(self):
        delta_hat, value = optimize_delta(lambda d: -(d ** 2))
        assert abs(delta_hat) <= 1e-4
        assert value <= 0.0

    def test_grid_is_exposed(self):
        res = optimize_delta(lambda d: -(d ** 2))
        assert res.grid_deltas.shape == (21,)
        assert res.grid_values.shape == (21,)
        assert res.grid_deltas[0] == -0.95
        assert res.grid_deltas[-1] == 0.95


# ---------------------------------------------------------------------------
# two-step estimator


def two_step_oracle(data):
    """Independent reimplementation: per-session least squares at delta=0,
    then a REML random-intercept mean for each coefficient."""
    rows = {}
    for key in sorted(data.sessions):
        s = center(data.sessions[key])
        a = float(s.z @ s.m) / float(s.z @ s.z)
        X = np.column_stack([s.z, s.m])
        (c, b), *_ = np.linalg.lstsq(X, s.r, rcond=None)
        rows[key] = (a, float(b), float(c))
    by_subject = {}
    for key, v in rows.items():
        by_subject.setdefault(key[0], []).append(v)
    out = []
    for j in range(3):
        vals = {s: [v[j] for v in lst] for s, lst in by_subject.items()}
        out.append(fit_random_intercept(GroupedValues(vals), criterion="reml").mean)
    return np.array(out)


class TestCmaTs:
    def test_zero_delta_equals_uncorrected_two_step(self, small):
        fit = cma_ts(small, 0.0)
        ref = two_step_oracle(small)
        assert np.abs(np.asarray(fit.fixed) - ref).max() < 1e-9

    def test_single_session_per_subject_floors_within_variance(self):
        cfg = MultilevelConfig(
            n_subjects=3, n_sessions=1, trial_mean=20.0,
            fixed=(1.0, 2.0, 0.5), seed=9,
        )
        data = gen_multilevel(cfg)
        fit = cma_ts(data, 0.0)
        sw = fit_sessionwise(data, 0.0)
        means = np.mean(
            [[sw.coefficients[k].a, sw.coefficients[k].b, sw.coefficients[k].c]
             for k in sw.keys()],
            axis=0,
        )
        assert np.all(fit.lam == 1e-12)
        assert np.array_equal(np.asarray(fit.fixed), means)

    def test_reporting_fields(self, small_fits):
        fit = small_fits["ts_a"]
        assert fit.method == "ts"
        assert fit.delta_hat == 0.2
        assert fit.converged
        assert fit.iterations == 0
        assert np.all(fit.psi >= 0.0)
        assert np.all(fit.lam >= 0.0)
        assert fit.per_session.delta == 0.2
        assert np.all(np.asarray(fit.fixed_se) > 0.0)
        assert fit.c_total_se > 0.0

    def test_recovers_truth_at_the_true_delta(self, main_design):
        fit = cma_ts(main_design, 0.5)
        truth = np.array([-5.0, -10.0, 4.0])
        assert np.abs(np.asarray(fit.fixed) - truth).max() < 0.25

    def test_indirect_effect_identities(self, small_fits):
        for fit in small_fits.values():
            assert fit.indirect_prod == fit.fixed[0] * fit.fixed[1]
            assert fit.indirect_diff == fit.c_total - fit.fixed[2]


# ---------------------------------------------------------------------------
# full estimators of delta


class TestDeltaEstimators:
    def test_ml_reports(self, small_fits):
        fit = small_fits["ml"]
        assert fit.method == "ml"
        assert abs(fit.delta_hat) < 1.0
        assert math.isfinite(fit.objective_value)
        if fit.converged:
            assert fit.iterations < 500

    def test_h_reports(self, small_fits):
        fit = small_fits["h"]
        assert fit.method == "h"
        assert abs(fit.delta_hat) < 1.0
        assert np.all(fit.psi >= 0.0)
        assert np.all(fit.lam >= 0.0)

    def test_h_ts_shares_the_h_delta_bitwise(self, small_fits):
        assert small_fits["h_ts"].method == "h_ts"
        assert small_fits["h_ts"].delta_hat == small_fits["h"].delta_hat

    def test_fixed_effects_near_truth_at_true_delta(self, main_state):
        # the joint mode at the generating delta recovers the fixed effects
        truth = np.array([-5.0, -10.0, 4.0])
        assert np.abs(np.asarray(main_state.b) - truth).max() < 0.35

    def test_treatment_paths_shared_across_methods(self, small_fits):
        fits = list(small_fits.values())
        first = fits[0]
        for other in fits[1:]:
            assert other.fixed[0] == first.fixed[0]
            assert other.c_total == first.c_total
            assert other.c_total_se == first.c_total_se

    def test_pooling_limit_matches_single_level_fit(self):
        # no real variation at either level: the fit reduces to one shrunk
        # pooled model, and the reported coefficients match a single-level
        # fit of the concatenated trials at the same delta
        for seed in (0, 1):
            cfg = MultilevelConfig(
                n_subjects=16, n_sessions=4, trial_mean=8000.0,
                fixed=(-5.0, -10.0, 4.0),
                psi_diag=(0.0, 0.0, 0.0), lambda_diag=(0.0, 0.0, 0.0),
                delta=0.5, seed=seed,
            )
            data = gen_multilevel(cfg)
            fit = cma_h_ts(data)
            ref = fit_single(pool_sessions(data), fit.delta_hat)
            pooled = np.array([ref.theta.a, ref.theta.b, ref.theta.c])
            assert np.abs(np.asarray(fit.fixed) - pooled).max() < 1e-3
            assert fit.delta_hat == cma_h(data).delta_hat

    def test_requires_at_least_two_subjects(self, tiny):
        one_subject = MultilevelDataset(
            {k: v for k, v in tiny.sessions.items() if k.subject == 1}
        )
        with pytest.raises(ValidationError):
            cma_ts(one_subject, 0.0)
        with pytest.raises(ValidationError):
            cma_h(one_subject)
