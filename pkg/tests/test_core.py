"""Data-model tests: validation errors, centering behavior, container invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrmed.core import (
    MultilevelDataset,
    NoiseCov,
    ResidualCov,
    SessionKey,
    TrialSeries,
    center,
    validate_dataset,
    validate_series,
)
from corrmed.errors import (
    DegenerateTreatment,
    LengthMismatch,
    TooFewTrials,
    ValidationError,
)


def make_series(z, m, r):
    return TrialSeries(z=np.asarray(z, float), m=np.asarray(m, float), r=np.asarray(r, float))


class TestValidateSeries:
    def test_minimal_valid_case(self):
        s = make_series([1, 0, 1, 0], [1, -1, -1, 1], [1, -1, -1, 1])
        assert validate_series(s) is s

    def test_constant_treatment_rejected(self):
        s = make_series([1, 1, 1, 1], [1, -1, -1, 1], [1, -1, -1, 1])
        with pytest.raises(DegenerateTreatment):
            validate_series(s)

    def test_length_mismatch_rejected(self):
        s = make_series([1, 0, 1, 0, 1], [1, -1, -1, 1], [1, -1, -1, 1])
        with pytest.raises(LengthMismatch):
            validate_series(s)

    def test_too_few_trials_rejected(self):
        s = make_series([1, 0, 1], [1, -1, 0], [1, -1, 0])
        with pytest.raises(TooFewTrials):
            validate_series(s)

    def test_non_finite_rejected(self):
        s = make_series([1, 0, 1, 0], [1, np.nan, -1, 1], [1, -1, -1, 1])
        with pytest.raises(ValidationError):
            validate_series(s)


class TestCenter:
    def test_mean_subtraction_m(self):
        s = make_series([1, 0, 1, 0], [2, 0, 2, 0], [0, 0, 0, 1])
        c = center(s)
        np.testing.assert_array_equal(c.m, [1, -1, 1, -1])

    def test_mean_subtraction_z(self):
        s = make_series([1, 0, 1, 0], [2, 0, 2, 0], [0, 0, 0, 1])
        c = center(s)
        np.testing.assert_array_equal(c.z, [0.5, -0.5, 0.5, -0.5])

    def test_idempotent_exactly(self):
        rng = np.random.default_rng(7)
        s = make_series(rng.integers(0, 2, 40), rng.normal(3, 2, 40), rng.normal(-1, 5, 40))
        once = center(s)
        twice = center(once)
        np.testing.assert_array_equal(once.z, twice.z)
        np.testing.assert_array_equal(once.m, twice.m)
        np.testing.assert_array_equal(once.r, twice.r)

    def test_zero_mean_within_tolerance(self):
        rng = np.random.default_rng(11)
        s = make_series(rng.integers(0, 2, 1000), rng.normal(1e3, 1, 1000), rng.normal(0, 1, 1000))
        c = center(s)
        for v in (c.z, c.m, c.r):
            assert abs(v.sum()) <= 1e-10 * v.size

    def test_original_untouched(self):
        s = make_series([1, 0, 1, 0], [2, 0, 2, 0], [1, 2, 3, 4])
        center(s)
        np.testing.assert_array_equal(s.m, [2, 0, 2, 0])

    def test_cross_products_match_raw_mean_correction(self):
        rng = np.random.default_rng(3)
        s = make_series(rng.integers(0, 2, 200), rng.normal(2, 3, 200), rng.normal(-4, 2, 200))
        c = center(s)
        for u_raw, u_c in ((s.z, c.z), (s.m, c.m), (s.r, c.r)):
            for v_raw, v_c in ((s.z, c.z), (s.m, c.m), (s.r, c.r)):
                expected = np.sum((u_raw - u_raw.mean()) * (v_raw - v_raw.mean()))
                got = float(u_c @ v_c)
                assert abs(got - expected) <= 1e-10 * max(1.0, abs(expected))

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=4, max_size=64),
    )
    def test_centered_mean_is_float_fixed_point(self, vals):
        n = len(vals)
        z = np.zeros(n)
        z[::2] = 1.0
        s = make_series(z, vals, vals)
        c = center(s)
        # idempotence must hold bit-for-bit on arbitrary float inputs
        cc = center(c)
        np.testing.assert_array_equal(c.m, cc.m)
        assert abs(c.m.sum()) <= 1e-10 * max(1, n)


class TestContainers:
    def test_noise_cov_rejects_nonpositive_sd(self):
        with pytest.raises(ValidationError):
            NoiseCov(sigma1=0.0, sigma2=1.0, delta=0.0)
        with pytest.raises(ValidationError):
            NoiseCov(sigma1=1.0, sigma2=-1.0, delta=0.0)

    def test_noise_cov_rejects_delta_outside_open_interval(self):
        with pytest.raises(ValidationError):
            NoiseCov(sigma1=1.0, sigma2=1.0, delta=1.0)

    def test_noise_cov_matrix_positive_definite(self):
        nc = NoiseCov(sigma1=2.0, sigma2=0.5, delta=-0.8)
        eig = np.linalg.eigvalsh(nc.matrix)
        assert np.all(eig > 0)

    def test_residual_cov_allows_rounding_slack(self):
        rc = ResidualCov(s11=1.0, s12=1.0 + 1e-12, s22=1.0)
        assert rc.det < 0

    def test_residual_cov_rejects_gross_violation(self):
        with pytest.raises(ValidationError):
            ResidualCov(s11=1.0, s12=2.0, s22=1.0)

    def test_session_key_fields(self):
        k = SessionKey(3, 2)
        assert (k.subject, k.session) == (3, 2)
        assert k == (3, 2)

    def test_dataset_counts(self):
        s = make_series([1, 0, 1, 0], [1, 2, 3, 4], [4, 3, 2, 1])
        data = MultilevelDataset(
            sessions={SessionKey(1, 1): s, SessionKey(1, 2): s, SessionKey(2, 1): s}
        )
        assert data.n_subjects == 2
        assert data.sessions_per_subject == {1: 2, 2: 1}
        assert data.sorted_keys() == [(1, 1), (1, 2), (2, 1)]
        assert validate_dataset(data) is data

    def test_dataset_validation_names_offending_session(self):
        good = make_series([1, 0, 1, 0], [1, 2, 3, 4], [4, 3, 2, 1])
        bad = make_series([1, 1, 1, 1], [1, 2, 3, 4], [4, 3, 2, 1])
        data = MultilevelDataset(sessions={SessionKey(1, 1): good, SessionKey(2, 1): bad})
        with pytest.raises(DegenerateTreatment, match="subject=2"):
            validate_dataset(data)

    def test_dataset_rejects_empty(self):
        with pytest.raises(ValidationError):
            MultilevelDataset(sessions={})
