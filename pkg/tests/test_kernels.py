"""Coordinate-descent kernel tests: numba/numpy path agreement, the env-flag
fallback switch, ascent, determinism, and the weak-prior limit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from corrmed._kernels import (
    HAVE_NUMBA,
    USING_NUMBA,
    coordinate_descent,
    pack_quadratic_terms,
)
from corrmed.multilevel import _SessionArrays, _thetas
from corrmed.simulate import MultilevelConfig, gen_multilevel


def packed_problem(seed=0, n_subjects=6, n_sessions=3, delta=0.3, trial_mean=40):
    cfg = MultilevelConfig(
        n_subjects=n_subjects, n_sessions=n_sessions, trial_mean=trial_mean,
        delta=delta, seed=seed,
    )
    sa = _SessionArrays(gen_multilevel(cfg))
    a, b, c, _, s1sq, s2sq = _thetas(sa, delta)
    pack, h1c = pack_quadratic_terms(
        sa.n, sa.zz, sa.zm, sa.zr, sa.mm, sa.mr, sa.rr, s1sq, s2sq, delta
    )
    b0 = np.column_stack([a, b, c])
    return pack, sa.subj, sa.counts, b0, h1c


def run(path, seed=0, **kw):
    pack, subj, counts, b0, h1c = packed_problem(seed=seed)
    lam = np.full(3, 0.5)
    psi = np.full(3, 0.5)
    return coordinate_descent(
        pack, subj, counts, b0, lam, psi, h1c,
        update_lam=True, update_psi=True, force_path=path, **kw,
    )


class TestEnvironmentSwitch:
    def test_numba_available_here(self):
        # the compiled path is the default in this environment
        assert HAVE_NUMBA
        assert USING_NUMBA

    def test_disable_flag_selects_numpy_fallback(self):
        code = (
            "import corrmed._kernels as k;"
            "print(k.HAVE_NUMBA, k.USING_NUMBA)"
        )
        env = {**os.environ, "CMA_DISABLE_NUMBA": "1"}
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.split() == ["False", "False"]

    def test_forcing_numba_while_disabled_errors(self):
        code = (
            "import numpy as np\n"
            "from corrmed._kernels import coordinate_descent\n"
            "pack = np.zeros((1, 10)); pack[0, 0] = pack[0, 3] = pack[0, 5] = 1.0\n"
            "try:\n"
            "    coordinate_descent(pack, [0], [1.0], np.zeros((1, 3)),\n"
            "                       np.ones(3), np.ones(3), 0.0, force_path='numba')\n"
            "except RuntimeError:\n"
            "    print('RERR')\n"
        )
        env = {**os.environ, "CMA_DISABLE_NUMBA": "1"}
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "RERR"


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
class TestPathAgreement:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_paths_converge_to_same_state(self, seed):
        out_np = run("numpy", seed=seed)
        out_nb = run("numba", seed=seed)
        b_np, u_np, bf_np, lam_np, psi_np, tr_np, *_ = out_np
        b_nb, u_nb, bf_nb, lam_nb, psi_nb, tr_nb, *_ = out_nb
        assert abs(tr_np[-1] - tr_nb[-1]) <= 1e-7 * (1 + abs(tr_np[-1]))
        assert np.max(np.abs(b_np - b_nb)) <= 1e-6
        assert np.max(np.abs(u_np - u_nb)) <= 1e-6
        assert np.max(np.abs(bf_np - bf_nb)) <= 1e-6
        assert np.max(np.abs(lam_np - lam_nb)) <= 1e-6
        assert np.max(np.abs(psi_np - psi_nb)) <= 1e-6

    def test_each_path_is_deterministic(self):
        for path in ("numpy", "numba"):
            first = run(path, seed=3)
            second = run(path, seed=3)
            np.testing.assert_array_equal(first[5], second[5])  # h traces
            np.testing.assert_array_equal(first[0], second[0])
            np.testing.assert_array_equal(first[3], second[3])


class TestSweepProperties:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_ascent_every_iteration(self, seed):
        trace = run("numpy", seed=seed)[5]
        scale = 1e-10 * (1.0 + np.abs(trace[1:]))
        assert np.all(np.diff(trace) >= -scale)

    def test_fixed_mode_keeps_variances(self):
        pack, subj, counts, b0, h1c = packed_problem(seed=1)
        lam = np.array([0.7, 0.4, 0.9])
        psi = np.array([0.3, 0.8, 0.2])
        out = coordinate_descent(
            pack, subj, counts, b0, lam, psi, h1c,
            update_lam=False, update_psi=False, force_path="numpy",
        )
        np.testing.assert_array_equal(out[3], lam)
        np.testing.assert_array_equal(out[4], psi)

    def test_updated_variances_respect_floor(self):
        out = run("numpy", seed=2, var_floor=1e-10)
        assert np.all(out[3] >= 1e-10)
        assert np.all(out[4] >= 1e-10)

    def test_converged_flag_and_trace_shape(self):
        out = run("numpy", seed=0)
        *_, h1, h2, h3, iters, conv = out
        trace = out[5]
        assert conv
        assert trace.shape == (iters + 1,)
        assert abs((h1 + h2 + h3) - trace[-1]) <= 1e-9 * (1 + abs(trace[-1]))

    def test_weak_priors_recover_sessionwise_estimates(self):
        # with huge prior variances the joint mode decouples across sessions
        # and each row must approach the per-session closed-form estimate,
        # starting from zeros so the solve itself is exercised
        delta = 0.3
        cfg = MultilevelConfig(
            n_subjects=4, n_sessions=3, trial_mean=40, delta=delta, seed=7
        )
        sa = _SessionArrays(gen_multilevel(cfg))
        a, b, c, _, s1sq, s2sq = _thetas(sa, delta)
        pack, h1c = pack_quadratic_terms(
            sa.n, sa.zz, sa.zm, sa.zr, sa.mm, sa.mr, sa.rr, s1sq, s2sq, delta
        )
        big = np.full(3, 1e6)
        out = coordinate_descent(
            pack, sa.subj, sa.counts, np.zeros((len(sa.keys), 3)),
            big, big, h1c, update_lam=False, update_psi=False, force_path="numpy",
        )
        target = np.column_stack([a, b, c])
        assert np.max(np.abs(out[0] - target)) < 1e-3
