"""Hot numerical kernels for the hierarchical-likelihood coordinate descent.

Two interchangeable implementations of the same block-update sweep:

* a scalar-loop version compiled with numba when it is importable (the
  default), and
* a vectorized pure-numpy version, selected by setting the environment
  variable ``CMA_DISABLE_NUMBA`` to a non-empty value (or used as the
  automatic fallback when numba is absent).

Both paths are deterministic; they agree to float rounding, not bitwise
(summation order differs). ``benchmarks/bench_kernels.py`` times them
against each other.

The sweep maximizes the joint log-density h over the session coefficients,
the subject random effects, and the fixed effects, and optionally over the
variance components as well:

* ``update_lam=False, update_psi=False`` — variances stay at the
  caller-supplied values. h is then a strictly concave quadratic in the
  remaining blocks, each closed-form update is its exact maximizer, and the
  h sequence is nondecreasing by construction.
* ``update_lam=True`` — the session-level dispersion is re-estimated each
  sweep as the pooled mean squared deviation of the session coefficients
  around their subject lines, shared across the three coordinates. Pooling
  matters: h grows without bound in any corner where one coordinate's
  dispersion and its residuals vanish together, and a per-coordinate update
  walks into that corner whenever a coordinate is weakly identified. The
  pooled update ties the three coordinates to one scale, which keeps the
  fitted mode interior on all but pathological data while remaining the
  exact maximizer of h over that shared scale.
* ``update_psi=True`` — the subject-level variances are re-estimated each
  sweep as coordinatewise mean squares of the subject effects.

Every update is the exact maximizer of h over its block given the others,
so the ascent property holds in all modes; ``var_floor`` only truncates a
variance collapsing toward zero. Callers inspect the returned variances to
detect a run that ended on the floor (a degenerate corner rather than an
interior mode).

The per-session quadratic data term is packed column-wise into one
(S, 10) array: H entries (AA, AB, AC, BB, BC, CC), the linear term g
(A, B, C), and the residual constant c0, so that the sweep itself touches
only flat float64 arrays. Coefficient order everywhere is (A, B, C).
"""

from __future__ import annotations

import math
import os

import numpy as np

LOG2PI = math.log(2.0 * math.pi)

# pack columns
_HAA, _HAB, _HAC, _HBB, _HBC, _HCC, _GA, _GB, _GC, _C0 = range(10)


def _cd_core(
    pack, subj, counts, b_ik0, lam0, psi0, h1_const,
    update_lam, update_psi, var_floor, max_iter, h_rtol, param_tol,
):
    S = pack.shape[0]
    N = counts.shape[0]

    b_ik = b_ik0.copy()
    u = np.zeros((N, 3))
    b = np.zeros(3)
    lam = lam0.copy()
    psi = psi0.copy()

    # moment init: subject deviations around the grand mean, recentered
    for j in range(3):
        tot = 0.0
        for s in range(S):
            tot += b_ik[s, j]
        b[j] = tot / S
    for s in range(S):
        for j in range(3):
            u[subj[s], j] += b_ik[s, j]
    for i in range(N):
        for j in range(3):
            u[i, j] = u[i, j] / counts[i] - b[j]
    for j in range(3):
        ubar = 0.0
        for i in range(N):
            ubar += u[i, j]
        ubar /= N
        for i in range(N):
            u[i, j] -= ubar
        b[j] += ubar

    h_trace = np.empty(max_iter + 1)

    # h of the initial state
    q_sum = 0.0
    for s in range(S):
        x0 = b_ik[s, 0]
        x1 = b_ik[s, 1]
        x2 = b_ik[s, 2]
        q_sum += (
            pack[s, _HAA] * x0 * x0
            + pack[s, _HBB] * x1 * x1
            + pack[s, _HCC] * x2 * x2
            + 2.0 * (pack[s, _HAB] * x0 * x1 + pack[s, _HAC] * x0 * x2 + pack[s, _HBC] * x1 * x2)
            - 2.0 * (pack[s, _GA] * x0 + pack[s, _GB] * x1 + pack[s, _GC] * x2)
            + pack[s, _C0]
        )
    h1 = h1_const - 0.5 * q_sum
    r_sum = 0.0
    log_lam = 0.0
    for j in range(3):
        log_lam += math.log(lam[j])
        acc = 0.0
        for s in range(S):
            d = b_ik[s, j] - b[j] - u[subj[s], j]
            acc += d * d
        r_sum += acc / lam[j]
    h2 = -1.5 * LOG2PI * S - 0.5 * S * log_lam - 0.5 * r_sum
    u_sum = 0.0
    log_psi = 0.0
    for j in range(3):
        log_psi += math.log(psi[j])
        acc = 0.0
        for i in range(N):
            acc += u[i, j] * u[i, j]
        u_sum += acc / psi[j]
    h3 = -1.5 * LOG2PI * N - 0.5 * N * log_psi - 0.5 * u_sum
    h = h1 + h2 + h3
    h_trace[0] = h

    converged = False
    it = 0
    subj_sums = np.zeros((N, 3))
    h_prev = h
    while it < max_iter:
        it += 1
        maxdiff = 0.0
        inv0 = 1.0 / lam[0]
        inv1 = 1.0 / lam[1]
        inv2 = 1.0 / lam[2]

        # block 1: session coefficients, one SPD 3x3 solve each
        for s in range(S):
            i = subj[s]
            a11 = pack[s, _HAA] + inv0
            a12 = pack[s, _HAB]
            a13 = pack[s, _HAC]
            a22 = pack[s, _HBB] + inv1
            a23 = pack[s, _HBC]
            a33 = pack[s, _HCC] + inv2
            r1 = pack[s, _GA] + (b[0] + u[i, 0]) * inv0
            r2 = pack[s, _GB] + (b[1] + u[i, 1]) * inv1
            r3 = pack[s, _GC] + (b[2] + u[i, 2]) * inv2
            c11 = a22 * a33 - a23 * a23
            c12 = a13 * a23 - a12 * a33
            c13 = a12 * a23 - a13 * a22
            det = a11 * c11 + a12 * c12 + a13 * c13
            c22 = a11 * a33 - a13 * a13
            c23 = a12 * a13 - a11 * a23
            c33 = a11 * a22 - a12 * a12
            x0 = (c11 * r1 + c12 * r2 + c13 * r3) / det
            x1 = (c12 * r1 + c22 * r2 + c23 * r3) / det
            x2 = (c13 * r1 + c23 * r2 + c33 * r3) / det
            d0 = abs(x0 - b_ik[s, 0])
            d1 = abs(x1 - b_ik[s, 1])
            d2 = abs(x2 - b_ik[s, 2])
            if d0 > maxdiff:
                maxdiff = d0
            if d1 > maxdiff:
                maxdiff = d1
            if d2 > maxdiff:
                maxdiff = d2
            b_ik[s, 0] = x0
            b_ik[s, 1] = x1
            b_ik[s, 2] = x2

        # block 2: subject random effects
        for i in range(N):
            for j in range(3):
                subj_sums[i, j] = 0.0
        for s in range(S):
            i = subj[s]
            for j in range(3):
                subj_sums[i, j] += b_ik[s, j] - b[j]
        for i in range(N):
            for j in range(3):
                new = psi[j] * subj_sums[i, j] / (lam[j] + counts[i] * psi[j])
                d = abs(new - u[i, j])
                if d > maxdiff:
                    maxdiff = d
                u[i, j] = new

        # block 3: fixed effects (equal precision across sessions -> plain mean)
        for j in range(3):
            tot = 0.0
            for s in range(S):
                tot += b_ik[s, j] - u[subj[s], j]
            new = tot / S
            d = abs(new - b[j])
            if d > maxdiff:
                maxdiff = d
            b[j] = new

        # recenter random effects into the fixed effect (h-nondecreasing move)
        for j in range(3):
            ubar = 0.0
            for i in range(N):
                ubar += u[i, j]
            ubar /= N
            for i in range(N):
                u[i, j] -= ubar
            b[j] += ubar

        # block 4: session-level dispersion, one scale pooled over coordinates
        if update_lam:
            acc = 0.0
            for s in range(S):
                i = subj[s]
                for j in range(3):
                    d = b_ik[s, j] - b[j] - u[i, j]
                    acc += d * d
            new = acc / (3.0 * S)
            if new < var_floor:
                new = var_floor
            d = abs(new - lam[0])
            if d > maxdiff:
                maxdiff = d
            for j in range(3):
                lam[j] = new
            log_lam = 3.0 * math.log(new)

        # block 5: subject-level variances, coordinatewise
        if update_psi:
            log_psi = 0.0
            for j in range(3):
                acc = 0.0
                for i in range(N):
                    acc += u[i, j] * u[i, j]
                new = acc / N
                if new < var_floor:
                    new = var_floor
                d = abs(new - psi[j])
                if d > maxdiff:
                    maxdiff = d
                psi[j] = new
                log_psi += math.log(psi[j])

        # h at the end of the sweep
        q_sum = 0.0
        for s in range(S):
            x0 = b_ik[s, 0]
            x1 = b_ik[s, 1]
            x2 = b_ik[s, 2]
            q_sum += (
                pack[s, _HAA] * x0 * x0
                + pack[s, _HBB] * x1 * x1
                + pack[s, _HCC] * x2 * x2
                + 2.0 * (pack[s, _HAB] * x0 * x1 + pack[s, _HAC] * x0 * x2 + pack[s, _HBC] * x1 * x2)
                - 2.0 * (pack[s, _GA] * x0 + pack[s, _GB] * x1 + pack[s, _GC] * x2)
                + pack[s, _C0]
            )
        h1 = h1_const - 0.5 * q_sum
        r_sum = 0.0
        for j in range(3):
            acc = 0.0
            for s in range(S):
                d = b_ik[s, j] - b[j] - u[subj[s], j]
                acc += d * d
            r_sum += acc / lam[j]
        h2 = -1.5 * LOG2PI * S - 0.5 * S * log_lam - 0.5 * r_sum
        u_sum = 0.0
        for j in range(3):
            acc = 0.0
            for i in range(N):
                acc += u[i, j] * u[i, j]
            u_sum += acc / psi[j]
        h3 = -1.5 * LOG2PI * N - 0.5 * N * log_psi - 0.5 * u_sum
        h = h1 + h2 + h3
        h_trace[it] = h

        if abs(h - h_prev) <= h_rtol * (1.0 + abs(h)) and maxdiff <= param_tol:
            converged = True
            break
        h_prev = h

    return b_ik, u, b, lam, psi, h_trace[: it + 1], h1, h2, h3, it, converged


def _cd_numpy(
    pack, subj, counts, b_ik0, lam0, psi0, h1_const,
    update_lam, update_psi, var_floor, max_iter, h_rtol, param_tol,
):
    """Vectorized sweep; mirrors _cd_core step for step."""
    S = pack.shape[0]
    N = counts.shape[0]
    haa, hab, hac = pack[:, _HAA], pack[:, _HAB], pack[:, _HAC]
    hbb, hbc, hcc = pack[:, _HBB], pack[:, _HBC], pack[:, _HCC]
    g = pack[:, _GA:_GC + 1]
    c0 = pack[:, _C0]
    kcounts = counts[:, None]

    def subject_sums(x):
        out = np.empty((N, 3))
        for j in range(3):
            out[:, j] = np.bincount(subj, weights=x[:, j], minlength=N)
        return out

    b_ik = b_ik0.copy()
    lam = lam0.copy()
    psi = psi0.copy()
    b = b_ik.mean(axis=0)
    u = subject_sums(b_ik) / kcounts - b[None, :]
    ubar = u.mean(axis=0)
    u -= ubar[None, :]
    b = b + ubar

    def h_parts(b_ik, u, b, lam, psi):
        x0, x1, x2 = b_ik[:, 0], b_ik[:, 1], b_ik[:, 2]
        q = (
            haa * x0 * x0
            + hbb * x1 * x1
            + hcc * x2 * x2
            + 2.0 * (hab * x0 * x1 + hac * x0 * x2 + hbc * x1 * x2)
            - 2.0 * (g[:, 0] * x0 + g[:, 1] * x1 + g[:, 2] * x2)
            + c0
        )
        h1 = h1_const - 0.5 * float(q.sum())
        resid = b_ik - b[None, :] - u[subj]
        h2 = (
            -1.5 * LOG2PI * S
            - 0.5 * S * float(np.log(lam).sum())
            - 0.5 * float(((resid ** 2) / lam[None, :]).sum())
        )
        h3 = (
            -1.5 * LOG2PI * N
            - 0.5 * N * float(np.log(psi).sum())
            - 0.5 * float(((u ** 2) / psi[None, :]).sum())
        )
        return h1, h2, h3

    h1, h2, h3 = h_parts(b_ik, u, b, lam, psi)
    h = h1 + h2 + h3
    h_trace = np.empty(max_iter + 1)
    h_trace[0] = h
    h_prev = h
    converged = False
    it = 0

    def factor(lam):
        inv_lam = 1.0 / lam
        a11 = haa + inv_lam[0]
        a12 = hab
        a13 = hac
        a22 = hbb + inv_lam[1]
        a23 = hbc
        a33 = hcc + inv_lam[2]
        c11 = a22 * a33 - a23 * a23
        c12 = a13 * a23 - a12 * a33
        c13 = a12 * a23 - a13 * a22
        det = a11 * c11 + a12 * c12 + a13 * c13
        c22 = a11 * a33 - a13 * a13
        c23 = a12 * a13 - a11 * a23
        c33 = a11 * a22 - a12 * a12
        return inv_lam, c11, c12, c13, c22, c23, c33, det

    # with lam fixed the per-session systems are constant; factor them once
    fac = factor(lam)

    while it < max_iter:
        it += 1
        if update_lam:
            fac = factor(lam)
        inv_lam, c11, c12, c13, c22, c23, c33, det = fac

        # block 1: batched symmetric 3x3 solves via cofactors
        prior = b[None, :] + u[subj]
        r1 = g[:, 0] + prior[:, 0] * inv_lam[0]
        r2 = g[:, 1] + prior[:, 1] * inv_lam[1]
        r3 = g[:, 2] + prior[:, 2] * inv_lam[2]
        new_b_ik = np.empty_like(b_ik)
        new_b_ik[:, 0] = (c11 * r1 + c12 * r2 + c13 * r3) / det
        new_b_ik[:, 1] = (c12 * r1 + c22 * r2 + c23 * r3) / det
        new_b_ik[:, 2] = (c13 * r1 + c23 * r2 + c33 * r3) / det
        maxdiff = float(np.abs(new_b_ik - b_ik).max())
        b_ik = new_b_ik

        # block 2: subject random effects
        sums = subject_sums(b_ik - b[None, :])
        new_u = psi[None, :] * sums / (lam[None, :] + kcounts * psi[None, :])
        maxdiff = max(maxdiff, float(np.abs(new_u - u).max()))
        u = new_u

        # block 3 + recenter
        new_b = (b_ik - u[subj]).mean(axis=0)
        maxdiff = max(maxdiff, float(np.abs(new_b - b).max()))
        b = new_b
        ubar = u.mean(axis=0)
        u = u - ubar[None, :]
        b = b + ubar

        # block 4: pooled session-level dispersion
        if update_lam:
            resid = b_ik - b[None, :] - u[subj]
            new = max(float((resid ** 2).mean()), var_floor)
            maxdiff = max(maxdiff, abs(new - lam[0]))
            lam = np.full(3, new)

        # block 5: coordinatewise subject-level variances
        if update_psi:
            new_psi = np.maximum((u ** 2).mean(axis=0), var_floor)
            maxdiff = max(maxdiff, float(np.abs(new_psi - psi).max()))
            psi = new_psi

        h1, h2, h3 = h_parts(b_ik, u, b, lam, psi)
        h = h1 + h2 + h3
        h_trace[it] = h
        if abs(h - h_prev) <= h_rtol * (1.0 + abs(h)) and maxdiff <= param_tol:
            converged = True
            break
        h_prev = h

    return b_ik, u, b, lam, psi, h_trace[: it + 1], h1, h2, h3, it, converged


_cd_jit = _cd_core
HAVE_NUMBA = False
if not os.environ.get("CMA_DISABLE_NUMBA"):
    try:
        from numba import njit

        _cd_jit = njit(cache=True)(_cd_core)
        HAVE_NUMBA = True
    except ImportError:
        pass

USING_NUMBA = HAVE_NUMBA


def coordinate_descent(
    pack,
    subj,
    counts,
    b_ik0,
    lam,
    psi,
    h1_const,
    update_lam=False,
    update_psi=False,
    var_floor=1e-10,
    max_iter=500,
    h_rtol=1e-8,
    param_tol=1e-8,
    force_path=None,
):
    """Run the block-coordinate-descent sweep on packed session terms.

    lam and psi (length 3 each, floored by the caller) are the starting
    variance diagonals; they stay fixed unless the corresponding update flag
    is set. Returns (b_ik, u, b, lam, psi, h_trace, h1, h2, h3, n_iter,
    converged). force_path: None (use the compiled path when available),
    "numba", or "numpy" — the explicit values exist for the path-agreement
    tests and the benchmark.
    """
    pack = np.ascontiguousarray(pack, dtype=np.float64)
    subj = np.ascontiguousarray(subj, dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.float64)
    b_ik0 = np.ascontiguousarray(b_ik0, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    psi = np.ascontiguousarray(psi, dtype=np.float64)
    if force_path == "numpy":
        fn = _cd_numpy
    elif force_path == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba path requested but numba is unavailable/disabled")
        fn = _cd_jit
    else:
        fn = _cd_jit if USING_NUMBA else _cd_numpy
    return fn(
        pack, subj, counts, b_ik0, lam, psi, float(h1_const),
        bool(update_lam), bool(update_psi), float(var_floor),
        int(max_iter), float(h_rtol), float(param_tol),
    )


def pack_quadratic_terms(n, zz, zm, zr, mm, mr, rr, s1sq, s2sq, delta):
    """Build the (S, 10) packed data terms plus the h1 constant.

    The session log-density in the coefficients theta = (A, B, C) is
    -n*log(2*pi) - (n/2)*log det Sigma - 0.5*(theta' H theta - 2 g' theta + c0).
    """
    one_md2 = 1.0 - delta * delta
    w11 = 1.0 / (s1sq * one_md2)
    w22 = 1.0 / (s2sq * one_md2)
    w12 = -delta / (np.sqrt(s1sq * s2sq) * one_md2)
    S = zz.shape[0]
    pack = np.empty((S, 10))
    pack[:, _HAA] = w11 * zz
    pack[:, _HAB] = w12 * zm
    pack[:, _HAC] = w12 * zz
    pack[:, _HBB] = w22 * mm
    pack[:, _HBC] = w22 * zm
    pack[:, _HCC] = w22 * zz
    pack[:, _GA] = w11 * zm + w12 * zr
    pack[:, _GB] = w12 * mm + w22 * mr
    pack[:, _GC] = w12 * zm + w22 * zr
    pack[:, _C0] = w11 * mm + 2.0 * w12 * mr + w22 * rr
    logdet = np.log(s1sq * s2sq * one_md2)
    h1_const = float((-n * LOG2PI - 0.5 * n * logdet).sum())
    return pack, h1_const
