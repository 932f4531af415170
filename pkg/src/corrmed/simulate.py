"""Seeded data generators and the Monte Carlo driver.

RNG streams are fixed and documented so every platform and worker count
reproduces the same bits (numpy Generator over PCG64, seeded through
SeedSequence spawn keys):

* single-level series: one stream from ``SeedSequence([seed])``, drawing in
  order: treatment z (whole vector redrawn until non-constant), the two
  standard-normal error factors x1, x2, then (confounder mode only) the
  confounder U.
* multilevel datasets: with subjects indexed i = 0..N-1 inside the streams
  (dataset keys stay 1-based), subject i's random effect comes from
  ``SeedSequence([seed, i, 0])``; session (i, k) for k = 1..K gets its own
  stream ``SeedSequence([seed, i, k])`` drawing in order: session
  coefficient noise eta_ik, the trial count n_ik ~ Poisson (clamped at
  >= 10), then the session series as above (z, x1, x2).
* Monte Carlo replication r derives its dataset seed from
  ``SeedSequence([seed, r])``.

Coefficient order is (A, B, C) internally. The config fields ``psi_diag``
and ``lambda_diag`` follow the reporting-table order instead: psi_diag is
(subject-level variance of A, of C, of B) and lambda_diag is (session-level
variance of A, of B, of C); both are converted at this boundary.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.random import SeedSequence, default_rng

from .core import MultilevelDataset, SessionKey, TrialSeries
from .errors import CorrmedError, ValidationError
from .multilevel import cma_h, cma_h_inner, cma_h_ts, cma_ml, cma_ts, pool_sessions
from .single_level import fit_single

__all__ = [
    "SingleLevelConfig",
    "MultilevelConfig",
    "MonteCarloSummary",
    "gen_single",
    "gen_multilevel",
    "monte_carlo",
    "named_design",
    "DESIGN_NAMES",
]

MAX_FAIL_FRACTION = 0.05


@dataclass(frozen=True)
class SingleLevelConfig:
    """One-session generator settings.

    Direct mode draws the error pair with correlation ``delta`` directly.
    Confounder mode composes e1 = U + e1~, e2 = g*U + e2~ from independent
    normals, with the residual SDs solved so the marginal error SDs equal
    (sigma1, sigma2); the induced correlation is then
    g * u_sd^2 / (sigma1 * sigma2), and ``delta`` (when given) must match
    it. Pass delta=None in confounder mode to have it derived.
    """

    n: int
    a: float
    b: float
    c: float
    sigma1: float = 1.0
    sigma2: float = 1.0
    delta: float | None = 0.0
    p_treat: float = 0.5
    seed: int = 0
    confounder_mode: bool = False
    u_sd: float = 1.0
    g: float = 0.0

    def __post_init__(self):
        if self.n < 4:
            raise ValidationError("n must be at least 4")
        if not 0.0 < self.p_treat < 1.0:
            raise ValidationError("p_treat must lie in (0, 1)")
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValidationError("sigma1 and sigma2 must be positive")
        if self.confounder_mode:
            if not self.u_sd > 0:
                raise ValidationError("u_sd must be positive in confounder mode")
            if self.sigma1 ** 2 <= self.u_sd ** 2:
                raise ValidationError("sigma1^2 must exceed u_sd^2 in confounder mode")
            if self.sigma2 ** 2 <= (self.g * self.u_sd) ** 2:
                raise ValidationError("sigma2^2 must exceed (g*u_sd)^2 in confounder mode")
            induced = self.g * self.u_sd ** 2 / (self.sigma1 * self.sigma2)
            if self.delta is None:
                object.__setattr__(self, "delta", induced)
            elif abs(self.delta - induced) > 1e-9:
                raise ValidationError(
                    f"confounder parameters induce delta={induced:.6g}, "
                    f"which conflicts with delta={self.delta}"
                )
        elif self.delta is None:
            raise ValidationError("delta is required outside confounder mode")
        if not abs(self.delta) < 1:
            raise ValidationError(f"delta must lie in (-1, 1), got {self.delta}")


@dataclass(frozen=True)
class MultilevelConfig:
    """Subject/session generator settings.

    psi_diag is (var_A, var_C, var_B) and lambda_diag is
    (var_A, var_B, var_C) — the reporting-table orders; see the module
    docstring.
    """

    n_subjects: int
    n_sessions: int
    trial_mean: float = 100.0
    fixed: tuple = (-5.0, -10.0, 4.0)  # (A, B, C)
    psi_diag: tuple = (0.5, 0.5, 0.5)  # (A, C, B)
    lambda_diag: tuple = (0.5, 0.5, 0.5)  # (A, B, C)
    sigma1: float = 1.0
    sigma2: float = 1.0
    delta: float = 0.0
    p_treat: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_subjects < 2:
            raise ValidationError("n_subjects must be at least 2")
        if self.n_sessions < 1:
            raise ValidationError("n_sessions must be at least 1")
        if self.trial_mean < 10:
            raise ValidationError("trial_mean must be at least 10")
        if len(self.fixed) != 3 or len(self.psi_diag) != 3 or len(self.lambda_diag) != 3:
            raise ValidationError("fixed, psi_diag, lambda_diag must have 3 entries")
        if min(self.psi_diag) < 0 or min(self.lambda_diag) < 0:
            raise ValidationError("variance entries must be nonnegative")
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValidationError("sigma1 and sigma2 must be positive")
        if not abs(self.delta) < 1:
            raise ValidationError(f"delta must lie in (-1, 1), got {self.delta}")
        if not 0.0 < self.p_treat < 1.0:
            raise ValidationError("p_treat must lie in (0, 1)")

    @property
    def psi_abc(self) -> np.ndarray:
        """Subject-level variances reordered to (A, B, C)."""
        return np.array([self.psi_diag[0], self.psi_diag[2], self.psi_diag[1]])

    @property
    def lam_abc(self) -> np.ndarray:
        """Session-level variances in (A, B, C) order (already the field order)."""
        return np.array(self.lambda_diag, dtype=float)


@dataclass(frozen=True)
class MonteCarloSummary:
    """Aggregated estimator performance over seeded replications.

    stats maps method -> quantity -> {"mean", "sd", "mse"}; counts maps
    method -> successful replication count; failures maps method -> list of
    (replication index, message).
    """

    design: object
    methods: tuple
    reps: int
    seed: int
    truths: dict
    stats: dict
    counts: dict
    failures: dict


def _draw_series(rng, n, a, b, c, sigma1, sigma2, delta, p_treat,
                 confounder_mode=False, u_sd=1.0, g=0.0) -> TrialSeries:
    while True:
        z = (rng.random(n) < p_treat).astype(np.float64)
        if z.min() != z.max():
            break
    x1 = rng.standard_normal(n)
    x2 = rng.standard_normal(n)
    if confounder_mode:
        u = rng.normal(0.0, u_sd, n)
        t1 = math.sqrt(sigma1 ** 2 - u_sd ** 2)
        t2 = math.sqrt(sigma2 ** 2 - (g * u_sd) ** 2)
        e1 = u + t1 * x1
        e2 = g * u + t2 * x2
    else:
        e1 = sigma1 * x1
        e2 = sigma2 * (delta * x1 + math.sqrt(1.0 - delta * delta) * x2)
    m = a * z + e1
    r = c * z + b * m + e2
    return TrialSeries(z=z, m=m, r=r)


def gen_single(cfg: SingleLevelConfig) -> TrialSeries:
    """Generate one session; see the module docstring for the stream."""
    rng = default_rng(SeedSequence([cfg.seed]))
    return _draw_series(
        rng, cfg.n, cfg.a, cfg.b, cfg.c, cfg.sigma1, cfg.sigma2, cfg.delta,
        cfg.p_treat, cfg.confounder_mode, cfg.u_sd, cfg.g,
    )


def gen_multilevel(cfg: MultilevelConfig) -> MultilevelDataset:
    """Generate a subject/session dataset; see the module docstring."""
    psi = cfg.psi_abc
    lam = cfg.lam_abc
    fixed = np.asarray(cfg.fixed, dtype=float)
    sessions = {}
    for i in range(cfg.n_subjects):
        u = default_rng(SeedSequence([cfg.seed, i, 0])).normal(0.0, np.sqrt(psi), 3)
        for k in range(1, cfg.n_sessions + 1):
            rng = default_rng(SeedSequence([cfg.seed, i, k]))
            eta = rng.normal(0.0, np.sqrt(lam), 3)
            a_ik, b_ik, c_ik = fixed + u + eta
            n_ik = max(10, int(rng.poisson(cfg.trial_mean)))
            sessions[SessionKey(i + 1, k)] = _draw_series(
                rng, n_ik, a_ik, b_ik, c_ik, cfg.sigma1, cfg.sigma2,
                cfg.delta, cfg.p_treat,
            )
    return MultilevelDataset(sessions=sessions)


# ---------------------------------------------------------------------------
# named designs


def _table1(**over) -> SingleLevelConfig:
    base = dict(n=100, a=-5.0, b=-10.0, c=4.0, sigma1=1.0, sigma2=1.0,
                delta=0.5, p_treat=0.5, seed=0)
    base.update(over)
    return SingleLevelConfig(**base)


def _multi(**over) -> MultilevelConfig:
    base = dict(n_subjects=50, n_sessions=4, trial_mean=100.0,
                fixed=(-5.0, -10.0, 4.0), psi_diag=(0.5, 0.5, 0.5),
                lambda_diag=(0.5, 0.5, 0.5), sigma1=1.0, sigma2=1.0,
                delta=0.5, p_treat=0.5, seed=0)
    base.update(over)
    return MultilevelConfig(**base)


_DESIGNS = {
    # one-session designs: full effects plus the null blocks
    "table1": lambda: _table1(),
    "table1_a0": lambda: _table1(a=0.0),
    "table1_b0": lambda: _table1(b=0.0),
    "table1_a0b0": lambda: _table1(a=0.0, b=0.0),
    "table1_d0": lambda: _table1(delta=0.0),
    # subject/session designs (shared by the two multilevel tables)
    "multilevel": lambda: _multi(),
    "multilevel_a0": lambda: _multi(fixed=(0.0, -10.0, 4.0)),
    "multilevel_b0": lambda: _multi(fixed=(-5.0, 0.0, 4.0)),
    "multilevel_a0b0": lambda: _multi(fixed=(0.0, 0.0, 4.0)),
    "multilevel_d0": lambda: _multi(delta=0.0),
    # scan-shaped mimic: 97 subjects, 4 sessions, Poisson(91) trials,
    # treatment probability 1/4, negative error correlation. Effect sizes
    # stay on the benchmark scale: the pooled session-level variance update
    # assumes comparable coefficient scales, so shrinking each path to its
    # own real-data magnitude would break that homogeneity.
    "fmri_mimic": lambda: MultilevelConfig(
        n_subjects=97,
        n_sessions=4,
        trial_mean=91.0,
        fixed=(-5.0, -10.0, 4.0),
        psi_diag=(0.5, 0.5, 0.5),
        lambda_diag=(0.5, 0.5, 0.5),
        sigma1=1.0,
        sigma2=1.0,
        delta=-0.25,
        p_treat=0.25,
        seed=0,
    ),
}

DESIGN_NAMES = tuple(sorted(_DESIGNS))


def named_design(name: str, seed: int | None = None):
    """Look up a predefined design config; optionally override its seed."""
    if name not in _DESIGNS:
        raise ValidationError(f"unknown design {name!r}; choose from {DESIGN_NAMES}")
    cfg = _DESIGNS[name]()
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    return cfg


# ---------------------------------------------------------------------------
# Monte Carlo driver

SINGLE_METHODS = ("cma", "bk")
MULTI_METHODS = ("ml", "h", "h_ts", "ts", "kkb", "h_inner", "pooled")


def _truths(cfg) -> dict:
    if isinstance(cfg, SingleLevelConfig):
        ab = cfg.a * cfg.b
        return {
            "delta": cfg.delta, "a": cfg.a, "b": cfg.b, "c": cfg.c,
            "c_total": cfg.c + ab, "ab_prod": ab, "ab_diff": ab,
        }
    a, b, c = cfg.fixed
    ab = a * b
    psi = cfg.psi_abc
    lam = cfg.lam_abc
    return {
        "delta": cfg.delta, "a": a, "b": b, "c": c,
        "c_total": c + ab, "ab_prod": ab, "ab_diff": ab,
        "psi_a": float(psi[0]), "psi_b": float(psi[1]), "psi_c": float(psi[2]),
        "lam2": float(lam.mean()),
    }


def _quantities_single(fit, delta) -> dict:
    return {
        "delta": float(delta),
        "a": fit.theta.a,
        "b": fit.theta.b,
        "c": fit.theta.c,
        "c_total": fit.theta.c_total,
        "ab_prod": fit.indirect_prod,
        "ab_diff": fit.indirect_diff,
    }


def _quantities_multi(fit) -> dict:
    return {
        "delta": fit.delta_hat,
        "a": float(fit.fixed[0]),
        "b": float(fit.fixed[1]),
        "c": float(fit.fixed[2]),
        "c_total": fit.c_total,
        "ab_prod": fit.indirect_prod,
        "ab_diff": fit.indirect_diff,
        "psi_a": float(fit.psi[0]),
        "psi_b": float(fit.psi[1]),
        "psi_c": float(fit.psi[2]),
        "lam2": float(fit.lam.mean()),
    }


def _run_one(cfg, method):
    if isinstance(cfg, SingleLevelConfig):
        series = gen_single(cfg)
        if method == "cma":
            return _quantities_single(fit_single(series, cfg.delta), cfg.delta)
        if method == "bk":
            return _quantities_single(fit_single(series, 0.0), 0.0)
        raise ValidationError(f"unknown single-level method {method!r}")
    data = gen_multilevel(cfg)
    if method == "ml":
        return _quantities_multi(cma_ml(data))
    if method == "h":
        return _quantities_multi(cma_h(data))
    if method == "h_ts":
        return _quantities_multi(cma_h_ts(data))
    if method == "ts":
        return _quantities_multi(cma_ts(data, cfg.delta))
    if method == "kkb":
        return _quantities_multi(cma_ts(data, 0.0))
    if method == "pooled":
        pooled = pool_sessions(data)
        return _quantities_single(fit_single(pooled, cfg.delta), cfg.delta)
    if method == "h_inner":
        state = cma_h_inner(data, cfg.delta)
        ts_ref = cma_ts(data, cfg.delta)  # shared delta-free A and total columns
        return {
            "delta": cfg.delta,
            "a": float(ts_ref.fixed[0]),
            "b": float(state.b[1]),
            "c": float(state.b[2]),
            "c_total": ts_ref.c_total,
            "ab_prod": float(ts_ref.fixed[0] * state.b[1]),
            "ab_diff": float(ts_ref.c_total - state.b[2]),
            "psi_a": float(state.psi[0]),
            "psi_b": float(state.psi[1]),
            "psi_c": float(state.psi[2]),
            "lam2": float(state.lam[0]),
        }
    raise ValidationError(f"unknown multilevel method {method!r}")


def _rep_seed(seed: int, rep: int) -> int:
    return int(SeedSequence([seed, rep]).generate_state(1)[0])


def monte_carlo(design, methods, reps: int, seed: int = 0, threads: int = 1) -> MonteCarloSummary:
    """Run each method on ``reps`` independently seeded datasets and
    aggregate mean/SD/MSE per quantity (means via compensated summation).

    ``design`` is a config object or a named design string. Failures are
    logged per (replication, method) and tolerated up to 5% per method.
    """
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    if isinstance(design, str):
        design = named_design(design)
    methods = tuple(methods)
    allowed = SINGLE_METHODS if isinstance(design, SingleLevelConfig) else MULTI_METHODS
    for m in methods:
        if m not in allowed:
            raise ValidationError(f"method {m!r} not available for this design type")

    def run_rep(rep):
        cfg = replace(design, seed=_rep_seed(seed, rep))
        out = {}
        for m in methods:
            try:
                out[m] = _run_one(cfg, m)
            except CorrmedError as exc:
                out[m] = (rep, f"{type(exc).__name__}: {exc}")
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_rep, range(reps)))
    else:
        results = [run_rep(rep) for rep in range(reps)]

    truths = _truths(design)
    stats = {}
    counts = {}
    failures = {m: [] for m in methods}
    for m in methods:
        values = {}
        for rep, res in enumerate(results):
            entry = res[m]
            if isinstance(entry, tuple):
                failures[m].append(entry)
                continue
            for q, v in entry.items():
                values.setdefault(q, []).append(float(v))
        n_ok = reps - len(failures[m])
        if len(failures[m]) > MAX_FAIL_FRACTION * reps:
            first = failures[m][0]
            raise CorrmedError(
                f"method {m!r}: {len(failures[m])} of {reps} replications failed "
                f"(first: replication {first[0]}, {first[1]})"
            )
        counts[m] = n_ok
        mstats = {}
        for q, vals in values.items():
            arr = np.asarray(vals)
            mean = math.fsum(vals) / len(vals)
            sd = float(arr.std(ddof=1)) if len(vals) > 1 else 0.0
            truth = truths.get(q)
            mse = (
                math.fsum((v - truth) ** 2 for v in vals) / len(vals)
                if truth is not None
                else float("nan")
            )
            mstats[q] = {"mean": mean, "sd": sd, "mse": mse}
        stats[m] = mstats
    return MonteCarloSummary(
        design=design,
        methods=methods,
        reps=reps,
        seed=int(seed),
        truths=truths,
        stats=stats,
        counts=counts,
        failures=failures,
    )
