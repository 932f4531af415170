"""Shared data model: trial series, coefficient containers, validation, centering.

Every estimator in this package works on *centered* data. Centering the
treatment vector is deliberate even though treatments arrive as 0/1
indicators: with a centered z the treatment second moment zᵀz/n estimates
var(Z) = p(1-p), which is the normalization under which the asymptotic
variance formulas reproduce the observed Monte Carlo spread. It is
equivalent to fitting each regression with an intercept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateTreatment,
    LengthMismatch,
    TooFewTrials,
    ValidationError,
)

MIN_TRIALS = 4


def _as_readonly_f64(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"expected a 1-D vector, got shape {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TrialSeries:
    """One session of trial-level data: treatment z, mediator m, outcome r."""

    z: np.ndarray
    m: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", _as_readonly_f64(self.z))
        object.__setattr__(self, "m", _as_readonly_f64(self.m))
        object.__setattr__(self, "r", _as_readonly_f64(self.r))

    @property
    def n(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class NoiseCov:
    """Error model of the two structural equations: SDs sigma1, sigma2 and correlation delta."""

    sigma1: float
    sigma2: float
    delta: float

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValidationError("noise SDs must be positive")
        if not abs(self.delta) < 1:
            raise ValidationError(f"delta must lie in (-1, 1), got {self.delta}")

    @property
    def matrix(self) -> np.ndarray:
        s1, s2, d = self.sigma1, self.sigma2, self.delta
        off = d * s1 * s2
        return np.array([[s1 * s1, off], [off, s2 * s2]])


@dataclass(frozen=True)
class PathCoefficients:
    """Structural path coefficients: a (treatment->mediator), b (mediator->outcome),
    c (direct), c_total (total-effect slope)."""

    a: float
    b: float
    c: float
    c_total: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])


@dataclass(frozen=True)
class ResidualCov:
    """Sample covariance of the two reduced-form residual vectors.

    s11: variance of mediator-equation residuals; s22: variance of
    total-effect-equation residuals; s12: their cross-covariance.
    """

    s11: float
    s12: float
    s22: float

    def __post_init__(self):
        det = self.s11 * self.s22 - self.s12 * self.s12
        if det < -1e-10 * max(1.0, self.s11 * self.s22):
            raise ValidationError(
                "residual covariance violates Cauchy-Schwarz beyond rounding slack"
            )

    @property
    def det(self) -> float:
        return self.s11 * self.s22 - self.s12 * self.s12


class SessionKey(tuple):
    """(subject, session) identifier pair; subjects and sessions are 1-based ints."""

    __slots__ = ()

    def __new__(cls, subject: int, session: int):
        return super().__new__(cls, (int(subject), int(session)))

    @property
    def subject(self) -> int:
        return self[0]

    @property
    def session(self) -> int:
        return self[1]

    def __repr__(self):
        return f"SessionKey(subject={self[0]}, session={self[1]})"


@dataclass(frozen=True)
class MultilevelDataset:
    """A collection of sessions keyed by (subject, session)."""

    sessions: dict

    def __post_init__(self):
        if not self.sessions:
            raise ValidationError("dataset has no sessions")
        keys = list(self.sessions)
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate session keys")

    @property
    def subjects(self) -> list:
        return sorted({k.subject for k in self.sessions})

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)

    @property
    def sessions_per_subject(self) -> dict:
        counts = {}
        for k in self.sessions:
            counts[k.subject] = counts.get(k.subject, 0) + 1
        return counts

    def sorted_keys(self) -> list:
        return sorted(self.sessions)


def validate_series(raw: TrialSeries) -> TrialSeries:
    """Check the TrialSeries invariants and return the input unchanged.

    Raises LengthMismatch, TooFewTrials, or DegenerateTreatment.
    """
    nz, nm, nr = raw.z.shape[0], raw.m.shape[0], raw.r.shape[0]
    if not (nz == nm == nr):
        raise LengthMismatch(f"z, m, r lengths differ: {nz}, {nm}, {nr}")
    if nz < MIN_TRIALS:
        raise TooFewTrials(f"need at least {MIN_TRIALS} trials, got {nz}")
    for name, v in (("z", raw.z), ("m", raw.m), ("r", raw.r)):
        if not np.all(np.isfinite(v)):
            raise ValidationError(f"non-finite values in {name}")
    if np.min(raw.z) == np.max(raw.z):
        raise DegenerateTreatment("treatment vector is constant")
    return raw


def _center_exact(v: np.ndarray) -> np.ndarray:
    # Mean subtraction with a deterministic "already centered" threshold so
    # that centering is exactly idempotent: a sum below n*2^-50*scale is
    # rounding residue that further passes cannot reliably remove (each pass
    # leaves up to n*2^-51*scale of new subtraction rounding), so such input
    # is returned unchanged. One subtraction pass always lands under the
    # threshold, hence the loop runs at most twice.
    out = v.astype(np.float64, copy=True)
    n = out.size
    for _ in range(4):
        total = math.fsum(out)
        if total == 0.0:
            return out
        scale = max(1.0, float(np.max(np.abs(out))))
        if abs(total) <= n * 2.0**-50 * scale:
            return out
        out -= total / n
    return out


def center(series: TrialSeries) -> TrialSeries:
    """Return a copy of the series with z, m, r shifted to exact zero mean."""
    return TrialSeries(
        z=_center_exact(series.z),
        m=_center_exact(series.m),
        r=_center_exact(series.r),
    )


def validate_dataset(data: MultilevelDataset) -> MultilevelDataset:
    """Validate every session of a multilevel dataset; errors name the session."""
    for key in data.sorted_keys():
        try:
            validate_series(data.sessions[key])
        except ValidationError as exc:
            raise type(exc)(f"{key}: {exc}") from None
    return data
