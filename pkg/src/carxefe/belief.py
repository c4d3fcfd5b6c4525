"""Normal-Gamma filtering for a scalar linear-Gaussian (ARX) likelihood.

The joint posterior over coefficients ``theta`` and noise precision ``tau`` is

    theta | tau ~ N(mean, (tau * precision)^-1),   tau ~ Gamma(shape, rate)

and stays in this family after every observation, so filtering is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NumericalError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NormalGammaBelief:
    """Posterior NG(mean, precision, shape, rate) over ``(theta, tau)``.

    Arrays are copied and made read-only on construction.
    """

    mean: np.ndarray
    precision: np.ndarray
    shape: float
    rate: float

    def __post_init__(self):
        mean = _frozen(np.atleast_1d(self.mean))
        precision = _frozen(np.atleast_2d(self.precision))
        if mean.ndim != 1:
            raise ValueError(f"mean must be a vector, got shape {mean.shape}")
        d = mean.shape[0]
        if precision.shape != (d, d):
            raise ValueError(f"precision must be {d}x{d}, got {precision.shape}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(precision))):
            raise ValueError("mean and precision must be finite")
        if not self.shape > 0:
            raise ValueError(f"shape must be positive, got {self.shape}")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "precision", precision)
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "rate", float(self.rate))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def isotropic(cls, dim: int, mean: float = 0.0, precision: float = 1.0,
                  shape: float = 2.0, rate: float = 3.0) -> "NormalGammaBelief":
        """Prior with a constant mean vector and a scaled identity precision."""
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        return cls(np.full(dim, float(mean)), float(precision) * np.eye(dim), shape, rate)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Return ``precision^-1 @ rhs`` via a fresh Cholesky factorization."""
        try:
            factor = linalg.cho_factor(self.precision, lower=True, check_finite=False)
        except linalg.LinAlgError as exc:
            raise NumericalError("precision matrix is not positive definite") from exc
        return linalg.cho_solve(factor, rhs, check_finite=False)

    def __eq__(self, other):
        if not isinstance(other, NormalGammaBelief):
            return NotImplemented
        return (
            np.array_equal(self.mean, other.mean)
            and np.array_equal(self.precision, other.precision)
            and self.shape == other.shape
            and self.rate == other.rate
        )

    __hash__ = None


@dataclass(frozen=True)
class StudentTPredictive:
    """Location-scale Student-t; ``scale`` is the squared scale, not a std."""

    location: float
    scale: float
    dof: float

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        if not self.dof > 0:
            raise ValueError(f"dof must be positive, got {self.dof}")

    @property
    def variance(self) -> float:
        if self.dof <= 2:
            raise ValueError(f"variance undefined for dof={self.dof} <= 2")
        return self.scale * self.dof / (self.dof - 2.0)


@dataclass(frozen=True)
class GammaMarginal:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("shape and rate must be positive")


def _check_regressor(belief: NormalGammaBelief, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != belief.dim:
        raise ValueError(f"regressor has length {x.shape[0]}, belief expects {belief.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("regressor must be finite")
    return x


def update(belief: NormalGammaBelief, x, y: float) -> NormalGammaBelief:
    """Condition ``belief`` on one observation ``y`` with regressor ``x``.

    Raises NumericalError if the updated rate is not positive; that can only
    happen through round-off and means the filter has broken down.
    """
    x = _check_regressor(belief, x)
    y = float(y)
    if not math.isfinite(y):
        raise ValueError("observation must be finite")
    mu, lam = belief.mean, belief.precision
    lam_new = np.outer(x, x) + lam
    lam_new = 0.5 * (lam_new + lam_new.T)
    try:
        factor = linalg.cho_factor(lam_new, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError("updated precision is not positive definite") from exc
    mu_new = linalg.cho_solve(factor, x * y + lam @ mu, check_finite=False)
    rate = belief.rate + 0.5 * (y * y - mu_new @ lam_new @ mu_new + mu @ lam @ mu)
    if not (rate > 0 and math.isfinite(rate)):
        raise NumericalError(f"posterior rate became {float(rate)!r}; filter diverged")
    return NormalGammaBelief(mu_new, lam_new, belief.shape + 0.5, rate)


def quad_form(belief: NormalGammaBelief, x) -> float:
    """``x^T precision^-1 x``."""
    x = _check_regressor(belief, x)
    return float(x @ belief.solve(x))


def posterior_predictive(belief: NormalGammaBelief, x) -> StudentTPredictive:
    """Predictive over the next output given regressor ``x``, parameters integrated out."""
    x = _check_regressor(belief, x)
    q = float(x @ belief.solve(x))
    return StudentTPredictive(
        location=float(belief.mean @ x),
        scale=belief.rate / belief.shape * (q + 1.0),
        dof=2.0 * belief.shape,
    )


def log_pdf_student_t(y: float, p: StudentTPredictive) -> float:
    if not math.isfinite(y):
        raise ValueError("y must be finite")
    nu = p.dof
    r = (y - p.location) ** 2 / (nu * p.scale)
    return (
        math.lgamma(0.5 * (nu + 1.0))
        - math.lgamma(0.5 * nu)
        - 0.5 * math.log(nu * math.pi * p.scale)
        - 0.5 * (nu + 1.0) * math.log1p(r)
    )


def log_pdf_gaussian(y: float, m: float, v: float) -> float:
    if not v > 0:
        raise ValueError(f"variance must be positive, got {v}")
    return -0.5 * math.log(2.0 * math.pi * v) - (y - m) ** 2 / (2.0 * v)


def marginal_tau(belief: NormalGammaBelief) -> GammaMarginal:
    return GammaMarginal(belief.shape, belief.rate)


def marginal_theta(belief: NormalGammaBelief) -> tuple[np.ndarray, np.ndarray, float]:
    """Multivariate t marginal of the coefficients: (location, scale matrix, dof)."""
    cov = belief.solve(np.eye(belief.dim))
    cov = 0.5 * (cov + cov.T)
    return belief.mean.copy(), belief.rate / belief.shape * cov, 2.0 * belief.shape
