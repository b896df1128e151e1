"""Threshold-exceedance estimators of the dependence parameters.

With tau the number of sample paths exceeding the constant threshold c < 0,

    psi_hat   = tau / (2 |c| n)      estimates Psi(-beta/2) = theta/2
    theta_hat = tau / (|c| n)        estimates theta = 2 Psi(-beta/2)
    beta_hat  = -2 Psi^{-1}(psi_hat) estimates beta

theta_hat == 2 * psi_hat holds exactly (the two expressions round
identically), and the threshold-function variant with f = -1 reduces to the
plain count.  The calibrated estimator solves P(X > c; theta) = tau/n in
theta; on the exact GPP survival map |c| * theta it reduces to theta_hat
without any root finding.

``asymptotic_moments`` centralizes the limiting bias/variance formulas the
Monte Carlo harness tests against, for both the fixed-threshold sqrt(n)
normalization and the shrinking-threshold sqrt(n |c_n|) normalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dnorm import GridFunction
from .errors import DomainError, NoRootError, ThresholdValidityError
from .kernels import SmoothingKernel
from .numerics import invert_monotone
from .processes import ProcessBatch

OUT_OF_MODEL_EPS = 1e-6


@dataclass(frozen=True)
class EstimateReport:
    """A point estimate with its provenance and plug-in variance.

    ``asymptotic_variance`` is the estimator's limiting variance with the
    estimate itself plugged into the closed-form expression (None when no
    formula applies); ``normalized_error`` is filled by experiment code when
    the truth is known.
    """

    estimate: float
    estimator: str
    n: int | None = None
    c: float | None = None
    asymptotic_variance: float | None = None
    normalized_error: float | None = None
    flags: tuple[str, ...] = field(default=())


def _check_threshold_level(c: float) -> float:
    c = float(c)
    if not (c < 0.0) or not math.isfinite(c):
        raise DomainError(f"threshold c must be a finite negative real, got {c!r}")
    return abs(c)


def _check_validity(c_abs: float, sup_norm: float, batch: ProcessBatch, bound: float | None):
    if bound is None:
        return
    limit = min(abs(batch.lower_cap), 1.0 / bound)
    if c_abs * sup_norm > limit:
        raise ThresholdValidityError(
            f"|c| * sup|f| = {c_abs * sup_norm!r} exceeds the validity bound "
            f"min(|M|, 1/m) = {limit!r} (M={batch.lower_cap!r}, m={bound!r})"
        )


def exceedance_count(batch: ProcessBatch, c: float) -> int:
    """Number of paths with min_t path > c (the same count theta_hat uses)."""
    _check_threshold_level(c)
    return int(np.count_nonzero(batch.values.min(axis=1) > c))


def psi_from_count(count: int, n: int, c: float) -> float:
    return count / (2.0 * n * _check_threshold_level(c))


def theta_from_count(count: int, n: int, c: float) -> float:
    return count / (n * _check_threshold_level(c))


def estimate_psi(batch: ProcessBatch, c: float, *, generator_bound: float | None = None) -> EstimateReport:
    """Exceedance estimator of Psi(-beta/2) from a batch of paths.

    Counts paths lying strictly above the constant function c everywhere and
    scales by 1/(2|c|n).  Not bounded by 1/2 at finite n.
    """
    c_abs = _check_threshold_level(c)
    _check_validity(c_abs, 1.0, batch, generator_bound)
    n = batch.n
    value = exceedance_count(batch, c) / (2.0 * n * c_abs)
    return EstimateReport(
        estimate=value,
        estimator="psi",
        n=n,
        c=float(c),
        asymptotic_variance=fixed_threshold_psi_variance(value, c),
    )


def estimate_psi_threshold_fn(
    batch: ProcessBatch,
    f: GridFunction,
    c: float,
    *,
    generator_bound: float | None = None,
) -> EstimateReport:
    """Threshold-function variant: counts paths above |c| f componentwise.

    Converges to half the inf-functional of f; with f = -1 it equals
    :func:`estimate_psi` exactly.  Note the limit need not identify beta
    (the exponential-decay threshold is flat in beta on (0, 1]).
    """
    c_abs = _check_threshold_level(c)
    if f.grid_size != batch.grid_size:
        raise DomainError("threshold function and batch must share one grid")
    _check_validity(c_abs, f.sup_norm, batch, generator_bound)
    n = batch.n
    count = int(np.count_nonzero((batch.values > c_abs * f.values[None, :]).all(axis=1)))
    return EstimateReport(
        estimate=count / (2.0 * n * c_abs),
        estimator="psi_threshold_fn",
        n=n,
        c=float(c),
    )


def estimate_beta(psi_value: float, kernel: SmoothingKernel, *, n: int | None = None, c: float | None = None) -> EstimateReport:
    """beta_hat = -2 Psi^{-1}(psi_value).

    Values of psi_value at or above 1/2 can occur at finite n but leave the
    model's range (they would force beta <= 0); the estimate is then clamped
    just below 1/2 and flagged "out-of-model" instead of aborting a Monte
    Carlo pipeline.  Values outside (0, 1) are domain errors.
    """
    v = float(psi_value)
    if not (0.0 < v < 1.0):
        raise DomainError(f"psi estimate must lie in (0, 1) to invert, got {v!r}")
    flags: tuple[str, ...] = ()
    if v >= 0.5:
        v = 0.5 - OUT_OF_MODEL_EPS
        flags = ("out-of-model",)
    value = -2.0 * kernel.quantile(v)
    variance = None
    if c is not None:
        variance = fixed_threshold_beta_variance(float(psi_value) if not flags else v, value, c, kernel)
    return EstimateReport(
        estimate=value,
        estimator="beta",
        n=n,
        c=c,
        asymptotic_variance=variance,
        flags=flags,
    )


def estimate_theta(count: int, n: int, c: float) -> EstimateReport:
    """theta_hat = tau / (n |c|), the standardized exceedance count."""
    count = int(count)
    if not (0 <= count <= n):
        raise DomainError(f"count must lie in [0, n], got {count} with n={n}")
    c_abs = _check_threshold_level(c)
    value = count / (n * c_abs)
    return EstimateReport(
        estimate=value,
        estimator="theta",
        n=n,
        c=float(c),
        asymptotic_variance=value * (1.0 - c_abs * value),
    )


def estimate_theta_calibrated(
    count: int,
    n: int,
    c: float,
    survival=None,
    *,
    xtol: float = 1e-10,
    theta_range: tuple[float, float] = (1e-9, 1.0 - 1e-9),
) -> EstimateReport:
    """Solve P(X > c; theta) = count/n for theta.

    ``survival`` maps theta to the exceedance probability at threshold c;
    None selects the exact GPP map |c| * theta, for which the solution is
    count/(n |c|) -- the same float theta_hat produces.  A zero count is
    reported as a flagged boundary value; a target outside the range of the
    survival map raises :class:`NoRootError`.
    """
    count = int(count)
    if not (0 <= count <= n):
        raise DomainError(f"count must lie in [0, n], got {count} with n={n}")
    c_abs = _check_threshold_level(c)
    target = count / n
    if count == 0:
        return EstimateReport(0.0, "theta_star", n=n, c=float(c), flags=("boundary",))
    if survival is None:
        value = count / (n * c_abs)
        if value >= 1.0:
            raise NoRootError(
                f"tau/n = {target!r} is not attained by |c|*theta for theta in (0, 1)"
            )
        return EstimateReport(value, "theta_star", n=n, c=float(c))
    lo, hi = theta_range
    p_lo, p_hi = survival(lo), survival(hi)
    if not (p_lo <= target <= p_hi):
        raise NoRootError(
            f"tau/n = {target!r} outside the attainable survival range [{p_lo!r}, {p_hi!r}]"
        )
    value = invert_monotone(lambda th: survival(th), target, lo, hi, xtol=xtol)
    return EstimateReport(value, "theta_star", n=n, c=float(c))


# --------------------------------------------------------------------------
# Limiting moments
# --------------------------------------------------------------------------


def fixed_threshold_psi_variance(psi_value: float, c: float) -> float:
    """Variance of sqrt(n)(psi_hat - Psi(-beta/2)) at a fixed threshold."""
    c_abs = _check_threshold_level(c)
    return psi_value * (1.0 - 2.0 * c_abs * psi_value) / (2.0 * c_abs)


def fixed_threshold_beta_variance(psi_value: float, beta_value: float, c: float, kernel: SmoothingKernel) -> float:
    """Variance of sqrt(n)(beta_hat - beta) at a fixed threshold."""
    c_abs = _check_threshold_level(c)
    dens = float(kernel.pdf(-0.5 * beta_value))
    return 2.0 * psi_value * (1.0 - 2.0 * c_abs * psi_value) / (c_abs * dens * dens)


def asymptotic_moments(
    estimator: str,
    kernel: SmoothingKernel,
    beta: float,
    *,
    c: float | None = None,
    const: float = 0.0,
    mu: float = 0.0,
) -> tuple[float, float]:
    """Limiting (bias, variance) of the normalized estimator error.

    Fixed-threshold tags ("psi_fixed", "beta_fixed") use the sqrt(n)
    normalization at the given c and have no bias.  Shrinking-threshold tags
    ("psi_shrinking", "beta_shrinking", "theta_shrinking") use the
    sqrt(n |c_n|) normalization with n |c_n|^(1+2 delta) -> const; their bias
    is driven by mu = K(-1) * Psi(-beta/2) from the neighborhood expansion
    (zero for the exact GPP), and const = 0 removes it.
    """
    if const < 0.0:
        raise DomainError(f"const must be nonnegative, got {const!r}")
    psi_value = float(kernel.cdf(-0.5 * beta))
    dens = float(kernel.pdf(-0.5 * beta))
    root = math.sqrt(const)
    if estimator == "psi_fixed":
        return 0.0, fixed_threshold_psi_variance(psi_value, _req_c(c))
    if estimator == "beta_fixed":
        return 0.0, fixed_threshold_beta_variance(psi_value, beta, _req_c(c), kernel)
    if estimator == "psi_shrinking":
        return root * mu, 0.5 * psi_value
    if estimator == "beta_shrinking":
        return -2.0 * root * mu / dens, 2.0 * psi_value / (dens * dens)
    if estimator == "theta_shrinking":
        return 2.0 * root * mu, 2.0 * psi_value
    raise DomainError(f"unknown estimator tag {estimator!r}")


def _req_c(c: float | None) -> float:
    if c is None:
        raise DomainError("fixed-threshold moments need the threshold c")
    return float(c)
