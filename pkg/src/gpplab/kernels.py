"""Smoothing kernels: the symmetric density psi, its CDF Psi, the quantile
Psi^{-1}, and the tail-dependence reparametrization theta = 2*Psi(-beta/2).

Two kernels ship with the package.  The Laplace kernel psi(s) = exp(-|s|)/2
has closed-form CDF and quantile and is the reference for every closed-form
oracle downstream.  The Gaussian kernel exercises the numeric path: its CDF
is computed by adaptive quadrature of psi and its quantile by bisection
refined with Newton steps.  User kernels take the same numeric path after
validation (symmetry, strict positivity, monotone decay, unit mass);
densities that violate these assumptions are rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import backend
from .errors import DomainError
from .numerics import adaptive_simpson, expand_bracket, invert_monotone

_INV_SQRT_2PI = 0.3989422804014327


@dataclass(frozen=True)
class SmoothingKernel:
    """A symmetric, everywhere-positive density decreasing away from zero.

    Attributes
    ----------
    name : str
        Family tag ("laplace", "gaussian", or a user-supplied label).
    pdf : callable
        Vectorized density s -> psi(s).
    cdf : callable
        Scalar CDF x -> integral of psi up to x.
    quantile : callable
        Scalar quantile q -> Psi^{-1}(q) for q in (0, 1).
    closed_form : bool
        Whether cdf/quantile are closed-form (Laplace) or numeric.
    backend_kind : int or None
        Code of the compiled fast path, None for user kernels.
    """

    name: str
    pdf: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[float], float]
    quantile: Callable[[float], float]
    closed_form: bool
    backend_kind: int | None = field(default=None)

    def tail_halfwidth(self, tail_mass: float) -> float:
        """Half-width W with int_{|s|>W} psi <= 2*tail_mass."""
        return float(self.quantile(1.0 - tail_mass))


def _laplace_pdf(s):
    return 0.5 * np.exp(-np.abs(np.asarray(s, dtype=float)))


def _laplace_cdf(x: float) -> float:
    x = float(x)
    if x <= 0.0:
        return 0.5 * math.exp(x)
    return 1.0 - 0.5 * math.exp(-x)


def _laplace_quantile(q: float) -> float:
    _check_prob_open(q)
    if q <= 0.5:
        return math.log(2.0 * q)
    return -math.log(2.0 * (1.0 - q))


def _gaussian_pdf(s):
    s = np.asarray(s, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * s * s)


def _check_prob_open(q) -> None:
    if not (0.0 < float(q) < 1.0) or not math.isfinite(float(q)):
        raise DomainError(f"probability must lie in the open interval (0, 1), got {q!r}")


def _numeric_cdf(pdf, tol: float = 1e-12) -> Callable[[float], float]:
    def cdf(x: float) -> float:
        x = float(x)
        if x == 0.0:
            return 0.5
        # symmetry pins Psi(0) = 1/2; integrate outward from there
        val = 0.5 + adaptive_simpson(lambda s: float(pdf(s)), 0.0, x, tol)
        return min(max(val, 0.0), 1.0)

    return cdf


def _numeric_quantile(pdf, cdf) -> Callable[[float], float]:
    def quantile(q: float) -> float:
        q = float(q)
        _check_prob_open(q)
        if q == 0.5:
            return 0.0
        lo, hi = expand_bracket(cdf, q)
        return invert_monotone(cdf, q, lo, hi, dfdx=lambda s: float(pdf(s)), xtol=1e-12)

    return quantile


def laplace_kernel() -> SmoothingKernel:
    """psi(s) = exp(-|s|)/2, closed-form CDF and quantile."""
    return SmoothingKernel(
        name="laplace",
        pdf=_laplace_pdf,
        cdf=_laplace_cdf,
        quantile=_laplace_quantile,
        closed_form=True,
        backend_kind=backend.KIND_LAPLACE,
    )


def gaussian_kernel() -> SmoothingKernel:
    """Standard normal psi; CDF and quantile via the numeric path."""
    cdf = _numeric_cdf(_gaussian_pdf)
    return SmoothingKernel(
        name="gaussian",
        pdf=_gaussian_pdf,
        cdf=cdf,
        quantile=_numeric_quantile(_gaussian_pdf, cdf),
        closed_form=False,
        backend_kind=backend.KIND_GAUSSIAN,
    )


def custom_kernel(name: str, pdf, *, halfwidth: float = 30.0) -> SmoothingKernel:
    """Wrap a user density after validating the model assumptions.

    The density must be symmetric, strictly positive, nonincreasing on
    [0, inf), and integrate to one; essentially all of its mass must lie in
    [-halfwidth, halfwidth].  Violations raise :class:`DomainError` -- such
    kernels are rejected, not supported.
    """
    grid = np.linspace(0.0, halfwidth, 2001)
    vals = np.asarray(pdf(grid), dtype=float)
    neg = np.asarray(pdf(-grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError(f"kernel {name!r}: density is not finite on the test grid")
    if np.max(np.abs(vals - neg)) > 1e-12 * max(1.0, float(vals[0])):
        raise DomainError(f"kernel {name!r}: density is not symmetric")
    if np.min(vals) <= 0.0:
        raise DomainError(f"kernel {name!r}: density must be strictly positive everywhere")
    if np.max(np.diff(vals)) > 1e-12 * float(vals[0]):
        raise DomainError(f"kernel {name!r}: density must be nonincreasing on [0, inf)")
    mass = 2.0 * adaptive_simpson(lambda s: float(pdf(s)), 0.0, halfwidth, 1e-12)
    if abs(mass - 1.0) > 1e-8:
        raise DomainError(
            f"kernel {name!r}: mass on [-{halfwidth}, {halfwidth}] is {mass:.10f}, "
            "expected 1 to 1e-8 (increase halfwidth or fix the density)"
        )
    cdf = _numeric_cdf(pdf)
    return SmoothingKernel(
        name=name,
        pdf=pdf,
        cdf=cdf,
        quantile=_numeric_quantile(pdf, cdf),
        closed_form=False,
        backend_kind=None,
    )


def kernel_by_name(name: str) -> SmoothingKernel:
    if name == "laplace":
        return laplace_kernel()
    if name == "gaussian":
        return gaussian_kernel()
    raise DomainError(f"unknown kernel {name!r}; built-ins are 'laplace' and 'gaussian'")


def scaled_pdf(kernel: SmoothingKernel, beta: float, s):
    """The scale family psi_beta(s) = beta * psi(beta * s)."""
    validate_beta(beta)
    return beta * kernel.pdf(beta * np.asarray(s, dtype=float))


def validate_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise DomainError(f"scale parameter beta must be a positive real, got {beta!r}")
    return beta


def validate_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 < theta < 1.0):
        raise DomainError(f"tail-dependence parameter theta must lie in (0, 1), got {theta!r}")
    return theta


def theta_from_beta(kernel: SmoothingKernel, beta: float) -> float:
    """theta = 2 * Psi(-beta/2), the exceedance mass above a constant threshold."""
    beta = validate_beta(beta)
    return 2.0 * kernel.cdf(-0.5 * beta)


def beta_from_theta(kernel: SmoothingKernel, theta: float) -> float:
    """Inverse of :func:`theta_from_beta`: beta = -2 * Psi^{-1}(theta/2)."""
    theta = validate_theta(theta)
    return -2.0 * kernel.quantile(0.5 * theta)
