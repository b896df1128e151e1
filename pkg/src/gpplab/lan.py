"""Point process of exceedances, log-likelihood ratios, and the local
asymptotic normality (LAN) quadratic with its efficiency quantities.

Every path exceeding the constant threshold c < 0 contributes its rescaled
outcome sup_t(X_t/c) < 1 to the point process; the exceedance count tau is
binomial and the outcomes are iid with df P(X > s c)/P(X > c).  The
log-likelihood ratio of the point process between theta and theta0 is

    sum_k log( ratio(Y_k) * P0/P1 ) + tau log(P1/P0) + (n - tau) log((1-P1)/(1-P0))

which for the exact GPP model collapses to the closed form
tau log(theta/theta0) + (n - tau) log((1 - |c| theta)/(1 - |c| theta0)).
Under local alternatives theta0 + xi/sqrt(n |c_n|) the ratio admits the
quadratic expansion xi * L * Z_n - xi^2 L^2 theta0 / 2 around the central
sequence Z_n = (tau - n |c_n| theta0)/sqrt(n |c_n|), provided the threshold
law shrinks fast enough; :func:`validate_threshold_law` enforces the
admissible power-law window and distinguishes it from the slower "bias"
regime where n |c_n|^(1+2 delta) tends to a positive constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .dnorm import DEFAULT_GRID_SIZE
from .errors import ConfigError, DomainError
from .generator import GeneratorSpec, build_generator, generator_extremes
from .kernels import SmoothingKernel, beta_from_theta, validate_theta
from .numerics import invert_monotone
from .processes import DEFAULT_LOWER_CAP, ProcessBatch, YDistribution, exceedance_scan


@dataclass(frozen=True)
class ExceedanceSample:
    """tau(n) and the rescaled exceedance positions, in sampling order.

    ``positions`` is None when a streaming scan was asked to drop them; the
    closed-form GPP likelihood needs only the count.
    """

    count: int
    positions: np.ndarray | None
    n: int
    c: float

    def __post_init__(self):
        if not (0 <= self.count <= self.n):
            raise DomainError(f"count must lie in [0, n], got {self.count} with n={self.n}")
        if self.positions is not None:
            pos = np.ascontiguousarray(self.positions, dtype=np.float64)
            if len(pos) != self.count:
                raise DomainError("positions must list exactly the exceeding paths")
            if np.any(pos >= 1.0) or np.any(pos < 0.0):
                raise DomainError("positions of exceeding paths lie in [0, 1)")
            pos.setflags(write=False)
            object.__setattr__(self, "positions", pos)


def exceedance_sample(batch: ProcessBatch, c: float) -> ExceedanceSample:
    """Exceedances of a batch above the constant threshold c.

    A path exceeds iff its minimum exceeds c, in which case its rescaled
    outcome min_t(path)/c lies strictly below one.
    """
    c = float(c)
    if not (c < 0.0) or not math.isfinite(c):
        raise DomainError(f"threshold c must be a finite negative real, got {c!r}")
    mins = batch.values.min(axis=1)
    hit = mins > c
    return ExceedanceSample(
        count=int(np.count_nonzero(hit)),
        positions=mins[hit] / c,
        n=batch.n,
        c=c,
    )


def simulate_exceedances(
    gen: GeneratorSpec,
    c: float,
    n: int,
    rng: np.random.Generator,
    *,
    ydist: YDistribution | None = None,
    lower_cap: float = DEFAULT_LOWER_CAP,
    grid_size: int = DEFAULT_GRID_SIZE,
    keep_positions: bool = True,
) -> ExceedanceSample:
    """Streaming twin of ``exceedance_sample(sample_..., c)``: same draws,
    same counts, no path matrices in memory."""
    count, pos = exceedance_scan(
        gen,
        c,
        n,
        rng,
        ydist=ydist,
        lower_cap=lower_cap,
        grid_size=grid_size,
        keep_positions=keep_positions,
    )
    return ExceedanceSample(count=count, positions=pos if keep_positions else None, n=n, c=float(c))


# --------------------------------------------------------------------------
# Local models
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LanModel:
    """Local exceedance model at a fixed threshold c.

    ``survival`` maps theta to P_theta(X > c); ``density_ratio`` maps
    (positions, theta) to f_{theta,c}/f_{theta0,c} evaluated at the
    positions.  ``slope`` is the derivative constant L of the local
    expansion of the ratio (1/theta0 for a GPP and for the generated
    neighborhoods); ``remainder_order`` is the exponent gamma of the
    O(|c|^gamma) remainder, infinite when the model is exact.
    """

    theta0: float
    c: float
    slope: float
    remainder_order: float
    survival: Callable[[float], float]
    density_ratio: Callable[[np.ndarray, float], np.ndarray]


def gpp_model(theta0: float, c: float) -> LanModel:
    """Exact GPP local model: survival |c| theta, flat density ratio theta/theta0."""
    theta0 = validate_theta(theta0)
    c = float(c)
    if not (c < 0.0):
        raise DomainError(f"threshold c must be negative, got {c!r}")
    c_abs = abs(c)
    return LanModel(
        theta0=theta0,
        c=c,
        slope=1.0 / theta0,
        remainder_order=math.inf,
        survival=lambda theta: c_abs * theta,
        density_ratio=lambda s, theta: np.full(np.shape(s), theta / theta0),
    )


class CalibratedSurvivalModel:
    """Monte Carlo surrogate of theta -> P_theta(X > s c) for neighborhoods.

    The map theta -> beta -> generator is re-sampled with common random
    numbers (one frozen uniform stream), so the survival curve is smooth in
    theta; the 64-point table at s = 1 is made monotone and interpolated by
    a shape-preserving cubic for root finding.  Per-theta draws are cached
    for the density-ratio evaluator, which differentiates P(X > s c) in s by
    central differences.
    """

    def __init__(
        self,
        kernel: SmoothingKernel,
        ydist: YDistribution,
        c: float,
        *,
        mixing_rate: float = 0.5,
        n_mc: int = 100_000,
        seed: int = 0,
        grid_size: int = DEFAULT_GRID_SIZE,
        theta_grid_size: int = 64,
        theta_span: tuple[float, float] = (0.01, 0.99),
    ):
        if not (float(c) < 0.0):
            raise DomainError(f"threshold c must be negative, got {c!r}")
        self.kernel = kernel
        self.ydist = ydist
        self.c = float(c)
        self.c_abs = abs(float(c))
        self.mixing_rate = float(mixing_rate)
        self.n_mc = int(n_mc)
        self.seed = int(seed)
        self.grid_size = int(grid_size)
        self._uniforms = np.random.default_rng(np.random.SeedSequence(self.seed)).random(self.n_mc)
        self._inf_cache: dict[float, np.ndarray] = {}
        self.theta_grid = np.linspace(theta_span[0], theta_span[1], theta_grid_size)
        probs = np.array([self._survival_scaled(1.0, th) for th in self.theta_grid])
        self.table = np.maximum.accumulate(probs)  # enforce monotonicity before interpolating
        self._interp = PchipInterpolator(self.theta_grid, self.table)

    def _inf_draws(self, theta: float) -> np.ndarray:
        key = float(theta)
        if key not in self._inf_cache:
            beta = beta_from_theta(self.kernel, key)
            gen = build_generator(self.kernel, beta, self.mixing_rate)
            s = mixing_from_uniform(gen, self._uniforms)
            self._inf_cache[key] = generator_extremes(gen, s, grid_size=self.grid_size)[1]
        return self._inf_cache[key]

    def _survival_scaled(self, s: float, theta: float) -> float:
        return float(np.mean(self.ydist.cdf(s * self.c_abs * self._inf_draws(theta))))

    @property
    def theta_range(self) -> tuple[float, float]:
        return float(self.theta_grid[0]), float(self.theta_grid[-1])

    def survival(self, theta: float) -> float:
        """Interpolated P_theta(X > c) from the monotone table."""
        th = validate_theta(theta)
        lo, hi = self.theta_grid[0], self.theta_grid[-1]
        if not (lo <= th <= hi):
            raise DomainError(f"theta {th!r} lies outside the calibrated range [{lo}, {hi}]")
        return float(self._interp(th))

    def density_ratio(self, positions, theta: float, theta0: float, *, step: float = 1e-3) -> np.ndarray:
        """f_{theta,c}/f_{theta0,c} at the positions by central differences in s."""
        pos = np.atleast_1d(np.asarray(positions, dtype=float))
        out = np.empty(len(pos))
        for i, s in enumerate(pos):
            num = self._survival_scaled(s + step, theta) - self._survival_scaled(s - step, theta)
            den = self._survival_scaled(s + step, theta0) - self._survival_scaled(s - step, theta0)
            out[i] = num / den
        return out

    def root(self, target: float, *, xtol: float = 1e-10) -> float:
        lo, hi = self.theta_grid[0], self.theta_grid[-1]
        return invert_monotone(lambda th: float(self._interp(th)), target, lo, hi, xtol=xtol)


def mixing_from_uniform(gen: GeneratorSpec, u: np.ndarray) -> np.ndarray:
    """Quantile transform of uniforms into mixing draws (for common random
    numbers across nearby parameter values)."""
    u = np.asarray(u, dtype=float)
    name = gen.kernel.name
    if name == "laplace":
        q = np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))
    elif name == "gaussian":
        from scipy.special import ndtri

        q = ndtri(u)
    else:
        q = np.array([gen.kernel.quantile(v) for v in u])
    return gen.mixing_loc + gen.mixing_scale * q


def neighborhood_model(
    theta0: float,
    model: CalibratedSurvivalModel,
    *,
    remainder_order: float | None = None,
) -> LanModel:
    """LanModel over the calibrated survival surrogate; the generated
    neighborhoods have slope L = 1/theta0, and the remainder order defaults
    to the Y-distribution's expansion order."""
    theta0 = validate_theta(theta0)
    gamma = model.ydist.expansion_order if remainder_order is None else float(remainder_order)
    return LanModel(
        theta0=theta0,
        c=model.c,
        slope=1.0 / theta0,
        remainder_order=gamma,
        survival=model.survival,
        density_ratio=lambda s, theta: model.density_ratio(s, theta, theta0),
    )


# --------------------------------------------------------------------------
# Likelihood ratios and the LAN quadratic
# --------------------------------------------------------------------------


def _check_prob(p: float, what: str) -> float:
    if not (0.0 < p < 1.0) or not math.isfinite(p):
        raise DomainError(f"{what} must lie in (0, 1), got {p!r}")
    return p


def log_likelihood_ratio(sample: ExceedanceSample, model: LanModel, theta: float) -> float:
    """General-path log-likelihood ratio of the exceedance point process.

    Needs the exceedance positions; use :func:`gpp_log_likelihood_ratio`
    when the model is an exact GPP and only the count was kept.
    """
    theta = validate_theta(theta)
    p1 = _check_prob(float(model.survival(theta)), "P_theta(X > c)")
    p0 = _check_prob(float(model.survival(model.theta0)), "P_theta0(X > c)")
    if sample.positions is None:
        raise DomainError("general-path likelihood needs the exceedance positions")
    point_terms = 0.0
    if sample.count:
        ratios = np.asarray(model.density_ratio(sample.positions, theta), dtype=float)
        point_terms = float(np.sum(np.log(ratios * (p0 / p1))))
    tau = sample.count
    return (
        point_terms
        + tau * math.log(p1 / p0)
        + (sample.n - tau) * math.log((1.0 - p1) / (1.0 - p0))
    )


def gpp_log_likelihood_ratio(count: int, n: int, c: float, theta: float, theta0: float) -> float:
    """Closed form for the exact GPP: the per-point terms cancel."""
    theta = validate_theta(theta)
    theta0 = validate_theta(theta0)
    c_abs = abs(float(c))
    _check_prob(c_abs * theta, "P_theta(X > c)")
    _check_prob(c_abs * theta0, "P_theta0(X > c)")
    return count * math.log(theta / theta0) + (n - count) * math.log(
        (1.0 - c_abs * theta) / (1.0 - c_abs * theta0)
    )


def central_sequence(sample: ExceedanceSample, theta0: float) -> float:
    """Z_n = (tau - n |c| theta0) / sqrt(n |c|)."""
    theta0 = validate_theta(theta0)
    nc = sample.n * abs(sample.c)
    return (sample.count - nc * theta0) / math.sqrt(nc)


def quadratic_expansion(xi: float, model: LanModel, z_n: float) -> float:
    """The LAN quadratic xi L Z_n - xi^2 L^2 theta0 / 2."""
    lz = model.slope
    return xi * lz * z_n - 0.5 * xi * xi * lz * lz * model.theta0


def local_alternative(theta0: float, xi: float, n: int, c: float) -> float:
    """theta_n(xi) = theta0 + xi / sqrt(n |c|)."""
    return validate_theta(float(theta0) + float(xi) / math.sqrt(n * abs(c)))


@dataclass(frozen=True)
class EfficiencyQuantities:
    """Hajek-LeCam floor and the asymptotic relative efficiency of theta_hat."""

    minimum_variance: float
    are: float


def asymptotic_relative_efficiency(slope: float, theta0: float) -> float:
    """ARE(theta0) = (L * theta0)^2; exactly one when L = 1/theta0."""
    return (slope * theta0) ** 2


def efficiency_summary(model: LanModel) -> EfficiencyQuantities:
    """Minimum variance 1/(L^2 theta0) among regular estimators, and the
    ARE of the standardized count relative to that floor."""
    if model.slope == 0.0:
        raise DomainError("the local slope L must be nonzero")
    return EfficiencyQuantities(
        minimum_variance=1.0 / (model.slope**2 * model.theta0),
        are=asymptotic_relative_efficiency(model.slope, model.theta0),
    )


# --------------------------------------------------------------------------
# Threshold laws
# --------------------------------------------------------------------------


def threshold_sequence(kappa: float, rate_exponent: float, n: int) -> float:
    """c_n = -kappa * n^(-a)."""
    return -float(kappa) * float(n) ** (-float(rate_exponent))


def shrinking_const(kappa: float, rate_exponent: float, delta: float, n: int) -> float:
    """The finite-n value of n |c_n|^(1+2 delta) for the bias formulas."""
    return n * abs(threshold_sequence(kappa, rate_exponent, n)) ** (1.0 + 2.0 * delta)


def validate_threshold_law(
    kappa: float,
    rate_exponent: float,
    *,
    regime: str,
    delta: float | None = None,
    gamma: float | None = None,
    exact_model: bool = False,
) -> None:
    """Check a power law c_n = -kappa n^(-a) against the regime it targets.

    "lan" requires n |c_n|^(1 + 2 min(delta, gamma)) -> 0 alongside
    n |c_n| -> infinity, i.e. a strictly inside
    (1/(1 + 2 min(delta, gamma)), 1); an exact model (GPP, remainder
    identically zero) admits any a in (0, 1).  "bias" targets
    n |c_n|^(1+2 delta) -> const >= 0, which needs a >= 1/(1 + 2 delta).
    Out-of-window plans are rejected, not repaired.
    """
    kappa = float(kappa)
    a = float(rate_exponent)
    if kappa <= 0.0:
        raise ConfigError(f"kappa must be positive, got {kappa!r}")
    if not (0.0 < a < 1.0):
        raise ConfigError(
            f"rate exponent a={a!r} must lie in (0, 1): c_n -> 0 needs a > 0 and "
            "n|c_n| -> infinity needs a < 1"
        )
    if regime == "lan":
        if exact_model:
            return
        if delta is None or gamma is None:
            raise ConfigError("the LAN regime needs delta and gamma for an inexact model")
        order = min(float(delta), float(gamma))
        floor = 1.0 / (1.0 + 2.0 * order)
        if a <= floor:
            raise ConfigError(
                f"rate exponent a={a!r} violates the LAN threshold condition: "
                f"n|c_n|^(1+2*min(delta,gamma)) must tend to 0, which for "
                f"min(delta,gamma)={order!r} needs a > {floor!r}"
            )
        return
    if regime == "bias":
        if delta is None:
            raise ConfigError("the bias regime needs delta")
        floor = 1.0 / (1.0 + 2.0 * float(delta))
        if a < floor:
            raise ConfigError(
                f"rate exponent a={a!r} makes n|c_n|^(1+2*delta) diverge "
                f"(needs a >= {floor!r}); the bias expansion requires it to converge"
            )
        return
    raise ConfigError(f"unknown threshold regime {regime!r}; use 'lan' or 'bias'")
