"""Simulation of standard generalized Pareto processes and their
delta-neighborhoods, with exact survival oracles.

A path of the standard GPP is V_t = max(-U/Z_t, M) with U uniform on (0,1)
independent of the generator Z; the lower cutoff M < 0 only caps the paths
where Z vanishes and, under the threshold validity bound
|c| * sup|f| <= min(|M|, 1/m), never interferes with exceedance events.
Replacing U by a positive Y whose df satisfies H(u) = u + A u^(1+delta) +
o(u^(1+delta)) near zero puts X = max(-Y/Z_t, M) in a delta-neighborhood of
the GPP, with first-order survival correction governed by the ratio
functional computed in :func:`bias_coefficient`.

Exceedance events above |c| f reduce to Y < |c| * inf_t(|f(t)| Z_t), so the
streaming scanner works path-by-path without materializing path matrices;
batch construction and the scanner share one chunked draw discipline and are
therefore exactly (bitwise) consistent on a common seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .dnorm import DEFAULT_GRID_SIZE, GridFunction, inf_functional
from .errors import DomainError, ThresholdValidityError
from .generator import GeneratorSpec, generator_extremes, generator_paths
from .kernels import SmoothingKernel, validate_beta

DRAW_CHUNK = 65_536
_PATH_ROWS = 4096
DEFAULT_LOWER_CAP = -10.0


# --------------------------------------------------------------------------
# Y distributions (the df H of the neighborhood construction)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class YDistribution:
    """Distribution of the positive variable Y replacing the uniform U.

    ``bias_amplitude`` and ``expansion_order`` are the constants (A, delta)
    of the near-zero expansion H(u) = u + A u^(1+delta) + o(u^(1+delta)).
    The expansion family is exact up to ``u_knee`` and continues linearly to
    one, keeping H a strictly increasing continuous df.
    """

    name: str
    bias_amplitude: float
    expansion_order: float
    u_knee: float = 0.0

    def cdf(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.name == "uniform":
            return np.clip(u, 0.0, 1.0)
        if self.name == "exponential":
            return -np.expm1(-np.maximum(u, 0.0))
        a, d, u0 = self.bias_amplitude, self.expansion_order, self.u_knee
        h0 = u0 + a * u0 ** (1.0 + d)
        slope = 1.0 + a * (1.0 + d) * u0**d
        head = u + a * np.maximum(u, 0.0) ** (1.0 + d)
        tail = h0 + slope * (u - u0)
        return np.clip(np.where(u <= u0, head, tail), 0.0, 1.0)

    def quantile_from_uniform(self, q) -> np.ndarray:
        """Vectorized H^{-1}; the uniform family is the identity, so GPP
        sampling and uniform-Y neighborhood sampling coincide exactly."""
        q = np.asarray(q, dtype=float)
        if self.name == "uniform":
            return q
        if self.name == "exponential":
            return -np.log1p(-q)
        a, d, u0 = self.bias_amplitude, self.expansion_order, self.u_knee
        h0 = u0 + a * u0 ** (1.0 + d)
        slope = 1.0 + a * (1.0 + d) * u0**d
        out = u0 + (q - h0) / slope
        head = q <= h0
        if np.any(head):
            lo = np.zeros(int(head.sum()))
            hi = np.full(int(head.sum()), u0)
            target = q[head]
            for _ in range(80):  # bisection to ~u0 * 2^-80
                mid = 0.5 * (lo + hi)
                below = mid + a * mid ** (1.0 + d) < target
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
            out = np.array(out, copy=True)
            out[head] = 0.5 * (lo + hi)
        return out


def uniform_y() -> YDistribution:
    return YDistribution(name="uniform", bias_amplitude=0.0, expansion_order=1.0)


def exponential_y() -> YDistribution:
    """Standard exponential Y: H(u) = 1 - exp(-u), so A = -1/2, delta = 1."""
    return YDistribution(name="exponential", bias_amplitude=-0.5, expansion_order=1.0)


def expansion_y(bias_amplitude: float, expansion_order: float, u_knee: float | None = None) -> YDistribution:
    """Exact expansion family H(u) = u + A u^(1+delta) up to a knee.

    The knee keeps H strictly increasing (needs 1 + A(1+delta) u^delta > 0)
    and bounded by one; the default sits at half the critical value with a
    cap at 1/2.
    """
    a = float(bias_amplitude)
    d = float(expansion_order)
    if d <= 0.0:
        raise DomainError(f"expansion order delta must be positive, got {d!r}")
    if u_knee is None:
        u_knee = 0.5
        if a < 0.0:
            u_knee = min(0.5, 0.5 * (1.0 / (-a * (1.0 + d))) ** (1.0 / d))
        elif a > 0.0:
            while u_knee + a * u_knee ** (1.0 + d) > 0.9:
                u_knee *= 0.5
    u0 = float(u_knee)
    if not (0.0 < u0 < 1.0) or 1.0 + a * (1.0 + d) * u0**d <= 0.0:
        raise DomainError(f"knee {u0!r} does not keep H strictly increasing")
    return YDistribution(name="expansion", bias_amplitude=a, expansion_order=d, u_knee=u0)


def ydist_by_name(name: str, **kwargs) -> YDistribution:
    if name == "uniform":
        return uniform_y()
    if name == "exponential":
        return exponential_y()
    if name == "expansion":
        return expansion_y(**kwargs)
    raise DomainError(f"unknown Y distribution {name!r}")


# --------------------------------------------------------------------------
# Batches of process paths
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProcessBatch:
    """n simulated paths on the grid, every value in [lower_cap, 0]."""

    values: np.ndarray
    lower_cap: float
    provenance: str

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise DomainError("a process batch stores a 2-d array (paths x grid)")
        if np.any(vals > 0.0) or np.any(vals < self.lower_cap):
            raise DomainError("process paths must lie in [lower_cap, 0]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def grid_size(self) -> int:
        return self.values.shape[1] - 1


def _validate_cap(lower_cap: float) -> float:
    lower_cap = float(lower_cap)
    if not (lower_cap < 0.0) or not math.isfinite(lower_cap):
        raise DomainError(f"lower cap M must be a finite negative real, got {lower_cap!r}")
    return lower_cap


def _draw_blocks(
    gen: GeneratorSpec, ydist: YDistribution, n: int, rng: np.random.Generator
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Chunked (S, Y) draws; the fixed block discipline is what makes the
    batch and streaming routes bitwise identical on a shared seed."""
    done = 0
    while done < n:
        k = min(DRAW_CHUNK, n - done)
        s = gen.sample_mixing(rng, k)
        y = ydist.quantile_from_uniform(rng.random(k))
        yield s, y
        done += k


def _paths_from_draws(gen, s, y, lower_cap, grid_size) -> np.ndarray:
    out = np.empty((len(s), grid_size + 1))
    for i in range(0, len(s), _PATH_ROWS):
        z = generator_paths(gen, s[i : i + _PATH_ROWS], grid_size=grid_size)
        with np.errstate(divide="ignore"):
            out[i : i + _PATH_ROWS] = np.maximum(-y[i : i + _PATH_ROWS, None] / z, lower_cap)
    return out


def sample_gpp(
    gen: GeneratorSpec,
    n: int,
    rng: np.random.Generator,
    *,
    lower_cap: float = DEFAULT_LOWER_CAP,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> ProcessBatch:
    """n independent GPP paths V = max(-U/Z, lower_cap) on the grid."""
    return sample_neighborhood(gen, uniform_y(), n, rng, lower_cap=lower_cap, grid_size=grid_size)


def sample_neighborhood(
    gen: GeneratorSpec,
    ydist: YDistribution,
    n: int,
    rng: np.random.Generator,
    *,
    lower_cap: float = DEFAULT_LOWER_CAP,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> ProcessBatch:
    """n independent paths X = max(-Y/Z, lower_cap) with Y ~ H."""
    lower_cap = _validate_cap(lower_cap)
    if n < 1:
        raise DomainError(f"need at least one path, got n={n}")
    rows = [
        _paths_from_draws(gen, s, y, lower_cap, grid_size)
        for s, y in _draw_blocks(gen, ydist, n, rng)
    ]
    tag = "gpp" if ydist.name == "uniform" else f"neighborhood[{ydist.name}]"
    provenance = f"{tag}(kernel={gen.kernel.name}, beta={gen.beta!r}, lower_cap={lower_cap!r})"
    return ProcessBatch(values=np.vstack(rows), lower_cap=lower_cap, provenance=provenance)


# --------------------------------------------------------------------------
# Threshold validity and streaming exceedance scan
# --------------------------------------------------------------------------


def threshold_validity_bound(gen: GeneratorSpec, lower_cap: float) -> float:
    """The bound min(|M|, 1/m) that |c| * sup|f| must not exceed."""
    return min(abs(_validate_cap(lower_cap)), 1.0 / gen.bound)


def check_threshold(c: float, sup_norm: float, gen: GeneratorSpec, lower_cap: float) -> float:
    """Validate a threshold level c < 0 against min(|M|, 1/m); returns |c|."""
    c = float(c)
    if not (c < 0.0) or not math.isfinite(c):
        raise DomainError(f"threshold c must be a finite negative real, got {c!r}")
    bound = threshold_validity_bound(gen, lower_cap)
    if abs(c) * sup_norm > bound:
        raise ThresholdValidityError(
            f"|c| * sup|f| = {abs(c) * sup_norm!r} exceeds the validity bound "
            f"min(|M|, 1/m) = {bound!r} (M={lower_cap!r}, m={gen.bound!r})"
        )
    return abs(c)


def exceedance_scan(
    gen: GeneratorSpec,
    c: float,
    n: int,
    rng: np.random.Generator,
    *,
    ydist: YDistribution | None = None,
    lower_cap: float = DEFAULT_LOWER_CAP,
    grid_size: int = DEFAULT_GRID_SIZE,
    weights: GridFunction | None = None,
    keep_positions: bool = True,
) -> tuple[int, np.ndarray]:
    """Count exceedances above c*f without materializing paths.

    Returns (count, positions); positions are the rescaled outcomes
    sup_t(X_t/c) < 1 of the exceeding paths in sampling order, only
    collected for constant thresholds (``weights`` None) when
    ``keep_positions`` is set.
    """
    ydist = ydist or uniform_y()
    fabs = None
    sup_norm = 1.0
    if weights is not None:
        fabs = np.abs(weights.values)
        sup_norm = weights.sup_norm
        keep_positions = False
    check_threshold(c, sup_norm, gen, lower_cap)
    c = float(c)
    count = 0
    positions: list[np.ndarray] = []
    for s, y in _draw_blocks(gen, ydist, n, rng):
        inf_w = generator_extremes(gen, s, grid_size=grid_size, weights=fabs)[1]
        # same float expressions as the materialized-path route, so counts
        # and positions agree bitwise with batch sampling on a shared seed
        with np.errstate(divide="ignore"):
            path_min = np.maximum(-y / inf_w, lower_cap)
        hit = path_min > c
        count += int(np.count_nonzero(hit))
        if keep_positions:
            positions.append(path_min[hit] / c)
    pos = np.concatenate(positions) if positions else np.empty(0)
    return count, pos


# --------------------------------------------------------------------------
# Exact survival oracle and neighborhood bias functional
# --------------------------------------------------------------------------


def exact_gpp_survival(
    f: GridFunction,
    c: float,
    beta: float,
    kernel: SmoothingKernel,
    *,
    gen: GeneratorSpec | None = None,
    lower_cap: float | None = None,
    settings=None,
) -> float:
    """P(V > c f) = |c| * inf_functional(f, beta): the exact GPP exceedance
    probability above c*f.  For the constant f = -1 this is |c| * theta.

    When a generator spec and lower cap are supplied, the threshold validity
    precondition |c| * sup|f| <= min(|M|, 1/m) is enforced.
    """
    validate_beta(beta)
    c = float(c)
    if c > 0.0:
        raise DomainError(f"threshold c must be nonpositive, got {c!r}")
    if gen is not None and lower_cap is not None and c < 0.0:
        check_threshold(c, f.sup_norm, gen, lower_cap)
    if c == 0.0:
        return 0.0
    return abs(c) * inf_functional(f, beta, kernel, settings)


@dataclass(frozen=True)
class BiasCoefficient:
    """Monte Carlo estimate of A * E(inf(|f|Z)^(1+delta)) / E(inf(|f|Z))."""

    value: float
    standard_error: float
    numerator: float
    denominator: float
    n_mc: int


def bias_coefficient(
    f: GridFunction,
    ydist: YDistribution,
    gen: GeneratorSpec,
    n_mc: int,
    rng: np.random.Generator,
    *,
    grid_size: int | None = None,
) -> BiasCoefficient:
    """First-order survival-bias functional of the delta-neighborhood.

    Zero by convention when the amplitude A vanishes or when f has a zero on
    the grid (the denominator E(inf |f|Z) is then zero).  The standard error
    comes from the delta method for the ratio of sample means.
    """
    if n_mc < 10_000:
        raise DomainError(f"bias coefficient needs n_mc >= 10000, got {n_mc}")
    a = ydist.bias_amplitude
    d = ydist.expansion_order
    fabs = np.abs(f.values)
    if a == 0.0 or np.min(fabs) == 0.0:
        return BiasCoefficient(0.0, 0.0, 0.0, 0.0, n_mc)
    if grid_size is None:
        grid_size = f.grid_size
    weights = None if np.all(fabs == fabs[0]) and fabs[0] == 1.0 else fabs
    sums = np.zeros(5)  # a, b, aa, bb, ab with a = inf^(1+d), b = inf
    done = 0
    while done < n_mc:
        k = min(DRAW_CHUNK, n_mc - done)
        s = gen.sample_mixing(rng, k)
        inf_w = generator_extremes(gen, s, grid_size=grid_size, weights=weights)[1]
        hi = inf_w ** (1.0 + d)
        sums += (hi.sum(), inf_w.sum(), (hi * hi).sum(), (inf_w * inf_w).sum(), (hi * inf_w).sum())
        done += k
    mean_hi, mean_lo = sums[0] / n_mc, sums[1] / n_mc
    if mean_lo == 0.0:
        return BiasCoefficient(0.0, 0.0, float(a * mean_hi), 0.0, n_mc)
    ratio = mean_hi / mean_lo
    var_hi = max(sums[2] / n_mc - mean_hi**2, 0.0)
    var_lo = max(sums[3] / n_mc - mean_lo**2, 0.0)
    cov = sums[4] / n_mc - mean_hi * mean_lo
    var_ratio = (var_hi - 2.0 * ratio * cov + ratio * ratio * var_lo) / (mean_lo * mean_lo)
    se = abs(a) * math.sqrt(max(var_ratio, 0.0) / n_mc)
    return BiasCoefficient(
        value=float(a * ratio),
        standard_error=float(se),
        numerator=float(mean_hi),
        denominator=float(mean_lo),
        n_mc=n_mc,
    )
