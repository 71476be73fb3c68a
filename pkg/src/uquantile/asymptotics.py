"""Normal-limit machinery for subset-quantile estimators.

For a degree-m kernel with value distribution F, the centered estimator
satisfies

    sqrt(n) * (estimate - q_p) * f(q_p) / (m * sqrt(zeta))  ->  N(0, 1),

where ``zeta = P{h(X_1..X_m) <= q_p, h(X_1, X_{m+1}..X_{2m-1}) <= q_p} - p^2``
couples two kernel evaluations through one shared point and ``f`` is the
value density at the population quantile ``q_p``.  Both constants must
be strictly positive; estimators here refuse to build intervals when
their plug-ins are not.

Provided: the plug-in zeta estimator, a Gaussian-kernel density
estimate at the fitted quantile, standard errors and confidence
intervals, relative efficiency versus the mean-type statistic, and
closed-form / quadrature / Monte Carlo oracles for the mean kernels and
the interpoint-distance kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from .distributions import (
    Logistic,
    Normal,
    PointCloud,
    ScalarDistribution,
    TwoPieceUniform,
    Uniform,
)
from .engine import (
    DEFAULT_MATERIALIZATION_CAP,
    QuantileSpec,
    UQuantileEstimate,
    enumerate_kernel_values,
    iter_value_chunks,
    selection_rank,
    subset_count,
    u_quantile,
)
from .kernels import Kernel

__all__ = [
    "AssumptionViolation",
    "DegenerateValues",
    "AsymptoticSummary",
    "OnesidedConstants",
    "EfficiencyInput",
    "ZetaEstimate",
    "zeta_plugin",
    "zeta_plugin_report",
    "density_at_quantile",
    "silverman_bandwidth",
    "asymptotic_summary",
    "onesided_interval",
    "efficiency",
    "HLOracle",
    "oracle_hl",
    "MeanKernelOracle",
    "mean_kernel_oracle",
    "InterpointOracle",
    "oracle_interpoint",
    "InterpointQuantile",
    "interpoint_quantile_mc",
    "DEFAULT_ORACLE_SEED",
]

DEFAULT_ORACLE_SEED = 314159

_QUAD_TOL = 1e-8
_MC_CHUNK = 250_000


class AssumptionViolation(ValueError):
    """A positivity hypothesis of the normal limit fails for this data."""


class DegenerateValues(ValueError):
    """The kernel-value sequence is too degenerate to smooth (zero IQR)."""


@dataclass(frozen=True)
class AsymptoticSummary:
    """Point estimate with its normal-limit standard error and interval.

    ``std_error = m * sqrt(zeta_hat) / (density_hat * sqrt(n))`` and the
    interval is ``point ± z * std_error`` with
    ``z = Phi^{-1}((1 + confidence_level) / 2)``.
    """

    point: float
    zeta_hat: float
    density_hat: float
    std_error: float
    ci_lower: float
    ci_upper: float
    confidence_level: float


@dataclass(frozen=True)
class OnesidedConstants:
    """Distinct one-sided slopes of the value distribution at its quantile.

    Downward deviations of the estimator are governed by
    ``left_derivative``, upward ones by ``right_derivative``; see
    :func:`onesided_interval`.  Both must be strictly positive.
    """

    left_derivative: float
    right_derivative: float

    def __post_init__(self):
        for name in ("left_derivative", "right_derivative"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")


@dataclass(frozen=True)
class EfficiencyInput:
    """Constants entering the relative-efficiency ratio.

    ``zeta1`` is the covariance of two kernel values sharing one point
    (the mean-statistic CLT constant), ``zeta`` the quantile-statistic
    constant, ``density_at_mu`` the value density at the symmetry
    center ``mu``.
    """

    zeta1: float
    zeta: float
    density_at_mu: float
    mu: float

    def __post_init__(self):
        for name in ("zeta1", "zeta", "density_at_mu"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")


@dataclass(frozen=True)
class ZetaEstimate:
    """Plug-in zeta with diagnostics.

    ``value`` is ``mean_i(g1_i^2) - p_hat^2`` where ``g1_i`` is the
    fraction of (m-1)-subsets of the other points that keep the kernel
    value at or below the fitted quantile, and ``p_hat`` the overall
    at-or-below fraction.  ``std_error`` treats the ``g1`` values as an
    i.i.d. sample (delta method for a variance); it ignores their
    O(1/n) estimation noise.  A non-positive ``value`` is legitimate
    output but must not be used for interval construction.
    """

    value: float
    std_error: float
    p_hat: float
    degree: int
    sample_size: int
    subsampled: bool

    @property
    def nonpositive(self) -> bool:
        return not self.value > 0


def zeta_plugin(
    sample,
    kernel: Kernel,
    spec: QuantileSpec,
    *,
    max_subsets: int = 100_000,
    seed: int = 0,
    cap: int = DEFAULT_MATERIALIZATION_CAP,
) -> float:
    """Plug-in zeta at the fitted quantile; see :class:`ZetaEstimate`."""
    return zeta_plugin_report(
        sample, kernel, spec, max_subsets=max_subsets, seed=seed, cap=cap
    ).value


def zeta_plugin_report(
    sample,
    kernel: Kernel,
    spec: QuantileSpec,
    *,
    max_subsets: int = 100_000,
    seed: int = 0,
    cap: int = DEFAULT_MATERIALIZATION_CAP,
    estimate: UQuantileEstimate | None = None,
) -> ZetaEstimate:
    """Estimate zeta from the sample, with a standard error.

    All (m-1)-subsets per conditioning point are enumerated while
    C(n-1, m-1) stays at or below ``max_subsets``; beyond that a
    uniform random subsample of ``max_subsets`` subsets is drawn per
    point from a stream derived from ``(seed, i)``, so results are
    deterministic and independent of evaluation order.
    """
    from .engine import as_sample

    sample = as_sample(sample)
    n = sample.shape[0]
    m = kernel.degree
    if n < 2 * m - 1:
        raise ValueError(f"zeta needs n >= 2m-1 = {2 * m - 1} points, got {n}")
    if estimate is None:
        estimate = u_quantile(sample, kernel, spec, backend="auto", cap=cap)
    threshold = estimate.value

    if m == 1:
        pts = sample[:, np.newaxis] if sample.ndim == 1 else sample[:, np.newaxis, :]
        vals = kernel.evaluate_batch(pts)
        hits = int(np.count_nonzero(vals <= threshold))
        g1 = (vals <= threshold).astype(float)
        p_hat = hits / n
        subsampled = False
    else:
        per_point = subset_count(n - 1, m - 1)
        if per_point <= max_subsets and subset_count(n, m) <= cap:
            counts = np.zeros(n, dtype=float)
            hits = 0
            for idx, vals in iter_value_chunks(sample, kernel):
                w = (vals <= threshold).astype(float)
                hits += int(w.sum())
                for col in range(m):
                    counts += np.bincount(idx[:, col], weights=w, minlength=n)
            g1 = counts / per_point
            p_hat = hits / subset_count(n, m)
            subsampled = False
        else:
            g1, p_hat, subsampled = _g1_by_point(
                sample, kernel, threshold, max_subsets, seed
            )

    zeta = float(np.mean(g1 * g1) - p_hat * p_hat)
    centered = g1 - g1.mean()
    m2 = float(np.mean(centered**2))
    mu4 = float(np.mean(centered**4))
    se = math.sqrt(max(mu4 - m2 * m2, 0.0) / n)
    return ZetaEstimate(
        value=zeta,
        std_error=se,
        p_hat=float(p_hat),
        degree=m,
        sample_size=n,
        subsampled=subsampled,
    )


def _g1_by_point(sample, kernel, threshold, max_subsets, seed):
    """Per-point at-or-below fractions via explicit (m-1)-subsets."""
    n = sample.shape[0]
    m = kernel.degree
    per_point = subset_count(n - 1, m - 1)
    full = per_point <= max_subsets
    if full:
        import itertools

        template = np.array(
            list(itertools.combinations(range(n - 1), m - 1)), dtype=np.intp
        )
    g1 = np.empty(n, dtype=float)
    total_hits = 0
    for i in range(n):
        others = np.concatenate((np.arange(i), np.arange(i + 1, n)))
        if full:
            rows = template
        else:
            rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
            rows = _random_subsets(rng, n - 1, m - 1, max_subsets)
        companions = sample[others[rows]]
        if sample.ndim == 1:
            first = np.full((rows.shape[0], 1), sample[i])
        else:
            first = np.broadcast_to(
                sample[i], (rows.shape[0], 1, sample.shape[1])
            )
        pts = np.concatenate((first, companions), axis=1)
        below = kernel.evaluate_batch(pts) <= threshold
        g1[i] = below.mean()
        total_hits += int(below.sum())
    if full:
        p_hat = total_hits / (n * per_point)
    else:
        p_hat = float(g1.mean())
    return g1, p_hat, not full


def _random_subsets(rng, pool, k, count):
    """Uniform random k-subsets of range(pool), as sorted index rows."""
    rows = rng.integers(0, pool, size=(count, k))
    rows.sort(axis=1)
    bad = np.any(rows[:, 1:] == rows[:, :-1], axis=1)
    while bad.any():
        redraw = rng.integers(0, pool, size=(int(bad.sum()), k))
        redraw.sort(axis=1)
        rows[bad] = redraw
        bad = np.any(rows[:, 1:] == rows[:, :-1], axis=1)
    return rows


def silverman_bandwidth(values: np.ndarray) -> float:
    """Rule-of-thumb bandwidth 0.9 * min(sd, IQR/1.349) * N^(-1/5).

    Raises :class:`DegenerateValues` when the interquartile range is
    zero.  The value sequence is dependent, which biases the rule; it is
    a default, not a recommendation.
    """
    values = np.asarray(values, dtype=float)
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = q75 - q25
    if not iqr > 0:
        raise DegenerateValues("zero interquartile range in the kernel values")
    sd = float(values.std(ddof=1))
    scale = min(sd, iqr / 1.349) if sd > 0 else iqr / 1.349
    return 0.9 * scale * values.size ** (-0.2)


def density_at_quantile(
    sample,
    kernel: Kernel,
    spec: QuantileSpec,
    bandwidth: float | None = None,
    *,
    at: float | None = None,
    cap: int = DEFAULT_MATERIALIZATION_CAP,
    subsample: int = 1_000_000,
    seed: int = 0,
) -> float:
    """Gaussian-kernel density of the value distribution at the quantile.

    Evaluates over all C(n, m) kernel values, or over a seeded uniform
    subsample of ``subsample`` index tuples once the full set would
    exceed ``cap``.  ``bandwidth`` overrides Silverman's rule; pass
    ``at`` to reuse an already-computed quantile.
    """
    from .engine import as_sample

    sample = as_sample(sample)
    values, _ = _value_sample(sample, kernel, cap, subsample, seed)
    if at is None:
        at = u_quantile(sample, kernel, spec, backend="auto", cap=cap).value
    if bandwidth is None:
        bandwidth = silverman_bandwidth(values)
    elif not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth!r}")
    u = (at - values) / bandwidth
    return float(np.mean(np.exp(-0.5 * u * u)) / (bandwidth * math.sqrt(2.0 * math.pi)))


def _value_sample(sample, kernel, cap, subsample, seed):
    """Kernel values: all of them, or a seeded subsample above the cap."""
    n = sample.shape[0]
    m = kernel.degree
    total = subset_count(n, m)
    if total <= cap:
        return enumerate_kernel_values(sample, kernel, cap=cap), False
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, m]))
    rows = _random_subsets(rng, n, m, subsample)
    return kernel.evaluate_batch(sample[rows]), True


def asymptotic_summary(
    sample,
    kernel: Kernel,
    spec: QuantileSpec,
    confidence_level: float = 0.95,
    *,
    bandwidth: float | None = None,
    max_subsets: int = 100_000,
    seed: int = 0,
    cap: int = DEFAULT_MATERIALIZATION_CAP,
) -> AsymptoticSummary:
    """Point estimate, plug-in standard error, and confidence interval.

    Refuses (:class:`AssumptionViolation`) when the plug-in zeta or the
    density estimate is not strictly positive, naming the violated
    positivity hypothesis; those are preconditions of the normal limit,
    not recoverable numerics.
    """
    from .engine import as_sample

    sample = as_sample(sample)
    if not 0.0 <= confidence_level < 1.0:
        raise ValueError(
            f"confidence level must lie in [0, 1), got {confidence_level!r}"
        )
    est = u_quantile(sample, kernel, spec, backend="auto", cap=cap)
    zr = zeta_plugin_report(
        sample, kernel, spec, max_subsets=max_subsets, seed=seed, cap=cap,
        estimate=est,
    )
    if zr.nonpositive:
        raise AssumptionViolation(
            f"plug-in zeta is {zr.value:.6g}; interval construction requires "
            "zeta > 0"
        )
    density = density_at_quantile(
        sample, kernel, spec, bandwidth, at=est.value, cap=cap, seed=seed
    )
    if not density > 0:
        raise AssumptionViolation(
            f"density estimate at the quantile is {density:.6g}; interval "
            "construction requires a positive slope F'(q_p) > 0"
        )
    n = sample.shape[0]
    se = kernel.degree * math.sqrt(zr.value) / (density * math.sqrt(n))
    z = float(ndtri(0.5 * (1.0 + confidence_level)))
    return AsymptoticSummary(
        point=est.value,
        zeta_hat=zr.value,
        density_hat=density,
        std_error=se,
        ci_lower=est.value - z * se,
        ci_upper=est.value + z * se,
        confidence_level=confidence_level,
    )


def onesided_interval(
    point: float,
    degree: int,
    zeta: float,
    n: int,
    constants: OnesidedConstants,
    confidence_level: float,
) -> tuple[float, float]:
    """Asymmetric interval from user-supplied one-sided slopes.

    Upward deviations of the estimator scale with the right slope, so
    the lower endpoint uses ``right_derivative``; symmetrically the
    upper endpoint uses ``left_derivative``.
    """
    if not zeta > 0:
        raise AssumptionViolation(f"zeta must be positive, got {zeta!r}")
    if not 0.0 <= confidence_level < 1.0:
        raise ValueError(f"confidence level must lie in [0, 1), got {confidence_level!r}")
    z = float(ndtri(0.5 * (1.0 + confidence_level)))
    base = degree * math.sqrt(zeta) / math.sqrt(n)
    return (
        point - z * base / constants.right_derivative,
        point + z * base / constants.left_derivative,
    )


def efficiency(inp: EfficiencyInput) -> float:
    """Relative efficiency of the quantile statistic versus the mean statistic.

    Ratio of asymptotic variances, ``density_at_mu^2 * zeta1 / zeta``;
    values below 1 mean the quantile form is less efficient at the
    model where both target ``mu``.
    """
    return inp.density_at_mu**2 * inp.zeta1 / inp.zeta


# ---------------------------------------------------------------------------
# Closed-form / quadrature oracles for the mean kernels


@dataclass(frozen=True)
class HLOracle:
    """Constants for the pairwise-average kernel at the median.

    ``zeta`` is distribution-free (1/12), ``density_at_center`` equals
    twice the squared-density integral of the data law, and ``sigma2``
    is the asymptotic variance of sqrt(n) times the centered estimator.
    """

    zeta: float
    density_at_center: float
    sigma2: float
    center: float
    sq_density_integral: float


def oracle_hl(dist) -> HLOracle:
    """Median-of-pairwise-averages constants for a symmetric scalar law.

    Supports normal, uniform, and logistic inputs (instances or names).
    The squared-density integral is computed by adaptive quadrature to
    relative tolerance 1e-8.
    """
    dist = _as_scalar_dist(dist)
    if not isinstance(dist, (Normal, Uniform, Logistic)):
        raise ValueError(
            f"unsupported distribution {dist!r}; oracle_hl covers normal, "
            "uniform, and logistic"
        )
    lo, hi = dist.support()
    integral, _ = quad(lambda x: float(dist.pdf(x)) ** 2, lo, hi, epsrel=_QUAD_TOL)
    zeta = 1.0 / 12.0
    density = 2.0 * integral
    sigma2 = 1.0 / (12.0 * integral * integral)
    return HLOracle(
        zeta=zeta,
        density_at_center=density,
        sigma2=sigma2,
        center=float(dist.center),
        sq_density_integral=float(integral),
    )


@dataclass(frozen=True)
class MeanKernelOracle:
    """Population constants for the degree-m mean kernel at level p."""

    quantile: float
    zeta: float
    density: float
    sigma2: float
    degree: int
    p: float


def mean_kernel_oracle(dist, m: int, p: float = 0.5) -> MeanKernelOracle:
    """Exact constants for the mean kernel of degree m on a scalar law.

    The value distribution is that of the average of m draws.  Normal
    and uniform inputs work for every m >= 1 (normal sums are normal;
    uniform sums use the piecewise-polynomial convolution); any other
    scalar family is supported for m <= 2 via one-dimensional
    quadrature of the convolution.
    """
    dist = _as_scalar_dist(dist)
    if m < 1:
        raise ValueError("degree must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    if m == 1:
        q = float(dist.ppf(p))
        density = float(dist.pdf(q))
        zeta = p * (1.0 - p)
    elif isinstance(dist, Normal):
        q = dist.mu + dist.sigma * float(ndtri(p)) / math.sqrt(m)
        density = math.sqrt(m) / (dist.sigma * math.sqrt(2.0 * math.pi)) * math.exp(
            -0.5 * m * ((q - dist.mu) / dist.sigma) ** 2
        )
        s = dist.sigma * math.sqrt(m - 1)
        inner = lambda x: float(ndtr((m * q - x - (m - 1) * dist.mu) / s))
        zeta = _zeta_quad(dist, inner, p)
    elif isinstance(dist, Uniform):
        width = dist.b - dist.a
        s = brentq(lambda t: _irwin_hall_cdf(t, m) - p, 0.0, float(m), xtol=1e-13)
        q = dist.a + width * s / m
        density = m * _irwin_hall_pdf(s, m) / width
        inner = lambda x: _irwin_hall_cdf(
            (m * q - x - (m - 1) * dist.a) / width, m - 1
        )
        zeta = _zeta_quad(dist, inner, p)
    elif m == 2:
        q = _pair_mean_quantile(dist, p)
        density = _pair_mean_density(dist, q)
        inner = lambda x: float(dist.cdf(2.0 * q - x))
        zeta = _zeta_quad(dist, inner, p)
    else:
        raise ValueError(
            f"mean-kernel oracle supports m > 2 only for normal and uniform "
            f"laws, got {dist!r} with m={m}"
        )
    if not density > 0:
        raise AssumptionViolation("value density at the quantile is not positive")
    sigma2 = m * m * zeta / (density * density)
    return MeanKernelOracle(
        quantile=float(q), zeta=float(zeta), density=float(density),
        sigma2=float(sigma2), degree=m, p=p,
    )


def _zeta_quad(dist, inner_cdf, p):
    """zeta = integral of inner_cdf(x)^2 dG(x) - p^2 by adaptive quadrature."""
    lo, hi = dist.support()
    val, _ = quad(
        lambda x: inner_cdf(x) ** 2 * float(dist.pdf(x)), lo, hi,
        epsrel=_QUAD_TOL, limit=200,
    )
    return val - p * p


def _pair_mean_cdf(dist, v):
    lo, hi = dist.support()
    val, _ = quad(
        lambda x: float(dist.cdf(2.0 * v - x)) * float(dist.pdf(x)), lo, hi,
        epsrel=_QUAD_TOL, limit=200,
    )
    return val


def _pair_mean_density(dist, v):
    lo, hi = dist.support()
    val, _ = quad(
        lambda x: 2.0 * float(dist.pdf(2.0 * v - x)) * float(dist.pdf(x)), lo, hi,
        epsrel=_QUAD_TOL, limit=200,
    )
    return val


def _pair_mean_quantile(dist, p):
    lo = float(dist.ppf(min(p, 1e-9)))
    hi = float(dist.ppf(max(p, 1.0 - 1e-9)))
    width = max(hi - lo, 1.0)
    while _pair_mean_cdf(dist, lo) > p:
        lo -= width
    while _pair_mean_cdf(dist, hi) < p:
        hi += width
    return brentq(lambda v: _pair_mean_cdf(dist, v) - p, lo, hi, xtol=1e-12)


def _irwin_hall_cdf(x: float, k: int) -> float:
    """Distribution function of the sum of k independent U(0,1)."""
    if k == 0:
        return 1.0 if x >= 0 else 0.0
    if x <= 0:
        return 0.0
    if x >= k:
        return 1.0
    total = 0.0
    for j in range(int(math.floor(x)) + 1):
        total += (-1.0) ** j * math.comb(k, j) * (x - j) ** k
    return total / math.factorial(k)


def _irwin_hall_pdf(x: float, k: int) -> float:
    if x <= 0 or x >= k:
        return 0.0
    total = 0.0
    for j in range(int(math.floor(x)) + 1):
        total += (-1.0) ** j * math.comb(k, j) * (x - j) ** (k - 1)
    return total / math.factorial(k - 1)


def _as_scalar_dist(dist) -> ScalarDistribution:
    if isinstance(dist, str):
        from .distributions import parse_distribution

        dist = parse_distribution(dist)
    if not isinstance(dist, ScalarDistribution):
        raise ValueError(f"expected a scalar distribution, got {dist!r}")
    return dist


# ---------------------------------------------------------------------------
# Monte Carlo oracles for the interpoint-distance kernel


@dataclass(frozen=True)
class InterpointOracle:
    """Monte Carlo constants for the distance kernel at threshold theta.

    ``zeta`` is the shared-point double-ball probability minus p^2, with
    a standard error combining the binomial error and, when
    ``theta_se`` was supplied, the sensitivity of the ball probability
    to the threshold.  ``density`` estimates the distance density at
    theta from a shell count of half-width ``shell_halfwidth``.
    """

    zeta: float
    zeta_se: float
    density: float
    density_se: float
    ball_prob: float
    ball_prob_se: float
    theta: float
    p: float
    shell_halfwidth: float
    budget: int


def oracle_interpoint(
    cloud: PointCloud,
    theta: float,
    *,
    p: float = 0.5,
    budget: int = 1_000_000,
    seed: int = DEFAULT_ORACLE_SEED,
    shell_halfwidth: float | None = None,
    theta_se: float = 0.0,
    norm: str = "euclidean",
) -> InterpointOracle:
    """Monte Carlo quadrature of the distance-kernel constants.

    Draws ``budget`` point triples (x, y, z); the double-ball indicator
    ``{|y-x| <= theta, |z-x| <= theta}`` integrates the squared ball
    probability (giving zeta about level ``p``), and a shell count on
    ``|y-x|`` integrates the distance density at ``theta``.
    """
    if not (isinstance(cloud, PointCloud)):
        raise ValueError(f"expected a point-cloud distribution, got {cloud!r}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta!r}")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    eps = shell_halfwidth if shell_halfwidth is not None else 0.005 * theta
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    both = ball = shell = cross = 0
    remaining = budget
    while remaining > 0:
        c = min(_MC_CHUNK, remaining)
        x = cloud.sample(rng, c)
        y = cloud.sample(rng, c)
        z = cloud.sample(rng, c)
        d1 = _norm_dist(y - x, norm)
        d2 = _norm_dist(z - x, norm)
        b1 = d1 <= theta
        b2 = d2 <= theta
        s1 = (d1 > theta - eps) & (d1 <= theta + eps)
        both += int(np.count_nonzero(b1 & b2))
        ball += int(np.count_nonzero(b1))
        shell += int(np.count_nonzero(s1))
        cross += int(np.count_nonzero(b2 & s1))
        remaining -= c
    p_both = both / budget
    p_ball = ball / budget
    p_shell = shell / budget
    zeta = p_both - p * p
    binom = math.sqrt(p_both * (1.0 - p_both) / budget)
    sensitivity = 2.0 * (cross / budget) / (2.0 * eps)
    zeta_se = math.hypot(binom, sensitivity * theta_se)
    density = p_shell / (2.0 * eps)
    density_se = math.sqrt(p_shell * (1.0 - p_shell) / budget) / (2.0 * eps)
    ball_se = math.sqrt(p_ball * (1.0 - p_ball) / budget)
    return InterpointOracle(
        zeta=zeta,
        zeta_se=zeta_se,
        density=density,
        density_se=density_se,
        ball_prob=p_ball,
        ball_prob_se=ball_se,
        theta=theta,
        p=p,
        shell_halfwidth=eps,
        budget=budget,
    )


@dataclass(frozen=True)
class InterpointQuantile:
    """Monte Carlo p-quantile of the interpoint distance, with precision."""

    value: float
    std_error: float
    density: float
    density_se: float
    p: float
    budget: int


def interpoint_quantile_mc(
    cloud: PointCloud,
    p: float = 0.5,
    *,
    budget: int = 10_000_000,
    seed: int = DEFAULT_ORACLE_SEED,
    norm: str = "euclidean",
) -> InterpointQuantile:
    """Quantile of ``|y - x|`` between two independent cloud draws.

    The standard error combines the binomial quantile error with a
    shell-count density estimate at the quantile.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    dists = np.empty(budget, dtype=float)
    pos = 0
    while pos < budget:
        c = min(_MC_CHUNK, budget - pos)
        x = cloud.sample(rng, c)
        y = cloud.sample(rng, c)
        dists[pos : pos + c] = _norm_dist(y - x, norm)
        pos += c
    k = selection_rank(p, budget)
    theta = float(np.partition(dists, k - 1)[k - 1])
    eps = 0.005 * theta
    p_shell = np.count_nonzero((dists > theta - eps) & (dists <= theta + eps)) / budget
    density = p_shell / (2.0 * eps)
    density_se = math.sqrt(p_shell * (1.0 - p_shell) / budget) / (2.0 * eps)
    se = math.sqrt(p * (1.0 - p) / budget) / density if density > 0 else math.inf
    return InterpointQuantile(
        value=theta, std_error=se, density=density, density_se=density_se,
        p=p, budget=budget,
    )


def _norm_dist(diff: np.ndarray, norm: str) -> np.ndarray:
    """Row norms matching the distance kernel's arithmetic (abs in 1-d)."""
    if diff.ndim == 1 or diff.shape[1] == 1:
        return np.abs(diff).reshape(-1)
    if norm == "euclidean":
        return np.sqrt((diff * diff).sum(axis=1))
    if norm == "manhattan":
        return np.abs(diff).sum(axis=1)
    if norm == "chebyshev":
        return np.abs(diff).max(axis=1)
    raise ValueError(f"unknown norm {norm!r}")
