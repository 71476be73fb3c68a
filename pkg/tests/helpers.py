"""Independent oracles shared across test modules.

Everything here is deliberately written from first principles (sorting,
enumeration, quadrature, closed forms) rather than through the package's
own computational paths, so tests compare two genuinely different routes.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def ordinary_quantile(xs, p):
    """Sample p-quantile by sorting, rank ceil(p*N) in exact arithmetic."""
    k = math.ceil(Fraction(p) * len(xs))
    return sorted(xs)[k - 1]


def brute_u_quantile(xs, fn, m, p):
    """Quantile of fn over all m-subsets by full enumeration and sorting."""
    vals = sorted(fn(*combo) for combo in itertools.combinations(xs, m))
    k = math.ceil(Fraction(p) * len(vals))
    return vals[k - 1]


def square_distance_cdf(t):
    """P(|X - Y| <= t) for X, Y uniform on the unit square, t <= 1.

    Closed form pi*t^2 - 8 t^3 / 3 + t^4 / 2; validated against direct
    2-d quadrature in test_asymptotics.
    """
    if t <= 0:
        return 0.0
    if t > 1:
        raise ValueError("closed form implemented for t <= 1 only")
    return math.pi * t * t - 8.0 * t**3 / 3.0 + t**4 / 2.0


def square_distance_pdf(t):
    """Density of the unit-square interpoint distance, t <= 1."""
    if not 0 < t <= 1:
        raise ValueError("density implemented for 0 < t <= 1 only")
    return 2.0 * math.pi * t - 8.0 * t * t + 2.0 * t**3


# Median of the unit-square interpoint distance and the density there,
# from the closed-form CDF (root of square_distance_cdf(t) = 1/2).
SQUARE_MEDIAN = 0.5120032690833339
SQUARE_DENSITY_AT_MEDIAN = 1.388273234972472

# Normal mean-kernel zeta at p = 1/2 has the closed form
# arcsin(1/m) / (2 pi) (orthant probability of the equicorrelated pair).
def normal_mean_kernel_zeta(m):
    return math.asin(1.0 / m) / (2.0 * math.pi)


def ks_statistic_vs(cdf, values):
    """Two-sided Kolmogorov-Smirnov distance of a sample to a given CDF."""
    z = np.sort(np.asarray(values, dtype=float))
    n = z.size
    c = np.array([cdf(v) for v in z])
    upper = np.max(np.arange(1, n + 1) / n - c)
    lower = np.max(c - np.arange(0, n) / n)
    return max(upper, lower)
