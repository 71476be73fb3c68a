import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from uquantile.engine import (
    MaterializationLimitError,
    QuantileSpec,
    UQuantileEstimate,
    count_leq,
    enumerate_kernel_values,
    selection_rank,
    u_quantile,
    u_quantile_fast_pairsum,
)
from uquantile.engine import _count_pairs, _float_key, _key_float
from uquantile.kernels import (
    distance_kernel,
    mwise_mean_kernel,
    walsh_average_kernel,
)

WALSH = walsh_average_kernel()
ABSDIFF = distance_kernel("euclidean")


def brute_pair_values(xs, fn):
    """Independent enumeration oracle: plain python over index pairs."""
    return [fn(xs[i], xs[j]) for i, j in itertools.combinations(range(len(xs)), 2)]


def ordinary_quantile(xs, p):
    """Independent ordinary sample quantile, same ceil(p*N) convention."""
    k = math.ceil(Fraction(p) * len(xs))
    return sorted(xs)[k - 1]


def random_sample(rng, n):
    kind = rng.integers(0, 3)
    if kind == 0:
        return rng.normal(size=n)
    if kind == 1:
        return rng.integers(-5, 6, size=n).astype(float)  # heavy ties
    return rng.uniform(-1, 1, size=n) * 10.0 ** int(rng.integers(-2, 3))


class TestQuantileSpec:
    def test_valid(self):
        assert QuantileSpec(0.5).p == 0.5

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_endpoints_rejected(self, p):
        with pytest.raises(ValueError):
            QuantileSpec(p)


def test_selection_rank_exact():
    # 0.1 * 60 rounds above 6 in floats; the exact-rational rank must match
    # the rank computed from the literal binary value of p.
    for p in (0.1, 0.25, 0.3, 0.5, 0.75, 0.9):
        for total in (1, 3, 10, 60, 1225):
            assert selection_rank(p, total) == math.ceil(Fraction(p) * total)
    assert selection_rank(0.5, 6) == 3
    assert selection_rank(0.5, 1) == 1


class TestEnumerate:
    def test_walsh_three_points(self):
        vals = enumerate_kernel_values([1, 2, 3], WALSH)
        assert vals.tolist() == [1.5, 2.0, 2.5]

    def test_identity_single_point(self):
        assert enumerate_kernel_values([5], mwise_mean_kernel(1)).tolist() == [5]

    def test_distance_lexicographic(self):
        vals = enumerate_kernel_values([0, 1, 2], ABSDIFF)
        assert vals.tolist() == [1, 2, 1]

    def test_degree_three_lexicographic(self):
        xs = [0.0, 1.0, 2.0, 4.0]
        vals = enumerate_kernel_values(xs, mwise_mean_kernel(3))
        expected = [
            (xs[a] + xs[b] + xs[c]) / 3
            for a, b, c in itertools.combinations(range(4), 3)
        ]
        assert vals.tolist() == pytest.approx(expected, abs=0)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            enumerate_kernel_values([1], WALSH)

    def test_cap_exceeded(self):
        with pytest.raises(MaterializationLimitError):
            enumerate_kernel_values(np.arange(100.0), WALSH, cap=1000)


class TestCountLeq:
    def test_examples(self):
        xs = [0, 1, 2]
        assert count_leq(xs, WALSH, 1.75) == 3
        assert count_leq(xs, WALSH, 0.4) == 0
        assert count_leq(xs, WALSH, 2.0) == 3

    def test_threshold_above_max_counts_all(self):
        rng = np.random.default_rng(0)
        xs = rng.normal(size=20)
        assert count_leq(xs, WALSH, np.inf) == 190
        assert count_leq(xs, ABSDIFF, xs.max() - xs.min()) == 190

    @pytest.mark.parametrize("kernel,fn", [
        (WALSH, lambda a, b: (a + b) / 2.0),
        (ABSDIFF, lambda a, b: abs(a - b)),
    ], ids=["sum", "absdiff"])
    def test_fast_count_matches_enumeration(self, kernel, fn):
        rng = np.random.default_rng(42)
        for _ in range(80):
            xs = random_sample(rng, int(rng.integers(2, 40)))
            vals = brute_pair_values(list(map(float, xs)), fn)
            # thresholds at, between, and beyond realized values
            probes = list(rng.choice(vals, size=min(5, len(vals)), replace=False))
            probes += [min(vals) - 1, max(vals) + 1, float(rng.normal())]
            for t in probes:
                expected = sum(v <= t for v in vals)
                assert count_leq(xs, kernel, t) == expected

    def test_strict_variant(self):
        xs = sorted([0.0, 1.0, 1.0, 2.0])
        # pair averages: 0.5, 0.5, 1.0, 1.0, 1.5, 1.5
        assert _count_pairs(xs, "sum", 1.0, strict=False) == 4
        assert _count_pairs(xs, "sum", 1.0, strict=True) == 2


def test_float_key_roundtrip_and_order():
    rng = np.random.default_rng(3)
    xs = list(rng.normal(size=200) * 10 ** rng.integers(-300, 300, size=200).astype(float))
    xs += [0.0, -0.0, 1e-310, -1e-310, 5e300, -5e300]
    for x in xs:
        assert _key_float(_float_key(x)) == x or (x == 0.0 and _key_float(_float_key(x)) == 0.0)
    for _ in range(500):
        a, b = rng.choice(len(xs), size=2, replace=False)
        x, y = xs[a], xs[b]
        if x < y:
            assert _float_key(x) < _float_key(y)
        elif x > y:
            assert _float_key(x) > _float_key(y)


class TestUQuantile:
    def test_walsh_median_three(self):
        est = u_quantile([1, 2, 3], WALSH, QuantileSpec(0.5))
        assert est == UQuantileEstimate(2.0, 3, 2, 1)

    def test_identity_reduces_to_sample_median(self):
        est = u_quantile([3, 1, 4, 1, 5], mwise_mean_kernel(1), QuantileSpec(0.5))
        assert est.value == 3

    def test_even_count_lower_median(self):
        est = u_quantile([0, 1, 2, 3], WALSH, QuantileSpec(0.5))
        assert (est.total_count, est.selected_rank, est.value) == (6, 3, 1.5)
        assert est.tie_count == 2

    def test_backend_fast_requires_fast_kernel(self):
        with pytest.raises(ValueError):
            u_quantile([1, 2, 3], mwise_mean_kernel(3), QuantileSpec(0.5), backend="fast")

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            u_quantile([1, 2, 3], WALSH, QuantileSpec(0.5), backend="magic")

    def test_auto_switches_to_fast_above_cap(self):
        rng = np.random.default_rng(1)
        xs = rng.normal(size=80)
        est = u_quantile(xs, WALSH, QuantileSpec(0.5), cap=100)
        exact = u_quantile(xs, WALSH, QuantileSpec(0.5))
        assert est == exact

    def test_auto_no_path_raises(self):
        rng = np.random.default_rng(1)
        xs = rng.normal(size=(40, 2))
        with pytest.raises(MaterializationLimitError):
            u_quantile(xs, distance_kernel(), QuantileSpec(0.5), cap=10)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        xs = rng.normal(size=30)
        spec = QuantileSpec(0.25)
        base = u_quantile(xs, WALSH, spec).value
        for _ in range(10):
            perm = rng.permutation(xs)
            assert u_quantile(perm, WALSH, spec).value == base

    def test_monotone_in_p(self):
        rng = np.random.default_rng(6)
        xs = rng.normal(size=25)
        ps = [0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95]
        vals = [u_quantile(xs, WALSH, QuantileSpec(p)).value for p in ps]
        assert vals == sorted(vals)

    def test_rank_correctness_randomized(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            xs = random_sample(rng, int(rng.integers(2, 30)))
            p = float(rng.uniform(0.05, 0.95))
            est = u_quantile(xs, WALSH, QuantileSpec(p))
            vals = enumerate_kernel_values(xs, WALSH)
            below = int(np.count_nonzero(vals < est.value))
            at_or_below = int(np.count_nonzero(vals <= est.value))
            assert below < est.selected_rank <= at_or_below
            assert est.tie_count == at_or_below - below


class TestFastBackend:
    def test_matches_exact_on_examples(self):
        est = u_quantile_fast_pairsum([1, 2, 3], QuantileSpec(0.5))
        assert est.value == 2.0

    def test_two_points(self):
        a, b = 0.3, 1.1
        for p in (0.1, 0.5, 0.9):
            est = u_quantile_fast_pairsum([a, b], QuantileSpec(p))
            assert est == UQuantileEstimate((a + b) / 2, 1, 1, 1)

    def test_single_point_rejected(self):
        with pytest.raises(ValueError):
            u_quantile_fast_pairsum([1.0], QuantileSpec(0.5))

    @pytest.mark.parametrize("kernel", [WALSH, ABSDIFF], ids=["walsh", "absdiff"])
    def test_equals_exact_backend_bitwise(self, kernel):
        rng = np.random.default_rng(2024)
        ps = [0.1, 0.25, 0.5, 0.75, 0.9]
        for _ in range(200):
            xs = random_sample(rng, int(rng.integers(2, 61)))
            for p in ps:
                spec = QuantileSpec(p)
                fast = u_quantile(xs, kernel, spec, backend="fast")
                exact = u_quantile(xs, kernel, spec, backend="exact")
                assert fast == exact

    def test_returns_realized_value(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            xs = random_sample(rng, 15)
            est = u_quantile_fast_pairsum(xs, QuantileSpec(float(rng.uniform(0.05, 0.95))))
            vals = set(enumerate_kernel_values(xs, WALSH).tolist())
            assert est.value in vals
