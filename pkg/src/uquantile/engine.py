"""Sample quantiles of kernel values over all m-subsets.

Given a sample of n points and a degree-m kernel, the estimator is the
k-th smallest of the C(n, m) kernel values, k = ceil(p * C(n, m)); this
is the ``inf{x : F_N(x) >= p}`` convention, so for p = 1/2 and an even
value count it returns the lower middle value, not the midpoint average.

Two backends are provided.  The exact backend materializes every value
(subject to a cap) and selects by partitioning.  The fast backend works
for degree-2 kernels on scalars whose threshold counts can be answered
on sorted data ("sum" and "absdiff" kernels); it binary-searches the
value domain with :func:`count_leq` and returns a realized kernel value,
matching the exact backend bit for bit.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .kernels import Kernel

__all__ = [
    "DEFAULT_MATERIALIZATION_CAP",
    "MaterializationLimitError",
    "QuantileSpec",
    "UQuantileEstimate",
    "as_sample",
    "subset_count",
    "selection_rank",
    "iter_value_chunks",
    "enumerate_kernel_values",
    "count_leq",
    "u_quantile",
    "u_quantile_fast_pairsum",
]

DEFAULT_MATERIALIZATION_CAP = 50_000_000

_CHUNK = 1 << 18


class MaterializationLimitError(RuntimeError):
    """The full value vector would exceed the materialization cap.

    Callers catching this should switch to the fast backend (or reduce
    the problem); the exact backend refuses rather than thrash memory.
    """


@dataclass(frozen=True)
class QuantileSpec:
    """Quantile level p, strictly inside (0, 1).

    The endpoints are the extreme-value regime with a different limit
    theory and are rejected.
    """

    p: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and 0.0 < self.p < 1.0):
            raise ValueError(f"quantile level must satisfy 0 < p < 1, got {self.p!r}")


@dataclass(frozen=True)
class UQuantileEstimate:
    """Selected kernel-value order statistic plus bookkeeping.

    ``value`` is the ``selected_rank``-th smallest of the
    ``total_count`` kernel values; ``tie_count`` is how many values
    equal it exactly.
    """

    value: float
    total_count: int
    selected_rank: int
    tie_count: int


def as_sample(data) -> np.ndarray:
    """Normalize input to a float sample array.

    Returns shape ``(n,)`` for scalar data (single-column input is
    squeezed) or ``(n, d)`` for d >= 2.  Rejects non-finite entries.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim not in (1, 2) or arr.shape[0] == 0:
        raise ValueError(f"sample must be a nonempty (n,) or (n, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sample contains non-finite entries")
    return arr


def subset_count(n: int, m: int) -> int:
    """C(n, m), validating n >= m >= 1."""
    if m < 1:
        raise ValueError(f"kernel degree must be positive, got {m}")
    if n < m:
        raise ValueError(f"need at least m={m} sample points, got n={n}")
    return math.comb(n, m)


def selection_rank(p: float, total: int) -> int:
    """Rank k = ceil(p * total), computed exactly.

    ``p`` is taken at its IEEE-754 value and the product is evaluated in
    exact rational arithmetic, so the rank never drifts by one through
    float rounding of ``p * total``.
    """
    k = math.ceil(Fraction(p) * total)
    return max(1, min(int(k), total))


def _dim_check(sample: np.ndarray, kernel: Kernel) -> None:
    d = 1 if sample.ndim == 1 else sample.shape[1]
    if kernel.point_dim is not None and d != kernel.point_dim:
        raise ValueError(
            f"kernel {kernel.name!r} requires points of dimension "
            f"{kernel.point_dim}, sample has dimension {d}"
        )


def iter_value_chunks(
    sample: np.ndarray, kernel: Kernel, chunk_size: int = _CHUNK
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(index_tuples, values)`` blocks in lexicographic order.

    ``index_tuples`` has shape ``(B, m)`` with strictly increasing rows;
    ``values`` the corresponding kernel values.  Nothing beyond one
    block is held in memory, so callers can stream counts or moments
    over value sets too large to materialize.
    """
    sample = as_sample(sample)
    _dim_check(sample, kernel)
    n = sample.shape[0]
    m = kernel.degree
    subset_count(n, m)
    if m == 2:
        if math.comb(n, 2) <= chunk_size:
            ii, jj = np.triu_indices(n, 1)
            pts = np.stack((sample[ii], sample[jj]), axis=1)
            yield np.stack((ii, jj), axis=1), kernel.evaluate_batch(pts)
            return
        pending_i, pending_j, size = [], [], 0
        for i in range(n - 1):
            pending_i.append(np.full(n - 1 - i, i, dtype=np.intp))
            pending_j.append(np.arange(i + 1, n, dtype=np.intp))
            size += n - 1 - i
            if size >= chunk_size or i == n - 2:
                ii = np.concatenate(pending_i)
                jj = np.concatenate(pending_j)
                pts = np.stack((sample[ii], sample[jj]), axis=1)
                yield np.stack((ii, jj), axis=1), kernel.evaluate_batch(pts)
                pending_i, pending_j, size = [], [], 0
        return
    combos = itertools.combinations(range(n), m)
    while True:
        block = list(itertools.islice(combos, chunk_size))
        if not block:
            return
        idx = np.array(block, dtype=np.intp)
        yield idx, kernel.evaluate_batch(sample[idx])


def enumerate_kernel_values(
    sample, kernel: Kernel, cap: int = DEFAULT_MATERIALIZATION_CAP
) -> np.ndarray:
    """All C(n, m) kernel values, one per increasing index tuple.

    Values appear in lexicographic tuple order.  Raises
    :class:`MaterializationLimitError` when C(n, m) exceeds ``cap``.
    """
    sample = as_sample(sample)
    _dim_check(sample, kernel)
    total = subset_count(sample.shape[0], kernel.degree)
    if total > cap:
        raise MaterializationLimitError(
            f"C(n, m) = {total} exceeds the materialization cap {cap}; "
            "use the fast backend or raise the cap"
        )
    out = np.empty(total, dtype=float)
    pos = 0
    for _, vals in iter_value_chunks(sample, kernel):
        out[pos : pos + vals.shape[0]] = vals
        pos += vals.shape[0]
    return out


def count_leq(sample, kernel: Kernel, threshold: float) -> int:
    """Number of index tuples whose kernel value is <= threshold.

    Comparison is plain ``<=`` on doubles.  For degree-2 "sum" and
    "absdiff" kernels on scalars the count is answered in O(n log n) on
    the sorted sample with the kernel's own arithmetic; other kernels
    are counted by streaming enumeration.
    """
    sample = as_sample(sample)
    _dim_check(sample, kernel)
    subset_count(sample.shape[0], kernel.degree)
    if _has_fast_path(sample, kernel):
        xs = np.sort(sample).tolist()
        return _count_pairs(xs, kernel.pair_count_mode, float(threshold), strict=False)
    total = 0
    for _, vals in iter_value_chunks(sample, kernel):
        total += int(np.count_nonzero(vals <= threshold))
    return total


def _has_fast_path(sample: np.ndarray, kernel: Kernel) -> bool:
    return (
        kernel.degree == 2
        and kernel.pair_count_mode in ("sum", "absdiff")
        and sample.ndim == 1
    )


def _count_pairs(xs: list, mode: str, t: float, strict: bool) -> int:
    """Count sorted-scalar pairs with kernel value <= t (or < t).

    The predicates reproduce the kernel arithmetic exactly:
    ``(a + b) / 2`` for "sum", ``abs(b - a)`` for "absdiff"; both are
    monotone in each argument, which the pointer sweeps rely on.
    """
    n = len(xs)
    count = 0
    if mode == "sum":
        lo, hi = 0, n - 1
        while lo < hi:
            v = (xs[lo] + xs[hi]) / 2.0
            if (v < t) if strict else (v <= t):
                count += hi - lo
                lo += 1
            else:
                hi -= 1
        return count
    i = 0
    for j in range(1, n):
        while i < j:
            v = abs(xs[j] - xs[i])
            if (v < t) if strict else (v <= t):
                break
            i += 1
        count += j - i
    return count


def _float_key(x: float) -> int:
    """Order-preserving map from finite doubles to integers."""
    (u,) = struct.unpack("<q", struct.pack("<d", x))
    return u if u >= 0 else (-(1 << 63)) - u - 1


def _key_float(k: int) -> float:
    u = k if k >= 0 else (-(1 << 63)) - k - 1
    (x,) = struct.unpack("<d", struct.pack("<q", u))
    return x


def u_quantile_fast_pairsum(
    sample, spec: QuantileSpec, kernel: Kernel | None = None
) -> UQuantileEstimate:
    """Quantile of all pairwise values without materializing them.

    Works for the pairwise-average kernel (default) and 1-d distance
    kernels.  Binary-searches the double representation of the value
    domain with :func:`count_leq`-style counts, so the returned value is
    always a realized pairwise value and agrees with the exact backend
    bit for bit.  Expected cost O(n log n) per count over ~64 counts.
    """
    if kernel is None:
        from .kernels import WalshAverage

        kernel = WalshAverage()
    sample = as_sample(sample)
    _dim_check(sample, kernel)
    if not _has_fast_path(sample, kernel):
        raise ValueError(f"kernel {kernel.name!r} has no fast selection path")
    n = sample.shape[0]
    total = subset_count(n, 2)
    k = selection_rank(spec.p, total)
    xs = np.sort(sample).tolist()
    mode = kernel.pair_count_mode
    if mode == "sum":
        vmin = (xs[0] + xs[1]) / 2.0
        vmax = (xs[-2] + xs[-1]) / 2.0
    else:
        vmin = min(abs(xs[i + 1] - xs[i]) for i in range(n - 1))
        vmax = abs(xs[-1] - xs[0])
    if _count_pairs(xs, mode, vmin, strict=False) >= k:
        value = vmin
    else:
        lo, hi = _float_key(vmin), _float_key(vmax)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _count_pairs(xs, mode, _key_float(mid), strict=False) >= k:
                hi = mid
            else:
                lo = mid
        value = _key_float(hi)
    ties = _count_pairs(xs, mode, value, strict=False) - _count_pairs(
        xs, mode, value, strict=True
    )
    return UQuantileEstimate(value=value, total_count=total, selected_rank=k, tie_count=ties)


def u_quantile(
    sample,
    kernel: Kernel,
    spec: QuantileSpec,
    backend: str = "auto",
    cap: int = DEFAULT_MATERIALIZATION_CAP,
) -> UQuantileEstimate:
    """The p-quantile of the kernel values over all m-subsets.

    ``backend`` is one of ``"exact"`` (enumerate and partition),
    ``"fast"`` (pairwise selection, degree-2 scalar kernels only), or
    ``"auto"`` (exact while the values fit under ``cap``, else fast when
    available).  The returned estimate is backend-independent.
    """
    sample = as_sample(sample)
    _dim_check(sample, kernel)
    total = subset_count(sample.shape[0], kernel.degree)
    if backend not in ("auto", "exact", "fast"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "auto":
        if total <= cap:
            backend = "exact"
        elif _has_fast_path(sample, kernel):
            backend = "fast"
        else:
            raise MaterializationLimitError(
                f"C(n, m) = {total} exceeds the cap {cap} and kernel "
                f"{kernel.name!r} has no fast path"
            )
    if backend == "fast":
        return u_quantile_fast_pairsum(sample, spec, kernel)
    values = enumerate_kernel_values(sample, kernel, cap=cap)
    k = selection_rank(spec.p, total)
    part = np.partition(values, k - 1)
    value = float(part[k - 1])
    ties = int(np.count_nonzero(values == value))
    return UQuantileEstimate(value=value, total_count=total, selected_rank=k, tie_count=ties)
