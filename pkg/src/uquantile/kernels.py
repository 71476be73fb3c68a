"""Symmetric kernels evaluated on m-subsets of a sample.

A kernel is a symmetric, real-valued function of ``degree`` points in
R^d.  Built-ins cover the pairwise average (``walsh``), the m-wise
arithmetic mean (``mean:<m>``), and the pairwise distance under a named
norm (``dist:<norm>``).  Custom kernels subclass :class:`Kernel` and can
be registered for selection by name.

Built-in kernels are written in an argument-order-insensitive form, so
permuting the inputs reproduces the result bit for bit.  Kernels are
immutable after construction and safe to evaluate concurrently.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Kernel",
    "KernelInputError",
    "WalshAverage",
    "MWiseMean",
    "Distance",
    "NORMS",
    "walsh_average_kernel",
    "mwise_mean_kernel",
    "distance_kernel",
    "register_kernel",
    "kernel_from_name",
]

NORMS = ("euclidean", "manhattan", "chebyshev")


class KernelInputError(ValueError):
    """Points passed to a kernel have the wrong count, shape, or content."""


class Kernel:
    """Base class for symmetric m-variate kernels.

    Attributes
    ----------
    name : str
        Identifier used for reporting and CLI selection.
    degree : int
        Number of points the kernel consumes (m).
    point_dim : int or None
        Required point dimension; ``None`` accepts any d >= 1.
    pair_count_mode : str or None
        Set on degree-2 kernels whose threshold counts the engine can
        answer in O(n log n) on sorted scalars: ``"sum"`` when the value
        is the half-sum ``(x + y) / 2`` and ``"absdiff"`` when it is
        ``|x - y|``.  Must match :meth:`evaluate_batch` exactly.
    """

    name: str = "?"
    degree: int = 0
    point_dim: int | None = None
    pair_count_mode: str | None = None

    def evaluate_batch(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate many argument tuples at once.

        ``pts`` has shape ``(B, degree)`` for scalar points or
        ``(B, degree, d)`` for d-dimensional points; the result has
        shape ``(B,)``.
        """
        raise NotImplementedError

    def evaluate(self, *points) -> float:
        """Evaluate the kernel on ``degree`` points.

        Scalar points are passed as numbers, d-dimensional points as
        length-d sequences.  Delegates to :meth:`evaluate_batch` so the
        scalar and batch paths share one arithmetic order.
        """
        if len(points) != self.degree:
            raise KernelInputError(
                f"kernel {self.name!r} takes {self.degree} points, got {len(points)}"
            )
        try:
            pts = np.asarray(points, dtype=float)
        except ValueError as exc:
            raise KernelInputError(f"mismatched point dimensions: {exc}") from exc
        if not np.all(np.isfinite(pts)):
            raise KernelInputError("kernel arguments must be finite")
        self._check_dim(pts.shape[1] if pts.ndim > 1 else 1)
        return float(self.evaluate_batch(pts[np.newaxis, ...])[0])

    def _check_dim(self, d: int) -> None:
        if self.point_dim is not None and d != self.point_dim:
            raise KernelInputError(
                f"kernel {self.name!r} requires points of dimension "
                f"{self.point_dim}, got {d}"
            )


class WalshAverage(Kernel):
    """Pairwise average ``(x + y) / 2`` of two scalar points."""

    name = "walsh"
    degree = 2
    point_dim = 1
    pair_count_mode = "sum"

    def evaluate_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = _as_scalar_batch(self, pts)
        return (pts[:, 0] + pts[:, 1]) / 2.0


class MWiseMean(Kernel):
    """Arithmetic mean of m scalar points.

    Arguments are sorted before summing so that every permutation takes
    the same floating-point path.  ``m = 1`` is the identity kernel and
    ``m = 2`` coincides with :class:`WalshAverage` value for value.
    """

    point_dim = 1

    def __init__(self, m: int):
        if not isinstance(m, (int, np.integer)) or m < 1:
            raise ValueError(f"kernel degree must be a positive integer, got {m!r}")
        self.degree = int(m)
        self.name = f"mean:{m}"
        if m == 2:
            self.pair_count_mode = "sum"

    def evaluate_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = _as_scalar_batch(self, pts)
        return np.sort(pts, axis=1).sum(axis=1) / self.degree


class Distance(Kernel):
    """Distance ``||x - y||`` between two points under a named norm.

    One-dimensional inputs are computed as ``|x - y|`` for every norm so
    that the three norms agree bit for bit where they coincide.
    """

    degree = 2
    point_dim = None
    pair_count_mode = "absdiff"

    def __init__(self, norm: str = "euclidean"):
        if norm not in NORMS:
            raise ValueError(f"unknown norm {norm!r}; choose one of {NORMS}")
        self.norm = norm
        self.name = f"dist:{norm}"

    def evaluate_batch(self, pts: np.ndarray) -> np.ndarray:
        if pts.ndim == 2:
            return np.abs(pts[:, 0] - pts[:, 1])
        diff = pts[:, 0, :] - pts[:, 1, :]
        if diff.shape[1] == 1:
            return np.abs(diff[:, 0])
        if self.norm == "euclidean":
            return np.sqrt((diff * diff).sum(axis=1))
        if self.norm == "manhattan":
            return np.abs(diff).sum(axis=1)
        return np.abs(diff).max(axis=1)


def _as_scalar_batch(kernel: Kernel, pts: np.ndarray) -> np.ndarray:
    if pts.ndim == 3:
        if pts.shape[2] != 1:
            raise KernelInputError(
                f"kernel {kernel.name!r} requires scalar points, got dimension {pts.shape[2]}"
            )
        pts = pts[:, :, 0]
    return pts


def walsh_average_kernel() -> Kernel:
    """Degree-2 kernel mapping scalars x, y to (x + y) / 2."""
    return WalshAverage()


def mwise_mean_kernel(m: int) -> Kernel:
    """Degree-m kernel returning the mean of its m scalar arguments."""
    return MWiseMean(m)


def distance_kernel(norm: str = "euclidean") -> Kernel:
    """Degree-2 kernel returning ||x - y|| under the chosen norm."""
    return Distance(norm)


_REGISTRY: dict[str, object] = {}


def register_kernel(prefix: str, factory) -> None:
    """Register a custom kernel family for name-based selection.

    ``factory(arg)`` receives the text after ``prefix:`` (or ``None``
    when the name is bare) and must return a :class:`Kernel`.  Declaring
    a genuinely symmetric kernel is the caller's responsibility; the
    test-suite-style probabilistic permutation check is recommended.
    """
    if ":" in prefix:
        raise ValueError("registry prefix must not contain ':'")
    _REGISTRY[prefix] = factory


def kernel_from_name(text: str) -> Kernel:
    """Build a kernel from its CLI name.

    Recognized forms: ``walsh``, ``mean:<m>``, ``dist:<norm>``, plus any
    registered custom prefix.
    """
    prefix, _, arg = text.partition(":")
    if prefix == "walsh":
        if arg:
            raise ValueError("kernel 'walsh' takes no argument")
        return WalshAverage()
    if prefix == "mean":
        try:
            m = int(arg)
        except ValueError:
            raise ValueError(f"kernel 'mean' needs an integer degree, got {arg!r}") from None
        return MWiseMean(m)
    if prefix == "dist":
        return Distance(arg or "euclidean")
    if prefix in _REGISTRY:
        return _REGISTRY[prefix](arg or None)
    raise ValueError(f"unknown kernel name {text!r}")
