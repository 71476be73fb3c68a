"""Data-generating distributions for oracles and simulation scenarios.

Scalar families carry closed-form ``pdf``/``cdf``/``ppf`` so population
quantiles and densities are available exactly; point-cloud families only
sample.  All sampling goes through a caller-supplied
``numpy.random.Generator`` so replicate streams stay reproducible.

String grammar (scenario files and CLI): ``normal``, ``normal(mu,sigma)``,
``uniform(a,b)``, ``exponential(rate)``, ``laplace(mu,b)``,
``logistic(loc,s)``, ``two_piece(ratio)``, ``square``, ``cube``,
``mvnormal(d)``.  Bare names take the defaults shown by ``str()``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "Normal",
    "Uniform",
    "Exponential",
    "Laplace",
    "Logistic",
    "TwoPieceUniform",
    "UniformCube",
    "GaussianCloud",
    "parse_distribution",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)


class ScalarDistribution:
    """Base for one-dimensional families with closed distribution functions."""

    finite_variance = True
    symmetric = False

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, q):
        raise NotImplementedError

    @property
    def center(self) -> float:
        """Symmetry center (equals the median for symmetric families)."""
        return self.ppf(0.5)

    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class Normal(ScalarDistribution):
    mu: float = 0.0
    sigma: float = 1.0

    symmetric = True

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def sample(self, rng, size):
        return rng.normal(self.mu, self.sigma, size)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * _SQRT2PI)

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma)

    def ppf(self, q):
        return self.mu + self.sigma * ndtri(q)

    def __str__(self):
        return f"normal({self.mu:g},{self.sigma:g})"


@dataclass(frozen=True)
class Uniform(ScalarDistribution):
    a: float = 0.0
    b: float = 1.0

    symmetric = True

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)

    def ppf(self, q):
        return self.a + (self.b - self.a) * np.asarray(q, dtype=float)

    def support(self):
        return (self.a, self.b)

    def __str__(self):
        return f"uniform({self.a:g},{self.b:g})"


@dataclass(frozen=True)
class Exponential(ScalarDistribution):
    rate: float = 1.0

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.clip(x, 0, None)), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, 1.0 - np.exp(-self.rate * np.clip(x, 0, None)), 0.0)

    def ppf(self, q):
        return -np.log1p(-np.asarray(q, dtype=float)) / self.rate

    def support(self):
        return (0.0, math.inf)

    def __str__(self):
        return f"exponential({self.rate:g})"


@dataclass(frozen=True)
class Laplace(ScalarDistribution):
    mu: float = 0.0
    scale: float = 1.0

    symmetric = True

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def sample(self, rng, size):
        return rng.laplace(self.mu, self.scale, size)

    def pdf(self, x):
        z = np.abs(np.asarray(x, dtype=float) - self.mu) / self.scale
        return np.exp(-z) / (2.0 * self.scale)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.scale
        return np.where(z < 0, 0.5 * np.exp(z), 1.0 - 0.5 * np.exp(-z))

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        return self.mu - self.scale * np.sign(q - 0.5) * np.log1p(-2.0 * np.abs(q - 0.5))

    def __str__(self):
        return f"laplace({self.mu:g},{self.scale:g})"


@dataclass(frozen=True)
class Logistic(ScalarDistribution):
    loc: float = 0.0
    scale: float = 1.0

    symmetric = True

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def sample(self, rng, size):
        return rng.logistic(self.loc, self.scale, size)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        e = np.exp(-np.abs(z))
        return e / (self.scale * (1.0 + e) ** 2)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return 1.0 / (1.0 + np.exp(-z))

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        return self.loc + self.scale * np.log(q / (1.0 - q))

    def __str__(self):
        return f"logistic({self.loc:g},{self.scale:g})"


@dataclass(frozen=True)
class TwoPieceUniform(ScalarDistribution):
    """Piecewise-uniform density with a jump at its median.

    Height ``ratio/2`` on ``[-1/ratio, 0)`` and ``1/2`` on ``[0, 1]``;
    each side holds half the mass, so the median sits exactly at the
    density jump and the distribution function has one-sided derivatives
    ``ratio/2`` (left) and ``1/2`` (right) there.
    """

    ratio: float = 2.0

    def __post_init__(self):
        if self.ratio <= 0:
            raise ValueError("ratio must be positive")

    @property
    def kink(self) -> float:
        return 0.0

    @property
    def left_density(self) -> float:
        return self.ratio / 2.0

    @property
    def right_density(self) -> float:
        return 0.5

    def sample(self, rng, size):
        return self.ppf(rng.random(size))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out = np.where((x >= -1.0 / self.ratio) & (x < 0), self.ratio / 2.0, out)
        out = np.where((x >= 0) & (x <= 1.0), 0.5, out)
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        left = 0.5 + np.clip(x, -1.0 / self.ratio, 0.0) * self.ratio / 2.0
        right = 0.5 + np.clip(x, 0.0, 1.0) * 0.5
        return np.where(x < 0, left, right)

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        return np.where(q < 0.5, (q - 0.5) * 2.0 / self.ratio, (q - 0.5) * 2.0)

    def support(self):
        return (-1.0 / self.ratio, 1.0)

    def __str__(self):
        return f"two_piece({self.ratio:g})"


class PointCloud:
    """Base for d-dimensional sampling-only families."""

    dim = 1

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformCube(PointCloud):
    """Uniform distribution on the unit cube [0, 1]^d."""

    d: int = 2

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        object.__setattr__(self, "dim", self.d)

    def sample(self, rng, size):
        return rng.random((size, self.d))

    def __str__(self):
        return {2: "square", 3: "cube"}.get(self.d, f"cube({self.d})")


@dataclass(frozen=True)
class GaussianCloud(PointCloud):
    """Standard multivariate normal in R^d."""

    d: int = 2

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        object.__setattr__(self, "dim", self.d)

    def sample(self, rng, size):
        return rng.normal(size=(size, self.d))

    def __str__(self):
        return f"mvnormal({self.d})"


_FAMILIES = {
    "normal": (Normal, (0.0, 1.0)),
    "uniform": (Uniform, (0.0, 1.0)),
    "exponential": (Exponential, (1.0,)),
    "laplace": (Laplace, (0.0, 1.0)),
    "logistic": (Logistic, (0.0, 1.0)),
    "two_piece": (TwoPieceUniform, (2.0,)),
}


def parse_distribution(text: str):
    """Parse a distribution spec string; see the module docstring for the grammar."""
    text = text.strip()
    m = re.fullmatch(r"([a-z_]+)(?:\(([^)]*)\))?", text)
    if not m:
        raise ValueError(f"cannot parse distribution {text!r}")
    name, args_text = m.group(1), m.group(2)
    args = []
    if args_text:
        try:
            args = [float(a) for a in args_text.split(",")]
        except ValueError:
            raise ValueError(f"bad numeric arguments in distribution {text!r}") from None
    if name == "square":
        if args:
            raise ValueError("'square' takes no arguments (it is the d=2 unit cube)")
        return UniformCube(2)
    if name == "cube":
        if not args:
            return UniformCube(3)
        return UniformCube(int(args[0]))
    if name == "mvnormal":
        return GaussianCloud(int(args[0]) if args else 2)
    if name in _FAMILIES:
        cls, defaults = _FAMILIES[name]
        if len(args) > len(defaults):
            raise ValueError(f"too many arguments for {name!r}")
        full = list(args) + list(defaults[len(args):])
        return cls(*full)
    raise ValueError(f"unknown distribution {text!r}")
