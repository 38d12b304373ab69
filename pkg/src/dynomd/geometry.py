"""Feasible sets, regularizers, Bregman divergences and the mirror step.

Two pairings are supported:

* the probability simplex with the negative entropy (primal norm l1, dual l-inf),
* a Euclidean ball with half the squared Euclidean norm (primal and dual l2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DimensionError, DomainError

TOL = 1e-9


@dataclass(frozen=True)
class Simplex:
    """Probability simplex in R^d."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise DomainError(f"simplex dimension must be >= 1, got {self.d}")

    def contains(self, x, tol: float = TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return (x.shape == (self.d,) and np.all(np.isfinite(x))
                and x.min() >= -tol and abs(x.sum() - 1.0) <= tol)

    def vertices(self) -> np.ndarray:
        return np.eye(self.d)

    def uniform_point(self) -> np.ndarray:
        return np.full(self.d, 1.0 / self.d)

    def sample(self, rng: np.random.Generator, n: int, floor: float = 0.0) -> np.ndarray:
        """Uniform samples (Dirichlet(1)), optionally restricted to entries >= floor."""
        z = rng.dirichlet(np.ones(self.d), size=n)
        if floor > 0.0:
            z = floor + (1.0 - self.d * floor) * z
        return z


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball of radius ``radius`` around ``center`` (origin by default)."""

    d: int
    radius: float = 1.0
    center: Optional[tuple] = None

    def __post_init__(self):
        if self.d < 1:
            raise DomainError(f"ball dimension must be >= 1, got {self.d}")
        if not self.radius > 0:
            raise DomainError(f"ball radius must be positive, got {self.radius}")
        if self.center is not None and len(self.center) != self.d:
            raise DimensionError("ball center has the wrong dimension")

    @property
    def c(self) -> np.ndarray:
        if self.center is None:
            return np.zeros(self.d)
        return np.asarray(self.center, dtype=float)

    def contains(self, x, tol: float = TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return (x.shape == (self.d,) and np.all(np.isfinite(x))
                and np.linalg.norm(x - self.c) <= self.radius + tol)

    def project(self, y) -> np.ndarray:
        c = self.c
        dy = np.asarray(y, dtype=float) - c
        nrm = np.linalg.norm(dy)
        if nrm > self.radius:
            dy = dy * (self.radius / nrm)
        return c + dy

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        g = rng.standard_normal((n, self.d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.radius * rng.random(n) ** (1.0 / self.d)
        return self.c + g * r[:, None]


FeasibleSet = Union[Simplex, Ball]


@dataclass(frozen=True)
class NegativeEntropy:
    """R(x) = sum_i x_i log x_i on the simplex; 1-strongly convex w.r.t. l1.

    ``entropy_floor`` is only consulted by :func:`geometry_constants`.
    """

    entropy_floor: Optional[float] = None
    norm_ord = 1
    dual_ord = np.inf


@dataclass(frozen=True)
class HalfSquaredEuclidean:
    """R(x) = 0.5 ||x||_2^2; 1-strongly convex w.r.t. l2."""

    norm_ord = 2
    dual_ord = 2


Regularizer = Union[NegativeEntropy, HalfSquaredEuclidean]


@dataclass(frozen=True)
class GeometryConstants:
    gamma: float
    r_max_sq: float
    g_bound: Optional[float] = None

    @property
    def r_max(self) -> float:
        return math.sqrt(self.r_max_sq)


@dataclass(frozen=True)
class Geometry:
    """A feasible set paired with its regularizer."""

    set: FeasibleSet
    reg: Regularizer = field(default=None)

    def __post_init__(self):
        if self.reg is None:
            object.__setattr__(self, "reg", NegativeEntropy() if isinstance(self.set, Simplex)
                               else HalfSquaredEuclidean())
        if isinstance(self.set, Simplex) != isinstance(self.reg, NegativeEntropy):
            raise DomainError("supported pairings are simplex/entropy and ball/euclidean")

    @classmethod
    def simplex(cls, d: int) -> "Geometry":
        return cls(Simplex(d), NegativeEntropy())

    @classmethod
    def ball(cls, d: int, radius: float = 1.0, center=None) -> "Geometry":
        if center is not None:
            center = tuple(float(c) for c in center)
        return cls(Ball(d, radius, center), HalfSquaredEuclidean())

    @property
    def d(self) -> int:
        return self.set.d

    @property
    def is_simplex(self) -> bool:
        return isinstance(self.set, Simplex)

    @property
    def name(self) -> str:
        return "simplex" if self.is_simplex else "ball"

    def initial_point(self) -> np.ndarray:
        return self.set.uniform_point() if self.is_simplex else self.set.c.copy()

    def norm(self, x) -> float:
        return primal_norm(self.reg, x)

    def dual_norm(self, g) -> float:
        return dual_norm(self.reg, g)

    def bregman(self, x, y) -> float:
        return bregman(self.reg, x, y)

    def mirror_step(self, eta, g, x_prev) -> np.ndarray:
        return mirror_step(self.reg, self.set, eta, g, x_prev)

    def constants(self, T: int) -> GeometryConstants:
        return geometry_constants(self.reg, self.set, T)


def _vec(x, name="x") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be a vector")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name} has non-finite entries")
    return v


def primal_norm(reg: Regularizer, x) -> float:
    return float(np.linalg.norm(_vec(x), ord=reg.norm_ord))


def dual_norm(reg: Regularizer, g) -> float:
    g = _vec(g, "g")
    if g.size == 0:
        return 0.0
    return float(np.linalg.norm(g, ord=reg.dual_ord))


def bregman(reg: Regularizer, x, y) -> float:
    """D_R(x, y) = R(x) - R(y) - <grad R(y), x - y>."""
    x, y = _vec(x), _vec(y, "y")
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if isinstance(reg, HalfSquaredEuclidean):
        return 0.5 * float(np.dot(x - y, x - y))
    if np.any(y <= 0.0):
        raise DomainError("KL divergence needs a strictly positive second argument")
    if np.any(x < 0.0):
        raise DomainError("KL divergence needs a nonnegative first argument")
    pos = x > 0.0
    kl = float(np.sum(x[pos] * np.log(x[pos] / y[pos])))
    # x, y on the simplex: the linear terms cancel; keep them for slightly off-simplex input
    return max(kl - float(x.sum()) + float(y.sum()), 0.0)


def mirror_step(reg: Regularizer, fset: FeasibleSet, eta: float, g, x_prev) -> np.ndarray:
    """argmin_{x in set} eta <x, g> + D_R(x, x_prev), in closed form."""
    g, x_prev = _vec(g, "g"), _vec(x_prev, "x_prev")
    if g.shape != x_prev.shape or g.shape != (fset.d,):
        raise DimensionError("g, x_prev and the set must share a dimension")
    if not (eta >= 0.0 and math.isfinite(eta)):
        raise DomainError(f"step size must be finite and nonnegative, got {eta}")
    if isinstance(reg, NegativeEntropy):
        if np.any(x_prev < 0.0):
            raise DomainError("x_prev must be nonnegative on the simplex")
        a = -eta * g
        w = x_prev * np.exp(a - a.max())
        out = w / w.sum()
    else:
        out = fset.project(x_prev - eta * g)
    if not fset.contains(out):
        raise DomainError("mirror step left the feasible set")
    return out


def geometry_constants(reg: Regularizer, fset: FeasibleSet, T: int) -> GeometryConstants:
    """Conservative Bregman-Lipschitz constant gamma and R_max^2 for horizon ``T``.

    For the simplex the divergence is unbounded, so both constants are taken over
    the set floored at ``1/(d T^2)`` (or at ``reg.entropy_floor`` when given).
    """
    if T < 1:
        raise DomainError(f"horizon must be >= 1, got {T}")
    if isinstance(reg, HalfSquaredEuclidean):
        r = fset.radius
        return GeometryConstants(gamma=2.0 * r, r_max_sq=2.0 * r * r)
    eps = reg.entropy_floor if reg.entropy_floor is not None else 1.0 / (fset.d * T * T)
    if not 0.0 < eps <= 1.0 / fset.d:
        raise DomainError(f"entropy floor must lie in (0, 1/d], got {eps}")
    # the floored set collapses to a point when d T^2 < e; any positive value bounds 0
    c = max(math.log(1.0 / eps), 1.0)
    return GeometryConstants(gamma=c, r_max_sq=c)
