"""Loss oracles and synthetic loss-sequence scenarios.

Every oracle exposes its value, gradient, exact minimizer over its feasible set
and a certified bound on ``|f(x)|``. Scenarios are deterministic given a seed
(``numpy.random.Generator`` with the PCG64 bit generator).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .errors import DimensionError, DomainError
from .geometry import Ball, Geometry


@dataclass(frozen=True)
class LinearSimplex:
    """f(x) = <f, x> on the probability simplex."""

    f: tuple

    @classmethod
    def of(cls, f) -> "LinearSimplex":
        return cls(tuple(float(v) for v in f))

    @property
    def coef(self) -> np.ndarray:
        return np.asarray(self.f, dtype=float)

    @property
    def d(self) -> int:
        return len(self.f)

    def value(self, x) -> float:
        return float(np.dot(self.coef, x))

    def gradient(self, x) -> np.ndarray:
        return self.coef.copy()

    def minimizer(self) -> np.ndarray:
        # np.argmin returns the lowest index among ties
        out = np.zeros(self.d)
        out[int(np.argmin(self.coef))] = 1.0
        return out

    @property
    def g_bound(self) -> float:
        return float(np.max(np.abs(self.coef)))


@dataclass(frozen=True)
class QuadraticBall:
    """f(x) = h/2 ||x - c||^2 on a Euclidean ball."""

    center: tuple
    h: float
    ball: Ball

    @classmethod
    def of(cls, center, h: float, ball: Ball) -> "QuadraticBall":
        if not h > 0:
            raise DomainError(f"curvature must be positive, got {h}")
        if len(center) != ball.d:
            raise DimensionError("quadratic center and ball differ in dimension")
        return cls(tuple(float(v) for v in center), float(h), ball)

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def d(self) -> int:
        return len(self.center)

    def value(self, x) -> float:
        r = np.asarray(x, dtype=float) - self.c
        return 0.5 * self.h * float(np.dot(r, r))

    def gradient(self, x) -> np.ndarray:
        return self.h * (np.asarray(x, dtype=float) - self.c)

    def minimizer(self) -> np.ndarray:
        return self.ball.project(self.c)

    @property
    def g_bound(self) -> float:
        far = np.linalg.norm(self.c - self.ball.c) + self.ball.radius
        return 0.5 * self.h * far * far


LossOracle = LinearSimplex | QuadraticBall


def _max_abs_radial(alpha: float, wn: float, a: float, r: float) -> float:
    """max over ||y|| <= r of |alpha/2 ||y||^2 + <w, y> + a| with ||w|| = wn.

    For a fixed radius rho the extremes along w are alpha/2 rho^2 +- wn rho + a,
    so both the max and the min reduce to one-dimensional quadratics on [0, r].
    """
    def extreme(al, b):
        cands = [0.0, r]
        if al < 0.0:
            rho = -b / al
            if 0.0 < rho < r:
                cands.append(rho)
        return max(0.5 * al * p * p + b * p for p in cands)

    hi = extreme(alpha, wn) + a
    lo = -(extreme(-alpha, wn) - a)
    return max(abs(hi), abs(lo), 0.0)


def sup_variation(prev: LossOracle, cur: LossOracle, fset=None) -> float:
    """sup over the feasible set of |cur(x) - prev(x)|, computed exactly."""
    if isinstance(prev, LinearSimplex) and isinstance(cur, LinearSimplex):
        if prev.d != cur.d:
            raise DimensionError("losses differ in dimension")
        # linear on the simplex: attained at a vertex
        return float(np.max(np.abs(cur.coef - prev.coef)))
    if isinstance(prev, QuadraticBall) and isinstance(cur, QuadraticBall):
        ball = fset if fset is not None else cur.ball
        if prev.d != cur.d or ball.d != cur.d:
            raise DimensionError("losses differ in dimension")
        b = ball.c
        c1, c2 = prev.c - b, cur.c - b
        h1, h2 = prev.h, cur.h
        # with x = b + y:  diff(y) = (h2-h1)/2 |y|^2 + <h1 c1 - h2 c2, y> + (h2|c2|^2 - h1|c1|^2)/2
        alpha = h2 - h1
        w = h1 * c1 - h2 * c2
        a = 0.5 * (h2 * float(np.dot(c2, c2)) - h1 * float(np.dot(c1, c1)))
        return _max_abs_radial(alpha, float(np.linalg.norm(w)), a, ball.radius)
    raise DomainError(f"unsupported loss pair {type(prev).__name__}/{type(cur).__name__}")


@dataclass
class Scenario:
    """A fixed loss sequence on a geometry."""

    name: str
    geometry: Geometry
    losses: List[LossOracle]
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.losses:
            raise DomainError("a scenario needs at least one round")
        kinds = {type(f) for f in self.losses}
        if len(kinds) != 1:
            raise DomainError("mixed loss families in one scenario are not supported")
        want = LinearSimplex if self.geometry.is_simplex else QuadraticBall
        if kinds.pop() is not want:
            raise DomainError(f"{self.geometry.name} geometry needs {want.__name__} losses")
        if any(f.d != self.geometry.d for f in self.losses):
            raise DimensionError("loss dimension differs from the geometry")

    @property
    def T(self) -> int:
        return len(self.losses)

    @property
    def d(self) -> int:
        return self.geometry.d

    @property
    def family(self) -> int:
        return kernels.FAMILY_LINEAR if self.geometry.is_simplex else kernels.FAMILY_QUADRATIC

    @cached_property
    def table(self):
        """(P, H): per-round loss parameters for the kernels."""
        if self.family == kernels.FAMILY_LINEAR:
            P = np.array([f.f for f in self.losses], dtype=float)
            H = np.zeros(self.T)
        else:
            P = np.array([f.center for f in self.losses], dtype=float)
            H = np.array([f.h for f in self.losses], dtype=float)
        return P, H

    @cached_property
    def minimizers(self) -> np.ndarray:
        return np.array([f.minimizer() for f in self.losses])

    @cached_property
    def minimizer_values(self) -> np.ndarray:
        return np.array([f.value(x) for f, x in zip(self.losses, self.minimizers)])

    @cached_property
    def c_increments(self) -> np.ndarray:
        """||x*_t - x*_{t-1}|| per round in the primal norm; 0 at t = 1."""
        x = self.minimizers
        out = np.zeros(self.T)
        if self.T > 1:
            ord_ = 1 if self.geometry.is_simplex else 2
            out[1:] = np.linalg.norm(np.diff(x, axis=0), ord=ord_, axis=1)
        return out

    @cached_property
    def v_increments(self) -> np.ndarray:
        """sup_x |f_t - f_{t-1}| per round, with f_0 = f_1 so the first entry is 0."""
        out = np.zeros(self.T)
        for t in range(1, self.T):
            out[t] = sup_variation(self.losses[t - 1], self.losses[t], self.geometry.set)
        return out

    @property
    def g_bound(self) -> float:
        return max(f.g_bound for f in self.losses)

    def values(self, X) -> np.ndarray:
        """f_t(X[t]) for every round."""
        X = np.asarray(X, dtype=float)
        P, H = self.table
        if self.family == kernels.FAMILY_LINEAR:
            return np.einsum("td,td->t", P, X)
        r = X - P
        return 0.5 * H * np.einsum("td,td->t", r, r)

    def values_at(self, x) -> np.ndarray:
        """f_t(x) for a single point x and every round."""
        return self.values(np.broadcast_to(np.asarray(x, dtype=float), (self.T, self.d)))

    def best_fixed_action(self) -> np.ndarray:
        """argmin_x sum_t f_t(x) over the feasible set."""
        P, H = self.table
        if self.family == kernels.FAMILY_LINEAR:
            out = np.zeros(self.d)
            out[int(np.argmin(P.sum(axis=0)))] = 1.0
            return out
        # isotropic quadratic: project the weighted mean of the centers
        return self.geometry.set.project((H[:, None] * P).sum(axis=0) / H.sum())

    def to_csv(self, path) -> None:
        """Dump the loss sequence: one row per round with family, curvature and parameters."""
        P, H = self.table
        kind = "linear" if self.family == kernels.FAMILY_LINEAR else "quadratic"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "family", "h"] + [f"p{i}" for i in range(self.d)])
            for t in range(self.T):
                w.writerow([t + 1, kind, f"{H[t]:.17g}"] + [f"{v:.17g}" for v in P[t]])


def load_losses_csv(path, geometry: Geometry, name: str = "csv") -> Scenario:
    """Inverse of :meth:`Scenario.to_csv`."""
    losses = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            p = [float(row[f"p{i}"]) for i in range(geometry.d)]
            if row["family"] == "linear":
                losses.append(LinearSimplex.of(p))
            else:
                losses.append(QuadraticBall.of(p, float(row["h"]), geometry.set))
    return Scenario(name, geometry, losses, params={"path": str(path)})


def make_alternating_experts(T: int, d: int = 2) -> Scenario:
    """f_t = (-1/T, 0, ...) on even rounds and (0, -1/T, 0, ...) on odd rounds."""
    if T < 2 or d < 2:
        raise DomainError("alternating experts needs T >= 2 and d >= 2")
    losses = []
    for t in range(1, T + 1):
        f = [0.0] * d
        f[0 if t % 2 == 0 else 1] = -1.0 / T
        losses.append(LinearSimplex.of(f))
    return Scenario("alternating_experts", Geometry.simplex(d), losses, params={"T": T, "d": d})


def make_fixed_best_expert(T: int) -> Scenario:
    """f_t = (-1/2, 0) on even rounds and (0, 1/2) on odd rounds; expert 1 always wins."""
    if T < 2:
        raise DomainError("fixed best expert needs T >= 2")
    losses = [LinearSimplex.of((-0.5, 0.0) if t % 2 == 0 else (0.0, 0.5))
              for t in range(1, T + 1)]
    return Scenario("fixed_best_expert", Geometry.simplex(2), losses, params={"T": T})


def make_smooth_batches(B: int, rounds_per_batch: int, centers: Sequence, h: float = 1.0,
                        radius: float = 1.0) -> Scenario:
    """B batches, each repeating one quadratic h/2 ||x - center_i||^2 on the ball."""
    if B < 1 or rounds_per_batch < 1:
        raise DomainError("need B >= 1 and rounds_per_batch >= 1")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if len(centers) != B:
        raise DimensionError(f"expected {B} centers, got {len(centers)}")
    geo = Geometry.ball(centers.shape[1], radius)
    for c in centers:
        if not geo.set.contains(c):
            raise DomainError("batch centers must be feasible")
    losses = []
    for c in centers:
        f = QuadraticBall.of(c, h, geo.set)
        losses.extend([f] * rounds_per_batch)
    return Scenario("smooth_batches", geo, losses,
                    params={"B": B, "rounds_per_batch": rounds_per_batch, "h": h})


def batch_centers(B: int, d: int = 2, seed: int = 0, radius: float = 1.0) -> np.ndarray:
    """Seeded batch centers inside the ball at most radius/2 from the origin."""
    rng = np.random.default_rng(seed)
    return Ball(d, radius / 2).sample(rng, B)


def make_drifting_minimizer(T: int, dimension: int = 2, sigma: float = 0.01, seed: int = 0,
                            h: float = 1.0, radius: float = 1.0,
                            shock_at: Optional[int] = None) -> Scenario:
    """Quadratics whose centers follow a seeded random walk clipped to the ball.

    Each step has l2 length sigma before clipping. ``shock_at`` (a 1-based round)
    optionally reflects the center through the origin once, a sudden jump.
    """
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    if T < 1:
        raise DomainError("T must be >= 1")
    rng = np.random.default_rng(seed)
    geo = Geometry.ball(dimension, radius)
    c = Ball(dimension, radius / 2).sample(rng, 1)[0]
    centers = np.empty((T, dimension))
    centers[0] = c
    for t in range(1, T):
        step = rng.standard_normal(dimension)
        step *= sigma / np.linalg.norm(step)
        c = geo.set.project(c + step)
        if shock_at is not None and t + 1 == shock_at:
            c = -c
        centers[t] = c
    losses = [QuadraticBall.of(ct, h, geo.set) for ct in centers]
    return Scenario("drifting_minimizer", geo, losses, seed=seed,
                    params={"T": T, "sigma": sigma, "h": h, "shock_at": shock_at})


def make_random_linear(T: int, d: int, seed: int = 0) -> Scenario:
    """I.i.d. linear losses with coefficients uniform in [-1, 1]."""
    rng = np.random.default_rng(seed)
    F = rng.uniform(-1.0, 1.0, size=(T, d))
    return Scenario("random_linear", Geometry.simplex(d), [LinearSimplex.of(f) for f in F],
                    seed=seed, params={"T": T, "d": d})


def make_random_quadratic(T: int, d: int, seed: int = 0, radius: float = 1.0) -> Scenario:
    """I.i.d. quadratics with centers uniform in the ball and curvature in [0.5, 1.5]."""
    rng = np.random.default_rng(seed)
    geo = Geometry.ball(d, radius)
    C = geo.set.sample(rng, T)
    Hs = rng.uniform(0.5, 1.5, size=T)
    return Scenario("random_quadratic", geo,
                    [QuadraticBall.of(c, h, geo.set) for c, h in zip(C, Hs)],
                    seed=seed, params={"T": T, "d": d})

