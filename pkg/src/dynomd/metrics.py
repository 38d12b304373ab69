"""Regret notions, complexity measures (C_T, D_T, V_T) and regret-bound right-hand sides."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .environment import sup_variation


def _losses_at(losses, points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if len(losses) != len(points):
        raise DimensionError(f"length mismatch: {len(losses)} losses vs {len(points)} points")
    return np.array([f.value(x) for f, x in zip(losses, points)])


def dynamic_regret(losses, actions, comparators) -> float:
    """sum_t f_t(x_t) - sum_t f_t(u_t)."""
    if len(actions) != len(comparators):
        raise DimensionError("actions and comparators differ in length")
    return float(_losses_at(losses, actions).sum() - _losses_at(losses, comparators).sum())


def static_regret(losses, actions, best) -> float:
    """Regret against the single action ``best`` played every round."""
    return dynamic_regret(losses, actions, np.broadcast_to(best, np.shape(actions)))


def regularity_increments(comparators, ord=1) -> np.ndarray:
    u = np.atleast_2d(np.asarray(comparators, dtype=float))
    out = np.zeros(len(u))
    if len(u) > 1:
        out[1:] = np.linalg.norm(np.diff(u, axis=0), ord=ord, axis=1)
    return out


def regularity(comparators, ord=1) -> float:
    """Path length sum_{t>=2} ||u_t - u_{t-1}||; the t = 1 term is 0 (u_0 = u_1)."""
    if len(comparators) == 0:
        raise DomainError("regularity needs a nonempty sequence")
    return float(regularity_increments(comparators, ord).sum())


def deviation(grads, predictions, ord=np.inf) -> float:
    """sum_t ||grad_t - M_t||_*^2, without the learner's seed term."""
    g = np.atleast_2d(np.asarray(grads, dtype=float))
    m = np.atleast_2d(np.asarray(predictions, dtype=float))
    if g.shape != m.shape:
        raise DimensionError(f"shape mismatch: {g.shape} vs {m.shape}")
    if g.size == 0:
        return 0.0
    return float(np.sum(np.linalg.norm(g - m, ord=ord, axis=1) ** 2))


def variability(losses, fset=None) -> float:
    """sum_t sup_x |f_t(x) - f_{t-1}(x)| with f_0 = f_1."""
    return float(sum(sup_variation(a, b, fset) for a, b in zip(losses[:-1], losses[1:])))


@dataclass(frozen=True)
class ComplexityMeasures:
    c_t: float
    d_t: float
    v_t: float


class StreamingMeasures:
    """Running C, D, V; single owner per run."""

    def __init__(self):
        self.c_t = 0.0
        self.d_t = 0.0
        self.v_t = 0.0

    def update(self, dc: float, dd: float, dv: float) -> ComplexityMeasures:
        if dc < 0 or dd < 0 or dv < 0:
            raise DomainError("complexity increments must be nonnegative")
        self.c_t += dc
        self.d_t += dd
        self.v_t += dv
        return self.snapshot()

    def snapshot(self) -> ComplexityMeasures:
        return ComplexityMeasures(self.c_t, self.d_t, self.v_t)


def kappa(T: int, gamma: float, r_max_sq: float) -> float:
    r = math.sqrt(r_max_sq)
    k = 4.0 + math.log2(2.0 * gamma * r * T + 4.0 * r_max_sq) - 2.0 * math.log2(3.0 * r)
    if not k > 0:
        raise DomainError(f"degenerate geometry constants: kappa = {k}")
    return k


def epoch_bound(T: int, gamma: float, r_max_sq: float) -> float:
    """Largest epoch count AOMD can reach over T rounds."""
    r = math.sqrt(r_max_sq)
    return 2.0 + 0.5 * math.log2(2.0 * gamma * r * T + 4.0 * r_max_sq) - math.log2(3.0 * r)


def min_branches(measures: ComplexityMeasures, T: int):
    """The two candidates inside the min of the dynamic-regret bound."""
    d1 = measures.d_t + 1.0
    c_branch = math.sqrt(d1 * measures.c_t)
    v_branch = d1 ** (1 / 3) * T ** (1 / 3) * measures.v_t ** (1 / 3)
    return c_branch, v_branch


def min_branch(measures: ComplexityMeasures, T: int) -> str:
    """'C' when the regularity branch is the smaller one, else 'V'."""
    c_branch, v_branch = min_branches(measures, T)
    return "C" if c_branch <= v_branch else "V"


def theorem1_rhs(measures: ComplexityMeasures, T: int, gamma: float, r_max_sq: float,
                 g_bound: float) -> float:
    """kappa (G + 4 R sqrt(D+1) + (2 sqrt(gamma) + 2 R) min{sqrt((D+1) C), (D+1)^1/3 T^1/3 V^1/3})."""
    if min(measures.c_t, measures.d_t, measures.v_t, gamma, r_max_sq, g_bound) < 0 or T < 1:
        raise DomainError("bound inputs must be nonnegative and T >= 1")
    r = math.sqrt(r_max_sq)
    k = kappa(T, gamma, r_max_sq)
    m = min(min_branches(measures, T))
    return k * (g_bound + 4.0 * r * math.sqrt(measures.d_t + 1.0)
                + (2.0 * math.sqrt(gamma) + 2.0 * r) * m)


def lemma1_rhs(L, d_t, c_t_of_u, gamma, r_max_sq):
    """2 sqrt(1+D) L + 2 sqrt(1+D) (gamma C(u) + 4 R^2) / L; vectorizes over D and C."""
    if np.any(np.asarray(L) <= 0):
        raise DomainError("L must be positive")
    s = np.sqrt(1.0 + np.asarray(d_t, dtype=float))
    out = 2.0 * s * L + 2.0 * s * (gamma * np.asarray(c_t_of_u, dtype=float) + 4.0 * r_max_sq) / L
    return float(out) if np.ndim(out) == 0 else out


def lemma2_rhs(L, d_t, c_t_of_u, v_t, T, gamma, r_max_sq):
    """4 sqrt(1+D) L + [gamma C(u) > L^2 - 4R^2] 4 gamma R T V / (L^2 - 4R^2), for L > 2R."""
    r = math.sqrt(r_max_sq)
    if not L > 2.0 * r:
        raise DomainError(f"L must exceed 2 R_max = {2 * r}, got {L}")
    gap = L * L - 4.0 * r_max_sq
    d_t = np.asarray(d_t, dtype=float)
    c_t_of_u = np.asarray(c_t_of_u, dtype=float)
    v_t = np.asarray(v_t, dtype=float)
    T = np.asarray(T, dtype=float)
    ind = (gamma * c_t_of_u > gap).astype(float)
    out = 4.0 * np.sqrt(1.0 + d_t) * L + ind * 4.0 * gamma * r * T * v_t / gap
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class BoundCheck:
    """One verified inequality: ``lhs <= rhs + tol``.

    ``status`` is PASS/FAIL, or N/A when the bound's premise did not hold.
    """

    scenario: str
    T: int
    check: str
    lhs: float
    rhs: float
    tol: float = 1e-6
    applicable: bool = True
    note: str = ""

    @property
    def passed(self) -> bool:
        return (not self.applicable) or self.lhs <= self.rhs + self.tol

    @property
    def status(self) -> str:
        if not self.applicable:
            return "N/A"
        return "PASS" if self.passed else "FAIL"


REPORT_COLUMNS = ["scenario", "T", "check", "lhs", "rhs", "status", "note"]


def write_report(checks: Iterable[BoundCheck], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for c in checks:
            w.writerow([c.scenario, c.T, c.check, f"{c.lhs:.17g}", f"{c.rhs:.17g}",
                        c.status, c.note])


def format_report(checks: Sequence[BoundCheck]) -> str:
    lines = []
    for c in checks:
        lines.append(f"{c.status:4s}  {c.scenario:24s} T={c.T:<6d} {c.check:32s} "
                     f"lhs={c.lhs:.6g}  rhs={c.rhs:.6g}" + (f"  ({c.note})" if c.note else ""))
    return "\n".join(lines)
