"""Optimistic Mirror Descent with the adaptive step size L / (sqrt(D_t) + sqrt(D_{t-1})).

:func:`omd_round` is the single-round building block on explicit state; the
whole-run drivers (:func:`run_omd` here, ``aomd.aomd_run``) execute the same
updates inside the kernel loops of :mod:`dynomd.kernels`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from . import kernels
from .environment import Scenario
from .errors import ConfigError, DomainError
from .geometry import Geometry
from .metrics import ComplexityMeasures, regularity_increments
from .predictor import External, LastGradient


def step_size(L: float, dev_sum: float, dev_sum_prev: float) -> float:
    """L / (sqrt(dev_sum) + sqrt(dev_sum_prev)); dev_sum >= 1 keeps it finite."""
    if not (dev_sum >= dev_sum_prev >= 0.0 and dev_sum >= 1.0):
        raise DomainError(f"need dev_sum >= dev_sum_prev >= 0 and dev_sum >= 1, "
                          f"got {dev_sum}, {dev_sum_prev}")
    return L / (math.sqrt(dev_sum) + math.sqrt(dev_sum_prev))


def static_regret_bound(r_max_sq: float, D_T: float) -> float:
    """4 R_max (sqrt(D_T) + 1)."""
    if r_max_sq < 0 or D_T < 0:
        raise DomainError("inputs must be nonnegative")
    return 4.0 * math.sqrt(r_max_sq) * (math.sqrt(D_T) + 1.0)


@dataclass(frozen=True)
class OmdState:
    """Learner state at the start of round ``round``.

    ``dev_sum`` is seeded with 1 (the fictitious round 0), so ``eta`` is always finite.
    """

    geometry: Geometry
    x_hat: np.ndarray
    eta: float
    L: float
    dev_sum: float = 1.0
    dev_sum_prev: float = 0.0
    round: int = 1
    x_next: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, geometry: Geometry, L: float, x0=None) -> "OmdState":
        if not L > 0:
            raise DomainError(f"L must be positive, got {L}")
        x0 = geometry.initial_point() if x0 is None else np.asarray(x0, dtype=float)
        if not geometry.set.contains(x0):
            raise DomainError("initial point is not feasible")
        return cls(geometry, x0, step_size(L, 1.0, 0.0), L)


def omd_round(state: OmdState, M_t, loss):
    """Play one round: step on the prediction, query the gradient, step on the gradient.

    Returns ``(x_t, grad_t, next_state)``.
    """
    geo = state.geometry
    M_t = np.asarray(M_t, dtype=float)
    x_t = geo.mirror_step(state.eta, M_t, state.x_hat)
    grad = np.asarray(loss.gradient(x_t), dtype=float)
    x_hat = geo.mirror_step(state.eta, grad, state.x_hat)
    dev = geo.dual_norm(grad - M_t) ** 2
    dev_sum = state.dev_sum + dev
    nxt = replace(state, x_hat=x_hat, x_next=x_t, dev_sum_prev=state.dev_sum, dev_sum=dev_sum,
                  eta=step_size(state.L, dev_sum, state.dev_sum), round=state.round + 1)
    return x_t, grad, nxt


@dataclass
class EpochState:
    """AOMD trackers of one epoch as they stood at its last round."""

    n: int
    l_n: float
    c_epoch: float
    v_epoch: float
    d_epoch: float
    delta: int
    k_n: int


TRACE_COLUMNS = ["t", "epoch", "L_N", "eta_t", "loss", "cum_dyn_regret", "D_cum", "C_cum", "V_cum"]


class RunTrace:
    """Per-round record of an OMD/AOMD run over a scenario.

    Array attributes (length T, or T x d): ``x`` played actions, ``x_hat``
    secondary iterates, ``grad``, ``pred`` (M_t), ``loss`` = f_t(x_t), ``eta``
    (step used in round t), ``eta_next``, ``epoch``, ``L``, ``dev``
    (||grad_t - M_t||_*^2) and the epoch trackers ``D_epoch``, ``C_epoch``,
    ``V_epoch``, ``delta`` after the round's update.
    """

    def __init__(self, scenario: Scenario, arrays: dict, algorithm: str, constants):
        self.scenario = scenario
        self.algorithm = algorithm
        self.constants = constants
        for key, val in arrays.items():
            setattr(self, key, val)
        self._keys = list(arrays)

    @property
    def T(self) -> int:
        return len(self.loss)

    @property
    def regret_increments(self) -> np.ndarray:
        return self.loss - self.scenario.minimizer_values

    @property
    def cum_dyn_regret(self) -> np.ndarray:
        return np.cumsum(self.regret_increments)

    @property
    def dynamic_regret(self) -> float:
        return float(self.regret_increments.sum())

    def regret_against(self, comparators) -> np.ndarray:
        """Prefix sums of f_t(x_t) - f_t(u_t) for a comparator sequence."""
        return np.cumsum(self.loss - self.scenario.values(comparators))

    @property
    def D_cum(self) -> np.ndarray:
        return np.cumsum(self.dev)

    @property
    def C_cum(self) -> np.ndarray:
        return np.cumsum(self.scenario.c_increments)

    @property
    def V_cum(self) -> np.ndarray:
        return np.cumsum(self.scenario.v_increments)

    def measures(self) -> ComplexityMeasures:
        return ComplexityMeasures(float(self.C_cum[-1]), float(self.D_cum[-1]), float(self.V_cum[-1]))

    def comparator_regularity(self, comparators) -> np.ndarray:
        ord_ = 1 if self.scenario.geometry.is_simplex else 2
        return np.cumsum(regularity_increments(comparators, ord_))

    @property
    def epochs(self) -> List[EpochState]:
        out = []
        ep = self.epoch
        for n in np.unique(ep):
            rows = np.flatnonzero(ep == n)
            last = rows[-1]
            out.append(EpochState(n=int(n), l_n=float(self.L[last]), c_epoch=float(self.C_epoch[last]),
                                  v_epoch=float(self.V_epoch[last]), d_epoch=float(self.D_epoch[last]),
                                  delta=int(self.delta[last]), k_n=int(rows[0]) + 1))
        return out

    @property
    def n_epochs(self) -> int:
        return int(self.epoch[-1])

    def to_csv(self, path) -> None:
        cols = [self.epoch, self.L, self.eta, self.loss, self.cum_dyn_regret,
                self.D_cum, self.C_cum, self.V_cum]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for t in range(self.T):
                w.writerow([t + 1, int(cols[0][t])] + [f"{c[t]:.17g}" for c in cols[1:]])


def _prediction_table(predictor, T: int, d: int):
    if isinstance(predictor, External):
        return predictor.table(T, d)
    if not hasattr(predictor, "code"):
        raise ConfigError(f"unsupported predictor {predictor!r}")
    return None


def run_loop(scenario: Scenario, predictor, *, L1: float, constants, doubling: bool,
             tuning: int = kernels.TUNING_ADAPTIVE, x0=None, c_fn=None, T: Optional[int] = None,
             algorithm: str = "omd") -> RunTrace:
    geo = scenario.geometry
    if T is not None and T != scenario.T:
        if not 1 <= T <= scenario.T:
            raise ConfigError(f"horizon {T} outside 1..{scenario.T}")
        scenario = Scenario(scenario.name, geo, scenario.losses[:T], scenario.seed, scenario.params)
    x0 = geo.initial_point() if x0 is None else np.asarray(x0, dtype=float)
    if not geo.set.contains(x0):
        raise DomainError("initial point is not feasible")
    P, H = scenario.table
    ext = _prediction_table(predictor, scenario.T, scenario.d)
    geom = kernels.GEOM_SIMPLEX if geo.is_simplex else kernels.GEOM_BALL
    radius = 1.0 if geo.is_simplex else geo.set.radius
    center = np.zeros(scenario.d) if geo.is_simplex else geo.set.c
    arrays = kernels.aomd_loop(geom, radius, center, scenario.family, P, H, predictor.code, ext, x0,
                               float(L1), constants.r_max, constants.gamma, constants.r_max_sq,
                               doubling, tuning, scenario.c_increments, scenario.v_increments, c_fn)
    return RunTrace(scenario, arrays, algorithm, constants)


def run_omd(scenario: Scenario, predictor=None, L: Optional[float] = None, *, tuning: str = "adaptive",
            x0=None, constants=None) -> RunTrace:
    """Run OMD with a fixed scale ``L`` (default 3 R_max) over the whole scenario.

    ``tuning="static"`` uses R_max min{1/(sqrt(D_{t-1}) + sqrt(D_{t-2})), 1}
    with unseeded sums instead, the schedule behind the static-regret ceiling.
    """
    predictor = LastGradient() if predictor is None else predictor
    constants = scenario.geometry.constants(scenario.T) if constants is None else constants
    L = 3.0 * constants.r_max if L is None else float(L)
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    codes = {"adaptive": kernels.TUNING_ADAPTIVE, "static": kernels.TUNING_STATIC}
    if tuning not in codes:
        raise ConfigError(f"unknown tuning {tuning!r}")
    return run_loop(scenario, predictor, L1=L, constants=constants, doubling=False,
                    tuning=codes[tuning], x0=x0, algorithm=f"omd-{tuning}")
