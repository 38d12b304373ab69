"""Adaptive Optimistic Mirror Descent: OMD restarted with a doubled scale.

Each round first tests the doubling condition on the current epoch's
trackers. When it fires, a new epoch starts with scale L_N = 3 R_max 2^(N-1)
and fresh trackers. The secondary iterate carries over (warm start), and so does
the step size already committed for the current round.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from . import kernels
from .environment import Scenario
from .errors import ConfigError, DomainError
from .omd import EpochState, RunTrace, run_loop
from .predictor import LastGradient

__all__ = ["EpochState", "MinimizerPath", "StrategyClass", "doubling_check", "aomd_run"]


class MinimizerPath:
    """C_(N) accumulates the path length of the per-round minimizers."""

    name = "minimizer_path"

    def bind(self, scenario: Scenario):
        for t, f in enumerate(scenario.losses, 1):
            if not callable(getattr(f, "minimizer", None)):
                raise ConfigError(f"round {t}: loss has no minimizer, required by {self.name}")
        return None


class StrategyClass:
    """C_(N) is a user functional of the epoch's losses ``f_{k_N..t}``.

    ``fn(losses)`` receives the list of losses since the epoch began and must be
    non-decreasing as the list grows; a decrease raises :class:`DomainError`.
    Evaluation is from scratch each round, so cost is quadratic in epoch length.
    """

    name = "strategy_class"

    def __init__(self, fn: Callable[[Sequence], float]):
        self.fn = fn

    @classmethod
    def constant(cls) -> "StrategyClass":
        """Constant comparators: zero regularity, so the condition reduces to L^2 < 4 R^2."""
        return cls(lambda losses: 0.0)

    def bind(self, scenario: Scenario):
        losses = scenario.losses
        last = {"k": -1, "v": 0.0}

        def c_fn(k: int, t: int) -> float:
            v = float(self.fn(losses[k:t + 1]))
            if not v >= 0.0:
                raise DomainError(f"round {t + 1}: strategy regularity must be >= 0, got {v}")
            if k == last["k"] and v < last["v"]:
                raise DomainError(f"round {t + 1}: strategy regularity decreased "
                                  f"({last['v']} -> {v}) within an epoch")
            last["k"], last["v"] = k, v
            return v

        return c_fn


def doubling_check(e: EpochState, gamma: float, r_max_sq: float) -> bool:
    """True iff L_N^2 < gamma min{C, V^(2/3) Delta^(2/3) D^(-1/3)} + 4 R^2.

    The min term is taken as 0 when C or V is 0.
    """
    if e.d_epoch < 1.0 or e.delta < 0 or e.c_epoch < 0 or e.v_epoch < 0:
        raise DomainError(f"invalid epoch state {e}")
    return bool(kernels.doubling_fires(e.l_n, e.c_epoch, e.v_epoch, e.delta, e.d_epoch,
                                       gamma, r_max_sq))


def aomd_run(scenario: Scenario, predictor=None, tracker=None, T: Optional[int] = None, *,
             x0=None, constants=None) -> RunTrace:
    """Run AOMD over the first ``T`` rounds of ``scenario`` (all of them by default).

    ``constants`` defaults to the geometry's constants for the horizon; the
    first epoch uses L_1 = 3 R_max.
    """
    predictor = LastGradient() if predictor is None else predictor
    tracker = MinimizerPath() if tracker is None else tracker
    if T is not None and T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    horizon = scenario.T if T is None else T
    if horizon > scenario.T:
        raise ConfigError(f"horizon {horizon} exceeds the scenario length {scenario.T}")
    if horizon != scenario.T:
        scenario = Scenario(scenario.name, scenario.geometry, scenario.losses[:horizon],
                            scenario.seed, scenario.params)
    constants = scenario.geometry.constants(horizon) if constants is None else constants
    c_fn = tracker.bind(scenario)
    return run_loop(scenario, predictor, L1=3.0 * constants.r_max, constants=constants,
                    doubling=True, x0=x0, c_fn=c_fn, algorithm="aomd")
