"""Predictable sequences M_t, computed from information available before round t."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, PredictorExhausted


@dataclass
class History:
    """What the learner knows at the start of a round.

    ``grads`` and ``losses`` cover rounds ``1..t-1``; ``x_hat`` is the secondary
    iterate after round ``t-1``. The current round's loss is never exposed.
    """

    dim: int
    grads: List[np.ndarray] = field(default_factory=list)
    losses: list = field(default_factory=list)
    x_hat: Optional[np.ndarray] = None

    @property
    def t(self) -> int:
        return len(self.grads) + 1


class Zero:
    code = kernels.PRED_ZERO
    name = "zero"

    def predict(self, history: History) -> np.ndarray:
        return np.zeros(history.dim)


class LastGradient:
    """M_t = grad_{t-1}; the zero vector at t = 1."""

    code = kernels.PRED_LAST
    name = "last_gradient"

    def predict(self, history: History) -> np.ndarray:
        if not history.grads:
            return np.zeros(history.dim)
        return np.array(history.grads[-1], dtype=float)


class SmoothBatchGradient:
    """M_t = grad f_{t-1}(x_hat_{t-1}): the last revealed loss at the secondary iterate.

    Inside a batch of repeated smooth losses this is the Mirror Prox extra-gradient
    point; at a batch switch it still uses the previous batch's function.
    """

    code = kernels.PRED_SMOOTH
    name = "smooth_batch"

    def predict(self, history: History) -> np.ndarray:
        if not history.losses:
            return np.zeros(history.dim)
        return np.asarray(history.losses[-1].gradient(history.x_hat), dtype=float)


class External:
    """A fixed stream of predictions, one dual vector per round."""

    code = kernels.PRED_EXTERNAL
    name = "external"

    def __init__(self, values: Sequence):
        self.values = np.atleast_2d(np.asarray(values, dtype=float))
        self._it: Iterator[np.ndarray] = iter(self.values)

    def predict(self, history: History) -> np.ndarray:
        try:
            m = next(self._it)
        except StopIteration:
            raise PredictorExhausted(f"external predictions ran out at round {history.t}")
        if m.shape != (history.dim,):
            raise ConfigError(f"external prediction has shape {m.shape}, want ({history.dim},)")
        return m.copy()

    def table(self, T: int, dim: int) -> np.ndarray:
        if self.values.shape[0] < T:
            raise PredictorExhausted(
                f"external stream has {self.values.shape[0]} rows, horizon is {T}")
        if self.values.shape[1] != dim:
            raise ConfigError(f"external predictions have {self.values.shape[1]} columns, want {dim}")
        return self.values[:T]

    @classmethod
    def from_csv(cls, path, columns: Optional[Sequence[str]] = None) -> "External":
        """Read one vector per row; by default every column whose name starts with ``m``."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ConfigError(f"{path}: no prediction rows")
        if columns is None:
            columns = [c for c in rows[0] if c.startswith("m")]
        if not columns:
            raise ConfigError(f"{path}: no prediction columns (expected m0, m1, ...)")
        return cls([[float(r[c]) for c in columns] for r in rows])


PredictorStrategy = Zero | LastGradient | SmoothBatchGradient | External

_BY_NAME = {"zero": Zero, "last_gradient": LastGradient, "smooth_batch": SmoothBatchGradient}


def predict(strategy, history: History) -> np.ndarray:
    return strategy.predict(history)


def by_name(name: str):
    try:
        return _BY_NAME[name]()
    except KeyError:
        raise ConfigError(f"unknown predictor {name!r}; choose from {sorted(_BY_NAME)} or external")
