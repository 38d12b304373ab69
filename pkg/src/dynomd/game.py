"""Drifting two-player zero-sum games played with mixed exponential weights.

Player I picks x in the n-simplex and pays f^T A x; Player II picks f in the
m-simplex and receives it. Both run optimistic exponential weights on their
last observed vector (f^T A for Player I, -A x for Player II), mix in
beta = 1/T^2 of the uniform distribution, and adapt the step size to the
accumulated squared sup-norm change of those vectors.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _pykernels, kernels
from .errors import ConfigError, ConvergenceError, DimensionError, DomainError

ENTRY_TOL = 1e-12


# ---------------------------------------------------------------- schedules

@dataclass(frozen=True)
class GameSchedule:
    """Piecewise-constant matrix sequence: ``matrices[b]`` is played ``durations[b]`` rounds."""

    matrices: tuple
    durations: tuple

    def __post_init__(self):
        mats = tuple(np.array(a, dtype=float, ndmin=2) for a in self.matrices)
        durs = tuple(int(d) for d in self.durations)
        if not mats:
            raise ConfigError("schedule needs at least one matrix")
        if len(mats) != len(durs):
            raise ConfigError(f"{len(mats)} matrices but {len(durs)} durations")
        shape = mats[0].shape
        for b, (a, d) in enumerate(zip(mats, durs)):
            if a.ndim != 2 or a.shape != shape:
                raise DimensionError(f"matrix {b} has shape {a.shape}, expected {shape}")
            if not np.all(np.isfinite(a)) or np.abs(a).max() > 1.0 + ENTRY_TOL:
                raise DomainError(f"matrix {b} has entries outside [-1, 1]")
            if d < 1:
                raise ConfigError(f"matrix {b} has duration {d} < 1")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "durations", durs)

    @classmethod
    def fixed(cls, A, T: int) -> "GameSchedule":
        return cls((A,), (T,))

    @classmethod
    def from_sequence(cls, mats: Sequence) -> "GameSchedule":
        """Compress a per-round list of matrices into blocks of equal consecutive matrices."""
        blocks, durs = [], []
        for a in mats:
            a = np.asarray(a, dtype=float)
            if blocks and blocks[-1].shape == a.shape and np.array_equal(blocks[-1], a):
                durs[-1] += 1
            else:
                blocks.append(a)
                durs.append(1)
        return cls(tuple(blocks), tuple(durs))

    @property
    def T(self) -> int:
        return sum(self.durations)

    @property
    def m(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def n(self) -> int:
        return self.matrices[0].shape[1]

    @property
    def stack(self) -> np.ndarray:
        return np.stack(self.matrices)

    @property
    def index(self) -> np.ndarray:
        """Block index of every round."""
        return np.repeat(np.arange(len(self.durations)), self.durations)

    @property
    def starts(self) -> np.ndarray:
        """0-based first round of every block."""
        return np.concatenate([[0], np.cumsum(self.durations)[:-1]])

    def matrix_at(self, t: int) -> np.ndarray:
        """Matrix of 1-based round ``t``."""
        return self.matrices[int(self.index[t - 1])]

    @property
    def switches(self) -> int:
        """K: number of rounds whose matrix differs from the previous round's."""
        return sum(not np.array_equal(a, b) for a, b in zip(self.matrices[:-1], self.matrices[1:]))

    def drift(self) -> np.ndarray:
        """Per-round max-entry change ||A_t - A_{t-1}||, with A_0 = A_1."""
        out = np.zeros(self.T)
        for b in range(1, len(self.matrices)):
            out[self.starts[b]] = np.abs(self.matrices[b] - self.matrices[b - 1]).max()
        return out

    @classmethod
    def from_json(cls, path) -> "GameSchedule":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict) or "matrices" not in data:
            raise ConfigError(f"{path}: expected an object with 'matrices' and 'durations'")
        durs = data.get("durations", [1] * len(data["matrices"]))
        return cls(tuple(data["matrices"]), tuple(durs))

    @classmethod
    def from_csv(cls, path) -> "GameSchedule":
        """Rows ``duration,rows,cols,a_11,a_12,...`` (entries row-major); a header row is optional."""
        mats, durs = [], []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or row[0].strip().startswith("#"):
                    continue
                if lineno == 1 and not row[0].strip().lstrip("-").isdigit():
                    continue
                try:
                    d, r, c = int(row[0]), int(row[1]), int(row[2])
                    vals = [float(v) for v in row[3:]]
                except (ValueError, IndexError):
                    raise ConfigError(f"{path}: line {lineno}: malformed row") from None
                if len(vals) != r * c:
                    raise ConfigError(f"{path}: line {lineno}: expected {r * c} entries, got {len(vals)}")
                mats.append(np.array(vals).reshape(r, c))
                durs.append(d)
        return cls(tuple(mats), tuple(durs))

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"matrices": [a.tolist() for a in self.matrices],
                       "durations": list(self.durations)}, fh)


def random_schedule(T: int, m: int, n: int, K: int, seed: int = 0) -> GameSchedule:
    """K + 1 uniform [-1, 1] matrices switching at K distinct seeded rounds."""
    if T < 1 or K < 0 or K > T - 1:
        raise ConfigError(f"need T >= 1 and 0 <= K <= T - 1, got T={T}, K={K}")
    rng = np.random.default_rng(seed)
    mats = rng.uniform(-1.0, 1.0, size=(K + 1, m, n))
    cuts = np.sort(rng.choice(np.arange(1, T), size=K, replace=False)) if K else np.array([], int)
    edges = np.concatenate([[0], cuts, [T]])
    return GameSchedule(tuple(mats), tuple(np.diff(edges)))


# ---------------------------------------------------------------- players

def default_L(T: int, n: int) -> float:
    """1 / sqrt(log(T^2 n)), or 1 when that log is not positive."""
    lg = math.log(float(T) * float(T) * n)
    return 1.0 / math.sqrt(lg) if lg > 0 else 1.0


def game_step_size(L: float, T: int, dim: int, dev_acc_prev_prev: float, dev_acc_prev: float) -> float:
    """min{log(T^2 dim) L / (sqrt(acc_{t-1}) + sqrt(acc_{t-2})), 1/(32 L)}."""
    if not L > 0 or T < 1 or dim < 1 or dev_acc_prev_prev < 0 or dev_acc_prev < dev_acc_prev_prev:
        raise DomainError("invalid step-size inputs")
    cap = 1.0 / (32.0 * L)
    den = math.sqrt(dev_acc_prev) + math.sqrt(dev_acc_prev_prev)
    if den == 0.0:
        return cap
    return min(math.log(float(T) * float(T) * dim) * L / den, cap)


@dataclass
class PlayerState:
    """One player's state after playing ``x_play``; ``prev`` is the last observed vector."""

    x_hat: np.ndarray
    x_hat_mixed: np.ndarray
    x_play: np.ndarray
    eta: float
    dev_acc_prev: float
    dev_acc: float
    L: float
    beta: float
    logk: float
    prev: np.ndarray

    @classmethod
    def initial(cls, dim: int, T: int, L: float, x0=None) -> "PlayerState":
        if not L > 0:
            raise DomainError(f"L must be positive, got {L}")
        beta = 1.0 / (float(T) * float(T))
        x0 = np.full(dim, 1.0 / dim) if x0 is None else _simplex_point(x0, dim, "x0")
        xm = [(1.0 - beta) * v + beta / dim for v in x0.tolist()]
        eta = 1.0 / (32.0 * L)
        play = _pykernels.mirror_simplex(xm, [0.0] * dim, eta)
        return cls(x0.copy(), np.array(xm), np.array(play), eta, 0.0, 0.0, L, beta,
                   math.log(float(T) * float(T) * dim), np.zeros(dim))


def player_update(state: PlayerState, observed, predicted=None):
    """Exponential-weights step on ``observed``, mix, then the optimistic step on ``predicted``.

    ``predicted`` defaults to ``observed``, the prescribed choice. Returns
    ``(next_play, new_state)``.
    """
    g = [float(v) for v in np.asarray(observed, dtype=float)]
    if len(g) != len(state.x_play):
        raise DimensionError(f"observed vector has length {len(g)}, expected {len(state.x_play)}")
    xh, xm, F, eta_next, x_next = kernels.player_step(
        [float(v) for v in state.x_hat_mixed], g, state.eta, state.dev_acc,
        [float(v) for v in state.prev], state.beta, state.logk, state.L)
    if predicted is not None:
        x_next = _pykernels.mirror_simplex(list(xm), [float(v) for v in predicted], eta_next)
    new = PlayerState(np.asarray(xh, float), np.asarray(xm, float), np.asarray(x_next, float),
                      eta_next, state.dev_acc, F, state.L, state.beta, state.logk, np.array(g))
    return new.x_play, new


def _simplex_point(p, dim: int, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (dim,) or not np.all(np.isfinite(p)) or p.min() < -1e-9 or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"{what} is not a point of the {dim}-simplex: {p.tolist()}")
    return p


# ---------------------------------------------------------------- minimax

@dataclass
class MinimaxSolution:
    value: float
    x: np.ndarray
    y: np.ndarray
    gap: float


def _certify(A, x, y):
    upper = float((A @ x).max())
    lower = float((y @ A).min())
    return upper, lower


def _equalizer(A, S, R):
    """Least-squares equalizing strategies on supports S (columns) and R (rows)."""
    sub = A[np.ix_(R, S)]
    k, l = len(R), len(S)
    M = np.zeros((k + 1, l + 1))
    M[:k, :l] = sub
    M[:k, l] = -1.0
    M[k, :l] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    xs = np.linalg.lstsq(M, rhs, rcond=None)[0][:l]
    N = np.zeros((l + 1, k + 1))
    N[:l, :k] = sub.T
    N[:l, k] = -1.0
    N[l, :k] = 1.0
    rhs = np.zeros(l + 1)
    rhs[l] = 1.0
    ys = np.linalg.lstsq(N, rhs, rcond=None)[0][:k]
    x = np.zeros(A.shape[1])
    y = np.zeros(A.shape[0])
    x[S] = np.clip(xs, 0.0, None)
    y[R] = np.clip(ys, 0.0, None)
    if x.sum() <= 0 or y.sum() <= 0:
        return None
    return x / x.sum(), y / y.sum()


def minimax_solution(A, tol: float = 1e-6, max_iter: int = 4_000_000, eta: float = 0.1) -> MinimaxSolution:
    """min_x max_f f^T A x with a duality-gap certificate ``gap <= tol``.

    Optimistic self-play supplies approximate strategies; their supports seed
    an equalizer solve. Whichever pair certifies first is returned.
    """
    A = np.array(A, dtype=float, ndmin=2)
    if A.ndim != 2 or A.size == 0:
        raise DimensionError(f"expected a nonempty matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)) or np.abs(A).max() > 1.0 + ENTRY_TOL:
        raise DomainError("matrix entries must lie in [-1, 1]")
    m, n = A.shape
    x = np.full(n, 1.0 / n)
    y = np.full(m, 1.0 / m)
    lx = np.zeros(n)
    ly = np.zeros(m)
    xs = np.zeros(n)
    ys = np.zeros(m)
    done = 0
    chunk = 256
    best_gap = math.inf
    while True:
        cands = [(x, y)]
        if done:
            xbar, ybar = xs / done, ys / done
            cands.append((xbar, ybar))
            for thr in (1e-2, 1e-3, 1e-4):
                S = np.flatnonzero(xbar > thr)
                R = np.flatnonzero(ybar > thr)
                if len(S) and len(R):
                    eq = _equalizer(A, S, R)
                    if eq is not None:
                        cands.append(eq)
        for cx, cy in cands:
            upper, lower = _certify(A, cx, cy)
            gap = upper - lower
            best_gap = min(best_gap, gap)
            if gap <= tol:
                return MinimaxSolution(0.5 * (upper + lower), cx, cy, max(gap, 0.0))
        if done >= max_iter:
            raise ConvergenceError(f"no certificate after {done} iterations (gap {best_gap:.3g})",
                                   gap=best_gap)
        it = min(chunk, max_iter - done)
        x, y, lx, ly, sx, sy = kernels.selfplay(A, x, y, lx, ly, it, eta)
        xs += sx
        ys += sy
        done += it
        chunk *= 2


def minimax_value(A, tol: float = 1e-6, max_iter: int = 4_000_000) -> float:
    """Value of the zero-sum game, to within ``tol / 2``."""
    return minimax_solution(A, tol, max_iter).value


# ---------------------------------------------------------------- opponents

class UniformRandomOpponent:
    """Seeded points drawn uniformly from the simplex (flat Dirichlet)."""

    adaptive = False

    def __init__(self, seed: int = 0):
        self.seed = seed

    def sequence(self, T: int, m: int) -> np.ndarray:
        return np.random.default_rng(self.seed).dirichlet(np.ones(m), size=T)


class FixedSequence:
    """A prescribed T x m array of points, played verbatim."""

    adaptive = False

    def __init__(self, points):
        self.points = np.asarray(points, dtype=float)

    def sequence(self, T: int, m: int) -> np.ndarray:
        if self.points.shape != (T, m):
            raise DimensionError(f"opponent sequence has shape {self.points.shape}, expected {(T, m)}")
        return self.points


class PrescribedOpponent:
    """Player II's own prescribed strategy, driven one round at a time."""

    adaptive = True

    def __init__(self, L: Optional[float] = None, f0=None):
        self.L = L
        self.f0 = f0

    def start(self, m: int, T: int, L: float) -> None:
        self.state = PlayerState.initial(m, T, self.L if self.L is not None else L, self.f0)

    def act(self, t: int) -> np.ndarray:
        return self.state.x_play

    def observe(self, t: int, ax: np.ndarray) -> None:
        _, self.state = player_update(self.state, -np.asarray(ax))


class GreedyOpponent:
    """Best response to the previous round's A x (row 0 on the first round)."""

    adaptive = True

    def start(self, m: int, T: int, L: float) -> None:
        self.m = m
        self.last = None

    def act(self, t: int) -> np.ndarray:
        e = np.zeros(self.m)
        e[0 if self.last is None else int(np.argmax(self.last))] = 1.0
        return e

    def observe(self, t: int, ax: np.ndarray) -> None:
        self.last = np.asarray(ax)


# ---------------------------------------------------------------- transcripts

TRANSCRIPT_SCALARS = ["payoff", "eta", "eta_prime", "F", "A_acc", "minimax"]


@dataclass
class GameTranscript:
    """Per-round record of a game; arrays are indexed by 0-based round.

    ``gI`` holds f_t^T A_t, ``AX`` holds A_t x_t, ``worst`` is max_i (A_t x_t)_i
    and ``best`` is min_j (f_t^T A_t)_j. ``br_I``/``br_II`` are the
    lowest-index best-response vertices of each player.
    """

    schedule: GameSchedule
    L: float
    x: np.ndarray
    f: np.ndarray
    payoff: np.ndarray
    eta: np.ndarray
    eta_prime: np.ndarray
    F: np.ndarray
    A_acc: np.ndarray
    gI: np.ndarray
    AX: np.ndarray
    worst: np.ndarray
    best: np.ndarray
    br_I: np.ndarray
    br_II: np.ndarray
    x_hat_mixed: np.ndarray
    f_hat_mixed: Optional[np.ndarray] = None
    honest: bool = True
    minimax: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.minimax is None:
            vals = [minimax_value(a) for a in self.schedule.matrices]
            self.minimax = np.asarray(vals)[self.schedule.index]

    @property
    def T(self) -> int:
        return len(self.payoff)

    @property
    def beta(self) -> float:
        return 1.0 / (float(self.T) * float(self.T))

    @property
    def c_T(self) -> float:
        """l1 path length of Player I's best-response vertices."""
        return 2.0 * float(np.count_nonzero(np.diff(self.br_I)))

    @property
    def c_T_prime(self) -> float:
        return 2.0 * float(np.count_nonzero(np.diff(self.br_II)))

    @property
    def drift_sum(self) -> float:
        return float(self.schedule.drift().sum())

    @property
    def drift_sq_sum(self) -> float:
        return float((self.schedule.drift() ** 2).sum())

    @property
    def lcon(self) -> bool:
        """2 L^2 > max{C_T, C'_T} + 3."""
        return 2.0 * self.L * self.L > max(self.c_T, self.c_T_prime) + 3.0

    @property
    def honest_gap(self) -> float:
        """sum_t max_f f^T A_t x_t - sum_t minimax(A_t)."""
        return float(self.worst.sum() - self.minimax.sum())

    def average_gap(self) -> float:
        return self.honest_gap / self.T

    def regret_against(self, u) -> float:
        """sum_t f_t^T A_t (x_t - u_t) for a comparator sequence ``u`` (T x n, or one point)."""
        u = np.broadcast_to(np.asarray(u, dtype=float), self.x.shape)
        return float(self.payoff.sum() - np.einsum("tj,tj->", self.gI, u))

    def honest_rhs(self) -> float:
        return honest_rhs(self.T, self.schedule.n, self.schedule.m, self.L, self.c_T,
                          self.c_T_prime, self.drift_sum, self.drift_sq_sum)

    def dishonest_rhs(self, c_u: float) -> float:
        return dishonest_rhs(self.T, self.schedule.n, self.L, c_u, float(self.F[-1]))

    def to_csv(self, path) -> None:
        n, m = self.schedule.n, self.schedule.m
        cols = [self.payoff, self.eta, self.eta_prime, self.F, self.A_acc, self.minimax]
        block = self.schedule.index
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "block"] + [f"x_{j}" for j in range(n)] + [f"f_{i}" for i in range(m)]
                       + TRANSCRIPT_SCALARS)
            for t in range(self.T):
                w.writerow([t + 1, int(block[t])] + [f"{v:.17g}" for v in self.x[t]]
                           + [f"{v:.17g}" for v in self.f[t]] + [f"{c[t]:.17g}" for c in cols])


def honest_rhs(T: int, n: int, m: int, L: float, c_T: float, c_T_prime: float,
               drift_sum: float, drift_sq_sum: float) -> float:
    """Slack of the both-honest bound: sum_t max_f f^T A_t x_t minus the summed game values."""
    lt = math.log(float(T) * float(T) * n)
    lt2 = math.log(float(T) * float(T) * m)
    l4 = math.log(float(T) ** 4 * n * m)
    return (256.0 * L / T + 1.0 / (2.0 * L) + 4.0 * drift_sum
            + 32.0 * L * (lt * c_T + lt2 * c_T_prime + 2.0 * l4)
            + (c_T + c_T_prime + 4.0) * (20.0 + 4.0 * math.sqrt(drift_sq_sum)) / L)


def dishonest_rhs(T: int, n: int, L: float, c_u: float, F_T: float) -> float:
    """Player I's regret ceiling against a comparator path of l1 length ``c_u``."""
    lt = math.log(float(T) * float(T) * n)
    if lt <= 0:
        raise DomainError("log(T^2 n) must be positive (T = n = 1 is degenerate)")
    sF = math.sqrt(F_T)
    return 2.0 * lt * (c_u + 2.0) * (32.0 * L + 2.0 * sF / (lt * L)) + lt * L / 2.0 * sF


def best_constant_action(tr: GameTranscript) -> np.ndarray:
    """Vertex minimizing Player I's cumulative loss, lowest index on ties."""
    e = np.zeros(tr.schedule.n)
    e[int(np.argmin(tr.gI.sum(axis=0)))] = 1.0
    return e


def best_switching_actions(tr: GameTranscript, starts=None) -> np.ndarray:
    """Per-segment best vertices; segments default to the schedule's matrix blocks."""
    starts = tr.schedule.starts if starts is None else np.asarray(starts)
    edges = list(starts) + [tr.T]
    u = np.zeros_like(tr.x)
    for a, b in zip(edges[:-1], edges[1:]):
        u[a:b, int(np.argmin(tr.gI[a:b].sum(axis=0)))] = 1.0
    return u


def path_length(u) -> float:
    u = np.atleast_2d(np.asarray(u, dtype=float))
    return float(np.abs(np.diff(u, axis=0)).sum()) if len(u) > 1 else 0.0


# ---------------------------------------------------------------- runners

def _start(schedule: GameSchedule, x0, f0):
    x0 = np.full(schedule.n, 1.0 / schedule.n) if x0 is None else _simplex_point(x0, schedule.n, "x0")
    f0 = np.full(schedule.m, 1.0 / schedule.m) if f0 is None else _simplex_point(f0, schedule.m, "f0")
    return x0, f0


def _transcript(schedule, L, res, honest) -> GameTranscript:
    return GameTranscript(schedule, L, res["x"], res["f"], res["payoff"], res["eta"], res["eta2"],
                          res["F"], res["Fa"], res["gI"], res["AX"], res["worst"], res["best"],
                          res["br_I"], res["br_II"], res["x_hat_mixed"],
                          res["f_hat_mixed"] if honest else None, honest)


def run_honest_game(schedule: GameSchedule, L: Optional[float] = None, x0=None, f0=None) -> GameTranscript:
    """Both players follow the prescribed strategy for ``schedule.T`` rounds."""
    L = default_L(schedule.T, schedule.n) if L is None else float(L)
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    x0, f0 = _start(schedule, x0, f0)
    res = kernels.game_loop(schedule.stack, schedule.index, L, x0, f0)
    return _transcript(schedule, L, res, True)


def run_vs_adversary(schedule: GameSchedule, L: Optional[float], opponent, x0=None) -> GameTranscript:
    """Player I follows the prescribed strategy against an arbitrary Player II.

    Non-adaptive opponents expose ``sequence(T, m)``; adaptive ones expose
    ``start(m, T, L)``, ``act(t)`` and ``observe(t, A_t x_t)``.
    """
    T, m, n = schedule.T, schedule.m, schedule.n
    L = default_L(T, n) if L is None else float(L)
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    x0, f0 = _start(schedule, x0, None)
    if not getattr(opponent, "adaptive", False):
        seq = np.asarray(opponent.sequence(T, m), dtype=float)
        for t, p in enumerate(seq, 1):
            _check_opponent(p, m, t)
        res = kernels.game_loop(schedule.stack, schedule.index, L, x0, f0, seq)
        return _transcript(schedule, L, res, False)
    return _transcript(schedule, L, _adaptive_loop(schedule, L, x0, opponent), False)


def _check_opponent(p, m, t):
    p = np.asarray(p, dtype=float)
    if p.shape != (m,) or not np.all(np.isfinite(p)) or p.min() < -1e-9 or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"round {t}: opponent played an invalid point {np.asarray(p).tolist()}")


def _adaptive_loop(schedule: GameSchedule, L: float, x0, opponent) -> dict:
    # Same arithmetic order as kernels.game_loop, so honest play reproduces it bit for bit.
    T, m, n = schedule.T, schedule.m, schedule.n
    mats = [a.tolist() for a in schedule.matrices]
    idx = schedule.index
    opponent.start(m, T, L)
    me = PlayerState.initial(n, T, L, x0)
    keys = ("x", "f", "x_hat_mixed", "gI", "AX")
    out = {k: [None] * T for k in keys}
    sc = {k: [0.0] * T for k in ("payoff", "eta", "eta2", "F", "Fa", "worst", "best")}
    brI, brII = [0] * T, [0] * T
    Fa = 0.0
    hprev = [0.0] * m
    for t in range(T):
        At = mats[idx[t]]
        f = np.asarray(opponent.act(t + 1), dtype=float)
        _check_opponent(f, m, t + 1)
        f = f.tolist()
        x = me.x_play.tolist()
        out["x"][t], out["f"][t] = x, f
        sc["eta"][t] = me.eta
        gI = [0.0] * n
        for j in range(n):
            s = 0.0
            for i in range(m):
                s += f[i] * At[i][j]
            gI[j] = s
        AX = [0.0] * m
        for i in range(m):
            s = 0.0
            for j in range(n):
                s += At[i][j] * x[j]
            AX[i] = s
        pay = 0.0
        for i in range(m):
            pay += f[i] * AX[i]
        sc["payoff"][t] = pay
        b = 0
        for j in range(1, n):
            if gI[j] < gI[b]:
                b = j
        brI[t], sc["best"][t] = b, gI[b]
        b = 0
        for i in range(1, m):
            if AX[i] > AX[b]:
                b = i
        brII[t], sc["worst"][t] = b, AX[b]
        out["gI"][t], out["AX"][t] = gI, AX
        sc["eta2"][t] = getattr(getattr(opponent, "state", None), "eta", math.nan)
        _, me = player_update(me, gI)
        opponent.observe(t + 1, np.array(AX))
        h = [-AX[i] for i in range(m)]
        mm = 0.0
        for i in range(m):
            a = abs(h[i] - hprev[i])
            if a > mm:
                mm = a
        Fa = Fa + mm * mm
        hprev = h
        sc["F"][t], sc["Fa"][t] = me.dev_acc, Fa
        out["x_hat_mixed"][t] = me.x_hat_mixed.tolist()
    res = {k: np.array(v, dtype=float) for k, v in sc.items()}
    for k, v in out.items():
        res[k] = np.array(v, dtype=float)
    res["br_I"] = np.array(brI, dtype=np.int64)
    res["br_II"] = np.array(brII, dtype=np.int64)
    res["f_hat_mixed"] = None
    return res
