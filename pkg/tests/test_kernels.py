import numpy as np
import pytest

from dynomd import environment as E
from dynomd import game as G
from dynomd import kernels
from dynomd.aomd import StrategyClass, aomd_run
from dynomd.omd import run_omd
from dynomd.predictor import External, LastGradient, SmoothBatchGradient, Zero

BACKENDS = kernels.available_backends()
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")

FUNCS = ("aomd_loop", "game_loop", "selfplay", "player_step", "doubling_fires")


def _use(monkeypatch, name):
    mod = BACKENDS[name]
    for f in FUNCS:
        monkeypatch.setattr(kernels, f, getattr(mod, f))


def _both(monkeypatch, fn):
    out = {}
    for name in ("python", "cython"):
        _use(monkeypatch, name)
        out[name] = fn()
    return out["python"], out["cython"]


def _same(a, b):
    assert a.tobytes() == b.tobytes()


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS


SCENARIOS = [
    lambda: E.make_alternating_experts(300),
    lambda: E.make_random_linear(300, 4, 1),
    lambda: E.make_random_quadratic(300, 3, 2),
    lambda: E.make_drifting_minimizer(300, 2, 0.05, 3, shock_at=200),
    lambda: E.make_smooth_batches(3, 100, E.batch_centers(3, 2, 4)),
]
PREDICTORS = [Zero, LastGradient, SmoothBatchGradient]


@needs_cython
@pytest.mark.parametrize("make", SCENARIOS)
@pytest.mark.parametrize("pred", PREDICTORS)
def test_aomd_parity(monkeypatch, make, pred):
    sc = make()
    a, b = _both(monkeypatch, lambda: aomd_run(sc, pred()))
    for key in ("x", "x_hat", "grad", "pred", "loss", "eta", "eta_next", "L", "dev", "D_epoch",
                "C_epoch", "V_epoch"):
        _same(getattr(a, key), getattr(b, key))
    np.testing.assert_array_equal(a.epoch, b.epoch)


@needs_cython
@pytest.mark.parametrize("tuning", ["adaptive", "static"])
def test_omd_parity(monkeypatch, tuning):
    sc = E.make_random_quadratic(400, 2, 5)
    a, b = _both(monkeypatch, lambda: run_omd(sc, LastGradient(), tuning=tuning))
    _same(a.x, b.x)
    _same(a.eta, b.eta)


@needs_cython
def test_external_and_strategy_parity(monkeypatch):
    sc = E.make_random_linear(200, 3, 6)
    table = np.random.default_rng(0).normal(size=(200, 3))
    a, b = _both(monkeypatch, lambda: aomd_run(sc, External(table),
                                               tracker=StrategyClass(lambda fs: 0.5 * len(fs))))
    _same(a.x, b.x)
    np.testing.assert_array_equal(a.epoch, b.epoch)


@needs_cython
def test_doubling_parity():
    py, cy = BACKENDS["python"].doubling_fires, BACKENDS["cython"].doubling_fires
    rng = np.random.default_rng(1)
    for _ in range(2000):
        L, C, V, D = rng.uniform(0, 5, 4)
        args = (L, C * rng.integers(2), V * rng.integers(2), int(rng.integers(0, 50)), 1.0 + D,
                rng.uniform(0.5, 3), rng.uniform(0.5, 3))
        assert bool(py(*args)) == bool(cy(*args))


@needs_cython
@pytest.mark.parametrize("honest", [True, False])
def test_game_parity(monkeypatch, honest):
    sched = G.random_schedule(300, 3, 4, 3, seed=2)
    if honest:
        run = lambda: G.run_honest_game(sched, x0=[0.4, 0.3, 0.2, 0.1])
    else:
        run = lambda: G.run_vs_adversary(sched, None, G.UniformRandomOpponent(3))
    a, b = _both(monkeypatch, run)
    for key in ("x", "f", "payoff", "eta", "eta_prime", "F", "A_acc", "x_hat_mixed"):
        _same(getattr(a, key), getattr(b, key))


@needs_cython
def test_player_step_parity():
    rng = np.random.default_rng(3)
    for _ in range(200):
        k = int(rng.integers(2, 6))
        xm = rng.dirichlet(np.ones(k)).tolist()
        g, gp = rng.uniform(-1, 1, k).tolist(), rng.uniform(-1, 1, k).tolist()
        args = (xm, g, rng.uniform(0.001, 0.1), rng.uniform(0, 5), gp, 1e-4, 5.0, 0.7)
        pa, ca = BACKENDS["python"].player_step(*args), BACKENDS["cython"].player_step(*args)
        for u, v in zip(pa, ca):
            assert np.asarray(u, float).tobytes() == np.asarray(v, float).tobytes()


@needs_cython
def test_selfplay_parity():
    A = np.random.default_rng(4).uniform(-1, 1, (3, 4))
    args = (A, np.full(4, 0.25), np.full(3, 1 / 3), np.zeros(4), np.zeros(3), 500, 0.1)
    for u, v in zip(BACKENDS["python"].selfplay(*args), BACKENDS["cython"].selfplay(*args)):
        _same(np.asarray(u, float), np.asarray(v, float))


def test_pure_python_env_switch(monkeypatch):
    import importlib
    monkeypatch.setenv("DYNOMD_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("DYNOMD_PURE_PYTHON")
        importlib.reload(kernels)
