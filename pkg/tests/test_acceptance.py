"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line. The lines are
also collected and shown in the terminal summary; run this file directly to
print them without pytest.
"""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from dynomd import environment as E
from dynomd import game as G
from dynomd.aomd import aomd_run
from dynomd.geometry import Ball, HalfSquaredEuclidean, NegativeEntropy, Simplex, mirror_step
from dynomd.metrics import epoch_bound, lemma1_rhs, theorem1_rhs
from dynomd.omd import run_omd, static_regret_bound
from dynomd.predictor import LastGradient, SmoothBatchGradient

from oracles import entropic_step, euclidean_step, game_value_grid

ROOT = Path(__file__).resolve().parents[1]
RESULTS = []


def verdict(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# ---------------------------------------------------------------- 1

def test_c01_mirror_step_oracle():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    ent, euc = NegativeEntropy(), HalfSquaredEuclidean()
    worst, count = 0.0, 0
    for k in range(200):
        d = 1 + k % 3
        eta, g = rng.uniform(0.05, 3.0), rng.uniform(-2, 2, d)
        c = rng.uniform(-0.5, 0.5, d)
        ball = Ball(d, 1.5, tuple(c))
        xp = ball.sample(rng, 1)[0]
        got = mirror_step(euc, ball, eta, g, xp)
        worst = max(worst, np.abs(got - euclidean_step(eta, g, xp, c, 1.5)).max())
        ds = 2 + k % 2
        g = rng.uniform(-2, 2, ds)
        xp = Simplex(ds).sample(rng, 1, floor=0.02)[0]
        got = mirror_step(ent, Simplex(ds), eta, g, xp)
        worst = max(worst, np.abs(got - entropic_step(eta, g, xp)).max())
        count += 2
    dt = time.time() - t0
    verdict(1, worst <= 1e-5 and dt < 60, f"{count} instances, max error {worst:.2e}, {dt:.1f}s")


# ---------------------------------------------------------------- 2, 3

def _lemma_scenarios():
    for seed in range(20):
        for kind, d in (("simplex", 2), ("simplex", 5), ("ball", 2), ("ball", 5)):
            for T in (100, 2000):
                if kind == "simplex":
                    yield E.make_random_linear(T, d, seed), seed
                else:
                    yield E.make_random_quadratic(T, d, seed), seed


def test_c02_lemma1_every_prefix():
    t0 = time.time()
    worst, runs = -math.inf, 0
    for sc, seed in _lemma_scenarios():
        k = sc.geometry.constants(sc.T)
        rng = np.random.default_rng(10_000 + seed)
        comps = {"constant": np.tile(sc.geometry.set.sample(rng, 1)[0], (sc.T, 1)),
                 "minimizers": sc.minimizers,
                 "random": sc.geometry.set.sample(rng, sc.T)}
        for mult in (2.5, 3.0, 6.0, 12.0):
            L = mult * k.r_max
            tr = run_omd(sc, LastGradient(), L)
            for U in comps.values():
                lhs = tr.regret_against(U)
                rhs = lemma1_rhs(L, tr.D_cum, tr.comparator_regularity(U), k.gamma, k.r_max_sq)
                worst = max(worst, float((lhs - rhs).max()))
            runs += 1
    dt = time.time() - t0
    verdict(2, worst <= 1e-6 and dt < 120,
            f"{runs} runs x 3 comparators, max(lhs - rhs) over all prefixes {worst:.3g}, {dt:.1f}s")


def test_c03_static_recovery():
    worst, runs = -math.inf, 0
    for sc, seed in _lemma_scenarios():
        k = sc.geometry.constants(sc.T)
        tr = run_omd(sc, LastGradient(), tuning="static")
        rng = np.random.default_rng(20_000 + seed)
        D_T = float(tr.dev.sum())
        rhs = static_regret_bound(k.r_max_sq, D_T)
        for u in (sc.best_fixed_action(), sc.geometry.set.sample(rng, 1)[0]):
            reg = float(tr.loss.sum() - sc.values_at(u).sum())
            worst = max(worst, reg - rhs)
        runs += 1
    verdict(3, worst <= 1e-6, f"{runs} runs, max(regret - 4R(sqrt(D)+1)) {worst:.3g}")


# ---------------------------------------------------------------- 4, 6

def _aomd_runs():
    for T in (1000, 10_000):
        yield "alternating_experts", aomd_run(E.make_alternating_experts(T))
        yield "fixed_best_expert", aomd_run(E.make_fixed_best_expert(T))
        for B in (1, 2, 10):
            sc = E.make_smooth_batches(B, T // B, E.batch_centers(B, 2, seed=0))
            yield f"smooth_batch B={B}", aomd_run(sc, SmoothBatchGradient())
        for sigma in (0.0, 0.01):
            yield f"drifting sigma={sigma}", aomd_run(E.make_drifting_minimizer(T, 2, sigma, seed=7))


AOMD_RUNS = {}


def _aomd_traces():
    if not AOMD_RUNS:
        for name, tr in _aomd_runs():
            AOMD_RUNS[(name, tr.T)] = tr
    return AOMD_RUNS


def test_c04_theorem1_and_epochs():
    t0 = time.time()
    worst_gap, ok = -math.inf, True
    for (name, T), tr in _aomd_traces().items():
        k = tr.constants
        rhs = theorem1_rhs(tr.measures(), T, k.gamma, k.r_max_sq, tr.scenario.g_bound)
        nb = epoch_bound(T, k.gamma, k.r_max_sq)
        ok &= tr.dynamic_regret <= rhs + 1e-6 and tr.n_epochs <= nb
        worst_gap = max(worst_gap, tr.dynamic_regret - rhs)
    dt = time.time() - t0
    verdict(4, ok and dt < 300, f"{len(AOMD_RUNS)} runs, max(Reg - rhs) {worst_gap:.4g}, "
            f"epochs within bound, {dt:.1f}s")


def _conservation_error(tr):
    eps = tr.epochs
    ms = tr.measures()
    return max(abs(sum(e.delta for e in eps) - tr.T),
               abs(sum(e.d_epoch for e in eps) - (ms.d_t + len(eps))),
               abs(sum(e.c_epoch for e in eps) - ms.c_t),
               abs(sum(e.v_epoch for e in eps) - ms.v_t))


def test_c06_tracker_conservation():
    traces = list(_aomd_traces().values())
    traces.append(aomd_run(E.make_drifting_minimizer(1000, 2, 0.01, 7, shock_at=800)))
    traces += [aomd_run(E.make_random_quadratic(2000, 3, s)) for s in range(5)]
    err = max(_conservation_error(tr) for tr in traces)
    multi = sum(tr.n_epochs > 1 for tr in traces)
    verdict(6, err <= 1e-9, f"{len(traces)} runs ({multi} with restarts), max error {err:.2e}")


# ---------------------------------------------------------------- 5

def test_c05_closed_forms():
    err = 0.0
    for T in (2, 100, 1000, 10_000):
        a = E.make_alternating_experts(T)
        f = E.make_fixed_best_expert(T)
        err = max(err, abs(a.c_increments.sum() - 2 * (T - 1)), abs(a.v_increments.sum() - (T - 1) / T),
                  abs(f.c_increments.sum()), abs(f.v_increments.sum() - (T - 1) / 2))
    verdict(5, err <= 1e-9, f"max deviation from closed forms {err:.2e}")


# ---------------------------------------------------------------- 7

def test_c07_non_monotone_step():
    tr = aomd_run(E.make_drifting_minimizer(1000, 2, 0.01, seed=7, shock_at=800))
    boundaries = np.flatnonzero(np.diff(tr.epoch)) + 1
    ups = [int(i) + 1 for i in boundaries if tr.eta_next[i] > tr.eta[i]]
    verdict(7, len(boundaries) >= 1 and len(ups) >= 1,
            f"{len(boundaries)} epoch transition(s), step size rises after round(s) {ups}")


# ---------------------------------------------------------------- 8

def test_c08_mirror_prox_regime():
    c = E.batch_centers(1, 2, seed=0)
    regs = {T: aomd_run(E.make_smooth_batches(1, T, c), SmoothBatchGradient()).dynamic_regret
            for T in (100, 1000, 10_000)}
    r_total = regs[10_000] / regs[100]
    r_steps = [regs[1000] / regs[100], regs[10_000] / regs[1000]]
    ok = r_total < 10.0 and all(r < math.sqrt(10) for r in r_steps)
    verdict(8, ok, "Reg_T " + ", ".join(f"T={T}: {v:.4g}" for T, v in regs.items())
            + f"; Reg_1e4/Reg_1e2 = {r_total:.3f} < 10")


# ---------------------------------------------------------------- 9

def test_c09_honest_game():
    t0 = time.time()
    pennies = [[1.0, -1.0], [-1.0, 1.0]]
    x0, f0 = [0.8, 0.2], [0.3, 0.7]
    big = G.run_honest_game(G.GameSchedule.fixed(pennies, 10_000), x0=x0, f0=f0)
    small = G.run_honest_game(G.GameSchedule.fixed(pennies, 100), x0=x0, f0=f0)
    bound_ok = (not big.lcon) or big.honest_gap <= big.honest_rhs() + 1e-6
    # a scale large enough for the premise, so the five-term bound is exercised
    wide = G.run_honest_game(G.GameSchedule.fixed(pennies, 10_000), L=60.0, x0=x0, f0=f0)
    wide_ok = wide.lcon and wide.honest_gap <= wide.honest_rhs() + 1e-6
    gaps = (small.average_gap(), big.average_gap())
    dt = time.time() - t0
    ok = bound_ok and wide_ok and gaps[1] < gaps[0] and dt < 60
    verdict(9, ok, f"default L: premise {'held' if big.lcon else 'did not hold'}; "
            f"L=60: gap {wide.honest_gap:.4g} <= rhs {wide.honest_rhs():.4g}; "
            f"average gap T=1e2 {gaps[0]:.4g} > T=1e4 {gaps[1]:.4g}; {dt:.1f}s")


# ---------------------------------------------------------------- 10

def best_k_switch(gI, K):
    """Vertex path with at most K switches minimizing sum_t <g_t, u_t>, by dynamic programming."""
    T, n = gI.shape
    cost = np.full((K + 1, n), np.inf)
    cost[0] = gI[0]
    back = np.zeros((T, K + 1, n), dtype=int)
    for t in range(1, T):
        new = np.full((K + 1, n), np.inf)
        for k in range(K + 1):
            stay = cost[k]
            if k:
                j = int(np.argmin(cost[k - 1]))
                move = np.full(n, cost[k - 1][j])
            else:
                move = np.full(n, np.inf)
            pick = move < stay
            new[k] = np.where(pick, move, stay) + gI[t]
            back[t, k] = np.where(pick, -1 - (j if k else 0), np.arange(n))
        cost = new
    k, j = np.unravel_index(np.argmin(cost), cost.shape)
    path = np.zeros(T, dtype=int)
    for t in range(T - 1, -1, -1):
        path[t] = j
        if t:
            b = back[t, k, j]
            if b < 0:
                j, k = -1 - b, k - 1
    U = np.zeros((T, n))
    U[np.arange(T), path] = 1.0
    return U


def test_best_k_switch_matches_enumeration():
    import itertools
    rng = np.random.default_rng(0)
    for _ in range(30):
        T, n, K = 6, int(rng.integers(2, 4)), int(rng.integers(0, 3))
        g = rng.uniform(-1, 1, (T, n))
        brute = min(sum(g[t, p[t]] for t in range(T)) for p in itertools.product(range(n), repeat=T)
                    if sum(a != b for a, b in zip(p, p[1:])) <= K)
        U = best_k_switch(g, K)
        assert np.einsum("tj,tj->", g, U) == pytest.approx(brute, abs=1e-12)
        assert G.path_length(U) <= 2 * K


def test_c10_dishonest_game():
    worst, runs = -math.inf, 0
    for seed in range(20):
        for size in (2, 3):
            for K in (0, 1, 3):
                sched = G.random_schedule(500, size, size, K, seed=seed)
                for opp in (G.UniformRandomOpponent(seed), G.GreedyOpponent()):
                    tr = G.run_vs_adversary(sched, None, opp)
                    comps = [G.best_constant_action(tr), G.best_switching_actions(tr),
                             best_k_switch(tr.gI, K)]
                    for U in comps:
                        worst = max(worst, tr.regret_against(U) - tr.dishonest_rhs(G.path_length(U)))
                    runs += 1
    verdict(10, worst <= 1e-6, f"{runs} runs, max(regret - rhs) {worst:.4g}")


# ---------------------------------------------------------------- 11

def test_c11_minimax():
    rng = np.random.default_rng(11)
    err = 0.0
    for _ in range(50):
        A = rng.uniform(-1, 1, (3, 3))
        err = max(err, abs(G.minimax_value(A) - game_value_grid(A)))
    exact = max(abs(G.minimax_value([[1.0, -1.0], [-1.0, 1.0]])),
                *(abs(G.minimax_value(np.full((3, 3), c)) - c) for c in (-1.0, -0.25, 0.0, 0.6, 1.0)))
    verdict(11, err <= 1e-3 and exact <= 1e-6,
            f"max |value - grid| {err:.2e} over 50 matrices; exact cases within {exact:.1e}")


# ---------------------------------------------------------------- 12

def test_c12_determinism(tmp_path):
    runs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        for cfg in ("regimes.ini", "games.ini"):
            r = subprocess.run([sys.executable, "-m", "dynomd.cli", "run", str(ROOT / "configs" / cfg),
                                "--out", str(d)], capture_output=True, text=True,
                               env={**os.environ, "DYNOMD_OUTPUT_DIR": ""})
            assert r.returncode == 0, r.stderr
        runs.append(d)
    files = sorted(p.relative_to(runs[0]) for p in runs[0].rglob("*.csv"))
    same = files == sorted(p.relative_to(runs[1]) for p in runs[1].rglob("*.csv")) and all(
        (runs[0] / f).read_bytes() == (runs[1] / f).read_bytes() for f in files)
    verdict(12, same and len(files) > 0, f"{len(files)} output files byte-identical across two runs")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
