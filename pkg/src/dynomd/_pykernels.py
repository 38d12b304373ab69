"""Pure-Python round loops; the fallback for the compiled ``_ckernels`` module.

Every routine here is mirrored statement by statement in ``_ckernels.pyx``.
Both use scalar libm arithmetic in the same order, so the two backends agree
bit for bit. Keep them in sync.
"""

from math import exp, log, sqrt

import numpy as np

GEOM_SIMPLEX = 0
GEOM_BALL = 1
FAMILY_LINEAR = 0
FAMILY_QUADRATIC = 1
PRED_ZERO = 0
PRED_LAST = 1
PRED_SMOOTH = 2
PRED_EXTERNAL = 3
TUNING_ADAPTIVE = 0
TUNING_STATIC = 1

BACKEND = "python"


def mirror_simplex(x, g, eta):
    d = len(x)
    a = [-eta * g[i] for i in range(d)]
    amax = a[0]
    for i in range(1, d):
        if a[i] > amax:
            amax = a[i]
    w = [x[i] * exp(a[i] - amax) for i in range(d)]
    s = 0.0
    for i in range(d):
        s += w[i]
    return [w[i] / s for i in range(d)]


def mirror_ball(x, g, eta, c, r):
    d = len(x)
    y = [x[i] - eta * g[i] for i in range(d)]
    nrm2 = 0.0
    for i in range(d):
        t = y[i] - c[i]
        nrm2 += t * t
    nrm = sqrt(nrm2)
    if nrm > r:
        s = r / nrm
        y = [c[i] + (y[i] - c[i]) * s for i in range(d)]
    return y


def dual_sq(v, geom):
    if geom == GEOM_SIMPLEX:
        m = 0.0
        for vi in v:
            a = abs(vi)
            if a > m:
                m = a
        return m * m
    s = 0.0
    for vi in v:
        s += vi * vi
    return s


def loss_value(family, p, h, x):
    s = 0.0
    if family == FAMILY_LINEAR:
        for i in range(len(x)):
            s += p[i] * x[i]
        return s
    for i in range(len(x)):
        t = x[i] - p[i]
        s += t * t
    return 0.5 * h * s


def loss_grad(family, p, h, x):
    if family == FAMILY_LINEAR:
        return list(p)
    return [h * (x[i] - p[i]) for i in range(len(x))]


def doubling_fires(L, C, V, delta, D, gamma, r_max_sq):
    if C > 0.0 and V > 0.0:
        b = V ** (2.0 / 3.0) * float(delta) ** (2.0 / 3.0) * D ** (-1.0 / 3.0)
        m = C if C < b else b
    else:
        m = 0.0
    return L * L < gamma * m + 4.0 * r_max_sq


def _static_eta(r_max, s1, s2):
    den = sqrt(s1) + sqrt(s2)
    v = 1.0
    if den > 0.0:
        v = 1.0 / den
        if v > 1.0:
            v = 1.0
    return r_max * v


def aomd_loop(geom, radius, center, family, P, H, pred, ext, x0, L1, r_max,
              gamma, r_max_sq, doubling, tuning, c_inc, v_inc, c_fn=None):
    """Run OMD (``doubling=False``, fixed scale ``L1``) or AOMD over a loss table.

    ``P``/``H`` hold the per-round loss parameters (linear coefficients, or the
    quadratic center and curvature). ``c_inc``/``v_inc`` are the per-round
    regularity and variability increments; ``c_fn(k, t)``, when given, replaces
    the regularity tracker by a per-epoch functional of rounds ``k..t``.
    """
    P = np.asarray(P, dtype=float)
    T, d = P.shape
    Pl = P.tolist()
    Hl = np.asarray(H, dtype=float).tolist()
    cl = np.asarray(center, dtype=float).tolist()
    cinc = np.asarray(c_inc, dtype=float).tolist()
    vinc = np.asarray(v_inc, dtype=float).tolist()
    extl = np.asarray(ext, dtype=float).tolist() if pred == PRED_EXTERNAL else None

    out_x = [None] * T
    out_xh = [None] * T
    out_g = [None] * T
    out_m = [None] * T
    out_loss = [0.0] * T
    out_eta = [0.0] * T
    out_eta_next = [0.0] * T
    out_epoch = [0] * T
    out_L = [0.0] * T
    out_dev = [0.0] * T
    out_D = [0.0] * T
    out_C = [0.0] * T
    out_V = [0.0] * T
    out_delta = [0] * T

    def mirror(x, g, eta):
        if geom == GEOM_SIMPLEX:
            return mirror_simplex(x, g, eta)
        return mirror_ball(x, g, eta, cl, radius)

    xhat = [float(v) for v in np.asarray(x0, dtype=float)]
    n_ep = 1
    L = L1
    C = 0.0
    V = 0.0
    D = 1.0
    Dprev = 0.0
    S = 0.0
    Sprev = 0.0
    delta = 0
    k = 0
    if tuning == TUNING_STATIC:
        eta = _static_eta(r_max, S, Sprev)
    else:
        eta = L / (sqrt(D) + sqrt(Dprev))
    if pred == PRED_EXTERNAL:
        M = list(extl[0])
    else:
        M = [0.0] * d
    x = mirror(xhat, M, eta)

    for t in range(T):
        if doubling and doubling_fires(L, C, V, delta, D, gamma, r_max_sq):
            n_ep += 1
            L = L1 * 2.0 ** (n_ep - 1)
            C = 0.0
            V = 0.0
            D = 1.0
            Dprev = 0.0
            delta = 0
            k = t
        p = Pl[t]
        h = Hl[t]
        out_x[t] = x
        out_m[t] = M
        out_eta[t] = eta
        out_epoch[t] = n_ep
        out_L[t] = L
        out_loss[t] = loss_value(family, p, h, x)
        g = loss_grad(family, p, h, x)
        out_g[t] = g
        dev = dual_sq([g[i] - M[i] for i in range(d)], geom)
        out_dev[t] = dev
        Dprev = D
        D = D + dev
        Sprev = S
        S = S + dev
        if c_fn is not None:
            C = float(c_fn(k, t))
        else:
            C = C + cinc[t]
        V = V + vinc[t]
        delta += 1
        out_D[t] = D
        out_C[t] = C
        out_V[t] = V
        out_delta[t] = delta
        if tuning == TUNING_STATIC:
            eta_next = _static_eta(r_max, S, Sprev)
        else:
            eta_next = L / (sqrt(D) + sqrt(Dprev))
        out_eta_next[t] = eta_next
        xhat = mirror(xhat, g, eta)
        out_xh[t] = xhat
        if t + 1 < T:
            if pred == PRED_ZERO:
                M = [0.0] * d
            elif pred == PRED_LAST:
                M = list(g)
            elif pred == PRED_SMOOTH:
                M = loss_grad(family, p, h, xhat)
            else:
                M = list(extl[t + 1])
            x = mirror(xhat, M, eta_next)
        eta = eta_next

    return {
        "x": np.array(out_x, dtype=float).reshape(T, d),
        "x_hat": np.array(out_xh, dtype=float).reshape(T, d),
        "grad": np.array(out_g, dtype=float).reshape(T, d),
        "pred": np.array(out_m, dtype=float).reshape(T, d),
        "loss": np.array(out_loss, dtype=float),
        "eta": np.array(out_eta, dtype=float),
        "eta_next": np.array(out_eta_next, dtype=float),
        "epoch": np.array(out_epoch, dtype=np.int64),
        "L": np.array(out_L, dtype=float),
        "dev": np.array(out_dev, dtype=float),
        "D_epoch": np.array(out_D, dtype=float),
        "C_epoch": np.array(out_C, dtype=float),
        "V_epoch": np.array(out_V, dtype=float),
        "delta": np.array(out_delta, dtype=np.int64),
    }


def player_step(xm, g, eta, F1, gprev, beta, logk, L):
    """One prescribed exponential-weights round for a player with loss vector ``g``.

    Returns ``(x_hat, x_hat_mixed, F, eta_next, x_next)``.
    """
    k = len(xm)
    xh = mirror_simplex(xm, g, eta)
    xm_new = [(1.0 - beta) * xh[i] + beta / k for i in range(k)]
    m = 0.0
    for i in range(k):
        a = abs(g[i] - gprev[i])
        if a > m:
            m = a
    F = F1 + m * m
    cap = 1.0 / (32.0 * L)
    den = sqrt(F) + sqrt(F1)
    eta_next = cap
    if den > 0.0:
        a = logk * L / den
        if a < cap:
            eta_next = a
    x_next = mirror_simplex(xm_new, g, eta_next)
    return xh, xm_new, F, eta_next, x_next


def game_loop(A, idx, L, x0, f0, opp=None):
    """Both players' prescribed strategies over a matrix schedule.

    ``A`` stacks the distinct matrices (K x m x n), ``idx`` maps rounds to them.
    When ``opp`` (T x m) is given, Player II plays it verbatim instead.
    """
    A = np.asarray(A, dtype=float)
    K, m, n = A.shape
    Al = A.tolist()
    idxl = [int(i) for i in np.asarray(idx)]
    T = len(idxl)
    oppl = np.asarray(opp, dtype=float).tolist() if opp is not None else None
    beta = 1.0 / (float(T) * float(T))
    logn = log(float(T) * float(T) * n)
    logm = log(float(T) * float(T) * m)
    cap = 1.0 / (32.0 * L)

    xm = [(1.0 - beta) * v + beta / n for v in np.asarray(x0, dtype=float).tolist()]
    fm = [(1.0 - beta) * v + beta / m for v in np.asarray(f0, dtype=float).tolist()]
    eta = cap
    eta2 = cap
    F = 0.0
    Fa = 0.0
    gprev = [0.0] * n
    hprev = [0.0] * m
    x = mirror_simplex(xm, gprev, eta)
    f = mirror_simplex(fm, hprev, eta2)

    out = {key: [None] * T for key in ("x", "f", "x_hat_mixed", "f_hat_mixed", "gI", "AX")}
    sc = {key: [0.0] * T for key in ("payoff", "eta", "eta2", "F", "Fa", "worst", "best")}
    brI = [0] * T
    brII = [0] * T

    for t in range(T):
        At = Al[idxl[t]]
        if oppl is not None:
            f = list(oppl[t])
        out["x"][t] = x
        out["f"][t] = f
        sc["eta"][t] = eta
        sc["eta2"][t] = eta2
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
        brI[t] = b
        sc["best"][t] = gI[b]
        b = 0
        for i in range(1, m):
            if AX[i] > AX[b]:
                b = i
        brII[t] = b
        sc["worst"][t] = AX[b]
        out["gI"][t] = gI
        out["AX"][t] = AX

        _, xm, F, eta_n, x_n = player_step(xm, gI, eta, F, gprev, beta, logn, L)
        h = [-AX[i] for i in range(m)]
        if oppl is None:
            _, fm, Fa, eta2_n, f_n = player_step(fm, h, eta2, Fa, hprev, beta, logm, L)
        else:
            mm = 0.0
            for i in range(m):
                a = abs(h[i] - hprev[i])
                if a > mm:
                    mm = a
            Fa = Fa + mm * mm
            eta2_n = eta2
            f_n = f
        sc["F"][t] = F
        sc["Fa"][t] = Fa
        out["x_hat_mixed"][t] = xm
        out["f_hat_mixed"][t] = fm
        gprev = gI
        hprev = h
        x = x_n
        f = f_n
        eta = eta_n
        eta2 = eta2_n

    res = {key: np.array(v, dtype=float) for key, v in sc.items()}
    for key, v in out.items():
        res[key] = np.array(v, dtype=float)
    res["br_I"] = np.array(brI, dtype=np.int64)
    res["br_II"] = np.array(brII, dtype=np.int64)
    return res


def selfplay(A, x, y, lx_prev, ly_prev, iters, eta):
    """Optimistic multiplicative-weights self-play on ``min_x max_y y^T A x``.

    Returns the final state plus the running sums of both players' iterates.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    Al = A.tolist()
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    lx_prev = [float(v) for v in lx_prev]
    ly_prev = [float(v) for v in ly_prev]
    xs = [0.0] * n
    ys = [0.0] * m
    for _ in range(iters):
        lx = [0.0] * n
        for j in range(n):
            s = 0.0
            for i in range(m):
                s += y[i] * Al[i][j]
            lx[j] = s
        ly = [0.0] * m
        for i in range(m):
            s = 0.0
            for j in range(n):
                s += Al[i][j] * x[j]
            ly[i] = -s
        x = mirror_simplex(x, [2.0 * lx[j] - lx_prev[j] for j in range(n)], eta)
        y = mirror_simplex(y, [2.0 * ly[i] - ly_prev[i] for i in range(m)], eta)
        lx_prev = lx
        ly_prev = ly
        for j in range(n):
            xs[j] += x[j]
        for i in range(m):
            ys[i] += y[i]
    return (np.array(x), np.array(y), np.array(lx_prev), np.array(ly_prev),
            np.array(xs), np.array(ys))
