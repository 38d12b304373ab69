# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled round loops. Statement-for-statement mirror of ``_pykernels``.

Build with -ffp-contract=off: fused multiply-adds would break bitwise
agreement with the Python fallback.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, pow, fabs

cnp.import_array()

BACKEND = "cython"

cdef int GEOM_SIMPLEX = 0
cdef int FAMILY_LINEAR = 0
cdef int PRED_ZERO = 0
cdef int PRED_LAST = 1
cdef int PRED_SMOOTH = 2
cdef int TUNING_STATIC = 1


cdef void _mirror_simplex(double[::1] x, double[::1] g, double eta, double[::1] out,
                          double[::1] work) noexcept nogil:
    cdef Py_ssize_t d = x.shape[0], i
    cdef double amax, s
    for i in range(d):
        work[i] = -eta * g[i]
    amax = work[0]
    for i in range(1, d):
        if work[i] > amax:
            amax = work[i]
    for i in range(d):
        work[i] = x[i] * exp(work[i] - amax)
    s = 0.0
    for i in range(d):
        s += work[i]
    for i in range(d):
        out[i] = work[i] / s


cdef void _mirror_ball(double[::1] x, double[::1] g, double eta, double[::1] c, double r,
                       double[::1] out) noexcept nogil:
    cdef Py_ssize_t d = x.shape[0], i
    cdef double nrm2 = 0.0, nrm, s, t
    for i in range(d):
        out[i] = x[i] - eta * g[i]
    for i in range(d):
        t = out[i] - c[i]
        nrm2 += t * t
    nrm = sqrt(nrm2)
    if nrm > r:
        s = r / nrm
        for i in range(d):
            out[i] = c[i] + (out[i] - c[i]) * s


cdef inline void _mirror(int geom, double[::1] x, double[::1] g, double eta, double[::1] c,
                         double r, double[::1] out, double[::1] work) noexcept nogil:
    if geom == GEOM_SIMPLEX:
        _mirror_simplex(x, g, eta, out, work)
    else:
        _mirror_ball(x, g, eta, c, r, out)


cdef double _dual_sq(double[::1] v, int geom) noexcept nogil:
    cdef Py_ssize_t i
    cdef double m = 0.0, a, s = 0.0
    if geom == GEOM_SIMPLEX:
        for i in range(v.shape[0]):
            a = fabs(v[i])
            if a > m:
                m = a
        return m * m
    for i in range(v.shape[0]):
        s += v[i] * v[i]
    return s


cdef double _loss_value(int family, double[:] p, double h, double[::1] x) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, t
    if family == FAMILY_LINEAR:
        for i in range(x.shape[0]):
            s += p[i] * x[i]
        return s
    for i in range(x.shape[0]):
        t = x[i] - p[i]
        s += t * t
    return 0.5 * h * s


cdef void _loss_grad(int family, double[:] p, double h, double[::1] x,
                     double[::1] out) noexcept nogil:
    cdef Py_ssize_t i
    if family == FAMILY_LINEAR:
        for i in range(x.shape[0]):
            out[i] = p[i]
    else:
        for i in range(x.shape[0]):
            out[i] = h * (x[i] - p[i])


cpdef bint doubling_fires(double L, double C, double V, long delta, double D, double gamma,
                          double r_max_sq):
    cdef double b, m
    if C > 0.0 and V > 0.0:
        b = pow(V, 2.0 / 3.0) * pow(<double>delta, 2.0 / 3.0) * pow(D, -1.0 / 3.0)
        m = C if C < b else b
    else:
        m = 0.0
    return L * L < gamma * m + 4.0 * r_max_sq


cdef inline double _static_eta(double r_max, double s1, double s2) noexcept nogil:
    cdef double den = sqrt(s1) + sqrt(s2), v = 1.0
    if den > 0.0:
        v = 1.0 / den
        if v > 1.0:
            v = 1.0
    return r_max * v


def aomd_loop(int geom, double radius, center, int family, P, H, int pred, ext, x0,
              double L1, double r_max, double gamma, double r_max_sq, bint doubling,
              int tuning, c_inc, v_inc, c_fn=None):
    cdef double[:, ::1] Pv = np.ascontiguousarray(P, dtype=float)
    cdef Py_ssize_t T = Pv.shape[0], d = Pv.shape[1], t, i
    cdef double[::1] Hv = np.ascontiguousarray(H, dtype=float)
    cdef double[::1] cv = np.ascontiguousarray(center, dtype=float)
    cdef double[::1] cinc = np.ascontiguousarray(c_inc, dtype=float)
    cdef double[::1] vinc = np.ascontiguousarray(v_inc, dtype=float)
    cdef double[:, ::1] extv
    if pred == 3:
        extv = np.ascontiguousarray(ext, dtype=float)

    out_x_a = np.empty((T, d)); out_xh_a = np.empty((T, d)); out_g_a = np.empty((T, d))
    out_m_a = np.empty((T, d))
    out_loss_a = np.empty(T); out_eta_a = np.empty(T); out_eta_next_a = np.empty(T)
    out_epoch_a = np.empty(T, dtype=np.int64); out_L_a = np.empty(T); out_dev_a = np.empty(T)
    out_D_a = np.empty(T); out_C_a = np.empty(T); out_V_a = np.empty(T)
    out_delta_a = np.empty(T, dtype=np.int64)
    cdef double[:, ::1] out_x = out_x_a, out_xh = out_xh_a, out_g = out_g_a, out_m = out_m_a
    cdef double[::1] out_loss = out_loss_a, out_eta = out_eta_a, out_eta_next = out_eta_next_a
    cdef double[::1] out_L = out_L_a, out_dev = out_dev_a, out_D = out_D_a
    cdef double[::1] out_C = out_C_a, out_V = out_V_a
    cdef long long[::1] out_epoch = out_epoch_a, out_delta = out_delta_a

    cdef double[::1] xhat = np.array(x0, dtype=float)
    cdef double[::1] xhat_new = np.empty(d)
    cdef double[::1] x = np.empty(d)
    cdef double[::1] g = np.empty(d)
    cdef double[::1] M = np.zeros(d)
    cdef double[::1] diff = np.empty(d)
    cdef double[::1] work = np.empty(d)
    cdef long n_ep = 1, delta = 0, k = 0
    cdef double L = L1, C = 0.0, V = 0.0, D = 1.0, Dprev = 0.0, S = 0.0, Sprev = 0.0
    cdef double eta, eta_next, dev, h
    cdef bint use_fn = c_fn is not None

    if tuning == TUNING_STATIC:
        eta = _static_eta(r_max, S, Sprev)
    else:
        eta = L / (sqrt(D) + sqrt(Dprev))
    if pred == 3:
        for i in range(d):
            M[i] = extv[0, i]
    _mirror(geom, xhat, M, eta, cv, radius, x, work)

    for t in range(T):
        if doubling and doubling_fires(L, C, V, delta, D, gamma, r_max_sq):
            n_ep += 1
            L = L1 * pow(2.0, <double>(n_ep - 1))
            C = 0.0
            V = 0.0
            D = 1.0
            Dprev = 0.0
            delta = 0
            k = t
        h = Hv[t]
        for i in range(d):
            out_x[t, i] = x[i]
            out_m[t, i] = M[i]
        out_eta[t] = eta
        out_epoch[t] = n_ep
        out_L[t] = L
        out_loss[t] = _loss_value(family, Pv[t], h, x)
        _loss_grad(family, Pv[t], h, x, g)
        for i in range(d):
            out_g[t, i] = g[i]
            diff[i] = g[i] - M[i]
        dev = _dual_sq(diff, geom)
        out_dev[t] = dev
        Dprev = D
        D = D + dev
        Sprev = S
        S = S + dev
        if use_fn:
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
        _mirror(geom, xhat, g, eta, cv, radius, xhat_new, work)
        for i in range(d):
            xhat[i] = xhat_new[i]
            out_xh[t, i] = xhat[i]
        if t + 1 < T:
            if pred == PRED_ZERO:
                for i in range(d):
                    M[i] = 0.0
            elif pred == PRED_LAST:
                for i in range(d):
                    M[i] = g[i]
            elif pred == PRED_SMOOTH:
                _loss_grad(family, Pv[t], h, xhat, M)
            else:
                for i in range(d):
                    M[i] = extv[t + 1, i]
            _mirror(geom, xhat, M, eta_next, cv, radius, x, work)
        eta = eta_next

    return {
        "x": out_x_a, "x_hat": out_xh_a, "grad": out_g_a, "pred": out_m_a,
        "loss": out_loss_a, "eta": out_eta_a, "eta_next": out_eta_next_a,
        "epoch": out_epoch_a, "L": out_L_a, "dev": out_dev_a, "D_epoch": out_D_a,
        "C_epoch": out_C_a, "V_epoch": out_V_a, "delta": out_delta_a,
    }


cdef double _player_step(double[::1] xm, double[::1] g, double eta, double F1,
                         double[::1] gprev, double beta, double logk, double L,
                         double[::1] xh, double[::1] x_next, double[::1] work,
                         double* eta_next) noexcept nogil:
    """Updates xm in place to the mixed point; returns the new accumulator."""
    cdef Py_ssize_t k = xm.shape[0], i
    cdef double m = 0.0, a, F, cap, den
    _mirror_simplex(xm, g, eta, xh, work)
    for i in range(k):
        xm[i] = (1.0 - beta) * xh[i] + beta / k
    for i in range(k):
        a = fabs(g[i] - gprev[i])
        if a > m:
            m = a
    F = F1 + m * m
    cap = 1.0 / (32.0 * L)
    den = sqrt(F) + sqrt(F1)
    eta_next[0] = cap
    if den > 0.0:
        a = logk * L / den
        if a < cap:
            eta_next[0] = a
    _mirror_simplex(xm, g, eta_next[0], x_next, work)
    return F


def player_step(xm, g, double eta, double F1, gprev, double beta, double logk, double L):
    cdef double[::1] xmv = np.array(xm, dtype=float)
    cdef Py_ssize_t k = xmv.shape[0]
    xh = np.empty(k)
    x_next = np.empty(k)
    cdef double eta_next
    cdef double F = _player_step(xmv, np.ascontiguousarray(g, dtype=float), eta, F1,
                                 np.ascontiguousarray(gprev, dtype=float), beta, logk, L,
                                 xh, x_next, np.empty(k), &eta_next)
    return xh, np.asarray(xmv), F, eta_next, x_next


def game_loop(A, idx, double L, x0, f0, opp=None):
    cdef double[:, :, ::1] Av = np.ascontiguousarray(A, dtype=float)
    cdef long long[::1] idxv = np.ascontiguousarray(idx, dtype=np.int64)
    cdef Py_ssize_t m = Av.shape[1], n = Av.shape[2], T = idxv.shape[0], t, i, j, b, a_idx
    cdef bint has_opp = opp is not None
    cdef double[:, ::1] oppv
    if has_opp:
        oppv = np.ascontiguousarray(opp, dtype=float)
    cdef double beta = 1.0 / (<double>T * <double>T)
    cdef double logn = log(<double>T * <double>T * n)
    cdef double logm = log(<double>T * <double>T * m)
    cdef double cap = 1.0 / (32.0 * L)

    res = {}
    for key, width in (("x", n), ("f", m), ("x_hat_mixed", n), ("f_hat_mixed", m),
                       ("gI", n), ("AX", m)):
        res[key] = np.empty((T, width))
    for key in ("payoff", "eta", "eta2", "F", "Fa", "worst", "best"):
        res[key] = np.empty(T)
    res["br_I"] = np.empty(T, dtype=np.int64)
    res["br_II"] = np.empty(T, dtype=np.int64)
    cdef double[:, ::1] o_x = res["x"], o_f = res["f"], o_xm = res["x_hat_mixed"]
    cdef double[:, ::1] o_fm = res["f_hat_mixed"], o_gI = res["gI"], o_AX = res["AX"]
    cdef double[::1] o_pay = res["payoff"], o_eta = res["eta"], o_eta2 = res["eta2"]
    cdef double[::1] o_F = res["F"], o_Fa = res["Fa"], o_worst = res["worst"], o_best = res["best"]
    cdef long long[::1] o_brI = res["br_I"], o_brII = res["br_II"]

    cdef double[::1] x0v = np.ascontiguousarray(x0, dtype=float)
    cdef double[::1] f0v = np.ascontiguousarray(f0, dtype=float)
    cdef double[::1] xm = np.empty(n), fm = np.empty(m)
    cdef double[::1] x = np.empty(n), f = np.empty(m), x_n = np.empty(n), f_n = np.empty(m)
    cdef double[::1] gI = np.empty(n), gprev = np.zeros(n), AX = np.empty(m)
    cdef double[::1] h = np.empty(m), hprev = np.zeros(m)
    cdef double[::1] xh = np.empty(n), fh = np.empty(m), wn = np.empty(n), wm = np.empty(m)
    cdef double eta = cap, eta2 = cap, F = 0.0, Fa = 0.0, eta_n, eta2_n, s, pay, mm, a

    for j in range(n):
        xm[j] = (1.0 - beta) * x0v[j] + beta / n
    for i in range(m):
        fm[i] = (1.0 - beta) * f0v[i] + beta / m
    _mirror_simplex(xm, gprev, eta, x, wn)
    _mirror_simplex(fm, hprev, eta2, f, wm)

    for t in range(T):
        a_idx = idxv[t]
        if has_opp:
            for i in range(m):
                f[i] = oppv[t, i]
        for j in range(n):
            o_x[t, j] = x[j]
        for i in range(m):
            o_f[t, i] = f[i]
        o_eta[t] = eta
        o_eta2[t] = eta2
        for j in range(n):
            s = 0.0
            for i in range(m):
                s += f[i] * Av[a_idx, i, j]
            gI[j] = s
        for i in range(m):
            s = 0.0
            for j in range(n):
                s += Av[a_idx, i, j] * x[j]
            AX[i] = s
        pay = 0.0
        for i in range(m):
            pay += f[i] * AX[i]
        o_pay[t] = pay
        b = 0
        for j in range(1, n):
            if gI[j] < gI[b]:
                b = j
        o_brI[t] = b
        o_best[t] = gI[b]
        b = 0
        for i in range(1, m):
            if AX[i] > AX[b]:
                b = i
        o_brII[t] = b
        o_worst[t] = AX[b]
        for j in range(n):
            o_gI[t, j] = gI[j]
        for i in range(m):
            o_AX[t, i] = AX[i]

        F = _player_step(xm, gI, eta, F, gprev, beta, logn, L, xh, x_n, wn, &eta_n)
        for i in range(m):
            h[i] = -AX[i]
        if not has_opp:
            Fa = _player_step(fm, h, eta2, Fa, hprev, beta, logm, L, fh, f_n, wm, &eta2_n)
        else:
            mm = 0.0
            for i in range(m):
                a = fabs(h[i] - hprev[i])
                if a > mm:
                    mm = a
            Fa = Fa + mm * mm
            eta2_n = eta2
            for i in range(m):
                f_n[i] = f[i]
        o_F[t] = F
        o_Fa[t] = Fa
        for j in range(n):
            o_xm[t, j] = xm[j]
        for i in range(m):
            o_fm[t, i] = fm[i]
        for j in range(n):
            gprev[j] = gI[j]
            x[j] = x_n[j]
        for i in range(m):
            hprev[i] = h[i]
            f[i] = f_n[i]
        eta = eta_n
        eta2 = eta2_n
    return res


def selfplay(A, x, y, lx_prev, ly_prev, long iters, double eta):
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=float)
    cdef Py_ssize_t m = Av.shape[0], n = Av.shape[1], i, j
    cdef long it
    x_a = np.array(x, dtype=float); y_a = np.array(y, dtype=float)
    lxp_a = np.array(lx_prev, dtype=float); lyp_a = np.array(ly_prev, dtype=float)
    xs_a = np.zeros(n); ys_a = np.zeros(m)
    cdef double[::1] xv = x_a, yv = y_a, lxp = lxp_a, lyp = lyp_a, xs = xs_a, ys = ys_a
    cdef double[::1] lx = np.empty(n), ly = np.empty(m), gx = np.empty(n), gy = np.empty(m)
    cdef double[::1] xn = np.empty(n), yn = np.empty(m), wn = np.empty(n), wm = np.empty(m)
    cdef double s
    with nogil:
        for it in range(iters):
            for j in range(n):
                s = 0.0
                for i in range(m):
                    s += yv[i] * Av[i, j]
                lx[j] = s
            for i in range(m):
                s = 0.0
                for j in range(n):
                    s += Av[i, j] * xv[j]
                ly[i] = -s
            for j in range(n):
                gx[j] = 2.0 * lx[j] - lxp[j]
            for i in range(m):
                gy[i] = 2.0 * ly[i] - lyp[i]
            _mirror_simplex(xv, gx, eta, xn, wn)
            _mirror_simplex(yv, gy, eta, yn, wm)
            for j in range(n):
                xv[j] = xn[j]
                lxp[j] = lx[j]
                xs[j] += xv[j]
            for i in range(m):
                yv[i] = yn[i]
                lyp[i] = ly[i]
                ys[i] += yv[i]
    return x_a, y_a, lxp_a, lyp_a, xs_a, ys_a
