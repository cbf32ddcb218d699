"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time from the ``GRAYWYNER_BACKEND``
environment variable: ``numba`` (default, falls back automatically when
numba is not importable) or ``numpy``.  Scalar kernels are written in
plain loop style so the exact same source runs uncompiled when the
fallback is active; batch operations additionally have a vectorized
numpy implementation that the fallback routes to.

Run ``benchmarks/bench_backends.py`` to compare the two paths.
"""

from __future__ import annotations

import math
import os

import numpy as np

_PROB_TINY = 1e-15

_env = os.environ.get("GRAYWYNER_BACKEND", "").strip().lower()
if _env not in ("", "numba", "numpy"):
    raise RuntimeError(f"GRAYWYNER_BACKEND must be 'numba' or 'numpy', got {_env!r}")

NUMBA_ENABLED = False
if _env != "numpy":
    try:
        import numba

        NUMBA_ENABLED = True
    except ImportError:
        if _env == "numba":
            raise
        NUMBA_ENABLED = False


def _jit(fn):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"


# ----------------------------------------------------------------------
# scalar primitives (compiled twins of the core module's array versions)
# ----------------------------------------------------------------------


@_jit
def h_bits(t):
    out = 0.0
    if t > _PROB_TINY:
        out -= t * math.log2(t)
    u = 1.0 - t
    if u > _PROB_TINY:
        out -= u * math.log2(u)
    return out


@_jit
def h_inv_bits(y):
    if y <= 0.0:
        return 0.0
    if y >= 1.0:
        return 0.5
    lo = 0.0
    hi = 0.5
    for _ in range(200):
        if hi - lo < 1e-13:
            break
        mid = 0.5 * (lo + hi)
        if h_bits(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@_jit
def bconv(a, b):
    return a * (1.0 - b) + b * (1.0 - a)


@_jit
def q_opt(a, b, p):
    """Closed-form (1,1)-cell of the optimal coupling against a symmetric
    binary reference with flip probability p.

    Evaluated through the conjugate (product) form, which avoids the
    catastrophic cancellation of the textbook root formula when
    4*kappa*(kappa-1)*a*b is much smaller than the linear term.
    """
    if a <= 0.0 or b <= 0.0:
        return 0.0
    k = ((1.0 - p) / p) ** 2
    lin = (k - 1.0) * (a + b) + 1.0
    disc = lin * lin - 4.0 * k * (k - 1.0) * a * b
    if disc < 0.0:
        disc = 0.0
    q = 2.0 * k * a * b / (lin + math.sqrt(disc))
    lo = a + b - 1.0
    if lo < 0.0:
        lo = 0.0
    hi = a if a < b else b
    if q < lo:
        q = lo
    if q > hi:
        q = hi
    return q


@_jit
def coupling_kl_bits(a, b, q, p):
    """D of the coupling [[1+q-a-b, b-q], [a-q, q]] against DSBS(p), in bits."""
    d = 0.0
    e = 1.0 + q - a - b
    if e > _PROB_TINY:
        d += e * math.log2(e / ((1.0 - p) / 2.0))
    e = b - q
    if e > _PROB_TINY:
        d += e * math.log2(e / (p / 2.0))
    e = a - q
    if e > _PROB_TINY:
        d += e * math.log2(e / (p / 2.0))
    if q > _PROB_TINY:
        d += q * math.log2(q / ((1.0 - p) / 2.0))
    return d if d > 0.0 else 0.0


@_jit
def phi_lower_bits(p, alpha, beta):
    """Lower envelope of the divergence region of DSBS(p), scalar path."""
    a = h_inv_bits(1.0 - alpha)
    b = h_inv_bits(1.0 - beta)
    return coupling_kl_bits(a, b, q_opt(a, b, p), p)


# ----------------------------------------------------------------------
# mutual-information triples
# ----------------------------------------------------------------------


@_jit
def mi_triple_bits(ch, pxy):
    """(I(X;W), I(Y;W), I(X,Y;W)) in bits for one channel.

    ch has shape (4, w), rows ordered (0,0),(0,1),(1,0),(1,1); pxy is the
    matching flat joint of (X, Y).
    """
    w = ch.shape[1]
    hq = 0.0  # joint entropy of ((x,y), w)
    hw = 0.0
    hwx = 0.0
    hwy = 0.0
    for k in range(w):
        qw = 0.0
        for r in range(4):
            v = pxy[r] * ch[r, k]
            qw += v
            if v > _PROB_TINY:
                hq -= v * math.log2(v)
        if qw > _PROB_TINY:
            hw -= qw * math.log2(qw)
        v0 = pxy[0] * ch[0, k] + pxy[1] * ch[1, k]
        v1 = pxy[2] * ch[2, k] + pxy[3] * ch[3, k]
        if v0 > _PROB_TINY:
            hwx -= v0 * math.log2(v0)
        if v1 > _PROB_TINY:
            hwx -= v1 * math.log2(v1)
        u0 = pxy[0] * ch[0, k] + pxy[2] * ch[2, k]
        u1 = pxy[1] * ch[1, k] + pxy[3] * ch[3, k]
        if u0 > _PROB_TINY:
            hwy -= u0 * math.log2(u0)
        if u1 > _PROB_TINY:
            hwy -= u1 * math.log2(u1)
    hx = 0.0
    v = pxy[0] + pxy[1]
    if v > _PROB_TINY:
        hx -= v * math.log2(v)
    v = pxy[2] + pxy[3]
    if v > _PROB_TINY:
        hx -= v * math.log2(v)
    hy = 0.0
    v = pxy[0] + pxy[2]
    if v > _PROB_TINY:
        hy -= v * math.log2(v)
    v = pxy[1] + pxy[3]
    if v > _PROB_TINY:
        hy -= v * math.log2(v)
    hxy = 0.0
    for r in range(4):
        if pxy[r] > _PROB_TINY:
            hxy -= pxy[r] * math.log2(pxy[r])
    alpha = hx + hw - hwx
    beta = hy + hw - hwy
    gamma = hxy + hw - hq
    if alpha < 0.0:
        alpha = 0.0
    if beta < 0.0:
        beta = 0.0
    if gamma < 0.0:
        gamma = 0.0
    return alpha, beta, gamma


@_jit
def _mi_triples_batch_loop(chs, pxy):
    n = chs.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        a, b, g = mi_triple_bits(chs[i], pxy)
        out[i, 0] = a
        out[i, 1] = b
        out[i, 2] = g
    return out


def _xlog2x_sum(v, axis):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(v > _PROB_TINY, v * np.log2(np.maximum(v, _PROB_TINY)), 0.0)
    return -t.sum(axis=axis)


def mi_triples_batch_numpy(chs, pxy):
    """Vectorized batch version of :func:`mi_triple_bits` (pure numpy)."""
    n, _, w = chs.shape
    q = chs * pxy[None, :, None]
    hq = _xlog2x_sum(q.reshape(n, -1), 1)
    hw = _xlog2x_sum(q.sum(axis=1), 1)
    hwx = _xlog2x_sum(q.reshape(n, 2, 2, w).sum(axis=2).reshape(n, -1), 1)
    hwy = _xlog2x_sum(q.reshape(n, 2, 2, w).sum(axis=1).reshape(n, -1), 1)
    px = pxy.reshape(2, 2).sum(axis=1)
    py = pxy.reshape(2, 2).sum(axis=0)
    hx = _xlog2x_sum(px, 0)
    hy = _xlog2x_sum(py, 0)
    hxy = _xlog2x_sum(pxy, 0)
    out = np.empty((n, 3))
    out[:, 0] = hx + hw - hwx
    out[:, 1] = hy + hw - hwy
    out[:, 2] = hxy + hw - hq
    return np.maximum(out, 0.0)


def mi_triples_batch(chs, pxy):
    """Batch triples; compiled loop under numba, vectorized numpy otherwise."""
    chs = np.ascontiguousarray(chs, dtype=float)
    pxy = np.ascontiguousarray(pxy, dtype=float)
    if NUMBA_ENABLED:
        return _mi_triples_batch_loop(chs, pxy)
    return mi_triples_batch_numpy(chs, pxy)


# ----------------------------------------------------------------------
# penalized Nelder-Mead restarts for the brute-force oracles
# ----------------------------------------------------------------------

MODE_INCREASING = 0
MODE_EQUALITY = 1
MODE_MAXIMIZE = 2


@_jit
def _channel_from_logits(x, ch):
    """Fill ch (4, w) with row-wise softmax of x; one logit per row is pinned to 0."""
    w = ch.shape[1]
    m = w - 1
    for r in range(4):
        zmax = 0.0
        for k in range(m):
            z = x[r * m + k]
            if z > zmax:
                zmax = z
        s = math.exp(-zmax)  # the pinned zero logit
        ch[r, w - 1] = s
        for k in range(m):
            e = math.exp(x[r * m + k] - zmax)
            ch[r, k] = e
            s += e
        for k in range(w):
            ch[r, k] /= s


@_jit
def _oracle_eval(x, ch, pxy, alpha, beta, mode, mu):
    """Penalized objective; returns (f, gamma, violation)."""
    _channel_from_logits(x, ch)
    ah, bh, g = mi_triple_bits(ch, pxy)
    if mode == MODE_INCREASING:
        da = alpha - ah
        if da < 0.0:
            da = 0.0
        db = beta - bh
        if db < 0.0:
            db = 0.0
    else:
        da = abs(alpha - ah)
        db = abs(beta - bh)
    viol = da + db
    pen = mu * (da * da + db * db)
    if mode == MODE_MAXIMIZE:
        f = -g + pen
    else:
        f = g + pen
    return f, g, viol


@_jit
def oracle_restart(pxy, w, alpha, beta, mode, mus, x0, max_iters, step, feas_tol):
    """One multistart leg: Nelder-Mead descent swept over the penalty schedule.

    Every objective evaluation is screened as a candidate; the best
    feasible one (violation <= feas_tol, ranked by gamma) is returned
    together with the least-violating evaluation seen, so a restart is
    useful even when it never reaches feasibility.
    """
    n = x0.size
    ch = np.empty((4, w))
    best_found = False
    best_gamma = 0.0
    best_x = x0.copy()
    mv_viol = 1e300
    mv_gamma = 0.0
    mv_x = x0.copy()

    sim = np.empty((n + 1, n))
    fv = np.empty(n + 1)
    cen = np.empty(n)
    xr = np.empty(n)
    xe = np.empty(n)
    x = x0.copy()

    sign_max = mode == MODE_MAXIMIZE
    for imu in range(mus.size):
        mu = mus[imu]
        # initial simplex about the current point
        for j in range(n):
            sim[0, j] = x[j]
        for i in range(n):
            for j in range(n):
                sim[i + 1, j] = x[j]
            sim[i + 1, i] += step
        for i in range(n + 1):
            f, g, v = _oracle_eval(sim[i], ch, pxy, alpha, beta, mode, mu)
            fv[i] = f
            if v <= feas_tol:
                if (not best_found) or (g > best_gamma if sign_max else g < best_gamma):
                    best_found = True
                    best_gamma = g
                    for j in range(n):
                        best_x[j] = sim[i, j]
            if v < mv_viol:
                mv_viol = v
                mv_gamma = g
                for j in range(n):
                    mv_x[j] = sim[i, j]

        for _ in range(max_iters):
            # locate worst, second worst, best (first index wins ties)
            ilo = 0
            ihi = 0
            for i in range(1, n + 1):
                if fv[i] < fv[ilo]:
                    ilo = i
                if fv[i] > fv[ihi]:
                    ihi = i
            i2 = ilo
            for i in range(n + 1):
                if i != ihi and fv[i] > fv[i2]:
                    i2 = i
            if fv[ihi] - fv[ilo] <= 1e-12 * (1.0 + abs(fv[ilo])):
                break
            for j in range(n):
                s = 0.0
                for i in range(n + 1):
                    if i != ihi:
                        s += sim[i, j]
                cen[j] = s / n
            for j in range(n):
                xr[j] = cen[j] + (cen[j] - sim[ihi, j])
            fr, gr, vr = _oracle_eval(xr, ch, pxy, alpha, beta, mode, mu)
            if vr <= feas_tol:
                if (not best_found) or (gr > best_gamma if sign_max else gr < best_gamma):
                    best_found = True
                    best_gamma = gr
                    for j in range(n):
                        best_x[j] = xr[j]
            if vr < mv_viol:
                mv_viol = vr
                mv_gamma = gr
                for j in range(n):
                    mv_x[j] = xr[j]

            if fr < fv[ilo]:
                for j in range(n):
                    xe[j] = cen[j] + 2.0 * (cen[j] - sim[ihi, j])
                fe, ge, ve = _oracle_eval(xe, ch, pxy, alpha, beta, mode, mu)
                if ve <= feas_tol:
                    if (not best_found) or (ge > best_gamma if sign_max else ge < best_gamma):
                        best_found = True
                        best_gamma = ge
                        for j in range(n):
                            best_x[j] = xe[j]
                if ve < mv_viol:
                    mv_viol = ve
                    mv_gamma = ge
                    for j in range(n):
                        mv_x[j] = xe[j]
                if fe < fr:
                    for j in range(n):
                        sim[ihi, j] = xe[j]
                    fv[ihi] = fe
                else:
                    for j in range(n):
                        sim[ihi, j] = xr[j]
                    fv[ihi] = fr
            elif fr < fv[i2]:
                for j in range(n):
                    sim[ihi, j] = xr[j]
                fv[ihi] = fr
            else:
                # contraction (outside if the reflection improved on the worst)
                if fr < fv[ihi]:
                    for j in range(n):
                        xe[j] = cen[j] + 0.5 * (xr[j] - cen[j])
                else:
                    for j in range(n):
                        xe[j] = cen[j] - 0.5 * (cen[j] - sim[ihi, j])
                fc, gc, vc = _oracle_eval(xe, ch, pxy, alpha, beta, mode, mu)
                if vc <= feas_tol:
                    if (not best_found) or (gc > best_gamma if sign_max else gc < best_gamma):
                        best_found = True
                        best_gamma = gc
                        for j in range(n):
                            best_x[j] = xe[j]
                if vc < mv_viol:
                    mv_viol = vc
                    mv_gamma = gc
                    for j in range(n):
                        mv_x[j] = xe[j]
                if fc < fr and fc < fv[ihi]:
                    for j in range(n):
                        sim[ihi, j] = xe[j]
                    fv[ihi] = fc
                else:
                    # shrink toward the best vertex
                    for i in range(n + 1):
                        if i == ilo:
                            continue
                        for j in range(n):
                            sim[i, j] = sim[ilo, j] + 0.5 * (sim[i, j] - sim[ilo, j])
                        f, g, v = _oracle_eval(sim[i], ch, pxy, alpha, beta, mode, mu)
                        fv[i] = f
                        if v <= feas_tol:
                            if (not best_found) or (
                                g > best_gamma if sign_max else g < best_gamma
                            ):
                                best_found = True
                                best_gamma = g
                                for j in range(n):
                                    best_x[j] = sim[i, j]
                        if v < mv_viol:
                            mv_viol = v
                            mv_gamma = g
                            for j in range(n):
                                mv_x[j] = sim[i, j]
        # warm-start the next penalty stage from the current best vertex
        ilo = 0
        for i in range(1, n + 1):
            if fv[i] < fv[ilo]:
                ilo = i
        for j in range(n):
            x[j] = sim[ilo, j]
    return best_found, best_gamma, best_x, mv_viol, mv_gamma, mv_x


# ----------------------------------------------------------------------
# three-point time-sharing oracle for divergence envelopes
# ----------------------------------------------------------------------


@_jit
def _timeshare_eval(x, p, alpha, beta, exact, mu):
    """Objective for a 3-component mixture of divergence-region points.

    x = (2 mixture logits, 3 logit-coded s coords, 3 logit-coded t coords).
    """
    z0 = x[0]
    z1 = x[1]
    zmax = z0 if z0 > z1 else z1
    if zmax < 0.0:
        zmax = 0.0
    e0 = math.exp(z0 - zmax)
    e1 = math.exp(z1 - zmax)
    e2 = math.exp(-zmax)
    zs = e0 + e1 + e2
    w0 = e0 / zs
    w1 = e1 / zs
    w2 = e2 / zs
    val = 0.0
    cs = 0.0
    ct = 0.0
    for i in range(3):
        s = 1.0 / (1.0 + math.exp(-x[2 + i]))
        t = 1.0 / (1.0 + math.exp(-x[5 + i]))
        wi = w0 if i == 0 else (w1 if i == 1 else w2)
        val += wi * phi_lower_bits(p, s, t)
        cs += wi * s
        ct += wi * t
    if exact:
        da = abs(cs - alpha)
        db = abs(ct - beta)
    else:
        da = alpha - cs
        if da < 0.0:
            da = 0.0
        db = beta - ct
        if db < 0.0:
            db = 0.0
    viol = da + db
    f = val + mu * (da * da + db * db)
    return f, val, viol


@_jit
def timeshare_restart(p, alpha, beta, exact, mus, x0, max_iters, step, feas_tol):
    """Nelder-Mead over 3-point mixtures, penalty schedule swept as in
    :func:`oracle_restart`; returns the best feasible mixture value."""
    n = x0.size
    best_found = False
    best_val = 0.0
    best_x = x0.copy()
    mv_viol = 1e300
    mv_val = 0.0

    sim = np.empty((n + 1, n))
    fv = np.empty(n + 1)
    cen = np.empty(n)
    xr = np.empty(n)
    xe = np.empty(n)
    x = x0.copy()

    for imu in range(mus.size):
        mu = mus[imu]
        for j in range(n):
            sim[0, j] = x[j]
        for i in range(n):
            for j in range(n):
                sim[i + 1, j] = x[j]
            sim[i + 1, i] += step
        for i in range(n + 1):
            f, val, v = _timeshare_eval(sim[i], p, alpha, beta, exact, mu)
            fv[i] = f
            if v <= feas_tol and ((not best_found) or val < best_val):
                best_found = True
                best_val = val
                for j in range(n):
                    best_x[j] = sim[i, j]
            if v < mv_viol:
                mv_viol = v
                mv_val = val
        for _ in range(max_iters):
            ilo = 0
            ihi = 0
            for i in range(1, n + 1):
                if fv[i] < fv[ilo]:
                    ilo = i
                if fv[i] > fv[ihi]:
                    ihi = i
            i2 = ilo
            for i in range(n + 1):
                if i != ihi and fv[i] > fv[i2]:
                    i2 = i
            if fv[ihi] - fv[ilo] <= 1e-12 * (1.0 + abs(fv[ilo])):
                break
            for j in range(n):
                s = 0.0
                for i in range(n + 1):
                    if i != ihi:
                        s += sim[i, j]
                cen[j] = s / n
            for j in range(n):
                xr[j] = cen[j] + (cen[j] - sim[ihi, j])
            fr, valr, vr = _timeshare_eval(xr, p, alpha, beta, exact, mu)
            if vr <= feas_tol and ((not best_found) or valr < best_val):
                best_found = True
                best_val = valr
                for j in range(n):
                    best_x[j] = xr[j]
            if vr < mv_viol:
                mv_viol = vr
                mv_val = valr
            if fr < fv[ilo]:
                for j in range(n):
                    xe[j] = cen[j] + 2.0 * (cen[j] - sim[ihi, j])
                fe, vale, ve = _timeshare_eval(xe, p, alpha, beta, exact, mu)
                if ve <= feas_tol and ((not best_found) or vale < best_val):
                    best_found = True
                    best_val = vale
                    for j in range(n):
                        best_x[j] = xe[j]
                if ve < mv_viol:
                    mv_viol = ve
                    mv_val = vale
                if fe < fr:
                    for j in range(n):
                        sim[ihi, j] = xe[j]
                    fv[ihi] = fe
                else:
                    for j in range(n):
                        sim[ihi, j] = xr[j]
                    fv[ihi] = fr
            elif fr < fv[i2]:
                for j in range(n):
                    sim[ihi, j] = xr[j]
                fv[ihi] = fr
            else:
                if fr < fv[ihi]:
                    for j in range(n):
                        xe[j] = cen[j] + 0.5 * (xr[j] - cen[j])
                else:
                    for j in range(n):
                        xe[j] = cen[j] - 0.5 * (cen[j] - sim[ihi, j])
                fc, valc, vc = _timeshare_eval(xe, p, alpha, beta, exact, mu)
                if vc <= feas_tol and ((not best_found) or valc < best_val):
                    best_found = True
                    best_val = valc
                    for j in range(n):
                        best_x[j] = xe[j]
                if vc < mv_viol:
                    mv_viol = vc
                    mv_val = valc
                if fc < fr and fc < fv[ihi]:
                    for j in range(n):
                        sim[ihi, j] = xe[j]
                    fv[ihi] = fc
                else:
                    for i in range(n + 1):
                        if i == ilo:
                            continue
                        for j in range(n):
                            sim[i, j] = sim[ilo, j] + 0.5 * (sim[i, j] - sim[ilo, j])
                        f, val, v = _timeshare_eval(sim[i], p, alpha, beta, exact, mu)
                        fv[i] = f
                        if v <= feas_tol and ((not best_found) or val < best_val):
                            best_found = True
                            best_val = val
                            for j in range(n):
                                best_x[j] = sim[i, j]
                        if v < mv_viol:
                            mv_viol = v
                            mv_val = val
        ilo = 0
        for i in range(1, n + 1):
            if fv[i] < fv[ilo]:
                ilo = i
        for j in range(n):
            x[j] = sim[ilo, j]
    return best_found, best_val, best_x, mv_viol, mv_val
