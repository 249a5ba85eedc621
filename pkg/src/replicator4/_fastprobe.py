"""Throughput path for the permanence screen.

The ensemble acceptance run integrates thousands of trajectories to
t = 200 and only needs two numbers per run: the smallest strategy share
seen inside an observation window, and the smallest share at the end.
This module carries a minimal Dormand-Prince 5(4) loop in log
coordinates (same tableau and controller as the full stepper, no dense
output, no trajectory storage) compiled with numba when available.

The pure-Python fallback has identical semantics and is used
automatically when numba is not importable; it is two to three orders
of magnitude slower, which only matters for the big screens.
"""

from __future__ import annotations

import numpy as np


def _probe_impl(A, x0, t_end, win_lo, rtol, atol):
    n = x0.shape[0]
    u = np.log(x0)
    m = u[0]
    for i in range(1, n):
        if u[i] > m:
            m = u[i]
    s = 0.0
    for i in range(n):
        s += np.exp(u[i] - m)
    lse = m + np.log(s)
    for i in range(n):
        u[i] -= lse

    a21 = 1 / 5
    a31, a32 = 3 / 40, 9 / 40
    a41, a42, a43 = 44 / 45, -56 / 15, 32 / 9
    a51, a52, a53, a54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
    a61, a62, a63, a64, a65 = (9017 / 3168, -355 / 33, 46732 / 5247,
                               49 / 176, -5103 / 18656)
    b1, b3, b4, b5, b6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
    e1 = 35 / 384 - 5179 / 57600
    e3 = 500 / 1113 - 7571 / 16695
    e4 = 125 / 192 - 393 / 640
    e5 = -2187 / 6784 + 92097 / 339200
    e6 = 11 / 84 - 187 / 2100
    e7 = -1 / 40

    K = np.zeros((7, n))
    x = np.zeros(n)
    utmp = np.zeros(n)
    unew = np.zeros(n)

    def rhs(uu, out):
        mm = uu[0]
        for i in range(1, n):
            if uu[i] > mm:
                mm = uu[i]
        ss = 0.0
        for i in range(n):
            x[i] = np.exp(uu[i] - mm)
            ss += x[i]
        for i in range(n):
            x[i] /= ss
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += A[i, j] * x[j]
            out[i] = acc

    rhs(u, K[0])
    t = 0.0
    h = 0.01
    err_prev = 1e-4
    window_min = 1.0
    while t < t_end:
        if h > t_end - t:
            h = t_end - t
        for i in range(n):
            utmp[i] = u[i] + h * a21 * K[0, i]
        rhs(utmp, K[1])
        for i in range(n):
            utmp[i] = u[i] + h * (a31 * K[0, i] + a32 * K[1, i])
        rhs(utmp, K[2])
        for i in range(n):
            utmp[i] = u[i] + h * (a41 * K[0, i] + a42 * K[1, i]
                                  + a43 * K[2, i])
        rhs(utmp, K[3])
        for i in range(n):
            utmp[i] = u[i] + h * (a51 * K[0, i] + a52 * K[1, i]
                                  + a53 * K[2, i] + a54 * K[3, i])
        rhs(utmp, K[4])
        for i in range(n):
            utmp[i] = u[i] + h * (a61 * K[0, i] + a62 * K[1, i]
                                  + a63 * K[2, i] + a64 * K[3, i]
                                  + a65 * K[4, i])
        rhs(utmp, K[5])
        for i in range(n):
            unew[i] = u[i] + h * (b1 * K[0, i] + b3 * K[2, i]
                                  + b4 * K[3, i] + b5 * K[4, i]
                                  + b6 * K[5, i])
        rhs(unew, K[6])
        errn = 0.0
        for i in range(n):
            ev = h * (e1 * K[0, i] + e3 * K[2, i] + e4 * K[3, i]
                      + e5 * K[4, i] + e6 * K[5, i] + e7 * K[6, i])
            wi = atol + rtol * max(1.0, abs(unew[i]))
            errn += (ev / wi) ** 2
        err = np.sqrt(errn / n)
        if np.isnan(err):
            h *= 0.2
            if h < 1e-13:
                return -1.0, -1.0
            continue
        if err <= 1.0:
            t += h
            mm = unew[0]
            for i in range(1, n):
                if unew[i] > mm:
                    mm = unew[i]
            ss = 0.0
            for i in range(n):
                ss += np.exp(unew[i] - mm)
            lse = mm + np.log(ss)
            for i in range(n):
                u[i] = unew[i] - lse
            rhs(u, K[0])
            if t >= win_lo:
                umin = u[0]
                for i in range(1, n):
                    if u[i] < umin:
                        umin = u[i]
                xm = np.exp(umin)
                if xm < window_min:
                    window_min = xm
            if err > 1e-12:
                fac = 0.9 * err ** -0.17 * err_prev ** 0.04
            else:
                fac = 5.0
            err_prev = err if err > 1e-10 else 1e-10
        else:
            fac = 0.9 * err ** -0.2
        if fac > 5.0:
            fac = 5.0
        if fac < 0.2:
            fac = 0.2
        h *= fac
        if h < 1e-13:
            return -1.0, -1.0
    fmin = u[0]
    for i in range(1, n):
        if u[i] < fmin:
            fmin = u[i]
    return window_min, np.exp(fmin)


try:
    from numba import njit

    window_and_final_min = njit(cache=True)(_probe_impl)
except ImportError:  # pragma: no cover - numba is a declared dependency
    window_and_final_min = _probe_impl
