# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-pixel mixture update; the hot kernel of background subtraction.

Mirrors ``_mog_py.update_grid`` operation for operation (same arithmetic,
same order, float64) so both backends are interchangeable. The loop releases
the GIL, so disjoint row bands can run on concurrent threads.
"""

from libc.math cimport exp, sqrt

import numpy as np


def update_grid(double[:, ::1] w, double[:, :, ::1] mu, double[:, ::1] sigma,
                double[:, ::1] z, unsigned char[::1] fg,
                double alpha, double match_d, double T,
                double sigma_init, double sigma_floor, double w_new_floor,
                double norm_const):
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t k = w.shape[1]
    cdef Py_ssize_t c = mu.shape[2]

    scratch = np.empty(k, dtype=np.int64)
    cdef long long[::1] order = scratch
    rankbuf_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] rankbuf = rankbuf_arr
    tmp_arr = np.empty(k * (c + 2), dtype=np.float64)
    cdef double[::1] tmp = tmp_arr

    cdef Py_ssize_t p, j, ch, m, i2, pos, b
    cdef long long oj
    cdef double dd, dd_m, diff, thr, sig, sig2, sig_pow, density, rho
    cdef double dd_new, sig2_new, sig_new, total, cum, key, repl_sigma

    repl_sigma = sigma_init if sigma_init >= sigma_floor else sigma_floor

    with nogil:
        for p in range(n):
            # first match in rank order
            m = -1
            dd_m = 0.0
            for j in range(k):
                dd = 0.0
                for ch in range(c):
                    diff = z[p, ch] - mu[p, j, ch]
                    dd += diff * diff
                thr = match_d * sigma[p, j]
                if dd < thr * thr:
                    m = j
                    dd_m = dd
                    break

            if m >= 0:
                sig = sigma[p, m]
                sig2 = sig * sig
                sig_pow = 1.0
                for ch in range(c):
                    sig_pow = sig_pow * sig
                density = exp(-0.5 * dd_m / sig2) / (norm_const * sig_pow)
                rho = alpha * density
                if rho > 1.0:
                    rho = 1.0

                for j in range(k):
                    w[p, j] = (1.0 - alpha) * w[p, j]
                w[p, m] = w[p, m] + alpha

                if rho > 0.0:
                    dd_new = 0.0
                    for ch in range(c):
                        mu[p, m, ch] = (1.0 - rho) * mu[p, m, ch] + rho * z[p, ch]
                        diff = z[p, ch] - mu[p, m, ch]
                        dd_new += diff * diff
                    sig2_new = (1.0 - rho) * sig2 + rho * dd_new
                    sig_new = sqrt(sig2_new)
                    if sig_new < sigma_floor:
                        sig_new = sigma_floor
                    sigma[p, m] = sig_new
            else:
                for j in range(k):
                    w[p, j] = (1.0 - alpha) * w[p, j]
                w[p, k - 1] = w_new_floor
                for ch in range(c):
                    mu[p, k - 1, ch] = z[p, ch]
                sigma[p, k - 1] = repl_sigma

            # renormalize only on real drift (matched updates preserve the
            # sum analytically; skipping keeps alpha=0 an exact identity)
            total = 0.0
            for j in range(k):
                total = total + w[p, j]
            if total - 1.0 > 1e-12 or 1.0 - total > 1e-12:
                for j in range(k):
                    w[p, j] = w[p, j] / total

            # stable insertion sort of component indices by descending rank
            for j in range(k):
                rankbuf[j] = w[p, j] / sigma[p, j]
                order[j] = j
            for j in range(1, k):
                oj = order[j]
                key = rankbuf[oj]
                i2 = j - 1
                while i2 >= 0 and rankbuf[order[i2]] < key:
                    order[i2 + 1] = order[i2]
                    i2 -= 1
                order[i2 + 1] = oj

            for j in range(k):
                tmp[j] = w[p, order[j]]
                tmp[k + j] = sigma[p, order[j]]
                for ch in range(c):
                    tmp[2 * k + j * c + ch] = mu[p, order[j], ch]
            for j in range(k):
                w[p, j] = tmp[j]
                sigma[p, j] = tmp[k + j]
                for ch in range(c):
                    mu[p, j, ch] = tmp[2 * k + j * c + ch]

            pos = k
            if m >= 0:
                for j in range(k):
                    if order[j] == m:
                        pos = j
                        break

            cum = 0.0
            b = k
            for j in range(k):
                cum = cum + w[p, j]
                if cum > T:
                    b = j + 1
                    break

            fg[p] = 1 if (m < 0 or pos >= b) else 0
