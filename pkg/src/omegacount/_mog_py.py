"""Vectorized numpy implementation of the per-pixel mixture update.

Fallback for the compiled kernel in ``_mog_cy``; both follow the identical
arithmetic, in the identical order, over float64, so results agree to within
libm rounding of exp(). Arrays are updated in place:

  w     (n, k)    component weights, rows sorted by descending w/sigma
  mu    (n, k, c) component means
  sigma (n, k)    component standard deviations
  z     (n, c)    incoming pixel values
  fg    (n,)      output: 1 where the pixel is foreground
"""

from __future__ import annotations

import numpy as np


def update_grid(w, mu, sigma, z, fg, alpha, match_d, T,
                sigma_init, sigma_floor, w_new_floor, norm_const):
    n, k = w.shape
    c = mu.shape[2]
    rows = np.arange(n)

    # squared distance to each component's mean (pre-update)
    dd = np.empty((n, k))
    for j in range(k):
        acc = np.zeros(n)
        for ch in range(c):
            diff = z[:, ch] - mu[:, j, ch]
            acc += diff * diff
        dd[:, j] = acc
    thr = match_d * sigma
    matched = dd < thr * thr
    has_match = matched.any(axis=1)
    m_idx = np.where(has_match, matched.argmax(axis=1), 0)  # first match in rank order

    # adaptation rate from the matched component's pre-update density
    sig_old = sigma[rows, m_idx]
    sig2_old = sig_old * sig_old
    sig_pow = np.ones(n)
    for _ in range(c):
        sig_pow = sig_pow * sig_old
    density = np.exp(-0.5 * dd[rows, m_idx] / sig2_old) / (norm_const * sig_pow)
    rho = np.minimum(alpha * density, 1.0)

    # weights decay everywhere; the matched component gains alpha
    w[:] = (1.0 - alpha) * w
    gained = w[rows, m_idx] + alpha
    w[rows, m_idx] = np.where(has_match, gained, w[rows, m_idx])

    # matched component tracks the sample (skipped when rho is exactly 0,
    # which keeps alpha=0 updates an identity on all parameters)
    track = has_match & (rho > 0.0)
    dd_new = np.zeros(n)
    for ch in range(c):
        mu_old = mu[rows, m_idx, ch]
        mu_new = (1.0 - rho) * mu_old + rho * z[:, ch]
        mu[rows, m_idx, ch] = np.where(track, mu_new, mu_old)
        diff = z[:, ch] - mu[rows, m_idx, ch]
        dd_new += diff * diff
    sig2_new = (1.0 - rho) * sig2_old + rho * dd_new
    sig_new = np.sqrt(sig2_new)
    sig_new = np.where(sig_new < sigma_floor, sigma_floor, sig_new)
    sigma[rows, m_idx] = np.where(track, sig_new, sigma[rows, m_idx])

    # no match anywhere: replace the lowest-rank component
    repl = ~has_match
    if repl.any():
        w[repl, k - 1] = w_new_floor
        for ch in range(c):
            mu[repl, k - 1, ch] = z[repl, ch]
        sigma[repl, k - 1] = sigma_init if sigma_init >= sigma_floor else sigma_floor

    # renormalize, but only when the sum actually drifted: a matched update
    # preserves the sum analytically, and skipping the division keeps
    # alpha=0 updates bit-exact identities
    total = np.zeros(n)
    for j in range(k):
        total = total + w[:, j]
    drifted = np.abs(total - 1.0) > 1e-12
    if drifted.any():
        w[drifted] /= total[drifted, None]

    # stable re-sort by descending rank
    rank = w / sigma
    order = np.argsort(-rank, axis=1, kind="stable")
    w[:] = np.take_along_axis(w, order, axis=1)
    sigma[:] = np.take_along_axis(sigma, order, axis=1)
    mu[:] = np.take_along_axis(mu, order[:, :, None], axis=1)

    # background prefix; foreground when unmatched or matched outside it
    cum = np.cumsum(w, axis=1)
    exceeds = cum > T
    b = np.where(exceeds.any(axis=1), exceeds.argmax(axis=1) + 1, k)
    new_pos = (order == m_idx[:, None]).argmax(axis=1)
    fg[:] = np.where(has_match, new_pos >= b, True).astype(np.uint8)
