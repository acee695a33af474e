"""Pure-Python/numpy reference versions of the hot loops in ``_ckernels.pyx``.

Both modules expose identical signatures and must agree to rounding.
"""

from __future__ import annotations

import math

import numpy as np

_CHUNK = 8192


def theta_sum(re, im, w, ts, tol_rel, tol_abs):
    """Truncated sums sum_n w_n exp(-t a_n) for every t in ``ts``.

    Returns ``(sums, used)``; ``used[i]`` is the number of entries consumed for
    ``ts[i]``, or -1 when the supplied entries ran out before the tail estimate
    dropped below tolerance.
    """
    re = np.ascontiguousarray(re, dtype=float)
    im = np.ascontiguousarray(im, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    ts = np.ascontiguousarray(ts, dtype=float)
    m = re.shape[0]
    out = np.zeros(ts.shape[0], dtype=complex)
    used = np.full(ts.shape[0], -1, dtype=np.int64)
    aw = np.abs(w)
    for i, t in enumerate(ts):
        partial = 0.0 + 0.0j
        start = 0
        while start < m:
            stop = min(m, start + _CHUNK)
            decay = np.exp(-t * re[start:stop])
            terms = w[start:stop] * decay * np.exp(-1j * t * im[start:stop])
            csum = partial + np.cumsum(terms)
            # tail estimate after entry n uses entry n+1 and the local ratio
            nxt = min(m, stop + 1)
            mag_next = aw[start + 1:nxt] * np.exp(-t * re[start + 1:nxt])
            d = re[start + 1:nxt] - re[start:nxt - 1]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                r = np.where(d > 0, np.exp(-t * np.where(d > 0, d, 0.0)), 1.0)
                tail = np.where(mag_next == 0.0, 0.0,
                                np.where(r < 1.0, mag_next / (1.0 - r), np.inf))
                # a zero weight says nothing about the size of what follows
                tail = np.where(aw[start + 1:nxt] == 0.0, np.inf, tail)
            k = tail.shape[0]
            ok = tail <= np.maximum(tol_rel * np.abs(csum[:k]), tol_abs)
            ok |= tail < 1e-300
            hit = np.flatnonzero(ok)
            if hit.size:
                n = int(hit[0])
                out[i] = csum[n]
                used[i] = start + n + 1
                break
            partial = csum[-1]
            start = stop
        else:
            out[i] = partial
    return out, used


def geodesic_log_sum(lengths, counts, s, tol_abs, n_max):
    """sum over primitives and N >= 0 of count * log(1 - exp(-(s+N) l)).

    Returns ``(log_sum, tail_bound, n_used_max)`` with a certified bound on the
    discarded N-tail.
    """
    lengths = np.asarray(lengths, dtype=float)
    counts = np.asarray(counts, dtype=float)
    p = max(1, lengths.shape[0])
    parts = []
    tail_total = 0.0
    n_used = 0
    for l, c in zip(lengths, counts):
        q = math.exp(-l)
        x = math.exp(-s * l)
        n = 0
        while True:
            parts.append(c * math.log1p(-x))
            xn = x * q
            tail = c * xn / ((1.0 - xn) * (1.0 - q))
            n += 1
            if tail < tol_abs / p or n >= n_max:
                break
            x = xn
        tail_total += tail
        n_used = max(n_used, n)
    return math.fsum(parts), tail_total, n_used
