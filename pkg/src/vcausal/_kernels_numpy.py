"""Pure-numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels_numba``.
The numba twin runs the same floating point operations in a per-element loop.
"""
import numpy as np
from scipy.special import gammaln

NAME = "numpy"

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
BIN_SHIFT = np.uint64(1 << 24)
STREAM_SHIFT = np.uint64(1 << 16)
_INV53 = 1.0 / 9007199254740992.0

INVERSION_LIMIT = 10.0


def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def uniforms(key, bins, stream, draw):
    """Open-interval uniforms for counters ``(bins, stream, draw)`` under ``key``."""
    bins = np.asarray(bins, dtype=np.int64).astype(np.uint64)
    draw = np.asarray(draw, dtype=np.int64).astype(np.uint64)
    ctr = bins * BIN_SHIFT + np.uint64(stream) * STREAM_SHIFT + draw
    h = _mix(np.uint64(key) + ctr * GOLDEN)
    return ((h >> _S11).astype(np.float64) + 0.5) * _INV53


def poisson(key, bins, stream, lam):
    """One Poisson variate per counter ``bins[i]`` with mean ``lam[i]``.

    Inversion below ``INVERSION_LIMIT``, Hörmann's PTRS rejection above it.
    """
    bins = np.asarray(bins, dtype=np.int64)
    lam = np.asarray(lam, dtype=np.float64)
    out = np.zeros(bins.shape, dtype=np.int64)

    small = np.flatnonzero((lam > 0.0) & (lam < INVERSION_LIMIT))
    if small.size:
        out[small] = _inversion(key, bins[small], stream, lam[small])

    large = np.flatnonzero(lam >= INVERSION_LIMIT)
    if large.size:
        out[large] = _ptrs(key, bins[large], stream, lam[large])
    return out


def _inversion(key, bins, stream, lam):
    u = uniforms(key, bins, stream, 0)
    p = np.exp(-lam)
    cdf = p.copy()
    k = np.zeros(bins.shape, dtype=np.int64)
    active = np.flatnonzero(u > cdf)
    limit = lam + 64.0
    while active.size:
        k[active] += 1
        p[active] = p[active] * (lam[active] / k[active])
        cdf[active] = cdf[active] + p[active]
        keep = (u[active] > cdf[active]) & (k[active] < limit[active])
        active = active[keep]
    return k


def _ptrs(key, bins, stream, lam):
    slam = np.sqrt(lam)
    loglam = np.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)

    out = np.zeros(bins.shape, dtype=np.int64)
    pending = np.arange(bins.size)
    attempt = 0
    while pending.size:
        bp = bins[pending]
        u = uniforms(key, bp, stream, 2 * attempt) - 0.5
        v = uniforms(key, bp, stream, 2 * attempt + 1)
        ap, bb, lp = a[pending], b[pending], lam[pending]
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * ap / us + bb) * u + lp + 0.43)

        accepted = (us >= 0.07) & (v <= vr[pending])
        rejected = (k < 0.0) | ((us < 0.013) & (v > us))
        slow = np.flatnonzero(~accepted & ~rejected)
        if slow.size:
            ks = k[slow]
            lhs = (np.log(v[slow]) + np.log(invalpha[pending][slow])
                   - np.log(ap[slow] / (us[slow] * us[slow]) + bb[slow]))
            rhs = -lp[slow] + ks * loglam[pending][slow] - gammaln(ks + 1.0)
            accepted[slow] = lhs <= rhs

        out[pending[accepted]] = k[accepted].astype(np.int64)
        pending = pending[~accepted]
        attempt += 1
    return out


def moving_average(x, window):
    """Centered moving average, window truncated at the series edges.

    Output ``i`` averages ``x[i - window//2 : i - window//2 + window]``
    clipped to the valid range.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    csum = np.zeros(n + 1)
    np.cumsum(x, out=csum[1:])
    i = np.arange(n)
    lo = np.maximum(i - window // 2, 0)
    hi = np.minimum(i - window // 2 + window, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def schedule_widths(n_bins, width_q, deficit, correction):
    """Quantized bin widths with the drift-reset rule.

    Bin ``j`` is lengthened by ``correction`` when the start of bin ``j + 1``
    would otherwise lag its ideal position by more than ``correction``.
    Units are clock quanta throughout.
    """
    j = np.arange(n_bins + 1, dtype=np.float64)
    resets = np.maximum(np.ceil(j * deficit / correction) - 1.0, 0.0).astype(np.int64)
    widths = np.full(n_bins, width_q, dtype=np.int64)
    widths += correction * np.diff(resets)
    return widths
