"""numba twins of ``_kernels_numpy``. Same signatures, same float operations."""
import math

import numpy as np
from numba import njit

NAME = "numba"

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


@njit(cache=True)
def _uniform(key, b, stream, draw):
    ctr = np.uint64(b) * BIN_SHIFT + np.uint64(stream) * STREAM_SHIFT + np.uint64(draw)
    z = key + ctr * GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return (float(z >> _S11) + 0.5) * _INV53


@njit(cache=True)
def _uniforms(key, bins, stream, draw):
    out = np.empty(bins.size)
    for i in range(bins.size):
        out[i] = _uniform(key, bins[i], stream, draw[i])
    return out


def uniforms(key, bins, stream, draw):
    bins = np.ascontiguousarray(bins, dtype=np.int64)
    draw = np.broadcast_to(np.asarray(draw, dtype=np.int64), bins.shape)
    return _uniforms(np.uint64(key), bins.ravel(), stream,
                     np.ascontiguousarray(draw).ravel()).reshape(bins.shape)


@njit(cache=True)
def _inversion_one(key, b, stream, lam):
    u = _uniform(key, b, stream, 0)
    p = math.exp(-lam)
    cdf = p
    k = 0
    limit = lam + 64.0
    while u > cdf and k < limit:
        k += 1
        p = p * (lam / k)
        cdf = cdf + p
    return k


@njit(cache=True)
def _ptrs_one(key, b, stream, lam):
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    bb = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * bb
    invalpha = 1.1239 + 1.1328 / (bb - 3.4)
    vr = 0.9277 - 3.6224 / (bb - 2.0)
    attempt = 0
    while True:
        u = _uniform(key, b, stream, 2 * attempt) - 0.5
        v = _uniform(key, b, stream, 2 * attempt + 1)
        attempt += 1
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + bb) * u + lam + 0.43)
        if us >= 0.07 and v <= vr:
            return np.int64(k)
        if k < 0.0 or (us < 0.013 and v > us):
            continue
        lhs = math.log(v) + math.log(invalpha) - math.log(a / (us * us) + bb)
        rhs = -lam + k * loglam - math.lgamma(k + 1.0)
        if lhs <= rhs:
            return np.int64(k)


@njit(cache=True)
def _poisson(key, bins, stream, lam):
    out = np.zeros(bins.size, dtype=np.int64)
    for i in range(bins.size):
        li = lam[i]
        if li >= INVERSION_LIMIT:
            out[i] = _ptrs_one(key, bins[i], stream, li)
        elif li > 0.0:
            out[i] = _inversion_one(key, bins[i], stream, li)
    return out


def poisson(key, bins, stream, lam):
    bins = np.ascontiguousarray(bins, dtype=np.int64)
    lam = np.ascontiguousarray(np.broadcast_to(np.asarray(lam, dtype=np.float64), bins.shape))
    return _poisson(np.uint64(key), bins.ravel(), stream, lam.ravel()).reshape(bins.shape)


@njit(cache=True)
def _moving_average(x, window):
    n = x.size
    csum = np.zeros(n + 1)
    for i in range(n):
        csum[i + 1] = csum[i] + x[i]
    out = np.empty(n)
    half = window // 2
    for i in range(n):
        lo = max(i - half, 0)
        hi = min(i - half + window, n)
        out[i] = (csum[hi] - csum[lo]) / (hi - lo)
    return out


def moving_average(x, window):
    return _moving_average(np.ascontiguousarray(x, dtype=np.float64), int(window))


@njit(cache=True)
def _schedule_widths(n_bins, width_q, deficit, correction):
    widths = np.empty(n_bins, dtype=np.int64)
    resets = 0
    for j in range(n_bins):
        w = width_q
        # lag of the next start vs its ideal position
        if (j + 1) * deficit - correction * resets > correction:
            w += correction
            resets += 1
        widths[j] = w
    return widths


def schedule_widths(n_bins, width_q, deficit, correction):
    return _schedule_widths(int(n_bins), int(width_q), float(deficit), int(correction))
