"""Coincidence data pipeline: accidental subtraction, normalization, probabilities,
S_max series, drift filtering, counting statistics and the min/max breakdown bound."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import curve_fit
from scipy.special import erfc

from . import _accel
from .errors import ValidationError

SMOOTHING_WINDOW = 200
POISSON_BAND = (0.95, 1.05)
DEFAULT_PULSE_WIDTH = 29.2e-9


def subtract_spurious(n_a, n_b, n, delta_t, t_p):
    """``n − n_a·n_b·t_p/Δt``. Negative results are kept, not clamped."""
    delta_t = np.asarray(delta_t, dtype=np.float64)
    if np.any(delta_t <= 0):
        raise ValidationError("acquisition interval must be positive")
    n_a = np.asarray(n_a, dtype=np.float64)
    return np.asarray(n, dtype=np.float64) - n_a * np.asarray(n_b, dtype=np.float64) * t_p / delta_t


def n_tot(counts):
    return float(np.sum(counts))


@dataclass(frozen=True)
class NormalizationSet:
    """Accidental-corrected counts at (0,0), (0,90), (90,0), (90,90)."""

    counts: tuple
    acquisition_time: float

    def __post_init__(self):
        if len(self.counts) != 4:
            raise ValidationError("normalization needs exactly four counts")
        if not self.acquisition_time > 0:
            raise ValidationError("acquisition_time must be positive")
        if not self.n_tot > 0:
            raise ValidationError(f"N_tot must be positive, got {self.n_tot}")

    @property
    def n_tot(self):
        return n_tot(self.counts)

    @classmethod
    def from_counts(cls, raw, t_p=DEFAULT_PULSE_WIDTH):
        corrected = subtract_spurious(raw.n_a, raw.n_b, raw.n, raw.acquisition_time, t_p)
        return cls(tuple(float(c) for c in corrected), raw.acquisition_time)


@dataclass(frozen=True)
class ProbabilitySeries:
    run_index: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("probability series contains non-finite values")

    @property
    def mean(self):
        return float(np.mean(self.values))

    @property
    def sigma(self):
        return float(np.std(self.values))


def probability_series(run, norm, t_p=DEFAULT_PULSE_WIDTH):
    """Per-bin joint probability, N_tot rescaled from its window to each bin width."""
    if not norm.n_tot > 0:
        raise ValidationError("N_tot must be positive")
    width = run.schedule.width_s
    corrected = subtract_spurious(run.n_a, run.n_b, run.n, width, t_p)
    return ProbabilitySeries(run.run_index,
                             corrected / (norm.n_tot * width / norm.acquisition_time))


def _values(series):
    return series.values if isinstance(series, ProbabilitySeries) else np.asarray(series, dtype=float)


def smax_series(p0, p1, p2, p3):
    """``P0 − P1 − P2 − P3`` bin by bin on the common ERA grid."""
    return _values(p0) - _values(p1) - _values(p2) - _values(p3)


def smoothing(series, window=SMOOTHING_WINDOW):
    """Centered moving average over ``window`` points, truncated at the edges.

    An even window covers ``window // 2`` points before and ``window // 2 - 1``
    after the output point.
    """
    if window < 1:
        raise ValidationError("window must be at least 1")
    return _accel.kernels.moving_average(np.asarray(series, dtype=np.float64), int(window))


def filtered_counts(series, window=SMOOTHING_WINDOW):
    """``N − smooth(N) + <N>``: the slow drift removed, the mean level restored."""
    x = np.asarray(series, dtype=np.float64)
    return x - smoothing(x, window) + x.mean()


@dataclass(frozen=True)
class CountingStats:
    mean: float
    variance: float
    ratio: float
    poisson_like: bool
    overlay_mean: float
    overlay_sigma: float


def counting_statistics_check(filtered, band=POISSON_BAND):
    """Variance against mean, plus the parameter-free normal overlay μ = σ² = <N>."""
    x = np.asarray(filtered, dtype=np.float64)
    if x.size == 0:
        raise ValidationError("empty series")
    mean = float(x.mean())
    var = float(x.var())
    ratio = var / mean if mean > 0 else math.inf
    ok = bool(band[0] <= ratio <= band[1])
    return CountingStats(mean, var, ratio, ok, mean, math.sqrt(max(mean, 0.0)))


def gaussian(x, amplitude, mean, sigma):
    return amplitude * np.exp(-((x - mean) ** 2) / (2.0 * sigma * sigma))


def histogram(values):
    """Counts on Freedman–Diaconis bins. Returns ``(centers, counts, edges)``."""
    values = np.asarray(values, dtype=np.float64)
    edges = np.histogram_bin_edges(values, bins="fd")
    if edges.size < 4:
        edges = np.histogram_bin_edges(values, bins=16)
    counts, edges = np.histogram(values, bins=edges)
    return 0.5 * (edges[1:] + edges[:-1]), counts, edges


def fit_gaussian(values):
    """Least-squares Gaussian fit to the histogram of ``values``.

    Returns ``(amplitude, mean, sigma)``; falls back to moments if the fit fails.
    """
    values = np.asarray(values, dtype=np.float64)
    centers, counts, _ = histogram(values)
    mu, sd = float(values.mean()), float(values.std())
    start = (float(counts.max()), mu, sd if sd > 0 else 1.0)
    try:
        popt, _ = curve_fit(gaussian, centers, counts.astype(float), p0=start, maxfev=5000)
    except (RuntimeError, ValueError):
        return start
    amplitude, mean, sigma = (float(v) for v in popt)
    return amplitude, mean, abs(sigma)


def significance(s_lower, sigma):
    """``z = S/σ``, the one-sided tail ``½ erfc(z/√2)`` and its square."""
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    z = s_lower / sigma
    p = 0.5 * float(erfc(z / math.sqrt(2.0)))
    return z, p, p * p


@dataclass(frozen=True)
class BreakdownReport:
    s_lower: float
    sigma: float
    z: float
    p_single: float
    p_double: float
    smax_mean: float
    fit_amplitude: float
    fit_mean: float
    fit_sigma: float
    sigma_moment: float

    @property
    def breakdown_detected(self):
        """True when the data cannot exclude S_max ≤ 0 at the orthogonality times."""
        return self.s_lower <= 0.0

    def to_dict(self):
        doc = asdict(self)
        doc["breakdown_detected"] = self.breakdown_detected
        return doc


def report_from_summary(s_lower, sigma, smax_mean=math.nan):
    z, p, p2 = significance(s_lower, sigma)
    return BreakdownReport(s_lower, sigma, z, p, p2, smax_mean, math.nan, smax_mean, sigma,
                           math.nan)


def lower_bound(p0, p1, p2, p3):
    """``MIN(P0) − MAX(P1) − MAX(P2) − MAX(P3)``: the least S_max(j) over any times."""
    return float(_values(p0).min() - _values(p1).max() - _values(p2).max() - _values(p3).max())


def smax_at(p0, p1, p2, p3, bins):
    """S_max from each run sampled at its own bin index ``bins = (i0, i1, i2, i3)``."""
    i0, i1, i2, i3 = bins
    return float(_values(p0)[i0] - _values(p1)[i1] - _values(p2)[i2] - _values(p3)[i3])


def breakdown_report(p0, p1, p2, p3, smax=None):
    if smax is None:
        smax = smax_series(p0, p1, p2, p3)
    smax = np.asarray(smax, dtype=np.float64)
    if smax.size == 0:
        raise ValidationError("empty S_max series")
    amplitude, mean, sigma = fit_gaussian(smax)
    s = lower_bound(p0, p1, p2, p3)
    z, p, p2_ = significance(s, sigma)
    return BreakdownReport(s, sigma, z, p, p2_, float(smax.mean()), amplitude, mean, sigma,
                           float(smax.std()))


def histogram_rows(values, fit):
    """Rows ``(bin_center, count, gauss_overlay)`` for plotting."""
    centers, counts, _ = histogram(values)
    overlay = gaussian(centers, *fit)
    return list(zip(centers.tolist(), counts.tolist(), overlay.tolist()))
