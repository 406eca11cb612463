"""Synthetic coincidence runs for the daily-locked CHSH measurement.

Each acquisition bin draws Poisson singles for both detectors, Poisson true
coincidences and Poisson accidental coincidences. Random numbers come from
counter-based streams keyed by (seed, run label, bin, stream), so any bin can
be regenerated on its own and the result never depends on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _accel
from .bounds import BoundInputs, beta_t_max, blind_window
from .errors import OutOfValidityError, ValidationError
from .geometry import OrthogonalityKind, PreferredFrame, orthogonality_times
from .timebase import DAY, ERA_B1

# CHSH-type settings (alpha, xi) in degrees for P0..P3
SMAX_SETTINGS = ((45.0, 67.5), (0.0, 67.5), (45.0, 112.5), (90.0, 22.5))
NORMALIZATION_SETTINGS = ((0.0, 0.0), (0.0, 90.0), (90.0, 0.0), (90.0, 90.0))

# measured mean probabilities used for replay in table mode
MEASURED_TABLE = {
    (45.0, 67.5): 0.38087,
    (0.0, 67.5): 0.06999,
    (45.0, 112.5): 0.07187,
    (90.0, 22.5): 0.08378,
}

LOCAL_MODELS = ("uncorrelated", "shared_polarization")

STREAM_SINGLES_A = 0
STREAM_SINGLES_B = 1
STREAM_TRUE = 2
STREAM_SPURIOUS = 3
NORMALIZATION_LABEL = 1000

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z):
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed, label):
    """64-bit key of the stream family for one run (or normalization) label."""
    return _mix64(_mix64(int(seed)) + _GOLDEN * (int(label) + 1))


def qm_probability(alpha, xi, v=1.0):
    """Joint pass probability for the |HH> + |VV> state mixed with white noise."""
    c = np.cos(np.radians(np.asarray(alpha) - np.asarray(xi)))
    return 0.5 * (v * c * c + 0.5 * (1.0 - v))


def local_probability(alpha, xi, model):
    """Joint pass probability when the correlations are not quantum.

    ``shared_polarization`` is a uniformly random common polarization with
    Malus-law detection on both sides.
    """
    if model == "uncorrelated":
        return np.full(np.broadcast(np.asarray(alpha), np.asarray(xi)).shape, 0.25)[()]
    if model == "shared_polarization":
        return 0.25 + 0.125 * np.cos(2.0 * np.radians(np.asarray(alpha) - np.asarray(xi)))
    raise ValidationError(f"unknown local model {model!r}")


def smax_from_probabilities(p0, p1, p2, p3):
    return p0 - p1 - p2 - p3


def _setting_key(setting):
    return (round(float(setting[0]) % 180.0, 9), round(float(setting[1]) % 180.0, 9))


@dataclass(frozen=True)
class SourceModel:
    """Photon-pair source and detection chain. Rates are per second."""

    pair_rate: float = 23000.0
    singles_rate_a: float = 162500.0
    singles_rate_b: float = 162500.0
    pulse_width: float = 29.2e-9
    visibility: float = 1.0
    probability_table: Optional[dict] = None
    drift_amplitude: float = 0.03
    drift_period: float = 86400.0
    drift_phase: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("pair_rate", "singles_rate_a", "singles_rate_b", "pulse_width"):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"{name} must be non-negative")
        if not (0.0 <= self.visibility <= 1.0):
            raise ValidationError("visibility must lie in [0, 1]")
        if not (0.0 <= self.drift_amplitude < 1.0):
            raise ValidationError("drift_amplitude must lie in [0, 1)")
        if not self.drift_period > 0:
            raise ValidationError("drift_period must be positive")
        if self.probability_table is not None:
            table = {_setting_key(k): float(p) for k, p in self.probability_table.items()}
            if any(not (0.0 <= p <= 1.0) for p in table.values()):
                raise ValidationError("probability table entries must lie in [0, 1]")
            object.__setattr__(self, "probability_table", table)

    @property
    def mode(self):
        return "visibility" if self.probability_table is None else "table"

    def probability(self, setting):
        if self.probability_table is not None:
            p = self.probability_table.get(_setting_key(setting))
            if p is not None:
                return p
        return float(qm_probability(setting[0], setting[1], self.visibility))

    def drift(self, utc_seconds):
        phase = 2.0 * np.pi * np.asarray(utc_seconds) / self.drift_period + self.drift_phase
        return 1.0 + self.drift_amplitude * np.sin(phase)


@dataclass(frozen=True)
class VCausalScenario:
    """A preferred frame with finite-speed influences at ``beta_t`` (units of c).

    ``window_halfwidth`` (s) overrides the half width derived from the bound;
    ``daily_shift`` moves the orthogonality times by that many minutes per ERA day.
    """

    pf: PreferredFrame
    beta_t: float
    local_model: str = "shared_polarization"
    window_halfwidth: Optional[float] = None
    daily_shift: float = 0.0

    def __post_init__(self):
        if not self.beta_t > 1.0:
            raise ValidationError("beta_t must exceed 1")
        if self.local_model not in LOCAL_MODELS:
            raise ValidationError(f"unknown local model {self.local_model!r}")
        if self.window_halfwidth is not None and not self.window_halfwidth >= 0:
            raise ValidationError("window_halfwidth must be non-negative")


@dataclass(frozen=True)
class RunSeries:
    setting: tuple
    schedule: object
    n_a: np.ndarray = field(repr=False)
    n_b: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    breakdown: np.ndarray = field(repr=False)
    run_index: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("n_a", "n_b", "n", "breakdown"):
            arr = getattr(self, name)
            if arr.shape != (self.schedule.n_bins,):
                raise ValidationError(f"{name} length does not match the schedule")
            arr.flags.writeable = False

    @property
    def era_s(self):
        return self.schedule.era_offsets()


@dataclass(frozen=True)
class NormalizationCounts:
    """Raw counts at the four orthogonal settings, each over ``acquisition_time``."""

    n_a: np.ndarray
    n_b: np.ndarray
    n: np.ndarray
    acquisition_time: float
    settings: tuple = NORMALIZATION_SETTINGS


def breakdown_windows(scenario, geom, schedule, era_day_index=0):
    """Breakdown intervals of one run as (start, end) UTC offsets in seconds.

    Returns ``(windows, warnings)``. No windows are produced when the frame
    never becomes orthogonal to the baseline or when ``beta_t`` is above what
    this geometry and bin width can resolve.
    """
    if scenario is None:
        return [], []
    pf = scenario.pf
    span = schedule.span
    orth = orthogonality_times(pf, geom)
    if orth.kind is OrthogonalityKind.ALWAYS:
        return [(0.0, span)], []
    if orth.kind is not OrthogonalityKind.TWO_SOLUTIONS:
        return [], [f"no orthogonality windows ({orth.kind.value})"]

    try:
        inputs = BoundInputs(geom.rho, schedule.nominal_bin, pf.beta, pf.chi, geom.gamma,
                             geom.sidereal_day)
        reach = beta_t_max(inputs)
    except OutOfValidityError as exc:
        return [], [f"bound undefined: {exc}"]
    if scenario.beta_t >= reach:
        return [], [f"beta_t={scenario.beta_t:g} not below beta_t_max={reach:g}"]

    half = scenario.window_halfwidth
    if half is None:
        half = 0.5 * blind_window(scenario.beta_t, inputs)
    if math.isinf(half):
        return [(0.0, span)], []

    shift = 60.0 * scenario.daily_shift * era_day_index
    era_span = span * ERA_B1
    windows = []
    for t in orth.times:
        first = math.floor((-half * ERA_B1 - t - shift) / DAY)
        last = math.ceil((era_span + half * ERA_B1 - t - shift) / DAY)
        for m in range(first, last + 1):
            center = (t + shift + m * DAY) / ERA_B1
            lo, hi = center - half, center + half
            if hi > 0.0 and lo < span:
                windows.append((lo, hi))
    windows.sort()
    return windows, []


def window_fraction(schedule, windows):
    """Fraction of every bin covered by the union of ``windows``."""
    starts = schedule.starts
    ends = starts + schedule.width_s
    covered = np.zeros(schedule.n_bins)
    for lo, hi in _merge(windows):
        covered += np.clip(np.minimum(ends, hi) - np.maximum(starts, lo), 0.0, None)
    return np.minimum(covered / schedule.width_s, 1.0)


def _merge(windows):
    merged = []
    for lo, hi in sorted(windows):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _draw_counts(key, bins, width, lam_a, lam_b, lam_true, pulse_width):
    k = _accel.kernels
    n_a = k.poisson(key, bins, STREAM_SINGLES_A, lam_a)
    n_b = k.poisson(key, bins, STREAM_SINGLES_B, lam_b)
    true = k.poisson(key, bins, STREAM_TRUE, lam_true)
    lam_s = n_a.astype(np.float64) * n_b * pulse_width / width
    spurious = k.poisson(key, bins, STREAM_SPURIOUS, lam_s)
    return n_a, n_b, true + spurious


def simulate_run(setting, source, scenario, schedule, geom, era_day_index=0, run_index=0):
    """Counts for one run at a fixed polarizer ``setting`` (degrees)."""
    windows, warnings = breakdown_windows(scenario, geom, schedule, era_day_index)
    frac = window_fraction(schedule, windows) if windows else np.zeros(schedule.n_bins)

    p = np.full(schedule.n_bins, source.probability(setting))
    if windows:
        p_local = float(local_probability(setting[0], setting[1], scenario.local_model))
        p = p * (1.0 - frac) + p_local * frac

    width = schedule.width_s
    mid = schedule.start_utc.seconds + schedule.starts + 0.5 * width
    gain = source.drift(mid)
    bins = np.arange(schedule.n_bins, dtype=np.int64)
    key = stream_key(source.rng_seed, run_index)
    n_a, n_b, n = _draw_counts(key, bins, width,
                               source.singles_rate_a * width * gain,
                               source.singles_rate_b * width * gain,
                               source.pair_rate * width * gain * p,
                               source.pulse_width)
    metadata = {
        "seed": source.rng_seed,
        "run_index": run_index,
        "era_day_index": era_day_index,
        "setting": list(setting),
        "mode": source.mode,
        "windows": [list(w) for w in windows],
        "warnings": warnings,
        "schedule_digest": schedule.digest(),
    }
    return RunSeries(tuple(setting), schedule, n_a, n_b, n, frac, run_index, metadata)


def simulate_normalization(source, run_start, acquisition_time=100.0, lead=7200.0,
                           run_index=0):
    """The four orthogonal-setting acquisitions taken ``lead`` seconds before a run."""
    if not acquisition_time > 0:
        raise ValidationError("acquisition_time must be positive")
    bins = np.arange(4, dtype=np.int64)
    t0 = run_start.seconds - lead
    gain = source.drift(t0 + acquisition_time * (bins + 0.5))
    p = np.array([source.probability(s) for s in NORMALIZATION_SETTINGS])
    width = np.full(4, float(acquisition_time))
    key = stream_key(source.rng_seed, NORMALIZATION_LABEL + run_index)
    n_a, n_b, n = _draw_counts(key, bins, width,
                               source.singles_rate_a * width * gain,
                               source.singles_rate_b * width * gain,
                               source.pair_rate * width * gain * p,
                               source.pulse_width)
    return NormalizationCounts(n_a, n_b, n, float(acquisition_time))
