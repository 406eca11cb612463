"""UTC, UT1 and Earth Rotation Angle time, plus the sidereal-locked acquisition schedule.

Internally every instant is a float count of seconds from the J2000 epoch
(JD 2451545.0). Julian Dates only appear at the API boundary.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np
from scipy.optimize import brentq

from . import _accel
from .errors import Dut1FormatError, TableRangeError, ValidationError

J2000_JD = 2451545.0
J2000_MJD = 51544.5
DAY = 86400.0

# ERA(UT1) = 2π (ERA_A1 + ERA_B1 · (JD_UT1 − 2451545.0))
ERA_A1 = 0.7790572732640
ERA_B1 = 1.00273781191135448
ERA_DAY_UTC = DAY / ERA_B1

DUT1_LIMIT = 0.9
_J2000_DATETIME = datetime(2000, 1, 1, 12, 0, 0, tzinfo=timezone.utc)


@dataclass(frozen=True, order=True)
class UtcInstant:
    """UTC seconds since J2000, leap seconds ignored."""

    seconds: float

    def __post_init__(self):
        if not math.isfinite(self.seconds):
            raise ValidationError(f"non-finite UTC instant: {self.seconds}")

    @classmethod
    def from_jd(cls, jd, frac=0.0):
        """Build from a Julian Date, optionally split as ``jd + frac``."""
        return cls((jd - J2000_JD) * DAY + frac * DAY)

    @classmethod
    def from_mjd(cls, mjd):
        return cls((mjd - J2000_MJD) * DAY)

    @classmethod
    def from_datetime(cls, dt):
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        delta = dt - _J2000_DATETIME
        return cls(delta.days * DAY + delta.seconds + delta.microseconds * 1e-6)

    @classmethod
    def from_iso(cls, text):
        text = text.strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(text)
        except ValueError as exc:
            raise ValidationError(f"bad ISO 8601 UTC time {text!r}") from exc
        return cls.from_datetime(dt)

    @property
    def jd(self):
        return self.seconds / DAY + J2000_JD

    @property
    def jd_parts(self):
        """``(whole, frac)`` with ``whole + frac`` the Julian Date, exact to well below 1 μs."""
        days = math.floor(self.seconds / DAY)
        return J2000_JD + days, (self.seconds - days * DAY) / DAY

    @property
    def mjd(self):
        return self.seconds / DAY + J2000_MJD

    def isoformat(self):
        whole = math.floor(self.seconds)
        micro = round((self.seconds - whole) * 1e6)
        if micro == 1_000_000:
            whole, micro = whole + 1, 0
        dt = _J2000_DATETIME + timedelta(seconds=whole, microseconds=micro)
        return dt.isoformat(timespec="microseconds").replace("+00:00", "Z")

    def __add__(self, dt):
        return UtcInstant(self.seconds + float(dt))

    def __sub__(self, other):
        if isinstance(other, UtcInstant):
            return self.seconds - other.seconds
        return UtcInstant(self.seconds - float(other))


@dataclass(frozen=True)
class DeltaUt1Table:
    """Daily UT1−UTC values at 0h UTC of each MJD."""

    mjd: np.ndarray
    dut1: np.ndarray

    def __post_init__(self):
        mjd = np.asarray(self.mjd, dtype=np.int64)
        dut1 = np.asarray(self.dut1, dtype=np.float64)
        if mjd.ndim != 1 or mjd.shape != dut1.shape:
            raise ValidationError("mjd and dut1 must be 1-D arrays of equal length")
        if mjd.size == 0:
            raise ValidationError("empty ΔUT1 table")
        if np.any(np.diff(mjd) <= 0):
            raise ValidationError("ΔUT1 table mjd must be strictly increasing")
        if np.any(~np.isfinite(dut1)) or np.any(np.abs(dut1) >= DUT1_LIMIT):
            raise ValidationError(f"|UT1-UTC| must be below {DUT1_LIMIT} s")
        mjd.flags.writeable = False
        dut1.flags.writeable = False
        object.__setattr__(self, "mjd", mjd)
        object.__setattr__(self, "dut1", dut1)

    @classmethod
    def constant(cls, value, first_mjd, last_mjd):
        days = np.arange(int(first_mjd), int(last_mjd) + 1)
        return cls(days, np.full(days.size, float(value)))

    @property
    def first_mjd(self):
        return int(self.mjd[0])

    @property
    def last_mjd(self):
        return int(self.mjd[-1])

    def dut1_at(self, mjd):
        """Piecewise-linear UT1−UTC at a fractional MJD."""
        if not (self.mjd[0] <= mjd <= self.mjd[-1]):
            raise TableRangeError(
                f"MJD {mjd:.6f} outside ΔUT1 table [{self.first_mjd}, {self.last_mjd}]")
        return float(np.interp(mjd, self.mjd, self.dut1))

    def to_text(self):
        lines = ["# mjd dut1_seconds"]
        lines += [f"{m} {d!r}" for m, d in zip(self.mjd.tolist(), self.dut1.tolist())]
        return "\n".join(lines) + "\n"


def parse_dut1_table(text):
    """Parse ``<mjd> <dut1_seconds>`` lines; ``#`` starts a comment."""
    mjds, values = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise Dut1FormatError(f"expected '<mjd> <dut1>', got {raw.strip()!r}", lineno)
        try:
            mjd = int(parts[0])
            dut1 = float(parts[1])
        except ValueError:
            raise Dut1FormatError(f"unparseable values {raw.strip()!r}", lineno) from None
        if not math.isfinite(dut1) or abs(dut1) >= DUT1_LIMIT:
            raise Dut1FormatError(f"dut1 {dut1} out of range (|dut1| < {DUT1_LIMIT} s)", lineno)
        if mjds and mjd <= mjds[-1]:
            raise Dut1FormatError(f"non-increasing mjd {mjd} after {mjds[-1]}", lineno)
        mjds.append(mjd)
        values.append(dut1)
    if not mjds:
        raise Dut1FormatError("empty ΔUT1 table")
    return DeltaUt1Table(np.array(mjds), np.array(values))


def read_dut1_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_dut1_table(fh.read())


@dataclass(frozen=True)
class EraTime:
    """ERA expressed as time: ``t = θ[deg] × 240 s`` within ERA day ``day_count``."""

    t: float
    day_count: int

    def __post_init__(self):
        if not (0.0 <= self.t < DAY):
            raise ValidationError(f"ERA seconds {self.t} outside [0, 86400)")

    @property
    def theta_deg(self):
        return self.t / 240.0

    @property
    def total_seconds(self):
        return self.day_count * DAY + self.t


def era_from_ut1_seconds(ut1_seconds):
    """ERA time for UT1 seconds since J2000."""
    whole = math.floor(ut1_seconds / DAY)
    rem = ut1_seconds - whole * DAY
    # ERA_B1·s split as s + (ERA_B1 − 1)·s keeps sub-microsecond precision
    total = ERA_A1 * DAY + rem + (ERA_B1 - 1.0) * ut1_seconds
    extra = math.floor(total / DAY)
    t = total - extra * DAY
    if t < 0.0:
        t += DAY
        extra -= 1
    elif t >= DAY:
        t -= DAY
        extra += 1
    return EraTime(t, whole + extra)


def ut1_to_era(jd_ut1, jd_frac=0.0):
    """ERA time for a Julian UT1 date given as ``jd_ut1 + jd_frac``."""
    return era_from_ut1_seconds((jd_ut1 - J2000_JD) * DAY + jd_frac * DAY)


def utc_to_ut1(t, table):
    """UT1 seconds since J2000 for a UTC instant."""
    return t.seconds + table.dut1_at(t.mjd)


def utc_to_era(t, table):
    return era_from_ut1_seconds(utc_to_ut1(t, table))


def _era_offset(u, table, target_day):
    e = utc_to_era(UtcInstant(u), table)
    return (e.day_count - target_day) * DAY + e.t


def utc_after_era(start, era_seconds, table):
    """UTC instant at which ``era_seconds`` of ERA have elapsed since ``start``."""
    e0 = utc_to_era(start, table)
    target = e0.total_seconds + era_seconds
    target_day = math.floor(target / DAY)
    goal = target - target_day * DAY
    guess = start.seconds + era_seconds / ERA_B1
    lo, hi = guess - 2.0, guess + 2.0

    def f(u):
        return _era_offset(u, table, target_day) - goal

    try:
        root = brentq(f, lo, hi, xtol=1e-9, rtol=1e-15, maxiter=200)
    except TableRangeError as exc:
        raise TableRangeError(f"ΔUT1 table exhausted: {exc}") from None
    return UtcInstant(root)


ZERO_SNAP = 1e-6


def next_era_zero(after, table):
    """Earliest UTC instant ≥ ``after`` where the Greenwich ERA time is zero."""
    e0 = utc_to_era(after, table)
    if e0.t < ZERO_SNAP or DAY - e0.t < ZERO_SNAP:
        return after
    target_day = e0.day_count + 1
    lo = after.seconds
    hi = lo + (DAY - e0.t) / ERA_B1 + 2.0
    try:
        root = brentq(_era_offset, lo, hi, args=(table, target_day),
                      xtol=1e-9, rtol=1e-15, maxiter=200)
    except TableRangeError as exc:
        raise TableRangeError(f"ΔUT1 table exhausted before next ERA zero: {exc}") from None
    return UtcInstant(root)


@dataclass(frozen=True)
class AcquisitionSchedule:
    """Quantized bin layout of one acquisition run.

    ``bin_edges`` are bin start offsets from ``start_utc`` in microseconds.
    """

    start_utc: UtcInstant
    n_bins: int
    nominal_bin: float
    quantum: float
    correction_step: float
    bin_edges: np.ndarray = field(repr=False)
    widths: np.ndarray = field(repr=False)

    @property
    def deficit_us(self):
        """Per-bin shortfall of the quantized width against the nominal width."""
        return self.nominal_bin * 1e6 - float(np.min(self.widths))

    @property
    def lengthened_bins(self):
        return np.flatnonzero(self.widths > self.widths.min())

    @property
    def drift_us(self):
        """Ideal minus actual start offset for every bin, in microseconds."""
        ideal = np.arange(self.n_bins) * (self.nominal_bin * 1e6)
        return ideal - self.bin_edges

    @property
    def starts(self):
        return self.bin_edges * 1e-6

    @property
    def width_s(self):
        return self.widths * 1e-6

    @property
    def span(self):
        return float(self.bin_edges[-1] + self.widths[-1]) * 1e-6

    def era_offsets(self):
        """ERA seconds elapsed at each bin start, ΔUT1 rate neglected."""
        return self.starts * ERA_B1

    def to_csv(self):
        rows = ["bin,start_offset_us,width_us"]
        rows += [f"{i},{s},{w}" for i, (s, w) in
                 enumerate(zip(self.bin_edges.tolist(), self.widths.tolist()))]
        return "\n".join(rows) + "\n"

    def digest(self):
        h = hashlib.sha256()
        h.update(repr((self.start_utc.seconds, self.n_bins, self.nominal_bin,
                       self.quantum, self.correction_step)).encode())
        h.update(self.widths.tobytes())
        return h.hexdigest()


def build_schedule(start, n_bins=2**19, era_hours=36.0, *, table=None,
                   quantum_us=1, correction_us=100):
    """Lay out ``n_bins`` bins covering ``era_hours`` of ERA from ``start``.

    Without a table the run spans ``era_hours·3600/ERA_B1`` UTC seconds. With a
    table the span is solved on the UTC→ERA map so the ΔUT1 rate is included.
    """
    if n_bins < 1:
        raise ValidationError("n_bins must be at least 1")
    if not era_hours > 0:
        raise ValidationError("era_hours must be positive")
    if quantum_us < 1 or correction_us % quantum_us:
        raise ValidationError("correction step must be a whole number of clock quanta")

    if table is None:
        span = era_hours * 3600.0 / ERA_B1
    else:
        span = utc_after_era(start, era_hours * 3600.0, table) - start
    nominal = span / n_bins
    nominal_q = nominal * 1e6 / quantum_us
    width_q = math.floor(nominal_q)
    deficit_q = nominal_q - width_q
    corr_q = correction_us // quantum_us
    if deficit_q >= corr_q:
        raise ValidationError("quantization deficit exceeds the correction step")

    widths = _accel.kernels.schedule_widths(n_bins, width_q, deficit_q, corr_q) * quantum_us
    edges = np.zeros(n_bins, dtype=np.int64)
    np.cumsum(widths[:-1], out=edges[1:])
    widths.flags.writeable = False
    edges.flags.writeable = False
    return AcquisitionSchedule(start, int(n_bins), nominal, quantum_us * 1e-6,
                               correction_us * 1e-6, edges, widths)
