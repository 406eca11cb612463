"""Baseline/preferred-frame geometry in an Earth-centred inertial frame.

The z axis is the Earth rotation axis. The baseline AB keeps a constant axial
component ``sin γ`` while its transverse part turns once per ERA day, so the
site latitude is folded into the misalignment angle γ.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import OutOfValidityError, ValidationError

DAY = 86400.0
SIDEREAL_DAY = 86164.0905
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class PreferredFrame:
    """Speed ``beta`` (units of c), polar angle ``chi`` from the rotation axis and
    azimuth ``phi0`` of the frame velocity at ERA t = 0. Angles in radians."""

    beta: float
    chi: float
    phi0: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.beta < 1.0):
            raise ValidationError(f"beta must lie in [0, 1), got {self.beta}")
        if not (0.0 <= self.chi <= math.pi):
            raise ValidationError(f"chi must lie in [0, pi], got {self.chi}")
        object.__setattr__(self, "phi0", self.phi0 % (2.0 * math.pi))

    @property
    def direction(self):
        s = math.sin(self.chi)
        return np.array([s * math.cos(self.phi0), s * math.sin(self.phi0), math.cos(self.chi)])


@dataclass(frozen=True)
class ExperimentGeometry:
    d_ab: float
    delta_d: float
    gamma: float
    sidereal_day: float = SIDEREAL_DAY

    def __post_init__(self):
        if not self.d_ab > 0 or not self.delta_d > 0:
            raise ValidationError("d_ab and delta_d must be positive")
        if not (0.0 <= self.gamma < math.pi / 2):
            raise ValidationError(f"gamma must lie in [0, pi/2), got {self.gamma}")
        if not self.delta_d < self.d_ab:
            raise ValidationError("delta_d must be smaller than d_ab")
        if not self.sidereal_day > 0:
            raise ValidationError("sidereal_day must be positive")

    @property
    def rho(self):
        """Path-equalization uncertainty relative to the baseline."""
        return self.delta_d / self.d_ab


class OrthogonalityKind(str, Enum):
    TWO_SOLUTIONS = "two_solutions"
    TANGENTIAL = "tangential"
    NONE = "none"
    # gamma = 0 with the frame velocity along the axis: orthogonal all day
    ALWAYS = "always"


@dataclass(frozen=True)
class OrthogonalityTimes:
    kind: OrthogonalityKind
    times: tuple = field(default=())

    def __post_init__(self):
        times = tuple(sorted(float(t) for t in self.times))
        if any(not (0.0 <= t < DAY) for t in times):
            raise ValidationError("orthogonality times must lie in [0, 86400)")
        if self.kind is OrthogonalityKind.TWO_SOLUTIONS and len(times) != 2:
            raise ValidationError("two_solutions needs exactly two times")
        object.__setattr__(self, "times", times)


def baseline_direction(era_t, geom):
    """Unit vector along AB at ERA seconds ``era_t`` (scalar or array)."""
    theta = 2.0 * np.pi * np.asarray(era_t, dtype=np.float64) / DAY
    cg, sg = math.cos(geom.gamma), math.sin(geom.gamma)
    return np.stack([cg * np.cos(theta), cg * np.sin(theta),
                     np.full(theta.shape, sg)], axis=-1)


def velocity_dot_baseline(era_t, pf, geom):
    """``β̂ · AB`` over ERA time; zero crossings are the orthogonality times."""
    return baseline_direction(era_t, geom) @ pf.direction


def orthogonality_times(pf, geom):
    """Daily ERA times where the frame velocity is orthogonal to the baseline.

    Solves ``cos(θ − φ0) = −tan γ / tan χ`` written in sines and cosines so that
    χ = π/2 and γ = 0 need no special casing.
    """
    sc, cc = math.sin(pf.chi), math.cos(pf.chi)
    sg, cg = math.sin(geom.gamma), math.cos(geom.gamma)
    if sc <= _EDGE_TOL:
        kind = OrthogonalityKind.ALWAYS if sg <= _EDGE_TOL else OrthogonalityKind.NONE
        return OrthogonalityTimes(kind)
    r = -sg * cc / (cg * sc)
    if abs(r) > 1.0 + _EDGE_TOL:
        return OrthogonalityTimes(OrthogonalityKind.NONE)
    if abs(abs(r) - 1.0) <= _EDGE_TOL:
        theta = pf.phi0 + (0.0 if r > 0 else math.pi)
        return OrthogonalityTimes(OrthogonalityKind.TANGENTIAL, (_to_era_seconds(theta),))
    half = math.acos(r)
    times = (_to_era_seconds(pf.phi0 - half), _to_era_seconds(pf.phi0 + half))
    return OrthogonalityTimes(OrthogonalityKind.TWO_SOLUTIONS, times)


def _to_era_seconds(theta):
    t = (theta % (2.0 * math.pi)) / (2.0 * math.pi) * DAY
    return 0.0 if t >= DAY else t


def in_validity(chi, gamma):
    return gamma - _EDGE_TOL <= chi <= math.pi - gamma + _EDGE_TOL


def coefficient_a(chi, gamma):
    """Geometric factor ``sqrt(sin²χ cos²γ − cos²χ sin²γ)`` for γ ≤ χ ≤ π − γ."""
    if not in_validity(chi, gamma):
        raise OutOfValidityError(
            f"chi={math.degrees(chi):.6g} deg outside [{math.degrees(gamma):.6g}, "
            f"{180 - math.degrees(gamma):.6g}] deg")
    # sin²χ cos²γ − cos²χ sin²γ, factored to keep precision near the edges
    rad = math.sin(chi - gamma) * math.sin(chi + gamma)
    return math.sqrt(max(rad, 0.0))


def inaccessible_fraction(gamma):
    """Fraction of frame directions with no daily orthogonality, ``1 − cos γ``."""
    if not (0.0 <= gamma < math.pi / 2):
        raise ValidationError(f"gamma must lie in [0, pi/2), got {gamma}")
    return 2.0 * math.sin(gamma / 2.0) ** 2
