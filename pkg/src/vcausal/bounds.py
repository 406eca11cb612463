"""Maximum detectable superluminal speed for a given geometry and timing."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import OutOfValidityError, ValidationError
from .geometry import SIDEREAL_DAY, coefficient_a

# largest accepted δt/T: the bound formula is a first-order expansion in δt/T
MAX_WINDOW_FRACTION = 0.05


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the bound. ``delta_t_acq`` is the acquisition interval Δt; the
    blind window δt = 2Δt is derived and never passed in directly."""

    rho: float
    delta_t_acq: float
    beta: float
    chi: float
    gamma: float
    sidereal_day: float = SIDEREAL_DAY

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise OutOfValidityError(f"rho must lie in (0, 1), got {self.rho}")
        if not (0.0 <= self.beta < 1.0):
            raise OutOfValidityError(f"beta must lie in [0, 1), got {self.beta}")
        if not self.delta_t_acq > 0:
            raise ValidationError("acquisition interval must be positive")
        if not self.sidereal_day > 0:
            raise ValidationError("sidereal_day must be positive")
        if self.delta_t >= MAX_WINDOW_FRACTION * self.sidereal_day:
            raise OutOfValidityError(
                f"delta_t = {self.delta_t} s is not small against T = {self.sidereal_day} s")

    @property
    def delta_t(self):
        return 2.0 * self.delta_t_acq


def _formula(rho, delta_t, beta, a, period):
    den = rho + a * math.pi * beta * delta_t / period
    return np.sqrt(1.0 + (1.0 - beta * beta) * (1.0 - rho * rho) / (den * den))


def beta_t_max(inputs):
    """Largest superluminal speed (units of c) whose breakdown the run could see."""
    a = coefficient_a(inputs.chi, inputs.gamma)
    return float(_formula(inputs.rho, inputs.delta_t, inputs.beta, a, inputs.sidereal_day))


def rho_from_geometry(geom):
    return geom.delta_d / geom.d_ab


def blind_window(beta_t, inputs):
    """Width δt of the interval around each orthogonality time in which a signal
    at ``beta_t`` cannot connect the two detections.

    Inverts the bound for δt. Returns 0 when ``beta_t`` is beyond reach even
    with a zero-width window and ``inf`` when the frame is at rest.
    """
    if not beta_t > 1.0:
        raise ValidationError(f"beta_t must exceed 1, got {beta_t}")
    a = coefficient_a(inputs.chi, inputs.gamma)
    reach = math.sqrt((1.0 - inputs.beta ** 2) * (1.0 - inputs.rho ** 2) / (beta_t ** 2 - 1.0))
    if reach <= inputs.rho:
        return 0.0
    rate = a * math.pi * inputs.beta / inputs.sidereal_day
    if rate == 0.0:
        return math.inf
    return (reach - inputs.rho) / rate


@dataclass(frozen=True)
class BoundCurve:
    chi: float
    samples: np.ndarray
    label: str
    inputs: BoundInputs

    def to_csv(self):
        rows = ["beta,beta_t_max"]
        rows += [f"{b!r},{v!r}" for b, v in self.samples.tolist()]
        return "\n".join(rows) + "\n"

    def to_json(self):
        doc = {
            "label": self.label,
            "inputs": asdict(self.inputs),
            "delta_t": self.inputs.delta_t,
            "samples": [{"beta": b, "beta_t_max": v} for b, v in self.samples.tolist()],
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def sweep_curve(inputs, beta_range, label=""):
    """Evaluate the bound on ``n_log_steps + 1`` log-spaced speeds in [lo, hi]."""
    lo, hi, steps = beta_range
    if not (0.0 < lo < hi < 1.0):
        raise ValidationError(f"need 0 < lo < hi < 1, got ({lo}, {hi})")
    if steps < 1:
        raise ValidationError("need at least one log step")
    betas = np.geomspace(lo, hi, int(steps) + 1)
    a = coefficient_a(inputs.chi, inputs.gamma)
    values = _formula(inputs.rho, inputs.delta_t, betas, a, inputs.sidereal_day)
    return BoundCurve(inputs.chi, np.column_stack([betas, values]), label, inputs)


# Parameters of the four comparison curves: (rho, acquisition interval Δt [s], gamma [deg]).
REFERENCE_CURVES = {
    "a": (1.83e-7, 0.247, 18.0),
    "b": (1.6e-4, 4.0, 0.0),
    "c": (5.4e-6, 360.0, 5.9),
    "d": (7.3e-6, 1800.0, 0.0),
}


def reference_inputs(name, beta=1e-3, chi=math.pi / 2):
    rho, dt, gamma_deg = REFERENCE_CURVES[name]
    return BoundInputs(rho, dt, beta, chi, math.radians(gamma_deg))
