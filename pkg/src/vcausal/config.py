"""Flat ``section.key = value`` experiment configuration.

Angles are degrees here and radians everywhere past ``ExperimentConfig.build_*``.
"""
import dataclasses
import hashlib
import math
import typing
from dataclasses import dataclass, field
from typing import Optional

from .errors import ValidationError
from .geometry import SIDEREAL_DAY, ExperimentGeometry, PreferredFrame
from .simulator import MEASURED_TABLE, SourceModel, VCausalScenario


@dataclass
class GeometryConfig:
    d_ab_m: float = 1200.0
    delta_d_m: float = 0.00022
    gamma_deg: float = 18.0
    sidereal_day_s: float = SIDEREAL_DAY


@dataclass
class SourceConfig:
    pair_rate: float = 23000.0
    singles_rate_a: float = 162500.0
    singles_rate_b: float = 162500.0
    pulse_width_s: float = 29.2e-9
    visibility: float = 1.0
    # "none", "measured", or "alpha/xi:p, alpha/xi:p, ..."
    table: str = "none"
    drift_amplitude: float = 0.03
    drift_period_s: float = 86400.0
    drift_phase_deg: float = 0.0


@dataclass
class ScenarioConfig:
    enabled: bool = False
    beta: float = 1e-3
    chi_deg: float = 90.0
    phi0_deg: float = 0.0
    beta_t: float = 1000.0
    local_model: str = "shared_polarization"
    window_halfwidth_s: Optional[float] = None
    daily_shift_min: float = 0.0


@dataclass
class ScheduleConfig:
    n_bins: int = 2**19
    era_hours: float = 36.0
    # runs start at the first Greenwich ERA zero at or after this instant
    start_utc: str = "2017-10-24T00:00:00Z"
    run_spacing_days: int = 2
    normalization_s: float = 100.0
    normalization_lead_s: float = 7200.0
    dut1_s: float = 0.0
    dut1_file: str = ""


@dataclass
class AnalysisConfig:
    smoothing_window: int = 200


@dataclass
class OutputConfig:
    dir: str = "run"


SECTIONS = {
    "geometry": GeometryConfig,
    "source": SourceConfig,
    "scenario": ScenarioConfig,
    "schedule": ScheduleConfig,
    "analysis": AnalysisConfig,
    "output": OutputConfig,
}


@dataclass
class ExperimentConfig:
    seed: int = 1
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_text(self):
        lines = [f"seed = {_format(self.seed)}"]
        for name in SECTIONS:
            section = getattr(self, name)
            lines.append("")
            for f in dataclasses.fields(section):
                lines.append(f"{name}.{f.name} = {_format(getattr(section, f.name))}")
        return "\n".join(lines) + "\n"

    def digest(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    def build_geometry(self):
        g = self.geometry
        return ExperimentGeometry(g.d_ab_m, g.delta_d_m, math.radians(g.gamma_deg),
                                  g.sidereal_day_s)

    def build_source(self):
        s = self.source
        return SourceModel(
            pair_rate=s.pair_rate, singles_rate_a=s.singles_rate_a,
            singles_rate_b=s.singles_rate_b, pulse_width=s.pulse_width_s,
            visibility=s.visibility, probability_table=parse_table(s.table),
            drift_amplitude=s.drift_amplitude, drift_period=s.drift_period_s,
            drift_phase=math.radians(s.drift_phase_deg), rng_seed=self.seed)

    def build_scenario(self):
        sc = self.scenario
        if not sc.enabled:
            return None
        pf = PreferredFrame(sc.beta, math.radians(sc.chi_deg), math.radians(sc.phi0_deg))
        return VCausalScenario(pf, sc.beta_t, sc.local_model, sc.window_halfwidth_s,
                               sc.daily_shift_min)

    def validate(self):
        self.build_geometry()
        self.build_source()
        self.build_scenario()
        if self.schedule.n_bins < 1 or self.schedule.run_spacing_days < 1:
            raise ValidationError("schedule.n_bins and schedule.run_spacing_days must be >= 1")
        if self.analysis.smoothing_window < 1:
            raise ValidationError("analysis.smoothing_window must be >= 1")
        return self


def parse_table(text):
    text = text.strip()
    if text.lower() in ("", "none"):
        return None
    if text.lower() == "measured":
        return dict(MEASURED_TABLE)
    table = {}
    for item in text.split(","):
        try:
            angles, p = item.split(":")
            alpha, xi = angles.split("/")
            table[(float(alpha), float(xi))] = float(p)
        except ValueError:
            raise ValidationError(f"bad probability table entry {item.strip()!r}") from None
    return table


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(raw, hint, key):
    raw = raw.strip()
    args = typing.get_args(hint)
    if args and type(None) in args:
        if raw.lower() in ("none", "auto", ""):
            return None
        hint = next(a for a in args if a is not type(None))
    try:
        if hint is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if hint is int:
            return int(raw)
        if hint is float:
            return float(raw)
    except ValueError:
        raise ValidationError(f"{key}: cannot read {raw!r} as {hint.__name__}") from None
    return raw


def parse_config(text):
    cfg = ExperimentConfig()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key == "seed":
            cfg.seed = _convert(value, int, key)
            continue
        section_name, _, name = key.partition(".")
        if section_name not in SECTIONS:
            raise ValidationError(f"line {lineno}: unknown section in {key!r}")
        section = getattr(cfg, section_name)
        hints = typing.get_type_hints(type(section))
        if name not in hints:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        setattr(section, name, _convert(value, hints[name], key))
    return cfg


def read_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
