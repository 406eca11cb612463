"""Experiments end to end: simulate the four daily runs, persist them, analyze them."""
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis as an
from .config import ExperimentConfig, parse_config
from .errors import ValidationError
from .simulator import (SMAX_SETTINGS, NormalizationCounts, RunSeries, simulate_normalization,
                        simulate_run)
from .timebase import (ERA_DAY_UTC, AcquisitionSchedule, DeltaUt1Table, UtcInstant,
                       build_schedule, next_era_zero, read_dut1_file)

RUN_HEADER = "bin,era_s,na,nb,n"


@dataclass
class Experiment:
    config: ExperimentConfig
    runs: list
    normalizations: list


def dut1_table_for(cfg):
    sc = cfg.schedule
    if sc.dut1_file:
        return read_dut1_file(sc.dut1_file)
    first = UtcInstant.from_iso(sc.start_utc).mjd
    days = 4 * sc.run_spacing_days + sc.era_hours / 24.0 + 4
    return DeltaUt1Table.constant(sc.dut1_s, int(first) - 2, int(first + days) + 1)


def run_starts(cfg, table):
    """UTC of the Greenwich ERA zero opening each of the four runs."""
    sc = cfg.schedule
    first = next_era_zero(UtcInstant.from_iso(sc.start_utc), table)
    starts = [first]
    for i in range(1, 4):
        approx = first + (i * sc.run_spacing_days * ERA_DAY_UTC - 60.0)
        starts.append(next_era_zero(approx, table))
    return starts


def run_experiment(cfg):
    cfg.validate()
    geom = cfg.build_geometry()
    source = cfg.build_source()
    scenario = cfg.build_scenario()
    table = dut1_table_for(cfg)
    sc = cfg.schedule
    runs, norms = [], []
    for i, start in enumerate(run_starts(cfg, table)):
        schedule = build_schedule(start, sc.n_bins, sc.era_hours, table=table)
        runs.append(simulate_run(SMAX_SETTINGS[i], source, scenario, schedule, geom,
                                 era_day_index=i * sc.run_spacing_days, run_index=i))
        norms.append(simulate_normalization(source, start, sc.normalization_s,
                                            sc.normalization_lead_s, run_index=i))
    return Experiment(cfg, runs, norms)


@dataclass
class AnalysisResult:
    report: dict
    era_s: np.ndarray = field(repr=False)
    smax: np.ndarray = field(repr=False)
    histogram: list = field(repr=False)


def analyze_experiment(runs, normalizations, t_p=an.DEFAULT_PULSE_WIDTH,
                       window=an.SMOOTHING_WINDOW):
    if len(runs) != 4 or len(normalizations) != 4:
        raise ValidationError("need four runs and four normalizations")
    n_bins = {r.schedule.n_bins for r in runs}
    if len(n_bins) != 1:
        raise ValidationError("runs do not share a common bin grid")

    norms = [an.NormalizationSet.from_counts(c, t_p) for c in normalizations]
    ps = [an.probability_series(r, n, t_p) for r, n in zip(runs, norms)]
    smax = an.smax_series(*ps)
    raw = an.breakdown_report(*ps, smax)

    filt = [an.filtered_counts(p.values, window) for p in ps]
    filtered = an.breakdown_report(*filt)

    counting = []
    for r in runs:
        counts = r.n.astype(np.float64)
        counting.append({
            "run_index": r.run_index,
            "raw": asdict(an.counting_statistics_check(counts)),
            "filtered": asdict(an.counting_statistics_check(an.filtered_counts(counts, window))),
        })
    report = {
        "raw": raw.to_dict(),
        "filtered": filtered.to_dict(),
        "n_tot": [n.n_tot for n in norms],
        "probabilities": [{"run_index": p.run_index, "setting": list(r.setting),
                           "mean": p.mean, "sigma": p.sigma} for p, r in zip(ps, runs)],
        "counting_statistics": counting,
        "pulse_width_s": t_p,
        "smoothing_window": window,
    }
    fit = (raw.fit_amplitude, raw.fit_mean, raw.fit_sigma)
    return AnalysisResult(report, runs[0].era_s, smax, an.histogram_rows(smax, fit))


# -- run directory -----------------------------------------------------------

def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def run_csv(run):
    era = run.era_s.tolist()
    rows = [RUN_HEADER]
    rows += [f"{i},{e:.6f},{a},{b},{n}" for i, (e, a, b, n) in
             enumerate(zip(era, run.n_a.tolist(), run.n_b.tolist(), run.n.tolist()))]
    return "\n".join(rows) + "\n"


def write_experiment(exp, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    digest = exp.config.digest()
    _write(os.path.join(out_dir, "config.cfg"), exp.config.to_text())
    for run, norm in zip(exp.runs, exp.normalizations):
        i = run.run_index
        sched = run.schedule
        meta = dict(run.metadata)
        meta["config_digest"] = digest
        meta["schedule"] = {
            "start_utc_s": sched.start_utc.seconds,
            "start_utc": sched.start_utc.isoformat(),
            "n_bins": sched.n_bins,
            "nominal_bin_s": sched.nominal_bin,
            "quantum_s": sched.quantum,
            "correction_step_s": sched.correction_step,
            "digest": sched.digest(),
        }
        _write(os.path.join(out_dir, f"run_{i}.csv"), run_csv(run))
        _write(os.path.join(out_dir, f"run_{i}.json"), _dump_json(meta))
        _write(os.path.join(out_dir, f"schedule_{i}.csv"), sched.to_csv())
        _write(os.path.join(out_dir, f"normalization_{i}.json"), _dump_json({
            "config_digest": digest,
            "run_index": i,
            "acquisition_time_s": norm.acquisition_time,
            "settings": [list(s) for s in norm.settings],
            "na": norm.n_a.tolist(),
            "nb": norm.n_b.tolist(),
            "n": norm.n.tolist(),
        }))
    _write(os.path.join(out_dir, "manifest.json"), _dump_json({
        "config_digest": digest,
        "runs": [f"run_{r.run_index}.csv" for r in exp.runs],
    }))


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_experiment(run_dir):
    """Read back a directory written by ``write_experiment``."""
    manifest_path = os.path.join(run_dir, "manifest.json")
    if not os.path.isfile(manifest_path):
        raise FileNotFoundError(f"no manifest.json in {run_dir!r}")
    with open(os.path.join(run_dir, "config.cfg"), encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    runs, norms = [], []
    for i in range(4):
        meta = _read_json(os.path.join(run_dir, f"run_{i}.json"))
        sched_meta = meta["schedule"]
        table = np.loadtxt(os.path.join(run_dir, f"schedule_{i}.csv"), delimiter=",",
                           skiprows=1, dtype=np.int64, ndmin=2)
        schedule = AcquisitionSchedule(
            UtcInstant(sched_meta["start_utc_s"]), int(sched_meta["n_bins"]),
            sched_meta["nominal_bin_s"], sched_meta["quantum_s"],
            sched_meta["correction_step_s"], table[:, 1].copy(), table[:, 2].copy())
        data = np.loadtxt(os.path.join(run_dir, f"run_{i}.csv"), delimiter=",", skiprows=1,
                          ndmin=2)
        if data.shape[0] != schedule.n_bins:
            raise ValidationError(f"run_{i}.csv has {data.shape[0]} rows, expected "
                                  f"{schedule.n_bins}")
        counts = data[:, 2:5].astype(np.int64)
        runs.append(RunSeries(tuple(meta["setting"]), schedule, counts[:, 0].copy(),
                              counts[:, 1].copy(), counts[:, 2].copy(),
                              np.zeros(schedule.n_bins), i, meta))
        nm = _read_json(os.path.join(run_dir, f"normalization_{i}.json"))
        norms.append(NormalizationCounts(np.array(nm["na"]), np.array(nm["nb"]),
                                         np.array(nm["n"]), nm["acquisition_time_s"],
                                         tuple(tuple(s) for s in nm["settings"])))
    return cfg, runs, norms


def write_analysis(result, out_dir, config_digest):
    os.makedirs(out_dir, exist_ok=True)
    report = dict(result.report)
    report["config_digest"] = config_digest
    _write(os.path.join(out_dir, "report.json"), _dump_json(report))
    rows = ["era_s,smax"]
    rows += [f"{e:.6f},{s!r}" for e, s in zip(result.era_s.tolist(), result.smax.tolist())]
    _write(os.path.join(out_dir, "smax.csv"), "\n".join(rows) + "\n")
    rows = ["bin_center,count,gauss_overlay"]
    rows += [f"{c!r},{n},{g!r}" for c, n, g in result.histogram]
    _write(os.path.join(out_dir, "smax_histogram.csv"), "\n".join(rows) + "\n")
