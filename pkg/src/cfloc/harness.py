"""Experiment orchestration: sweeps, Monte Carlo setups, CSV/report output.

Every random draw comes from a generator keyed by (master seed, setup index,
purpose tag, ...) so that cells can run in any order, on any number of
workers, and still produce identical bytes. Trial rows are sorted by
(setup, test point, method) before writing for the same reason.
"""

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .config import ScenarioConfig, config_from_dict
from ._validation import ConfigurationError
from .channel import ChannelStats, sample_received_signal
from .crb import CrbConfig, crb_aoa_variance_deg2, crb_noised_aoa
from .fingerprint import (FingerprintDB, MusicAoaEstimator, TestObservation,
                          estimate_rss_db, offline_aoa_deg)
from .fusion import FUSERS
from .geometry import generate_scenario, nominal_aoa_deg, pathloss_db, wrap_angle_deg
from .gpr import TrainConfig
from .metrics import TrialRecord, read_trials_csv, write_trials_csv
from .shadowing import ShadowModel

SWEEP_AXES = ("N", "K", "L", "shadow_sigma_db", "zscore_threshold")
_AXIS_FIELDS = {"N": "num_antennas", "K": "num_rps", "L": "num_aps",
                "shadow_sigma_db": "shadow_sigma_db"}
_INT_AXES = ("N", "K", "L")

AOA_MODES = ("music", "crb", "geometric")
FUSION_TAGS = ("median", "mean", "bayesian", "zscore")
METHOD_FAMILIES = ("dist_gpr", "cent_hybrid", "cent_rss", "cent_aoa",
                   "cent_knn", "cent_lr", "dist_knn", "dist_lr")

# RNG purpose tags
_T_OFF_SHADOW, _T_OFF_SIGNAL, _T_OFF_AOA = 1, 2, 3
_T_ON_SHADOW, _T_ON_SIGNAL, _T_ON_AOA = 4, 5, 6
_T_SCENARIO = 7

SUMMARY_QUANTILES = tuple(range(10, 100, 10))
SUMMARY_CSV_HEADER = (
    ["sweep_value", "method", "mean_err_m", "mean_ellipse_area_m2", "coverage_pct"]
    + [f"p{q}" for q in SUMMARY_QUANTILES]
    + ["runtime_s"]
)


def expand_methods(methods):
    """Expand family names to output tags; `dist_gpr` means all four fusers."""
    tags = []
    for name in methods:
        if name == "dist_gpr":
            tags.extend(f"dist_gpr-{f}" for f in FUSION_TAGS)
        elif name.startswith("dist_gpr-"):
            fuser = name.split("-", 1)[1]
            if fuser not in FUSION_TAGS:
                raise ConfigurationError(f"unknown fusion variant in method {name!r}")
            tags.append(name)
        elif name in METHOD_FAMILIES:
            tags.append(name)
        else:
            raise ConfigurationError(f"unknown method {name!r}")
    seen = set()
    unique = []
    for tag in tags:
        if tag not in seen:
            seen.add(tag)
            unique.append(tag)
    return unique


def _family_of(tag):
    return "dist_gpr" if tag.startswith("dist_gpr-") else tag


@dataclass(frozen=True)
class ExperimentSpec:
    """A full run: base scenario, one optional sweep axis, sampling budget."""

    base: ScenarioConfig
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    num_setups: int = 10
    num_test_points: int = 100
    methods: tuple = ("dist_gpr",)
    aoa_mode: str = "music"
    output_dir: str = "out"
    zscore_threshold: float = 1.0
    threads: int = 1
    dump_fingerprints: bool = False
    train_cfg: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_AXES:
                raise ConfigurationError(f"unknown sweep axis {self.sweep_axis!r}")
            if not self.sweep_values:
                raise ConfigurationError("sweep_axis given without sweep_values")
        if self.aoa_mode not in AOA_MODES:
            raise ConfigurationError(f"unknown aoa_mode {self.aoa_mode!r}")
        if self.num_setups < 1 or self.num_test_points < 1:
            raise ConfigurationError("num_setups and num_test_points must be >= 1")
        if not self.methods:
            raise ConfigurationError("methods must be non-empty")
        expand_methods(self.methods)  # validates tags
        if self.zscore_threshold <= 0:
            raise ConfigurationError("zscore_threshold must be positive")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")
        for value in self.sweep_values:
            self._check_axis_value(value)

    def _check_axis_value(self, value):
        axis = self.sweep_axis
        if axis in _INT_AXES:
            if value != int(value) or int(value) < 1:
                raise ConfigurationError(f"sweep value {value!r} invalid for axis {axis}")
            if axis == "K":
                root = int(round(int(value) ** 0.5))
                if root * root != int(value):
                    raise ConfigurationError(f"K sweep value {value!r} is not a perfect square")
        elif axis == "shadow_sigma_db" and value < 0:
            raise ConfigurationError("shadow_sigma_db sweep values must be >= 0")
        elif axis == "zscore_threshold" and value <= 0:
            raise ConfigurationError("zscore_threshold sweep values must be > 0")

    def cell_config(self, sweep_value):
        """Scenario config and z-score threshold for one sweep value."""
        cfg = self.base
        threshold = self.zscore_threshold
        if self.sweep_axis is None or sweep_value is None:
            return cfg, threshold
        if self.sweep_axis == "zscore_threshold":
            return cfg, float(sweep_value)
        fname = _AXIS_FIELDS[self.sweep_axis]
        value = int(sweep_value) if self.sweep_axis in _INT_AXES else float(sweep_value)
        return cfg.replace(**{fname: value}), threshold


def spec_from_dict(data: dict) -> ExperimentSpec:
    """Build an ExperimentSpec from a flat config mapping (file or CLI merge)."""
    base = config_from_dict(data)
    methods = data.get("methods")
    if methods is None:
        # `algorithm` selects a single method; `methods` takes a list
        methods = [data["algorithm"]] if "algorithm" in data else ["dist_gpr"]
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    sweep_values = data.get("sweep_values", ())
    if isinstance(sweep_values, str):
        sweep_values = [float(v) for v in sweep_values.split(",") if v.strip()]
    return ExperimentSpec(
        base=base,
        sweep_axis=data.get("sweep_axis"),
        sweep_values=tuple(sweep_values),
        num_setups=int(data.get("num_setups", 10)),
        num_test_points=int(data.get("num_test_points", 100)),
        methods=tuple(methods),
        aoa_mode=data.get("aoa_mode", "music"),
        output_dir=str(data.get("output_dir", "out")),
        zscore_threshold=float(data.get("zscore_threshold", 1.0)),
        threads=int(data.get("threads", 1)),
        dump_fingerprints=bool(data.get("dump_fingerprints", False)),
    )


def _stream(master_seed, setup_idx, *tags):
    return np.random.default_rng(np.random.SeedSequence([master_seed, setup_idx, *tags]))


def _derived_scenario_seed(master_seed, setup_idx) -> int:
    return int(np.random.SeedSequence([master_seed, setup_idx, _T_SCENARIO]).generate_state(1)[0])


def _link_stats(scenario, ap_index, location_xy, shadow_db) -> ChannelStats:
    cfg = scenario.config
    ap = scenario.ap_positions[ap_index]
    beta_db = pathloss_db(ap, location_xy, cfg) + shadow_db
    return ChannelStats(
        beta_linear=10.0 ** (beta_db / 10.0),
        nominal_aoa_deg=nominal_aoa_deg(ap[:2], location_xy),
        disk_cov=None,
    )


def _fit_models(spec, scenario, fingerprints, families, failures, timings, sweep_value):
    """Train every requested model family; a failing family is dropped."""
    models = {}
    diagnostics = {}
    for family in sorted(families):
        start = time.perf_counter()
        try:
            if family == "dist_gpr":
                models[family] = [
                    baselines.GprLocalizer(spec.train_cfg).fit(db.hybrid, scenario.rp_positions)
                    for db in fingerprints
                ]
                diagnostics["dist_gpr"] = [loc.diagnostics() for loc in models[family]]
            elif family in ("cent_hybrid", "cent_rss", "cent_aoa"):
                variant = family.split("_", 1)[1]
                db = baselines.build_central_db(fingerprints, scenario.rp_positions, variant)
                models[family] = baselines.fit_centralized_gpr(db, spec.train_cfg)
                diagnostics[family] = models[family].diagnostics()
            elif family == "cent_knn":
                db = baselines.build_central_db(fingerprints, scenario.rp_positions, "hybrid")
                models[family] = baselines.KnnPositionRegressor().fit(db.inputs, db.targets)
            elif family == "cent_lr":
                db = baselines.build_central_db(fingerprints, scenario.rp_positions, "hybrid")
                models[family] = baselines.LinearPositionRegressor().fit(db.inputs, db.targets)
            elif family == "dist_knn":
                models[family] = [
                    baselines.KnnPositionRegressor().fit(db.hybrid, scenario.rp_positions)
                    for db in fingerprints
                ]
            elif family == "dist_lr":
                models[family] = [
                    baselines.LinearPositionRegressor().fit(db.hybrid, scenario.rp_positions)
                    for db in fingerprints
                ]
        except Exception as exc:  # noqa: BLE001 - survive any family failure
            failures.append({
                "sweep_value": sweep_value,
                "stage": "fit",
                "method_family": family,
                "error": f"{type(exc).__name__}: {exc}",
            })
        timings[family] = timings.get(family, 0.0) + time.perf_counter() - start
    return models, diagnostics


def _observe(spec, cfg, scenario, shadow_db, tp, master, setup_idx, tp_idx, music):
    """Per-AP online (RSS, azimuth) features for one test point."""
    observations = []
    degenerate = 0
    for ap in range(scenario.num_aps):
        stats = _link_stats(scenario, ap, tp, shadow_db[ap])
        blocks = sample_received_signal(
            stats, cfg, _stream(master, setup_idx, _T_ON_SIGNAL, tp_idx, ap))
        rss = estimate_rss_db(blocks, cfg.tx_power_mw)
        true_aoa = stats.nominal_aoa_deg
        if spec.aoa_mode == "music":
            result = music.estimate(blocks)
            degenerate += int(result.degenerate)
            # the scan covers the ULA cone (0, 180); the mirror ambiguity is
            # taken as resolved, so the true angle's sign is restored
            aoa = result.angle_deg if true_aoa >= 0 else -result.angle_deg
        elif spec.aoa_mode == "crb":
            bound = crb_aoa_variance_deg2(CrbConfig(
                num_antennas=cfg.num_antennas,
                d_over_lambda=cfg.antenna_spacing_wavelengths,
                angular_spread_deg=cfg.angular_spread_deg,
                tx_power_mw=cfg.tx_power_mw,
                beta_linear=stats.beta_linear,
                noise_power_mw=cfg.noise_power_mw,
                theta_deg=true_aoa,
                num_measurements=cfg.rss_samples,
            ))
            aoa = crb_noised_aoa(true_aoa, bound,
                                 _stream(master, setup_idx, _T_ON_AOA, tp_idx, ap))
        else:  # geometric: same noise law as the offline survey
            rng = _stream(master, setup_idx, _T_ON_AOA, tp_idx, ap)
            aoa = wrap_angle_deg(true_aoa + cfg.offline_aoa_noise_deg * rng.standard_normal())
        observations.append(TestObservation(ap, rss, float(aoa)))
    return observations, degenerate


def _cell_task(payload):
    """Simulate one (sweep value, setup): offline phase, fits, all test points."""
    spec, sweep_idx, sweep_value, setup_idx = payload
    cfg, zscore_threshold = spec.cell_config(sweep_value)
    master = spec.base.seed
    setup_id = sweep_idx * spec.num_setups + setup_idx
    cfg = cfg.replace(seed=_derived_scenario_seed(master, setup_idx))
    scenario = generate_scenario(cfg, spec.num_test_points)

    tags = expand_methods(spec.methods)
    families = {_family_of(t) for t in tags}
    failures = []
    timings = {}

    shadow = ShadowModel(scenario, _stream(master, setup_idx, _T_OFF_SHADOW))
    fingerprints = []
    for ap in range(scenario.num_aps):
        rss = np.empty(scenario.num_rps)
        aoa = np.empty(scenario.num_rps)
        aoa_rng = _stream(master, setup_idx, _T_OFF_AOA, ap)
        for k, rp in enumerate(scenario.rp_positions):
            stats = _link_stats(scenario, ap, rp, shadow.rp_values_db[k, ap])
            blocks = sample_received_signal(
                stats, cfg, _stream(master, setup_idx, _T_OFF_SIGNAL, ap, k))
            rss[k] = estimate_rss_db(blocks, cfg.tx_power_mw)
            aoa[k] = offline_aoa_deg(scenario.ap_positions[ap, :2], rp,
                                     cfg.offline_aoa_noise_deg, aoa_rng)
        fingerprints.append(FingerprintDB(ap, rss, aoa, scenario.rp_positions))

    models, diagnostics = _fit_models(
        spec, scenario, fingerprints, families, failures, timings, sweep_value)

    music = None
    if spec.aoa_mode == "music":
        music = MusicAoaEstimator(cfg.num_antennas, cfg.antenna_spacing_wavelengths)

    records = []
    degenerate_total = 0
    for tp_idx, tp in enumerate(scenario.test_points):
        shadow_db = shadow.test_point_shadow_db(tp, _stream(master, setup_idx, _T_ON_SHADOW, tp_idx))
        observations, degenerate = _observe(
            spec, cfg, scenario, shadow_db, tp, master, setup_idx, tp_idx, music)
        degenerate_total += degenerate
        for family in sorted(families & set(models)):
            family_tags = [t for t in tags if _family_of(t) == family]
            start = time.perf_counter()
            try:
                if family == "dist_gpr":
                    estimates = [
                        loc.predict_one(np.array([obs.rss_db, obs.aoa_deg]), source=f"ap{j}")
                        for j, (loc, obs) in enumerate(zip(models[family], observations))
                    ]
                    for tag in family_tags:
                        fused = FUSERS[tag.split("-", 1)[1]](estimates, zscore_threshold)
                        records.append(TrialRecord.from_estimate(
                            setup_id, tp_idx, tag, tp, fused.estimate))
                elif family in ("cent_hybrid", "cent_rss", "cent_aoa"):
                    variant = family.split("_", 1)[1]
                    test_input = baselines.central_test_input(observations, variant)
                    est = models[family].predict_one(test_input, source=family)
                    records.append(TrialRecord.from_estimate(setup_id, tp_idx, family, tp, est))
                elif family in ("cent_knn", "cent_lr"):
                    test_input = baselines.central_test_input(observations, "hybrid")
                    est = models[family].predict_one(test_input, source=family)
                    records.append(TrialRecord.from_estimate(setup_id, tp_idx, family, tp, est))
                else:  # dist_knn / dist_lr
                    fused = baselines.distributed_median_with(models[family], observations)
                    records.append(TrialRecord.from_estimate(
                        setup_id, tp_idx, family, tp, fused.estimate))
            except Exception as exc:  # noqa: BLE001
                failures.append({
                    "sweep_value": sweep_value,
                    "stage": "predict",
                    "setup_id": setup_id,
                    "test_id": tp_idx,
                    "method_family": family,
                    "error": f"{type(exc).__name__}: {exc}",
                })
            timings[family] = timings.get(family, 0.0) + time.perf_counter() - start

    fingerprint_dump = None
    if spec.dump_fingerprints:
        fingerprint_dump = fingerprints

    return {
        "setup_id": setup_id,
        "sweep_idx": sweep_idx,
        "sweep_value": sweep_value,
        "scenario_seed": cfg.seed,
        "records": records,
        "failures": failures,
        "timings": timings,
        "diagnostics": diagnostics,
        "degenerate_spectra": degenerate_total,
        "fingerprints": fingerprint_dump,
    }


def _format_sweep_value(value):
    if value is None:
        return ""
    if float(value) == int(value):
        return str(int(value))
    return f"{float(value):.10g}"


def run_experiment(spec: ExperimentSpec):
    """Execute the full experiment; returns (trials, summary, report) paths."""
    os.makedirs(spec.output_dir, exist_ok=True)
    sweep_values = list(spec.sweep_values) if spec.sweep_axis else [None]
    tasks = [
        (spec, sweep_idx, value, setup_idx)
        for sweep_idx, value in enumerate(sweep_values)
        for setup_idx in range(spec.num_setups)
    ]

    if spec.threads > 1:
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            results = list(pool.map(_cell_task, tasks))
    else:
        results = [_cell_task(t) for t in tasks]

    records = []
    failures = []
    setup_sweep = {}
    timings = {}
    diagnostics = {}
    degenerate = 0
    for res in sorted(results, key=lambda r: r["setup_id"]):
        records.extend(res["records"])
        failures.extend(res["failures"])
        key = _format_sweep_value(res["sweep_value"])
        setup_sweep[str(res["setup_id"])] = key
        for family, seconds in res["timings"].items():
            timings[(key, family)] = timings.get((key, family), 0.0) + seconds
        diagnostics[str(res["setup_id"])] = {
            "scenario_seed": res["scenario_seed"],
            "gpr": res["diagnostics"],
            "degenerate_music_spectra": res["degenerate_spectra"],
        }
        degenerate += res["degenerate_spectra"]
        if res["fingerprints"] is not None:
            fp_dir = os.path.join(spec.output_dir, "fingerprints")
            os.makedirs(fp_dir, exist_ok=True)
            for db in res["fingerprints"]:
                db.to_csv(os.path.join(
                    fp_dir, f"setup{res['setup_id']}_ap{db.ap_index}.csv"))

    records.sort(key=lambda r: (r.setup_id, r.test_id, r.method))
    trials_path = os.path.join(spec.output_dir, "trials.csv")
    write_trials_csv(trials_path, records)

    tags = expand_methods(spec.methods)
    runtime_by_tag = {
        (key, tag): timings.get((key, _family_of(tag)), 0.0)
        for key in set(setup_sweep.values())
        for tag in tags
    }
    report = {
        "config": spec.base.to_dict(),
        "sweep_axis": spec.sweep_axis,
        "sweep_values": [_format_sweep_value(v) for v in sweep_values],
        "num_setups": spec.num_setups,
        "num_test_points": spec.num_test_points,
        "methods": list(tags),
        "aoa_mode": spec.aoa_mode,
        "zscore_threshold": spec.zscore_threshold,
        "setup_sweep": setup_sweep,
        "runtime_s": {f"{k}|{tag}": v for (k, tag), v in sorted(runtime_by_tag.items())},
        "degenerate_music_spectra": degenerate,
        "setups": diagnostics,
        "failures": failures,
    }
    report_path = os.path.join(spec.output_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    summary_path = os.path.join(spec.output_dir, "summary.csv")
    summarize(trials_path, summary_path, report_path)
    return trials_path, summary_path, report_path, len(failures)


def summarize(trials_path, out_path, report_path=None):
    """Aggregate a trial CSV into per-(sweep value, method) summary rows.

    The sweep value of each setup comes from the run report written next to
    the trial CSV; without a report all rows form one group.
    """
    rows = read_trials_csv(trials_path)
    if report_path is None:
        candidate = os.path.join(os.path.dirname(os.path.abspath(trials_path)), "report.json")
        report_path = candidate if os.path.exists(candidate) else None
    setup_sweep = {}
    runtime = {}
    if report_path:
        with open(report_path, encoding="utf-8") as fh:
            report = json.load(fh)
        setup_sweep = report.get("setup_sweep", {})
        runtime = report.get("runtime_s", {})

    groups = {}
    for row in rows:
        sweep_value = setup_sweep.get(str(row["setup_id"]), "")
        groups.setdefault((sweep_value, row["method"]), []).append(row)

    def sort_key(item):
        sweep_value, method = item[0]
        try:
            numeric = float(sweep_value)
        except ValueError:
            numeric = float("-inf")
        return (numeric, sweep_value, method)

    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_CSV_HEADER)
        for (sweep_value, method), items in sorted(groups.items(), key=sort_key):
            errors = np.array([r["err_m"] for r in items])
            areas = np.array([r["ellipse_area_m2"] for r in items])
            covered = np.array([r["covered"] for r in items])
            quantiles = np.quantile(errors, [q / 100.0 for q in SUMMARY_QUANTILES])
            writer.writerow(
                [sweep_value, method,
                 f"{errors.mean():.10g}", f"{areas.mean():.10g}",
                 f"{100.0 * covered.mean():.10g}"]
                + [f"{q:.10g}" for q in quantiles]
                + [f"{runtime.get(f'{sweep_value}|{method}', 0.0):.6g}"]
            )
    return out_path
