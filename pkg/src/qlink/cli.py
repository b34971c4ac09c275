"""Command-line interface.

Subcommands::

    qlink simulate  --config cfg.json --out dir [--seed N] [--duration S]
    qlink analyze   {g2,tomography,fringes} ...
    qlink sweep     {window,deadtime,modes,pump} --config cfg.json --points ...
    qlink model     {g2si,visibility,threshold,pumpfactor,linkbudget,efficiency} ...

Exit codes: 0 success, 2 configuration error, 3 analysis error.  The
environment variable ``QLINK_SEED`` overrides the configured seed when no
``--seed`` flag is given.  Reports are JSON documents (metrics as
{value, stderr, unit}); curves are CSV files next to the report.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import linksim, models, pipeline, presets, tomography, tsanalysis
from .fileio import Report, load_config, read_events, write_events, write_manifest
from .linksim import ConfigError, ScenarioConfig
from .streams import RecordSet
from .tsanalysis import AnalysisError
from .values import ValueWithError

EXIT_CONFIG = 2
EXIT_ANALYSIS = 3


def _resolve_seed(cfg: ScenarioConfig, flag: Optional[int]) -> ScenarioConfig:
    seed = flag
    if seed is None and os.environ.get("QLINK_SEED"):
        try:
            seed = int(os.environ["QLINK_SEED"])
        except ValueError as exc:
            raise ConfigError(f"QLINK_SEED: {exc}") from exc
    return cfg if seed is None else replace(cfg, seed=seed)


def _load_scenario(args, default=None) -> ScenarioConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif default is not None:
        cfg = default()
    else:
        raise ConfigError("--config is required for this command")
    cfg = _resolve_seed(cfg, getattr(args, "seed", None))
    if getattr(args, "duration", None) is not None:
        cfg = replace(cfg, duration=args.duration)
    return cfg


def _window_s(args) -> float:
    return args.window_ns * 1e-9


def _noise_windows(args, window: float):
    width = args.noise_window_ns * 1e-9
    return tsanalysis.default_noise_windows(window, width=width)


def _filter_modes(records: RecordSet, max_mode: Optional[int]) -> RecordSet:
    if max_mode is None:
        return records
    out = RecordSet()
    for ch, s in records.streams.items():
        if ch.startswith("I"):
            keep = s.mode < max_mode
            out.streams[ch] = type(s)(
                s.time_ps[keep], s.trial[keep], s.mode[keep], s.phase[keep]
            )
        else:
            out.streams[ch] = s
    return out


def _emit(report: Report, args, curves: Optional[dict[str, tuple]] = None) -> None:
    from .fileio import write_table

    if getattr(args, "out", None):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report.write(out / "report.json")
        for name, (header, rows) in (curves or {}).items():
            write_table(out / f"{name}.csv", header, rows)
    print(report.dumps())


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    cfg = _load_scenario(args)
    if not args.out:
        raise ConfigError("simulate requires --out")
    result = linksim.run(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_events(result.records, out)
    write_manifest(result.manifest, out / "manifest.json")
    rate = result.manifest.heralding_rate
    print(f"wrote {out}: {result.manifest.counts_per_channel} "
          f"({rate:.1f} heralds/s)")
    return 0


# ---------------------------------------------------------------------------
# analyze


def _diag_from_events(events_dir, cfg: ScenarioConfig, max_mode=None) -> pipeline.DiagonalData:
    records = _filter_modes(read_events(events_dir), max_mode)
    span = pipeline.analysis_span(cfg)
    her = pipeline.merged_heralds(records)
    hist_a = tsanalysis.build_histogram(her, records["S1"], cfg.analysis.bin_width, span)
    hist_b = tsanalysis.build_histogram(her, records["S2"], cfg.analysis.bin_width, span)
    manifest = linksim.RunManifest(
        config_digest="", seed=cfg.seed, tool_version=linksim.TOOL_VERSION,
        protocol=cfg.protocol, duration=cfg.duration,
        counts_per_channel=records.counts(), n_heralds=records.n_heralds(),
        wall_time=0.0,
    )
    return pipeline.DiagonalData(hist_a, hist_b, manifest)


def _fringe_from_events(events_dir, cfg: ScenarioConfig, max_mode=None) -> pipeline.FringeData:
    records = _filter_modes(read_events(events_dir), max_mode)
    fh = tsanalysis.FringeHistograms.create(
        cfg.analysis.bin_width, pipeline.analysis_span(cfg),
        list(cfg.phase_setpoints), cfg.duration,
    )
    fh.accumulate(records)
    manifest = linksim.RunManifest(
        config_digest="", seed=cfg.seed, tool_version=linksim.TOOL_VERSION,
        protocol=cfg.protocol, duration=cfg.duration,
        counts_per_channel=records.counts(), n_heralds=records.n_heralds(),
        wall_time=0.0,
    )
    return pipeline.FringeData(fh, manifest)


def _hist_curve(hist) -> tuple:
    header = ["offset_ns", "counts"]
    centers = hist.bin_centers() * 1e9
    rows = [[float(c), int(n)] for c, n in zip(centers, hist.counts)]
    return header, rows


def cmd_analyze_g2(args) -> int:
    cfg = _load_scenario(args, default=presets.conditional_tomography)
    diag = _diag_from_events(args.events, cfg, args.mode)
    window = _window_s(args)
    noise = _noise_windows(args, window)
    report = Report(provenance=[args.events])
    curves = {}
    for label, hist in (("A", diag.hist_A), ("B", diag.hist_B)):
        res = tsanalysis.g2_from_histogram(hist, window, noise)
        split = tsanalysis.split_true_accidental(hist, window, noise)
        report.add(f"g2si_{label}", res.g2, unit="dimensionless")
        report.add(f"p_coinc_{label}", split.p_coinc, unit="per herald")
        report.add(f"p_acc_{label}", split.p_acc, unit="per herald")
        curves[f"histogram_{label}"] = _hist_curve(hist)
    _emit(report, args, curves)
    return 0


def _direct_tomography(args) -> int:
    p10 = ValueWithError(args.p10, args.p10_err)
    p01 = ValueWithError(args.p01, args.p01_err)
    p11 = ValueWithError(args.p11, args.p11_err)
    d = ValueWithError(args.d, args.d_err)
    rho = tomography.assemble(p10, p01, p11, d)
    conc = tomography.concurrence(rho)
    report = Report()
    report.add("p00", rho.p00, unit="probability")
    report.add("concurrence", conc.concurrence, unit="dimensionless")
    report.add("h2c", tomography.two_photon_suppression(rho), unit="dimensionless")
    report.add("effective_fidelity", tomography.effective_fidelity(rho),
               unit="dimensionless")
    if args.backprop:
        chain = tomography.EfficiencyChain(*args.backprop)
        back = tomography.backpropagate(rho, chain)
        report.add("concurrence_backpropagated",
                   tomography.concurrence(back).concurrence, unit="dimensionless")
    _emit(report, args)
    return 0


def cmd_analyze_tomography(args) -> int:
    if args.p10 is not None:
        return _direct_tomography(args)
    if not (args.diag and args.fringe):
        raise ConfigError(
            "tomography needs --diag and --fringe event directories, "
            "or direct --p10/--p01/--p11/--d values"
        )
    cfg = _load_scenario(args, default=presets.fringe_scan)
    diag = _diag_from_events(args.diag, cfg, args.mode)
    fringe = _fringe_from_events(args.fringe, cfg, args.mode)
    summary = pipeline.tomography_summary(diag, fringe, _window_s(args))
    report = Report(provenance=[args.diag, args.fringe])
    _summary_to_report(summary, report)
    curves = {
        "histogram_A": _hist_curve(diag.hist_A),
        "histogram_B": _hist_curve(diag.hist_B),
        "fringes": _fringe_curve(fringe.histograms, _window_s(args)),
    }
    _emit(report, args, curves)
    return 0


def _summary_to_report(s: pipeline.TomographySummary, report: Report) -> None:
    report.add("p10", s.p10, unit="probability")
    report.add("p01", s.p01, unit="probability")
    report.add("p11", s.p11, unit="probability")
    report.add("p00", s.elements["combined"].p00, unit="probability")
    report.add("p_acc_10", s.p_acc_10, unit="probability")
    report.add("p_acc_01", s.p_acc_01, unit="probability")
    report.add("g2si_A", s.g2_A, unit="dimensionless")
    report.add("g2si_B", s.g2_B, unit="dimensionless")
    report.add("h2c", s.h2c, unit="dimensionless")
    report.add("effective_fidelity", s.effective_fidelity, unit="dimensionless")
    report.add("heralding_rate", s.heralding_rate, unit="cps")
    for label, v in s.visibility.items():
        report.add(f"visibility_{label}", v, unit="dimensionless")
    for label, c in s.concurrence_by_label.items():
        report.add(f"concurrence_{label}", c.concurrence, unit="dimensionless")
    for label, el in s.elements.items():
        report.add(f"d_{label}", el.d, unit="probability")
    for sch, dphi in s.phase_difference.items():
        report.add(f"herald_phase_difference_{sch}", dphi, unit="rad")


def _fringe_curve(fh: tsanalysis.FringeHistograms, window: float) -> tuple:
    header = ["phase_setpoint", "herald", "signal", "coincidences", "integration_s"]
    rows = [
        [p.phase_setpoint, p.herald, p.signal, p.coincidences, p.integration]
        for p in fh.fringe_set_at(window).points
    ]
    return header, rows


def cmd_analyze_fringes(args) -> int:
    cfg = _load_scenario(args, default=presets.fringe_scan)
    fringe = _fringe_from_events(args.events, cfg, args.mode)
    window = _window_s(args)
    fits = tsanalysis.fringe_fit(fringe.histograms.fringe_set_at(window))
    report = Report(provenance=[args.events])
    for (hch, sch), fit in sorted(fits.items()):
        key = f"{hch}_{sch}".lower()
        report.add(f"visibility_{key}", fit.visibility, unit="dimensionless")
        report.add(f"phase_{key}", fit.phase, unit="rad")
        report.add(f"offset_{key}", fit.offset, unit="cps")
    for sch in ("S1", "S2"):
        try:
            report.add(f"herald_phase_difference_{sch}",
                       tsanalysis.phase_difference(fits, sch), unit="rad")
        except AnalysisError:
            pass
    _emit(report, args, {"fringes": _fringe_curve(fringe.histograms, window)})
    return 0


# ---------------------------------------------------------------------------
# sweeps


def _parse_points(text: str) -> list[float]:
    try:
        pts = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"--points: {exc}") from exc
    if not pts:
        raise ConfigError("--points: empty range")
    return pts


def cmd_sweep_window(args) -> int:
    cfg = _load_scenario(args)
    if cfg.protocol != "fringe_scan":
        raise ConfigError("window sweep expects a fringe_scan configuration")
    w_list = sorted(w * 1e-9 for w in _parse_points(args.points))
    diag = pipeline.run_diagonal(pipeline.diagonal_companion(cfg))
    fringe = pipeline.run_fringe(cfg)
    points = tsanalysis.window_sweep(diag.hist_A, diag.hist_B,
                                     fringe.histograms, w_list)
    best = max(points, key=lambda p: p.concurrence.value)
    report = Report(provenance=[args.config or "<preset>"])
    report.add("best_window", best.window, unit="s")
    report.add("concurrence_at_best", best.concurrence, unit="dimensionless")
    header = ["window_ns", "concurrence", "concurrence_err", "p11", "p11_err",
              "p10", "p10_err", "p01", "p01_err", "p_acc_10", "p_acc_10_err",
              "visibility", "visibility_err", "g2_A", "g2_B"]
    rows = [
        [p.window * 1e9, p.concurrence.value, p.concurrence.stderr,
         p.p11.value, p.p11.stderr, p.p10.value, p.p10.stderr,
         p.p01.value, p.p01.stderr, p.p_acc_10.value, p.p_acc_10.stderr,
         p.visibility.value, p.visibility.stderr, p.g2_A.value, p.g2_B.value]
        for p in points
    ]
    _emit(report, args, {"window_sweep": (header, rows)})
    return 0


def _deadtime_point(cfg_and_dt) -> tuple[float, float, float, float, float]:
    cfg, dt, idx = cfg_and_dt
    summary = pipeline.conditional_tomography_summary(
        pipeline.with_dead_time(cfg, dt, seed_offset=1 + idx)
    )
    rate = summary.heralding_rate
    conc = summary.concurrence
    return dt, rate.value, rate.stderr, conc.value, conc.stderr


def cmd_sweep_deadtime(args) -> int:
    cfg = _load_scenario(args)
    if cfg.protocol != "fringe_scan":
        raise ConfigError("dead-time sweep expects a fringe_scan configuration")
    dts = [p * 1e-6 for p in _parse_points(args.points)]
    for dt in dts:
        if dt < cfg.schedule.pump_off_time:
            raise ConfigError(
                f"dead time {dt:g} s below pump-off time "
                f"{cfg.schedule.pump_off_time:g} s"
            )
    jobs = [(cfg, dt, i) for i, dt in enumerate(dts)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_deadtime_point, jobs))
    else:
        results = [_deadtime_point(j) for j in jobs]
    report = Report(provenance=[args.config or "<preset>"])
    report.add("heralding_rate_at_min_dead_time",
               ValueWithError(results[0][1], results[0][2]), unit="cps")
    header = ["dead_time_us", "heralding_rate", "heralding_rate_err",
              "concurrence", "concurrence_err"]
    rows = [[dt * 1e6, r, re, c, ce] for dt, r, re, c, ce in results]
    _emit(report, args, {"deadtime_sweep": (header, rows)})
    return 0


def cmd_sweep_modes(args) -> int:
    cfg = _load_scenario(args)
    if cfg.protocol != "unconditional":
        raise ConfigError("mode sweep expects an unconditional configuration")
    n_list = ([int(p) for p in _parse_points(args.points)] if args.points
              else list(range(1, cfg.schedule.n_modes + 1)))
    result = pipeline.mode_sweep(cfg, n_list)
    report = Report(provenance=[args.config or "<preset>"])
    report.add("slope_per_detector", result.slope_per_detector, unit="cps/mode")
    report.add("r_squared", result.r_squared, unit="dimensionless")
    last = result.points[-1]
    report.add("rate_i1_max_modes", last.rate_i1, unit="cps")
    report.add("rate_i2_max_modes", last.rate_i2, unit="cps")
    header = ["n_modes", "rate_i1", "rate_i1_err", "rate_i2", "rate_i2_err",
              "visibility_i1", "visibility_i2"]
    rows = []
    for p in result.points:
        rows.append([
            p.n_modes, p.rate_i1.value, p.rate_i1.stderr,
            p.rate_i2.value, p.rate_i2.stderr,
            p.visibility_i1.value if p.visibility_i1 else math.nan,
            p.visibility_i2.value if p.visibility_i2 else math.nan,
        ])
    _emit(report, args, {"mode_sweep": (header, rows)})
    return 0


def _pump_point(cfg_and_factor):
    cfg, k, idx, windows = cfg_and_factor
    scaled = replace(
        cfg,
        source_A=replace(cfg.source_A, mu=cfg.source_A.mu * k,
                         pump_power=cfg.source_A.pump_power * k),
        source_B=replace(cfg.source_B, mu=cfg.source_B.mu * k,
                         pump_power=cfg.source_B.pump_power * k),
        seed=cfg.seed + 10 * (idx + 1),
    )
    result = pipeline.transparency_p11(scaled, windows)
    p = result.points[0]
    return k, p.p11_direct.value, p.p11_direct.stderr, \
        p.p11_estimate.value, p.p11_estimate.stderr


def cmd_sweep_pump(args) -> int:
    cfg = _load_scenario(args)
    if cfg.protocol != "transparency":
        raise ConfigError("pump sweep expects a transparency configuration")
    factors = _parse_points(args.points)
    window = _window_s(args)
    jobs = [(cfg, k, i, [window]) for i, k in enumerate(factors)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_pump_point, jobs))
    else:
        results = [_pump_point(j) for j in jobs]
    report = Report(provenance=[args.config or "<preset>"])
    for k, dv, de, ev, ee in results:
        sigma = math.hypot(de, ee)
        pull = (dv - ev) / sigma if sigma > 0 else 0.0
        report.add(f"p11_pull_x{k:g}", pull, unit="sigma")
    header = ["pump_factor", "p11_direct", "p11_direct_err",
              "p11_estimate", "p11_estimate_err"]
    rows = [list(r) for r in results]
    _emit(report, args, {"pump_sweep": (header, rows)})
    return 0


# ---------------------------------------------------------------------------
# closed-form calculators


def cmd_model(args) -> int:
    report = Report()
    if args.which == "g2si":
        report.add("g2si", models.g2_si_model(args.params[0], args.params[1],
                                              args.params[2]),
                   unit="dimensionless")
    elif args.which == "visibility":
        ch = models.ChannelModel(
            eta_setup=1.0, eta_det=1.0, eta_s=args.eta_s, eta_i=args.eta_i,
            signal_class_visibility=args.v_signal,
            dfg_class_visibility=args.v_dfg,
        )
        report.add("visibility", models.visibility_model(ch, args.params[0]),
                   unit="dimensionless")
        report.add("visibility_limit", models.visibility_limit(ch),
                   unit="dimensionless")
    elif args.which == "threshold":
        p00, v_lim = args.params[0], args.params[1]
        v_eff = v_lim - args.n_sigma * args.vlim_sigma
        report.add("min_g2si", models.min_g2_threshold(p00, v_eff),
                   unit="dimensionless")
        report.add("v_lim_used", v_eff, unit="dimensionless")
    elif args.which == "pumpfactor":
        src = models.SourceModel(
            mu=0.0, eta_H=args.eta_h, pump_power=args.pump,
            a_coeff=models.afc_coefficient(args.g2_afc, args.pump),
            mu1=args.mu1,
        )
        report.add("max_pump_factor",
                   models.max_pump_factor(src, args.params[0]),
                   unit="dimensionless")
    elif args.which == "linkbudget":
        cfg = (load_config(args.config) if args.config
               else presets.unconditional_multiplexed())
        budget = linksim.link_budget(
            cfg, args.params[0], args.params[1], args.params[2],
            detection_ratio=args.detection_ratio,
        )
        report.add("heralding_rate", budget.heralding_rate, unit="cps")
        report.add("heralding_rate_per_detector",
                   budget.heralding_rate_per_detector, unit="cps")
        report.add("detection_rate", budget.detection_rate, unit="cps")
        report.add("saturation_cap", budget.saturation_cap, unit="cps")
        report.add("arm_transmission", budget.arm_transmission,
                   unit="dimensionless")
        report.metrics["limiting_factor"] = {
            "value": budget.limiting_factor, "stderr": 0.0, "unit": "",
        }
    elif args.which == "efficiency":
        t_s = args.params[0] * 1e-6
        gamma = args.gamma_inh_khz * 1e3
        eta_inh = models.spin_dephasing_factor(gamma, t_s)
        eta_sw = args.eta0 * eta_inh
        report.add("eta_inh_formula", eta_inh, unit="dimensionless")
        report.add("eta_sw", eta_sw, unit="dimensionless")
        eta_inh_used = args.eta_inh if args.eta_inh is not None else eta_inh
        report.add("eta_read",
                   models.readout_efficiency(eta_sw, args.eta_write, eta_inh_used),
                   unit="dimensionless")
    _emit(report, args)
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(p, config_required=False):
    p.add_argument("--config", required=config_required,
                   help="scenario configuration JSON")
    p.add_argument("--seed", type=int, help="seed override")
    p.add_argument("--duration", type=float, help="duration override (s)")
    p.add_argument("--out", help="output directory")


def _add_analysis_flags(p):
    p.add_argument("--window-ns", type=float, default=280.0,
                   help="detection window (ns)")
    p.add_argument("--noise-window-ns", type=float, default=2000.0,
                   help="width of each flanking noise window (ns)")
    p.add_argument("--mode", type=int, default=None,
                   help="restrict heralds to temporal modes below N")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel sweep points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlink",
        description="Simulate and analyse a heralded two-memory "
                    "entanglement link.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate detector event files")
    _add_common(p, config_required=True)
    p.set_defaults(func=cmd_simulate)

    pa = sub.add_parser("analyze", help="analyse event files")
    suba = pa.add_subparsers(dest="analysis", required=True)

    p = suba.add_parser("g2", help="cross-correlation per node")
    _add_common(p)
    _add_analysis_flags(p)
    p.add_argument("--events", required=True, help="event directory")
    p.set_defaults(func=cmd_analyze_g2)

    p = suba.add_parser("tomography", help="density-matrix reconstruction")
    _add_common(p)
    _add_analysis_flags(p)
    p.add_argument("--diag", help="direct-detection event directory")
    p.add_argument("--fringe", help="interference event directory")
    p.add_argument("--p10", type=float, help="direct population input")
    p.add_argument("--p10-err", type=float, default=0.0)
    p.add_argument("--p01", type=float, default=None)
    p.add_argument("--p01-err", type=float, default=0.0)
    p.add_argument("--p11", type=float, default=None)
    p.add_argument("--p11-err", type=float, default=0.0)
    p.add_argument("--d", type=float, default=None)
    p.add_argument("--d-err", type=float, default=0.0)
    p.add_argument("--backprop", type=float, nargs=4, default=None,
                   metavar=("ETA_DET", "ETA_SETUP", "ETA_READ_A", "ETA_READ_B"))
    p.set_defaults(func=cmd_analyze_tomography)

    p = suba.add_parser("fringes", help="fringe fits per detector pair")
    _add_common(p)
    _add_analysis_flags(p)
    p.add_argument("--events", required=True, help="event directory")
    p.set_defaults(func=cmd_analyze_fringes)

    ps = sub.add_parser("sweep", help="orchestrated parameter sweeps")
    subs = ps.add_subparsers(dest="kind", required=True)
    for kind, fn, ptshelp in (
        ("window", cmd_sweep_window, "detection windows (ns)"),
        ("deadtime", cmd_sweep_deadtime, "memory dead times (us)"),
        ("modes", cmd_sweep_modes, "mode counts"),
        ("pump", cmd_sweep_pump, "pump power factors"),
    ):
        p = subs.add_parser(kind)
        _add_common(p)
        _add_analysis_flags(p)
        required = kind != "modes"
        p.add_argument("--points", required=required, default=None,
                       help=f"comma-separated {ptshelp}")
        p.set_defaults(func=fn)

    pm = sub.add_parser("model", help="closed-form calculators")
    subm = pm.add_subparsers(dest="which", required=True)

    p = subm.add_parser("g2si", help="g2si from (g2_afc, eta_H, mu1)")
    p.add_argument("params", type=float, nargs=3,
                   metavar=("G2_AFC", "ETA_H", "MU1"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_model)

    p = subm.add_parser("visibility", help="visibility from g2si")
    p.add_argument("params", type=float, nargs=1, metavar="G2SI")
    p.add_argument("--eta-s", type=float, default=0.90)
    p.add_argument("--eta-i", type=float, default=0.90)
    p.add_argument("--v-signal", type=float, default=0.87)
    p.add_argument("--v-dfg", type=float, default=0.95)
    p.add_argument("--out")
    p.set_defaults(func=cmd_model)

    p = subm.add_parser("threshold", help="minimum g2si for entanglement")
    p.add_argument("params", type=float, nargs=2, metavar=("P00", "V_LIM"))
    p.add_argument("--n-sigma", type=float, default=0.0,
                   help="degrade V_LIM by this many of its sigmas")
    p.add_argument("--vlim-sigma", type=float, default=0.07)
    p.add_argument("--out")
    p.set_defaults(func=cmd_model)

    p = subm.add_parser("pumpfactor", help="largest pump multiplier for a g2si target")
    p.add_argument("params", type=float, nargs=1, metavar="G2_TARGET")
    p.add_argument("--g2-afc", type=float, required=True)
    p.add_argument("--pump", type=float, required=True, help="pump power (mW)")
    p.add_argument("--eta-h", type=float, default=0.20)
    p.add_argument("--mu1", type=float, default=0.01)
    p.add_argument("--out")
    p.set_defaults(func=cmd_model)

    p = subm.add_parser("linkbudget", help="heralding/detection rates over fiber")
    p.add_argument("params", type=float, nargs=3,
                   metavar=("LENGTH_KM", "LOSS_DB_PER_KM", "PUMP_FACTOR"))
    p.add_argument("--config", help="unconditional scenario (default: preset)")
    p.add_argument("--detection-ratio", type=float,
                   default=linksim.DETECTION_TO_HERALDING_RATIO)
    p.add_argument("--out")
    p.set_defaults(func=cmd_model)

    p = subm.add_parser("efficiency", help="memory efficiency chain")
    p.add_argument("params", type=float, nargs=1, metavar="T_S_US")
    p.add_argument("--eta0", type=float, required=True)
    p.add_argument("--gamma-inh-khz", type=float, default=12.5)
    p.add_argument("--eta-write", type=float, default=0.625)
    p.add_argument("--eta-inh", type=float, default=None,
                   help="override dephasing factor for the readout chain")
    p.add_argument("--out")
    p.set_defaults(func=cmd_model)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AnalysisError, tomography.PhysicalityError, ValueError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
