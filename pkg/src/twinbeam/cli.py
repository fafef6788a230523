"""Command-line front end.

    twinbeam <laser|cavity|opo|lock|bench|sweep> --scenario PATH [--out DIR]
             [--seed N] [--pump MW] [--duration S] [--figures]

Each command writes its CSV tables and one ``summary.json`` into ``--out``
and prints the summary.  Exit codes: 0 ok, 2 config error, 3 physics or
validation error (including a lost lock), 4 analysis error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import beam_optics as bo
from . import chain
from . import laser_model as lm
from . import lock_servo as ls
from . import noise_bench as nb
from . import opo_quantum as oq
from .errors import ConfigError, InstabilityError, LockLostError, PhysicsError, TwinbeamError
from .scenario import Scenario
from .sweep import OBJECTIVES, SweepSpec, run_sweep

log = logging.getLogger("twinbeam")


@dataclass
class Report:
    command: str
    summary: dict
    tables: dict = field(default_factory=dict)  # file name -> CSV text
    figures: list = field(default_factory=list)  # callables taking the output directory
    exit_code: int = 0


def _csv(header, rows):
    lines = [",".join(header)]
    lines += [",".join(f"{v:.12g}" if isinstance(v, (float, np.floating)) else str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def run_laser(sc: Scenario, pump_w=None) -> Report:
    cfg, medium, shg = chain.laser(sc)
    requested = [pump_w] if pump_w is not None else list(sc.get("laser.pump_w", [1.8]))
    grid = np.linspace(0.0, 2.0, 21)
    lin = lm.green_output_linear(cfg, grid)
    nonlin = lm.green_output_shg(shg, grid) if shg else None
    rows = [(p, l, s) for p, l, s in zip(grid, lin, nonlin if nonlin is not None else [float("nan")] * len(grid))]
    summary = {
        "threshold_pump_w": cfg.threshold_pump,
        "slope_efficiency": cfg.slope_efficiency,
        "output": [
            {
                "pump_w": p,
                "green_linear_w": lm.green_output_linear(cfg, p),
                "green_shg_w": lm.green_output_shg(shg, p) if shg else None,
            }
            for p in requested
        ],
    }
    if medium is not None:
        summary["absorbed_fraction"] = lm.absorbed_fraction(medium)
    if shg is not None:
        summary["shg_fit"] = {"shg_coupling_per_w": shg.shg_coupling, "saturation_power_w": shg.saturation_power}

    def fig(out):
        from . import plotting

        plotting.laser_curve(grid, lin, nonlin, os.path.join(out, "laser.png"), cfg.threshold_pump)

    return Report(
        "laser",
        summary,
        {"laser.csv": _csv(["pump_w", "green_linear_w", "green_shg_w"], rows)},
        [fig],
    )


def _profile(cavity, plane, points=400):
    """Beam radius along the round trip, sampling inside free-space legs."""
    q = bo.cavity_eigenmode(cavity, plane)
    pos, rad, z = [], [], 0.0
    for el in cavity.elements:
        if isinstance(el, (bo.FreeSpace, bo.Slab)) and el.d > 0:
            n = max(2, int(points * el.d / cavity.length))
            for s in np.linspace(0.0, el.d, n):
                pos.append(z + s)
                part = bo.FreeSpace(s) if isinstance(el, bo.FreeSpace) else bo.Slab(s, el.n)
                rad.append(bo.propagate_q(q, bo.ray_matrix(part, plane)).radius)
            z += el.d
        q = bo.propagate_q(q, bo.ray_matrix(el, plane))
    return np.array(pos), np.array(rad)


def run_cavity(sc: Scenario) -> Report:
    cavity = chain.cavity(sc)
    stability = {p: cavity.stability(p) for p in bo.PLANES}
    if not all(abs(m) < 1 for m in stability.values()):
        return Report(
            "cavity",
            {"stable": False, "stability": stability, "error": str(InstabilityError(max(stability.values(), key=abs)))},
            exit_code=InstabilityError.exit_code,
        )
    rows, planes = [], {}
    for plane in bo.PLANES:
        for name in sorted(cavity.planes, key=cavity.planes.get):
            beam = bo.beam_at(cavity, name, plane)
            planes.setdefault(name, {})[plane] = {
                "radius_m": beam.radius,
                "embedded_radius_m": beam.embedded_radius,
                "waist_m": beam.waist,
                "distance_to_waist_m": beam.distance_to_waist,
            }
            rows.append((name, plane, beam.radius, beam.embedded_radius, beam.waist, beam.distance_to_waist))
    summary = {"stable": True, "stability": stability, "round_trip_length_m": cavity.length, "planes": planes}
    thermal = chain.thermal_model(sc)
    if thermal is not None:
        summary["thermal_focal_length_m"] = bo.thermal_focal_length(thermal, sc.require("ring_cavity.absorbed_pump_w"))
    beam, at = chain.match_beam(sc)
    if beam is not None:
        if at not in cavity.planes:
            raise ConfigError(f"unknown plane {at!r}; choose from {sorted(cavity.planes)}", "ring_cavity.match_beam.plane")
        mode = bo.beam_at(cavity, at, bo.TANGENTIAL)
        embedded = bo.BeamParameter(mode.q, mode.wavelength)
        summary["mode_match"] = {"plane": at, "efficiency": bo.mode_match_overlap(embedded, beam)}

    def fig(out):
        from . import plotting

        pos, rad = _profile(cavity, bo.TANGENTIAL)
        plotting.cavity_profile(pos, rad, os.path.join(out, "cavity.png"))

    table = _csv(["plane", "transverse", "radius_m", "embedded_radius_m", "waist_m", "distance_to_waist_m"], rows)
    return Report("cavity", summary, {"cavity.csv": table}, [fig])


def run_opo(sc: Scenario, pump_w=None) -> Report:
    cfg = chain.opo(sc)
    det = chain.detection(sc)
    ideal = oq.DetectionChain.ideal()
    lw = oq.linewidth(cfg)
    f_an = sc.get("opo.analysis_frequency_hz", 3e6)
    freq = np.linspace(0.0, 10e6, 101)
    theory = oq.spectrum(cfg, ideal, freq)
    detected = oq.spectrum(cfg, det, freq)
    s_theory = oq.squeezing_spectrum(cfg, ideal, f_an)
    s_detected = oq.squeezing_spectrum(cfg, det, f_an)
    summary = {
        "escape_efficiency": oq.escape_efficiency(cfg),
        "fsr_hz": lw.fsr,
        "finesse": lw.finesse,
        "fwhm_hz": lw.fwhm,
        "half_width_hz": lw.half_width,
        "energy_conservation_error": oq.check_energy_conservation(cfg),
        "analysis_frequency_hz": f_an,
        "detection_efficiency": det.efficiency,
        "squeezing_db_theory": float(oq.to_db(s_theory)),
        "squeezing_db_detected": float(oq.to_db(s_detected)),
    }
    pump = pump_w if pump_w is not None else sc.get("opo.pump_w")
    if cfg.p_threshold is not None:
        summary["p_threshold_w"] = cfg.p_threshold
        summary["g_eff"] = cfg.g_eff
        if pump is not None:
            summary["pump_w"] = pump
            summary["conversion_model"] = oq.conversion_efficiency(cfg, pump)

    reported = {k: sc.get(f"opo.reported.{k}") for k in (sc.get("opo.reported") or {})}
    notes = []
    measured_db = reported.get("measured_squeezing_db")
    if measured_db is not None:
        s_meas = float(oq.from_db(-abs(measured_db)))
        inferred = {}
        for label, eta in (("reported_efficiency", reported.get("measurement_efficiency")), ("detection_chain", det.efficiency)):
            if eta is not None:
                inferred[label] = {"eta": eta, "inferred_db": float(oq.to_db(oq.detection_corrected(s_meas, eta)))}
        summary["detection_corrected"] = inferred
        if reported.get("inferred_squeezing_db") is not None:
            notes.append(
                {
                    "quantity": "squeezing inferred at the OPO output",
                    "provenance": "opo.reported.inferred_squeezing_db with opo.reported.measured_squeezing_db",
                    "reported_db": -abs(reported["inferred_squeezing_db"]),
                    "computed_db": {k: v["inferred_db"] for k, v in inferred.items()},
                    "note": "loss inversion s0 = (s - (1 - eta)) / eta does not return the reported value",
                }
            )
    if reported.get("conversion") is not None and "conversion_model" in summary:
        notes.append(
            {
                "quantity": "pump-to-twin-beam conversion",
                "provenance": "opo.reported.conversion at opo.pump_w",
                "reported": reported["conversion"],
                "computed": summary["conversion_model"],
                "note": "pump-depletion model exceeds the measured value; model is not tuned to match",
            }
        )
    summary["non_reproductions"] = notes

    def fig(out):
        from . import plotting

        plotting.squeezing_spectrum(
            freq,
            {"OPO output": theory.db, f"detected (eta={det.efficiency:.3f})": detected.db},
            os.path.join(out, "opo_spectrum.png"),
        )

    return Report(
        "opo",
        summary,
        {"opo_spectrum.csv": theory.to_csv(), "opo_spectrum_detected.csv": detected.to_csv()},
        [fig],
    )


def run_lock(sc: Scenario, seed: int, duration=None) -> Report:
    cav, mod, gains, disturbance = chain.lock(sc, seed)
    duration = duration if duration is not None else sc.get("lock.duration_s", 1.0)
    settle = sc.get("lock.settle_window_s", 0.2)
    trace = ls.simulate_lock(cav, mod, gains, disturbance, duration, settle_window=min(settle, duration))
    summary = trace.summary()
    summary["fwhm_opo_model_hz"] = oq.linewidth(chain.opo(sc)).fwhm
    summary["duration_s"] = duration

    def fig(out):
        from . import plotting

        plotting.lock_trace(trace.t, trace.detuning, os.path.join(out, "lock.png"), trace.summary_extra["fwhm_hz"])

    return Report(
        "lock",
        summary,
        {"lock_trace.csv": trace.to_csv()},
        [fig],
        exit_code=0 if trace.locked else LockLostError.exit_code,
    )


def run_bench(sc: Scenario, seed: int) -> Report:
    model, settings, band, f_an = chain.bench(sc, seed)
    res = nb.run_bench(model, settings, band=band, analysis_frequency=f_an)
    sq = res.squeezing
    rows = list(res.csv_rows())

    def fig(out):
        from . import plotting

        f, a, b = (np.array(c) for c in zip(*rows))
        plotting.bench_traces(f, a, b, os.path.join(out, "fig3.png"))

    return Report(
        "bench",
        res.summary(),
        {
            "fig3.csv": res.to_csv(),
            "squeezing.csv": _csv(["freq_hz", "squeezing_db"], zip(sq.frequencies, sq.db)),
        },
        [fig],
    )


def run_sweep_command(sc: Scenario, spec: SweepSpec) -> Report:
    res = run_sweep(sc, spec)

    def fig(out):
        from . import plotting

        plotting.sweep_curve(
            res.grid, res.values, res.optimum, os.path.join(out, "sweep.png"), spec.parameter, spec.objective
        )

    return Report("sweep", res.summary(), {"sweep.csv": res.to_csv()}, [fig])


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: Report, out_dir, figures=False):
    for name, text in report.tables.items():
        write_atomic(os.path.join(out_dir, name), text)
    body = json.dumps({"command": report.command, **report.summary}, indent=2, sort_keys=True, default=_json_default)
    write_atomic(os.path.join(out_dir, "summary.json"), body + "\n")
    if figures:
        for fig in report.figures:
            fig(out_dir)
    return body


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def build_parser():
    p = argparse.ArgumentParser(prog="twinbeam", description="Twin-beam OPO design and noise simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file or a shipped name (paper_fig1)")
    common.add_argument("--out", default="twinbeam_out", help="output directory")
    common.add_argument("--seed", type=int, help="overrides the scenario seed and TWINBEAM_SEED")
    common.add_argument("--pump", type=float, help="pump power in mW")
    common.add_argument("--duration", type=float, help="lock simulation length in s")
    common.add_argument("--figures", action="store_true", help="also render PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")
    for name in ("laser", "cavity", "opo", "lock", "bench"):
        sub.add_parser(name, parents=[common])
    sw = sub.add_parser("sweep", parents=[common])
    sw.add_argument("--param", default="opo.t1", help="dotted path of the swept numeric leaf")
    sw.add_argument("--min", type=float, default=0.01, dest="low")
    sw.add_argument("--max", type=float, default=0.10, dest="high")
    sw.add_argument("--steps", type=int, default=91)
    sw.add_argument("--objective", default="squeezing_db_at", choices=sorted(OBJECTIVES))
    sw.add_argument("--frequency", type=float, default=3e6, help="analysis frequency for squeezing objectives (Hz)")
    sw.add_argument("--goal", choices=("max", "min"))
    sw.add_argument("--golden", action="store_true", help="refine the grid optimum by golden-section search")
    return p


def dispatch(args) -> Report:
    sc = Scenario.load(args.scenario)
    seed = args.seed if args.seed is not None else sc.seed
    pump_w = None if args.pump is None else args.pump * 1e-3
    if args.command == "laser":
        return run_laser(sc, pump_w)
    if args.command == "cavity":
        return run_cavity(sc)
    if args.command == "opo":
        return run_opo(sc, pump_w)
    if args.command == "lock":
        return run_lock(sc, seed, args.duration)
    if args.command == "bench":
        return run_bench(sc, seed)
    spec = SweepSpec(args.param, args.low, args.high, args.steps, args.objective, args.frequency, args.goal, args.golden)
    return run_sweep_command(sc, spec)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        report = dispatch(args)
        body = emit(report, args.out, args.figures)
    except TwinbeamError as exc:
        kind = "config" if isinstance(exc, ConfigError) else "physics" if isinstance(exc, PhysicsError) else "analysis"
        print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    print(body)
    if report.exit_code:
        log.warning("%s finished with exit status %d", report.command, report.exit_code)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
