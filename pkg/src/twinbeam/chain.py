"""Build module configurations from a Scenario."""

from __future__ import annotations

from dataclasses import replace

from . import beam_optics as bo
from . import laser_model as lm
from . import lock_servo as ls
from . import noise_bench as nb
from . import opo_quantum as oq
from .errors import ConfigError
from .scenario import Scenario, physics


def laser(sc: Scenario):
    sec = "laser"
    sc.section(sec)
    with physics(sec):
        cfg = lm.LaserConfig(
            threshold_pump=sc.require("laser.threshold_pump_w"),
            slope_efficiency=sc.require("laser.slope_efficiency"),
            round_trip_loss=sc.get("laser.round_trip_loss", 0.03),
        )
        medium = None
        if sc.get("laser.absorption_per_cm") is not None:
            medium = lm.GainMedium(
                sc.get("laser.absorption_per_cm"),
                sc.require("laser.rod_length_cm"),
                sc.get("laser.emission_cross_section_cm2", 3.0e-19),
            )
        shg = None
        point = sc.get("laser.calibration_point")
        if point is not None:
            if len(point) != 2:
                raise ConfigError("expected [pump_w, green_w]", "laser.calibration_point")
            shg = lm.calibrate_laser(cfg.threshold_pump, tuple(point), cfg.round_trip_loss)
    return cfg, medium, shg


def thermal_model(sc: Scenario):
    k = sc.get("ring_cavity.thermal_k_wm")
    return None if k is None else bo.ThermalLensModel(k)


def cavity(sc: Scenario):
    sec = "ring_cavity"
    sc.section(sec)
    with physics(sec):
        thermal = thermal_model(sc)
        focal = None
        if thermal is not None:
            focal = bo.thermal_focal_length(thermal, sc.require("ring_cavity.absorbed_pump_w"))
        return bo.bowtie_ring(
            roc=sc.require("ring_cavity.roc_m"),
            concave_separation=sc.require("ring_cavity.concave_separation_m"),
            plane_separation=sc.require("ring_cavity.plane_separation_m"),
            total_length=sc.require("ring_cavity.total_length_m"),
            wavelength=sc.require("ring_cavity.wavelength_m"),
            incidence_angle=sc.get("ring_cavity.incidence_angle_rad", 0.0),
            thermal_focal=focal,
            m2=sc.get("ring_cavity.m2", 1.0),
        )


def match_beam(sc: Scenario):
    if sc.get("ring_cavity.match_beam") is None:
        return None, None
    with physics("ring_cavity.match_beam"):
        beam = bo.BeamParameter.from_waist(
            sc.require("ring_cavity.match_beam.waist_m"),
            sc.require("ring_cavity.wavelength_m"),
            distance=sc.get("ring_cavity.match_beam.waist_offset_m", 0.0),
        )
    return beam, sc.get("ring_cavity.match_beam.plane", "focus")


def opo(sc: Scenario) -> oq.OpoConfig:
    sec = "opo"
    sc.section(sec)
    with physics(sec):
        lam_s = sc.require("opo.signal_wavelength_m")
        lam_i = sc.require("opo.idler_wavelength_m")
        cfg = oq.OpoConfig(
            t1=sc.require("opo.t1"),
            t2_pump=sc.require("opo.t2_pump"),
            l_diss=sc.require("opo.l_diss"),
            crystal_length=sc.require("opo.crystal_length_m"),
            air_gap=sc.require("opo.air_gap_m"),
            crystal_index=sc.get("opo.crystal_index", 1.83),
            pump_loss=sc.get("opo.pump_loss", 0.0),
            pump_wavelength=sc.get("opo.pump_wavelength_m") or oq.pump_for(lam_s, lam_i),
            signal_wavelength=lam_s,
            idler_wavelength=lam_i,
        )
        p_th = sc.get("opo.p_threshold_w")
        if p_th is not None:
            cfg = oq.calibrate_threshold(cfg, p_th)
    return cfg


def detection(sc: Scenario) -> oq.DetectionChain:
    sc.section("detection")
    d = oq.DetectionChain()
    with physics("detection"):
        return oq.DetectionChain(
            quantum_efficiency=sc.get("detection.quantum_efficiency", d.quantum_efficiency),
            path_transmission=sc.get("detection.path_transmission", d.path_transmission),
            electronic_floor_db=sc.get("detection.electronic_floor_db", d.electronic_floor_db),
            cmrr_db=sc.get("detection.cmrr_db", d.cmrr_db),
            saturation=sc.get("detection.saturation_w", d.saturation),
        )


def lock(sc: Scenario, seed: int):
    sec = "lock"
    sc.section(sec)
    g = ls.PidGains()
    m = ls.ModulationSource()
    dist = ls.DisturbanceModel()
    with physics(sec):
        cav = ls.CavityResponse.from_opo(opo(sc), sc.get("lock.back_transmission", 1e-5))
        mod = ls.ModulationSource(
            sc.get("lock.modulation_hz", m.frequency), sc.get("lock.modulation_depth_rad", m.depth)
        )
        limit = sc.get("lock.output_limit_hz", g.output_limits[1])
        gains = ls.PidGains(
            kp=sc.get("lock.kp", g.kp),
            ki=sc.get("lock.ki", g.ki),
            kd=sc.get("lock.kd", g.kd),
            sample_period=sc.get("lock.sample_period_s", g.sample_period),
            output_limits=(-limit, limit),
        )
        disturbance = ls.DisturbanceModel(
            drift_rate=sc.get("lock.drift_rate_hz_per_s", dist.drift_rate),
            white_noise_rms=sc.get("lock.white_noise_rms_hz", dist.white_noise_rms),
            seed=seed,
            initial_detuning=sc.get("lock.initial_detuning_hz", 0.0),
        )
    return cav, mod, gains, disturbance


def bench(sc: Scenario, seed: int):
    sec = "bench"
    sc.section(sec)
    cfg = opo(sc)
    det = detection(sc)
    a = nb.AnalyzerSettings()
    with physics(sec):
        settings = nb.AnalyzerSettings(
            sample_rate=sc.get("bench.sample_rate_hz", a.sample_rate),
            n_samples=sc.get("bench.n_samples"),
            rbw=sc.get("bench.rbw_hz", a.rbw),
            vbw=sc.get("bench.vbw_hz", a.vbw),
            f_stop=sc.get("bench.f_stop_hz", a.f_stop),
        )
        model = nb.TwinBeamNoiseModel.from_opo(
            cfg,
            det,
            excess_common_db=sc.get("bench.excess_common_db", 15.0),
            include_cmrr_leakage=sc.get("bench.include_cmrr_leakage", False),
            seed=seed,
        )
        tech = sc.get("bench.technical_noise")
        if tech is not None:
            model = replace(model, technical_noise=technical_noise(sc, model))
    band = tuple(sc.get("bench.band_hz", [1e6, 10e6]))
    if len(band) != 2 or not band[0] < band[1]:
        raise ConfigError("expected [low, high] with low < high", "bench.band_hz")
    return model, settings, band, sc.get("bench.analysis_frequency_hz", 3e6)


def technical_noise(sc: Scenario, model):
    corner = sc.require("bench.technical_noise.corner_hz")
    order = sc.require("bench.technical_noise.order")
    level = sc.get("bench.technical_noise.level")
    target = sc.get("bench.technical_noise.min_at_hz")
    if (level is None) == (target is None):
        raise ConfigError("give exactly one of level or min_at_hz", "bench.technical_noise")
    if level is None:
        level = nb.rise_level_for_minimum(model, corner, order, target)
    return nb.low_frequency_rise(level, corner, order)
