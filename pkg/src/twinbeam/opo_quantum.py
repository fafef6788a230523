"""Analytic model of the triply resonant nondegenerate OPO.

Loss budget, linewidth, threshold scaling, pump-depletion conversion and the
intensity-difference noise spectrum of the twin beams, normalised to the
shot-noise level (1.0 = shot noise).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import PhysicsError, UnphysicalInputError

SPEED_OF_LIGHT = 299_792_458.0
ENERGY_CONSERVATION_GATE = 1e-4


def to_db(x):
    return 10.0 * np.log10(x)


def from_db(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


@dataclass(frozen=True)
class OpoConfig:
    t1: float  # coupler transmission at the signal/idler wavelength
    t2_pump: float
    l_diss: float  # round-trip dissipative loss, signal/idler
    crystal_length: float  # m
    air_gap: float  # m
    pump_wavelength: float
    signal_wavelength: float
    idler_wavelength: float
    p_threshold: Optional[float] = None  # W
    crystal_index: float = 1.83
    pump_loss: float = 0.0
    g_eff: Optional[float] = None  # reporting only, see calibrate_threshold

    def __post_init__(self):
        if not 0 < self.t1 < 1:
            raise PhysicsError(f"t1 = {self.t1!r} must lie in (0, 1)")
        if not 0 <= self.l_diss < 1:
            raise PhysicsError(f"l_diss = {self.l_diss!r} must lie in [0, 1)")
        if not self.t1 + self.l_diss < 1:
            raise PhysicsError("t1 + l_diss must be < 1")
        if not 0 <= self.t2_pump < 1:
            raise PhysicsError("t2_pump must lie in [0, 1)")
        if not self.crystal_index >= 1:
            raise PhysicsError("crystal index must be >= 1")
        if self.crystal_length < 0 or self.air_gap < 0 or self.crystal_length + self.air_gap <= 0:
            raise PhysicsError("cavity lengths must be non-negative with positive sum")
        if self.p_threshold is not None and not self.p_threshold > 0:
            raise PhysicsError("p_threshold must be > 0")
        for name in ("pump_wavelength", "signal_wavelength", "idler_wavelength"):
            if not getattr(self, name) > 0:
                raise PhysicsError(f"{name} must be > 0")
        err = check_energy_conservation(self)
        if err >= ENERGY_CONSERVATION_GATE:
            raise PhysicsError(f"wavelengths violate energy conservation (relative error {err:.3g})")

    @property
    def total_loss(self):
        return self.t1 + self.l_diss


@dataclass(frozen=True)
class CavityLinewidth:
    fsr: float
    finesse: float
    fwhm: float

    @property
    def half_width(self):
        return self.fwhm / 2.0


@dataclass(frozen=True)
class DetectionChain:
    quantum_efficiency: float = 0.94
    path_transmission: float = 0.96
    electronic_floor_db: float = -22.0
    cmrr_db: float = 28.0
    saturation: float = 7.5e-3  # W per detector

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise PhysicsError("total detection efficiency must lie in (0, 1]")
        if not self.electronic_floor_db < 0:
            raise PhysicsError("electronic floor must sit below shot noise (dB < 0)")

    @property
    def efficiency(self):
        return self.quantum_efficiency * self.path_transmission

    @classmethod
    def ideal(cls):
        return cls(quantum_efficiency=1.0, path_transmission=1.0)


@dataclass(frozen=True)
class NoiseSpectrum:
    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.shape != v.shape or f.ndim != 1:
            raise PhysicsError("frequencies and values must be 1-D arrays of equal length")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise PhysicsError("frequencies must be strictly increasing")
        if not np.all(v >= 0):
            raise PhysicsError("spectrum values must be non-negative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "values", v)

    @property
    def db(self):
        with np.errstate(divide="ignore"):
            return to_db(self.values)

    def band(self, f_lo, f_hi):
        sel = (self.frequencies >= f_lo) & (self.frequencies <= f_hi)
        return NoiseSpectrum(self.frequencies[sel], self.values[sel])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["freq_hz", "psd_rel_shot", "psd_db"])
        for f, v, d in zip(self.frequencies, self.values, self.db):
            w.writerow([f"{f:.12g}", f"{v:.12g}", f"{d:.12g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "NoiseSpectrum":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(
            np.array([float(r["freq_hz"]) for r in rows]),
            np.array([float(r["psd_rel_shot"]) for r in rows]),
        )


def escape_efficiency(cfg: OpoConfig) -> float:
    return cfg.t1 / (cfg.t1 + cfg.l_diss)


def linewidth(cfg: OpoConfig) -> CavityLinewidth:
    """Linear standing-wave cavity: FSR = c / (2 L_opt), finesse = 2 pi / total loss."""
    optical_length = cfg.air_gap + cfg.crystal_index * cfg.crystal_length
    fsr = SPEED_OF_LIGHT / (2.0 * optical_length)
    finesse = 2.0 * math.pi / cfg.total_loss
    return CavityLinewidth(fsr=fsr, finesse=finesse, fwhm=fsr / finesse)


def apply_loss(s, eta):
    """Spectrum after a beam-splitter loss of transmission ``eta`` (vacuum admixed)."""
    return eta * np.asarray(s) + (1.0 - eta)


def squeezing_spectrum(cfg: OpoConfig, det: DetectionChain, freq):
    """Intensity-difference noise relative to shot noise at analysis frequency ``freq`` (Hz).

    S = 1 - eta_det * eta_esc / (1 + (freq / half_width)**2)
    """
    freq = np.asarray(freq, dtype=float)
    if np.any(freq < 0):
        raise PhysicsError("analysis frequency must be >= 0")
    half = linewidth(cfg).half_width
    s = 1.0 - det.efficiency * escape_efficiency(cfg) / (1.0 + (freq / half) ** 2)
    return float(s) if s.ndim == 0 else s


def spectrum(cfg: OpoConfig, det: DetectionChain, frequencies) -> NoiseSpectrum:
    f = np.asarray(frequencies, dtype=float)
    return NoiseSpectrum(f, np.atleast_1d(squeezing_spectrum(cfg, det, f)))


def detection_corrected(s_measured, eta_det):
    """Invert ``apply_loss``: infer the pre-detection spectrum."""
    eta_det = np.asarray(eta_det, dtype=float)
    if not np.all((eta_det > 0) & (eta_det <= 1)):
        raise PhysicsError("detection efficiency must lie in (0, 1]")
    s = np.asarray(s_measured, dtype=float)
    if np.any(s < (1.0 - eta_det) - 1e-12):
        raise UnphysicalInputError(
            f"measured level below the loss floor 1 - eta = {1 - eta_det:.6g} implies a negative spectrum"
        )
    out = (s - (1.0 - eta_det)) / eta_det
    return float(out) if out.ndim == 0 else out


def conversion_efficiency(cfg: OpoConfig, pump: float) -> float:
    """Pump-to-signal+idler conversion above threshold, 4 eta_esc (sqrt(s) - 1)/s, s = pump/threshold."""
    if cfg.p_threshold is None:
        raise PhysicsError("OPO threshold is not calibrated")
    if not pump > 0:
        raise PhysicsError("pump power must be > 0")
    sigma = pump / cfg.p_threshold
    if sigma <= 1:
        return 0.0
    eta = escape_efficiency(cfg) * 4.0 / sigma * (math.sqrt(sigma) - 1.0)
    return min(max(eta, 0.0), 1.0)


def check_energy_conservation(cfg: OpoConfig) -> float:
    inv_p = 1.0 / cfg.pump_wavelength
    return abs(1.0 / cfg.signal_wavelength + 1.0 / cfg.idler_wavelength - inv_p) / inv_p


def pump_for(signal_wavelength, idler_wavelength):
    return 1.0 / (1.0 / signal_wavelength + 1.0 / idler_wavelength)


def coupling_figure(cfg: OpoConfig, p_threshold: float) -> float:
    return cfg.total_loss * math.sqrt((cfg.t2_pump + cfg.pump_loss) / (4.0 * p_threshold))


def calibrate_threshold(cfg: OpoConfig, measured_p_th: float) -> OpoConfig:
    """Store a measured threshold and the implied effective coupling figure."""
    if not measured_p_th > 0:
        raise PhysicsError("measured threshold must be > 0")
    return replace(cfg, p_threshold=measured_p_th, g_eff=coupling_figure(cfg, measured_p_th))


def predicted_threshold(cfg: OpoConfig, g_eff: float) -> float:
    """Threshold at fixed coupling figure; scales as (total signal loss)**2."""
    return cfg.total_loss**2 * (cfg.t2_pump + cfg.pump_loss) / (4.0 * g_eff**2)
