"""Pound-Drever-Hall error signal and a discrete-time PID cavity lock.

The lock loop works in frequency units: the cavity detuning is the drift
disturbance minus the PZT correction applied one sample earlier, and the
PDH discriminant is rescaled by its slope at resonance so that the error
reads in Hz near lock.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

from .errors import PhysicsError
from .opo_quantum import OpoConfig, linewidth


@dataclass(frozen=True)
class CavityResponse:
    r1: float
    r2: float
    round_trip_amplitude_loss: float
    fsr: float

    def __post_init__(self):
        if not (0 < self.r1 < 1 and 0 < self.r2 < 1):
            raise PhysicsError("mirror field reflectivities must lie in (0, 1)")
        if not 0 <= self.round_trip_amplitude_loss < 1:
            raise PhysicsError("round-trip amplitude loss must lie in [0, 1)")
        if not self.fsr > 0:
            raise PhysicsError("fsr must be > 0")

    @property
    def a(self):
        return 1.0 - self.round_trip_amplitude_loss

    @classmethod
    def from_opo(cls, cfg: OpoConfig, back_transmission=1e-5):
        """Coupler from t1, dissipation lumped into the round-trip amplitude factor."""
        return cls(
            r1=math.sqrt(1.0 - cfg.t1),
            r2=math.sqrt(1.0 - back_transmission),
            round_trip_amplitude_loss=1.0 - math.sqrt(1.0 - cfg.l_diss),
            fsr=linewidth(cfg).fsr,
        )

    @property
    def finesse(self):
        g = self.r1 * self.r2 * self.a
        return math.pi * math.sqrt(g) / (1.0 - g)

    @property
    def fwhm(self):
        return self.fsr / self.finesse


def reflection_coefficient(cav: CavityResponse, detuning):
    """Field reflection at round-trip phase ``detuning`` (rad)."""
    e = np.exp(1j * np.asarray(detuning, dtype=float))
    g = cav.r2 * cav.a
    out = (cav.r1 - g * e) / (1.0 - cav.r1 * g * e)
    return complex(out) if out.ndim == 0 else out


def power_budget(cav: CavityResponse, detuning):
    """(reflected, transmitted through the back mirror, dissipated) fractions."""
    e = np.exp(1j * np.asarray(detuning, dtype=float))
    t1 = 1.0 - cav.r1**2
    circ = t1 / np.abs(1.0 - cav.r1 * cav.r2 * cav.a * e) ** 2
    dissipated = circ * (1.0 - cav.a**2)
    transmitted = circ * cav.a**2 * (1.0 - cav.r2**2)
    reflected = np.abs(reflection_coefficient(cav, detuning)) ** 2
    return reflected, transmitted, dissipated


@dataclass(frozen=True)
class ModulationSource:
    frequency: float = 19.2e6
    depth: float = 0.1

    def __post_init__(self):
        if not self.frequency > 0:
            raise PhysicsError("modulation frequency must be > 0")
        if not 0 < self.depth < 0.5:
            raise PhysicsError("modulation depth must lie in (0, 0.5) rad")


def pdh_error(cav: CavityResponse, mod: ModulationSource, detuning_hz):
    """Demodulated PDH signal for unit incident power."""
    detuning_hz = np.asarray(detuning_hz, dtype=float)
    if np.any(np.abs(detuning_hz) >= cav.fsr / 2):
        raise PhysicsError("detuning must stay within half a free spectral range")
    d = 2 * math.pi * detuning_hz / cav.fsr
    dm = 2 * math.pi * mod.frequency / cav.fsr
    f0 = reflection_coefficient(cav, d)
    fp = reflection_coefficient(cav, d + dm)
    fm = reflection_coefficient(cav, d - dm)
    scale = 2.0 * jv(0, mod.depth) * jv(1, mod.depth)
    out = scale * np.imag(f0 * np.conj(fp) - np.conj(f0) * fm)
    return float(out) if out.ndim == 0 else out


def pdh_slope(cav: CavityResponse, mod: ModulationSource) -> float:
    """d(error)/d(detuning) at resonance, per Hz."""
    h = cav.fwhm * 1e-4
    return (pdh_error(cav, mod, h) - pdh_error(cav, mod, -h)) / (2 * h)


def _scalar_discriminant(cav, mod):
    """Fast scalar PDH error normalised to read in Hz near resonance."""
    g = cav.r2 * cav.a
    r1 = cav.r1
    k = 2 * math.pi / cav.fsr
    dm = k * mod.frequency
    scale = 2.0 * jv(0, mod.depth) * jv(1, mod.depth) / pdh_slope(cav, mod)

    def refl(phi):
        e = cmath.exp(1j * phi)
        return (r1 - g * e) / (1.0 - r1 * g * e)

    def error(detuning_hz):
        # fold into one FSR so the loop never raises mid-run
        d = k * (math.remainder(detuning_hz, cav.fsr))
        f0 = refl(d)
        return scale * (f0 * refl(d + dm).conjugate() - f0.conjugate() * refl(d - dm)).imag

    return error


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.55
    ki: float = 2.5e4  # 1/s
    kd: float = 0.0  # s
    sample_period: float = 1e-5
    output_limits: tuple = (-100e6, 100e6)  # Hz of detuning correction

    def __post_init__(self):
        if not self.sample_period > 0:
            raise PhysicsError("sample period must be > 0")
        lo, hi = self.output_limits
        if not lo < hi:
            raise PhysicsError("output limits must satisfy min < max")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0


def pid_step(state: PidState, error: float, gains: PidGains):
    """One PID update with conditional-integration anti-windup."""
    t = gains.sample_period
    lo, hi = gains.output_limits
    integral = state.integral + gains.ki * error * t
    derivative = gains.kd * (error - state.prev_error) / t
    raw = gains.kp * error + integral + derivative
    out = min(max(raw, lo), hi)
    if out != raw and (raw - out) * error > 0:
        # saturated and the error pushes further out: hold the integrator
        integral = state.integral
    return PidState(integral, error), out


@dataclass(frozen=True)
class DisturbanceModel:
    drift_rate: float = 50e3  # Hz/s
    white_noise_rms: float = 5e3  # Hz per sample
    seed: int = 0
    initial_detuning: float = 0.0

    def __post_init__(self):
        if self.white_noise_rms < 0:
            raise PhysicsError("noise rms must be >= 0")


@dataclass
class LockTrace:
    t: np.ndarray
    detuning: np.ndarray
    error: np.ndarray
    actuation: np.ndarray
    rms_detuning: float
    locked: bool
    settle_time: float | None
    summary_extra: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "rms_detuning_hz": self.rms_detuning,
            "locked": self.locked,
            "settle_time_s": self.settle_time,
            **self.summary_extra,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_s", "detuning_hz", "error", "actuation_hz"])
        for row in zip(self.t, self.detuning, self.error, self.actuation):
            w.writerow([f"{x:.12g}" for x in row])
        return buf.getvalue()


def simulate_lock(
    cav: CavityResponse,
    mod: ModulationSource,
    gains: PidGains,
    disturbance: DisturbanceModel,
    duration: float,
    settle_window: float = 0.2,
    unlock_hold: float = 10e-3,
) -> LockTrace:
    if not duration > 0:
        raise PhysicsError("duration must be > 0")
    n = int(round(duration / gains.sample_period))
    t = np.arange(n) * gains.sample_period
    rng = np.random.default_rng(disturbance.seed)
    noise = rng.normal(0.0, disturbance.white_noise_rms, n) if disturbance.white_noise_rms else np.zeros(n)
    disturbance_hz = disturbance.initial_detuning + disturbance.drift_rate * t + noise

    discriminant = _scalar_discriminant(cav, mod)
    detuning = np.empty(n)
    error = np.empty(n)
    actuation = np.empty(n)
    state = PidState()
    u = 0.0
    for i in range(n):
        x = disturbance_hz[i] - u  # correction acts one sample late
        e = discriminant(x)
        state, u = pid_step(state, e, gains)
        detuning[i] = x
        error[i] = e
        actuation[i] = u

    fwhm = cav.fwhm
    outside = np.abs(detuning) > fwhm / 2
    hold = max(1, int(round(unlock_hold / gains.sample_period)))
    locked = _longest_run(outside) <= hold

    after = t >= min(settle_window, t[-1])
    rms = float(np.sqrt(np.mean(detuning[after] ** 2)))

    inside = np.abs(detuning) < fwhm / 50
    settle_time = None
    if inside[-1]:
        bad = np.flatnonzero(~inside)
        settle_time = float(t[bad[-1] + 1]) if bad.size else 0.0

    return LockTrace(
        t=t,
        detuning=detuning,
        error=error,
        actuation=actuation,
        rms_detuning=rms,
        locked=bool(locked),
        settle_time=settle_time,
        summary_extra={"fwhm_hz": fwhm, "settle_window_s": settle_window, "seed": disturbance.seed},
    )


def _longest_run(mask):
    if not mask.any():
        return 0
    padded = np.concatenate(([0], mask.astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    return int((edges[1::2] - edges[::2]).max())


def count_zero_crossings(x) -> int:
    s = np.sign(x)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))
