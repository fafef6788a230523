"""Steady-state output of the diode-pumped, intracavity-doubled laser.

Two models share one config:

* piecewise linear: green = slope * (pump - threshold) above threshold;
* intracavity SHG clamping: the circulating fundamental power P_c solves

      g0(pump) / (1 + P_c/P_sat) = L + kappa * P_c,   g0 = L * pump / threshold

  and the green output is kappa * P_c**2.

Pump power means power incident on the rod.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CalibrationError, ConfigError, PhysicsError


@dataclass(frozen=True)
class GainMedium:
    absorption_coefficient: float  # 1/cm at the pump wavelength
    length: float  # cm
    emission_cross_section: float = 3.0e-19  # cm^2, descriptive only
    note: str = ""

    def __post_init__(self):
        if not self.absorption_coefficient > 0:
            raise PhysicsError("absorption coefficient must be > 0")
        if not self.length >= 0:
            raise PhysicsError("gain medium length must be >= 0")


@dataclass(frozen=True)
class LaserConfig:
    threshold_pump: float
    slope_efficiency: float
    round_trip_loss: float = 0.03
    shg_coupling: Optional[float] = None  # kappa, 1/W
    saturation_power: Optional[float] = None  # W

    def __post_init__(self):
        if not self.threshold_pump > 0:
            raise PhysicsError("threshold pump power must be > 0")
        if not 0 < self.slope_efficiency < 1:
            raise PhysicsError("slope efficiency must lie in (0, 1)")
        if not 0 < self.round_trip_loss < 1:
            raise PhysicsError("round-trip loss must lie in (0, 1)")
        if self.shg_coupling is not None and not self.shg_coupling > 0:
            raise PhysicsError("SHG coupling must be > 0")
        if self.saturation_power is not None and not self.saturation_power > 0:
            raise PhysicsError("saturation power must be > 0")


def absorbed_fraction(medium: GainMedium) -> float:
    """Single-pass pump absorption 1 - exp(-alpha*L)."""
    return -math.expm1(-medium.absorption_coefficient * medium.length)


def green_output_linear(config: LaserConfig, pump):
    pump = np.asarray(pump, dtype=float)
    out = np.maximum(0.0, config.slope_efficiency * (pump - config.threshold_pump))
    return float(out) if out.ndim == 0 else out


def circulating_power(config: LaserConfig, pump: float) -> float:
    """Non-negative root of the gain-clamping equation (0 at or below threshold)."""
    kappa, p_sat = _nonlinear_params(config)
    loss = config.round_trip_loss
    g0 = loss * pump / config.threshold_pump
    if g0 <= loss:
        return 0.0
    # (kappa/P_sat) P^2 + (kappa + L/P_sat) P + (L - g0) = 0
    a = kappa / p_sat
    b = kappa + loss / p_sat
    c = loss - g0
    # stable form of the positive root
    return -2.0 * c / (b + math.sqrt(b * b - 4.0 * a * c))


def green_output_shg(config: LaserConfig, pump):
    kappa, _ = _nonlinear_params(config)
    if np.ndim(pump):
        return np.array([kappa * circulating_power(config, float(p)) ** 2 for p in np.ravel(pump)]).reshape(np.shape(pump))
    return kappa * circulating_power(config, float(pump)) ** 2


def _nonlinear_params(config):
    if config.shg_coupling is None or config.saturation_power is None:
        raise ConfigError("SHG model needs shg_coupling and saturation_power", "laser")
    return config.shg_coupling, config.saturation_power


def calibrate_laser(threshold, output_at, round_trip_loss=0.03) -> LaserConfig:
    """Fit the SHG model to a threshold and one (pump, green output) point.

    The one-parameter family is pinned at optimum nonlinear coupling,
    kappa = L / P_sat, for which P_c = P_sat*(sqrt(pump/threshold) - 1) and
    the fit is closed form.  ``slope_efficiency`` on the result is the chord
    slope between the two anchors.
    """
    pump, green = output_at
    if not threshold > 0:
        raise CalibrationError("threshold must be > 0")
    if not pump > threshold:
        raise CalibrationError("calibration pump must be above threshold")
    if not green > 0:
        raise CalibrationError("zero output above threshold implies zero nonlinear coupling")
    slope = green / (pump - threshold)
    if slope >= 1:
        raise CalibrationError(f"anchors imply slope efficiency {slope:.3g} >= 1")
    root = math.sqrt(pump / threshold) - 1.0
    p_sat = green / (round_trip_loss * root**2)
    return LaserConfig(
        threshold_pump=threshold,
        slope_efficiency=slope,
        round_trip_loss=round_trip_loss,
        shg_coupling=round_trip_loss / p_sat,
        saturation_power=p_sat,
    )

