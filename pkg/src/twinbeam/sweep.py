"""1-D design sweeps with an optional golden-section refinement.

Objectives are pure functions of a Scenario.  Squeezing objectives use the
linewidth computed from the swept config, so changing the coupler
transmission rescales the bandwidth with the total loss automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import beam_optics as bo
from . import chain
from . import opo_quantum as oq
from .errors import ConfigError
from .scenario import Scenario

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# objective name -> default goal
OBJECTIVES = {
    "squeezing_db_at": "max",
    "detected_squeezing_db_at": "max",
    "threshold_scale": "min",
    "conversion": "max",
    "waist": "max",
}


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    low: float
    high: float
    steps: int = 101
    objective: str = "squeezing_db_at"
    frequency: float = 3e6  # analysis frequency for the squeezing objectives
    goal: str | None = None
    golden: bool = False

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}; choose from {sorted(OBJECTIVES)}", "sweep.objective")
        if not self.low < self.high:
            raise ConfigError("sweep range needs min < max", "sweep.range")
        if self.steps < 2:
            raise ConfigError("sweep needs at least 2 steps", "sweep.steps")
        if self.goal not in (None, "max", "min"):
            raise ConfigError("goal must be 'max' or 'min'", "sweep.goal")

    @property
    def sense(self):
        return self.goal or OBJECTIVES[self.objective]


def make_objective(scenario: Scenario, spec: SweepSpec):
    """Return f(parameter value) -> objective value."""
    name = spec.objective

    if name in ("squeezing_db_at", "detected_squeezing_db_at"):
        det = chain.detection(scenario) if name == "detected_squeezing_db_at" else oq.DetectionChain.ideal()

        def evaluate(sc):
            return -float(oq.to_db(oq.squeezing_spectrum(chain.opo(sc), det, spec.frequency)))

    elif name == "threshold_scale":
        base = chain.opo(scenario)
        g_eff = oq.coupling_figure(base, 1.0)  # any reference threshold; only ratios matter

        def evaluate(sc):
            return oq.predicted_threshold(chain.opo(sc), g_eff) / oq.predicted_threshold(base, g_eff)

    elif name == "conversion":
        pump = scenario.require("opo.pump_w")

        def evaluate(sc):
            return oq.conversion_efficiency(chain.opo(sc), pump)

    else:

        def evaluate(sc):
            return bo.cavity_eigenmode(chain.cavity(sc)).waist

    return lambda x: evaluate(scenario.with_value(spec.parameter, float(x)))


def is_unimodal(values, sense="max", rtol=1e-12):
    """True if ``values`` rise then fall (sense 'max') or fall then rise ('min')."""
    v = np.asarray(values, dtype=float)
    if sense == "min":
        v = -v
    tol = rtol * max(1.0, float(np.max(np.abs(v))))
    d = np.diff(v)
    d = d[np.abs(d) > tol]
    if d.size == 0:
        return True
    signs = np.sign(d)
    # once the sequence starts falling it must not rise again
    falling = np.flatnonzero(signs < 0)
    return falling.size == 0 or np.all(signs[falling[0]:] < 0)


def golden_section(fn, a, b, sense="max", tol=1e-10, max_iter=500):
    """Golden-section search for the extremum of a unimodal ``fn`` on [a, b]."""
    sign = 1.0 if sense == "max" else -1.0
    g = lambda x: sign * fn(x)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = g(c), g(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:  # ties move toward the smaller parameter
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = g(d)
    # the interval endpoints are candidates too (monotone objectives)
    best = max(((fn(x) * sign, -x, x) for x in (a, (a + b) / 2, b)))
    return best[2]


@dataclass
class SweepResult:
    spec: SweepSpec
    grid: np.ndarray
    values: np.ndarray
    optimum: float
    optimum_value: float
    method: str
    warnings: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [f"{self.spec.parameter},{self.spec.objective}"]
        lines += [f"{x:.12g},{y:.12g}" for x, y in zip(self.grid, self.values)]
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "parameter": self.spec.parameter,
            "objective": self.spec.objective,
            "goal": self.spec.sense,
            "range": [self.spec.low, self.spec.high],
            "steps": self.spec.steps,
            "method": self.method,
            "optimum": self.optimum,
            "optimum_value": self.optimum_value,
            "warnings": list(self.warnings),
        }


def grid_argbest(values, sense):
    v = np.asarray(values, dtype=float)
    # argmax/argmin return the first hit, i.e. ties go to the smaller parameter
    return int(np.argmax(v) if sense == "max" else np.argmin(v))


def run_sweep(scenario: Scenario, spec: SweepSpec, objective=None) -> SweepResult:
    fn = objective or make_objective(scenario, spec)
    grid = np.linspace(spec.low, spec.high, spec.steps)
    values = np.array([fn(x) for x in grid])
    i = grid_argbest(values, spec.sense)
    best_x, best_v, method, warnings = float(grid[i]), float(values[i]), "grid", []
    if spec.golden:
        if is_unimodal(values, spec.sense):
            lo = grid[max(i - 1, 0)]
            hi = grid[min(i + 1, len(grid) - 1)]
            best_x = golden_section(fn, lo, hi, spec.sense)
            best_v = float(fn(best_x))
            method = "golden"
        else:
            warnings.append("objective is not unimodal on the grid; golden-section skipped, grid optimum reported")
    return SweepResult(spec, grid, values, best_x, best_v, method, warnings)
