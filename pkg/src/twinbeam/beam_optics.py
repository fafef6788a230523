"""Gaussian-beam propagation with ABCD matrices and resonator eigenmodes.

Conventions: q = z + i*z_R (z measured from the waist, positive downstream),
concave mirrors have R > 0, lengths in metres.  ``m2`` follows the embedded
Gaussian convention: the real beam radius is the embedded radius times
sqrt(m2), and m2 plays no part in cavity solving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .errors import (
    DomainError,
    IncompatibleBeamsError,
    InstabilityError,
    InvalidElementError,
    PhysicsError,
    PropagationSingularityError,
)

TANGENTIAL = "tangential"
SAGITTAL = "sagittal"
PLANES = (TANGENTIAL, SAGITTAL)


@dataclass(frozen=True)
class BeamParameter:
    q: complex
    wavelength: float
    m2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "q", complex(self.q))
        if not self.q.imag > 0:
            raise PhysicsError(f"non-physical beam: Im(q) = {self.q.imag!r} must be > 0")
        if not self.wavelength > 0:
            raise PhysicsError("wavelength must be positive")
        if not self.m2 >= 1.0:
            raise PhysicsError(f"beam quality factor m2 = {self.m2!r} must be >= 1")

    @classmethod
    def from_waist(cls, waist, wavelength, distance=0.0, m2=1.0):
        """Beam ``distance`` downstream of a waist of real radius ``waist``."""
        z_r = math.pi * waist**2 / (wavelength * m2)
        return cls(complex(distance, z_r), wavelength, m2)

    @property
    def rayleigh_range(self):
        return self.q.imag

    @property
    def distance_to_waist(self):
        """Signed distance past the waist (negative: waist still ahead)."""
        return self.q.real

    @property
    def waist(self):
        """Real waist radius w0 = sqrt(lambda*m2*z_R/pi)."""
        return math.sqrt(self.wavelength * self.m2 * self.q.imag / math.pi)

    @property
    def embedded_radius(self):
        inv = 1.0 / self.q
        return math.sqrt(-self.wavelength / (math.pi * inv.imag))

    @property
    def radius(self):
        """Real 1/e^2 beam radius at this plane."""
        return self.embedded_radius * math.sqrt(self.m2)

    @property
    def curvature_radius(self):
        inv = (1.0 / self.q).real
        return math.inf if inv == 0 else 1.0 / inv

    @property
    def divergence(self):
        """Far-field half-angle divergence."""
        return self.waist / self.rayleigh_range


@dataclass(frozen=True)
class RayMatrix:
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def __matmul__(self, other: "RayMatrix") -> "RayMatrix":
        return RayMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @property
    def determinant(self):
        return self.a * self.d - self.b * self.c

    @property
    def half_trace(self):
        return 0.5 * (self.a + self.d)

    def to_array(self):
        return np.array([[self.a, self.b], [self.c, self.d]])


@dataclass(frozen=True)
class FreeSpace:
    d: float

    def __post_init__(self):
        if not self.d >= 0:
            raise InvalidElementError(f"free-space length must be >= 0, got {self.d!r}")


@dataclass(frozen=True)
class ThinLens:
    f: float

    def __post_init__(self):
        if self.f == 0 or not math.isfinite(self.f):
            raise InvalidElementError(f"thin lens focal length must be finite and non-zero, got {self.f!r}")


@dataclass(frozen=True)
class CurvedMirror:
    R: float
    incidence_angle: float = 0.0
    plane: str = TANGENTIAL

    def __post_init__(self):
        if self.R == 0 or not math.isfinite(self.R):
            raise InvalidElementError(f"mirror radius of curvature must be finite and non-zero, got {self.R!r}")
        if self.plane not in PLANES:
            raise InvalidElementError(f"unknown transverse plane {self.plane!r}")
        if not abs(self.incidence_angle) < math.pi / 2:
            raise InvalidElementError("incidence angle must be below 90 degrees")

    @property
    def focal_length(self):
        cos = math.cos(self.incidence_angle)
        if self.plane == TANGENTIAL:
            return self.R * cos / 2.0
        return self.R / (2.0 * cos)


@dataclass(frozen=True)
class Slab:
    d: float
    n: float

    def __post_init__(self):
        if not self.d >= 0:
            raise InvalidElementError(f"slab thickness must be >= 0, got {self.d!r}")
        if not self.n >= 1:
            raise InvalidElementError(f"slab refractive index must be >= 1, got {self.n!r}")


OpticalElement = Union[FreeSpace, ThinLens, CurvedMirror, Slab]


def ray_matrix(element: OpticalElement, plane: str | None = None) -> RayMatrix:
    """ABCD matrix of one element.  ``plane`` overrides a mirror's own plane."""
    if isinstance(element, FreeSpace):
        return RayMatrix(1.0, element.d, 0.0, 1.0)
    if isinstance(element, ThinLens):
        return RayMatrix(1.0, 0.0, -1.0 / element.f, 1.0)
    if isinstance(element, CurvedMirror):
        if plane is not None and plane != element.plane:
            element = replace(element, plane=plane)
        return RayMatrix(1.0, 0.0, -1.0 / element.focal_length, 1.0)
    if isinstance(element, Slab):
        return RayMatrix(1.0, element.d / element.n, 0.0, 1.0)
    raise InvalidElementError(f"unknown optical element {element!r}")


def compose(elements: Sequence[OpticalElement], plane: str | None = None) -> RayMatrix:
    """Matrix of ``elements`` traversed in order (first element acts first)."""
    m = RayMatrix.identity()
    for el in elements:
        m = ray_matrix(el, plane) @ m
    return m


def propagate_q(beam: BeamParameter, m: RayMatrix) -> BeamParameter:
    num = m.a * beam.q + m.b
    den = m.c * beam.q + m.d
    if abs(den) <= 1e-300 or abs(den) < 1e-14 * abs(num):
        raise PropagationSingularityError("c*q + d vanishes; beam is focused to a point at infinity")
    return BeamParameter(num / den, beam.wavelength, beam.m2)


@dataclass(frozen=True)
class RingCavity:
    """One full round trip starting at the reference plane."""

    elements: tuple
    wavelength: float
    m2: float = 1.0
    planes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.wavelength > 0:
            raise PhysicsError("cavity wavelength must be positive")
        for name, idx in self.planes.items():
            if not 0 <= idx <= len(self.elements):
                raise PhysicsError(f"plane {name!r} index {idx} outside the element list")

    def round_trip(self, plane: str = TANGENTIAL) -> RayMatrix:
        return compose(self.elements, plane)

    def stability(self, plane: str = TANGENTIAL) -> float:
        """Half trace (A+D)/2 of the round trip; stable iff its magnitude is < 1."""
        return self.round_trip(plane).half_trace

    def is_stable(self, plane: str = TANGENTIAL) -> bool:
        return abs(self.stability(plane)) < 1.0

    @property
    def length(self):
        """Geometric round-trip length."""
        return sum(getattr(el, "d", 0.0) for el in self.elements)


def cavity_eigenmode(cavity: RingCavity, plane: str = TANGENTIAL) -> BeamParameter:
    """Self-consistent beam at the cavity reference plane."""
    m = cavity.round_trip(plane)
    half = m.half_trace
    if not abs(half) < 1.0:
        raise InstabilityError(half)
    if m.b == 0:
        raise PropagationSingularityError("round-trip B element is zero; eigenmode undefined")
    # 1/q = (D - A)/(2B) - i sqrt(1 - half^2)/|B|
    inv_q = complex((m.d - m.a) / (2.0 * m.b), -math.sqrt(1.0 - half * half) / abs(m.b))
    return BeamParameter(1.0 / inv_q, cavity.wavelength, cavity.m2)


def beam_at(cavity: RingCavity, position: int | str, plane: str = TANGENTIAL) -> BeamParameter:
    """Eigenmode after traversing ``position`` elements (or a named plane)."""
    if isinstance(position, str):
        try:
            position = cavity.planes[position]
        except KeyError:
            raise PhysicsError(f"cavity has no plane named {position!r}") from None
    q0 = cavity_eigenmode(cavity, plane)
    return propagate_q(q0, compose(cavity.elements[:position], plane))


def mode_match_overlap(q1: BeamParameter, q2: BeamParameter) -> float:
    """Power coupling between two fundamental modes evaluated at the same plane."""
    if not math.isclose(q1.wavelength, q2.wavelength, rel_tol=1e-9):
        raise IncompatibleBeamsError(
            f"wavelengths differ: {q1.wavelength!r} vs {q2.wavelength!r}"
        )
    den = abs(q1.q.conjugate() - q2.q) ** 2
    return 4.0 * q1.q.imag * q2.q.imag / den


@dataclass(frozen=True)
class ThermalLensModel:
    k_thermal: float  # W*m

    def __post_init__(self):
        if not self.k_thermal > 0:
            raise PhysicsError("k_thermal must be positive")

    @classmethod
    def calibrate(cls, focal_length, absorbed_pump):
        return cls(focal_length * absorbed_pump)


def thermal_focal_length(model: ThermalLensModel, absorbed_pump: float) -> float:
    if not absorbed_pump > 0:
        raise DomainError(f"absorbed pump power must be > 0, got {absorbed_pump!r}")
    return model.k_thermal / absorbed_pump


def bowtie_ring(
    roc,
    concave_separation,
    plane_separation,
    total_length,
    wavelength,
    incidence_angle=0.0,
    thermal_focal=None,
    m2=1.0,
):
    """Four-mirror bow-tie ring, reference plane midway between the concave mirrors.

    The two diagonal legs share what is left of ``total_length`` equally. A
    thermal lens, when given, sits at the middle of the plane-mirror leg.
    Named planes: ``focus`` (reference) and ``rod``.
    """
    diagonal = (total_length - concave_separation - plane_separation) / 2.0
    if diagonal < 0:
        raise PhysicsError("leg lengths exceed the total ring length")
    half = concave_separation / 2.0
    mirror = CurvedMirror(roc, incidence_angle)
    elements = [FreeSpace(half), mirror, FreeSpace(diagonal)]
    if thermal_focal is None:
        elements += [FreeSpace(plane_separation / 2.0), FreeSpace(plane_separation / 2.0)]
    else:
        elements += [FreeSpace(plane_separation / 2.0), ThinLens(thermal_focal), FreeSpace(plane_separation / 2.0)]
    elements += [FreeSpace(diagonal), mirror, FreeSpace(half)]
    return RingCavity(tuple(elements), wavelength, m2, planes={"focus": 0, "rod": 4})
