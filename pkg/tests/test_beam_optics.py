import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from twinbeam import beam_optics as bo
from twinbeam.errors import (
    DomainError,
    IncompatibleBeamsError,
    InstabilityError,
    InvalidElementError,
    PropagationSingularityError,
)

LAM = 1.08e-6


def test_free_space_zero_is_identity():
    m = bo.ray_matrix(bo.FreeSpace(0.0))
    assert m.to_array().tolist() == [[1.0, 0.0], [0.0, 1.0]]


def test_mirror_normal_incidence_is_lens():
    for plane in bo.PLANES:
        m = bo.ray_matrix(bo.CurvedMirror(0.05, 0.0, plane))
        assert m.c == pytest.approx(-40.0)


def test_mirror_astigmatism():
    t = bo.CurvedMirror(0.05, 0.1, bo.TANGENTIAL)
    s = bo.CurvedMirror(0.05, 0.1, bo.SAGITTAL)
    assert bo.ray_matrix(t).c == pytest.approx(-40.0 / math.cos(0.1))
    assert bo.ray_matrix(s).c == pytest.approx(-40.0 * math.cos(0.1))
    assert t.focal_length < 0.025 < s.focal_length


def test_plane_argument_overrides_element():
    m = bo.CurvedMirror(0.05, 0.2, bo.TANGENTIAL)
    assert bo.ray_matrix(m, bo.SAGITTAL).c == pytest.approx(-40.0 * math.cos(0.2))


def test_slab_reduced_length():
    assert bo.ray_matrix(bo.Slab(0.007, 1.83)).b == pytest.approx(0.007 / 1.83)


@pytest.mark.parametrize(
    "make",
    [lambda: bo.ThinLens(0.0), lambda: bo.CurvedMirror(0.0), lambda: bo.Slab(0.01, 0.9), lambda: bo.FreeSpace(-1e-3)],
)
def test_invalid_elements(make):
    with pytest.raises(InvalidElementError):
        make()


def test_identity_propagation():
    b = bo.BeamParameter.from_waist(40e-6, LAM, distance=0.01)
    assert bo.propagate_q(b, bo.RayMatrix.identity()).q == b.q


def test_waist_translation():
    b = bo.BeamParameter.from_waist(40e-6, LAM)
    out = bo.propagate_q(b, bo.ray_matrix(bo.FreeSpace(0.1)))
    assert out.q == pytest.approx(complex(0.1, b.rayleigh_range))


def test_radius_at_rayleigh_range():
    b = bo.BeamParameter.from_waist(40e-6, LAM)
    out = bo.propagate_q(b, bo.ray_matrix(bo.FreeSpace(b.rayleigh_range)))
    assert out.radius == pytest.approx(40e-6 * math.sqrt(2), rel=1e-12)


def test_singular_propagation():
    # with real entries and Im q > 0, c*q + d vanishes only for c = d = 0
    b = bo.BeamParameter(1j * 0.01, LAM)
    with pytest.raises(PropagationSingularityError):
        bo.propagate_q(b, bo.RayMatrix(1.0, 0.0, 0.0, 0.0))


def test_m2_embedded_convention():
    b = bo.BeamParameter.from_waist(40e-6, LAM, m2=1.44)
    assert b.waist == pytest.approx(40e-6)
    assert b.embedded_radius == pytest.approx(40e-6 / 1.2)


def _two_mirror(L, R):
    # symmetric linear resonator unfolded into one round trip from the centre
    return bo.RingCavity(
        (bo.FreeSpace(L / 2), bo.CurvedMirror(R), bo.FreeSpace(L), bo.CurvedMirror(R), bo.FreeSpace(L / 2)), LAM
    )


@pytest.mark.parametrize("ratio", [0.3, 0.7, 1.5, 1.9])
def test_symmetric_resonator_waist(ratio):
    L = 0.1
    R = L / ratio
    w0 = bo.cavity_eigenmode(_two_mirror(L, R)).waist
    assert w0**2 == pytest.approx(LAM / (2 * math.pi) * math.sqrt(L * (2 * R - L)), rel=1e-10)


def test_confocal_waist():
    # exactly confocal is marginal (|m| = 1); approach it from the stable side
    L = 0.1
    w0 = bo.cavity_eigenmode(_two_mirror(L, L * (1 + 1e-5))).waist
    assert w0**2 == pytest.approx(LAM * L / (2 * math.pi), rel=1e-4)


def test_unstable_cavity_raises():
    cav = bo.RingCavity((bo.FreeSpace(0.2), bo.CurvedMirror(0.05), bo.FreeSpace(0.2), bo.CurvedMirror(0.05)), LAM)
    assert not cav.is_stable()
    with pytest.raises(InstabilityError) as info:
        bo.cavity_eigenmode(cav)
    assert abs(info.value.half_trace) > 1


def test_bowtie_cold_waist():
    cav = bo.bowtie_ring(0.05, 0.057, 0.12, 0.33, LAM)
    assert cav.length == pytest.approx(0.33)
    w = bo.beam_at(cav, "focus").radius
    assert 30e-6 <= w <= 50e-6


def test_bowtie_thermal_rod_waist():
    k = bo.ThermalLensModel.calibrate(0.30, 1.8)
    f = bo.thermal_focal_length(k, 1.8)
    cav = bo.bowtie_ring(0.05, 0.057, 0.12, 0.33, LAM, thermal_focal=f)
    assert 150e-6 <= bo.beam_at(cav, "rod").radius <= 260e-6


def test_thermal_focal_length():
    m = bo.ThermalLensModel(0.54)
    assert bo.thermal_focal_length(m, 1.8) == pytest.approx(0.30)
    assert bo.thermal_focal_length(m, 0.9) == pytest.approx(0.60)
    with pytest.raises(DomainError):
        bo.thermal_focal_length(m, 0.0)


def test_overlap_identity_and_waists():
    a = bo.BeamParameter.from_waist(40e-6, LAM)
    b = bo.BeamParameter.from_waist(60e-6, LAM)
    assert bo.mode_match_overlap(a, a) == pytest.approx(1.0)
    w1, w2 = 40e-6**2, 60e-6**2
    assert bo.mode_match_overlap(a, b) == pytest.approx(4 * w1 * w2 / (w1 + w2) ** 2)


def test_overlap_axial_offset_against_integral():
    a = bo.BeamParameter.from_waist(40e-6, LAM)
    b = bo.BeamParameter.from_waist(40e-6, LAM, distance=a.rayleigh_range)
    eta = bo.mode_match_overlap(a, b)
    assert eta == pytest.approx(0.8)

    # 1-D overlap of the two field profiles at a common plane, squared for both axes
    k = 2 * math.pi / LAM

    def field(q, x):
        return np.exp(-1j * k * x**2 / (2 * q)) / np.sqrt(q)

    lim = 10 * 40e-6
    re = quad(lambda x: (field(a.q, x) * np.conj(field(b.q, x))).real, -lim, lim, limit=200)[0]
    im = quad(lambda x: (field(a.q, x) * np.conj(field(b.q, x))).imag, -lim, lim, limit=200)[0]
    na = quad(lambda x: abs(field(a.q, x)) ** 2, -lim, lim)[0]
    nb_ = quad(lambda x: abs(field(b.q, x)) ** 2, -lim, lim)[0]
    one_d = (re**2 + im**2) / (na * nb_)
    assert one_d**2 == pytest.approx(eta, rel=1e-6)


def test_overlap_wavelength_mismatch():
    with pytest.raises(IncompatibleBeamsError):
        bo.mode_match_overlap(bo.BeamParameter.from_waist(4e-5, LAM), bo.BeamParameter.from_waist(4e-5, 5.4e-7))


# property tests

elements = st.one_of(
    st.builds(bo.FreeSpace, st.floats(0.0, 1.0)),
    st.builds(bo.ThinLens, st.one_of(st.floats(0.01, 10.0), st.floats(-10.0, -0.01))),
    st.builds(
        bo.CurvedMirror,
        st.one_of(st.floats(0.01, 2.0), st.floats(-2.0, -0.01)),
        st.floats(0.0, 0.5),
        st.sampled_from(bo.PLANES),
    ),
    st.builds(bo.Slab, st.floats(0.0, 0.05), st.floats(1.0, 2.5)),
)


@settings(max_examples=1000, deadline=None)
@given(st.lists(elements, min_size=1, max_size=12))
def test_determinant_preserved(chain_):
    m = bo.compose(chain_)
    assert m.determinant == pytest.approx(1.0, abs=1e-9 * max(1.0, abs(m.a * m.d)))


def test_long_composition_determinant():
    rng = np.random.default_rng(3)
    els = [bo.FreeSpace(rng.uniform(0, 0.1)) if i % 2 else bo.ThinLens(rng.uniform(0.2, 1.0)) for i in range(1000)]
    assert bo.compose(els).determinant == pytest.approx(1.0, abs=1e-9)


def test_compose_is_ordered_product():
    els = [bo.FreeSpace(0.1), bo.ThinLens(0.2), bo.FreeSpace(0.05)]
    direct = bo.ray_matrix(els[2]).to_array() @ bo.ray_matrix(els[1]).to_array() @ bo.ray_matrix(els[0]).to_array()
    assert np.allclose(bo.compose(els).to_array(), direct)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.03, 0.2), st.floats(0.03, 0.08), st.floats(0.1, 2.0))
def test_eigenmode_fixed_point(plane_sep, concave_sep, thermal):
    cav = bo.bowtie_ring(0.05, concave_sep, plane_sep, concave_sep + plane_sep + 0.15, LAM, thermal_focal=thermal)
    if not cav.is_stable():
        return
    q = bo.cavity_eigenmode(cav)
    back = bo.propagate_q(q, cav.round_trip())
    assert abs(back.q - q.q) <= 1e-9 * abs(q.q)


@settings(max_examples=200, deadline=None)
@given(st.floats(10e-6, 500e-6), st.floats(-0.5, 0.5), st.floats(10e-6, 500e-6), st.floats(-0.5, 0.5))
def test_overlap_symmetry(w1, z1, w2, z2):
    a = bo.BeamParameter.from_waist(w1, LAM, z1)
    b = bo.BeamParameter.from_waist(w2, LAM, z2)
    eta = bo.mode_match_overlap(a, b)
    assert eta == pytest.approx(bo.mode_match_overlap(b, a), rel=1e-12)
    assert 0.0 <= eta <= 1.0 + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(10e-6, 500e-6), st.floats(-1.0, 1.0))
def test_free_propagation_matches_gaussian_formula(w0, z):
    b = bo.propagate_q(bo.BeamParameter.from_waist(w0, LAM), bo.ray_matrix(bo.FreeSpace(abs(z))))
    zr = math.pi * w0**2 / LAM
    assert b.radius == pytest.approx(w0 * math.sqrt(1 + (z / zr) ** 2), rel=1e-6)
    assert b.waist == pytest.approx(w0, rel=1e-6)
    assert b.divergence == pytest.approx(LAM / (math.pi * w0), rel=1e-6)
