import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import partial_distinguishability_p111, random_unit_vector
from homsim.errors import CapacityError, NumericalGuardError
from homsim.fock import ModeSpace, Statistics, port_distribution
from homsim.interferometer import apply_unitary, balanced_bs, output_distribution, tritter
from homsim.wavepacket import (
    JointSpectralAmplitude,
    Wavepacket,
    bunching_probability,
    dip_center,
    dip_fwhm,
    dip_scan,
    gram_vectors,
    hom_coincidence,
    jsa_dip_scan,
    lift_to_internal,
    overlap,
    simulated_hom_coincidence,
    three_photon_probability,
    triad_phase_scan,
    triad_vectors,
    visibility,
)

H = Wavepacket.from_vector((1, 0))
V = Wavepacket.from_vector((0, 1))


class TestOverlap:
    def test_identical(self):
        assert overlap(H, H) == 1
        p = Wavepacket.pulse(2.0, 0.5, 0.3)
        assert overlap(p, p) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert overlap(H, V) == 0

    def test_gaussian_formula(self):
        sigma, w0, dt = 1.3, 4.0, 0.7
        a, b = Wavepacket.pulse(w0, sigma), Wavepacket.pulse(w0, sigma, dt)
        expect = math.exp(-sigma**2 * dt**2 / 4) * cmath.exp(1j * w0 * dt)
        assert overlap(a, b) == pytest.approx(expect, abs=1e-12)

    def test_gaussian_matches_quadrature(self):
        # direct numerical integral of conj(phi_a) phi_b with unequal widths and centres
        a, b = Wavepacket.pulse(1.0, 0.8, -0.2), Wavepacket.pulse(1.4, 1.1, 0.9)
        w = np.linspace(-15, 15, 60001)

        def phi(g):
            return (math.pi * g.sigma**2) ** -0.25 * np.exp(-(w - g.omega0) ** 2 / (2 * g.sigma**2) + 1j * w * g.tau)

        num = np.trapezoid(np.conj(phi(a.gaussian)) * phi(b.gaussian), w)
        assert overlap(a, b) == pytest.approx(num, abs=1e-9)

    def test_decays_monotonically(self):
        p = Wavepacket.pulse(0.0, 1.0)
        mags = [abs(overlap(p, p.delayed(t))) for t in np.linspace(0, 20, 200)]
        assert all(x > y for x, y in zip(mags, mags[1:]))
        assert mags[-1] < 1e-40

    def test_mixed_forms_rejected(self):
        with pytest.raises(ValueError):
            overlap(H, Wavepacket.pulse(0, 1))

    def test_invariants(self):
        with pytest.raises(ValueError):
            Wavepacket.from_vector((1, 1))
        with pytest.raises(ValueError):
            Wavepacket.pulse(0.0, 0.0)
        with pytest.raises(ValueError):
            Wavepacket()


class TestHomCoincidence:
    def test_identical(self):
        assert hom_coincidence(H, H) == 0

    def test_orthogonal(self):
        assert hom_coincidence(H, V) == 0.5
        assert bunching_probability(H, V) == 0.5

    def test_half_overlap(self):
        d = Wavepacket.from_vector((1, 1), normalize=True)
        assert hom_coincidence(H, d) == pytest.approx(0.25)
        assert bunching_probability(H, d) == pytest.approx(0.75)


class TestDipScan:
    def test_identical_packets(self):
        curve = dip_scan(Wavepacket.pulse(0.0, 1.0), np.linspace(-4, 4, 81))
        assert curve.probability[40] == pytest.approx(0.0, abs=1e-12)
        assert visibility(curve) == pytest.approx(1.0, abs=1e-9)

    def test_long_delay_limit(self):
        curve = dip_scan(Wavepacket.pulse(0.0, 1.0), [50.0])
        assert curve.probability[0] == pytest.approx(0.5)

    def test_static_overlap(self):
        curve = dip_scan(Wavepacket.pulse(0.0, 1.0), np.linspace(-12, 12, 241), static_overlap=0.8)
        assert visibility(curve) == pytest.approx(0.64, abs=1e-9)

    def test_even_in_delay(self):
        curve = dip_scan(Wavepacket.pulse(3.0, 0.7), np.linspace(-5, 5, 101))
        np.testing.assert_allclose(curve.probability, curve.probability[::-1], atol=1e-15)

    def test_analytic_shape(self):
        taus = np.linspace(-3, 3, 31)
        curve = dip_scan(Wavepacket.pulse(0.0, 1.5), taus)
        np.testing.assert_allclose(curve.probability, (1 - np.exp(-1.5**2 * taus**2 / 2)) / 2, atol=1e-15)

    def test_fwhm(self):
        # half depth of (1 - exp(-s^2 t^2 / 2)) / 2 is at s t = sqrt(2 ln 2)
        curve = dip_scan(Wavepacket.pulse(0.0, 1.0), np.linspace(-8, 8, 1601))
        assert dip_fwhm(curve) == pytest.approx(2 * math.sqrt(2 * math.log(2)), abs=1e-4)

    def test_errors(self):
        with pytest.raises(ValueError):
            dip_scan(Wavepacket.pulse(0.0, 1.0), [])
        with pytest.raises(ValueError):
            visibility(dip_scan(Wavepacket.pulse(0.0, 1.0), [0.0]))


class TestLift:
    def test_identical_vectors_no_coincidence(self):
        space = ModeSpace(2, 2)
        d = Wavepacket.from_vector((1, 1j), normalize=True)
        out = apply_unitary(lift_to_internal([(0, d), (1, d)], space), balanced_bs())
        assert port_distribution(out).get((1, 1), 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal_vectors(self):
        assert simulated_hom_coincidence(H, V) == pytest.approx(0.5)

    def test_single_photon(self):
        s = lift_to_internal([(1, Wavepacket.from_vector((0.6, 0.8)))], ModeSpace(2, 2))
        assert s.particle_numbers() == {1}
        assert s.norm == pytest.approx(1.0)
        assert s.amplitude((0, 0, 0, 1)) == pytest.approx(0.8)

    def test_vector_too_long(self):
        with pytest.raises(ValueError):
            lift_to_internal([(0, (1, 0, 0))], ModeSpace(2, 2))

    def test_capacity(self):
        with pytest.raises(CapacityError):
            lift_to_internal([(0, (1,))] * 11, ModeSpace(1))

    def test_fermions_anti_bunch(self):
        assert simulated_hom_coincidence(H, H, Statistics.FERMION) == pytest.approx(1.0)
        assert simulated_hom_coincidence(H, V, Statistics.FERMION) == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_overlap_law_matches_pipeline(d, seed):
    rng = np.random.default_rng(seed)
    a = Wavepacket.from_vector(random_unit_vector(d, rng))
    b = Wavepacket.from_vector(random_unit_vector(d, rng))
    assert simulated_hom_coincidence(a, b) == pytest.approx(hom_coincidence(a, b), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi))
def test_global_phase_invisible(d, seed, phase):
    rng = np.random.default_rng(seed)
    vs = [random_unit_vector(d, rng) for _ in range(3)]
    plain = [Wavepacket.from_vector(v) for v in vs]
    shifted = [Wavepacket.from_vector(v * cmath.exp(1j * phase * (k + 1))) for k, v in enumerate(vs)]
    assert hom_coincidence(*shifted[:2]) == pytest.approx(hom_coincidence(*plain[:2]), abs=1e-12)
    space = ModeSpace(3, d)
    p1 = port_distribution(apply_unitary(lift_to_internal(list(enumerate(plain)), space), tritter()))
    p2 = port_distribution(apply_unitary(lift_to_internal(list(enumerate(shifted)), space), tritter()))
    for k in set(p1) | set(p2):
        assert p1.get(k, 0.0) == pytest.approx(p2.get(k, 0.0), abs=1e-12)


class TestTriad:
    def test_gram_embedding(self):
        vs = triad_vectors((0.5, 0.6, 0.7), 0.9)
        g = np.array([[np.vdot(a.vector, b.vector) for b in vs] for a in vs])
        assert abs(g[0, 1]) == pytest.approx(0.5)
        assert abs(g[1, 2]) == pytest.approx(0.6)
        assert abs(g[0, 2]) == pytest.approx(0.7)
        assert np.angle(g[0, 1] * g[1, 2] * g[2, 0]) == pytest.approx(0.9)

    def test_singular_gram(self):
        vs = gram_vectors(np.ones((3, 3)))
        np.testing.assert_allclose(np.abs([np.vdot(a, b) for a in vs for b in vs]), 1.0, atol=1e-12)

    def test_indistinguishable(self):
        curve = triad_phase_scan((1, 1, 1), np.linspace(-math.pi, math.pi, 13))
        np.testing.assert_allclose(curve.probability, 1 / 3, atol=1e-12)

    def test_distinguishable(self):
        curve = triad_phase_scan((0, 0, 0), np.linspace(-math.pi, math.pi, 13))
        np.testing.assert_allclose(curve.probability, 2 / 9, atol=1e-12)

    def test_one_zero_magnitude_constant(self):
        curve = triad_phase_scan((0, 0.6, 0.6), np.linspace(-math.pi, math.pi, 13))
        assert np.ptp(curve.probability) < 1e-12

    def test_high_overlap_varies_and_is_periodic(self):
        # r = 0.9 is realisable only while 1 - 3 r^2 + 2 r^3 cos(phi) >= 0
        limit = math.acos((3 * 0.81 - 1) / (2 * 0.729))
        phases = np.linspace(-0.95 * limit, 0.95 * limit, 21)
        curve = triad_phase_scan((0.9, 0.9, 0.9), phases)
        assert np.ptp(curve.probability) > 1e-3
        shifted = triad_phase_scan((0.9, 0.9, 0.9), phases + 2 * math.pi)
        np.testing.assert_allclose(shifted.probability, curve.probability, atol=1e-12)
        with pytest.raises(ValueError):
            triad_vectors((0.9, 0.9, 0.9), math.pi)

    def test_moderate_overlap_full_period(self):
        phases = np.linspace(-math.pi, math.pi, 73)
        curve = triad_phase_scan((0.5, 0.5, 0.5), phases)
        assert np.ptp(curve.probability) > 0.05
        assert curve.probability[0] == pytest.approx(curve.probability[-1], abs=1e-12)
        assert np.argmax(curve.probability) == 36

    @pytest.mark.parametrize("mags,phase", [((0.5, 0.5, 0.5), 0.7), ((0.3, 0.5, 0.4), -1.9), ((0.9, 0.9, 0.9), 0.1)])
    def test_matches_gram_formula(self, mags, phase):
        vs = [v.vector for v in triad_vectors(mags, phase)]
        r12, r23, r13 = np.vdot(vs[0], vs[1]), np.vdot(vs[1], vs[2]), np.vdot(vs[0], vs[2])
        expect = partial_distinguishability_p111(r12, r23, r13)
        assert three_photon_probability([Wavepacket.from_vector(v) for v in vs]) == pytest.approx(expect, abs=1e-12)

    def test_rejects_bad_magnitudes(self):
        with pytest.raises(ValueError):
            triad_vectors((1.2, 0.5, 0.5), 0.0)


class TestJsa:
    def test_normalisation_and_capacity(self):
        jsa = JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.02)
        w = np.full(jsa.K, jsa.domega)
        w[0] = w[-1] = jsa.domega / 2
        assert np.sum(np.outer(w, w) * np.abs(jsa.grid) ** 2) == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(CapacityError):
            JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.02, K=300)
        with pytest.raises(ValueError):
            JointSpectralAmplitude(np.ones((4, 4)), 1.0)

    def test_symmetric_jsa_zero_delay(self):
        jsa = JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.3)
        assert jsa_dip_scan(jsa, [0.0], [0.0]).probability[0] == pytest.approx(0.0, abs=1e-12)

    def test_matches_gaussian_dip(self):
        jsa = JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.02)
        taus = np.linspace(-4, 4, 41)
        ref = dip_scan(Wavepacket.pulse(0.0, 1.0), taus)
        np.testing.assert_allclose(jsa_dip_scan(jsa, [0.0], taus).probability, ref.probability, atol=1e-4)

    def test_group_delay_shifts_centre(self):
        jsa = JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.02)
        taus = np.linspace(-4, 4, 161)
        curve = jsa_dip_scan(jsa, [0.0, 1.3], taus)
        assert abs(dip_center(curve) - 1.3) <= taus[1] - taus[0]

    def test_odd_order_not_cancelled(self):
        jsa = JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.02)
        taus = np.linspace(-6, 6, 241)
        w0 = dip_fwhm(jsa_dip_scan(jsa, [0.0], taus))
        assert abs(dip_fwhm(jsa_dip_scan(jsa, [0, 0, 0, 2.0], taus)) - w0) / w0 > 0.02

    def test_separable_not_cancelled(self):
        jsa = JointSpectralAmplitude.separable_gaussian(1.0)
        taus = np.linspace(-12, 12, 481)
        w0 = dip_fwhm(jsa_dip_scan(jsa, [0.0], taus))
        assert dip_fwhm(jsa_dip_scan(jsa, [0, 0, 5.0], taus)) > 1.5 * w0

    def test_guards(self):
        coarse = JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.02, K=8)
        with pytest.raises(NumericalGuardError):
            jsa_dip_scan(coarse, [0.0], [0.0])
        jsa = JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.02)
        with pytest.raises(NumericalGuardError):
            jsa_dip_scan(jsa, [0.0], [math.pi / jsa.domega])


@settings(max_examples=15, deadline=None)
@given(st.floats(-5, 5))
def test_even_order_dispersion_cancels(beta2):
    jsa = JointSpectralAmplitude.anticorrelated_gaussian(1.0, 0.02)
    taus = np.linspace(-4, 4, 161)
    w0 = dip_fwhm(jsa_dip_scan(jsa, [0.0], taus))
    w = dip_fwhm(jsa_dip_scan(jsa, [0.0, 0.0, beta2], taus))
    assert abs(w - w0) / w0 < 0.01


def test_tritter_distribution_via_lift():
    # three identical internal states reproduce the single-mode tritter law
    space = ModeSpace(3, 2)
    d = Wavepacket.from_vector((0.6, 0.8j))
    out = port_distribution(apply_unitary(lift_to_internal([(0, d), (1, d), (2, d)], space), tritter()))
    exact = output_distribution(tritter(), (1, 1, 1))
    for occ, p in exact.items():
        assert out.get(occ, 0.0) == pytest.approx(p, abs=1e-12)
