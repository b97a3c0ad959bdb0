import numpy as np
import pytest
from hypothesis import given, strategies as st

from cwlm.distributions import invert_characteristic
from cwlm.errors import GridError, ZeroOverlap
from cwlm.shifts import (PolarizationPair, RadialBlocks, ShiftMeasure, cdf_distance_to_weights,
                         convolve_with_gaussian, marginal_density, radial_profiles,
                         regularized_density_2d, shift_char_decomposed, shift_char_exact,
                         shift_density_1d, shift_moments, shift_quasi_2d, shift_weights_1d)

from conftest import random_bloch

ZZ = PolarizationPair.of("Z+", "Z+")
GENERIC = PolarizationPair.of((0.3, -0.5, 0.6), (0.7, 0.2, -0.1))


@pytest.fixture(scope="module")
def blocks_01():
    return RadialBlocks.build(0.1)


@pytest.mark.parametrize("p_i,p_f,axis,expected", [
    ("Z+", "Z+", "x", (0.25, 0.5, 0.25)),
    ("Z+", (0, 0, 0), "x", (0.5, 0.0, 0.5)),
    ("X+", (0, 0, 0), "x", (0.0, 0.0, 1.0)),
    ("X+", "X+", "x", (0.0, 0.0, 1.0)),
    ("Z+", "Z+", "z", (0.0, 0.0, 1.0)),
    ("X+", "X-", "z", None),
])
def test_weights_examples(p_i, p_f, axis, expected):
    pp = PolarizationPair.of(p_i, p_f)
    if expected is None:
        with pytest.raises(ZeroOverlap):
            shift_weights_1d(pp, axis)
        return
    assert shift_weights_1d(pp, axis) == pytest.approx(expected, abs=1e-14)


def test_weights_sum_and_mean(rng):
    for _ in range(50):
        pp = PolarizationPair.of(random_bloch(rng, 1.0), random_bloch(rng, 1.0))
        if pp.overlap < 1e-2:
            continue
        mean, _ = shift_moments(pp)
        for k, axis in enumerate("xyz"):
            w = shift_weights_1d(pp, axis)
            assert w.sum() == pytest.approx(1, abs=1e-12)
            assert w @ [-1, 0, 1] == pytest.approx(mean[k], abs=1e-12)


@given(st.lists(st.floats(-6, 6), min_size=3, max_size=3))
def test_conjugate_symmetry(chi):
    chi = np.array(chi)
    assert shift_char_exact(GENERIC, -chi) == pytest.approx(np.conj(shift_char_exact(GENERIC, chi)),
                                                            abs=1e-13)


def test_degree_one_along_every_direction(rng):
    t = 2 * np.pi * np.arange(16) / 16
    for _ in range(20):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        coeffs = np.fft.fft(shift_char_exact(GENERIC, t[:, None] * n[None])) / 16
        assert np.abs(coeffs[2:15]).max() < 1e-14


def test_decomposition_matches_trace_formula(rng):
    for _ in range(30):
        pp = PolarizationPair.of(random_bloch(rng, 1.0), random_bloch(rng, 1.0))
        if pp.overlap < 1e-2:
            continue
        chi = rng.normal(scale=4, size=(40, 3))
        chi[0] = 0
        assert np.allclose(shift_char_exact(pp, chi), shift_char_decomposed(pp, chi), atol=1e-12)


def test_moments_by_finite_differences():
    h = 1e-4
    eye = np.eye(3)
    c = lambda x: shift_char_exact(GENERIC, x)
    mean, second = shift_moments(GENERIC)
    grad = np.array([(c(h * e) - c(-h * e)) / (2 * h) for e in eye])
    assert np.allclose(1j * grad, mean, atol=1e-7)
    hess = np.array([[(c(h * (a + b)) - c(h * (a - b)) - c(h * (b - a)) + c(-h * (a + b))) / (4 * h * h)
                      for b in eye] for a in eye])
    assert np.allclose(-hess.real, second, atol=1e-6)
    assert np.abs(hess.imag).max() < 1e-6


@pytest.mark.parametrize("pp", [ZZ, GENERIC, PolarizationPair.of("X+", "Y+")])
def test_2d_against_brute_force(pp, blocks_01):
    xi, n, half = 0.1, 1024, 170.0
    chi = (np.arange(n) - n // 2) * (2 * half / n)
    c1, c2 = np.meshgrid(chi, chi, indexing="ij")
    pts = np.stack([c1, c2, np.zeros_like(c1)], axis=-1)
    cf = np.conj(shift_char_decomposed(pp, pts)) * np.exp(-0.5 * xi ** 2 * (c1 ** 2 + c2 ** 2))
    (s1, s2), dens = invert_characteristic(cf, [chi, chi], 1.0)
    keep1, keep2 = np.abs(s1) < 1.6, np.abs(s2) < 1.6
    ref = dens.real[np.ix_(keep1, keep2)]
    ours = regularized_density_2d(pp, blocks_01, s1[keep1][:, None], s2[keep2][None])
    assert np.abs(ours - ref).max() < 1e-5 * np.abs(ref).max()


def test_ring_trough(blocks_01):
    """For P_i = P_f = z the interior of the unit disc carries the smooth
    negative density -(1/4 pi)(1 - r^2)^(-3/2)."""
    blocks = RadialBlocks.build(0.02)
    for r in (0.3, 0.5, 0.7):
        val = regularized_density_2d(ZZ, blocks, r, 0.0)
        assert val == pytest.approx(-(1 - r ** 2) ** -1.5 / (4 * np.pi), rel=1e-2)


def test_radial_profiles_keys_and_finiteness():
    prof = radial_profiles(np.array([0.2, 0.9, 1.0, 1.3]), 0.1)
    assert set(prof) == {"cos", "h1", "g1_over_r", "g2"}
    assert all(np.all(np.isfinite(v)) for v in prof.values())


def test_quasi_2d_mass_and_mean(blocks_01):
    sm = shift_quasi_2d(GENERIC, blocks=blocks_01, xi=0.1)
    assert isinstance(sm, ShiftMeasure)
    assert sm.mass == pytest.approx(1, abs=2e-6)
    mean, _ = shift_moments(GENERIC)
    m = [(sm.values * g).sum() * sm.cell for g in np.meshgrid(sm.s_x, sm.s_y, indexing="ij")]
    assert m == pytest.approx(mean[:2], abs=1e-5)
    with pytest.raises(GridError):
        shift_quasi_2d(GENERIC, xi=0.0)


def test_marginal_matches_smeared_weights(blocks_01):
    s = np.linspace(-1.6, 1.6, 1601)
    for axis in "xy":
        marg = marginal_density(GENERIC, blocks_01, s, axis)
        ref = shift_density_1d(GENERIC, axis, s, 0.1)
        assert np.abs(marg - ref).max() < 1e-5 * np.abs(ref).max()
        w = shift_weights_1d(GENERIC, axis)
        # separated atoms each contribute |w| xi sqrt(2/pi)
        expected = 0.1 * np.sqrt(2 / np.pi) * np.abs(w).sum()
        assert cdf_distance_to_weights(s, marg, w) == pytest.approx(expected, rel=2e-3)


def test_lorentzian_kernel():
    s = np.linspace(-4000, 4000, 800001)
    d = shift_density_1d(ZZ, "x", s, 0.05, kernel="lorentzian")
    assert np.trapezoid(d, s) == pytest.approx(1, abs=1e-4)
    assert d[np.argmin(np.abs(s))] == pytest.approx(0.5 / (np.pi * 0.05) + 0.5 * 0.05 / (np.pi * 1.0025),
                                                     rel=1e-12)
    with pytest.raises(ValueError):
        shift_density_1d(ZZ, "x", s[:3], 0.05, kernel="box")
    with pytest.raises(ValueError):
        shift_density_1d(ZZ, "x", s[:3], 0.0)


def test_convolution_of_weights():
    o = np.linspace(-6, 6, 1201)
    d = convolve_with_gaussian(shift_weights_1d(ZZ, "x"), 0.8, o)
    g = lambda m: np.exp(-(o - m) ** 2 / 1.28) / (0.8 * np.sqrt(2 * np.pi))
    assert np.allclose(d, 0.25 * g(-1) + 0.5 * g(0) + 0.25 * g(1), atol=1e-15)
    with pytest.raises(GridError):
        convolve_with_gaussian(np.ones(2), 0.8, o)


def test_convolution_independent_of_xi(blocks_01):
    o = np.linspace(-3, 3, 61)
    a = convolve_with_gaussian(shift_quasi_2d(GENERIC, xi=0.1, blocks=blocks_01), 0.6, o, o)
    b = convolve_with_gaussian(shift_quasi_2d(GENERIC, xi=0.07), 0.6, o, o)
    assert np.abs(a - b).max() < 1e-5 * np.abs(a).max()
    with pytest.raises(GridError):
        convolve_with_gaussian(shift_quasi_2d(GENERIC, xi=0.1, blocks=blocks_01), 0.05, o, o)
