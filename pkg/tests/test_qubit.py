import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cwlm.errors import InvalidPolarization, InvalidPostSelection
from cwlm.qubit import (SIGMA_X, BlochVector, HamiltonianParams, bloch_to_density,
                        build_postselection, density_to_bloch, evolution_operator, expectation,
                        frame_rotate, is_density_matrix)

unit = st.floats(-1, 1, allow_nan=False)
vectors = st.tuples(unit, unit, unit).filter(lambda v: sum(c * c for c in v) <= 1)


def test_bloch_examples():
    assert np.allclose(bloch_to_density((0, 0, 0)), np.eye(2) / 2)
    assert np.allclose(bloch_to_density((0, 0, 1)), np.diag([1, 0]))
    assert np.allclose(bloch_to_density((1, 0, 0)), np.full((2, 2), 0.5))


def test_bloch_rejects_long_vectors():
    with pytest.raises(InvalidPolarization):
        bloch_to_density((0.8, 0.7, 0.0))
    BlochVector(1.0 + 5e-13, 0, 0)  # inside the tolerance


@given(vectors)
def test_bloch_roundtrip(v):
    rho = bloch_to_density(v)
    assert is_density_matrix(rho)
    got = [expectation(rho, a) for a in "xyz"]
    assert np.allclose(got, v, atol=1e-12)
    assert np.allclose(density_to_bloch(rho).as_array(), v, atol=1e-12)


def test_expectation_examples():
    assert expectation(bloch_to_density("Z+"), "z") == pytest.approx(1)
    assert expectation(np.eye(2) / 2, "x") == pytest.approx(0)
    assert expectation(bloch_to_density((1, 0, 0)), "x") == pytest.approx(1)


def test_postselection_examples():
    assert np.allclose(build_postselection("Z-").operator, np.diag([0, 1]))
    f0 = build_postselection({"mode": "faulty", "psi1": "Z+", "psi2": "Z-", "p_e": 0.0})
    assert np.allclose(f0.operator, np.diag([1, 0]))
    half = build_postselection({"mode": "faulty", "psi1": "Z+", "psi2": "Z-", "p_e": 0.5})
    assert np.allclose(half.operator, np.eye(2) / 2)
    assert not build_postselection("none").conditioned


def test_postselection_errors():
    with pytest.raises(InvalidPostSelection):
        build_postselection(None, psi1="Z+", psi2="X+", p_e=0.1)
    with pytest.raises(InvalidPostSelection):
        build_postselection(None, psi1="Z+", p_e=1.5)
    with pytest.raises(InvalidPostSelection):
        build_postselection((0.5, 0, 0))  # pure state needs a unit vector


@given(st.floats(0, 1), vectors.filter(lambda v: np.linalg.norm(v) > 0.1))
def test_faulty_swap_symmetry(p_e, v):
    n = np.asarray(v) / np.linalg.norm(v)
    a = build_postselection(None, psi1=tuple(n), psi2=tuple(-n), p_e=p_e)
    b = build_postselection(None, psi1=tuple(-n), psi2=tuple(n), p_e=1 - p_e)
    assert np.allclose(a.operator, b.operator, atol=1e-12)
    assert np.trace(a.operator) == pytest.approx(1)


def test_frame_rotate_examples():
    om = 1.7
    h = HamiltonianParams(omega_x=om)
    p = build_postselection("Z+")
    assert np.allclose(frame_rotate(p, h, 0.0).operator, p.operator)
    assert np.allclose(frame_rotate(p, h, 2 * np.pi / om).operator, p.operator, atol=1e-12)
    assert np.allclose(frame_rotate(p, h, np.pi / om).operator, np.diag([0, 1]), atol=1e-12)


def test_evolution_operator_matches_scipy():
    from scipy.linalg import expm
    h = HamiltonianParams(0.3, -1.1, 0.7)
    assert np.allclose(evolution_operator(h, 2.3), expm(-1j * h.matrix() * 2.3), atol=1e-13)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 10), st.floats(0, 1))
def test_frame_rotate_preserves_spectrum(ox, oy, d, t, p_e):
    post = build_postselection(None, psi1="X+", p_e=p_e)
    rot = frame_rotate(post, HamiltonianParams(ox, oy, d), t)
    assert np.allclose(np.linalg.eigvalsh(rot.operator), np.linalg.eigvalsh(post.operator), atol=1e-12)


def test_sigma_x_constant():
    assert np.allclose(SIGMA_X @ SIGMA_X, np.eye(2))
