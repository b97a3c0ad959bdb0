import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from cwlm.detectors import (EXPERIMENTAL_RABI, DetectorCorrelators, check_appendix_conditions,
                            check_pairwise_cs, check_pairwise_cs_delta, check_two_detector,
                            cross_noise_bound, delta_z, derived_quantities, scenario, validate)
from cwlm.errors import InvalidConfiguration
from cwlm.evolution import build_liouvillian, unvec
from cwlm.qubit import expectation

IDEAL = DetectorCorrelators.identical(s_qq=1.0, s_vv=1.0, a_vq=2.0)


def test_derived_quantities_examples():
    d = derived_quantities(DetectorCorrelators.identical(0.5, 1.0, 2.0), T=1.0)
    assert np.allclose(d.t_a, 1.0)
    assert np.allclose(d.sigma2, 0.25)
    assert np.allclose(derived_quantities(IDEAL).k, 1.0)
    assert derived_quantities(IDEAL).gamma == pytest.approx(2.0)


def test_zero_response_is_rejected():
    with pytest.raises(InvalidConfiguration):
        derived_quantities(DetectorCorrelators.identical(1.0, 1.0, 0.0))


def test_correlator_invariants():
    with pytest.raises(InvalidConfiguration):
        DetectorCorrelators.identical(-1.0, 1.0, 2.0)
    with pytest.raises(InvalidConfiguration):
        DetectorCorrelators(s_qq=[[1, 0.2], [0.1, 1]], s_vv=1.0, a_vq=2.0)


def test_pairwise_cs_examples():
    r = check_pairwise_cs(IDEAL, 0, 0)
    assert (r.lhs, r.rhs, r.passed) == (1.0, 1.0, True)
    assert not check_pairwise_cs(DetectorCorrelators.identical(0.9, 1.0, 2.0), 0, 0).passed
    zero = DetectorCorrelators.identical(0.0, 0.0, 0.0)
    assert check_pairwise_cs(zero, 0, 0).passed


def test_delta_z_examples():
    assert delta_z(0) == 0
    assert delta_z(1) == 0
    assert delta_z(1j) == pytest.approx(-1)


def test_delta_z_never_positive(rng):
    z = rng.uniform(0, 10, 10_000) * np.exp(2j * np.pi * rng.uniform(size=10_000))
    assert max(delta_z(v) for v in z) <= 1e-12


def test_delta_refined_bound_reduces_without_cross_noise():
    r = check_pairwise_cs_delta(IDEAL, 0)
    assert (r.lhs, r.rhs) == pytest.approx((1.0, 1.0))
    # a purely imaginary ratio S_QV/w makes Delta = -1 and the bound
    # degenerates to the plain Cauchy-Schwarz form
    c = DetectorCorrelators.identical(1.5, 1.0, 2.0, s_qv=0.5)
    plain = check_pairwise_cs(c, 0, 0)
    refined = check_pairwise_cs_delta(c, 0)
    assert refined.rhs >= plain.rhs - 1e-12


def test_two_detector_examples():
    r = check_two_detector(IDEAL)
    assert (r.lhs, r.rhs, r.passed) == (2.0, 2.0, True)
    r = check_two_detector(DetectorCorrelators.identical(0.5, 1.0, 2.0))
    assert (r.lhs, r.rhs, r.passed) == (1.0, 2.0, False)
    cross = DetectorCorrelators(s_qq=1.0, s_vv=1.0, a_vq=2.0, s_qv=[[0, 0.5], [0, 0]])
    assert check_two_detector(cross).rhs > 2.0
    assert not check_two_detector(cross).passed


def test_two_detector_needs_output_noise():
    with pytest.raises(InvalidConfiguration):
        check_two_detector(DetectorCorrelators.identical(1.0, 0.0, 2.0))


def test_appendix_examples():
    rep = check_appendix_conditions(IDEAL)
    assert rep.passed
    assert rep.cond1.lhs == pytest.approx(rep.cond1.rhs) == pytest.approx(2.0)
    assert rep.cond1.rhs == pytest.approx(rep.cond2_1.rhs) == pytest.approx(rep.cond2_2.rhs)
    c = DetectorCorrelators(s_qq=1.0, s_vv=1.0, a_vq=2.0, s_qv=[[0, 0.5], [0, 0]])
    assert cross_noise_bound(c, -1) == pytest.approx(3.25)
    assert cross_noise_bound(c, +1) == pytest.approx(1.25)
    assert check_appendix_conditions(c).cond2_2.rhs == pytest.approx(3.25)


def test_good_amplifier_form():
    c = DetectorCorrelators.identical(1.0, 1.0, 2.0, a_qv=0.4)
    rep = check_appendix_conditions(c)
    assert rep.cond1.rhs == pytest.approx(2 * 1.6 ** 2 / 4)
    assert rep.cond1_good_amplifier.rhs == pytest.approx(2.0)


positive = st.floats(0.01, 10)


@given(positive, positive, positive, positive, st.floats(0.2, 5), st.floats(0.2, 5))
def test_two_detector_matches_condition_one(q1, q2, v1, v2, a1, a2):
    c = DetectorCorrelators(s_qq=[q1, q2], s_vv=[v1, v2], a_vq=[a1, a2])
    assert check_two_detector(c).passed == check_appendix_conditions(c).cond1.passed


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10),
       st.floats(0.1, 3), st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 0.5))
def test_verdicts_invariant_under_rescaling(alpha, b1, b2, q, x12, x21, aqv):
    c = DetectorCorrelators(s_qq=[q, 1.1 * q], s_vv=[1.0, 0.8], a_vq=[2.0, 1.7],
                            s_qv=[[0.1, x12], [x21, -0.2]], a_qv=aqv)
    before = [r.passed for r in validate(c)]
    after = [r.passed for r in validate(c.scaled(alpha, (b1, b2)))]
    assert before == after


def test_uniform_power_rescaling_is_not_an_invariance():
    # Multiplying S_QQ, S_VV, a^2 by the same factor changes the verdict.
    lam = 0.5
    c = DetectorCorrelators.identical(1.0 * lam, 1.0 * lam, 2.0 * np.sqrt(lam))
    assert not check_pairwise_cs(c, 0, 0).passed


def test_scenario_presets():
    ideal = scenario("ideal")
    assert ideal.ideality() == pytest.approx(1.0)
    assert all(r.passed for r in validate(ideal.correlators))
    exp = scenario("experimental")
    assert exp.ideality() == pytest.approx(11.8, abs=0.05)
    assert 2 / exp.t_a.mean() == pytest.approx(1 / 92)
    det = scenario("experimental_detuned")
    assert det.hamiltonian.delta / det.hamiltonian.omega_x == pytest.approx(1.7)
    assert all(r.passed for r in validate(exp.effective_correlators()))
    with pytest.raises(InvalidConfiguration):
        scenario("bogus")


def _steady_sigma_x(cfg):
    w, v = np.linalg.eig(build_liouvillian(cfg).matrix)
    rho = unvec(v[:, np.argmin(np.abs(w))])
    return expectation(rho / np.trace(rho), "x")


def test_experimental_rabi_frequency():
    """The preset Rabi frequency is the one for which detuning by 1.7 Omega
    gives the largest steady-state |<sigma_x>|."""
    cfg = scenario("experimental")
    res = minimize_scalar(lambda d: _steady_sigma_x(cfg.with_hamiltonian(delta=d)),
                          bounds=(0, 2), method="bounded", options={"xatol": 1e-10})
    assert res.x / EXPERIMENTAL_RABI == pytest.approx(1.7, rel=1e-5)
